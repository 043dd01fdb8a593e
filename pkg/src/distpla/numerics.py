"""Scalar special functions and small linear-algebra helpers.

Everything statistical in this package reduces to a handful of primitives:
chi-square tails and quantiles, the regularized incomplete beta, Hermitian
eigensystems, Cholesky factors, and bracketed scalar root finding.  They are
collected here (backed by scipy/numpy) so the physics modules read in terms
of the quantities they actually use and so the tolerances are pinned in one
place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.optimize import brentq


class NumericsError(ValueError):
    """Domain violation or numerical failure in a low-level routine."""


def chi2_cdf(x: float, dof: int) -> float:
    """P(X <= x) for X chi-square with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise NumericsError(f"dof must be positive, got {dof}")
    if x < 0:
        return 0.0
    return float(special.gammainc(dof / 2.0, x / 2.0))


def chi2_tail(x: float, dof: int) -> float:
    """P(X > x), computed directly so small tails keep relative accuracy."""
    if dof <= 0:
        raise NumericsError(f"dof must be positive, got {dof}")
    if x < 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def chi2_quantile(p: float, dof: int) -> float:
    """Inverse of :func:`chi2_cdf` in its first argument."""
    if dof <= 0:
        raise NumericsError(f"dof must be positive, got {dof}")
    if not 0.0 < p < 1.0:
        raise NumericsError(f"quantile level must lie in (0, 1), got {p}")
    return float(2.0 * special.gammaincinv(dof / 2.0, p))


def regularized_incomplete_beta(q: float, a: float, b: float) -> float:
    """I_q(a, b), the regularized incomplete beta function.

    Normalized so that I_0 = 0 and I_1 = 1; satisfies the reflection
    identity I_q(a, b) = 1 - I_{1-q}(b, a).
    """
    if not 0.0 <= q <= 1.0:
        raise NumericsError(f"beta argument must lie in [0, 1], got {q}")
    if a <= 0 or b <= 0:
        raise NumericsError(f"beta shapes must be positive, got a={a}, b={b}")
    return float(special.betainc(a, b, q))


@dataclass(frozen=True)
class HermitianEigen:
    """Eigenvalues sorted descending with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eigendecomposition(m: np.ndarray, hermit_tol: float = 1e-10) -> HermitianEigen:
    """Full eigensystem of a Hermitian matrix, eigenvalues descending."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericsError(f"expected a square matrix, got shape {m.shape}")
    scale = max(float(np.linalg.norm(m)), 1.0)
    if float(np.linalg.norm(m - m.conj().T)) > hermit_tol * scale:
        raise NumericsError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2.0)
    order = np.argsort(values)[::-1]
    return HermitianEigen(values[order], vectors[:, order])


def cholesky_lower(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^H = m; raises on non-PD input."""
    try:
        return np.linalg.cholesky(np.asarray(m))
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"matrix is not positive definite: {exc}") from exc


def bracketed_root_find(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of a continuous scalar f on [lo, hi] with a sign change.

    The returned point never leaves the bracket.  Raises if f(lo) and
    f(hi) do not straddle zero.
    """
    if not lo < hi:
        raise NumericsError(f"invalid bracket [{lo}, {hi}]")
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NumericsError(f"no sign change on bracket: f({lo})={f_lo}, f({hi})={f_hi}")
    root = brentq(f, lo, hi, xtol=tol, rtol=max(tol, 4 * np.finfo(float).eps),
                  maxiter=max_iter)
    return float(min(max(root, lo), hi))
