"""GLRT channel authenticator.

The verifier knows the legitimate statistics (mu_A, Sigma_A) and accepts a
received channel h when the discriminant

    d(h) = 2 (h - mu_A)^H Sigma_A^{-1} (h - mu_A)

stays below a threshold.  Under the legitimate hypothesis d(h) is exactly
chi-square with 2 * (total antennas) degrees of freedom, which pins the
false-alarm rate/threshold pair in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .geometry import ChannelStatistics, Scenario, alice_statistics
from .numerics import chi2_quantile, chi2_tail, cholesky_lower


def threshold_for_pfa(p_fa: float, dof: int) -> float:
    """Acceptance threshold hitting a target false-alarm probability."""
    if not 0.0 < p_fa < 1.0:
        raise ValueError(f"false-alarm target must lie in (0, 1), got {p_fa}")
    return chi2_quantile(1.0 - p_fa, dof)


def pfa_of_threshold(threshold: float, dof: int) -> float:
    """False-alarm probability of a given threshold."""
    return chi2_tail(threshold, dof)


@dataclass(frozen=True)
class Authenticator:
    """Frozen verifier state: legitimate statistics plus derived factors.

    ``chol`` is the stacked lower Cholesky factor of Sigma_A,
    ``whitened_mean`` is L^{-1} mu_A, and ``mahalanobis_energy`` is
    M = mu_A^H Sigma_A^{-1} mu_A = ||L^{-1} mu_A||^2.
    """

    stats: ChannelStatistics
    threshold: float
    false_alarm_target: float
    total_dof: int
    chol: np.ndarray
    block_chols: tuple[np.ndarray, ...]
    whitened_mean: np.ndarray
    mahalanobis_energy: float


def make_authenticator(scenario: Scenario, p_fa: float | None = None) -> Authenticator:
    stats = alice_statistics(scenario)
    target = scenario.false_alarm_target if p_fa is None else p_fa
    dof = 2 * stats.dim
    chol = cholesky_lower(stats.cov)
    block_chols = tuple(cholesky_lower(c) for c in stats.block_covs)
    wmean = solve_triangular(chol, stats.mean, lower=True)
    m_energy = float(np.vdot(wmean, wmean).real)
    return Authenticator(
        stats=stats,
        threshold=threshold_for_pfa(target, dof),
        false_alarm_target=target,
        total_dof=dof,
        chol=chol,
        block_chols=block_chols,
        whitened_mean=wmean,
        mahalanobis_energy=m_energy,
    )


def discriminant(auth: Authenticator, h: np.ndarray) -> float | np.ndarray:
    """d(h) = 2 (h - mu_A)^H Sigma_A^{-1} (h - mu_A); batched over rows of a 2-D h."""
    h = np.asarray(h)
    centered = h - auth.stats.mean
    x = solve_triangular(auth.chol, centered.T if h.ndim == 2 else centered, lower=True)
    d = 2.0 * np.sum((x.conj() * x).real, axis=0)
    return d if h.ndim == 2 else float(d)


def block_discriminants(auth: Authenticator, h: np.ndarray) -> np.ndarray:
    """Per-array discriminant contributions; they sum to discriminant(auth, h)."""
    h = np.asarray(h)
    out = []
    for sl, chol, mu in zip(auth.stats.block_slices(), auth.block_chols,
                            auth.stats.block_means):
        x = solve_triangular(chol, h[sl] - mu, lower=True)
        out.append(2.0 * float(np.vdot(x, x).real))
    return np.asarray(out)


def accepts(auth: Authenticator, h: np.ndarray) -> bool | np.ndarray:
    d = discriminant(auth, h)
    return d < auth.threshold
