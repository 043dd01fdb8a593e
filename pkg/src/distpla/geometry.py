"""Deployment geometry and Rice-fading channel statistics.

A scenario is a set of remote radio heads (RRHs), each a uniform linear
array, plus transmitter positions on a 2-D floor plan.  Every transmitter
sees each array through a line-of-sight Rice channel: the mean carries the
carrier phase and the array steering response, the covariance the diffuse
part through a per-array antenna correlation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Correlation:
    """Receive-antenna correlation: identity or exponential rho^|k-l|."""

    kind: str = "identity"
    rho: float = 0.0

    def matrix(self, n: int) -> np.ndarray:
        if self.kind == "identity" or self.rho == 0.0:
            return np.eye(n)
        k = np.arange(n)
        return self.rho ** np.abs(k[:, None] - k[None, :])


@dataclass(frozen=True)
class RrhConfig:
    """One receive array: position, size, and its axis as a unit 2-vector."""

    id: str
    position: tuple[float, float]
    num_antennas: int
    array_axis: tuple[float, float] = (1.0, 0.0)


@dataclass(frozen=True)
class TransmitterConfig:
    position: tuple[float, float]
    tx_power: float = 1.0


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    y_min: float
    y_max: float


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the position-attack searches.

    ``grid_resolution`` and ``small_scale_radius`` default to wavelength/10
    and wavelength/2 when left as None.  ``g0`` sets the lobe band edges:
    a band extends while the angular response stays above peak/g0.
    """

    grid_resolution: float | None = None
    g0: float = math.sqrt(2.0)
    small_scale_radius: float | None = None
    include_first_sidelobes: bool = True
    max_candidates: int = 20_000


@dataclass(frozen=True)
class Scenario:
    rrhs: tuple[RrhConfig, ...]
    alice: TransmitterConfig
    eve: TransmitterConfig
    region: Region
    carrier_frequency: float = 2.4e9
    antenna_spacing: float = 0.5          # in wavelengths
    path_loss_exponent: float = 2.0
    rice_factor: float = 10.0 ** 0.6      # linear K
    correlation: Correlation = field(default_factory=Correlation)
    false_alarm_target: float = 1e-2
    exclusion_alice: float = 6.0
    exclusion_rrh: float = 3.0
    search: SearchConfig = field(default_factory=SearchConfig)

    def with_eve(self, position: tuple[float, float], tx_power: float | None = None) -> "Scenario":
        power = self.eve.tx_power if tx_power is None else tx_power
        return replace(self, eve=TransmitterConfig(tuple(position), power))


def wavelength(carrier_frequency: float) -> float:
    if carrier_frequency <= 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_frequency}")
    return SPEED_OF_LIGHT / carrier_frequency


def received_power(distance: float, path_loss_exponent: float,
                   carrier_frequency: float, tx_power: float = 1.0) -> float:
    """Free-space style power law (wavelength/(4 pi d))^beta * P_tx."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    lam = wavelength(carrier_frequency)
    return (lam / (4.0 * np.pi * distance)) ** path_loss_exponent * tx_power


def angular_sine(rrh: RrhConfig, point: tuple[float, float]) -> float:
    """Sine of the arrival angle: unit(RRH -> point) projected on the array axis."""
    delta = np.asarray(point, float) - np.asarray(rrh.position, float)
    dist = float(np.hypot(*delta))
    if dist == 0.0:
        raise ValueError(f"point coincides with RRH {rrh.id!r}")
    return float(delta @ np.asarray(rrh.array_axis, float)) / dist


def steering_vector(omega, num_antennas: int, spacing: float) -> np.ndarray:
    """ULA response [1, e^{-j2 pi spacing omega}, ...]; omega may be an array."""
    omega = np.asarray(omega, float)
    n = np.arange(num_antennas)
    return np.exp(-2j * np.pi * spacing * np.multiply.outer(omega, n))


@dataclass(frozen=True)
class ChannelStatistics:
    """Per-array and stacked first/second moments of one transmitter's channel.

    ``mean`` and ``cov`` are the stacked vector/block-diagonal matrix over
    all arrays; the per-array pieces plus the geometry behind them
    (distance, angular sine, received power) are kept for the attack math.
    """

    mean: np.ndarray
    cov: np.ndarray
    block_means: tuple[np.ndarray, ...]
    block_covs: tuple[np.ndarray, ...]
    distances: np.ndarray
    omegas: np.ndarray
    powers: np.ndarray
    block_sizes: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def block_slices(self):
        start = 0
        for size in self.block_sizes:
            yield slice(start, start + size)
            start += size


def channel_statistics(scenario: Scenario, tx: TransmitterConfig) -> ChannelStatistics:
    """Rice statistics of ``tx`` as seen by every array in the scenario.

    Mean of array j: sqrt(P_j K/(K+1)) e^{-j 2 pi d_j / lambda} e(Omega_j).
    Covariance of array j: P_j/(K+1) * correlation matrix.
    """
    lam = wavelength(scenario.carrier_frequency)
    k_rice = scenario.rice_factor
    means, covs, dists, omegas, powers, sizes = [], [], [], [], [], []
    for rrh in scenario.rrhs:
        delta = np.asarray(tx.position, float) - np.asarray(rrh.position, float)
        d = float(np.hypot(*delta))
        if d == 0.0:
            raise ValueError(f"transmitter sits on RRH {rrh.id!r}")
        omega = float(delta @ np.asarray(rrh.array_axis, float)) / d
        p = received_power(d, scenario.path_loss_exponent,
                           scenario.carrier_frequency, tx.tx_power)
        amp = math.sqrt(p * k_rice / (k_rice + 1.0))
        mu = amp * np.exp(-2j * np.pi * d / lam) * steering_vector(
            omega, rrh.num_antennas, scenario.antenna_spacing)
        cov = (p / (k_rice + 1.0)) * scenario.correlation.matrix(rrh.num_antennas)
        means.append(mu)
        covs.append(cov.astype(complex))
        dists.append(d)
        omegas.append(omega)
        powers.append(p)
        sizes.append(rrh.num_antennas)
    dim = sum(sizes)
    cov = np.zeros((dim, dim), complex)
    start = 0
    for c in covs:
        n = c.shape[0]
        cov[start:start + n, start:start + n] = c
        start += n
    return ChannelStatistics(
        mean=np.concatenate(means),
        cov=cov,
        block_means=tuple(means),
        block_covs=tuple(covs),
        distances=np.asarray(dists),
        omegas=np.asarray(omegas),
        powers=np.asarray(powers),
        block_sizes=tuple(sizes),
    )


def alice_statistics(scenario: Scenario) -> ChannelStatistics:
    return channel_statistics(scenario, scenario.alice)


def eve_statistics(scenario: Scenario) -> ChannelStatistics:
    return channel_statistics(scenario, scenario.eve)
