import numpy as np
import pytest

from distpla import (Correlation, Region, RrhConfig, Scenario, SearchConfig,
                     TransmitterConfig)


def build_scenario(rrhs, alice=(40.0, 30.0), eve=(26.0, 49.0), *,
                   rice_db=6.0, rho=0.0, pfa=1e-2, region=(0, 80, 0, 60),
                   fc=2.4e9, **kwargs):
    """Small helper so tests can spell out only what they vary."""
    corr = Correlation("exponential", rho) if rho else Correlation()
    return Scenario(
        rrhs=tuple(RrhConfig(*r) for r in rrhs),
        alice=TransmitterConfig(alice),
        eve=TransmitterConfig(eve),
        region=Region(*region),
        carrier_frequency=fc,
        rice_factor=10.0 ** (rice_db / 10.0),
        correlation=corr,
        false_alarm_target=pfa,
        **kwargs,
    )


@pytest.fixture
def single_scenario():
    """One 4-antenna array; the workhorse for closed-form checks."""
    return build_scenario([("mast", (40.0, 55.0), 4)])


@pytest.fixture
def dual_scenario():
    return build_scenario([
        ("west", (10.0, 55.0), 2),
        ("east", (75.0, 30.0), 3, (0.0, 1.0)),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_geometry(rng, n_rrh=None, *, n_rx=None, rho=None, region=(0, 80, 0, 60)):
    """A random valid deployment: arrays on the walls, Alice and Eve inside."""
    x0, x1, y0, y1 = region
    n_rrh = n_rrh or int(rng.integers(1, 4))
    rrhs = []
    for j in range(n_rrh):
        pos = (float(rng.uniform(x0 + 2, x1 - 2)), float(rng.uniform(y0 + 2, y1 - 2)))
        theta = float(rng.uniform(0, 2 * np.pi))
        n = int(n_rx if n_rx is not None else rng.integers(2, 6))
        rrhs.append((f"r{j}", pos, n, (np.cos(theta), np.sin(theta))))
    alice = (float(rng.uniform(x0 + 8, x1 - 8)), float(rng.uniform(y0 + 8, y1 - 8)))
    while True:
        eve = (float(rng.uniform(x0 + 1, x1 - 1)), float(rng.uniform(y0 + 1, y1 - 1)))
        if np.hypot(eve[0] - alice[0], eve[1] - alice[1]) > 6.0:
            break
    rho_val = float(rng.uniform(0.0, 0.7)) if rho is None else rho
    return build_scenario(rrhs, alice=alice, eve=eve, region=region,
                          rice_db=float(rng.uniform(3, 12)), rho=rho_val)
