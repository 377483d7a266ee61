import numpy as np
import pytest

from qot.states import CoherentPoint, PhaseSpaceContext, WeightedConfiguration


@pytest.fixture
def ctx():
    return PhaseSpaceContext(hbar=1.0)


def random_point(rng, spread=2.5, with_momentum=True) -> CoherentPoint:
    q = float(rng.uniform(-spread, spread))
    p = float(rng.uniform(-spread, spread)) if with_momentum else 0.0
    return CoherentPoint(q, p)


def random_configuration(rng, n_points, spread=2.5, with_momenta=True) -> WeightedConfiguration:
    while True:
        pts = [random_point(rng, spread, with_momenta) for _ in range(n_points)]
        if len({(z.q, z.p) for z in pts}) != n_points:
            continue
        w = rng.uniform(0.1, 1.0, size=n_points)
        w /= w.sum()
        w[-1] = 1.0 - w[:-1].sum()
        if np.all(w >= 0):
            return WeightedConfiguration(tuple(pts), tuple(float(x) for x in w))


def random_masses(rng, n):
    w = rng.uniform(0.05, 1.0, size=n)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return w
