import math

import numpy as np
import pytest

from qot.cost import cost_matrix, pair_cost_element, pair_cost_tensor, zero_overlap_cost
from qot.states import CoherentPoint, PhaseSpaceContext, orthonormalize, symmetric_pair

from .conftest import random_configuration, random_point
from .oracles import pair_cost_quadrature, pair_cost_quadrature_2d


def closed_form_entries(a, b, hbar):
    """Diagonal and antidiagonal of the symmetric-pair cost compression."""
    lam = math.exp(-a * a / hbar)
    mu = math.exp(-b * b / hbar)
    diag = np.array([
        a**2 * (1 - lam) / (1 + lam) + b**2 * (1 - mu) / (1 + mu),
        a**2 * (1 - lam) / (1 + lam) + b**2 * (1 + mu) / (1 - mu),
        a**2 * (1 + lam) / (1 - lam) + b**2 * (1 - mu) / (1 + mu),
        a**2 * (1 + lam) / (1 - lam) + b**2 * (1 + mu) / (1 - mu),
    ])
    den = math.sqrt((1 - lam**2) * (1 - mu**2))
    gamma = -2 * a * b * (1 - lam * mu) / den
    delta = -2 * a * b * (1 + lam * mu) / den
    return diag, gamma, delta


def pair_basis(ctx, a):
    return orthonormalize(ctx, symmetric_pair(a))


class TestPairCostElement:
    def test_diagonal_zero_momentum_is_squared_distance(self, ctx):
        za, zb = CoherentPoint(1.0, 0.0), CoherentPoint(2.5, 0.0)
        val = pair_cost_element(ctx, za, zb, za, zb)
        assert val == pytest.approx((1.0 - 2.5) ** 2, abs=1e-12)
        quad = pair_cost_quadrature(1.0, za, zb, za, zb)
        assert val == pytest.approx(quad, abs=1e-8)

    def test_same_point_costs_nothing(self, ctx):
        z = CoherentPoint(0.8, 0.0)
        assert pair_cost_element(ctx, z, z, z, z) == pytest.approx(0.0, abs=1e-12)

    def test_random_tuples_match_quadrature(self):
        rng = np.random.default_rng(91)
        for _ in range(25):
            hbar = float(rng.uniform(0.4, 2.5))
            ctx = PhaseSpaceContext(hbar=hbar)
            zs = [random_point(rng, spread=2.0) for _ in range(4)]
            closed = pair_cost_element(ctx, *zs)
            quad = pair_cost_quadrature(hbar, *zs)
            assert abs(closed - quad) <= 1e-8, (hbar, zs)

    def test_direct_two_variable_quadrature(self, ctx):
        # cross-check of the factorized oracle on a full 2d grid
        zs = [
            CoherentPoint(0.9, 0.6),
            CoherentPoint(-0.4, -0.3),
            CoherentPoint(0.2, 0.8),
            CoherentPoint(-1.1, 0.1),
        ]
        closed = pair_cost_element(ctx, *zs)
        quad2d = pair_cost_quadrature_2d(1.0, *zs)
        assert abs(closed - quad2d) <= 1e-6


class TestCostMatrix:
    def test_closed_form_entries_and_zero_pattern(self, ctx):
        # acceptance criterion 2 at (a, b, hbar) = (1, 2, 1)
        cm = cost_matrix(ctx, pair_basis(ctx, 1.0), pair_basis(ctx, 2.0))
        diag, gamma, delta = closed_form_entries(1.0, 2.0, 1.0)
        c = cm.matrix
        assert np.diag(c).real == pytest.approx(diag, abs=1e-10)
        assert c[0, 3] == pytest.approx(gamma, abs=1e-10)
        assert c[1, 2] == pytest.approx(delta, abs=1e-10)
        assert diag[0] == pytest.approx(4.31823, abs=5e-6)
        assert gamma == pytest.approx(-4.27339, abs=5e-6)
        checker = np.zeros((4, 4), dtype=bool)
        checker[np.arange(4), np.arange(4)] = True
        for i, j in ((0, 3), (3, 0), (1, 2), (2, 1)):
            checker[i, j] = True
        assert np.abs(c[~checker]).max() <= 1e-10

    def test_small_overlap_limit_reproduces_flat_cost(self):
        # lam, mu -> 0 as hbar -> 0: entries approach the limit matrix at rate O(lam)
        a, b = 1.0, 2.0
        deviations = []
        for hbar in (0.8, 0.5, 0.35, 0.2):
            ctx = PhaseSpaceContext(hbar=hbar)
            cm = cost_matrix(ctx, pair_basis(ctx, a), pair_basis(ctx, b))
            dev = np.abs(cm.matrix - zero_overlap_cost(a, b)).max()
            lam = math.exp(-a * a / hbar)
            mu = math.exp(-b * b / hbar)
            assert dev <= 2.2 * (lam * a**2 / (1 - lam) + mu * b**2 / (1 - mu)) + 1e-12
            deviations.append(dev)
        assert deviations == sorted(deviations, reverse=True)
        assert deviations[-1] <= 2e-2

    def test_matches_elementwise_conjugation(self, ctx):
        rng = np.random.default_rng(17)
        cfg_x = random_configuration(rng, 2)
        cfg_y = random_configuration(rng, 3)
        bx = orthonormalize(ctx, cfg_x)
        by = orthonormalize(ctx, cfg_y)
        cm = cost_matrix(ctx, bx, by)
        raw = pair_cost_tensor(ctx, cfg_x.points, cfg_y.points)
        w = np.kron(bx.change_of_frame, by.change_of_frame)
        assert np.abs(cm.matrix - w.conj().T @ raw @ w).max() <= 1e-10

    def test_psd_on_random_bases(self, ctx):
        rng = np.random.default_rng(23)
        for _ in range(20):
            bx = orthonormalize(ctx, random_configuration(rng, int(rng.integers(1, 4))))
            by = orthonormalize(ctx, random_configuration(rng, int(rng.integers(1, 4))))
            cm = cost_matrix(ctx, bx, by)
            assert np.linalg.eigvalsh(cm.matrix).min() >= -1e-10

    @pytest.mark.parametrize("a,b,hbar", [(1.0, 2.0, 1.0), (0.5, 2.0, 0.5), (1.0, 3.0, 2.0)])
    def test_symmetric_pair_diagonal_identities(self, a, b, hbar):
        ctx = PhaseSpaceContext(hbar=hbar)
        cm = cost_matrix(ctx, pair_basis(ctx, a), pair_basis(ctx, b))
        lam = math.exp(-a * a / hbar)
        mu = math.exp(-b * b / hbar)
        ca, cb, cc, cd = np.diag(cm.matrix).real
        assert ca + cd == pytest.approx(cb + cc, abs=1e-10)
        weighted = (ca + cb + cc + cd) + lam * (ca + cb - cc - cd) + mu * (ca - cb + cc - cd)
        assert weighted == pytest.approx(4 * (a**2 + b**2), abs=1e-9)
