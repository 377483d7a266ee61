import numpy as np
import pytest

from qot.classical import (
    GridSample,
    quadratic_cost_matrix,
    solve_transport,
    w2_squared_1d,
    w2_squared_grid,
)
from qot.errors import GridMismatch, InfeasibleMasses, NonzeroMomentum
from qot.states import PhaseSpaceContext, WeightedConfiguration, husimi_grid, symmetric_pair, toeplitz_density

from .conftest import random_masses
from .oracles import vertex_enumeration_minimum


def line_config(xs, ws):
    return WeightedConfiguration.from_arrays([(x, 0.0) for x in xs], ws)


class TestSolveTransport:
    def test_equal_mass_diagonal_plan(self):
        sol = solve_transport(
            [0.5, 0.5], [0.5, 0.5], quadratic_cost_matrix([-1.0, 1.0], [-2.0, 2.0])
        )
        assert sol.plan == pytest.approx(np.diag([0.5, 0.5]), abs=1e-12)
        assert sol.cost == pytest.approx(1.0, abs=1e-12)

    def test_unequal_mass_split(self):
        # masses ((1-eta)/2, (1+eta)/2) to (1/2, 1/2) on x = y = (-a, a)
        eta, a = 0.5, 1.0
        sol = solve_transport(
            [(1 - eta) / 2, (1 + eta) / 2],
            [0.5, 0.5],
            quadratic_cost_matrix([-a, a], [-a, a]),
        )
        assert sol.cost == pytest.approx(2 * eta * a**2, abs=1e-12)
        expected = np.array([[(1 - eta) / 2, 0.0], [eta / 2, 0.5]])
        assert sol.plan == pytest.approx(expected, abs=1e-12)

    def test_five_by_five_matches_vertex_enumeration(self):
        rng = np.random.default_rng(1)
        m = random_masses(rng, 5)
        n = random_masses(rng, 5)
        cost = rng.uniform(0, 10, (5, 5))
        sol = solve_transport(m, n, cost)
        assert sol.cost == pytest.approx(vertex_enumeration_minimum(m, n, cost), abs=1e-9)

    def test_random_instances_match_vertex_enumeration(self):
        # acceptance criterion 5: 200 random instances with M, N <= 5
        rng = np.random.default_rng(77)
        for _ in range(200):
            mm = int(rng.integers(1, 6))
            nn = int(rng.integers(1, 6))
            m = random_masses(rng, mm)
            n = random_masses(rng, nn)
            cost = rng.uniform(0, 10, (mm, nn))
            sol = solve_transport(m, n, cost)
            oracle = vertex_enumeration_minimum(m, n, cost)
            assert abs(sol.cost - oracle) <= 1e-9
            assert sol.plan.min() >= -1e-12
            assert sol.plan.sum(axis=1) == pytest.approx(m, abs=1e-9)
            assert sol.plan.sum(axis=0) == pytest.approx(n, abs=1e-9)

    def test_duals_certify_optimality(self):
        rng = np.random.default_rng(5)
        m = random_masses(rng, 4)
        n = random_masses(rng, 6)
        cost = rng.uniform(0, 3, (4, 6))
        sol = solve_transport(m, n, cost)
        reduced = cost - sol.row_potentials[:, None] - sol.col_potentials[None, :]
        assert reduced.min() >= -1e-9
        assert np.abs(sol.plan * reduced).max() <= 1e-9
        assert sol.row_potentials @ m + sol.col_potentials @ n == pytest.approx(
            sol.cost, abs=1e-9
        )

    def test_unbalanced_masses_rejected(self):
        with pytest.raises(InfeasibleMasses):
            solve_transport([0.6, 0.5], [0.5, 0.5], np.zeros((2, 2)))

    def test_relabeling_and_transposition_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            mm, nn = int(rng.integers(2, 6)), int(rng.integers(2, 6))
            m, n = random_masses(rng, mm), random_masses(rng, nn)
            cost = rng.uniform(0, 5, (mm, nn))
            base = solve_transport(m, n, cost).cost
            pr, pc = rng.permutation(mm), rng.permutation(nn)
            relabeled = solve_transport(m[pr], n[pc], cost[np.ix_(pr, pc)]).cost
            transposed = solve_transport(n, m, cost.T).cost
            assert relabeled == pytest.approx(base, abs=1e-9)
            assert transposed == pytest.approx(base, abs=1e-9)

    def test_constant_shift_moves_value_by_constant(self):
        rng = np.random.default_rng(13)
        m, n = random_masses(rng, 3), random_masses(rng, 4)
        cost = rng.uniform(0, 5, (3, 4))
        base = solve_transport(m, n, cost).cost
        shifted = solve_transport(m, n, cost + 3.75).cost
        assert shifted == pytest.approx(base + 3.75, abs=1e-9)

    def test_degenerate_masses(self):
        # many ties force degenerate pivots; the epsilon scheme must cope
        m = np.full(4, 0.25)
        n = np.full(4, 0.25)
        cost = quadratic_cost_matrix([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0])
        sol = solve_transport(m, n, cost)
        assert sol.cost == pytest.approx(0.0, abs=1e-12)


class TestW2Squared1d:
    def test_identical_measures(self):
        cfg = line_config([0.0, 1.0], [0.5, 0.5])
        assert w2_squared_1d(cfg, cfg) == 0.0

    def test_two_point_example(self):
        mu = line_config([0.0, 1.0], [0.5, 0.5])
        nu = line_config([0.0, 2.0], [0.5, 0.5])
        assert w2_squared_1d(mu, nu) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric_pairs(self):
        a, b = 1.0, 2.5
        assert w2_squared_1d(symmetric_pair(a), symmetric_pair(b)) == pytest.approx(
            (a - b) ** 2, abs=1e-12
        )

    def test_momentum_rejected(self):
        cfg = WeightedConfiguration.from_arrays([(0.0, 0.3)], [1.0])
        flat = line_config([1.0], [1.0])
        with pytest.raises(NonzeroMomentum):
            w2_squared_1d(cfg, flat)

    def test_matches_lp_on_many_instances(self):
        # acceptance criterion 5: 1000 instances, agreement to 1e-9
        rng = np.random.default_rng(123)
        for _ in range(1000):
            mm, nn = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            xs = np.sort(rng.uniform(-4, 4, mm))
            ys = np.sort(rng.uniform(-4, 4, nn))
            while len(set(xs)) < mm or len(set(ys)) < nn:
                xs = np.sort(rng.uniform(-4, 4, mm))
                ys = np.sort(rng.uniform(-4, 4, nn))
            wm, wn = random_masses(rng, mm), random_masses(rng, nn)
            quantile = w2_squared_1d(line_config(xs, wm), line_config(ys, wn))
            lp = solve_transport(wm, wn, quadratic_cost_matrix(xs, ys)).cost
            assert abs(quantile - lp) <= 1e-9


class TestW2SquaredGrid:
    @staticmethod
    def uniform_grid(step=0.5, half=3.0):
        axis = np.arange(-half, half + step / 2, step)
        return axis

    def test_identical_samples_cost_zero(self):
        axis = self.uniform_grid()
        masses = np.zeros((len(axis), len(axis)))
        masses[3, 4] = 0.75
        masses[5, 2] = 0.25
        f = GridSample(axis, axis, masses)
        rep = w2_squared_grid(f, f)
        assert rep.value == pytest.approx(0.0, abs=1e-12)

    def test_two_unit_masses_distance_squared(self):
        axis = self.uniform_grid()
        fm = np.zeros((len(axis), len(axis)))
        gm = np.zeros((len(axis), len(axis)))
        fm[2, 3] = 1.0
        gm[5, 7] = 1.0
        f = GridSample(axis, axis, fm)
        g = GridSample(axis, axis, gm)
        r2 = (axis[5] - axis[2]) ** 2 + (axis[7] - axis[3]) ** 2
        assert w2_squared_grid(f, g).value == pytest.approx(r2, abs=1e-12)

    def test_grid_mismatch_rejected(self):
        a1 = self.uniform_grid()
        a2 = self.uniform_grid(half=3.5)
        m1 = np.zeros((len(a1), len(a1)))
        m1[0, 0] = 1.0
        m2 = np.zeros((len(a2), len(a2)))
        m2[0, 0] = 1.0
        with pytest.raises(GridMismatch):
            w2_squared_grid(GridSample(a1, a1, m1), GridSample(a2, a2, m2))

    def test_husimi_discretization_with_refinement(self, ctx):
        # equal-mass pair densities, value stable under grid refinement
        rho_x = toeplitz_density(ctx, symmetric_pair(1.0))
        rho_y = toeplitz_density(ctx, symmetric_pair(2.0))
        values = {}
        for step in (0.1, 0.05):
            axis = np.arange(-8.0, 8.0 + step / 2, step)
            f = GridSample.from_density(axis, axis, husimi_grid(ctx, rho_x, axis, axis))
            g = GridSample.from_density(axis, axis, husimi_grid(ctx, rho_y, axis, axis))
            rep = w2_squared_grid(f, g, mass_cutoff=1e-12, max_support=600)
            values[step] = rep.value
            assert rep.dropped_mass_x <= 1e-6
            assert rep.value >= 0.0
        assert abs(values[0.1] - values[0.05]) < 2e-2
