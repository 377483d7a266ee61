import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qot.errors import BasisMismatch, NearDependentStates
from qot.states import (
    CoherentPoint,
    PhaseSpaceContext,
    WeightedConfiguration,
    assemble_toeplitz_density,
    gram_matrix,
    husimi,
    husimi_grid,
    momentum_element,
    momentum_sq_element,
    orthonormalize,
    overlap,
    position_element,
    position_sq_element,
    symmetric_pair,
    toeplitz_density,
)

from .conftest import random_configuration, random_point
from .oracles import husimi_quadrature, moment_quadrature, overlap_quadrature

LAM = math.exp(-1.0)


class TestOverlap:
    def test_same_point_is_unit(self, ctx):
        z = CoherentPoint(1.3, -0.4)
        assert overlap(ctx, z, z) == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_pair_value(self, ctx):
        v = overlap(ctx, CoherentPoint(1, 0), CoherentPoint(-1, 0))
        assert v == pytest.approx(LAM, abs=1e-15)
        assert v.imag == 0.0

    def test_against_quadrature_with_momenta(self, ctx):
        z1 = CoherentPoint(0.3, 0.7)
        z2 = CoherentPoint(-0.2, 0.1)
        expected = overlap_quadrature(1.0, z1, z2)
        assert overlap(ctx, z1, z2) == pytest.approx(expected, abs=1e-8)

    def test_rejects_non_finite(self, ctx):
        with pytest.raises(ValueError):
            CoherentPoint(math.nan, 0.0)
        with pytest.raises(ValueError):
            CoherentPoint(0.0, math.inf)

    @given(
        q1=st.floats(-4, 4), p1=st.floats(-4, 4),
        q2=st.floats(-4, 4), p2=st.floats(-4, 4),
        hbar=st.floats(0.2, 4.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_conjugate_symmetry_and_modulus(self, q1, p1, q2, p2, hbar):
        ctx = PhaseSpaceContext(hbar=hbar)
        z1, z2 = CoherentPoint(q1, p1), CoherentPoint(q2, p2)
        fwd = overlap(ctx, z1, z2)
        bwd = overlap(ctx, z2, z1)
        assert fwd == pytest.approx(bwd.conjugate(), abs=1e-14)
        assert abs(fwd) <= 1.0 + 1e-14


class TestMoments:
    @pytest.mark.parametrize("kind,fn", [
        ("x", position_element),
        ("x2", position_sq_element),
        ("p", momentum_element),
        ("p2", momentum_sq_element),
    ])
    def test_diagonal_values(self, ctx, kind, fn):
        z = CoherentPoint(1.1, -0.6)
        expected = {
            "x": z.q, "x2": z.q**2 + 0.5, "p": z.p, "p2": z.p**2 + 0.5,
        }[kind]
        assert fn(ctx, z, z) == pytest.approx(expected, abs=1e-13)

    def test_closed_forms_match_quadrature(self):
        # acceptance criterion 5: 200 random inputs, absolute error <= 1e-8
        rng = np.random.default_rng(2024)
        kinds = ("overlap", "x", "x2", "p", "p2")
        fns = {
            "overlap": overlap,
            "x": position_element,
            "x2": position_sq_element,
            "p": momentum_element,
            "p2": momentum_sq_element,
        }
        for trial in range(200):
            hbar = float(rng.uniform(0.3, 3.0))
            ctx = PhaseSpaceContext(hbar=hbar)
            z1 = random_point(rng)
            z2 = random_point(rng)
            kind = kinds[trial % len(kinds)]
            closed = fns[kind](ctx, z1, z2)
            quad = moment_quadrature(hbar, z1, z2, kind)
            assert abs(closed - quad) <= 1e-8, (kind, hbar, z1, z2)


class TestConfiguration:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            WeightedConfiguration((CoherentPoint(0, 0),), (0.5,))

    def test_points_must_be_distinct(self):
        with pytest.raises(ValueError):
            WeightedConfiguration(
                (CoherentPoint(1, 0), CoherentPoint(1, 0)), (0.5, 0.5)
            )

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            WeightedConfiguration(
                (CoherentPoint(1, 0), CoherentPoint(-1, 0)), (1.5, -0.5)
            )

    def test_symmetric_pair_layout(self):
        cfg = symmetric_pair(2.0, eta=0.4)
        assert cfg.points == (CoherentPoint(-2.0, 0.0), CoherentPoint(2.0, 0.0))
        assert cfg.weights == (0.3, 0.7)


class TestGram:
    def test_single_point(self, ctx):
        cfg = WeightedConfiguration((CoherentPoint(0.7, 0.1),), (1.0,))
        assert gram_matrix(ctx, cfg) == pytest.approx(np.eye(1))

    def test_symmetric_pair_entries(self, ctx):
        g = gram_matrix(ctx, symmetric_pair(1.0))
        assert g == pytest.approx(np.array([[1.0, LAM], [LAM, 1.0]]), abs=1e-15)

    def test_random_gram_psd_and_matches_quadrature(self, ctx):
        rng = np.random.default_rng(7)
        cfg = random_configuration(rng, 3)
        g = gram_matrix(ctx, cfg)
        assert np.linalg.eigvalsh(g).min() >= -1e-10
        for i in range(3):
            for j in range(3):
                quad = overlap_quadrature(1.0, cfg.points[i], cfg.points[j])
                assert abs(g[i, j] - quad) <= 1e-8

    def test_psd_on_many_random_configurations(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(1000):
            ctx = PhaseSpaceContext(hbar=float(rng.uniform(0.3, 3.0)))
            cfg = random_configuration(rng, int(rng.integers(1, 5)))
            worst = min(worst, float(np.linalg.eigvalsh(gram_matrix(ctx, cfg)).min()))
        assert worst >= -1e-10


class TestOrthonormalize:
    def test_single_point_trivial(self, ctx):
        basis = orthonormalize(ctx, WeightedConfiguration((CoherentPoint(1, 1),), (1.0,)))
        assert basis.change_of_frame == pytest.approx(np.eye(1))

    def test_symmetric_pair_recovers_parity_vectors(self, ctx):
        basis = orthonormalize(ctx, symmetric_pair(1.0))
        splus = 1 / math.sqrt(2 * (1 + LAM))
        sminus = 1 / math.sqrt(2 * (1 - LAM))
        expected = np.array([[splus, -sminus], [splus, sminus]])
        assert basis.change_of_frame.real == pytest.approx(expected, abs=1e-12)
        assert np.abs(basis.change_of_frame.imag).max() == 0.0

    def test_roundtrip_identity_random(self, ctx):
        rng = np.random.default_rng(11)
        for _ in range(25):
            cfg = random_configuration(rng, 4)
            basis = orthonormalize(ctx, cfg)
            resid = basis.change_of_frame.conj().T @ basis.gram @ basis.change_of_frame
            assert np.abs(resid - np.eye(4)).max() <= 1e-10

    def test_near_dependent_states_rejected(self, ctx):
        cfg = WeightedConfiguration(
            (CoherentPoint(0.0, 0.0), CoherentPoint(1e-7, 0.0)), (0.5, 0.5)
        )
        with pytest.raises(NearDependentStates):
            orthonormalize(ctx, cfg)


class TestToeplitzDensity:
    def test_single_point(self, ctx):
        rho = toeplitz_density(ctx, WeightedConfiguration((CoherentPoint(2, 0),), (1.0,)))
        assert rho.matrix == pytest.approx(np.array([[1.0]]))

    def test_equal_mass_eigenvalues(self, ctx):
        rho = toeplitz_density(ctx, symmetric_pair(1.0))
        assert rho.eigenvalues() == pytest.approx(
            np.array([(1 - LAM) / 2, (1 + LAM) / 2]), abs=1e-12
        )
        # diagonal in the parity basis, heavier even component first
        assert rho.matrix == pytest.approx(
            np.diag([(1 + LAM) / 2, (1 - LAM) / 2]), abs=1e-12
        )

    def test_unequal_mass_matrix(self, ctx):
        eta = 0.5
        rho = toeplitz_density(ctx, symmetric_pair(1.0, eta))
        off = eta / 2 * math.sqrt(1 - LAM**2)
        expected = np.array([[(1 + LAM) / 2, off], [off, (1 - LAM) / 2]])
        assert rho.matrix == pytest.approx(expected, abs=1e-12)

    def test_basis_point_mismatch_rejected(self, ctx):
        basis = orthonormalize(ctx, symmetric_pair(1.0))
        other = symmetric_pair(2.0)
        with pytest.raises(BasisMismatch):
            assemble_toeplitz_density(ctx, other, basis)

    def test_weights_may_differ_from_basis_weights(self, ctx):
        basis = orthonormalize(ctx, symmetric_pair(1.0))
        skewed = symmetric_pair(1.0, eta=0.8)
        rho = assemble_toeplitz_density(ctx, skewed, basis)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)

    def test_trace_and_psd_random(self, ctx):
        rng = np.random.default_rng(3)
        for _ in range(50):
            cfg = random_configuration(rng, int(rng.integers(1, 5)))
            rho = toeplitz_density(ctx, cfg)
            assert abs(np.trace(rho.matrix).real - 1.0) <= 1e-10
            assert rho.eigenvalues().min() >= -1e-10


class TestHusimi:
    def test_pure_state_peak_value(self, ctx):
        rho = toeplitz_density(ctx, WeightedConfiguration((CoherentPoint(1, 0),), (1.0,)))
        assert husimi(ctx, rho, CoherentPoint(1, 0)) == pytest.approx(
            1 / (2 * math.pi), abs=1e-14
        )

    def test_grid_mass_is_one(self, ctx):
        rho = toeplitz_density(ctx, symmetric_pair(1.0))
        axis = np.arange(-10, 10 + 0.025, 0.05)
        vals = husimi_grid(ctx, rho, axis, axis)
        assert vals.min() >= 0.0
        assert vals.sum() * 0.05**2 == pytest.approx(1.0, abs=1e-6)

    def test_matches_overlap_expansion(self, ctx):
        cfg = symmetric_pair(1.0)
        rho = toeplitz_density(ctx, cfg)
        rng = np.random.default_rng(5)
        for _ in range(10):
            z = random_point(rng)
            direct = sum(
                w * abs(overlap(ctx, z, zi)) ** 2
                for w, zi in zip(cfg.weights, cfg.points)
            ) / (2 * math.pi)
            assert husimi(ctx, rho, z) == pytest.approx(direct, abs=1e-10)

    def test_matches_quadrature(self, ctx):
        cfg = symmetric_pair(1.0, eta=0.3)
        rho = toeplitz_density(ctx, cfg)
        z = CoherentPoint(0.4, -0.2)
        expected = husimi_quadrature(1.0, cfg.weights, cfg.points, z)
        assert husimi(ctx, rho, z) == pytest.approx(expected, abs=1e-8)

    def test_grid_matches_pointwise(self, ctx):
        rho = toeplitz_density(ctx, symmetric_pair(1.5, eta=0.2))
        qs = np.array([-1.0, 0.0, 2.0])
        ps = np.array([-0.5, 1.0])
        grid = husimi_grid(ctx, rho, qs, ps)
        for i, q in enumerate(qs):
            for j, p in enumerate(ps):
                assert grid[i, j] == pytest.approx(
                    husimi(ctx, rho, CoherentPoint(q, p)), abs=1e-12
                )
