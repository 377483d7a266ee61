"""Transport cost operator between tensor products of coherent states.

The cost of moving quantum mass is measured by

    C = (x ⊗ I - I ⊗ x)^2 + (p ⊗ I - I ⊗ p)^2 - 2*hbar,

a shifted harmonic oscillator in the relative coordinate, so C >= 0 and the
shift makes the cost of "not moving" a coherent state exactly zero.  This
module evaluates matrix elements of C between products |z1; z2> of coherent
states and compresses C to the finite orthonormal product basis used by the
transport solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import (
    CoherentPoint,
    OrthonormalBasis,
    PhaseSpaceContext,
    momentum_element,
    momentum_sq_element,
    overlap,
    position_element,
    position_sq_element,
)


def pair_cost_element(
    ctx: PhaseSpaceContext,
    z1: CoherentPoint,
    z2: CoherentPoint,
    z3: CoherentPoint,
    z4: CoherentPoint,
) -> complex:
    """Matrix element <z1; z2| C |z3; z4>.

    Expanding the squares reduces C to one-body moments of x, x^2, p, p^2,
    for which the Gaussian closed forms of :mod:`qot.states` apply.
    """
    o13 = overlap(ctx, z1, z3)
    o24 = overlap(ctx, z2, z4)
    kin1 = position_sq_element(ctx, z1, z3) + momentum_sq_element(ctx, z1, z3)
    kin2 = position_sq_element(ctx, z2, z4) + momentum_sq_element(ctx, z2, z4)
    cross = (
        position_element(ctx, z1, z3) * position_element(ctx, z2, z4)
        + momentum_element(ctx, z1, z3) * momentum_element(ctx, z2, z4)
    )
    return kin1 * o24 + o13 * kin2 - 2.0 * cross - 2.0 * ctx.hbar * o13 * o24


def _one_body_tables(ctx: PhaseSpaceContext, points) -> dict[str, np.ndarray]:
    n = len(points)
    tables = {k: np.empty((n, n), dtype=complex) for k in ("o", "x", "x2", "p", "p2")}
    for i, zi in enumerate(points):
        for j, zj in enumerate(points):
            tables["o"][i, j] = overlap(ctx, zi, zj)
            tables["x"][i, j] = position_element(ctx, zi, zj)
            tables["x2"][i, j] = position_sq_element(ctx, zi, zj)
            tables["p"][i, j] = momentum_element(ctx, zi, zj)
            tables["p2"][i, j] = momentum_sq_element(ctx, zi, zj)
    return tables


def pair_cost_tensor(ctx: PhaseSpaceContext, points_x, points_y) -> np.ndarray:
    """All elements <x_i; y_j| C |x_k; y_l> as an (M*N, M*N) matrix.

    Row-major product indexing throughout: slot (i, j) maps to i*N + j.
    """
    tx = _one_body_tables(ctx, points_x)
    ty = _one_body_tables(ctx, points_y)
    kin_x = tx["x2"] + tx["p2"]
    kin_y = ty["x2"] + ty["p2"]
    return (
        np.kron(kin_x, ty["o"])
        + np.kron(tx["o"], kin_y)
        - 2.0 * np.kron(tx["x"], ty["x"])
        - 2.0 * np.kron(tx["p"], ty["p"])
        - 2.0 * ctx.hbar * np.kron(tx["o"], ty["o"])
    )


@dataclass(frozen=True)
class CostMatrix:
    """Compression of the cost operator to an orthonormal product basis."""

    basis_x: OrthonormalBasis
    basis_y: OrthonormalBasis
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if np.abs(m - m.conj().T).max() > 1e-12 * max(1.0, np.abs(m).max()):
            raise ValueError("cost compression must be Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("cost compression must be PSD within 1e-10")
        m = np.array(m, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_x.size, self.basis_y.size


def cost_matrix(
    ctx: PhaseSpaceContext,
    basis_x: OrthonormalBasis,
    basis_y: OrthonormalBasis,
) -> CostMatrix:
    """Compression P C P of the cost operator onto the product basis.

    With B_x, B_y the change-of-frame matrices, the compressed matrix is
    (B_x ⊗ B_y)† T (B_x ⊗ B_y) where T holds the coherent-frame elements.
    """
    t = pair_cost_tensor(ctx, basis_x.source.points, basis_y.source.points)
    w = np.kron(basis_x.change_of_frame, basis_y.change_of_frame)
    m = w.conj().T @ t @ w
    return CostMatrix(basis_x=basis_x, basis_y=basis_y, matrix=(m + m.conj().T) / 2.0)


def zero_overlap_cost(a: float, b: float) -> np.ndarray:
    """Limit of the symmetric-pair cost compression as the overlaps vanish.

    Diagonal a^2 + b^2 and anti-diagonal -2ab; this is the cost matrix the
    4x4 compression converges to when both pair overlaps are negligible.
    """
    d = a * a + b * b
    g = -2.0 * a * b
    return np.array(
        [[d, 0, 0, g], [0, d, g, 0], [0, g, d, 0], [g, 0, 0, d]], dtype=float
    )
