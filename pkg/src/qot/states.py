"""Coherent states on a one-dimensional configuration space.

A coherent state centered at the phase-space point (q, p) has wavefunction

    <x|q,p> = (pi*hbar)**(-1/4) * exp(-(x-q)**2 / (2*hbar)) * exp(i*p*x/hbar).

Everything in this module is a closed-form consequence of that Gaussian:
pairwise overlaps, Gram matrices of finite families, orthonormal bases of
their span, densities assembled from weighted families of projectors, and
Husimi functions.  All values are exact up to rounding; the test suite pins
them against direct numerical integration of the defining integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisMismatch, NearDependentStates

GRAM_EIGENVALUE_CUTOFF = 1e-10


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PhaseSpaceContext:
    """Planck parameter and the (fixed) configuration dimension."""

    hbar: float
    dimension: int = 1

    def __post_init__(self) -> None:
        _require_finite("hbar", self.hbar)
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.dimension != 1:
            raise ValueError("only dimension 1 is supported")


@dataclass(frozen=True)
class CoherentPoint:
    """Phase-space center (q, p) of a coherent state."""

    q: float
    p: float

    def __post_init__(self) -> None:
        _require_finite("coherent point coordinates", self.q, self.p)


@dataclass(frozen=True)
class WeightedConfiguration:
    """Finitely many distinct phase-space points with probability weights."""

    points: tuple[CoherentPoint, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.points) == 0:
            raise ValueError("configuration needs at least one point")
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights must have equal length")
        for w in self.weights:
            _require_finite("weight", w)
            if w < 0:
                raise ValueError(f"weights must be nonnegative, got {w}")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        seen = {(z.q, z.p) for z in self.points}
        if len(seen) != len(self.points):
            raise ValueError("points must be pairwise distinct")

    @classmethod
    def from_arrays(cls, points, weights) -> "WeightedConfiguration":
        pts = tuple(CoherentPoint(float(q), float(p)) for q, p in points)
        return cls(pts, tuple(float(w) for w in weights))

    @property
    def size(self) -> int:
        return len(self.points)

    def positions(self) -> np.ndarray:
        return np.array([z.q for z in self.points])

    def momenta(self) -> np.ndarray:
        return np.array([z.p for z in self.points])

    def weight_array(self) -> np.ndarray:
        return np.array(self.weights)


def symmetric_pair(a: float, eta: float = 0.0) -> WeightedConfiguration:
    """Points (-a, 0) and (+a, 0) with weights (1-eta)/2 and (1+eta)/2."""
    if a <= 0:
        raise ValueError("a must be positive")
    if not -1.0 < eta < 1.0:
        raise ValueError("eta must lie in (-1, 1)")
    return WeightedConfiguration(
        (CoherentPoint(-a, 0.0), CoherentPoint(a, 0.0)),
        ((1.0 - eta) / 2.0, (1.0 + eta) / 2.0),
    )


def single_point(q: float, p: float = 0.0) -> WeightedConfiguration:
    return WeightedConfiguration((CoherentPoint(q, p),), (1.0,))


# ---------------------------------------------------------------------------
# overlaps and one-body matrix elements
# ---------------------------------------------------------------------------

def overlap(ctx: PhaseSpaceContext, z1: CoherentPoint, z2: CoherentPoint) -> complex:
    """Inner product <z1|z2> of two coherent states.

    Gaussian integration of the defining wavefunctions gives

        <z1|z2> = exp(-((q1-q2)^2 + (p1-p2)^2) / (4*hbar))
                  * exp(i*(p2-p1)*(q1+q2) / (2*hbar)),

    so |<z1|z2>| <= 1 with equality iff the points coincide, and swapping
    the arguments conjugates the value.
    """
    h = ctx.hbar
    dq = z1.q - z2.q
    dp = z1.p - z2.p
    mag = math.exp(-(dq * dq + dp * dp) / (4.0 * h))
    phase = (z2.p - z1.p) * (z1.q + z2.q) / (2.0 * h)
    return mag * complex(math.cos(phase), math.sin(phase))


def position_element(ctx: PhaseSpaceContext, z1: CoherentPoint, z2: CoherentPoint) -> complex:
    """Matrix element <z1| x |z2> of the position operator."""
    s = complex(z1.q + z2.q, z2.p - z1.p) / 2.0
    return s * overlap(ctx, z1, z2)


def position_sq_element(ctx: PhaseSpaceContext, z1: CoherentPoint, z2: CoherentPoint) -> complex:
    """Matrix element <z1| x^2 |z2>."""
    s = complex(z1.q + z2.q, z2.p - z1.p) / 2.0
    return (s * s + ctx.hbar / 2.0) * overlap(ctx, z1, z2)


def momentum_element(ctx: PhaseSpaceContext, z1: CoherentPoint, z2: CoherentPoint) -> complex:
    """Matrix element <z1| p |z2> of the momentum operator -i*hbar*d/dx."""
    s = complex(z1.p + z2.p, z1.q - z2.q) / 2.0
    return s * overlap(ctx, z1, z2)


def momentum_sq_element(ctx: PhaseSpaceContext, z1: CoherentPoint, z2: CoherentPoint) -> complex:
    """Matrix element <z1| p^2 |z2>."""
    d = complex(z2.q - z1.q, z1.p + z2.p) / 2.0
    return (ctx.hbar / 2.0 - d * d) * overlap(ctx, z1, z2)


def gram_matrix(ctx: PhaseSpaceContext, config: WeightedConfiguration) -> np.ndarray:
    """Hermitian PSD matrix of pairwise overlaps, unit diagonal."""
    pts = config.points
    n = len(pts)
    g = np.empty((n, n), dtype=complex)
    for i in range(n):
        g[i, i] = 1.0
        for j in range(i + 1, n):
            v = overlap(ctx, pts[i], pts[j])
            g[i, j] = v
            g[j, i] = v.conjugate()
    return g


# ---------------------------------------------------------------------------
# orthonormal bases of the span
# ---------------------------------------------------------------------------

def _fix_column_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its dominant component is positive real.

    Ties in magnitude (relative 1e-9) resolve to the highest index, which
    pins the sign of parity eigenvectors of symmetric configurations.
    """
    out = vectors.copy()
    for k in range(out.shape[1]):
        mags = np.abs(out[:, k])
        top = mags.max()
        idx = np.nonzero(mags >= top * (1.0 - 1e-9))[0][-1]
        pivot = out[idx, k]
        if pivot != 0:
            out[:, k] *= pivot.conjugate() / abs(pivot)
    return out


@dataclass(frozen=True)
class OrthonormalBasis:
    """Orthonormal basis of the span of a coherent family.

    Column m of ``change_of_frame`` holds the coefficients of the m-th basis
    vector in the coherent frame, so B'.conj().T @ gram @ B equals the
    identity.  Basis vectors are ordered by descending Gram eigenvalue; for
    a symmetric pair {(-a,0), (a,0)} this yields the even and odd
    combinations (|a> + |-a>)/sqrt(2(1+lam)) and (|a> - |-a>)/sqrt(2(1-lam))
    in that order, with lam the pair overlap.
    """

    source: WeightedConfiguration
    gram: np.ndarray = field(repr=False)
    change_of_frame: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        g = np.asarray(self.gram, dtype=complex)
        b = np.asarray(self.change_of_frame, dtype=complex)
        object.__setattr__(self, "gram", _frozen(g))
        object.__setattr__(self, "change_of_frame", _frozen(b))
        resid = b.conj().T @ g @ b - np.eye(b.shape[1])
        if np.abs(resid).max() > 1e-10:
            raise ValueError("change_of_frame does not orthonormalize the Gram matrix")

    @property
    def size(self) -> int:
        return self.change_of_frame.shape[1]

    def frame_coordinates(self) -> np.ndarray:
        """Coordinates of each coherent state in the basis: column i is |z_i>."""
        return self.change_of_frame.conj().T @ self.gram


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def orthonormalize(
    ctx: PhaseSpaceContext,
    config: WeightedConfiguration,
    cutoff: float = GRAM_EIGENVALUE_CUTOFF,
) -> OrthonormalBasis:
    """Diagonalize the Gram matrix and whiten its eigenvectors.

    Raises NearDependentStates when the smallest Gram eigenvalue falls
    below ``cutoff``; overlaps close to 1 make the compression
    ill-conditioned.
    """
    g = gram_matrix(ctx, config)
    w, v = np.linalg.eigh(g)
    if w.min() < cutoff:
        raise NearDependentStates(
            f"minimum Gram eigenvalue {w.min():.3e} below cutoff {cutoff:.1e}"
        )
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = _fix_column_phases(v[:, order])
    b = v / np.sqrt(w)
    return OrthonormalBasis(source=config, gram=g, change_of_frame=b)


# ---------------------------------------------------------------------------
# densities and Husimi functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD trace-one matrix expressed in an orthonormal basis."""

    basis: OrthonormalBasis
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("density matrix must be Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("density matrix must have unit trace within 1e-10")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix must be PSD within 1e-10")
        object.__setattr__(self, "matrix", _frozen(m))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def assemble_toeplitz_density(
    ctx: PhaseSpaceContext,
    config: WeightedConfiguration,
    basis: OrthonormalBasis,
) -> DensityMatrix:
    """Matrix of sum_i w_i |z_i><z_i| in the given orthonormal basis.

    The basis must have been built from the same points; the weights may
    differ (this is how densities with unequal masses share the basis of
    the underlying pair of points).
    """
    if basis.source.points != config.points:
        raise BasisMismatch("basis was built from different points")
    f = basis.frame_coordinates()
    m = (f * config.weight_array()) @ f.conj().T
    return DensityMatrix(basis=basis, matrix=(m + m.conj().T) / 2.0)


def toeplitz_density(ctx: PhaseSpaceContext, config: WeightedConfiguration) -> DensityMatrix:
    """Convenience wrapper: orthonormalize the points, then assemble."""
    return assemble_toeplitz_density(ctx, config, orthonormalize(ctx, config))


def husimi(ctx: PhaseSpaceContext, density: DensityMatrix, z: CoherentPoint) -> float:
    """Husimi value (2*pi*hbar)**(-1) * <z| rho |z> at a phase-space point."""
    coords = np.array([
        sum(
            density.basis.change_of_frame[k, m].conjugate()
            * overlap(ctx, density.basis.source.points[k], z)
            for k in range(density.basis.source.size)
        )
        for m in range(density.basis.size)
    ])
    val = np.real(coords.conj() @ density.matrix @ coords)
    return max(float(val), 0.0) / (2.0 * math.pi * ctx.hbar)


def husimi_grid(
    ctx: PhaseSpaceContext,
    density: DensityMatrix,
    q_axis: np.ndarray,
    p_axis: np.ndarray,
) -> np.ndarray:
    """Husimi function sampled on a tensor grid, shape (len(q), len(p))."""
    h = ctx.hbar
    qg = np.asarray(q_axis)[:, None]
    pg = np.asarray(p_axis)[None, :]
    pts = density.basis.source.points
    ov = np.empty((len(pts), qg.shape[0], pg.shape[1]), dtype=complex)
    for k, zk in enumerate(pts):
        mag = np.exp(-((zk.q - qg) ** 2 + (zk.p - pg) ** 2) / (4.0 * h))
        phase = (pg - zk.p) * (zk.q + qg) / (2.0 * h)
        ov[k] = mag * np.exp(1j * phase)
    coords = np.einsum("km,kqp->mqp", density.basis.change_of_frame.conj(), ov)
    vals = np.einsum("mqp,mn,nqp->qp", coords.conj(), density.matrix, coords).real
    return np.clip(vals, 0.0, None) / (2.0 * math.pi * h)
