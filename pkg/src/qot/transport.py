"""Quantum couplings between coherent-state densities and their certificates.

A coupling of densities R and S is a PSD trace-one matrix on the product
basis whose partial traces reproduce R and S.  The squared quantum
transport cost is the infimum of trace(C Q) over couplings; because any
coupling of finitely supported marginals lives on range(R) (x) range(S),
the finite semidefinite program solved here computes that infimum exactly,
and its dual yields a certified lower bound.

Besides the solver path, this module constructs the explicit coupling
families that bracket the optimum for symmetric two-point configurations
(checkerboard ansatz, quantized classical plans, traceless improvement
directions) and analyzes which couplings are positive quantizations of
classical plans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import quadratic_cost_matrix, solve_transport
from .cost import CostMatrix, cost_matrix
from .errors import (
    InfeasibleAnsatz,
    MaxIterations,
    PatternViolation,
    QotError,
)
from .sdp import (
    HermitianSdp,
    SolverOptions,
    SolverReport,
    hermitian_eig,
    project_to_feasibility,
    solve_sdp,
)
from .states import (
    CoherentPoint,
    DensityMatrix,
    OrthonormalBasis,
    PhaseSpaceContext,
    WeightedConfiguration,
    assemble_toeplitz_density,
    orthonormalize,
    symmetric_pair,
)

PSD_TOL = 1e-10
MARGINAL_TOL = 1e-9


def partial_trace(matrix: np.ndarray, dims: tuple[int, int], side: str) -> np.ndarray:
    """Trace out one tensor factor of a matrix on a product basis.

    ``side='first'`` removes the first factor and returns an N x N matrix;
    ``side='second'`` removes the second and returns M x M.  Row-major
    product indexing: slot (i, j) -> i*N + j.
    """
    m, n = dims
    a = np.asarray(matrix)
    if a.shape != (m * n, m * n):
        raise ValueError(f"matrix shape {a.shape} does not factor as {dims}")
    t = a.reshape(m, n, m, n)
    if side == "first":
        return np.einsum("ijil->jl", t)
    if side == "second":
        return np.einsum("ijkj->ik", t)
    raise ValueError("side must be 'first' or 'second'")


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportScenario:
    """Everything the couplings need: bases, densities and compressed cost."""

    ctx: PhaseSpaceContext
    config_x: WeightedConfiguration
    config_y: WeightedConfiguration
    basis_x: OrthonormalBasis
    basis_y: OrthonormalBasis
    cost: CostMatrix
    density_x: DensityMatrix
    density_y: DensityMatrix

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_x.size, self.basis_y.size


def make_scenario(
    ctx: PhaseSpaceContext,
    config_x: WeightedConfiguration,
    config_y: WeightedConfiguration,
    spectators_x: tuple[CoherentPoint, ...] = (),
    spectators_y: tuple[CoherentPoint, ...] = (),
) -> TransportScenario:
    """Build bases, densities and the compressed cost for a pair of configurations.

    Spectator points enlarge a basis without carrying any mass; the
    transport value must not react to them (tested as the finite-reduction
    invariant).
    """
    cfg_x = _with_spectators(config_x, spectators_x)
    cfg_y = _with_spectators(config_y, spectators_y)
    basis_x = orthonormalize(ctx, cfg_x)
    basis_y = orthonormalize(ctx, cfg_y)
    return TransportScenario(
        ctx=ctx,
        config_x=cfg_x,
        config_y=cfg_y,
        basis_x=basis_x,
        basis_y=basis_y,
        cost=cost_matrix(ctx, basis_x, basis_y),
        density_x=assemble_toeplitz_density(ctx, cfg_x, basis_x),
        density_y=assemble_toeplitz_density(ctx, cfg_y, basis_y),
    )


def _with_spectators(cfg: WeightedConfiguration, extras) -> WeightedConfiguration:
    if not extras:
        return cfg
    return WeightedConfiguration(
        cfg.points + tuple(extras), cfg.weights + (0.0,) * len(extras)
    )


def equal_mass_scenario(ctx: PhaseSpaceContext, a: float, b: float) -> TransportScenario:
    """Half masses on (-a, 0), (a, 0) against half masses on (-b, 0), (b, 0)."""
    return make_scenario(ctx, symmetric_pair(a), symmetric_pair(b))


def unequal_mass_scenario(ctx: PhaseSpaceContext, a: float, eta: float) -> TransportScenario:
    """Masses (1 +/- eta)/2 on (+/-a, 0) against half masses on the same points."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    return make_scenario(ctx, symmetric_pair(a, eta), symmetric_pair(a))


def _pair_overlap(basis: OrthonormalBasis) -> float:
    if basis.size != 2:
        raise QotError("this construction requires a two-point basis")
    return float(basis.gram[0, 1].real)


def _require_equal_masses(scn: TransportScenario) -> None:
    if scn.config_x.weights != (0.5, 0.5) or scn.config_y.weights != (0.5, 0.5):
        raise QotError("this coupling family requires half/half masses on both sides")


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coupling:
    """Transport plan on a product basis along with its marginal data."""

    basis_x: OrthonormalBasis
    basis_y: OrthonormalBasis
    matrix: np.ndarray = field(repr=False)
    cost_value: float = 0.0
    marginal_x: np.ndarray = field(default=None, repr=False)
    marginal_y: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        dims = (self.basis_x.size, self.basis_y.size)
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("coupling must be Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("coupling must have unit trace within 1e-10")
        if hermitian_eig(m)[0][0] < -PSD_TOL:
            raise ValueError("coupling must be PSD within 1e-10")
        for side, key in (("second", "marginal_x"), ("first", "marginal_y")):
            declared = np.asarray(getattr(self, key), dtype=complex)
            got = partial_trace(m, dims, side)
            if np.abs(got - declared).max() > MARGINAL_TOL:
                raise ValueError(f"partial trace does not match declared {key}")
            frozen = np.array(declared, copy=True)
            frozen.setflags(write=False)
            object.__setattr__(self, key, frozen)
        mf = np.array(m, copy=True)
        mf.setflags(write=False)
        object.__setattr__(self, "matrix", mf)

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_x.size, self.basis_y.size


def _coupling(scn: TransportScenario, matrix, marginal_x, marginal_y) -> Coupling:
    value = float(np.real(np.vdot(scn.cost.matrix, matrix)))
    return Coupling(
        basis_x=scn.basis_x,
        basis_y=scn.basis_y,
        matrix=matrix,
        cost_value=value,
        marginal_x=marginal_x,
        marginal_y=marginal_y,
    )


_CHECKERBOARD = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]], dtype=float
)


def uniform_coupling(scn: TransportScenario) -> Coupling:
    """Rank-two coupling with all checkerboard entries equal to 1/4.

    Couples the parity sectors of the two bases uniformly.  Its marginals
    are the maximally mixed states on each basis, which agree with the
    pair densities only in the vanishing-overlap limit; against the
    matching limit cost its value is exactly (a - b)^2.
    """
    _require_equal_masses(scn)
    q = _CHECKERBOARD / 4.0
    half = np.eye(2) / 2.0
    return _coupling(scn, q.astype(complex), half, half)


@dataclass(frozen=True)
class AnsatzParameters:
    """Coordinates (p, u, v) of the symmetric checkerboard coupling family."""

    p: float
    u: float
    v: float

    @property
    def U(self) -> float:
        return 1.0 + self.u

    @property
    def V(self) -> float:
        return 1.0 + self.v

    def window(self, lam: float, mu: float) -> tuple[float, float]:
        """Positivity interval for p at fixed (u, v)."""
        lo = -1.0 + math.sqrt((lam + mu) ** 2 + self.U**2)
        hi = 1.0 - math.sqrt((lam - mu) ** 2 + self.V**2)
        return lo, hi

    def feasible(self, lam: float, mu: float, slack: float = 1e-12) -> bool:
        lo, hi = self.window(lam, mu)
        return lo - slack <= self.p <= hi + slack


def ansatz_coupling(
    scn: TransportScenario,
    params: AnsatzParameters,
    *,
    require_psd: bool = True,
) -> Coupling:
    """Member of the checkerboard family with exact pair marginals.

    The matrix is the uniform coupling plus a quarter of

        [[p+lam+mu, 0, 0, u], [0, -p+lam-mu, v, 0],
         [0, v, -p-lam+mu, 0], [u, 0, 0, p-lam-mu]],

    which leaves both partial traces at the true pair densities for every
    (p, u, v).  Positivity holds iff p lies in the window of
    :meth:`AnsatzParameters.window`.
    """
    _require_equal_masses(scn)
    lam = _pair_overlap(scn.basis_x)
    mu = _pair_overlap(scn.basis_y)
    if require_psd and not params.feasible(lam, mu):
        lo, hi = params.window(lam, mu)
        raise InfeasibleAnsatz(
            f"p={params.p:.6g} outside positivity window [{lo:.6g}, {hi:.6g}]"
        )
    p, u, v = params.p, params.u, params.v
    corr = np.array(
        [
            [p + lam + mu, 0, 0, u],
            [0, -p + lam - mu, v, 0],
            [0, v, -p - lam + mu, 0],
            [u, 0, 0, p - lam - mu],
        ]
    )
    q = (_CHECKERBOARD + corr) / 4.0
    return _coupling(scn, q.astype(complex), scn.density_x.matrix, scn.density_y.matrix)


def saturated_ansatz_parameters(scn: TransportScenario, p: float) -> AnsatzParameters:
    """Largest feasible (u, v) at the given p, where the cost is smallest."""
    lam = _pair_overlap(scn.basis_x)
    mu = _pair_overlap(scn.basis_y)
    uu = (p + 1.0) ** 2 - (lam + mu) ** 2
    vv = (1.0 - p) ** 2 - (lam - mu) ** 2
    if uu < -1e-15 or vv < -1e-15:
        raise InfeasibleAnsatz(f"p={p:.6g} admits no feasible saturation")
    return AnsatzParameters(p=p, u=math.sqrt(max(uu, 0.0)) - 1.0, v=math.sqrt(max(vv, 0.0)) - 1.0)


def ansatz_cost(scn: TransportScenario, p: float) -> float:
    """Cost of the saturated family member at p."""
    return ansatz_coupling(scn, saturated_ansatz_parameters(scn, p)).cost_value


@dataclass(frozen=True)
class AnsatzOptimum:
    p: float
    value: float


def minimize_ansatz(scn: TransportScenario, *, tol: float = 1e-12) -> AnsatzOptimum:
    """Golden-section minimum of the saturated-family cost over p.

    The saturated cost is convex on the positivity window, so the interior
    minimum is unique.
    """
    lam = _pair_overlap(scn.basis_x)
    mu = _pair_overlap(scn.basis_y)
    lo = -1.0 + (lam + mu)
    hi = 1.0 - abs(lam - mu)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc = ansatz_cost(scn, c)
    fd = ansatz_cost(scn, d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = ansatz_cost(scn, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = ansatz_cost(scn, d)
    p = (lo + hi) / 2.0
    return AnsatzOptimum(p=p, value=ansatz_cost(scn, p))


def quantized_classical_coupling(scn: TransportScenario) -> Coupling:
    """Positive quantization of the optimal classical plan.

    Solves the discrete transport problem between the two weighted point
    sets (quadratic phase-space ground cost) and lifts the optimal plan to

        Q = sum_ij plan_ij |x_i; y_j><x_i; y_j|,

    whose partial traces are exactly the two densities.
    """
    xs = np.column_stack([scn.config_x.positions(), scn.config_x.momenta()])
    ys = np.column_stack([scn.config_y.positions(), scn.config_y.momenta()])
    plan = solve_transport(
        scn.config_x.weight_array(),
        scn.config_y.weight_array(),
        quadratic_cost_matrix(xs, ys),
    ).plan
    fx = scn.basis_x.frame_coordinates()
    fy = scn.basis_y.frame_coordinates()
    m, n = scn.dims
    q = np.zeros((m * n, m * n), dtype=complex)
    for i in range(plan.shape[0]):
        for j in range(plan.shape[1]):
            w = plan[i, j]
            if w == 0.0:
                continue
            vec = np.kron(fx[:, i], fy[:, j])
            q += w * np.outer(vec, vec.conj())
    q = (q + q.conj().T) / 2.0
    return _coupling(scn, q, scn.density_x.matrix, scn.density_y.matrix)


def optimal_equal_mass_coupling(scn: TransportScenario) -> Coupling:
    """Optimal coupling for symmetric equal-mass pairs.

    Equals the quantization of the monotone classical plan, i.e. the
    half/half mixture of the product projectors |( -a);(-b)> and |a; b>,
    and coincides with the saturated checkerboard member at p = lam*mu.
    """
    _require_equal_masses(scn)
    return quantized_classical_coupling(scn)


_TRACELESS_DIRECTION = np.array(
    [[1, 0, 0, -1], [0, -1, 1, 0], [0, 1, -1, 0], [-1, 0, 0, 1]], dtype=float
)


def traceless_direction() -> np.ndarray:
    """Traceless, marginal-free checkerboard direction (not PSD).

    Both partial traces and the trace vanish, so adding a multiple to any
    coupling preserves all marginal constraints; on symmetric same-point
    scenarios its pairing with the cost is negative, which is what makes
    the quantized classical plan improvable.
    """
    return _TRACELESS_DIRECTION.copy()


def max_feasible_eps(scn: TransportScenario, *, tol: float = 1e-10) -> float:
    """Largest step along the traceless direction keeping the plan PSD.

    Bisection on the smallest eigenvalue of  Q_c + eps * direction.
    """
    qc = quantized_classical_coupling(scn).matrix
    direction = _TRACELESS_DIRECTION.astype(complex)

    def min_eig(e: float) -> float:
        return float(hermitian_eig(qc + e * direction)[0][0])

    dust = 1e-13
    hi = 0.05
    lo = 0.0
    for _ in range(60):
        if min_eig(hi) < -dust:
            break
        lo = hi
        hi *= 2.0
    else:
        raise QotError("traceless direction never leaves the PSD cone")
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if min_eig(mid) >= -dust:
            lo = mid
        else:
            hi = mid
    return lo


def perturbed_classical_coupling(
    scn: TransportScenario,
    eps: float | None = None,
) -> Coupling:
    """Quantized classical plan pushed along the traceless direction.

    With eps omitted, uses min(0.01, max_feasible_eps/2), which is always
    strictly inside the positivity region.  An explicit eps beyond the
    feasible range raises InfeasibleAnsatz.
    """
    base = quantized_classical_coupling(scn)
    if eps is None:
        eps = min(0.01, max_feasible_eps(scn) / 2.0)
    q = base.matrix + eps * _TRACELESS_DIRECTION
    if hermitian_eig(q)[0][0] < -PSD_TOL:
        raise InfeasibleAnsatz(f"eps={eps:.6g} leaves the PSD cone")
    return _coupling(scn, q, scn.density_x.matrix, scn.density_y.matrix)


_COUPLING_KINDS = (
    "uniform",
    "ansatz",
    "optimal_equal_mass",
    "quantized_classical",
    "traceless_direction",
    "perturbed_classical",
)


def build_named_coupling(scn: TransportScenario, kind: str, **params):
    """Dispatch to one of the named coupling constructions.

    Returns a Coupling, except for ``traceless_direction`` which is a raw
    (non-PSD) matrix.
    """
    if kind == "uniform":
        return uniform_coupling(scn)
    if kind == "ansatz":
        return ansatz_coupling(
            scn, AnsatzParameters(params["p"], params["u"], params["v"])
        )
    if kind == "optimal_equal_mass":
        return optimal_equal_mass_coupling(scn)
    if kind == "quantized_classical":
        return quantized_classical_coupling(scn)
    if kind == "traceless_direction":
        return traceless_direction()
    if kind == "perturbed_classical":
        return perturbed_classical_coupling(scn, params.get("eps"))
    raise ValueError(f"unknown coupling kind {kind!r}; choose from {_COUPLING_KINDS}")


# ---------------------------------------------------------------------------
# dual witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualWitness:
    """Pair (A, B) with A (x) I + I (x) B <= C, certifying a lower bound."""

    matrix_x: np.ndarray = field(repr=False)
    matrix_y: np.ndarray = field(repr=False)
    bound: float = 0.0
    slack_spectrum: np.ndarray = field(default=None, repr=False)
    x_star: float | None = None
    f_value: float | None = None

    def __post_init__(self) -> None:
        for name in ("matrix_x", "matrix_y", "slack_spectrum"):
            a = np.array(getattr(self, name), copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def valid(self) -> bool:
        return float(self.slack_spectrum.min()) >= -1e-9

    def certified_bound(self) -> float:
        """Lower bound valid for any unit-trace feasible coupling."""
        return self.bound + min(0.0, float(self.slack_spectrum.min()))


def split_product_operator(y: np.ndarray, dims: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Write an operator of the form A (x) I + I (x) B as such a pair.

    The decomposition is unique up to shifting a multiple of the identity
    between the factors; the returned pair absorbs the shift into B.
    """
    m, n = dims
    a0 = partial_trace(y, dims, "second") / n
    b0 = partial_trace(y, dims, "first") / m
    # fix the gauge so that kron(a, I) + kron(I, b) reproduces y exactly
    excess = (n * np.trace(a0) + m * np.trace(b0) - np.trace(y)).real / (m * n)
    b = b0 - excess * np.eye(n)
    return a0, b


def witness_from_dual_operator(scn: TransportScenario, dual_operator: np.ndarray) -> DualWitness:
    """Package a solver dual into operators on the two factors."""
    a, b = split_product_operator(dual_operator, scn.dims)
    slack = scn.cost.matrix - np.kron(a, np.eye(scn.dims[1])) - np.kron(np.eye(scn.dims[0]), b)
    spectrum = hermitian_eig((slack + slack.conj().T) / 2.0)[0]
    bound = float(
        np.real(np.trace(scn.density_x.matrix @ a) + np.trace(scn.density_y.matrix @ b))
    )
    return DualWitness(matrix_x=a, matrix_y=b, bound=bound, slack_spectrum=spectrum)


def equal_mass_dual_witness(ctx: PhaseSpaceContext, a: float, b: float) -> DualWitness:
    """Closed-form optimal dual pair for symmetric equal-mass pairs.

    Diagonal operators in the parity bases saturate both block constraints
    of the compressed dual; the stationary point sits at

        x* = -4ab (1 - lam^2 mu^2) / ((1 - lam^2)(1 - mu^2)),

    where the certified bound becomes a^2 + b^2 - 2ab = (a - b)^2.
    """
    if a > b:
        w = equal_mass_dual_witness(ctx, b, a)
        return DualWitness(
            matrix_x=w.matrix_y,
            matrix_y=w.matrix_x,
            bound=w.bound,
            slack_spectrum=w.slack_spectrum,
            x_star=w.x_star,
            f_value=w.f_value,
        )
    scn = equal_mass_scenario(ctx, a, b)
    c4 = scn.cost.matrix.real
    ca, cb, cc, cd = c4[0, 0], c4[1, 1], c4[2, 2], c4[3, 3]
    gam, dlt = c4[0, 3], c4[1, 2]
    lam = _pair_overlap(scn.basis_x)
    mu = _pair_overlap(scn.basis_y)
    x = -4.0 * a * b * (1.0 - lam**2 * mu**2) / ((1.0 - lam**2) * (1.0 - mu**2))
    da = math.sqrt(max(x * x - 4.0 * gam * gam, 0.0))   # abar - dbar
    db = math.sqrt(max(x * x - 4.0 * dlt * dlt, 0.0))   # bbar - cbar
    f = x / 2.0 + 0.25 * (lam + mu) * da + 0.25 * (lam - mu) * db
    abar, dbar = (x + da) / 2.0, (x - da) / 2.0
    bbar, cbar = (x + db) / 2.0, (x - db) / 2.0
    system = np.array(
        [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]], dtype=float
    )
    rhs = np.array([abar + ca, bbar + cb, cbar + cc, dbar + cd])
    sol = np.linalg.lstsq(system, rhs, rcond=None)[0]
    amat = np.diag([sol[0], sol[1]]).astype(complex)
    bmat = np.diag([sol[2], sol[3]]).astype(complex)
    slack = scn.cost.matrix - np.kron(amat, np.eye(2)) - np.kron(np.eye(2), bmat)
    spectrum = hermitian_eig((slack + slack.conj().T) / 2.0)[0]
    bound = float(
        np.real(
            np.trace(scn.density_x.matrix @ amat)
            + np.trace(scn.density_y.matrix @ bmat)
        )
    )
    return DualWitness(
        matrix_x=amat,
        matrix_y=bmat,
        bound=bound,
        slack_spectrum=spectrum,
        x_star=x,
        f_value=f,
    )


def block_determinant(m: np.ndarray) -> float:
    """Determinant of a 4x4 checkerboard matrix via its two 2x2 blocks.

    Permuting indices to (0, 3)(1, 2) makes the matrix block diagonal, so

        det = (m00 m33 - m03 m30) (m11 m22 - m12 m21).

    Entries outside the checkerboard pattern must vanish within 1e-12.
    """
    a = np.asarray(m, dtype=complex)
    if a.shape != (4, 4):
        raise ValueError("matrix must be 4x4")
    allowed = np.zeros((4, 4), dtype=bool)
    allowed[np.arange(4), np.arange(4)] = True
    for i, j in ((0, 3), (3, 0), (1, 2), (2, 1)):
        allowed[i, j] = True
    if np.abs(a[~allowed]).max() > 1e-12:
        raise PatternViolation("entries outside the checkerboard pattern are nonzero")
    det = (a[0, 0] * a[3, 3] - a[0, 3] * a[3, 0]) * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
    return float(det.real)


# ---------------------------------------------------------------------------
# positive-quantization analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzAnalysis:
    """Expansion of a coupling over products of coherent dyads.

    ``coefficients[i, j, k, l]`` multiplies |x_i; y_j><x_k; y_l|.  The
    coupling is a positive quantization of a classical plan exactly when
    the pair-off-diagonal coefficients vanish and the diagonal ones are
    nonnegative; the diagonal then is the plan.
    """

    points_x: tuple[CoherentPoint, ...]
    points_y: tuple[CoherentPoint, ...]
    coefficients: np.ndarray = field(repr=False)
    is_representable: bool = False
    off_diagonal_norm: float = 0.0

    def __post_init__(self) -> None:
        c = np.array(self.coefficients, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def symbol_weights(self) -> list[tuple[CoherentPoint, CoherentPoint, float]]:
        out = []
        for i, zx in enumerate(self.points_x):
            for j, zy in enumerate(self.points_y):
                out.append((zx, zy, float(self.coefficients[i, j, i, j].real)))
        return out


def toeplitz_analysis(coupling: Coupling, *, tol: float = 1e-9) -> ToeplitzAnalysis:
    """Expand a coupling in the coherent product frame and classify it."""
    bx = coupling.basis_x.change_of_frame
    by = coupling.basis_y.change_of_frame
    if bx.shape[0] != bx.shape[1] or by.shape[0] != by.shape[1]:
        raise QotError("frame change is singular; cannot expand the coupling")
    m, n = coupling.dims
    k = np.kron(bx, by)
    q = k @ coupling.matrix @ k.conj().T
    # exactness guard: transforming back must reproduce the coupling
    fx = coupling.basis_x.frame_coordinates()
    fy = coupling.basis_y.frame_coordinates()
    f = np.kron(fx, fy)
    recon = f @ q @ f.conj().T
    if np.abs(recon - coupling.matrix).max() > tol:
        raise QotError("frame expansion failed to round-trip the coupling")
    coeffs = q.reshape(m, n, m, n)
    diag_mask = np.zeros((m, n, m, n), dtype=bool)
    for i in range(m):
        for j in range(n):
            diag_mask[i, j, i, j] = True
    off = np.where(diag_mask, 0.0, coeffs)
    off_norm = float(np.linalg.norm(off.ravel()))
    diag = np.array([coeffs[i, j, i, j] for i in range(m) for j in range(n)])
    representable = bool(
        np.abs(off).max() <= tol
        and diag.real.min() >= -tol
        and np.abs(diag.imag).max() <= tol
    )
    return ToeplitzAnalysis(
        points_x=coupling.basis_x.source.points,
        points_y=coupling.basis_y.source.points,
        coefficients=coeffs,
        is_representable=representable,
        off_diagonal_norm=off_norm,
    )


# ---------------------------------------------------------------------------
# the transport value
# ---------------------------------------------------------------------------

def coupling_constraints(
    density_x: np.ndarray, density_y: np.ndarray
) -> list[tuple[np.ndarray, float]]:
    """Trace-affine equalities pinning both partial traces and the trace."""
    m = density_x.shape[0]
    n = density_y.shape[0]
    cons: list[tuple[np.ndarray, float]] = []
    for e in _hermitian_basis(m):
        cons.append((np.kron(e, np.eye(n)), float(np.real(np.vdot(e, density_x)))))
    for e in _hermitian_basis(n):
        cons.append((np.kron(np.eye(m), e), float(np.real(np.vdot(e, density_y)))))
    cons.append((np.eye(m * n, dtype=complex), 1.0))
    return cons


def _hermitian_basis(n: int) -> list[np.ndarray]:
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            basis.append(e)
    return basis


def mk2_problem(scn: TransportScenario) -> HermitianSdp:
    return HermitianSdp(
        cost=scn.cost.matrix,
        constraints=tuple(coupling_constraints(scn.density_x.matrix, scn.density_y.matrix)),
    )


@dataclass(frozen=True)
class Mk2Result:
    value: float
    coupling: Coupling
    report: SolverReport
    witness: DualWitness
    certified_lower_bound: float


def mk2_squared_scenario(
    scn: TransportScenario,
    options: SolverOptions = SolverOptions(),
    *,
    warm_start: bool = True,
    require_convergence: bool = True,
) -> Mk2Result:
    """Solve the transport program on a prepared scenario."""
    problem = mk2_problem(scn)
    initial = quantized_classical_coupling(scn).matrix if warm_start else None
    q, report = solve_sdp(problem, options, initial=initial)
    if require_convergence and not report.converged:
        raise MaxIterations(
            f"solver stopped after {report.iterations} iterations with "
            f"residuals ({report.primal_residual:.2e}, {report.dual_residual:.2e})"
        )
    polished = project_to_feasibility(problem, q, psd_tol=1e-12, affine_tol=1e-12)
    coupling = _coupling(scn, polished, scn.density_x.matrix, scn.density_y.matrix)
    witness = witness_from_dual_operator(scn, report.dual_operator)
    return Mk2Result(
        value=coupling.cost_value,
        coupling=coupling,
        report=report,
        witness=witness,
        certified_lower_bound=witness.certified_bound(),
    )


def mk2_squared(
    ctx: PhaseSpaceContext,
    config_x: WeightedConfiguration,
    config_y: WeightedConfiguration,
    options: SolverOptions = SolverOptions(),
    *,
    spectators_x: tuple[CoherentPoint, ...] = (),
    spectators_y: tuple[CoherentPoint, ...] = (),
    warm_start: bool = True,
    require_convergence: bool = True,
) -> Mk2Result:
    """Squared quantum transport cost between two coherent ensembles.

    Builds the compressed cost and marginal constraints, solves the
    semidefinite program, polishes the optimizer back onto the feasible
    set, and returns the value together with the coupling, the solver
    report and a dual witness whose certified bound is rigorous.
    """
    scn = make_scenario(ctx, config_x, config_y, spectators_x, spectators_y)
    return mk2_squared_scenario(
        scn, options, warm_start=warm_start, require_convergence=require_convergence
    )
