"""Dense Hermitian semidefinite programming via operator splitting.

Solves   minimize <C, Q>   subject to   trace(A_k Q) = b_k,  Q >= 0,

with everything complex Hermitian.  The iteration alternates a projection
onto the affine constraint subspace (with the cost folded in as a linear
step) and a projection onto the PSD cone computed by a cyclic Jacobi
eigendecomposition.  Dual variables come out of the same iteration and
certify the optimum: at convergence C - sum_k y_k A_k is PSD up to the
tolerance, so sum_k y_k b_k is a valid lower bound.

The solver is deterministic: identical inputs and options produce bitwise
identical iterates and reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InconsistentConstraints, NotHermitian, NumericalBreakdown

HERMITICITY_TOL = 1e-10
JACOBI_OFF_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100


def _check_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian("matrix must be square")
    dev = np.abs(m - m.conj().T).max()
    if dev > tol * max(1.0, np.abs(m).max()):
        raise NotHermitian(f"Hermiticity deviation {dev:.3e} exceeds tolerance")
    return (m + m.conj().T) / 2.0


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns eigenvalues in ascending order and a unitary matrix of
    eigenvectors (columns), with m = V diag(w) V* to high accuracy.  Each
    rotation annihilates one off-diagonal entry; sweeps repeat until the
    off-diagonal mass falls below 1e-14 relative to the matrix norm.
    """
    a = _check_hermitian(m)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    if scale == 0.0 or n == 1:
        return np.real(np.diag(a)).copy(), v
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(float(np.sum(np.abs(np.triu(a, 1)) ** 2)))
        if off <= JACOBI_OFF_THRESHOLD * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0.0:
                    continue
                phase = apq / abs(apq)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * abs(apq))
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # unitary acting on columns (p, q):  [[c, s], [-s*conj(ph), c*conj(ph)]]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * np.conj(phase) * vec_q
                v[:, q] = s * vec_p + c * np.conj(phase) * vec_q
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order].copy(), v[:, order]


def psd_project(m: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped)."""
    w, v = hermitian_eig(m)
    clipped = np.clip(w, 0.0, None)
    out = (v * clipped) @ v.conj().T
    return (out + out.conj().T) / 2.0


# ---------------------------------------------------------------------------
# problem container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianSdp:
    """Cost matrix and trace-affine equality constraints.

    Constraints are orthonormalized at construction (real inner product
    Re trace(A*B) on Hermitian matrices); linearly dependent rows are
    dropped after checking that their right-hand side is consistent.
    """

    cost: np.ndarray = field(repr=False)
    constraints: tuple = field(repr=False)
    # orthonormalized system, filled in __post_init__
    basis: np.ndarray = field(init=False, repr=False)
    rhs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        c = _check_hermitian(self.cost, tol=1e-12)
        object.__setattr__(self, "cost", c)
        mats, rhs = [], []
        for a_k, b_k in self.constraints:
            mats.append(_check_hermitian(a_k, tol=1e-12))
            rhs.append(float(b_k))
        ortho, beta = _orthonormalize_constraints(mats, rhs)
        object.__setattr__(self, "constraints", tuple(zip(mats, rhs)))
        object.__setattr__(self, "basis", ortho)
        object.__setattr__(self, "rhs", beta)

    @property
    def size(self) -> int:
        return self.cost.shape[0]


def _orthonormalize_constraints(mats, rhs):
    kept = []
    betas = []
    for a, b in zip(mats, rhs):
        v = a.astype(complex).ravel().copy()
        bb = float(b)
        norm0 = np.linalg.norm(v)
        for _ in range(2):  # modified Gram-Schmidt, one re-orthogonalization pass
            for e, be in zip(kept, betas):
                coef = float(np.real(np.vdot(e, v)))
                v -= coef * e
                bb -= coef * be
        nrm = np.linalg.norm(v)
        if nrm <= 1e-12 * max(1.0, norm0):
            if abs(bb) > 1e-9 * max(1.0, abs(b)):
                raise InconsistentConstraints(
                    f"dependent constraint with incompatible value (residual {bb:.3e})"
                )
            continue
        kept.append(v / nrm)
        betas.append(bb / nrm)
    n2 = mats[0].size if mats else 0
    basis = np.array(kept).reshape(len(kept), n2) if kept else np.zeros((0, n2))
    return basis, np.array(betas)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 200_000
    penalty: float = 1.0
    balance_every: int = 100
    check_every: int = 25
    trace_path: str | None = None


@dataclass(frozen=True)
class SolverReport:
    primal_value: float
    dual_value: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    converged: bool
    dual_min_eigenvalue: float
    dual_operator: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        y = np.array(self.dual_operator, copy=True)
        y.setflags(write=False)
        object.__setattr__(self, "dual_operator", y)


def solve_sdp(
    problem: HermitianSdp,
    options: SolverOptions = SolverOptions(),
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverReport]:
    """Run the splitting iteration until the certificate tolerances hold.

    Returns the PSD iterate and a report.  Convergence requires the primal
    residual, dual residual and |primal - dual| to fall below the
    tolerance, with the dual slack C - sum_k y_k A_k PSD up to the same
    tolerance.  Hitting the iteration limit returns converged=False rather
    than raising.
    """
    n = problem.size
    cost = problem.cost
    basis = problem.basis          # (m, n*n) orthonormal rows
    basis_c = basis.conj()
    rhs = problem.rhs

    def proj_affine(mat: np.ndarray) -> np.ndarray:
        coef = rhs - np.real(basis_c @ mat.ravel())
        return mat + (coef @ basis).reshape(n, n)

    rho = float(options.penalty)
    tol = float(options.tolerance)
    if initial is not None:
        x = proj_affine(_check_hermitian(initial, tol=1e-10))
    else:
        x = proj_affine(np.zeros((n, n), dtype=complex))
    s = psd_project(x)
    u = np.zeros((n, n), dtype=complex)

    trace_rows: list[str] = []
    report = None
    it = 0
    prim_res = dual_res = math.inf
    for it in range(1, options.max_iterations + 1):
        x = proj_affine(s - u - cost / rho)
        s_new = psd_project(x + u)
        u = u + x - s_new
        dual_res = rho * float(np.linalg.norm(s_new - s))
        s = s_new
        prim_res = float(np.linalg.norm(x - s))
        if not math.isfinite(prim_res):
            raise NumericalBreakdown("non-finite iterate in the splitting loop")
        if it % options.check_every == 0 or it == options.max_iterations:
            report = _certificate(problem, x, u, rho, prim_res, dual_res, it)
            if options.trace_path is not None:
                trace_rows.append(
                    f"{it},{report.primal_value!r},{report.dual_value!r},"
                    f"{report.primal_residual!r},{report.dual_residual!r}"
                )
            if (
                report.primal_residual <= tol
                and report.dual_residual <= tol
                and abs(report.gap) <= tol
                and report.dual_min_eigenvalue >= -tol
            ):
                report = replace(report, converged=True)
                break
        if it % options.balance_every == 0:
            if prim_res > 10.0 * dual_res:
                rho *= 2.0
                u /= 2.0
            elif dual_res > 10.0 * prim_res:
                rho /= 2.0
                u *= 2.0
    if report is None:
        report = _certificate(problem, x, u, rho, prim_res, dual_res, it)
    if options.trace_path is not None:
        header = "iteration,primal,dual,primal_residual,dual_residual\n"
        with open(options.trace_path, "w", encoding="ascii") as fh:
            fh.write(header)
            fh.write("\n".join(trace_rows) + ("\n" if trace_rows else ""))
    return s, report


def _certificate(problem, x, u, rho, prim_res, dual_res, it) -> SolverReport:
    n = problem.size
    y = np.real(problem.basis.conj() @ (problem.cost + rho * u).ravel())
    dual_op = (y @ problem.basis).reshape(n, n)
    slack = problem.cost - dual_op
    wmin = float(hermitian_eig((slack + slack.conj().T) / 2.0)[0][0])
    primal_value = float(np.real(np.vdot(problem.cost, x)))
    dual_value = float(y @ problem.rhs)
    return SolverReport(
        primal_value=primal_value,
        dual_value=dual_value,
        primal_residual=prim_res,
        dual_residual=dual_res,
        gap=primal_value - dual_value,
        iterations=it,
        converged=False,
        dual_min_eigenvalue=wmin,
        dual_operator=dual_op,
    )


def project_to_feasibility(
    problem: HermitianSdp,
    q: np.ndarray,
    *,
    psd_tol: float = 1e-12,
    affine_tol: float = 1e-12,
    max_rounds: int = 500,
) -> np.ndarray:
    """Alternate affine and PSD projections until both residuals are tiny.

    Used to polish a solver iterate into a matrix that satisfies the
    constraint equalities and the cone membership to validation accuracy;
    each round moves the point by at most the current infeasibility, so the
    objective drifts by O(solver tolerance) only.
    """
    n = problem.size
    basis = problem.basis
    basis_c = basis.conj()
    rhs = problem.rhs

    def proj_affine(mat: np.ndarray) -> np.ndarray:
        coef = rhs - np.real(basis_c @ mat.ravel())
        return mat + (coef @ basis).reshape(n, n)

    out = np.asarray(q, dtype=complex)
    for _ in range(max_rounds):
        out = proj_affine(out)
        wmin = hermitian_eig((out + out.conj().T) / 2.0)[0][0]
        if wmin >= -psd_tol:
            return (out + out.conj().T) / 2.0
        out = psd_project(out)
        coef = rhs - np.real(basis_c @ out.ravel())
        if np.abs(coef).max() <= affine_tol:
            return (out + out.conj().T) / 2.0
    raise NumericalBreakdown("feasibility polish failed to converge")
