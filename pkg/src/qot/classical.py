"""Exact discrete optimal transport and grid-based approximations.

The core solver is a transportation simplex over the bipartite problem

    minimize sum_ij p_ij c_ij   s.t.  row sums = m,  col sums = n,  p >= 0,

kept exact (to 1e-9) at the sizes this package needs and certified through
its complementary-slackness duals.  On top of it sit the closed 1d
quantile coupling for quadratic cost and a truncated-support solver for
measures sampled on a phase-space grid.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatch,
    InfeasibleMasses,
    NonzeroMomentum,
    NumericalBreakdown,
)
from .states import WeightedConfiguration

MASS_TOL = 1e-9


@dataclass(frozen=True)
class ClassicalCoupling:
    """Optimal plan with its cost and the certifying dual potentials."""

    plan: np.ndarray
    cost: float
    row_potentials: np.ndarray
    col_potentials: np.ndarray

    def __post_init__(self) -> None:
        for name in ("plan", "row_potentials", "col_potentials"):
            a = np.array(getattr(self, name), copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def quadratic_cost_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Pairwise squared distances; rows index ``xs``, columns ``ys``."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.shape[0] == 1 and xs.shape[1] > 1 and ys.shape[0] == 1:
        xs, ys = xs.T, ys.T
    diff = xs[:, None, :] - ys[None, :, :]
    return np.sum(diff * diff, axis=2)


# ---------------------------------------------------------------------------
# transportation simplex
# ---------------------------------------------------------------------------

def _northwest_corner(m: np.ndarray, n: np.ndarray):
    cells = []
    flows = []
    rm = m.copy()
    rn = n.copy()
    i = j = 0
    mm, nn = len(m), len(n)
    while True:
        t = min(rm[i], rn[j])
        cells.append((i, j))
        flows.append(t)
        rm[i] -= t
        rn[j] -= t
        if i == mm - 1 and j == nn - 1:
            break
        if rm[i] <= rn[j] and i < mm - 1:
            i += 1
        elif j < nn - 1:
            j += 1
        else:
            i += 1
    return cells, flows


def _tree_potentials(adj, cost, mm, nn):
    u = np.zeros(mm)
    v = np.zeros(nn)
    seen = [False] * (mm + nn)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nb, (i, j) in adj[node].items():
            if not seen[nb]:
                if node < mm:
                    v[j] = cost[i, j] - u[i]
                else:
                    u[i] = cost[i, j] - v[j]
                seen[nb] = True
                queue.append(nb)
    if not all(seen):
        raise NumericalBreakdown("basis graph is not a spanning tree")
    return u, v


def _tree_path(adj, start, goal):
    parent = {start: (None, None)}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb, cell in adj[node].items():
            if nb not in parent:
                parent[nb] = (node, cell)
                queue.append(nb)
    path_cells = []
    node = goal
    while node != start:
        prev, cell = parent[node]
        path_cells.append(cell)
        node = prev
    path_cells.reverse()
    return path_cells


def solve_transport(
    masses_m,
    masses_n,
    cost,
    *,
    tol: float = MASS_TOL,
) -> ClassicalCoupling:
    """Solve the transportation problem exactly.

    Raises InfeasibleMasses when the two mass vectors do not balance within
    ``tol``.  Degeneracy is handled by a scaled epsilon perturbation of the
    masses during pivoting (removed from the reported plan) and Bland's
    anti-cycling entering rule takes over whenever pivots stall.
    """
    m = np.asarray(masses_m, dtype=float).copy()
    n = np.asarray(masses_n, dtype=float).copy()
    cost = np.asarray(cost, dtype=float)
    if m.ndim != 1 or n.ndim != 1 or cost.shape != (len(m), len(n)):
        raise ValueError("cost must be (len(m), len(n))")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost entries must be finite")
    if np.any(m < -1e-15) or np.any(n < -1e-15):
        raise InfeasibleMasses("masses must be nonnegative")
    if abs(m.sum() - n.sum()) > tol:
        raise InfeasibleMasses(
            f"mass totals differ by {abs(m.sum() - n.sum()):.3e} (> {tol:.1e})"
        )
    m = np.clip(m, 0.0, None)
    n = np.clip(n, 0.0, None)
    n *= m.sum() / n.sum()

    mm, nn = len(m), len(n)
    scale = max(1.0, float(np.abs(cost).max()))
    eps = 1e-13 * max(m.max(), n.max())
    mp = m + eps
    np_ = n.copy()
    np_[-1] += mm * eps

    cells, flows = _northwest_corner(mp, np_)
    flow = dict(zip(cells, flows))
    adj: list[dict] = [dict() for _ in range(mm + nn)]
    for (i, j) in cells:
        adj[i][mm + j] = (i, j)
        adj[mm + j][i] = (i, j)

    enter_tol = 1e-11 * scale
    max_pivots = 80 * (mm + nn) + 1000
    stalled = 0
    use_bland = False
    pivots = 0
    while True:
        if pivots > max_pivots:
            raise NumericalBreakdown("pivot limit exceeded")
        u, v = _tree_potentials(adj, cost, mm, nn)
        red = cost - u[:, None] - v[None, :]
        if use_bland:
            mask = red < -enter_tol
            if not mask.any():
                break
            flat = int(np.flatnonzero(mask.ravel())[0])
            ei, ej = divmod(flat, nn)
        else:
            flat = int(np.argmin(red))
            ei, ej = divmod(flat, nn)
            if red[ei, ej] >= -enter_tol:
                break
        path = _tree_path(adj, ei, mm + ej)
        # signs along the cycle: entering cell +, then alternate - / + on path
        minus = path[0::2]
        theta = min(flow[c] for c in minus)
        leaving = next(c for c in minus if flow[c] == theta)
        for k, c in enumerate(path):
            flow[c] += theta if k % 2 else -theta
        flow[(ei, ej)] = flow.get((ei, ej), 0.0) + theta
        li, lj = leaving
        del flow[leaving]
        del adj[li][mm + lj]
        del adj[mm + lj][li]
        adj[ei][mm + ej] = (ei, ej)
        adj[mm + ej][ei] = (ei, ej)
        pivots += 1
        if theta <= eps:
            stalled += 1
            if stalled > 20:
                use_bland = True
        else:
            stalled = 0
            use_bland = False

    # re-solve the final tree against the unperturbed masses
    plan = np.zeros((mm, nn))
    degree = [len(a) for a in adj]
    rem = np.concatenate([m, n])
    leaves = deque(node for node in range(mm + nn) if degree[node] == 1)
    edges_left = sum(degree) // 2
    while edges_left:
        node = leaves.popleft()
        if degree[node] != 1:
            continue
        nb, (i, j) = next(iter(adj[node].items()))
        t = rem[node]
        plan[i, j] = t
        rem[node] = 0.0
        rem[nb] -= t
        del adj[node][nb]
        del adj[nb][node]
        degree[node] -= 1
        degree[nb] -= 1
        edges_left -= 1
        if degree[nb] == 1:
            leaves.append(nb)
    if plan.min() < -1e-9 * max(1.0, m.max()):
        raise NumericalBreakdown("negative flow after removing the perturbation")
    plan = np.clip(plan, 0.0, None)

    u, v = _tree_potentials(_rebuild_adj(mm, nn, flow), cost, mm, nn)
    red = cost - u[:, None] - v[None, :]
    if red.min() < -1e-9 * scale:
        raise NumericalBreakdown("dual certificate violated after pivoting")
    if np.abs(plan * red).max() > 1e-8 * scale:
        raise NumericalBreakdown("complementary slackness violated")
    value = float(np.sum(plan * cost))
    return ClassicalCoupling(plan=plan, cost=value, row_potentials=u, col_potentials=v)


def _rebuild_adj(mm, nn, basic_flow):
    adj: list[dict] = [dict() for _ in range(mm + nn)]
    for (i, j) in basic_flow:
        adj[i][mm + j] = (i, j)
        adj[mm + j][i] = (i, j)
    return adj


# ---------------------------------------------------------------------------
# one-dimensional quantile coupling
# ---------------------------------------------------------------------------

def w2_squared_1d(mu: WeightedConfiguration, nu: WeightedConfiguration) -> float:
    """Squared quadratic Wasserstein cost between 1d point measures.

    Computed by the monotone (quantile) coupling, which is optimal for the
    quadratic ground cost on the line.  Requires all momenta to vanish.
    """
    for cfg in (mu, nu):
        if np.any(cfg.momenta() != 0.0):
            raise NonzeroMomentum("1d transport is defined for zero-momentum points")
    xs = mu.positions()
    ys = nu.positions()
    ox = np.argsort(xs, kind="stable")
    oy = np.argsort(ys, kind="stable")
    xs, wx = xs[ox], mu.weight_array()[ox]
    ys, wy = ys[oy], nu.weight_array()[oy]
    total = 0.0
    i = j = 0
    ri, rj = wx[0], wy[0]
    while True:
        t = min(ri, rj)
        total += t * (xs[i] - ys[j]) ** 2
        ri -= t
        rj -= t
        if ri <= 1e-17:
            i += 1
            if i == len(xs):
                break
            ri = wx[i]
        if rj <= 1e-17:
            j += 1
            if j == len(ys):
                break
            rj = wy[j]
    return float(total)


# ---------------------------------------------------------------------------
# grid-sampled measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSample:
    """Probability masses attached to the cells of a rectangular grid."""

    q_axis: np.ndarray
    p_axis: np.ndarray
    masses: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        q = np.asarray(self.q_axis, dtype=float)
        p = np.asarray(self.p_axis, dtype=float)
        w = np.asarray(self.masses, dtype=float)
        if w.shape != (len(q), len(p)):
            raise ValueError("masses must have shape (len(q_axis), len(p_axis))")
        if np.any(w < 0):
            raise ValueError("cell masses must be nonnegative")
        for name, a in (("q_axis", q), ("p_axis", p), ("masses", w)):
            a = np.array(a, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_density(cls, q_axis, p_axis, values) -> "GridSample":
        """Turn sampled density values into normalized cell masses."""
        q = np.asarray(q_axis, dtype=float)
        p = np.asarray(p_axis, dtype=float)
        vals = np.clip(np.asarray(values, dtype=float), 0.0, None)
        cell = (q[1] - q[0]) * (p[1] - p[0])
        w = vals * cell
        return cls(q, p, w / w.sum())


@dataclass(frozen=True)
class GridTransportReport:
    """Result of a truncated-support grid transport solve."""

    value: float
    dropped_mass_x: float
    dropped_mass_y: float
    support_x: int
    support_y: int
    block_size: int
    variance_x: float
    variance_y: float
    error_bound: float


def _truncate(sample: GridSample, cutoff: float):
    w = sample.masses
    keep = w >= cutoff
    dropped = float(w[~keep].sum())
    qi, pi = np.nonzero(keep)
    masses = w[keep]
    masses = masses / masses.sum()
    return qi, pi, masses, dropped


def _aggregate(sample: GridSample, qi, pi, masses, block: int):
    """Merge cells into block-of-cells centroids; returns points, masses, variance."""
    qs = sample.q_axis[qi]
    ps = sample.p_axis[pi]
    if block <= 1:
        return np.column_stack([qs, ps]), masses, 0.0
    keys = (qi // block) * (len(sample.p_axis) // block + 2) + (pi // block)
    order = np.argsort(keys, kind="stable")
    keys, qs, ps, masses = keys[order], qs[order], ps[order], masses[order]
    boundaries = np.flatnonzero(np.diff(keys)) + 1
    groups = np.split(np.arange(len(keys)), boundaries)
    pts = np.empty((len(groups), 2))
    agg = np.empty(len(groups))
    variance = 0.0
    for g, idx in enumerate(groups):
        w = masses[idx]
        tot = w.sum()
        cq = float(np.dot(w, qs[idx]) / tot)
        cp = float(np.dot(w, ps[idx]) / tot)
        pts[g] = (cq, cp)
        agg[g] = tot
        variance += float(np.dot(w, (qs[idx] - cq) ** 2 + (ps[idx] - cp) ** 2))
    return pts, agg, variance


def w2_squared_grid(
    f: GridSample,
    g: GridSample,
    *,
    mass_cutoff: float = 1e-12,
    max_support: int = 600,
) -> GridTransportReport:
    """Squared W2 between two measures sampled on the same grid.

    Cells below ``mass_cutoff`` are dropped and the remainder renormalized.
    When the surviving support exceeds ``max_support`` points, cells are
    merged blockwise into mass centroids before the exact solve; by the
    bias-variance identity for quadratic costs the reported value then
    satisfies  value <= W2^2(truncated) <= value + variance_x + variance_y,
    which together with the dropped-mass term gives ``error_bound``.
    """
    if f.q_axis.shape != g.q_axis.shape or f.p_axis.shape != g.p_axis.shape or \
            np.abs(f.q_axis - g.q_axis).max() > 1e-12 or np.abs(f.p_axis - g.p_axis).max() > 1e-12:
        raise GridMismatch("samples must share one grid")
    qi_f, pi_f, w_f, drop_f = _truncate(f, mass_cutoff)
    qi_g, pi_g, w_g, drop_g = _truncate(g, mass_cutoff)
    support = max(len(w_f), len(w_g))
    block = 1
    while support > max_support * block * block:
        block += 1
    pts_f, w_f, var_f = _aggregate(f, qi_f, pi_f, w_f, block)
    pts_g, w_g, var_g = _aggregate(g, qi_g, pi_g, w_g, block)
    cost = quadratic_cost_matrix(pts_f, pts_g)
    sol = solve_transport(w_f, w_g, cost)
    diam2 = (f.q_axis[-1] - f.q_axis[0]) ** 2 + (f.p_axis[-1] - f.p_axis[0]) ** 2
    shift = math.sqrt(var_f) + math.sqrt(var_g) + math.sqrt((drop_f + drop_g) * diam2)
    w2 = math.sqrt(max(sol.cost, 0.0))
    error_bound = shift * (2.0 * w2 + shift)
    return GridTransportReport(
        value=sol.cost,
        dropped_mass_x=drop_f,
        dropped_mass_y=drop_g,
        support_x=len(w_f),
        support_y=len(w_g),
        block_size=block,
        variance_x=var_f,
        variance_y=var_g,
        error_bound=error_bound,
    )
