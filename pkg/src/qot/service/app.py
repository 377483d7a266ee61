"""FastAPI service exposing the transport computations.

Endpoints wrap the core package one-to-one; the CLI is a thin client of
this app (in-process by default, over HTTP with --server).  All handlers
are synchronous pure computations, so FastAPI runs them on its worker
threads and concurrent requests do not share state.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import io as qio
from ..classical import quadratic_cost_matrix, solve_transport
from ..errors import QotError
from ..sdp import SolverOptions, SolverReport
from ..semiclassical import (
    GridSpec,
    check_husimi_bound,
    classical_cost,
)
from ..states import CoherentPoint, PhaseSpaceContext, WeightedConfiguration, symmetric_pair
from ..transport import (
    equal_mass_dual_witness,
    equal_mass_scenario,
    max_feasible_eps,
    mk2_squared,
    mk2_squared_scenario,
    perturbed_classical_coupling,
    unequal_mass_scenario,
)
from ..verification import run_checks
from . import schemas

SWEEP_COLUMNS = (
    "scenario,a,b,eta,hbar,eps,c_classical,c_quantum,gap,dual_gap,iterations"
)


def _configuration(model: schemas.ConfigurationModel):
    ctx = PhaseSpaceContext(hbar=model.hbar)
    cfg = WeightedConfiguration.from_arrays(model.points, model.weights)
    return ctx, cfg


def _options(model: schemas.SolverOptionsModel) -> SolverOptions:
    return SolverOptions(
        tolerance=model.tolerance,
        max_iterations=model.max_iterations,
        penalty=model.penalty,
    )


def _report(report: SolverReport) -> schemas.SolverReportModel:
    return schemas.SolverReportModel(
        primal_value=report.primal_value,
        dual_value=report.dual_value,
        primal_residual=report.primal_residual,
        dual_residual=report.dual_residual,
        gap=report.gap,
        iterations=report.iterations,
        converged=report.converged,
        dual_min_eigenvalue=report.dual_min_eigenvalue,
    )


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _sweep_csv(rows: list[schemas.SweepRow]) -> str:
    lines = [SWEEP_COLUMNS]
    for r in rows:
        lines.append(
            ",".join(
                _format_cell(v)
                for v in (
                    r.scenario, r.a, r.b, r.eta, r.hbar, r.eps,
                    r.c_classical, r.c_quantum, r.gap, r.dual_gap, r.iterations,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _equal_mass_row(a: float, b: float, hbar: float, options: SolverOptions) -> schemas.SweepRow:
    ctx = PhaseSpaceContext(hbar=hbar)
    scn = equal_mass_scenario(ctx, a, b)
    c_cl = classical_cost(scn.config_x, scn.config_y)
    res = mk2_squared_scenario(scn, options)
    return schemas.SweepRow(
        scenario="equal-mass", a=a, b=b, eta=None, hbar=hbar, eps=None,
        c_classical=c_cl, c_quantum=res.value, gap=c_cl - res.value,
        dual_gap=res.report.gap, iterations=res.report.iterations,
    )


def _unequal_mass_row(
    a: float, eta: float, hbar: float, eps: float | None, options: SolverOptions
) -> schemas.SweepRow:
    ctx = PhaseSpaceContext(hbar=hbar)
    scn = unequal_mass_scenario(ctx, a, eta)
    c_cl = classical_cost(scn.config_x, scn.config_y)
    res = mk2_squared_scenario(scn, options)
    used = eps if eps is not None else min(0.01, max_feasible_eps(scn) / 2.0)
    return schemas.SweepRow(
        scenario="unequal-mass", a=a, b=None, eta=eta, hbar=hbar, eps=used,
        c_classical=c_cl, c_quantum=res.value, gap=c_cl - res.value,
        dual_gap=res.report.gap, iterations=res.report.iterations,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="coherent-state transport service",
        description=(
            "Classical and quantum optimal transport costs between "
            "coherent-state ensembles, with primal-dual certificates."
        ),
        version="0.1.0",
    )

    @app.exception_handler(QotError)
    async def _domain_error(_: Request, exc: QotError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/w2", response_model=schemas.W2Response)
    def w2(req: schemas.W2Request) -> schemas.W2Response:
        _, cfg_x = _configuration(req.x)
        _, cfg_y = _configuration(req.y)
        xs = np.column_stack([cfg_x.positions(), cfg_x.momenta()])
        ys = np.column_stack([cfg_y.positions(), cfg_y.momenta()])
        sol = solve_transport(
            cfg_x.weight_array(), cfg_y.weight_array(), quadratic_cost_matrix(xs, ys)
        )
        return schemas.W2Response(
            value=sol.cost,
            plan=[[float(v) for v in row] for row in sol.plan],
            row_potentials=[float(v) for v in sol.row_potentials],
            col_potentials=[float(v) for v in sol.col_potentials],
        )

    @app.post("/mk2", response_model=schemas.Mk2Response)
    def mk2(req: schemas.Mk2Request) -> schemas.Mk2Response:
        ctx, cfg_x = _configuration(req.x)
        _, cfg_y = _configuration(req.y)
        res = mk2_squared(
            ctx,
            cfg_x,
            cfg_y,
            _options(req.options),
            spectators_x=tuple(CoherentPoint(q, p) for q, p in req.spectators_x),
            spectators_y=tuple(CoherentPoint(q, p) for q, p in req.spectators_y),
        )
        coupling = qio.coupling_to_dict(ctx, res.coupling) if req.include_coupling else None
        witness = qio.witness_to_dict(res.witness) if req.include_coupling else None
        return schemas.Mk2Response(
            value=res.value,
            certified_lower_bound=res.certified_lower_bound,
            report=_report(res.report),
            coupling=coupling,
            witness=witness,
        )

    @app.post("/equal-mass", response_model=schemas.EqualMassResponse)
    def equal_mass(req: schemas.EqualMassRequest) -> schemas.EqualMassResponse:
        ctx = PhaseSpaceContext(hbar=req.hbar)
        scn = equal_mass_scenario(ctx, req.a, req.b)
        c_cl = classical_cost(scn.config_x, scn.config_y)
        res = mk2_squared_scenario(scn, _options(req.options))
        witness = equal_mass_dual_witness(ctx, req.a, req.b)
        return schemas.EqualMassResponse(
            classical_cost=c_cl,
            quantum_cost=res.value,
            dual_bound=witness.bound,
            duality_gap=res.report.gap,
            difference=abs(c_cl - res.value),
            report=_report(res.report),
        )

    @app.post("/unequal-mass", response_model=schemas.UnequalMassResponse)
    def unequal_mass(req: schemas.UnequalMassRequest) -> schemas.UnequalMassResponse:
        ctx = PhaseSpaceContext(hbar=req.hbar)
        scn = unequal_mass_scenario(ctx, req.a, req.eta)
        c_cl = classical_cost(scn.config_x, scn.config_y)
        eps_max = max_feasible_eps(scn)
        eps_used = req.eps if req.eps is not None else min(0.01, eps_max / 2.0)
        pert = perturbed_classical_coupling(scn, eps_used)
        res = mk2_squared_scenario(scn, _options(req.options))
        return schemas.UnequalMassResponse(
            classical_cost=c_cl,
            quantum_cost=res.value,
            eps_used=eps_used,
            max_feasible_eps=eps_max,
            perturbed_cost=pert.cost_value,
            strictly_cheaper=res.value < c_cl - 1e-9 and pert.cost_value < c_cl,
            report=_report(res.report),
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        options = _options(req.options)
        tasks = []
        if req.scenario == "equal-mass":
            for a in req.a_values:
                for b in req.b_values:
                    for h in req.hbar_values:
                        tasks.append(("eq", a, b, h))
        else:
            for a in req.a_values:
                for eta in req.eta_values:
                    for h in req.hbar_values:
                        tasks.append(("un", a, eta, h))

        def run(task):
            kind, a, second, h = task
            if kind == "eq":
                return _equal_mass_row(a, second, h, options)
            return _unequal_mass_row(a, second, h, req.eps, options)

        with ThreadPoolExecutor(max_workers=min(4, max(1, len(tasks)))) as pool:
            rows = list(pool.map(run, tasks))
        return schemas.SweepResponse(rows=rows, csv=_sweep_csv(rows))

    @app.post("/husimi-bound", response_model=schemas.HusimiBoundResponse)
    def husimi_bound(req: schemas.HusimiBoundRequest) -> schemas.HusimiBoundResponse:
        if req.x is not None:
            ctx, cfg_x = _configuration(req.x)
            _, cfg_y = _configuration(req.y)
        else:
            ctx = PhaseSpaceContext(hbar=req.hbar)
            cfg_x = symmetric_pair(req.a)
            cfg_y = symmetric_pair(req.b)
        rep = check_husimi_bound(
            ctx,
            cfg_x,
            cfg_y,
            GridSpec(lo=req.grid.lo, hi=req.grid.hi, step=req.grid.step),
            _options(req.options),
            max_support=req.max_support,
        )
        return schemas.HusimiBoundResponse(
            w2_husimi_squared=rep.w2_husimi_squared,
            refined_w2_husimi_squared=rep.refined_w2_husimi_squared,
            refinement_difference=rep.refinement_difference,
            mk2_squared=rep.mk2_squared,
            hbar_term=rep.hbar_term,
            bound_slack=rep.bound_slack,
            discretization_tolerance=rep.discretization_tolerance,
        )

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
        results = run_checks(req.checks)
        return schemas.VerifyResponse(
            passed=all(r.passed for r in results),
            results=[
                schemas.CheckResultModel(name=r.name, passed=r.passed, detail=r.detail)
                for r in results
            ],
        )

    return app


app = create_app()
