"""Command-line client for the transport service.

Every subcommand builds a request, sends it to the service (in-process by
default, or to a running server via --server) and formats the response.
Numeric output uses 12 significant digits and is locale independent.

Exit codes: 0 on success, 1 when a verification or asserted inequality
fails, 2 on input errors.
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click
import httpx

VERIFY_FAILED = 1
INPUT_ERROR = 2


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _setup_logging() -> None:
    level = os.environ.get("QOT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _post(ctx: click.Context, path: str, payload: dict) -> dict:
    client = _client(ctx.obj.get("server"))
    with client:
        response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail")
    except Exception:  # noqa: BLE001 - non-JSON error body
        detail = response.text
    raise click.UsageError(f"request rejected ({response.status_code}): {detail}")


def _floats(_, __, value):
    if value is None:
        return None
    try:
        return [float(v) for v in str(value).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated numbers: {exc}") from exc


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read configuration file {path}: {exc}") from exc
    if not isinstance(data, dict) or "x" not in data or "y" not in data:
        raise click.UsageError('configuration file must hold {"x": {...}, "y": {...}}')
    return data


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; default runs in process.")
@click.option("--tol", default=1e-8, show_default=True, help="Solver tolerance.")
@click.option("--max-iterations", default=200_000, show_default=True)
@click.pass_context
def main(ctx: click.Context, server: str | None, tol: float, max_iterations: int) -> None:
    """Classical and quantum transport costs between coherent-state ensembles."""
    _setup_logging()
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["options"] = {"tolerance": tol, "max_iterations": max_iterations}


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON file with x and y configurations.")
@click.option("--plan-out", default=None, type=click.Path(), help="Write the optimal plan as CSV.")
@click.pass_context
def w2(ctx: click.Context, config_path: str, plan_out: str | None) -> None:
    """Classical squared transport cost of a configuration pair."""
    data = _load_config_file(config_path)
    out = _post(ctx, "/w2", {"x": data["x"], "y": data["y"]})
    click.echo(f"W2^2 = {_fmt(out['value'])}")
    if plan_out:
        import numpy as np

        from .io import matrix_to_csv

        with open(plan_out, "w", encoding="ascii") as fh:
            fh.write(matrix_to_csv(np.array(out["plan"])))
        click.echo(f"plan written to {plan_out}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--coupling-out", default=None, type=click.Path(), help="Write coupling and witness JSON.")
@click.pass_context
def mk2(ctx: click.Context, config_path: str, coupling_out: str | None) -> None:
    """Quantum squared transport cost with a duality certificate."""
    data = _load_config_file(config_path)
    payload = {
        "x": data["x"],
        "y": data["y"],
        "options": ctx.obj["options"],
        "include_coupling": coupling_out is not None,
    }
    out = _post(ctx, "/mk2", payload)
    rep = out["report"]
    click.echo(f"MK2^2 = {_fmt(out['value'])}")
    click.echo(f"certified lower bound = {_fmt(out['certified_lower_bound'])}")
    click.echo(f"duality gap = {_fmt(rep['gap'])}")
    click.echo(f"iterations = {rep['iterations']} (converged: {rep['converged']})")
    if coupling_out:
        with open(coupling_out, "w", encoding="utf-8") as fh:
            json.dump({"coupling": out["coupling"], "witness": out["witness"]}, fh, indent=2)
        click.echo(f"coupling written to {coupling_out}")
    if not rep["converged"]:
        sys.exit(VERIFY_FAILED)


@main.command("equal-mass")
@click.option("--a", required=True, type=float)
@click.option("--b", required=True, type=float)
@click.option("--hbar", default=1.0, show_default=True, type=float)
@click.pass_context
def equal_mass(ctx: click.Context, a: float, b: float, hbar: float) -> None:
    """Symmetric pairs with half masses: quantum cost equals classical."""
    out = _post(
        ctx,
        "/equal-mass",
        {"a": a, "b": b, "hbar": hbar, "options": ctx.obj["options"]},
    )
    click.echo(f"C_c (classical) = {_fmt(out['classical_cost'])}")
    click.echo(f"C_q (quantum)   = {_fmt(out['quantum_cost'])}")
    click.echo(f"dual bound      = {_fmt(out['dual_bound'])}")
    click.echo(f"duality gap     = {_fmt(out['duality_gap'])}")
    tol = max(1e-6, 10 * ctx.obj["options"]["tolerance"])
    if out["difference"] <= tol * max(1.0, out["classical_cost"]):
        click.echo("verdict: quantum cost equals classical cost")
    else:
        click.echo(f"verdict: costs differ by {_fmt(out['difference'])}")
        sys.exit(VERIFY_FAILED)


@main.command("unequal-mass")
@click.option("--a", required=True, type=float)
@click.option("--eta", required=True, type=float)
@click.option("--hbar", default=1.0, show_default=True, type=float)
@click.option("--eps", default=None, type=float, help="Perturbation size; default min(0.01, max_feasible/2).")
@click.pass_context
def unequal_mass(ctx: click.Context, a: float, eta: float, hbar: float, eps: float | None) -> None:
    """Unequal masses on one side: quantum transport is strictly cheaper."""
    payload = {"a": a, "eta": eta, "hbar": hbar, "options": ctx.obj["options"]}
    if eps is not None:
        payload["eps"] = eps
    out = _post(ctx, "/unequal-mass", payload)
    click.echo(f"C_c (classical)        = {_fmt(out['classical_cost'])}")
    click.echo(f"eps                    = {_fmt(out['eps_used'])} (max feasible {_fmt(out['max_feasible_eps'])})")
    click.echo(f"perturbed coupling cost = {_fmt(out['perturbed_cost'])}")
    click.echo(f"C_q (solver)           = {_fmt(out['quantum_cost'])}")
    if out["strictly_cheaper"]:
        click.echo("verdict: quantum strictly cheaper")
    else:
        click.echo("verdict: no strict improvement found")
        sys.exit(VERIFY_FAILED)


@main.command()
@click.option("--scenario", type=click.Choice(["equal-mass", "unequal-mass"]), required=True)
@click.option("--a", "a_values", callback=_floats, required=True, help="Comma-separated values.")
@click.option("--b", "b_values", callback=_floats, default=None)
@click.option("--eta", "eta_values", callback=_floats, default=None)
@click.option("--hbar", "hbar_values", callback=_floats, required=True)
@click.option("--eps", default=None, type=float)
@click.option("--output", default=None, type=click.Path(), help="CSV file; default prints to stdout.")
@click.pass_context
def sweep(ctx, scenario, a_values, b_values, eta_values, hbar_values, eps, output) -> None:
    """Grid of scenarios; emits one CSV row per parameter tuple."""
    payload = {
        "scenario": scenario,
        "a_values": a_values,
        "b_values": b_values or [],
        "eta_values": eta_values or [],
        "hbar_values": hbar_values,
        "options": ctx.obj["options"],
    }
    if eps is not None:
        payload["eps"] = eps
    out = _post(ctx, "/sweep", payload)
    if output:
        with open(output, "w", encoding="ascii") as fh:
            fh.write(out["csv"])
        click.echo(f"{len(out['rows'])} rows written to {output}")
    else:
        click.echo(out["csv"], nl=False)


@main.command("husimi-bound")
@click.option("--a", required=True, type=float)
@click.option("--b", required=True, type=float)
@click.option("--hbar", default=1.0, show_default=True, type=float)
@click.option("--lo", default=-8.0, show_default=True, type=float)
@click.option("--hi", default=8.0, show_default=True, type=float)
@click.option("--step", default=0.1, show_default=True, type=float)
@click.pass_context
def husimi_bound(ctx, a, b, hbar, lo, hi, step) -> None:
    """Wasserstein cost of Husimi marginals against MK2^2 + 4*hbar."""
    out = _post(
        ctx,
        "/husimi-bound",
        {
            "a": a, "b": b, "hbar": hbar,
            "grid": {"lo": lo, "hi": hi, "step": step},
            "options": ctx.obj["options"],
        },
    )
    click.echo(f"W2^2 (Husimi, grid)    = {_fmt(out['w2_husimi_squared'])}")
    click.echo(f"W2^2 (refined grid)    = {_fmt(out['refined_w2_husimi_squared'])}")
    click.echo(f"MK2^2 + 4 hbar         = {_fmt(out['mk2_squared'] + out['hbar_term'])}")
    click.echo(f"bound slack            = {_fmt(out['bound_slack'])}")
    click.echo(f"discretization claim   = {_fmt(out['discretization_tolerance'])}")
    if out["bound_slack"] + out["discretization_tolerance"] < 0:
        click.echo("verdict: bound violated")
        sys.exit(VERIFY_FAILED)
    click.echo("verdict: bound holds")


@main.command()
@click.option("--check", "checks", multiple=True, help="Run only the named checks.")
@click.pass_context
def verify(ctx: click.Context, checks: tuple[str, ...]) -> None:
    """Run the full invariant suite; nonzero exit on any failure."""
    payload = {"checks": list(checks)} if checks else {}
    out = _post(ctx, "/verify", payload)
    for res in out["results"]:
        status = "ok" if res["passed"] else "FAIL"
        click.echo(f"[{status:>4}] {res['name']}: {res['detail']}")
    if not out["passed"]:
        sys.exit(VERIFY_FAILED)
    click.echo(f"all {len(out['results'])} checks passed")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service (requires uvicorn)."""
    try:
        import uvicorn
    except ImportError as exc:
        raise click.UsageError("uvicorn is not installed; pip install qot[serve]") from exc
    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
