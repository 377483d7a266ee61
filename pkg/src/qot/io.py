"""JSON and CSV serialization of configurations, couplings and plans."""

from __future__ import annotations

import json

import numpy as np

from .states import PhaseSpaceContext, WeightedConfiguration
from .transport import Coupling, DualWitness


def configuration_to_dict(ctx: PhaseSpaceContext, config: WeightedConfiguration) -> dict:
    return {
        "hbar": ctx.hbar,
        "points": [[z.q, z.p] for z in config.points],
        "weights": list(config.weights),
    }


def configuration_from_dict(data: dict) -> tuple[PhaseSpaceContext, WeightedConfiguration]:
    try:
        ctx = PhaseSpaceContext(hbar=float(data["hbar"]))
        cfg = WeightedConfiguration.from_arrays(data["points"], data["weights"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed configuration object: {exc}") from exc
    return ctx, cfg


def pair_from_dict(data: dict) -> tuple[PhaseSpaceContext, WeightedConfiguration, WeightedConfiguration]:
    """Load {"x": <configuration>, "y": <configuration>} with matching hbar."""
    if not isinstance(data, dict) or "x" not in data or "y" not in data:
        raise ValueError('expected an object with "x" and "y" configurations')
    ctx_x, cfg_x = configuration_from_dict(data["x"])
    ctx_y, cfg_y = configuration_from_dict(data["y"])
    if ctx_x.hbar != ctx_y.hbar:
        raise ValueError("the two configurations carry different hbar values")
    return ctx_x, cfg_x, cfg_y


def load_pair(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return pair_from_dict(json.load(fh))


def _complex_matrix_to_lists(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _complex_matrix_from_lists(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def coupling_to_dict(ctx: PhaseSpaceContext, coupling: Coupling) -> dict:
    """Coupling as basis metadata plus a row-major [re, im] matrix."""
    return {
        "hbar": ctx.hbar,
        "basis_x": configuration_to_dict(ctx, coupling.basis_x.source),
        "basis_y": configuration_to_dict(ctx, coupling.basis_y.source),
        "matrix": _complex_matrix_to_lists(coupling.matrix),
        "cost_value": coupling.cost_value,
    }


def witness_to_dict(witness: DualWitness) -> dict:
    return {
        "matrix_x": _complex_matrix_to_lists(witness.matrix_x),
        "matrix_y": _complex_matrix_to_lists(witness.matrix_y),
        "bound": witness.bound,
        "slack_spectrum": [float(w) for w in witness.slack_spectrum],
        "certified_bound": witness.certified_bound(),
    }


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major CSV with an index header row and an index column."""
    m = np.asarray(m)
    cols = ",".join(str(j) for j in range(m.shape[1]))
    lines = ["index," + cols]
    for i, row in enumerate(m):
        cells = []
        for z in row:
            if np.iscomplexobj(m) and z.imag != 0:
                cells.append(repr(complex(z)).strip("()"))
            else:
                cells.append(repr(float(np.real(z))))
        lines.append(f"{i}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln]
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")[1:]
        rows.append([complex(c) for c in cells])
    m = np.array(rows)
    return m.real if np.abs(m.imag).max() == 0.0 else m
