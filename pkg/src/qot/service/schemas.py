"""Pydantic request and response models for the transport service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ConfigurationModel(BaseModel):
    """Wire format of a weighted configuration, including its hbar."""

    hbar: float = Field(gt=0)
    points: list[tuple[float, float]]
    weights: list[float]


class SolverOptionsModel(BaseModel):
    tolerance: float = Field(default=1e-8, gt=0)
    max_iterations: int = Field(default=200_000, gt=0)
    penalty: float = Field(default=1.0, gt=0)


class SolverReportModel(BaseModel):
    primal_value: float
    dual_value: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    converged: bool
    dual_min_eigenvalue: float


class PairRequest(BaseModel):
    x: ConfigurationModel
    y: ConfigurationModel

    @model_validator(mode="after")
    def _same_hbar(self):
        if self.x.hbar != self.y.hbar:
            raise ValueError("x and y must carry the same hbar")
        return self


class W2Request(PairRequest):
    pass


class W2Response(BaseModel):
    value: float
    plan: list[list[float]]
    row_potentials: list[float]
    col_potentials: list[float]


class Mk2Request(PairRequest):
    options: SolverOptionsModel = SolverOptionsModel()
    spectators_x: list[tuple[float, float]] = []
    spectators_y: list[tuple[float, float]] = []
    include_coupling: bool = False


class Mk2Response(BaseModel):
    value: float
    certified_lower_bound: float
    report: SolverReportModel
    coupling: Optional[dict] = None
    witness: Optional[dict] = None


class EqualMassRequest(BaseModel):
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    hbar: float = Field(gt=0)
    options: SolverOptionsModel = SolverOptionsModel()


class EqualMassResponse(BaseModel):
    classical_cost: float
    quantum_cost: float
    dual_bound: float
    duality_gap: float
    difference: float
    report: SolverReportModel


class UnequalMassRequest(BaseModel):
    a: float = Field(gt=0)
    eta: float = Field(gt=0, lt=1)
    hbar: float = Field(gt=0)
    eps: Optional[float] = Field(default=None, gt=0)
    options: SolverOptionsModel = SolverOptionsModel()


class UnequalMassResponse(BaseModel):
    classical_cost: float
    quantum_cost: float
    eps_used: float
    max_feasible_eps: float
    perturbed_cost: float
    strictly_cheaper: bool
    report: SolverReportModel


class SweepRequest(BaseModel):
    scenario: Literal["equal-mass", "unequal-mass"]
    a_values: list[float]
    b_values: list[float] = []
    eta_values: list[float] = []
    hbar_values: list[float]
    eps: Optional[float] = Field(default=None, gt=0)
    options: SolverOptionsModel = SolverOptionsModel()

    @model_validator(mode="after")
    def _scenario_values(self):
        if self.scenario == "equal-mass" and not self.b_values:
            raise ValueError("equal-mass sweeps need b_values")
        if self.scenario == "unequal-mass" and not self.eta_values:
            raise ValueError("unequal-mass sweeps need eta_values")
        return self


class SweepRow(BaseModel):
    scenario: str
    a: float
    b: Optional[float] = None
    eta: Optional[float] = None
    hbar: float
    eps: Optional[float] = None
    c_classical: float
    c_quantum: float
    gap: float
    dual_gap: float
    iterations: int


class SweepResponse(BaseModel):
    rows: list[SweepRow]
    csv: str


class GridSpecModel(BaseModel):
    lo: float = -8.0
    hi: float = 8.0
    step: float = Field(default=0.1, gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.hi <= self.lo:
            raise ValueError("grid needs hi > lo")
        return self


class HusimiBoundRequest(BaseModel):
    a: Optional[float] = Field(default=None, gt=0)
    b: Optional[float] = Field(default=None, gt=0)
    hbar: Optional[float] = Field(default=None, gt=0)
    x: Optional[ConfigurationModel] = None
    y: Optional[ConfigurationModel] = None
    grid: GridSpecModel = GridSpecModel()
    max_support: int = Field(default=600, gt=10)
    options: SolverOptionsModel = SolverOptionsModel()

    @model_validator(mode="after")
    def _one_form(self):
        explicit = self.x is not None and self.y is not None
        scalar = self.a is not None and self.b is not None and self.hbar is not None
        if explicit == scalar:
            raise ValueError("provide either configurations x and y, or scalars a, b, hbar")
        return self


class HusimiBoundResponse(BaseModel):
    w2_husimi_squared: float
    refined_w2_husimi_squared: float
    refinement_difference: float
    mk2_squared: float
    hbar_term: float
    bound_slack: float
    discretization_tolerance: float


class VerifyRequest(BaseModel):
    checks: Optional[list[str]] = None


class CheckResultModel(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    passed: bool
    results: list[CheckResultModel]
