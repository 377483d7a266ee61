"""Quantum optimal transport between coherent-state ensembles.

Computes the quantum transport cost MK2^2 between densities built from
finite coherent-state families, the classical Wasserstein cost W2^2
between the underlying point measures, and primal-dual certificates for
both.  See the README for the CLI and the HTTP service.
"""

from .classical import ClassicalCoupling, GridSample, solve_transport, w2_squared_1d, w2_squared_grid
from .cost import CostMatrix, cost_matrix, pair_cost_element, zero_overlap_cost
from .sdp import HermitianSdp, SolverOptions, SolverReport, hermitian_eig, psd_project, solve_sdp
from .semiclassical import (
    GridSpec,
    check_husimi_bound,
    check_toeplitz_inequality,
    classical_cost,
    gap_vs_hbar,
)
from .states import (
    CoherentPoint,
    DensityMatrix,
    OrthonormalBasis,
    PhaseSpaceContext,
    WeightedConfiguration,
    gram_matrix,
    husimi,
    orthonormalize,
    overlap,
    symmetric_pair,
    toeplitz_density,
)
from .transport import (
    AnsatzParameters,
    Coupling,
    DualWitness,
    Mk2Result,
    ToeplitzAnalysis,
    block_determinant,
    build_named_coupling,
    equal_mass_dual_witness,
    equal_mass_scenario,
    make_scenario,
    max_feasible_eps,
    mk2_squared,
    partial_trace,
    toeplitz_analysis,
    unequal_mass_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AnsatzParameters",
    "ClassicalCoupling",
    "CoherentPoint",
    "CostMatrix",
    "Coupling",
    "DensityMatrix",
    "DualWitness",
    "GridSample",
    "GridSpec",
    "HermitianSdp",
    "Mk2Result",
    "OrthonormalBasis",
    "PhaseSpaceContext",
    "SolverOptions",
    "SolverReport",
    "ToeplitzAnalysis",
    "WeightedConfiguration",
    "block_determinant",
    "build_named_coupling",
    "check_husimi_bound",
    "check_toeplitz_inequality",
    "classical_cost",
    "cost_matrix",
    "equal_mass_dual_witness",
    "equal_mass_scenario",
    "gap_vs_hbar",
    "gram_matrix",
    "hermitian_eig",
    "husimi",
    "make_scenario",
    "max_feasible_eps",
    "mk2_squared",
    "orthonormalize",
    "overlap",
    "pair_cost_element",
    "partial_trace",
    "psd_project",
    "solve_sdp",
    "solve_transport",
    "symmetric_pair",
    "toeplitz_analysis",
    "toeplitz_density",
    "unequal_mass_scenario",
    "w2_squared_1d",
    "w2_squared_grid",
    "zero_overlap_cost",
]
