"""Smooth sign accuracy (SSA) filters.

Causal filters that maximize correlation with a target filter while holding
the expected number of observations between sign changes of their output
fixed.
"""

from .errors import (
    DataError,
    DomainError,
    IdentifiabilityError,
    InfeasibleConstraintError,
    InvalidDimensionError,
    ModelError,
    NumericalError,
    SingularityError,
    SpanError,
    SsaError,
)
from .spectral import SpectralBasis, SpectralWeights, acf1, build_m, eigenpairs, rho_max, spectral_weights
from .targets import TargetSpec, bk_two_sided, hp_concurrent, hp_two_sided, wn_mse_nowcast
from .ssa_core import (
    DualReport,
    SsaConfig,
    SsaSolution,
    b_of_nu,
    boundary_solution,
    ht_from_rho,
    rho_from_ht,
    rho_of_nu,
    sign_accuracy,
    solve_completed,
    solve_ssa,
    solve_ssa_mse,
    ssa_ar2_transfer,
    verify_dual,
)
from .stationary_ext import (
    ProcessModel,
    deconvolve,
    mse_predictor_dependent,
    solve_ssa_dependent,
    solve_ssa_extended,
    wold_matrix,
    wold_weights,
)
from .integrated import (
    IntegratedConfig,
    IntegratedSolution,
    b_matrix,
    mse_vs_benchmark,
    sigma_delta_matrices,
    solve_i1_ssa,
    solve_i2_ssa,
)

__version__ = "0.1.0"
