"""Solver for a 1D periodic aggregation equation with nonlocal, density-dependent diffusion.

    d rho/dt = d/dx ( -beta(rho) H rho + rho dv/dx ),   d^2 v/dx^2 = rho - <rho>,

on [-pi, pi), with H the periodic Hilbert transform.
"""
from .blowup import BlowupFit, blowup_fit
from .config import PRESETS, RunConfig, dump_config, load_config, preset
from .diagnostics import (
    EnergyReport,
    TimeSeriesRecord,
    energy,
    global_existence_margin,
    lemma_lambda_gap,
    prop_max2_bound,
    record,
    theoretical_linf_bound,
)
from .errors import (
    AggregationError,
    ConfigError,
    FitDegenerate,
    InvalidAlpha,
    IoError,
    LambdaTooSmall,
    NegativeDensity,
    NegativeDensityWarning,
    NonFinite,
    QuadratureFailure,
    SingularSystem,
    Unbounded,
)
from .flux import BetaModel, RhsEvaluator, beta_eval, beta_sup_constants, rhs
from .poisson import PoissonSolution, solve_poisson_fd, solve_poisson_spectral
from .rkf import IntegrationResult, RkfConfig, StopReason, adapt_dt, integrate, rkf45_step
from .scenarios import ScenarioResult, build_initial_bump, emit_plot_data, run_scenario
from .spectral import (
    Field,
    PeriodicGrid,
    Spectrum,
    dealias,
    derivative,
    fractional_laplacian,
    from_spectrum,
    hilbert_quadrature,
    hilbert_spectral,
    hs_seminorm,
    lp_norm,
    mean,
    to_spectrum,
)

__version__ = "0.1.0"
