"""Adaptive projection estimation on the trigonometric basis.

Regression, density and spectral-density estimates share one pipeline:
empirical Fourier coefficients, the ``tau`` selection rule for the number of
harmonics, truncation, and data-driven confidence bounds on the L2 error.
"""

from .confidence import (
    ConfidenceReport,
    TailBoundParams,
    aci_refined,
    aci_simple,
    choose_M,
    confidence_report,
    estimate_gamma,
    r1_constants,
    tail_bound_exponential,
    tail_bound_R1,
    tail_bound_R2,
    theorem_tau_bound,
    u_delta,
)
from .empirical import (
    EmpiricalCoeffs,
    empirical_coeffs,
    empirical_coeffs_density,
    empirical_coeffs_regression,
    empirical_coeffs_spectral,
)
from .estimator import AdaptiveEstimate, adaptive_estimate, evaluate, l2_error
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    coverage_experiment,
    fit_rate,
    run_experiment,
)
from .samplers import (
    Dataset,
    NoiseSpec,
    gen_density_sample,
    gen_regression,
    gen_stationary_gaussian,
)
from .selector import (
    OracleCurves,
    SelectionResult,
    condition_v_fit,
    oracle_curves,
    select_N,
    tau_curve,
)
from .targets import TargetSpec, empirical_gamma_curve, make_W_target, make_Z_target
from .trig_basis import (
    FourierSeries,
    dirichlet_kernel,
    eval_basis,
    fourier_coefficients,
    partial_sum,
    tail_rho,
)

__version__ = "0.1.0"
