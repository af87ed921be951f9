"""Giant-component fluctuations of dynamic rank-one inhomogeneous random graphs.

Deterministic supercritical curves and the limit Gaussian covariance, two
coupled simulators (breadth-first-walk encoding and direct dynamic graph),
samplers for the limit process, and a Monte Carlo harness that checks the
simulators against the theory.
"""

from .graph_oracle import (
    DynamicGraphRealization,
    GiantSnapshot,
    giant_path,
    simulate_dynamic_graph,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_convergence_study,
    run_endpoint_check,
    run_experiment,
    run_fclt,
    run_oracle_compare,
)
from .limit_sampler import (
    LimitPathSample,
    er_brownian_path,
    psi_cov_matrix,
    sample_psi_pair,
    sample_x_path,
)
from .theory import (
    ConvergenceError,
    ErClosedForms,
    LimitCovariance,
    SupercriticalCurves,
    beta,
    er_closed_forms,
    lambda_crit,
    psi_cov,
    rho,
    supercritical_curves,
    theta,
    x_cov,
)
from .walk import (
    ExcursionResult,
    GiantPath,
    WalkRealization,
    all_excursions,
    longest_excursion,
    sample_clocks,
    sweep,
    walk_value,
)
from .weights import (
    AssumptionDiagnostics,
    WeightModel,
    WeightVector,
    assumption_diagnostics,
    mixed_moment,
    phi,
    phi_prime,
    sample_weight_vector,
)

__version__ = "0.1.0"
