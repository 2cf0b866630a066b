"""Ask-tell Bayesian optimization for expensive experimental campaigns.

The campaign layer is the main entry point: ``init_campaign`` builds a
frozen state around a design space, ``ask`` suggests the next batch of
settings, ``tell`` records measured outcomes, and ``recommend`` names the
best observed design.  The pieces underneath (Gaussian-process models,
acquisition functions, batch construction, preference learning) are
importable on their own for custom loops.
"""

from .campaign import (
    CampaignState,
    QuadraticOracle,
    Recommendation,
    ask,
    best_observed,
    fit_quadratic_oracle,
    init_campaign,
    pareto_indices,
    recommend,
    run_closed_loop,
    tell,
)
from .data import ConstraintSpec, Dataset, ObjectiveSpec
from .errors import (
    ArgumentError,
    BoatError,
    ConvergenceError,
    InsufficientDataError,
    MigrationError,
    NumericalError,
    OptimizationError,
    ParseError,
    RevisionConflictError,
    SchemaError,
    ValidationError,
)
from .gp import FitConfig, GaussianProcess, KernelParams
from .acquisition import (
    AcquisitionSpec,
    expected_improvement,
    pareto_mask,
    probability_of_feasibility,
    q_expected_improvement,
    upper_confidence_bound,
)
from .optimize import OptBudget, maximize_acquisition, suggest_batch
from .preference import PreferenceGP, build_preferences, suggest_preferential
from .space import DesignSpace, Variable
from .storage import (
    CsvSchema,
    load_campaign_file,
    load_csv,
    save_campaign_file,
    save_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionSpec",
    "ArgumentError",
    "BoatError",
    "CampaignState",
    "ConstraintSpec",
    "ConvergenceError",
    "CsvSchema",
    "Dataset",
    "DesignSpace",
    "FitConfig",
    "GaussianProcess",
    "InsufficientDataError",
    "KernelParams",
    "MigrationError",
    "NumericalError",
    "ObjectiveSpec",
    "OptBudget",
    "OptimizationError",
    "ParseError",
    "PreferenceGP",
    "QuadraticOracle",
    "Recommendation",
    "RevisionConflictError",
    "SchemaError",
    "ValidationError",
    "Variable",
    "ask",
    "best_observed",
    "build_preferences",
    "expected_improvement",
    "fit_quadratic_oracle",
    "init_campaign",
    "load_campaign_file",
    "load_csv",
    "maximize_acquisition",
    "pareto_indices",
    "pareto_mask",
    "probability_of_feasibility",
    "q_expected_improvement",
    "recommend",
    "save_campaign_file",
    "save_csv",
    "suggest_batch",
    "suggest_preferential",
    "tell",
    "upper_confidence_bound",
    "__version__",
]
