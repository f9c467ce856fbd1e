"""Population-dynamics models, stability theory and optimal control for
invasive-species eradication strategies.

Seven deterministic models are covered: the classical Trojan-Y supermale
introduction (TYC) and six harvesting/stocking variants (linear,
saturating and power-law rates, each in a female-harvest/male-stock and a
both-sex-harvest flavor). The package provides the ODE right-hand sides,
closed-form equilibrium enumeration with Routh-Hurwitz classification,
Lyapunov global-extinction thresholds, fixed-step RK4 integration,
Pontryagin forward-backward-sweep optimal control, least-squares
calibration of the life-history parameters, and comparison reports,
all behind an `eradopt` command-line front end.
"""

from .errors import (
    BlowUpError,
    DegenerateError,
    EradoptError,
    FitDivergedError,
    GridMismatchError,
    NegativeStateError,
    ParameterError,
    SingularDerivativeError,
    UnsupportedModelError,
)
from .params import (
    ALL_MODELS,
    FITTED_PARAMS,
    HARVEST_MODELS,
    LifeParams,
    ModelId,
    ModelSpec,
    State,
    check_compatible,
)
from .models import logistic_factor, make_rhs, make_adjoint_rhs, rhs
from .equilibria import (
    Classification,
    CubicCoefficients,
    EquilibriumReport,
    RootCount,
    ThresholdSet,
    classify_positive_roots,
    equilibria_report,
    fhms_equilibria,
    tyc_cubic,
    tyc_equilibria,
    tyc_mu0_equilibria,
)
from .stability import (
    CharPoly,
    ExtinctionCondition,
    StabilityVerdict,
    Verdict,
    boundary_eigenvalues,
    boundary_char_poly,
    boundary_verdict,
    char_poly,
    classify_point,
    global_extinction_condition,
    jacobian,
    routh_hurwitz,
)
from .integrate import (
    AdjointTrajectory,
    ControlSchedule,
    TimeGrid,
    Trajectory,
    integrate_adjoint_backward,
    integrate_forward,
    trajectory_to_csv,
)
from .control import (
    SweepConfig,
    SweepResult,
    forward_backward_sweep,
    objective_value,
    optimality_residual,
    perturbation_check,
    project_control,
)
from .calibrate import (
    FitResult,
    ObservationSeries,
    fit_life_params,
    synthesize_observations,
)
from .metrics import (
    Comparison,
    StrategyReport,
    compare_strategies,
    eradication_time,
    render_table,
)

__version__ = "0.1.0"
