"""Zeno and anti-Zeno dynamics of a two-level atom in a broadband squeezed vacuum."""

from .analytic import (
    DecayRates,
    FieldFluctuations,
    critical_phase_antizeno,
    critical_phase_zeno,
    decay_rates,
    field_fluctuations,
    free_solution,
    measured_rate,
    measured_solution,
    p_plus_continuous,
    p_plus_single,
    steady_state,
)
from .dynamics import (
    InvariantViolation,
    TimeGrid,
    Trajectory,
    bloch_rhs_free,
    bloch_rhs_indirect,
    bloch_rhs_projective,
    collapse_bloch,
    fit_decay_rate,
    integrate,
    lindblad_rhs,
    projective_collapse,
    propagate_affine,
)
from .measurement import (
    McConfig,
    SurvivalEstimate,
    repeated_measurement_evolution,
    sequential_survival,
    stochastic_survival,
    stochastic_survival_curve,
)
from .states import (
    BlochState,
    SqueezedBathParams,
    StateError,
    bloch_state,
    bloch_to_density,
    density_to_bloch,
    make_params,
)

__version__ = "0.1.0"
