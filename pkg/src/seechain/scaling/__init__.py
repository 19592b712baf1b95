from .collapse import CollapseError, CollapseResult, collapse_quality, fss_collapse, master_curve
from .fits import (
    Backend,
    FitError,
    FitResult,
    SeeSample,
    chord_distance,
    extrapolate_s0,
    fit_linear_s0,
    fit_power_law,
    fit_windows,
    intercept_stderr,
    sliding_windows,
)
from .reference import (
    Phase,
    PhaseLabel,
    classify_phase,
    luttinger_k,
    reference_g_values,
)
