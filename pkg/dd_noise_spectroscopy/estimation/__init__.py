from .reconstruction import (
    FIT_FAMILIES,
    PointEstimate,
    ReconstructionResult,
    SpectrumFitError,
    fit_objective,
    fit_spectrum,
    pointwise_reconstruct,
)
from .scan import (
    FrequencyBoundsError,
    FrequencyRange,
    ScanEntry,
    ScanReport,
    T2Scan,
    frequency_bounds,
    measure_t2l,
    pulse_schedule,
    run_t2_scan,
    synthetic_scan,
)
from .t2_fit import (
    T2Estimate,
    T2FitRejected,
    WindowPolicy,
    fit_t2,
    measure_t2se,
    t2se_to_s0,
)

__all__ = [
    "FIT_FAMILIES",
    "FrequencyBoundsError",
    "FrequencyRange",
    "PointEstimate",
    "ReconstructionResult",
    "ScanEntry",
    "ScanReport",
    "SpectrumFitError",
    "T2Estimate",
    "T2FitRejected",
    "T2Scan",
    "WindowPolicy",
    "fit_objective",
    "fit_spectrum",
    "fit_t2",
    "frequency_bounds",
    "measure_t2l",
    "measure_t2se",
    "pointwise_reconstruct",
    "pulse_schedule",
    "run_t2_scan",
    "synthetic_scan",
    "t2se_to_s0",
]
