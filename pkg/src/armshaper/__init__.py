"""Input shaping for a flexible two-joint arm.

Identify vibration modes from tip-acceleration traces, map their
frequencies over joint space, derive two-impulse shaper parameters per
target pose, shape command trajectories, and check the residual
reduction against a simulated flexible plant.
"""

from ._backend import BACKEND as kernel_backend
from .errors import (
    ArmshaperError,
    ConfigurationError,
    EstimationError,
    GridError,
    InsufficientDataError,
    NoModesFoundError,
    OutOfDomainError,
    ParameterError,
    ReductionUndefinedError,
)
from .fmap import (
    EXTRAPOLATION_FLOOR_HZ,
    FrequencyMap,
    build_map,
    extrapolate,
    interpolate,
    interpolate_k0,
    shaper_params_at,
)
from .ident import (
    AccelTrace,
    FrequencySpectrum,
    ModePeak,
    estimate_k0,
    extract_peaks,
    identify_modes,
    residual_segment,
    spectrum,
)
from .shaper import (
    ImpulseSequence,
    ShaperParams,
    Trajectory,
    apply,
    cascade,
    frequency_response,
    k0_from_damping_ratio,
    total_delay,
    zv_from_params,
)
from .sim import (
    AffineFrequency,
    MapFrequency,
    ModeSpec,
    ReductionReport,
    SimConfig,
    SimResult,
    default_sim_config,
    reduction_report,
    residual_amplitude,
    simulate,
    step_trajectory,
    synth_campaign,
)

__version__ = "0.1.0"

__all__ = [
    "AccelTrace",
    "AffineFrequency",
    "ArmshaperError",
    "ConfigurationError",
    "EstimationError",
    "EXTRAPOLATION_FLOOR_HZ",
    "FrequencyMap",
    "FrequencySpectrum",
    "GridError",
    "ImpulseSequence",
    "InsufficientDataError",
    "MapFrequency",
    "ModePeak",
    "ModeSpec",
    "NoModesFoundError",
    "OutOfDomainError",
    "ParameterError",
    "ReductionReport",
    "ReductionUndefinedError",
    "ShaperParams",
    "SimConfig",
    "SimResult",
    "Trajectory",
    "apply",
    "build_map",
    "cascade",
    "default_sim_config",
    "estimate_k0",
    "extract_peaks",
    "extrapolate",
    "frequency_response",
    "identify_modes",
    "interpolate",
    "interpolate_k0",
    "k0_from_damping_ratio",
    "kernel_backend",
    "reduction_report",
    "residual_amplitude",
    "residual_segment",
    "shaper_params_at",
    "simulate",
    "spectrum",
    "step_trajectory",
    "synth_campaign",
    "total_delay",
    "zv_from_params",
    "__version__",
]
