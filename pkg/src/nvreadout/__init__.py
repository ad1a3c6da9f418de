"""Rate-equation simulation and online laser-waveform optimization for
NV-center spin readout."""

from .errors import (
    ConfigurationError,
    DegenerateModelError,
    FitError,
    NumericError,
    NVReadoutError,
    ObjectiveError,
    ParameterError,
    UndefinedMetricError,
)
from .harness import (
    OloResult,
    OloSpec,
    SweepResult,
    SweepSpec,
    default_sweep_spec,
    make_snr_objective,
    run_olo,
    run_sweep,
)
from .metrics import SinusoidFit, contrast, fit_sinusoid, mean_deviation, snr
from .optimizer import (
    OptimizerConfig,
    OptimizerState,
    QueryRecord,
    exploratory_move,
    hj_optimize,
    pattern_move,
)
from .photophysics import (
    AmplitudeMap,
    Level,
    RateParams,
    build_rate_matrix,
    emission_rate,
    propagate,
    pure_state,
    steady_state,
    thermal_ground_state,
)
from .pumpsim import (
    PumpTrace,
    SequenceConfig,
    pair_window_counts,
    prepared_states,
    propagate_waveform,
    sample_counts,
    simulate_pair,
    simulate_pump,
    window_counts,
    window_expectation,
)
from .rabi import (
    RabiConfig,
    RabiCurve,
    SchemeComparison,
    compare_schemes,
    rabi_expectations,
    simulate_rabi,
)
from .waveform import AmplitudeBounds, PiecewiseWaveform, make_constant, rates_of

__version__ = "0.1.0"
