"""Single-sideband time-modulated array synthesis with stair-step switching pulses."""

__version__ = "0.1.0"

from .efficiency import (
    EfficiencyReport,
    SeriesConstant,
    a0_constant,
    efficiency_report,
    efficiency_report_numeric,
    polygamma1,
    series_constant,
)
from .harmonics import (
    ArrayConfig,
    Branch,
    CombinedSpectrum,
    ExcitationSet,
    SteeringPlan,
    array_factor,
    composite_offset_field,
    dynamic_excitations,
    element_lines,
    offset_fields,
    ssb_combined_spectrum,
    steering_delays,
    theta_grid,
)
from .optimize import OptimizerConfig, OptimizerResult, anneal, cost
from .patterns import (
    PatternGrid,
    PatternMetrics,
    build_pattern,
    half_power_beamwidth,
    harmonic_peak_levels,
    pattern_metrics,
    scan_sweep,
    side_lobe_level,
)
from .presets import table2_xi, table3_xi
from .pulses import (
    HarmonicIndexSets,
    PulseKind,
    PulseSpec,
    closed_form_coefficient,
    quadrature_coefficient,
    rect_coefficient,
    sample_waveform,
)
from .config import ConfigError, Scenario, parse_config, serialize
from .cli import RunReport, run
