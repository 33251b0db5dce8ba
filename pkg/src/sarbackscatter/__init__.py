"""Passive backscatter communication through spaceborne SAR sublooks.

Closed-form link budget, raw echo simulation, range compression and
backprojection into sublooks, and on-off keyed demodulation of a
modulating corner reflector.
"""

from .demod import (
    LinkReport,
    MeasurementWindows,
    PixelWindow,
    ScrSeries,
    build_link_report,
    decide_bits,
    default_windows,
    empirical_ber,
    measure_coherent,
    measure_scr,
)
from .estimators import OOKDemodulator, RangeCompressor, SublookImager
from .exceptions import (
    AliasingError,
    ConfigError,
    DomainError,
    FormatError,
    NoModulationDetected,
    PlanError,
    SarError,
)
from .link_budget import (
    ImagingGeometry,
    RadarParams,
    ReflectorGeometry,
    SublookPlan,
    azimuth_resolution,
    coherent_sample_counts,
    ground_range_resolution,
    image_snr,
    max_bit_rate,
    max_throughput,
    ook_ber,
    ook_ber_sublook,
    q_function,
    rcs_max,
    scr,
    single_pulse_snr,
    sublook_plan,
)
from .processor import GridSpec, RangeCompressed, SublookStack, backproject, make_sublooks, range_compress
from .scene import (
    ClutterSpec,
    ModulationSchedule,
    PointTarget,
    RawEchoSet,
    SceneSpec,
    aligned_bit_schedule,
    dwell_time,
    synthesize,
)

__version__ = "0.1.0"
