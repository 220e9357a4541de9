"""sonobeam: 3D underwater acoustic imaging toolkit.

Quadrant-based orthogonal-L product beamforming with conventional
delay-and-sum and a frequency-domain direct method as baselines, plus
synthetic scene generation, PSF/resolution analysis, operation-count
calculators, display post-processing, binary file formats, and a CLI.
"""

from .errors import (
    ConfigError,
    DegenerateClusteringError,
    DegeneratePulseError,
    FarFieldViolationWarning,
    FileFormatError,
    InvalidArgumentError,
    InvalidDirectionError,
    InvalidGeometryError,
    InvalidGridError,
    NumericDomainError,
    OutOfRecordError,
    SamplingRateError,
    SonobeamError,
    SpanTooNarrowError,
    TruncatedPayloadError,
    TruncationError,
    UndefinedRatioError,
    UnsupportedMethodError,
)
from .geometry import (
    ArrayGeometry,
    ArrayKind,
    ImagingGrid,
    QuadrantId,
    SensorElement,
    build_array,
    build_imaging_grid,
    delay_farfield,
    delay_nearfield,
    farfield_valid,
    quadrant_of,
    steering_unit_vector,
)
from .signal import (
    ChannelData,
    Pulse,
    PulseWindow,
    Scatterer,
    mainlobe_gate,
    make_pulse,
    matched_filter,
    pulse_bandwidth,
    spreading_gain,
    synth_channel_data,
    tgc,
)
from .beamform import (
    BeamSignal,
    BeamVolume,
    FocusMode,
    Method,
    Weights,
    das_beam,
    das_volume,
    dm_volume,
    product_beamform,
    sample_at_range,
    signed_sqrt,
)
from .complexity import (
    OpCountReport,
    OpMethod,
    TimingReport,
    benchmark,
    best_fit_block_length,
    opcount_czt,
    opcount_das,
    opcount_dm,
    opcount_proposed,
)
from .analysis import (
    AmbiguityReport,
    AngularResolution,
    BeamPattern,
    CutAxis,
    PSFMetrics,
    ambiguity_probe,
    along_track_resolution,
    angular_resolution,
    mlw,
    psf_cut,
    psf_metrics,
    psll,
    quadrant_leakage,
    range_resolution,
    range_resolution_pulse_echo,
    resolvable,
)
from .postproc import (
    CartesianVolume,
    SegmentedVolume,
    default_cartesian_spec,
    kmeans_segment,
    project_max,
    scan_convert,
    to_db_image,
)
from .io_formats import (
    read_cartesian,
    read_channel_data,
    read_mask,
    read_pgm,
    read_volume,
    write_cartesian,
    write_channel_data,
    write_mask,
    write_pgm,
    write_volume,
)
from .config import RunConfig
from .cli import cli_dispatch

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
