"""camtrack: hardware-friendly single-object tracking toolkit.

Binary HSV classification, kernel-weighted moments with a bit-exact
parallel reduction, dual-mode Camshift/Kalman tracking, an OTB-style
benchmark harness, and a discrete-event model of the three-stage
frame-buffer pipeline.
"""

__version__ = "0.1.0"

from .bench import (
    BenchReport,
    Curve,
    emit_report,
    iou,
    load_ground_truth,
    precision_curve,
    run_benchmark,
    success_curve,
)
from .classifier import (
    BinaryMask,
    ClassifierParams,
    HsvMean,
    classify_frame,
    classify_pixel,
    compute_hsv_mean,
    hue_distance,
)
from .config import AppConfig, load_config
from .errors import (
    ConfigError,
    EmptyRegionError,
    MalformedFrameError,
    SequenceError,
    TrackError,
)
from .imaging import (
    HsvFrame,
    Rect,
    RgbFrame,
    Sequence,
    Ycbcr422Frame,
    load_sequence,
    rgb_to_hsv,
    ycbcr422_to_rgb,
)
from .kalman import KalmanParams, KalmanState, correct, init_state, predict
from .moments import (
    Moments,
    MomentsParams,
    WeightKernel,
    centroid_and_size,
    kernel_weight,
    parallel_moments,
    weighted_moments,
)
from .pipeline_sim import Channel, FrameEvent, SimConfig, SimReport, aggregate_bandwidth, simulate
from .tracker import (
    CAMSHIFT,
    KALMAN,
    TrackerConfig,
    TrackerState,
    TrackOutput,
    TrackRun,
    init,
    meanshift_converge,
    track_frame,
    track_sequence,
)

__all__ = [
    "__version__",
    "AppConfig",
    "BenchReport",
    "BinaryMask",
    "CAMSHIFT",
    "Channel",
    "ClassifierParams",
    "ConfigError",
    "Curve",
    "EmptyRegionError",
    "FrameEvent",
    "HsvFrame",
    "HsvMean",
    "KALMAN",
    "KalmanParams",
    "KalmanState",
    "MalformedFrameError",
    "Moments",
    "MomentsParams",
    "Rect",
    "RgbFrame",
    "Sequence",
    "SequenceError",
    "SimConfig",
    "SimReport",
    "TrackError",
    "TrackOutput",
    "TrackRun",
    "TrackerConfig",
    "TrackerState",
    "WeightKernel",
    "Ycbcr422Frame",
    "aggregate_bandwidth",
    "centroid_and_size",
    "classify_frame",
    "classify_pixel",
    "compute_hsv_mean",
    "correct",
    "emit_report",
    "hue_distance",
    "init",
    "init_state",
    "iou",
    "kernel_weight",
    "load_config",
    "load_ground_truth",
    "load_sequence",
    "meanshift_converge",
    "parallel_moments",
    "precision_curve",
    "predict",
    "rgb_to_hsv",
    "run_benchmark",
    "simulate",
    "success_curve",
    "track_frame",
    "track_sequence",
    "weighted_moments",
    "ycbcr422_to_rgb",
]
