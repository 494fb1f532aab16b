"""Per-frame tracking loop: classify, converge, arbitrate, update.

Each frame the mask is classified against the model means, meanshift
converges from the predicted center, and the candidate box is accepted
only if its area stays within the configured ratio band of the previous
box. Otherwise the tracker holds the last size and coasts on the
constant-velocity prediction until the target is reacquired.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import kalman as kf
from .classifier import (
    BinaryMask,
    ClassifierParams,
    HsvMean,
    classify_frame,
    compute_hsv_mean,
)
from .errors import EmptyRegionError, MalformedFrameError
from .imaging import HsvFrame, Rect, Sequence, rgb_to_hsv
from .moments import MomentsParams, Moments, WeightKernel, centroid_and_size, parallel_moments

CAMSHIFT = "CAMSHIFT"
KALMAN = "KALMAN"

START_MODES = ("kalman", "prev")


@dataclass(frozen=True)
class TrackerConfig:
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    kalman: kf.KalmanParams = field(default_factory=kf.KalmanParams)
    moments: MomentsParams = field(default_factory=MomentsParams)
    max_iters: int = 10
    converge_eps: float = 1.0
    size_ratio_t: float = 1.5
    workers: int = 1
    search_margin: float = 1.5
    start_from: str = "kalman"  # or "prev": previous box center
    mean_over_mask: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.converge_eps <= 0:
            raise ValueError("converge_eps must be > 0")
        if self.size_ratio_t <= 1:
            raise ValueError("size_ratio_t must be > 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.search_margin < 1:
            raise ValueError("search_margin must be >= 1")
        if self.start_from not in START_MODES:
            raise ValueError(f"start_from must be one of {START_MODES}")


@dataclass(eq=False)
class TrackerState:
    box: Rect
    hsv_mean: HsvMean
    kalman: kf.KalmanState
    mode: str
    frame_index: int
    config: TrackerConfig
    frame_width: int
    frame_height: int


@dataclass(frozen=True)
class TrackOutput:
    """One tracked frame: accepted box, mode, and diagnostics."""

    box: Rect
    mode: str
    centroid: tuple[float, float]
    iterations: int
    m00: int

    def line(self, frame_index: int) -> str:
        return (
            f"{frame_index},{self.box.x},{self.box.y},{self.box.w},"
            f"{self.box.h},{self.mode},{self.iterations}"
        )


@dataclass(frozen=True)
class MeanshiftResult:
    window: Rect
    centroid: tuple[float, float]
    iterations: int
    moments: Moments


def init(frame: HsvFrame, init_box: Rect, config: TrackerConfig) -> TrackerState:
    """Build tracker state from the first frame's box.

    A box partially outside the frame is clamped; one fully outside
    raises EmptyRegionError.
    """
    box = init_box.clamp_to(frame.width, frame.height)
    return TrackerState(
        box=box,
        hsv_mean=compute_hsv_mean(frame, box),
        kalman=kf.init_state(box, config.kalman),
        mode=CAMSHIFT,
        frame_index=0,
        config=config,
        frame_width=frame.width,
        frame_height=frame.height,
    )


def meanshift_converge(
    mask: BinaryMask,
    start: Rect,
    kernel_center: tuple[float, float],
    config: TrackerConfig,
) -> Optional[MeanshiftResult]:
    """Relocate the window onto the mask centroid until it settles.

    The window keeps its size while it moves; the kernel is re-anchored
    at the previous iteration's centroid. Returns None when the very
    first moment evaluation finds no mass.
    """
    window = start.clamp_to(mask.width, mask.height)
    radius = config.moments.radius_factor * math.hypot(window.w, window.h)
    center = (float(kernel_center[0]), float(kernel_center[1]))
    centroid: Optional[tuple[float, float]] = None
    moments: Optional[Moments] = None
    iterations = 0
    while iterations < config.max_iters:
        kernel = WeightKernel(center[0], center[1], radius, config.moments.kernel)
        try:
            m = parallel_moments(mask, window, kernel, config.workers)
        except EmptyRegionError:
            break  # window drifted off the mask; keep the previous fix
        iterations += 1
        if m.m00 == 0:
            if centroid is None:
                return None
            break
        moments = m
        new_centroid = (m.m10 / m.m00, m.m01 / m.m00)
        shift = math.hypot(new_centroid[0] - center[0], new_centroid[1] - center[1])
        centroid = new_centroid
        center = new_centroid
        window = Rect.from_center(new_centroid[0], new_centroid[1], window.w, window.h)
        if shift < config.converge_eps:
            break
    if moments is None or centroid is None:
        return None
    return MeanshiftResult(
        window=window.move_inside(mask.width, mask.height),
        centroid=centroid,
        iterations=iterations,
        moments=moments,
    )


def _round_size(value: float) -> int:
    return max(1, math.floor(value + 0.5))


def track_frame(state: TrackerState, frame: HsvFrame) -> tuple[TrackerState, TrackOutput]:
    """Advance the tracker by one frame; returns (new state, output)."""
    cfg = state.config
    if (frame.width, frame.height) != (state.frame_width, state.frame_height):
        raise MalformedFrameError(
            f"frame is {frame.width}x{frame.height}, tracker was initialized "
            f"for {state.frame_width}x{state.frame_height}"
        )

    mask = classify_frame(frame, state.hsv_mean, cfg.classifier)
    predicted = kf.predict(state.kalman, cfg.kalman)
    if cfg.start_from == "kalman":
        start_center = predicted.position
    else:
        start_center = state.box.center

    search = Rect.from_center(
        start_center[0],
        start_center[1],
        _round_size(cfg.search_margin * state.box.w),
        _round_size(cfg.search_margin * state.box.h),
    )
    try:
        result = meanshift_converge(mask, search, start_center, cfg)
    except EmptyRegionError:
        result = None

    candidate = None
    if result is not None:
        candidate = centroid_and_size(
            result.moments, state.box, cal=cfg.moments.size_cal
        )

    accepted = False
    if candidate is not None:
        (ccx, ccy), (cw, ch) = candidate
        ratio = (cw * ch) / state.box.area
        accepted = 1.0 / cfg.size_ratio_t <= ratio <= cfg.size_ratio_t

    if accepted:
        mode = CAMSHIFT
        box = Rect.from_center(ccx, ccy, cw, ch).move_inside(
            state.frame_width, state.frame_height
        )
        new_kalman = kf.correct(predicted, (ccx, ccy), cfg.kalman)
        new_mean = compute_hsv_mean(
            frame, box, mask=mask if cfg.mean_over_mask else None
        )
        centroid = (ccx, ccy)
        iterations = result.iterations
        m00 = result.moments.m00
    else:
        # Lost target or implausible size jump: hold the previous size
        # and coast on the prediction; no measurement, no model update.
        mode = KALMAN
        box = Rect.from_center(
            predicted.x, predicted.y, state.box.w, state.box.h
        ).move_inside(state.frame_width, state.frame_height)
        new_kalman = predicted
        new_mean = state.hsv_mean
        centroid = predicted.position
        iterations = result.iterations if result is not None else 0
        m00 = result.moments.m00 if result is not None else 0

    new_state = TrackerState(
        box=box,
        hsv_mean=new_mean,
        kalman=new_kalman,
        mode=mode,
        frame_index=state.frame_index + 1,
        config=cfg,
        frame_width=state.frame_width,
        frame_height=state.frame_height,
    )
    output = TrackOutput(
        box=box, mode=mode, centroid=centroid, iterations=iterations, m00=m00
    )
    return new_state, output


@dataclass(eq=False)
class TrackRun:
    """Whole-sequence result: one output per frame plus timing."""

    outputs: list[TrackOutput]
    state: TrackerState
    track_seconds: float


def track_sequence(
    sequence: Sequence,
    init_box: Rect,
    config: TrackerConfig,
    mask_dir=None,
) -> TrackRun:
    """Track a sequence from its first frame.

    Frame 0 reports the (clamped) init box. track_seconds accumulates
    wall time spent inside track_frame only, excluding decode and color
    conversion. mask_dir, when set, dumps each frame's classification
    mask as a PBM file for debugging.
    """
    if mask_dir is not None:
        mask_dir = Path(mask_dir)
        mask_dir.mkdir(parents=True, exist_ok=True)

    hsv = rgb_to_hsv(sequence.load_rgb(0))
    state = init(hsv, init_box, config)
    outputs = [
        TrackOutput(
            box=state.box, mode=state.mode, centroid=state.box.center,
            iterations=0, m00=0,
        )
    ]
    track_seconds = 0.0
    for index in range(1, len(sequence)):
        hsv = rgb_to_hsv(sequence.load_rgb(index))
        began = time.perf_counter()
        state, output = track_frame(state, hsv)
        track_seconds += time.perf_counter() - began
        outputs.append(output)
        if mask_dir is not None:
            mask = classify_frame(hsv, state.hsv_mean, config.classifier)
            mask.to_pbm(mask_dir / f"mask{index:05d}.pbm")
    return TrackRun(outputs=outputs, state=state, track_seconds=track_seconds)
