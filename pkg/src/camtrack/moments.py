"""Kernel-weighted spatial moments over binary masks.

The zeroth and first moments are accumulated in integer arithmetic with
Q8.8 weights (unity = 256), so serial and parallel evaluation orders
produce identical bits. The parallel path stripes the window across
workers and combines partials with a balanced tree reduction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classifier import BinaryMask
from .imaging import Rect

WEIGHT_ONE = 256  # Q8.8 unity

KERNEL_KINDS = ("linear", "epanechnikov")


@dataclass(frozen=True)
class Moments:
    """Zeroth/first moment accumulators in weight units."""

    m00: int
    m10: int
    m01: int

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(self.m00 + other.m00, self.m10 + other.m10, self.m01 + other.m01)


@dataclass(frozen=True)
class WeightKernel:
    """Radial kernel anchored at the previous frame's centroid.

    Weight falls from 256 at the center to 0 at distance `radius`;
    linearly by default, quadratically for "epanechnikov". An infinite
    radius degenerates to a uniform weight of 256 everywhere.
    """

    cx: float
    cy: float
    radius: float
    kind: str = "linear"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"kernel radius must be > 0, got {self.radius}")
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")


@dataclass(frozen=True)
class MomentsParams:
    """Tunables for kernel construction and window sizing."""

    kernel: str = "linear"
    radius_factor: float = 0.5  # of the search-window diagonal
    size_cal: float = 1.2

    def __post_init__(self):
        if self.kernel not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kernel!r}")
        if self.radius_factor <= 0 or self.size_cal <= 0:
            raise ValueError("radius_factor and size_cal must be > 0")


def kernel_weight(p, kernel: WeightKernel) -> int:
    """Q8.8 weight of pixel coordinate p = (x, y) under the kernel."""
    dx = p[0] - kernel.cx
    dy = p[1] - kernel.cy
    u = math.sqrt(dx * dx + dy * dy) / kernel.radius
    f = 1.0 - u if kernel.kind == "linear" else 1.0 - u * u
    if f <= 0.0:
        return 0
    return math.floor(WEIGHT_ONE * f + 0.5)


def _weight_grid(window: Rect, kernel: WeightKernel) -> np.ndarray:
    """Integer weights for every pixel of the window, shape (h, w).

    Elementwise identical to kernel_weight so striped evaluation cannot
    change a single bit.
    """
    xs = np.arange(window.x, window.right, dtype=np.float64) - kernel.cx
    ys = np.arange(window.y, window.bottom, dtype=np.float64) - kernel.cy
    u = np.sqrt(xs[None, :] * xs[None, :] + ys[:, None] * ys[:, None]) / kernel.radius
    f = 1.0 - u if kernel.kind == "linear" else 1.0 - u * u
    np.maximum(f, 0.0, out=f)
    return np.floor(WEIGHT_ONE * f + 0.5).astype(np.int64)


def _window_moments(mask: BinaryMask, window: Rect, kernel: WeightKernel) -> Moments:
    """Moments over an already-clamped window; absolute coordinates."""
    sub = mask.bits[window.y : window.bottom, window.x : window.right]
    weighted = _weight_grid(window, kernel) * sub
    xs = np.arange(window.x, window.right, dtype=np.int64)
    ys = np.arange(window.y, window.bottom, dtype=np.int64)
    m00 = int(weighted.sum(dtype=np.int64))
    m10 = int(weighted.sum(axis=0, dtype=np.int64) @ xs)
    m01 = int(weighted.sum(axis=1, dtype=np.int64) @ ys)
    return Moments(m00, m10, m01)


def weighted_moments(mask: BinaryMask, window: Rect, kernel: WeightKernel) -> Moments:
    """Serial reference: m00 = Σ w·I, m10 = Σ x·w·I, m01 = Σ y·w·I.

    The window is clamped to the mask; a zero-area result raises
    EmptyRegionError. Safe from overflow up to 4096x4096 frames.
    """
    return _window_moments(mask, window.clamp_to(mask.width, mask.height), kernel)


def _tree_reduce(parts: list[Moments]) -> Moments:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def parallel_moments(
    mask: BinaryMask, window: Rect, kernel: WeightKernel, workers: int = 1
) -> Moments:
    """Stripe the window across workers and tree-combine the partials.

    Bit-exactly equal to weighted_moments for every worker count:
    integer addition is associative, and the reduction order is fixed
    by stripe index.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    clamped = window.clamp_to(mask.width, mask.height)
    n = min(workers, clamped.h)
    if n == 1:
        return _window_moments(mask, clamped, kernel)
    bounds = np.linspace(0, clamped.h, n + 1, dtype=int)
    stripes = [
        Rect(clamped.x, clamped.y + int(y0), clamped.w, int(y1 - y0))
        for y0, y1 in zip(bounds[:-1], bounds[1:])
        if y1 > y0
    ]
    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(lambda s: _window_moments(mask, s, kernel), stripes))
    return _tree_reduce(parts)


def centroid_and_size(
    m: Moments,
    prev: Rect,
    cal: float = 1.2,
    aspect: Optional[float] = None,
) -> Optional[tuple[tuple[float, float], tuple[int, int]]]:
    """Centroid plus adapted window size from the moments.

    Returns ((cx, cy), (w, h)), or None when m00 is zero (lost target;
    the caller falls back to the motion predictor). The size follows
    w = round(cal * sqrt(A*r)), h = round(cal * sqrt(A/r)) with
    A = m00/256 and r the previous box aspect, both clamped to >= 4 px.
    """
    if m.m00 == 0:
        return None
    cx = m.m10 / m.m00
    cy = m.m01 / m.m00
    area = m.m00 / WEIGHT_ONE
    r = aspect if aspect is not None else prev.w / prev.h
    w = max(4, math.floor(cal * math.sqrt(area * r) + 0.5))
    h = max(4, math.floor(cal * math.sqrt(area / r) + 0.5))
    return (cx, cy), (w, h)
