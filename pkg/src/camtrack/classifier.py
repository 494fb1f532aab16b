"""Binary ROI classifier over HSV frames.

A pixel belongs to the target iff all four tests pass against the HSV
means of the previous frame's box: three per-channel absolute-difference
thresholds (hue measured circularly) plus a weighted anti-drift test.
Weights are Q0.8 fixed point so the whole decision is integer-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .imaging import HsvFrame, Rect, write_pbm

WEIGHT_ONE = 256  # Q0.8 unity


@dataclass(frozen=True)
class HsvMean:
    """Per-channel HSV means of the tracked region, rounded to 8 bits."""

    h: int
    s: int
    v: int

    def __post_init__(self):
        for name, value in (("h", self.h), ("s", self.s), ("v", self.v)):
            if not 0 <= value <= 255:
                raise ValueError(f"mean {name}={value} outside [0, 255]")


@dataclass(frozen=True)
class ClassifierParams:
    """Channel thresholds plus Q0.8 weights for the anti-drift test.

    The weights must sum to 1 within one fixed-point ulp after
    quantization. Larger thresholds only ever admit more pixels.
    """

    h_t: int = 16
    s_t: int = 48
    v_t: int = 48
    a_t: int = 32
    alpha: float = 0.5
    beta: float = 0.25
    gamma: float = 0.25

    def __post_init__(self):
        for name in ("h_t", "s_t", "v_t", "a_t"):
            if getattr(self, name) <= 0:
                raise ValueError(f"threshold {name} must be > 0")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("weights must be nonnegative")
        if abs(self.alpha_q + self.beta_q + self.gamma_q - WEIGHT_ONE) > 1:
            raise ValueError(
                f"weights {self.alpha}/{self.beta}/{self.gamma} do not sum "
                f"to 1 within one Q0.8 ulp"
            )

    @property
    def alpha_q(self) -> int:
        return math.floor(self.alpha * WEIGHT_ONE + 0.5)

    @property
    def beta_q(self) -> int:
        return math.floor(self.beta * WEIGHT_ONE + 0.5)

    @property
    def gamma_q(self) -> int:
        return math.floor(self.gamma * WEIGHT_ONE + 0.5)


@dataclass(eq=False)
class BinaryMask:
    """1-bit-per-pixel ROI membership, row major."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.shape != (self.height, self.width):
            raise ValueError(
                f"mask bits shape {arr.shape} != ({self.height}, {self.width})"
            )
        self.bits = arr

    def popcount(self) -> int:
        return int(self.bits.sum())

    def to_pbm(self, path) -> None:
        write_pbm(path, self.bits)


def hue_distance(h1: int, h2: int) -> int:
    """Circular distance on the 256-hue cycle, in [0, 128]."""
    d = abs(h1 - h2) % 256
    return min(d, 256 - d)


def classify_pixel(pixel, mean: HsvMean, params: ClassifierParams) -> int:
    """Classify one HSV triple; returns 1 for ROI, 0 otherwise.

    All four tests use strict inequalities: a distance exactly at its
    threshold rejects the pixel.
    """
    h, s, v = pixel
    dh = hue_distance(h, mean.h)
    ds = abs(s - mean.s)
    dv = abs(v - mean.v)
    if dh >= params.h_t or ds >= params.s_t or dv >= params.v_t:
        return 0
    weighted = params.alpha_q * dh + params.beta_q * ds + params.gamma_q * dv
    return 1 if weighted < params.a_t * WEIGHT_ONE else 0


def classify_frame(frame: HsvFrame, mean: HsvMean, params: ClassifierParams) -> BinaryMask:
    """Vectorized whole-frame classification.

    Bit-exactly equal to applying classify_pixel at every pixel; the
    vectorization is an implementation detail.
    """
    hsv = frame.data.astype(np.int32)
    dh = np.abs(hsv[:, :, 0] - mean.h)
    np.minimum(dh, 256 - dh, out=dh)
    ds = np.abs(hsv[:, :, 1] - mean.s)
    dv = np.abs(hsv[:, :, 2] - mean.v)
    ok = (dh < params.h_t) & (ds < params.s_t) & (dv < params.v_t)
    weighted = params.alpha_q * dh + params.beta_q * ds + params.gamma_q * dv
    ok &= weighted < params.a_t * WEIGHT_ONE
    return BinaryMask(frame.width, frame.height, ok)


def compute_hsv_mean(
    frame: HsvFrame, box: Rect, mask: Optional[BinaryMask] = None
) -> HsvMean:
    """Arithmetic per-channel mean over box ∩ frame, rounded half up.

    By default every pixel in the box contributes. When a mask is given,
    only classified pixels are averaged (falling back to all box pixels
    if none are set). Hue is averaged arithmetically, so means near the
    0/255 seam carry the usual wraparound bias.
    """
    clipped = box.clamp_to(frame.width, frame.height)
    region = frame.data[clipped.y : clipped.bottom, clipped.x : clipped.right]
    pixels = region.reshape(-1, 3)
    if mask is not None:
        selected = mask.bits[
            clipped.y : clipped.bottom, clipped.x : clipped.right
        ].reshape(-1)
        if selected.any():
            pixels = pixels[selected]
    sums = pixels.sum(axis=0, dtype=np.int64)
    n = pixels.shape[0]
    h, s, v = ((2 * sums + n) // (2 * n)).tolist()
    return HsvMean(int(h), int(s), int(v))
