"""Constant-velocity Kalman predictor over the box center.

State is [x, y, vx, vy] with dt = 1 frame and position-only
measurements. The covariance update uses the Joseph form so it stays
symmetric positive semidefinite under floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import Rect

# x_new = x + vx, y_new = y + vy; velocities persist.
_F = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

# Only the center position is measured.
_H = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class KalmanParams:
    """Process noise q (zero allowed for a rigid motion model),
    measurement noise r, initial variance p0."""

    q: float = 0.01
    r: float = 1.0
    p0: float = 10.0

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("kalman parameter q must be >= 0")
        for name in ("r", "p0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"kalman parameter {name} must be > 0")


@dataclass(eq=False)
class KalmanState:
    """Estimated center position/velocity plus covariance."""

    vec: np.ndarray  # [x, y, vx, vy]
    cov: np.ndarray  # 4x4

    @property
    def x(self) -> float:
        return float(self.vec[0])

    @property
    def y(self) -> float:
        return float(self.vec[1])

    @property
    def vx(self) -> float:
        return float(self.vec[2])

    @property
    def vy(self) -> float:
        return float(self.vec[3])

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def _process_noise(q: float) -> np.ndarray:
    """White-acceleration noise for dt = 1: var = q on velocity, q/4 on
    position, q/2 cross terms, per axis."""
    noise = np.zeros((4, 4))
    for i in (0, 1):
        noise[i, i] = q / 4.0
        noise[i, i + 2] = noise[i + 2, i] = q / 2.0
        noise[i + 2, i + 2] = q
    return noise


def init_state(box: Rect, params: KalmanParams) -> KalmanState:
    """Start at the box center with zero velocity and p0·I covariance."""
    cx, cy = box.center
    return KalmanState(
        vec=np.array([cx, cy, 0.0, 0.0]),
        cov=params.p0 * np.eye(4),
    )


def predict(state: KalmanState, params: KalmanParams) -> KalmanState:
    """Advance one frame: x <- F x, P <- F P Fᵀ + Q."""
    vec = _F @ state.vec
    cov = _F @ state.cov @ _F.T + _process_noise(params.q)
    return KalmanState(vec=vec, cov=0.5 * (cov + cov.T))


def correct(state: KalmanState, measured_center, params: KalmanParams) -> KalmanState:
    """Fold in a measured center position (standard Kalman update)."""
    z = np.asarray(measured_center, dtype=float)
    innovation = z - _H @ state.vec
    s = _H @ state.cov @ _H.T + params.r * np.eye(2)
    # 2x2 inverse by hand keeps the update free of LAPACK dispatch.
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    s_inv = np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det
    gain = state.cov @ _H.T @ s_inv
    vec = state.vec + gain @ innovation
    ikh = np.eye(4) - gain @ _H
    cov = ikh @ state.cov @ ikh.T + gain @ (params.r * np.eye(2)) @ gain.T
    return KalmanState(vec=vec, cov=0.5 * (cov + cov.T))
