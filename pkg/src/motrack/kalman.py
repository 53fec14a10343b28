"""Constant-velocity Kalman filter over box state, and the camera-aware
prediction step that splices the inter-frame warp into the box part.

State layout is [cx, cy, w, h, v_cx, v_cy, v_w, v_h]: center-form box plus
one velocity per box component, in pixels and pixels/frame. Process and
measurement noise scale with the current box height so the filter adapts
to object scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alignment import AffineWarp, warp_box
from .geometry import BoundingBox, from_center_form, to_center_form

STATE_DIM = 8
MEAS_DIM = 4

# Smallest width/height the filter will report; keeps boxes valid.
SIZE_FLOOR = 1e-3


class DegenerateStateError(Exception):
    """Raised when an update runs into a singular innovation covariance."""


def _transition_matrix() -> np.ndarray:
    f = np.eye(STATE_DIM)
    for i in range(MEAS_DIM):
        f[i, MEAS_DIM + i] = 1.0
    return f


def _measurement_matrix() -> np.ndarray:
    h = np.zeros((MEAS_DIM, STATE_DIM))
    h[:, :MEAS_DIM] = np.eye(MEAS_DIM)
    return h


@dataclass
class MotionParams:
    """Noise scales for the constant-velocity model.

    std_pos and std_vel are multiplied by the current box height to obtain
    per-step process/measurement standard deviations; init_pos_factor and
    init_vel_factor inflate them for the initial covariance. std_meas
    overrides the measurement scale when observations deserve more or less
    trust than the model (defaults to std_pos).
    """

    std_pos: float = 1.0 / 20.0
    std_vel: float = 1.0 / 160.0
    std_meas: float | None = None
    # Near-diffuse priors: a fresh track knows nothing about its velocity,
    # so the first updates should trust displacement over the zero init.
    init_pos_factor: float = 10.0
    init_vel_factor: float = 1000.0
    transition: np.ndarray = field(default_factory=_transition_matrix)
    measurement: np.ndarray = field(default_factory=_measurement_matrix)

    def process_noise(self, height: float) -> np.ndarray:
        sp = self.std_pos * height
        sv = self.std_vel * height
        return np.diag([sp, sp, sp, sp, sv, sv, sv, sv]) ** 2

    def measurement_noise(self, height: float) -> np.ndarray:
        sp = (self.std_pos if self.std_meas is None else self.std_meas) * height
        return np.diag([sp, sp, sp, sp]) ** 2


@dataclass
class KalmanState:
    """Filter mean (8,) and covariance (8, 8)."""

    mean: np.ndarray
    cov: np.ndarray

    def box(self) -> BoundingBox:
        cx, cy, w, h = self.mean[:MEAS_DIM]
        return from_center_form(cx, cy, w, h)

    def velocity(self) -> np.ndarray:
        return self.mean[MEAS_DIM:].copy()

    def copy(self) -> "KalmanState":
        return KalmanState(self.mean.copy(), self.cov.copy())


def _symmetrize(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + cov.T)


def _floor_size(mean: np.ndarray) -> np.ndarray:
    mean[2] = max(mean[2], SIZE_FLOOR)
    mean[3] = max(mean[3], SIZE_FLOOR)
    return mean


def km_init(box: BoundingBox, params: MotionParams) -> KalmanState:
    """Start a track from a box: zero velocity, height-scaled uncertainty."""
    cx, cy, w, h = to_center_form(box)
    mean = np.array([cx, cy, w, h, 0.0, 0.0, 0.0, 0.0])
    sp = params.init_pos_factor * params.std_pos * h
    sv = params.init_vel_factor * params.std_vel * h
    std = np.array([sp, sp, sp, sp, sv, sv, sv, sv])
    return KalmanState(mean, np.diag(std**2))


def km_predict(state: KalmanState, params: MotionParams) -> KalmanState:
    """One constant-velocity step: mean <- F mean, cov <- F cov F^T + Q."""
    f = params.transition
    mean = _floor_size(f @ state.mean)
    cov = _symmetrize(f @ state.cov @ f.T + params.process_noise(state.mean[3]))
    return KalmanState(mean, cov)


def km_update(
    state: KalmanState, observation: BoundingBox, params: MotionParams
) -> KalmanState:
    """Standard Kalman correction against a center-form box observation."""
    h = params.measurement
    z = np.array(to_center_form(observation))
    r = params.measurement_noise(state.mean[3])
    innovation = z - h @ state.mean
    s = h @ state.cov @ h.T + r
    try:
        gain = np.linalg.solve(s, h @ state.cov).T
    except np.linalg.LinAlgError as exc:
        raise DegenerateStateError("singular innovation covariance") from exc
    mean = _floor_size(state.mean + gain @ innovation)
    ident = np.eye(STATE_DIM)
    cov = _symmetrize((ident - gain @ h) @ state.cov)
    return KalmanState(mean, cov)


def iml_predict(
    state: KalmanState, warp: AffineWarp, params: MotionParams
) -> KalmanState:
    """Constant-velocity prediction with the box part re-localized through
    the inter-frame camera warp.

    The warp touches only the box components of the mean; velocities and
    the covariance update are exactly those of km_predict.
    """
    predicted = km_predict(state, params)
    if warp.is_identity():
        return predicted
    try:
        warped = warp_box(warp, predicted.box())
    except ValueError as exc:
        raise DegenerateStateError(str(exc)) from exc
    cx, cy, w, h = to_center_form(warped)
    if w <= SIZE_FLOOR or h <= SIZE_FLOOR:
        raise DegenerateStateError(f"warp collapsed box to {w}x{h}")
    predicted.mean[:MEAS_DIM] = (cx, cy, w, h)
    return predicted


def velocity_norm(state: KalmanState, image_diagonal: float) -> float:
    """Speed of the box state relative to the image diagonal, in [0, 1]."""
    if image_diagonal <= 0:
        raise ValueError("image_diagonal must be positive")
    speed = math.sqrt(float(np.dot(state.mean[MEAS_DIM:], state.mean[MEAS_DIM:])))
    return min(speed / image_diagonal, 1.0)
