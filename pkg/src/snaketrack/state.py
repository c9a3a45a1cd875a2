"""Robot state and Gaussian belief containers.

The flattened state vector layout is a frozen contract shared by the
covariance, the observation Jacobian, the Kalman gain and every gradient:

    [theta_1 ... theta_N, q_w, q_x, q_y, q_z, b_x, b_y, b_z]

so D = N + 7. ``vector_to_state`` renormalizes the quaternion block, which
makes additive updates on the flat vector well-defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .geometry import Pose, UnitQuaternion, _frozen_array
from .validation import as_float_vector

POSE_DOF = 7  # 4 quaternion components + 3 translation components


@dataclass(frozen=True)
class RobotState:
    """Joint angles plus camera-frame base pose."""

    theta: np.ndarray
    pose: Pose

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=np.float64)
        if th.ndim != 1 or th.size < 1:
            raise DimensionError(f"theta must be a non-empty 1-D vector, got shape {th.shape}")
        if not np.all(np.isfinite(th)):
            raise ParameterError("theta must be finite")
        object.__setattr__(self, "theta", _frozen_array(th))

    @property
    def n_joints(self) -> int:
        return len(self.theta)

    @property
    def dim(self) -> int:
        return self.n_joints + POSE_DOF


def state_dim(n_joints: int) -> int:
    return n_joints + POSE_DOF


def state_to_vector(state: RobotState) -> np.ndarray:
    """Flatten to the canonical [theta | quat | trans] layout."""
    q = state.pose.rotation
    return np.concatenate(
        [state.theta, [q.w, q.x, q.y, q.z], state.pose.translation]
    )


def vector_to_state(vec) -> RobotState:
    """Inverse of :func:`state_to_vector`; renormalizes the quaternion block."""
    v = np.asarray(vec, dtype=np.float64)
    if v.ndim != 1 or v.size < POSE_DOF + 1:
        raise DimensionError(
            f"state vector must be 1-D with length >= {POSE_DOF + 1}, got shape {v.shape}"
        )
    n = v.size - POSE_DOF
    quat = UnitQuaternion.from_array(v[n : n + 4])
    return RobotState(theta=v[:n], pose=Pose(quat, v[n + 4 :]))


@dataclass(frozen=True)
class Belief:
    """Gaussian belief: mean state, covariance over the flat vector, base velocity."""

    mean: RobotState
    covariance: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        d = self.mean.dim
        cov = np.asarray(self.covariance, dtype=np.float64)
        if cov.shape != (d, d):
            raise DimensionError(f"covariance must have shape ({d}, {d}), got {cov.shape}")
        asym = np.abs(cov - cov.T).max() if cov.size else 0.0
        if asym > 1e-6:
            raise ParameterError(f"covariance is not symmetric (max asymmetry {asym:.3g})")
        cov = 0.5 * (cov + cov.T)
        min_eig = float(np.linalg.eigvalsh(cov).min())
        if min_eig < -1e-8:
            raise ParameterError(f"covariance is not PSD (min eigenvalue {min_eig:.3g})")
        vel = as_float_vector(self.velocity, 3, "velocity")
        object.__setattr__(self, "covariance", _frozen_array(cov))
        object.__setattr__(self, "velocity", _frozen_array(vel))

    @property
    def dim(self) -> int:
        return self.mean.dim


def default_initial_covariance(n_joints: int) -> np.ndarray:
    """Diagonal prior: 0.1 rad per joint, 0.05 per quaternion component, 0.1 m per axis."""
    diag = np.concatenate(
        [np.full(n_joints, 0.1**2), np.full(4, 0.05**2), np.full(3, 0.1**2)]
    )
    return np.diag(diag)
