"""Synthetic ground-truth benchmark: trajectory generation, degraded mask
rendering, and initial-state perturbation.

Joint angles follow per-joint sinusoids theta_k(t) = A_k sin(2*pi*f_k*t +
phi_k); the base translates at constant velocity while the orientation stays
fixed (camera motion is indistinguishable from base motion in the camera
frame, so moving-camera scenarios are realized the same way). Mask
degradation emulates segmentation error: a signed erode/dilate, random flips
in a band around the silhouette boundary, then global salt-and-pepper noise.
Per-frame RNG streams are seeded by (seed, frame_index) so parallel or
re-ordered rendering cannot change the output.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import write_frame, write_gt, write_meta
from .errors import DimensionError, ParameterError
from .geometry import CameraIntrinsics, Pose, UnitQuaternion
from .kinematics import RobotModel, reconstruct_mesh
from .masks import dilate, erode
from .render import render_hard_silhouette
from .state import RobotState
from .validation import as_float_vector


@dataclass(frozen=True)
class TrajectoryConfig:
    """Sinusoidal joint motion plus constant-velocity base translation."""

    frames: int
    dt: float
    joint_amplitudes: np.ndarray
    joint_frequencies: np.ndarray
    joint_phases: np.ndarray
    base_velocity: np.ndarray
    base_start: Pose
    seed: int = 0

    def __post_init__(self):
        if self.frames < 1:
            raise ParameterError("frames must be >= 1")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        n = np.asarray(self.joint_amplitudes).size
        object.__setattr__(self, "joint_amplitudes", as_float_vector(self.joint_amplitudes, n, "joint_amplitudes"))
        object.__setattr__(self, "joint_frequencies", as_float_vector(self.joint_frequencies, n, "joint_frequencies"))
        object.__setattr__(self, "joint_phases", as_float_vector(self.joint_phases, n, "joint_phases"))
        object.__setattr__(self, "base_velocity", as_float_vector(self.base_velocity, 3, "base_velocity"))

    def timestamps(self) -> list[float]:
        return [i * self.dt for i in range(self.frames)]


@dataclass(frozen=True)
class NoiseSpec:
    """Mask degradation parameters; all off by default-zero values."""

    boundary_jitter_px: float = 1.0
    erode_dilate_px: int = 1
    pixel_flip_rate: float = 0.002
    seed: int = 0

    def __post_init__(self):
        if self.boundary_jitter_px < 0:
            raise ParameterError("boundary_jitter_px must be >= 0")
        if not (0 <= self.pixel_flip_rate < 1):
            raise ParameterError("pixel_flip_rate must be in [0, 1)")

    @classmethod
    def clean(cls) -> "NoiseSpec":
        return cls(boundary_jitter_px=0.0, erode_dilate_px=0, pixel_flip_rate=0.0)


def generate_trajectory(model: RobotModel, cfg: TrajectoryConfig) -> list[RobotState]:
    """Ground-truth states for every frame; fully deterministic."""
    n = model.n_joints
    if cfg.joint_amplitudes.shape != (n,):
        raise ParameterError(
            f"trajectory joint vectors must have length {n}, got {cfg.joint_amplitudes.shape}"
        )
    states = []
    for i in range(cfg.frames):
        t = i * cfg.dt
        theta = cfg.joint_amplitudes * np.sin(
            2.0 * np.pi * cfg.joint_frequencies * t + cfg.joint_phases
        )
        pose = replace(cfg.base_start, translation=cfg.base_start.translation + cfg.base_velocity * t)
        states.append(RobotState(theta, pose))
    return states


def degrade_mask(mask: np.ndarray, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Apply erode/dilate, boundary-band flips, then salt-and-pepper."""
    out = mask.copy()
    k = int(noise.erode_dilate_px)
    if k > 0:
        out = dilate(out, k)
    elif k < 0:
        out = erode(out, -k)
    j = int(round(noise.boundary_jitter_px))
    if j > 0:
        band = dilate(out, j) & ~erode(out, j)
        flips = band & (rng.random(out.shape) < 0.5)
        out = out ^ flips
    if noise.pixel_flip_rate > 0:
        flips = rng.random(out.shape) < noise.pixel_flip_rate
        out = out ^ flips
    return out


def render_dataset(traj, model: RobotModel, cam: CameraIntrinsics, noise: NoiseSpec,
                   out_dir, timestamps=None) -> None:
    """Write a full synthetic dataset: degraded frames, meta.json, gt.jsonl.

    ``timestamps`` defaults to the frame index (1 s spacing); pass the
    trajectory config's timestamps for physical spacing.
    """
    traj = list(traj)
    if timestamps is None:
        timestamps = [float(i) for i in range(len(traj))]
    timestamps = [float(t) for t in timestamps]
    if len(timestamps) != len(traj):
        raise DimensionError("timestamps and trajectory must have equal length")
    os.makedirs(str(out_dir), exist_ok=True)
    for i, state in enumerate(traj):
        mesh = reconstruct_mesh(model, state.theta)
        clean = render_hard_silhouette(cam, state.pose, mesh)
        rng = np.random.default_rng([noise.seed, i])
        write_frame(out_dir, i, degrade_mask(clean, noise, rng))
    write_meta(out_dir, cam, timestamps)
    write_gt(out_dir, timestamps, traj)


def perturb_state(state: RobotState, trans_std: float, angle_std: float,
                  quat_std: float, seed: int) -> RobotState:
    """Gaussian perturbation of a state; quaternion renormalized. Zero stds are exact identity."""
    if min(trans_std, angle_std, quat_std) < 0:
        raise ParameterError("perturbation stds must be >= 0")
    rng = np.random.default_rng(seed)
    theta = state.theta + angle_std * rng.standard_normal(state.n_joints)
    q = state.pose.rotation.as_array() + quat_std * rng.standard_normal(4)
    trans = state.pose.translation + trans_std * rng.standard_normal(3)
    if trans_std == 0 and angle_std == 0 and quat_std == 0:
        return state
    return RobotState(theta, Pose(UnitQuaternion.from_array(q), trans))
