"""YAML configuration files for the CLI: synthetic-scene configs and
estimator settings.

A scene config holds a ``trajectory`` section (frames, dt, seed, per-joint
amplitude/frequency/phase, base start pose and velocity), an optional
``camera`` section and an optional ``noise`` section. An estimator config
holds the per-frame update tunables plus an ``init`` section with the
perturbation applied to ground truth when initializing from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import MaskIOError, ParameterError
from .estimator import EstimatorConfig
from .geometry import CameraIntrinsics, Pose, UnitQuaternion
from .gradients import FDSteps
from .kinematics import RobotModel
from .render import RenderSettings
from .synth import NoiseSpec, TrajectoryConfig


def default_camera() -> CameraIntrinsics:
    """640x360 working-resolution pinhole camera."""
    return CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=180.0, width=640, height=360)


@dataclass(frozen=True)
class InitSpec:
    """Perturbation applied to the ground-truth state when initializing from it."""

    trans_std: float = 0.02
    angle_std: float = 0.05
    quat_std: float = 0.01
    seed: int = 1


def _load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise MaskIOError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParameterError(f"malformed config file {path}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParameterError(f"config file {path} must contain a mapping")
    return doc


def camera_from_config(doc: dict | None) -> CameraIntrinsics:
    if not doc:
        return default_camera()
    base = default_camera()
    return CameraIntrinsics(
        fx=float(doc.get("fx", base.fx)),
        fy=float(doc.get("fy", base.fy)),
        cx=float(doc.get("cx", base.cx)),
        cy=float(doc.get("cy", base.cy)),
        width=int(doc.get("width", base.width)),
        height=int(doc.get("height", base.height)),
    )


def noise_from_config(doc: dict | None) -> NoiseSpec:
    if doc is None:
        return NoiseSpec()
    return NoiseSpec(
        boundary_jitter_px=float(doc.get("boundary_jitter_px", 1.0)),
        erode_dilate_px=int(doc.get("erode_dilate_px", 1)),
        pixel_flip_rate=float(doc.get("pixel_flip_rate", 0.002)),
        seed=int(doc.get("seed", 0)),
    )


def _per_joint(doc, key: str, n: int, default: float) -> np.ndarray:
    value = doc.get(key, default)
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ParameterError(f"trajectory field {key!r} must be scalar or length {n}")
    return arr


def load_scene_config(path, model: RobotModel):
    """Parse a scene config; returns (TrajectoryConfig, NoiseSpec, CameraIntrinsics)."""
    doc = _load_yaml(path)
    traj_doc = doc.get("trajectory")
    if not isinstance(traj_doc, dict):
        raise ParameterError(f"config file {path} must contain a 'trajectory' section")
    n = model.n_joints
    base_doc = traj_doc.get("base", {})
    start_trans = np.asarray(base_doc.get("start_translation", [0.0, 0.0, 1.2]), dtype=np.float64)
    start_quat = UnitQuaternion.from_array(base_doc.get("start_quat", [1.0, 0.0, 0.0, 0.0]))
    velocity = np.asarray(base_doc.get("velocity", [0.0, 0.0, 0.0]), dtype=np.float64)
    try:
        traj = TrajectoryConfig(
            frames=int(traj_doc["frames"]),
            dt=float(traj_doc.get("dt", 0.1)),
            joint_amplitudes=_per_joint(traj_doc, "joint_amplitudes", n, 0.0),
            joint_frequencies=_per_joint(traj_doc, "joint_frequencies", n, 0.0),
            joint_phases=_per_joint(traj_doc, "joint_phases", n, 0.0),
            base_velocity=velocity,
            base_start=Pose(start_quat, start_trans),
            seed=int(traj_doc.get("seed", 0)),
        )
    except KeyError as exc:
        raise ParameterError(f"config file {path}: trajectory section missing {exc}") from exc
    noise = noise_from_config(doc.get("noise"))
    cam = camera_from_config(doc.get("camera"))
    return traj, noise, cam


def estimator_from_config(doc: dict | None) -> EstimatorConfig:
    if doc is None:
        doc = {}
    fd_doc = doc.get("fd_steps", {}) or {}
    render_doc = doc.get("render", {}) or {}
    return EstimatorConfig(
        refine_steps=int(doc.get("refine_steps", 10)),
        refine_lr=float(doc.get("refine_lr", 0.005)),
        adam_beta1=float(doc.get("adam_beta1", 0.9)),
        adam_beta2=float(doc.get("adam_beta2", 0.999)),
        adam_eps=float(doc.get("adam_eps", 1e-8)),
        meas_noise_px=float(doc.get("meas_noise_px", 2.0)),
        process_noise=doc.get("process_noise"),
        fd_steps=FDSteps(
            step_theta=float(fd_doc.get("step_theta", 1e-3)),
            step_quat=float(fd_doc.get("step_quat", 1e-3)),
            step_trans=float(fd_doc.get("step_trans", 1e-3)),
        ),
        render=RenderSettings(
            sigma=float(render_doc.get("sigma", 1.0)),
            support=float(render_doc.get("support", 3.0)),
            z_near=float(render_doc.get("z_near", 0.01)),
        ),
    )


def init_from_config(doc: dict | None) -> InitSpec:
    if doc is None:
        return InitSpec()
    return InitSpec(
        trans_std=float(doc.get("trans_std", 0.02)),
        angle_std=float(doc.get("angle_std", 0.05)),
        quat_std=float(doc.get("quat_std", 0.01)),
        seed=int(doc.get("seed", 1)),
    )


def load_estimator_config(path=None) -> tuple[EstimatorConfig, InitSpec]:
    """Parse an estimator config file; None yields all-default settings."""
    if path is None:
        return estimator_from_config(None), InitSpec()
    doc = _load_yaml(path)
    return estimator_from_config(doc.get("estimator", doc)), init_from_config(doc.get("init"))


def estimator_to_dict(cfg: EstimatorConfig) -> dict:
    return {
        "refine_steps": cfg.refine_steps,
        "refine_lr": cfg.refine_lr,
        "adam_beta1": cfg.adam_beta1,
        "adam_beta2": cfg.adam_beta2,
        "adam_eps": cfg.adam_eps,
        "meas_noise_px": cfg.meas_noise_px,
        "process_noise": cfg.process_noise,
        "fd_steps": {
            "step_theta": cfg.fd_steps.step_theta,
            "step_quat": cfg.fd_steps.step_quat,
            "step_trans": cfg.fd_steps.step_trans,
        },
        "render": {
            "sigma": cfg.render.sigma,
            "support": cfg.render.support,
            "z_near": cfg.render.z_near,
        },
    }
