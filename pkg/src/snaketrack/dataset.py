"""Mask-sequence dataset layout and run-output files.

A dataset directory holds ``frame_%06d.png`` masks, a ``meta.json`` document
with the camera intrinsics and per-frame timestamps in seconds, and (for
synthetic data) a ``gt.jsonl`` file with one ground-truth record per frame:
``{"t": ..., "theta": [...], "quat": [w, x, y, z], "trans": [x, y, z]}``.

Estimation runs write ``trajectory.jsonl`` records
``{"frame", "t", "state", "sigma_diag", "residual", "loss", "seconds"}``
using the canonical flat state layout.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import MaskIOError, ParameterError
from .geometry import CameraIntrinsics, Pose, UnitQuaternion
from .masks import load_mask, save_mask
from .state import RobotState, state_to_vector, vector_to_state

FRAME_PATTERN = "frame_%06d.png"
META_NAME = "meta.json"
GT_NAME = "gt.jsonl"


def frame_path(directory, index: int) -> str:
    return os.path.join(str(directory), FRAME_PATTERN % index)


def camera_to_dict(cam: CameraIntrinsics) -> dict:
    return {
        "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
        "width": cam.width, "height": cam.height,
    }


def camera_from_dict(doc: dict) -> CameraIntrinsics:
    try:
        return CameraIntrinsics(
            fx=float(doc["fx"]), fy=float(doc["fy"]),
            cx=float(doc["cx"]), cy=float(doc["cy"]),
            width=int(doc["width"]), height=int(doc["height"]),
        )
    except KeyError as exc:
        raise ParameterError(f"camera document missing field {exc}") from exc


def write_meta(directory, cam: CameraIntrinsics, timestamps) -> None:
    doc = {
        "camera": camera_to_dict(cam),
        "timestamps": [float(t) for t in timestamps],
    }
    path = os.path.join(str(directory), META_NAME)
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise MaskIOError(f"cannot write {path}: {exc}") from exc


def read_meta(directory) -> tuple[CameraIntrinsics, list[float]]:
    path = os.path.join(str(directory), META_NAME)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise MaskIOError(f"cannot read dataset meta {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MaskIOError(f"malformed dataset meta {path}: {exc}") from exc
    if "camera" not in doc or "timestamps" not in doc:
        raise MaskIOError(f"dataset meta {path} must contain camera and timestamps")
    return camera_from_dict(doc["camera"]), [float(t) for t in doc["timestamps"]]


def state_to_record(t: float, state: RobotState) -> dict:
    q = state.pose.rotation
    return {
        "t": float(t),
        "theta": [float(x) for x in state.theta],
        "quat": [q.w, q.x, q.y, q.z],
        "trans": [float(x) for x in state.pose.translation],
    }


def state_from_record(doc: dict) -> tuple[float, RobotState]:
    try:
        quat = UnitQuaternion.from_array(doc["quat"])
        pose = Pose(quat, np.asarray(doc["trans"], dtype=np.float64))
        state = RobotState(np.asarray(doc["theta"], dtype=np.float64), pose)
        return float(doc["t"]), state
    except KeyError as exc:
        raise ParameterError(f"state record missing field {exc}") from exc


def write_gt(directory, timestamps, states) -> None:
    path = os.path.join(str(directory), GT_NAME)
    try:
        with open(path, "w") as fh:
            for t, state in zip(timestamps, states):
                fh.write(json.dumps(state_to_record(t, state)) + "\n")
    except OSError as exc:
        raise MaskIOError(f"cannot write {path}: {exc}") from exc


def read_gt(directory) -> tuple[list[float], list[RobotState]]:
    path = os.path.join(str(directory), GT_NAME)
    try:
        with open(path) as fh:
            lines = [line for line in fh if line.strip()]
    except OSError as exc:
        raise MaskIOError(f"cannot read ground truth {path}: {exc}") from exc
    times, states = [], []
    for line in lines:
        t, state = state_from_record(json.loads(line))
        times.append(t)
        states.append(state)
    return times, states


def has_gt(directory) -> bool:
    return os.path.exists(os.path.join(str(directory), GT_NAME))


def write_frame(directory, index: int, mask) -> None:
    save_mask(mask, frame_path(directory, index))


def load_frames(directory, count: int):
    """Yield the first ``count`` frame masks; missing/corrupt files raise MaskIOError."""
    for i in range(count):
        path = frame_path(directory, i)
        if not os.path.exists(path):
            raise MaskIOError(f"dataset frame missing: {path}")
        yield load_mask(path)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One estimated frame as stored in trajectory.jsonl."""

    frame: int
    t: float
    state: RobotState
    sigma_diag: np.ndarray
    residual: tuple[float, float] | None
    loss: float
    seconds: float


def write_trajectory(path, records) -> None:
    try:
        with open(path, "w") as fh:
            for rec in records:
                doc = {
                    "frame": rec.frame,
                    "t": rec.t,
                    "state": [float(x) for x in state_to_vector(rec.state)],
                    "sigma_diag": [float(x) for x in rec.sigma_diag],
                    "residual": None if rec.residual is None else [rec.residual[0], rec.residual[1]],
                    "loss": rec.loss,
                    "seconds": rec.seconds,
                }
                fh.write(json.dumps(doc) + "\n")
    except OSError as exc:
        raise MaskIOError(f"cannot write trajectory {path}: {exc}") from exc


def read_trajectory(path) -> list[TrajectoryRecord]:
    try:
        with open(path) as fh:
            lines = [line for line in fh if line.strip()]
    except OSError as exc:
        raise MaskIOError(f"cannot read trajectory {path}: {exc}") from exc
    records = []
    for line in lines:
        doc = json.loads(line)
        residual = doc.get("residual")
        records.append(
            TrajectoryRecord(
                frame=int(doc["frame"]),
                t=float(doc["t"]),
                state=vector_to_state(np.asarray(doc["state"], dtype=np.float64)),
                sigma_diag=np.asarray(doc["sigma_diag"], dtype=np.float64),
                residual=None if residual is None else (float(residual[0]), float(residual[1])),
                loss=float(doc["loss"]),
                seconds=float(doc["seconds"]),
            )
        )
    return records
