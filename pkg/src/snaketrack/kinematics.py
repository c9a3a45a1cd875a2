"""Serpentine robot model: a serial chain of cylinder links with alternating
revolute joints, and mesh reconstruction from joint angles.

Joint convention (fixed here, shared with the synthetic benchmark): link k's
frame is A_k = A_{k-1} ∘ Trans(L_{k-1}·x̂) ∘ Rot(axis_k, θ_k), with
A_1 = Rot(axis_1, θ_1). Each link's cylinder lies along local +x over
[0, L_k]. Pitch joints rotate about local y, yaw joints about local z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import DimensionError, MaskIOError, ParameterError
from .geometry import Pose, TriMesh, UnitQuaternion, merge_meshes

PITCH = "pitch"
YAW = "yaw"

_AXIS_VECTORS = {
    PITCH: np.array([0.0, 1.0, 0.0]),
    YAW: np.array([0.0, 0.0, 1.0]),
}


@dataclass(frozen=True)
class LinkSpec:
    """One cylinder link driven by the revolute joint at its proximal end."""

    length: float
    radius: float
    joint_axis: str

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise ParameterError(f"link length must be positive, got {self.length}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ParameterError(f"link radius must be positive, got {self.radius}")
        if self.joint_axis not in _AXIS_VECTORS:
            raise ParameterError(
                f"unknown joint axis {self.joint_axis!r}; expected 'pitch' or 'yaw'"
            )


@dataclass(frozen=True)
class RobotModel:
    """Ordered chain of links plus the radial tessellation used for meshing."""

    links: tuple[LinkSpec, ...]
    mesh_segments: int = 16

    def __post_init__(self):
        links = tuple(self.links)
        if len(links) < 1:
            raise ParameterError("robot model needs at least one link")
        if self.mesh_segments < 3:
            raise ParameterError("mesh_segments must be >= 3")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "mesh_segments", int(self.mesh_segments))

    @property
    def n_joints(self) -> int:
        return len(self.links)

    @property
    def total_length(self) -> float:
        return sum(link.length for link in self.links)


def default_robot_model(n_links: int = 6, length: float = 0.15, radius: float = 0.04,
                        mesh_segments: int = 16) -> RobotModel:
    """Desk-scale chain with alternating pitch/yaw joints."""
    links = tuple(
        LinkSpec(length, radius, PITCH if k % 2 == 0 else YAW) for k in range(n_links)
    )
    return RobotModel(links=links, mesh_segments=mesh_segments)


def forward_kinematics(model: RobotModel, theta) -> list[Pose]:
    """Link frames [A_1 ... A_N] in the robot base frame."""
    th = np.asarray(theta, dtype=np.float64)
    if th.shape != (model.n_joints,):
        raise DimensionError(
            f"theta must have shape ({model.n_joints},), got {th.shape}"
        )
    frames: list[Pose] = []
    current = Pose.identity()
    for k, link in enumerate(model.links):
        rot = Pose(UnitQuaternion.from_axis_angle(_AXIS_VECTORS[link.joint_axis], th[k]),
                   np.zeros(3))
        if k == 0:
            current = rot
        else:
            step = Pose.from_translation([model.links[k - 1].length, 0.0, 0.0])
            current = current.compose(step).compose(rot)
        frames.append(current)
    return frames


def cylinder_mesh(radius: float, length: float, segments: int) -> TriMesh:
    """Closed cylinder along +x from x=0 to x=length.

    2*segments ring vertices plus two cap centers; 2*segments side faces and
    2*segments cap faces, wound consistently outward.
    """
    if not (radius > 0 and length > 0):
        raise ParameterError("cylinder radius and length must be positive")
    if segments < 3:
        raise ParameterError("segments must be >= 3")
    s = int(segments)
    phi = 2.0 * np.pi * np.arange(s) / s
    ring = np.stack([np.zeros(s), radius * np.cos(phi), radius * np.sin(phi)], axis=1)
    near = ring.copy()
    far = ring.copy()
    far[:, 0] = length
    verts = np.vstack([near, far, [[0.0, 0.0, 0.0]], [[length, 0.0, 0.0]]])
    c_near = 2 * s
    c_far = 2 * s + 1

    faces = []
    for i in range(s):
        j = (i + 1) % s
        # side quad split into two triangles, outward normals
        faces.append([i, s + i, s + j])
        faces.append([i, s + j, j])
        # caps: near cap faces -x, far cap faces +x
        faces.append([c_near, j, i])
        faces.append([c_far, s + i, s + j])
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def reconstruct_mesh(model: RobotModel, theta) -> TriMesh:
    """Full robot mesh in the base frame for the given joint angles."""
    frames = forward_kinematics(model, theta)
    parts = []
    for link, frame in zip(model.links, frames):
        parts.append(cylinder_mesh(link.radius, link.length, model.mesh_segments).transformed(frame))
    return merge_meshes(parts)


def skeleton_points(model: RobotModel, theta) -> np.ndarray:
    """Joint positions along the chain: base origin, each joint, distal tip; shape (N+1, 3)."""
    frames = forward_kinematics(model, theta)
    pts = [frames[0].translation]
    for link, frame in zip(model.links, frames):
        pts.append(frame.apply(np.array([link.length, 0.0, 0.0])))
    return np.asarray(pts)


def load_robot_model(path) -> RobotModel:
    """Read a robot model file: ``mesh_segments`` plus ``links: [{length, radius, axis}]``."""
    try:
        with open(path, "r") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise MaskIOError(f"cannot read robot model file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParameterError(f"malformed robot model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "links" not in doc:
        raise ParameterError(f"robot model file {path} must define a 'links' list")
    links = []
    for i, entry in enumerate(doc["links"]):
        try:
            links.append(
                LinkSpec(
                    length=float(entry["length"]),
                    radius=float(entry["radius"]),
                    joint_axis=str(entry["axis"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ParameterError(
                f"robot model file {path}: link {i} needs length, radius and axis"
            ) from exc
    return RobotModel(links=tuple(links), mesh_segments=int(doc.get("mesh_segments", 16)))


def save_robot_model(model: RobotModel, path) -> None:
    doc = {
        "mesh_segments": model.mesh_segments,
        "links": [
            {"length": link.length, "radius": link.radius, "axis": link.joint_axis}
            for link in model.links
        ],
    }
    try:
        with open(path, "w") as fh:
            yaml.safe_dump(doc, fh, sort_keys=False)
    except OSError as exc:
        raise MaskIOError(f"cannot write robot model file {path}: {exc}") from exc
