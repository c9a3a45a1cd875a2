"""Rigid-body geometry primitives: unit quaternions, SE(3) poses, camera
intrinsics, and triangle meshes.

Conventions used throughout the package:
  * quaternion component order is (w, x, y, z); canonical hemisphere w >= 0
  * angles in radians, distances in meters, image coordinates in pixels
  * 3-vectors are float64 numpy arrays of shape (3,)

All types are immutable value types; operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .validation import as_float_vector

_NORM_EPS = 1e-12


def _frozen_array(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion (w, x, y, z). Construction normalizes to unit length."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(n) or n < _NORM_EPS:
            raise ParameterError(f"quaternion norm too small or non-finite: {n}")
        object.__setattr__(self, "w", self.w / n)
        object.__setattr__(self, "x", self.x / n)
        object.__setattr__(self, "y", self.y / n)
        object.__setattr__(self, "z", self.z / n)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, wxyz) -> "UnitQuaternion":
        arr = as_float_vector(wxyz, 4, "quaternion")
        return cls(arr[0], arr[1], arr[2], arr[3])

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "UnitQuaternion":
        axis = as_float_vector(axis, 3, "axis")
        n = float(np.linalg.norm(axis))
        if n < _NORM_EPS:
            raise ParameterError("rotation axis must be non-zero")
        half = 0.5 * float(angle)
        s = math.sin(half) / n
        return cls(math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def canonical(self) -> "UnitQuaternion":
        """Same rotation with w >= 0 (hemisphere convention)."""
        if self.w < 0.0:
            return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)
        return self

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def multiply(self, other: "UnitQuaternion") -> "UnitQuaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def to_matrix(self) -> np.ndarray:
        return quat_to_matrix(self)


def quat_to_matrix(q: UnitQuaternion) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion."""
    w, x, y, z = q.w, q.x, q.y, q.z
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


@dataclass(frozen=True)
class Pose:
    """Rigid transform in SE(3): rotate by ``rotation`` then add ``translation``."""

    rotation: UnitQuaternion
    translation: np.ndarray

    def __post_init__(self):
        t = as_float_vector(self.translation, 3, "translation")
        object.__setattr__(self, "translation", _frozen_array(t))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(UnitQuaternion.identity(), np.zeros(3))

    @classmethod
    def from_rotation(cls, axis, angle: float) -> "Pose":
        return cls(UnitQuaternion.from_axis_angle(axis, angle), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "Pose":
        return cls(UnitQuaternion.identity(), t)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform a point (3,) or an array of points (..., 3)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.shape[-1] != 3:
            raise DimensionError(f"points must have trailing dimension 3, got {pts.shape}")
        R = quat_to_matrix(self.rotation)
        return pts @ R.T + self.translation

    def compose(self, other: "Pose") -> "Pose":
        """Pose equal to applying ``other`` first, then ``self``."""
        return pose_compose(self, other)

    def inverse(self) -> "Pose":
        q_inv = self.rotation.conjugate()
        R_inv = quat_to_matrix(q_inv)
        return Pose(q_inv, -(R_inv @ self.translation))


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Composition a∘b: (a∘b).apply(p) == a.apply(b.apply(p))."""
    return Pose(a.rotation.multiply(b.rotation), a.apply(b.translation))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ParameterError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ParameterError("image dimensions must be positive")
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise ParameterError("principal point must lie within the image")
        object.__setattr__(self, "fx", float(self.fx))
        object.__setattr__(self, "fy", float(self.fy))
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh: vertices (V, 3) float64 and faces (F, 3) int64.

    ``part_ranges`` marks contiguous vertex ranges that form rigid convex
    parts (one per robot link after mesh reconstruction); renderers may
    exploit the decomposition. A mesh built without explicit parts is one
    single part.
    """

    vertices: np.ndarray
    faces: np.ndarray
    part_ranges: tuple = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        f = np.asarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise DimensionError(f"vertices must have shape (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise DimensionError(f"faces must have shape (F, 3), got {f.shape}")
        if f.size:
            if f.min() < 0 or f.max() >= len(v):
                raise DimensionError("face index out of range")
            degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if degenerate.any():
                raise ParameterError("mesh contains a face with a repeated vertex index")
        ranges = self.part_ranges
        if ranges is None:
            ranges = ((0, len(v)),) if len(v) else ()
        ranges = tuple((int(a), int(b)) for a, b in ranges)
        stop = 0
        for a, b in ranges:
            if a != stop or b < a:
                raise DimensionError(f"part ranges must partition the vertices, got {ranges}")
            stop = b
        if stop != len(v):
            raise DimensionError(f"part ranges must cover all {len(v)} vertices, got {ranges}")
        v = v.copy()
        f = f.copy()
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        object.__setattr__(self, "part_ranges", ranges)

    @classmethod
    def empty(cls) -> "TriMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def transformed(self, pose: Pose) -> "TriMesh":
        return TriMesh(pose.apply(self.vertices), self.faces, self.part_ranges)


def merge_meshes(meshes) -> TriMesh:
    """Concatenate meshes into one, keeping each input as a separate part."""
    meshes = list(meshes)
    if not meshes:
        return TriMesh.empty()
    verts = []
    faces = []
    ranges = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        for a, b in m.part_ranges:
            ranges.append((a + offset, b + offset))
        offset += m.n_vertices
    return TriMesh(np.vstack(verts), np.vstack(faces), tuple(ranges))
