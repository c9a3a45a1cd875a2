"""Silhouette rendering through a pinhole camera, image moments and centroids.

The soft rasterizer works per rigid part (robot link): a part's cylinder is
convex, so its exact silhouette is the convex hull of its projected
vertices. Per part, every pixel gets a coverage value from the signed
Euclidean pixel distance to that hull boundary (positive inside) through a
quintic smootherstep profile: 0.5 exactly on the outline, saturating
exactly at +-support*sigma with zero first and second derivatives there.
Parts aggregate into the silhouette with the complementary product
1 - prod_p (1 - D_p).

This is the sigmoid-of-signed-distance construction applied to each part
outline rather than to each triangle. Rendering whole convex outlines keeps
the image essentially C2 in the robot state: per-triangle distance fields
carry medial-axis gradient kinks of thin triangles through the soft band,
which makes finite differences through the image inconsistent under step
halving. Hard silhouettes are rasterized per triangle (exact coverage with
a top-left tie rule), which for convex parts marks exactly the pixels
inside the same outlines.

Rasterization kernels are numba-compiled and release the GIL so probe
renders can run on worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import EmptySilhouetteError, ParameterError
from .geometry import CameraIntrinsics, Pose, TriMesh

EMPTY_MASS_EPS = 1e-6


@dataclass(frozen=True)
class RenderSettings:
    """Soft-edge scale (pixels), saturation half-width (in sigmas), near plane (m)."""

    sigma: float = 1.0
    support: float = 3.0
    z_near: float = 0.01

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ParameterError("sigma must be positive")
        if not (self.support >= 1):
            raise ParameterError("support must be >= 1")
        if not (self.z_near > 0):
            raise ParameterError("z_near must be positive")


def project_points(cam: CameraIntrinsics, pose: Pose, pts) -> np.ndarray:
    """Project points through ``pose`` into pixel coordinates.

    Returns an (M, 3) array of (u, v, z_cam). The camera-frame depth is
    returned unprojected; points at or behind the camera plane yield
    non-finite pixel coordinates and are expected to be discarded by the
    caller (the rasterizers clip by z_near before projecting).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    cam_pts = pose.apply(pts)
    z = cam_pts[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.fx * cam_pts[:, 0] / z + cam.cx
        v = cam.fy * cam_pts[:, 1] / z + cam.cy
    return np.stack([u, v, z], axis=1)


def _projected_triangles(cam: CameraIntrinsics, pose: Pose, mesh: TriMesh,
                         z_near: float) -> np.ndarray:
    """Screen-space triangles (F', 3, 2) of all faces fully in front of z_near."""
    if mesh.n_faces == 0:
        return np.zeros((0, 3, 2))
    cam_pts = pose.apply(mesh.vertices)
    z = cam_pts[:, 2]
    keep = np.all(z[mesh.faces] > z_near, axis=1)
    faces = mesh.faces[keep]
    if not len(faces):
        return np.zeros((0, 3, 2))
    safe_z = np.where(z > z_near, z, 1.0)
    uv = np.stack(
        [cam.fx * cam_pts[:, 0] / safe_z + cam.cx,
         cam.fy * cam_pts[:, 1] / safe_z + cam.cy],
        axis=1,
    )
    return uv[faces]


@njit(cache=True, nogil=True)
def _convex_hull(pts):
    """Strict convex hull of 2-D points (monotone chain), interior-positive order."""
    n = pts.shape[0]
    idx = np.arange(n)
    for i in range(1, n):  # insertion sort by (x, y)
        j = i
        while j > 0 and (
            pts[idx[j - 1], 0] > pts[idx[j], 0]
            or (pts[idx[j - 1], 0] == pts[idx[j], 0] and pts[idx[j - 1], 1] > pts[idx[j], 1])
        ):
            tmp = idx[j - 1]
            idx[j - 1] = idx[j]
            idx[j] = tmp
            j -= 1
    hull = np.empty((2 * n + 1, 2))
    k = 0
    for ii in range(n):
        px, py = pts[idx[ii], 0], pts[idx[ii], 1]
        while k >= 2 and (
            (hull[k - 1, 0] - hull[k - 2, 0]) * (py - hull[k - 2, 1])
            - (hull[k - 1, 1] - hull[k - 2, 1]) * (px - hull[k - 2, 0])
        ) <= 0.0:
            k -= 1
        hull[k, 0] = px
        hull[k, 1] = py
        k += 1
    lower = k + 1
    for ii in range(n - 2, -1, -1):
        px, py = pts[idx[ii], 0], pts[idx[ii], 1]
        while k >= lower and (
            (hull[k - 1, 0] - hull[k - 2, 0]) * (py - hull[k - 2, 1])
            - (hull[k - 1, 1] - hull[k - 2, 1]) * (px - hull[k - 2, 0])
        ) <= 0.0:
            k -= 1
        hull[k, 0] = px
        hull[k, 1] = py
        k += 1
    out = hull[: k - 1]
    # enforce interior-positive orientation for cross(edge, p - p0)
    area2 = 0.0
    m = out.shape[0]
    for i in range(m):
        j = (i + 1) % m
        area2 += out[i, 0] * out[j, 1] - out[j, 0] * out[i, 1]
    if area2 < 0.0:
        out = out[::-1].copy()
    return out


@njit(cache=True, nogil=True)
def _soft_raster_hulls(pts, starts, height, width, pad, prod):
    """Multiply per-part hull coverage into the complement buffer ``prod``.

    pts holds the concatenated hull vertices of all parts; part h occupies
    rows starts[h]:starts[h+1], ordered so the interior is on the positive
    side of every edge cross product.
    """
    inv_w = 1.0 / (2.0 * pad)
    for h in range(starts.shape[0] - 1):
        a, b = starts[h], starts[h + 1]
        n = b - a
        if n < 3:
            continue
        xmin = pts[a, 0]
        xmax = pts[a, 0]
        ymin = pts[a, 1]
        ymax = pts[a, 1]
        for i in range(a + 1, b):
            xmin = min(xmin, pts[i, 0])
            xmax = max(xmax, pts[i, 0])
            ymin = min(ymin, pts[i, 1])
            ymax = max(ymax, pts[i, 1])
        u0 = max(0, int(math.ceil(xmin - pad - 0.5)))
        u1 = min(width - 1, int(math.floor(xmax + pad - 0.5)))
        v0 = max(0, int(math.ceil(ymin - pad - 0.5)))
        v1 = min(height - 1, int(math.floor(ymax + pad - 0.5)))
        if u1 < u0 or v1 < v0:
            continue

        ex = np.empty(n)
        ey = np.empty(n)
        p0x = np.empty(n)
        p0y = np.empty(n)
        inv_len = np.empty(n)
        inv_len2 = np.empty(n)
        for e in range(n):
            i0 = a + e
            i1 = a + ((e + 1) % n)
            p0x[e] = pts[i0, 0]
            p0y[e] = pts[i0, 1]
            ex[e] = pts[i1, 0] - pts[i0, 0]
            ey[e] = pts[i1, 1] - pts[i0, 1]
            ll = math.sqrt(ex[e] * ex[e] + ey[e] * ey[e])
            inv_len[e] = 1.0 / ll if ll > 0.0 else 0.0
            inv_len2[e] = inv_len[e] * inv_len[e]

        for v in range(v0, v1 + 1):
            py = v + 0.5
            for u in range(u0, u1 + 1):
                if prod[v, u] == 0.0:
                    continue
                px = u + 0.5
                # signed distance to the hull: inside it is the smallest
                # edge-line distance; outside, minus the distance to the
                # nearest edge segment
                min_ld = 1.0e30
                for e in range(n):
                    ld = (ex[e] * (py - p0y[e]) - ey[e] * (px - p0x[e])) * inv_len[e]
                    if ld < min_ld:
                        min_ld = ld
                        if min_ld <= -pad:
                            break
                if min_ld <= -pad:
                    continue
                if min_ld >= pad:
                    prod[v, u] = 0.0
                    continue
                if min_ld >= 0.0:
                    d = min_ld
                else:
                    best = 1.0e30
                    for e in range(n):
                        wx = px - p0x[e]
                        wy = py - p0y[e]
                        t = (wx * ex[e] + wy * ey[e]) * inv_len2[e]
                        t = min(1.0, max(0.0, t))
                        dx = wx - t * ex[e]
                        dy = wy - t * ey[e]
                        dd = dx * dx + dy * dy
                        if dd < best:
                            best = dd
                    d = -math.sqrt(best)
                    if d <= -pad:
                        continue
                tt = (d + pad) * inv_w
                cover = tt * tt * tt * (tt * (6.0 * tt - 15.0) + 10.0)
                prod[v, u] *= 1.0 - cover
    return prod


@njit(cache=True, nogil=True)
def _hard_raster(tri, height, width):
    out = np.zeros((height, width), dtype=np.bool_)
    for f in range(tri.shape[0]):
        ax, ay = tri[f, 0, 0], tri[f, 0, 1]
        bx, by = tri[f, 1, 0], tri[f, 1, 1]
        cx, cy = tri[f, 2, 0], tri[f, 2, 1]
        area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if area2 == 0.0:
            continue
        if area2 < 0.0:  # normalize winding so edge functions are positive inside
            bx, cx = cx, bx
            by, cy = cy, by

        u0 = max(0, int(math.ceil(min(ax, min(bx, cx)) - 0.5)))
        u1 = min(width - 1, int(math.floor(max(ax, max(bx, cx)) - 0.5)))
        v0 = max(0, int(math.ceil(min(ay, min(by, cy)) - 0.5)))
        v1 = min(height - 1, int(math.floor(max(ay, max(by, cy)) - 0.5)))
        if u1 < u0 or v1 < v0:
            continue

        e0x, e0y = bx - ax, by - ay
        e1x, e1y = cx - bx, cy - by
        e2x, e2y = ax - cx, ay - cy
        # top-left tie rule (y grows downward): top = horizontal with +x
        # direction, left = edge heading upward
        tl0 = (e0y == 0.0 and e0x > 0.0) or e0y < 0.0
        tl1 = (e1y == 0.0 and e1x > 0.0) or e1y < 0.0
        tl2 = (e2y == 0.0 and e2x > 0.0) or e2y < 0.0

        for v in range(v0, v1 + 1):
            py = v + 0.5
            for u in range(u0, u1 + 1):
                if out[v, u]:
                    continue
                px = u + 0.5
                w0 = e0x * (py - ay) - e0y * (px - ax)
                w1 = e1x * (py - by) - e1y * (px - bx)
                w2 = e2x * (py - cy) - e2y * (px - cx)
                ok0 = w0 > 0.0 or (w0 == 0.0 and tl0)
                ok1 = w1 > 0.0 or (w1 == 0.0 and tl1)
                ok2 = w2 > 0.0 or (w2 == 0.0 and tl2)
                if ok0 and ok1 and ok2:
                    out[v, u] = True
    return out


def _projected_part_hulls(cam: CameraIntrinsics, pose: Pose, mesh: TriMesh,
                          z_near: float) -> tuple[np.ndarray, np.ndarray]:
    """Convex outlines of every mesh part fully in front of z_near.

    Returns concatenated hull vertices (M, 2) and part offsets (K+1,). A
    part with any vertex at or behind z_near is discarded whole, matching
    the hard rasterizer's per-triangle clipping policy for in-view robots.
    """
    if mesh.n_vertices == 0:
        return np.zeros((0, 2)), np.zeros(1, dtype=np.int64)
    cam_pts = pose.apply(mesh.vertices)
    z = cam_pts[:, 2]
    safe_z = np.where(z > z_near, z, 1.0)
    uv = np.stack(
        [cam.fx * cam_pts[:, 0] / safe_z + cam.cx,
         cam.fy * cam_pts[:, 1] / safe_z + cam.cy],
        axis=1,
    )
    hulls = []
    for a, b in mesh.part_ranges:
        if b - a < 3 or not np.all(z[a:b] > z_near):
            continue
        hull = _convex_hull(uv[a:b])
        if len(hull) >= 3:
            hulls.append(hull)
    if not hulls:
        return np.zeros((0, 2)), np.zeros(1, dtype=np.int64)
    starts = np.zeros(len(hulls) + 1, dtype=np.int64)
    starts[1:] = np.cumsum([len(h) for h in hulls])
    return np.vstack(hulls), starts


def render_soft_silhouette(cam: CameraIntrinsics, pose: Pose, mesh: TriMesh,
                           settings: RenderSettings = RenderSettings()) -> np.ndarray:
    """Differentiable-in-state soft silhouette, float64 (H, W) in [0, 1]."""
    pts, starts = _projected_part_hulls(cam, pose, mesh, settings.z_near)
    prod = np.ones((cam.height, cam.width))
    _soft_raster_hulls(pts, starts, cam.height, cam.width,
                       settings.support * settings.sigma, prod)
    return 1.0 - prod


def render_hard_silhouette(cam: CameraIntrinsics, pose: Pose, mesh: TriMesh,
                           z_near: float = 0.01) -> np.ndarray:
    """Binary silhouette: pixel centers covered by any projected triangle."""
    tri = _projected_triangles(cam, pose, mesh, z_near)
    return _hard_raster(tri, cam.height, cam.width)


def compute_moment(mask, i: int, j: int) -> float:
    """Image moment M_ij = sum_u sum_v u^i v^j mask(u, v), u = column index."""
    if i < 0 or j < 0:
        raise ParameterError("moment orders must be non-negative")
    arr = np.asarray(mask, dtype=np.float64)
    us = np.arange(arr.shape[1], dtype=np.float64) ** i
    vs = np.arange(arr.shape[0], dtype=np.float64) ** j
    return float(vs @ arr @ us)


def centroid(mask, eps: float = EMPTY_MASS_EPS) -> tuple[float, float]:
    """Silhouette centroid (M10/M00, M01/M00) in pixels.

    Raises EmptySilhouetteError when the mask mass M00 is at or below eps,
    which the estimator interprets as "robot not visible this frame".
    """
    arr = np.asarray(mask, dtype=np.float64)
    col_sums = arr.sum(axis=0)
    row_sums = arr.sum(axis=1)
    m00 = float(col_sums.sum())
    if m00 <= eps:
        raise EmptySilhouetteError(f"silhouette mass {m00:.3g} <= {eps:.3g}")
    m10 = float(np.arange(arr.shape[1], dtype=np.float64) @ col_sums)
    m01 = float(np.arange(arr.shape[0], dtype=np.float64) @ row_sums)
    return m10 / m00, m01 / m00


def silhouette_mass(mask) -> float:
    return float(np.asarray(mask, dtype=np.float64).sum())
