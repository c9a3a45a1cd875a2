"""Finite-difference gradients through the rendering pipeline.

Central differences over the flattened state vector are the reference
gradient backend: column k of a Jacobian is
(f(x + d_k e_k) - f(x - d_k e_k)) / (2 d_k) with a per-block step size.
Quaternion components are perturbed additively and renormalized before
rendering, matching how the estimator applies its own updates.

Probe renders are independent and run on a small thread pool (the
rasterization kernels release the GIL); results are accumulated per probe
index, so the output is identical regardless of scheduling order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EmptySilhouetteError, ParameterError, UnobservableStateError
from .geometry import CameraIntrinsics
from .kinematics import RobotModel, reconstruct_mesh
from .render import RenderSettings, centroid, render_soft_silhouette
from .state import RobotState, state_to_vector, vector_to_state
from .validation import check_binary_mask, check_same_shape, check_soft_mask

_executor: ThreadPoolExecutor | None = None


def _probe_pool() -> ThreadPoolExecutor | None:
    global _executor
    workers = min(os.cpu_count() or 1, 8)
    if workers < 2:
        return None
    if _executor is None:
        _executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="fd-probe")
    return _executor


@dataclass(frozen=True)
class FDSteps:
    """Per-block central-difference step sizes."""

    step_theta: float = 1e-3
    step_quat: float = 1e-3
    step_trans: float = 1e-3

    def __post_init__(self):
        if min(self.step_theta, self.step_quat, self.step_trans) <= 0:
            raise ParameterError("finite-difference steps must be positive")

    def per_component(self, n_joints: int) -> np.ndarray:
        return np.concatenate(
            [
                np.full(n_joints, self.step_theta),
                np.full(4, self.step_quat),
                np.full(3, self.step_trans),
            ]
        )


def _probe_renders(state: RobotState, model: RobotModel, cam: CameraIntrinsics,
                   settings: RenderSettings, steps: FDSteps):
    """All 2D probe renders around ``state``; yields (k, delta, mask_plus, mask_minus)."""
    x0 = state_to_vector(state)
    n = state.n_joints
    deltas = steps.per_component(n)
    dim = x0.size
    center_mesh = reconstruct_mesh(model, state.theta)

    def render_one(args):
        k, sign = args
        vec = x0.copy()
        vec[k] += sign * deltas[k]
        probe = vector_to_state(vec)
        mesh = center_mesh if k >= n else reconstruct_mesh(model, probe.theta)
        return render_soft_silhouette(cam, probe.pose, mesh, settings)

    jobs = [(k, sign) for k in range(dim) for sign in (+1.0, -1.0)]
    pool = _probe_pool()
    if pool is None:
        rendered = [render_one(job) for job in jobs]
    else:
        rendered = list(pool.map(render_one, jobs))
    for k in range(dim):
        yield k, deltas[k], rendered[2 * k], rendered[2 * k + 1]


def centroid_jacobian(state: RobotState, model: RobotModel, cam: CameraIntrinsics,
                      settings: RenderSettings = RenderSettings(),
                      steps: FDSteps = FDSteps()) -> np.ndarray:
    """2 x D Jacobian of the rendered silhouette centroid w.r.t. the state vector.

    Raises UnobservableStateError when the silhouette at the state or at any
    probe point is empty; the estimator falls back to skipping the
    measurement update for that frame.
    """
    mesh = reconstruct_mesh(model, state.theta)
    try:
        centroid(render_soft_silhouette(cam, state.pose, mesh, settings))
    except EmptySilhouetteError as exc:
        raise UnobservableStateError(f"silhouette empty at evaluation state: {exc}") from exc

    jac = np.zeros((2, state.dim))
    for k, delta, mask_plus, mask_minus in _probe_renders(state, model, cam, settings, steps):
        try:
            cu_p, cv_p = centroid(mask_plus)
            cu_m, cv_m = centroid(mask_minus)
        except EmptySilhouetteError as exc:
            raise UnobservableStateError(
                f"silhouette empty at probe of state component {k}: {exc}"
            ) from exc
        jac[0, k] = (cu_p - cu_m) / (2.0 * delta)
        jac[1, k] = (cv_p - cv_m) / (2.0 * delta)
    return jac


def mask_loss(pred, ref) -> float:
    """Sum of squared per-pixel differences between predicted and reference masks."""
    pred = check_soft_mask(pred, "pred")
    ref_arr = np.asarray(ref)
    if ref_arr.ndim != 2:
        raise DimensionError(f"ref must be 2-D, got ndim={ref_arr.ndim}")
    check_same_shape(pred, ref_arr)
    diff = pred - ref_arr.astype(np.float64)
    return float(np.dot(diff.ravel(), diff.ravel()))


def mask_loss_gradient(state: RobotState, ref, model: RobotModel, cam: CameraIntrinsics,
                       settings: RenderSettings = RenderSettings(),
                       steps: FDSteps = FDSteps()) -> np.ndarray:
    """D-vector gradient of the mask loss w.r.t. the state vector."""
    ref = check_binary_mask(ref).astype(np.float64)
    if ref.shape != (cam.height, cam.width):
        raise DimensionError(
            f"reference mask shape {ref.shape} does not match camera ({cam.height}, {cam.width})"
        )
    grad = np.zeros(state.dim)
    for k, delta, mask_plus, mask_minus in _probe_renders(state, model, cam, settings, steps):
        loss_p = mask_loss(mask_plus, ref)
        loss_m = mask_loss(mask_minus, ref)
        grad[k] = (loss_p - loss_m) / (2.0 * delta)
    return grad
