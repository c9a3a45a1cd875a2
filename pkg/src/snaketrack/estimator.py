"""Online state estimation over silhouette sequences.

Each frame runs: constant-velocity prediction of the base position, an EKF
update on the silhouette-centroid observation (Jacobian by central finite
differences through the renderer), a fixed number of Adam steps on the
squared mask difference, and a difference-quotient velocity update. Joint
angles and orientation are carried unchanged through prediction; the
measurement and refinement steps are what move them.

Empty-silhouette handling: if either the reference mask or the rendered
prediction has (near-)zero mass, the EKF update is skipped and only the
refinement runs; if the reference itself is empty the velocity is zeroed,
and if both are empty the frame passes through untouched.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptySilhouetteError,
    ParameterError,
    SingularInnovationError,
    UnobservableStateError,
)
from .geometry import CameraIntrinsics
from .gradients import FDSteps, centroid_jacobian, mask_loss, mask_loss_gradient
from .kinematics import RobotModel, reconstruct_mesh
from .render import RenderSettings, centroid, render_soft_silhouette
from .state import Belief, RobotState, state_to_vector, vector_to_state
from .validation import check_binary_mask


@dataclass(frozen=True)
class EstimatorConfig:
    """Tunables of the per-frame update.

    ``process_noise`` is either a scalar variance applied to every state
    component or a full D-vector; None means zero process noise (the
    prediction leaves the covariance unchanged). ``meas_noise_px`` of 0
    reproduces the plain gain formula K = S H^T (H S H^T)^-1, at the cost of
    a possibly singular innovation covariance.
    """

    refine_steps: int = 10
    refine_lr: float = 0.005
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    meas_noise_px: float = 2.0
    process_noise: float | tuple | None = None
    fd_steps: FDSteps = field(default_factory=FDSteps)
    render: RenderSettings = field(default_factory=RenderSettings)

    def __post_init__(self):
        if self.refine_steps < 0:
            raise ParameterError("refine_steps must be >= 0")
        if self.refine_lr <= 0:
            raise ParameterError("refine_lr must be positive")
        if self.meas_noise_px < 0:
            raise ParameterError("meas_noise_px must be >= 0")

    def process_noise_diag(self, dim: int) -> np.ndarray:
        if self.process_noise is None:
            return np.zeros(dim)
        arr = np.asarray(self.process_noise, dtype=np.float64)
        if arr.ndim == 0:
            arr = np.full(dim, float(arr))
        if arr.shape != (dim,):
            raise ParameterError(f"process_noise must be scalar or length {dim}")
        if arr.min() < 0:
            raise ParameterError("process noise variances must be >= 0")
        return arr


@dataclass(frozen=True)
class Observation:
    """Reference-mask centroid in pixels."""

    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])


def predict(belief: Belief, dt: float, cfg: EstimatorConfig) -> Belief:
    """Constant-velocity motion model: b += v*dt, theta and q carried unchanged."""
    if dt <= 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    pose = belief.mean.pose
    new_pose = replace(pose, translation=pose.translation + belief.velocity * dt)
    cov = belief.covariance + np.diag(cfg.process_noise_diag(belief.dim))
    return Belief(replace(belief.mean, pose=new_pose), cov, belief.velocity)


def kalman_update(x: np.ndarray, cov: np.ndarray, residual: np.ndarray,
                  jacobian: np.ndarray, meas_var: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear Kalman update on a flat state vector.

    S = H P H^T + meas_var*I, K = P H^T S^-1, x += K y, P = (I - K H) P
    (symmetrized). Separated from the belief wrapper so it can be used with
    arbitrary dimensions.
    """
    x = np.asarray(x, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    h = np.atleast_2d(np.asarray(jacobian, dtype=np.float64))
    y = np.atleast_1d(np.asarray(residual, dtype=np.float64))
    m = h.shape[0]
    s = h @ cov @ h.T + meas_var * np.eye(m)
    try:
        # K = P H^T S^-1 via a solve on S (symmetric)
        k = np.linalg.solve(s, h @ cov).T
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationError(
            "innovation covariance is singular; set a nonzero meas_noise_px"
        ) from exc
    x_new = x + k @ y
    cov_new = (np.eye(len(x)) - k @ h) @ cov
    cov_new = 0.5 * (cov_new + cov_new.T)
    return x_new, cov_new


def ekf_update(belief: Belief, obs: Observation, predicted: Observation,
               jacobian: np.ndarray, cfg: EstimatorConfig) -> Belief:
    """EKF measurement update on the centroid observation.

    The residual is obs - predicted, the mean is updated additively on the
    flat state vector and the quaternion block renormalized.
    """
    jac = np.asarray(jacobian, dtype=np.float64)
    if jac.shape != (2, belief.dim):
        raise ParameterError(f"jacobian must have shape (2, {belief.dim}), got {jac.shape}")
    y = obs.as_array() - predicted.as_array()
    x = state_to_vector(belief.mean)
    x_new, cov_new = kalman_update(x, belief.covariance, y, jac, cfg.meas_noise_px**2)
    return Belief(vector_to_state(x_new), cov_new, belief.velocity)


class _Adam:
    """Plain Adam on the flat state vector; fresh per frame."""

    def __init__(self, dim: int, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, x: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return x - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def refine(state: RobotState, ref_mask, model: RobotModel, cam: CameraIntrinsics,
           cfg: EstimatorConfig) -> RobotState:
    """Gradient refinement of the mean on the squared mask difference.

    Runs cfg.refine_steps Adam iterations with a fresh optimizer state; the
    quaternion is renormalized after every step. The covariance is not
    touched by refinement.
    """
    if cfg.refine_steps == 0:
        return state
    ref = check_binary_mask(ref_mask)
    opt = _Adam(state.dim, cfg.refine_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    current = state
    for _ in range(cfg.refine_steps):
        grad = mask_loss_gradient(current, ref, model, cam, cfg.render, cfg.fd_steps)
        x = opt.step(state_to_vector(current), grad)
        current = vector_to_state(x)
    return current


def update_velocity(b_now, b_prev, dt: float) -> np.ndarray:
    """Difference-quotient velocity from consecutive posterior positions."""
    if dt <= 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    return (np.asarray(b_now, dtype=np.float64) - np.asarray(b_prev, dtype=np.float64)) / dt


@dataclass(frozen=True)
class StepResult:
    """Posterior belief plus per-frame diagnostics."""

    belief: Belief
    residual: tuple[float, float] | None
    loss: float
    ekf_skipped: bool
    refined: bool


def step_detailed(belief: Belief, ref_mask, dt: float, model: RobotModel,
                  cam: CameraIntrinsics, cfg: EstimatorConfig) -> StepResult:
    """One full frame of the online loop; see the module docstring."""
    ref = check_binary_mask(ref_mask)
    if ref.shape != (cam.height, cam.width):
        raise ParameterError(
            f"reference mask shape {ref.shape} does not match camera ({cam.height}, {cam.width})"
        )
    b_prev = belief.mean.pose.translation
    pred = predict(belief, dt, cfg)

    ref_centroid: Observation | None = None
    try:
        cu, cv = centroid(ref)
        ref_centroid = Observation(cu, cv)
    except EmptySilhouetteError:
        pass

    pred_mesh = reconstruct_mesh(model, pred.mean.theta)
    pred_render = render_soft_silhouette(cam, pred.mean.pose, pred_mesh, cfg.render)
    pred_centroid: Observation | None = None
    try:
        cu, cv = centroid(pred_render)
        pred_centroid = Observation(cu, cv)
    except EmptySilhouetteError:
        pass

    residual = None
    ekf_skipped = True
    updated = pred
    if ref_centroid is not None and pred_centroid is not None:
        try:
            jac = centroid_jacobian(pred.mean, model, cam, cfg.render, cfg.fd_steps)
            updated = ekf_update(pred, ref_centroid, pred_centroid, jac, cfg)
            residual = (ref_centroid.u - pred_centroid.u, ref_centroid.v - pred_centroid.v)
            ekf_skipped = False
        except UnobservableStateError:
            updated = pred

    both_empty = ref_centroid is None and pred_centroid is None
    refined = False
    mean = updated.mean
    if not both_empty:
        mean = refine(mean, ref, model, cam, cfg)
        refined = cfg.refine_steps > 0

    if ref_centroid is None:
        velocity = np.zeros(3)
    else:
        velocity = update_velocity(mean.pose.translation, b_prev, dt)

    posterior = Belief(mean, updated.covariance, velocity)
    final_render = render_soft_silhouette(
        cam, mean.pose, reconstruct_mesh(model, mean.theta), cfg.render
    )
    loss = mask_loss(final_render, ref)
    return StepResult(posterior, residual, loss, ekf_skipped, refined)


def step(belief: Belief, ref_mask, dt: float, model: RobotModel,
         cam: CameraIntrinsics, cfg: EstimatorConfig) -> Belief:
    """Posterior belief after one frame (diagnostics discarded)."""
    return step_detailed(belief, ref_mask, dt, model, cam, cfg).belief


@dataclass(frozen=True)
class FrameEstimate:
    """One row of an estimation run."""

    frame: int
    t: float
    result: StepResult
    seconds: float


def run_sequence(initial: Belief, masks, timestamps, model: RobotModel,
                 cam: CameraIntrinsics, cfg: EstimatorConfig) -> list[FrameEstimate]:
    """Run the estimator over a mask sequence.

    ``timestamps`` are per-frame times in seconds; the first frame's dt is
    taken from the first timestamp gap (or that timestamp itself when it is
    positive and there is no predecessor).
    """
    timestamps = list(timestamps)
    estimates: list[FrameEstimate] = []
    belief = initial
    prev_t = None
    for i, mask in enumerate(masks):
        t = float(timestamps[i])
        if prev_t is None:
            dt = t if t > 0 else (
                float(timestamps[1]) - t if len(timestamps) > 1 and float(timestamps[1]) > t else 1.0
            )
        else:
            dt = t - prev_t
            if dt <= 0:
                raise ParameterError(f"timestamps must be strictly increasing at frame {i}")
        start = time.perf_counter()
        result = step_detailed(belief, mask, dt, model, cam, cfg)
        elapsed = time.perf_counter() - start
        belief = result.belief
        estimates.append(FrameEstimate(i, t, result, elapsed))
        prev_t = t
    return estimates
