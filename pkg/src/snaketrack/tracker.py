"""Scikit-learn style front end for the silhouette tracker.

``SilhouetteStateTracker`` exposes the online estimator with the estimator
API conventions (constructor hyperparameters, ``fit``/``predict``,
``get_params``/``set_params``) so runs compose with sklearn tooling such as
``clone`` and parameter sweeps. ``predict`` maps a (T, H, W) stack of binary
masks to a (T, D) array of flat state vectors.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .config import default_camera
from .errors import DimensionError, ParameterError
from .estimator import EstimatorConfig, run_sequence
from .geometry import CameraIntrinsics
from .gradients import FDSteps
from .kinematics import RobotModel, default_robot_model
from .render import RenderSettings
from .state import Belief, default_initial_covariance, state_to_vector, vector_to_state


class SilhouetteStateTracker(BaseEstimator):
    """Online robot-state tracker over binary silhouette sequences.

    Parameters
    ----------
    model : RobotModel or None
        Kinematic chain; None uses the default 6-link alternating
        pitch/yaw chain.
    camera : CameraIntrinsics or None
        Pinhole intrinsics; None uses the 640x360 default camera.
    init_state : array-like of shape (D,) or None
        Initial flat state vector. May instead be passed to ``predict``.
    refine_steps, refine_lr, meas_noise_px, process_noise :
        Per-frame update tunables (see EstimatorConfig).
    sigma_px : float
        Soft-silhouette edge scale in pixels.
    fd_step : float
        Central-difference step used for every state block.
    dt : float
        Frame spacing in seconds when ``predict`` gets no timestamps.
    """

    def __init__(self, model=None, camera=None, init_state=None, refine_steps=10,
                 refine_lr=0.005, meas_noise_px=2.0, process_noise=None,
                 sigma_px=1.0, fd_step=1e-3, dt=0.1):
        self.model = model
        self.camera = camera
        self.init_state = init_state
        self.refine_steps = refine_steps
        self.refine_lr = refine_lr
        self.meas_noise_px = meas_noise_px
        self.process_noise = process_noise
        self.sigma_px = sigma_px
        self.fd_step = fd_step
        self.dt = dt

    def fit(self, X=None, y=None):
        """Resolve defaults and validate parameters; the tracker learns nothing from X."""
        self.model_ = self.model if self.model is not None else default_robot_model()
        if not isinstance(self.model_, RobotModel):
            raise ParameterError("model must be a RobotModel or None")
        self.camera_ = self.camera if self.camera is not None else default_camera()
        if not isinstance(self.camera_, CameraIntrinsics):
            raise ParameterError("camera must be a CameraIntrinsics or None")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        self.config_ = EstimatorConfig(
            refine_steps=int(self.refine_steps),
            refine_lr=float(self.refine_lr),
            meas_noise_px=float(self.meas_noise_px),
            process_noise=self.process_noise,
            fd_steps=FDSteps(self.fd_step, self.fd_step, self.fd_step),
            render=RenderSettings(sigma=float(self.sigma_px)),
        )
        self.n_state_ = self.model_.n_joints + 7
        return self

    def _check_fitted(self):
        if not hasattr(self, "config_"):
            raise NotFittedError("this SilhouetteStateTracker is not fitted; call fit() first")

    def _masks_3d(self, X) -> np.ndarray:
        arr = np.asarray(X)
        if arr.ndim != 3:
            raise DimensionError(f"X must be a (T, H, W) mask stack, got shape {arr.shape}")
        if arr.shape[1] != self.camera_.height or arr.shape[2] != self.camera_.width:
            raise DimensionError(
                f"mask shape {arr.shape[1:]} does not match camera "
                f"({self.camera_.height}, {self.camera_.width})"
            )
        return arr != 0 if arr.dtype != np.bool_ else arr

    def predict(self, X, timestamps=None, init_state=None) -> np.ndarray:
        """Track through a mask stack; returns per-frame flat state vectors (T, D)."""
        self._check_fitted()
        masks = self._masks_3d(X)
        init = init_state if init_state is not None else self.init_state
        if init is None:
            raise ParameterError("an initial state is required (init_state)")
        init_vec = np.asarray(init, dtype=np.float64)
        if init_vec.shape != (self.n_state_,):
            raise DimensionError(
                f"init_state must have shape ({self.n_state_},), got {init_vec.shape}"
            )
        if timestamps is None:
            timestamps = [(i + 1) * float(self.dt) for i in range(len(masks))]
        belief = Belief(
            vector_to_state(init_vec),
            default_initial_covariance(self.model_.n_joints),
            np.zeros(3),
        )
        estimates = run_sequence(belief, masks, timestamps, self.model_, self.camera_,
                                 self.config_)
        return np.stack([state_to_vector(e.result.belief.mean) for e in estimates])

    def fit_predict(self, X, y=None, **kwargs) -> np.ndarray:
        return self.fit(X, y).predict(X, **kwargs)

    def score(self, X, y, timestamps=None) -> float:
        """Negative mean base-position error against ground-truth state vectors (T, D)."""
        pred = self.predict(X, timestamps=timestamps)
        truth = np.asarray(y, dtype=np.float64)
        if truth.shape != pred.shape:
            raise DimensionError(f"y must have shape {pred.shape}, got {truth.shape}")
        return -float(np.linalg.norm(pred[:, -3:] - truth[:, -3:], axis=1).mean())
