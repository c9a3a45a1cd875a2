"""snaketrack: monocular silhouette-based state estimation for serpentine robots.

Estimates joint angles and the 6-DoF base pose of a cylinder-link robot from
a sequence of binary silhouette masks by fusing an EKF over image-moment
centroids with gradient refinement through a soft silhouette renderer.
"""

__version__ = "0.1.0"

from .estimator import (
    Belief,
    EstimatorConfig,
    Observation,
    StepResult,
    ekf_update,
    predict,
    refine,
    run_sequence,
    step,
    step_detailed,
    update_velocity,
)
from .geometry import CameraIntrinsics, Pose, TriMesh, UnitQuaternion, quat_to_matrix
from .gradients import FDSteps, centroid_jacobian, mask_loss, mask_loss_gradient
from .kinematics import (
    LinkSpec,
    RobotModel,
    cylinder_mesh,
    default_robot_model,
    forward_kinematics,
    load_robot_model,
    reconstruct_mesh,
)
from .masks import BBox, dilate, iou, load_mask, mask_to_box, save_mask
from .metrics import SequenceMetrics, evaluate_sequence
from .render import (
    RenderSettings,
    centroid,
    compute_moment,
    project_points,
    render_hard_silhouette,
    render_soft_silhouette,
)
from .state import RobotState, state_to_vector, vector_to_state
from .synth import NoiseSpec, TrajectoryConfig, generate_trajectory, perturb_state, render_dataset
from .tracker import SilhouetteStateTracker

__all__ = [
    "__version__",
    "BBox",
    "Belief",
    "CameraIntrinsics",
    "EstimatorConfig",
    "FDSteps",
    "LinkSpec",
    "NoiseSpec",
    "Observation",
    "Pose",
    "RenderSettings",
    "RobotModel",
    "RobotState",
    "SequenceMetrics",
    "SilhouetteStateTracker",
    "StepResult",
    "TrajectoryConfig",
    "TriMesh",
    "UnitQuaternion",
    "centroid",
    "centroid_jacobian",
    "compute_moment",
    "cylinder_mesh",
    "default_robot_model",
    "dilate",
    "ekf_update",
    "evaluate_sequence",
    "forward_kinematics",
    "generate_trajectory",
    "iou",
    "load_mask",
    "load_robot_model",
    "mask_loss",
    "mask_loss_gradient",
    "mask_to_box",
    "perturb_state",
    "predict",
    "project_points",
    "quat_to_matrix",
    "refine",
    "reconstruct_mesh",
    "render_dataset",
    "render_hard_silhouette",
    "render_soft_silhouette",
    "run_sequence",
    "save_mask",
    "state_to_vector",
    "step",
    "step_detailed",
    "update_velocity",
    "vector_to_state",
]
