"""Sequence evaluation metrics: position error, joint error, mask IoU.

Per frame: Euclidean base-position error, mean absolute joint-angle error,
and IoU between the (already thresholded) predicted mask and the clean
ground-truth mask. The mean IoU treats a pair of empty masks as perfect
agreement (1.0) since the masks are identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, MaskIOError, UndefinedIoUError
from .masks import iou

CSV_HEADER = ["frame", "t", "pos_err_m", "joint_err_rad", "iou"]

SOFT_MASK_THRESHOLD = 0.5


def threshold_soft(mask) -> np.ndarray:
    """Binary mask from a soft render (>= 0.5 is robot)."""
    return np.asarray(mask, dtype=np.float64) >= SOFT_MASK_THRESHOLD


@dataclass(frozen=True)
class SequenceMetrics:
    """Per-frame metric arrays plus their means."""

    timestamps: np.ndarray
    pos_err: np.ndarray
    joint_err: np.ndarray
    iou: np.ndarray

    @property
    def mean_pos_err(self) -> float:
        return float(self.pos_err.mean())

    @property
    def mean_joint_err(self) -> float:
        return float(self.joint_err.mean())

    @property
    def mean_iou(self) -> float:
        return float(self.iou.mean())

    @property
    def n_frames(self) -> int:
        return len(self.pos_err)


def evaluate_sequence(estimates, gt, masks_pred, masks_gt, timestamps=None) -> SequenceMetrics:
    """Compare an estimated state sequence against ground truth."""
    estimates = list(estimates)
    gt = list(gt)
    masks_pred = list(masks_pred)
    masks_gt = list(masks_gt)
    n = len(gt)
    if not (len(estimates) == n and len(masks_pred) == n and len(masks_gt) == n):
        raise DimensionError(
            f"sequence lengths differ: estimates {len(estimates)}, gt {n}, "
            f"masks {len(masks_pred)}/{len(masks_gt)}"
        )
    if timestamps is None:
        timestamps = np.arange(n, dtype=np.float64)
    else:
        timestamps = np.asarray(timestamps, dtype=np.float64)
        if timestamps.shape != (n,):
            raise DimensionError("timestamps length must match the sequences")

    pos_err = np.zeros(n)
    joint_err = np.zeros(n)
    iou_vals = np.zeros(n)
    for i, (est, ref) in enumerate(zip(estimates, gt)):
        if est.n_joints != ref.n_joints:
            raise DimensionError(f"joint counts differ at frame {i}")
        pos_err[i] = float(np.linalg.norm(est.pose.translation - ref.pose.translation))
        joint_err[i] = float(np.mean(np.abs(est.theta - ref.theta)))
        try:
            iou_vals[i] = iou(masks_pred[i], masks_gt[i])
        except UndefinedIoUError:
            iou_vals[i] = 1.0  # both empty: identical masks
    return SequenceMetrics(timestamps, pos_err, joint_err, iou_vals)


def write_metrics_csv(metrics: SequenceMetrics, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for i in range(metrics.n_frames):
                writer.writerow([
                    i,
                    f"{metrics.timestamps[i]:.9g}",
                    f"{metrics.pos_err[i]:.9g}",
                    f"{metrics.joint_err[i]:.9g}",
                    f"{metrics.iou[i]:.9g}",
                ])
    except OSError as exc:
        raise MaskIOError(f"cannot write metrics report {path}: {exc}") from exc


def read_metrics_csv(path) -> dict[str, np.ndarray]:
    """Columns of a metrics report keyed by header name."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise MaskIOError(f"unexpected metrics header in {path}: {header}")
            rows = [row for row in reader if row]
    except OSError as exc:
        raise MaskIOError(f"cannot read metrics report {path}: {exc}") from exc
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(CSV_HEADER)}
    return cols


def summary_text(metrics: SequenceMetrics) -> str:
    return (
        f"frames: {metrics.n_frames}\n"
        f"mean position error [m]: {metrics.mean_pos_err:.6f}\n"
        f"mean joint error [rad]: {metrics.mean_joint_err:.6f}\n"
        f"mean IoU: {metrics.mean_iou:.6f}\n"
    )
