"""Command-line front end.

Subcommands:
  synth     render a synthetic mask dataset with ground truth
  estimate  run the online estimator over a dataset, writing trajectory.jsonl
  eval      compare a trajectory against ground truth, writing a metrics CSV
  plot      render a metrics report as an SVG line plot
  overlay   draw estimated skeletons over the dataset masks

Exit codes: 0 success, 2 configuration/validation error, 3 I/O error,
4 initialization failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import config as cfgmod
from . import dataset as ds
from .errors import DimensionError, EmptyMaskError, MaskIOError, ParameterError, UndefinedIoUError
from .estimator import run_sequence
from .geometry import Pose, UnitQuaternion
from .kinematics import RobotModel, LinkSpec, load_robot_model, reconstruct_mesh
from .masks import load_mask
from .metrics import evaluate_sequence, summary_text, threshold_soft, write_metrics_csv
from .plots import write_overlay, write_polyline_svg
from .render import render_hard_silhouette, render_soft_silhouette
from .state import Belief, default_initial_covariance, state_to_vector
from .synth import generate_trajectory, perturb_state, render_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INIT = 4


class InitializationError(Exception):
    """Estimator initial state could not be determined."""


def _require_file(path, what: str) -> str:
    if not os.path.isfile(str(path)):
        raise ParameterError(f"{what} not found: {path}")
    return str(path)


def _load_dataset_meta(dataset_dir):
    meta = os.path.join(str(dataset_dir), ds.META_NAME)
    if not os.path.isfile(meta):
        raise ParameterError(f"dataset meta not found: {meta}")
    return ds.read_meta(dataset_dir)


def _model_from_manifest(trajectory_path) -> RobotModel | None:
    path = manifest_path(trajectory_path)
    if not os.path.isfile(path):
        return None
    with open(path) as fh:
        doc = json.load(fh)
    links = tuple(
        LinkSpec(length=float(l["length"]), radius=float(l["radius"]), joint_axis=str(l["axis"]))
        for l in doc["model"]["links"]
    )
    return RobotModel(links=links, mesh_segments=int(doc["model"]["mesh_segments"]))


def _resolve_model(model_arg, trajectory_path) -> RobotModel:
    if model_arg is not None:
        return load_robot_model(_require_file(model_arg, "robot model file"))
    model = _model_from_manifest(trajectory_path)
    if model is None:
        raise ParameterError(
            "no --model given and no run manifest found next to the trajectory"
        )
    return model


def manifest_path(trajectory_out) -> str:
    base, _ = os.path.splitext(str(trajectory_out))
    return base + ".manifest.json"


def _write_manifest(path, doc) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise MaskIOError(f"cannot write run manifest {path}: {exc}") from exc


def cmd_synth(args) -> int:
    model = load_robot_model(_require_file(args.model, "robot model file"))
    traj_cfg, noise, cam = cfgmod.load_scene_config(
        _require_file(args.config, "scene config file"), model
    )
    states = generate_trajectory(model, traj_cfg)
    render_dataset(states, model, cam, noise, args.out, timestamps=traj_cfg.timestamps())
    print(f"wrote {traj_cfg.frames} frames to {args.out}")
    return EXIT_OK


def _initial_state(args, dataset_dir, init_spec, n_joints):
    first_frame = ds.frame_path(dataset_dir, 0)
    if args.init != "gt-perturbed":
        path = args.init
        if not os.path.isfile(path):
            raise InitializationError(f"initial-state file not found: {path}")
        with open(path) as fh:
            _, state = ds.state_from_record(json.load(fh))
        return state
    if not ds.has_gt(dataset_dir):
        detail = ""
        if os.path.isfile(first_frame) and not load_mask(first_frame).any():
            detail = " and the first mask is empty"
        raise InitializationError(
            f"cannot initialize: dataset has no gt.jsonl{detail}; pass --init FILE"
        )
    _, gt_states = ds.read_gt(dataset_dir)
    if gt_states[0].n_joints != n_joints:
        raise InitializationError(
            f"ground truth has {gt_states[0].n_joints} joints but the model has {n_joints}"
        )
    return perturb_state(
        gt_states[0], init_spec.trans_std, init_spec.angle_std, init_spec.quat_std,
        init_spec.seed,
    )


def cmd_estimate(args) -> int:
    model = load_robot_model(_require_file(args.model, "robot model file"))
    cfg, init_spec = cfgmod.load_estimator_config(
        _require_file(args.config, "estimator config file") if args.config else None
    )
    if args.refine_steps is not None:
        cfg = dataclasses.replace(cfg, refine_steps=args.refine_steps)
    if args.meas_noise_px is not None:
        cfg = dataclasses.replace(cfg, meas_noise_px=args.meas_noise_px)
    cam, timestamps = _load_dataset_meta(args.dataset)

    init_state = _initial_state(args, args.dataset, init_spec, model.n_joints)
    belief = Belief(init_state, default_initial_covariance(model.n_joints), np.zeros(3))

    started = datetime.datetime.now(datetime.timezone.utc)
    masks = ds.load_frames(args.dataset, len(timestamps))
    estimates = run_sequence(belief, masks, timestamps, model, cam, cfg)
    finished = datetime.datetime.now(datetime.timezone.utc)

    records = [
        ds.TrajectoryRecord(
            frame=e.frame,
            t=e.t,
            state=e.result.belief.mean,
            sigma_diag=np.diag(e.result.belief.covariance),
            residual=e.result.residual,
            loss=e.result.loss,
            seconds=e.seconds,
        )
        for e in estimates
    ]
    ds.write_trajectory(args.out, records)

    total_seconds = sum(e.seconds for e in estimates)
    manifest = {
        "tool": "snaketrack",
        "version": __version__,
        "started_utc": started.isoformat(),
        "finished_utc": finished.isoformat(),
        "dataset": str(args.dataset),
        "output": str(args.out),
        "frames": len(records),
        "mean_fps": (len(records) / total_seconds) if total_seconds > 0 else 0.0,
        "estimator": cfgmod.estimator_to_dict(cfg),
        "init": {
            "mode": args.init,
            "trans_std": init_spec.trans_std,
            "angle_std": init_spec.angle_std,
            "quat_std": init_spec.quat_std,
            "seed": init_spec.seed,
        },
        "model": {
            "mesh_segments": model.mesh_segments,
            "links": [
                {"length": l.length, "radius": l.radius, "axis": l.joint_axis}
                for l in model.links
            ],
        },
    }
    _write_manifest(manifest_path(args.out), manifest)
    fps = manifest["mean_fps"]
    print(f"estimated {len(records)} frames at {fps:.3f} FPS -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    records = ds.read_trajectory(_require_file(args.trajectory, "trajectory file"))
    cam, _ = _load_dataset_meta(args.dataset)
    if not ds.has_gt(args.dataset):
        raise ParameterError(f"dataset {args.dataset} has no gt.jsonl to evaluate against")
    gt_times, gt_states = ds.read_gt(args.dataset)
    if len(records) != len(gt_states):
        raise ParameterError(
            f"frame mismatch: trajectory has {len(records)}, ground truth has {len(gt_states)}"
        )
    model = _resolve_model(args.model, args.trajectory)

    estimates = [rec.state for rec in records]
    masks_pred = [
        threshold_soft(render_soft_silhouette(cam, st.pose, reconstruct_mesh(model, st.theta)))
        for st in estimates
    ]
    masks_gt = [
        render_hard_silhouette(cam, st.pose, reconstruct_mesh(model, st.theta))
        for st in gt_states
    ]
    metrics = evaluate_sequence(estimates, gt_states, masks_pred, masks_gt, gt_times)
    write_metrics_csv(metrics, args.out)
    sys.stdout.write(summary_text(metrics))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .metrics import read_metrics_csv

    cols = read_metrics_csv(_require_file(args.report, "metrics report"))
    series = {
        "pos_err_m": cols["pos_err_m"],
        "joint_err_rad": cols["joint_err_rad"],
        "iou": cols["iou"],
    }
    write_polyline_svg(series, args.out, title="per-frame estimation metrics",
                       x=cols["frame"] if len(cols["frame"]) else None)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_overlay(args) -> int:
    records = ds.read_trajectory(_require_file(args.trajectory, "trajectory file"))
    cam, timestamps = _load_dataset_meta(args.dataset)
    model = _resolve_model(args.model, args.trajectory)
    if len(records) > len(timestamps):
        raise ParameterError("trajectory has more frames than the dataset")
    os.makedirs(str(args.out), exist_ok=True)
    for rec in records:
        mask = load_mask(ds.frame_path(args.dataset, rec.frame))
        out_path = os.path.join(str(args.out), "overlay_%06d.png" % rec.frame)
        write_overlay(mask, model, rec.state, cam, out_path)
    print(f"wrote {len(records)} overlays to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snaketrack",
        description="Silhouette-based state estimation for serpentine robots",
    )
    parser.add_argument("--version", action="version", version=f"snaketrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic mask dataset")
    p.add_argument("config", help="scene config YAML")
    p.add_argument("--model", required=True, help="robot model YAML")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("estimate", help="run the estimator over a dataset")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--model", required=True, help="robot model YAML")
    p.add_argument("--config", default=None, help="estimator config YAML")
    p.add_argument("--out", required=True, help="output trajectory.jsonl path")
    p.add_argument("--refine-steps", type=int, default=None, help="override refinement steps")
    p.add_argument("--meas-noise-px", type=float, default=None,
                   help="override measurement noise std (pixels)")
    p.add_argument("--init", default="gt-perturbed",
                   help="'gt-perturbed' or a JSON state-record file")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", help="evaluate a trajectory against ground truth")
    p.add_argument("trajectory", help="trajectory.jsonl path")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.add_argument("--model", default=None, help="robot model YAML (default: from manifest)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="plot a metrics report as SVG")
    p.add_argument("report", help="metrics CSV path")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("overlay", help="draw skeleton overlays onto dataset masks")
    p.add_argument("trajectory", help="trajectory.jsonl path")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--model", default=None, help="robot model YAML (default: from manifest)")
    p.set_defaults(func=cmd_overlay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, DimensionError, EmptyMaskError, UndefinedIoUError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InitializationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INIT
    except (MaskIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
