"""SVG line plots of per-frame metrics and mask/skeleton overlay images."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np
from PIL import Image, ImageDraw

from .errors import MaskIOError
from .geometry import CameraIntrinsics
from .kinematics import RobotModel, skeleton_points
from .masks import boundary
from .render import project_points
from .state import RobotState
from .validation import check_binary_mask

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_WIDTH, _HEIGHT = 640, 360
_MARGIN = 45


def write_polyline_svg(series: dict, out_path, title: str = "", x=None) -> None:
    """Plot each named series as one polyline; series are scaled independently.

    An empty series dict (or all-empty series) yields a valid SVG with axes
    only.
    """
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(_WIDTH), "height": str(_HEIGHT),
        "viewBox": f"0 0 {_WIDTH} {_HEIGHT}",
    })
    x0, y0 = _MARGIN, _HEIGHT - _MARGIN
    x1, y1 = _WIDTH - _MARGIN, _MARGIN
    ET.SubElement(svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x1), "y2": str(y0),
                                "stroke": "black", "stroke-width": "1"})
    ET.SubElement(svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x0), "y2": str(y1),
                                "stroke": "black", "stroke-width": "1"})
    if title:
        label = ET.SubElement(svg, "text", {"x": str(_WIDTH // 2), "y": "20",
                                            "text-anchor": "middle", "font-size": "14"})
        label.text = title

    drawn = 0
    for idx, (name, values) in enumerate(series.items()):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            continue
        xs = np.asarray(x, dtype=np.float64) if x is not None else np.arange(values.size, dtype=np.float64)
        x_span = xs.max() - xs.min() if xs.max() > xs.min() else 1.0
        v_max = values.max() if values.max() > 0 else 1.0
        px = x0 + (xs - xs.min()) / x_span * (x1 - x0)
        py = y0 - values / v_max * (y0 - y1)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _PALETTE[idx % len(_PALETTE)]
        ET.SubElement(svg, "polyline", {"points": pts, "fill": "none",
                                        "stroke": color, "stroke-width": "1.5"})
        legend = ET.SubElement(svg, "text", {"x": str(x0 + 6), "y": str(y1 + 14 * (drawn + 1)),
                                             "fill": color, "font-size": "11"})
        legend.text = f"{name} (max {values.max():.4g})"
        drawn += 1

    try:
        ET.ElementTree(svg).write(str(out_path), xml_declaration=True, encoding="unicode")
    except OSError as exc:
        raise MaskIOError(f"cannot write SVG {out_path}: {exc}") from exc


def skeleton_pixels(model: RobotModel, state: RobotState, cam: CameraIntrinsics) -> np.ndarray:
    """Projected chain joint positions, (N+1, 2) pixel coordinates."""
    pts = skeleton_points(model, state.theta)
    return project_points(cam, state.pose, pts)[:, :2]


def write_overlay(mask, model: RobotModel, state: RobotState, cam: CameraIntrinsics,
                  out_path) -> None:
    """Draw the mask boundary and the estimated skeleton onto the mask frame."""
    mask = check_binary_mask(mask)
    canvas = np.stack([np.where(mask, 90, 0).astype(np.uint8)] * 3, axis=-1)
    canvas[boundary(mask)] = (0, 200, 0)
    img = Image.fromarray(canvas, mode="RGB")
    draw = ImageDraw.Draw(img)
    px = skeleton_pixels(model, state, cam)
    if np.all(np.isfinite(px)):
        coords = [(float(u), float(v)) for u, v in px]
        draw.line(coords, fill=(255, 60, 60), width=2)
        for u, v in coords:
            draw.ellipse([u - 2.5, v - 2.5, u + 2.5, v + 2.5], fill=(255, 200, 0))
    try:
        img.save(str(out_path), format="PNG")
    except OSError as exc:
        raise MaskIOError(f"cannot write overlay {out_path}: {exc}") from exc
