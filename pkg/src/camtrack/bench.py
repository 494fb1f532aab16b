"""OTB-style one-pass evaluation: overlap curves, precision, speed.

Success is the fraction of frames whose IoU strictly exceeds each
threshold (AUC = mean over the grid); precision is the fraction of
frames whose center error is within each pixel threshold, reported at
20 px. FPS covers track_frame calls only.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence as Seq

from .errors import SequenceError, TrackError
from .imaging import Rect, Sequence
from .tracker import TrackerConfig, track_sequence

SUCCESS_THRESHOLDS = tuple(i / 20 for i in range(21))  # 0, 0.05, ..., 1
PRECISION_THRESHOLDS = tuple(range(51))  # 0..50 px

# Published OTB50 one-pass results, echoed as reference lines in reports.
# "camshift-kalman-fpga" is the hardware design this toolkit models.
PUBLISHED_BASELINES = {
    "struck": {"precision_20px": 0.535, "mean_fps": 9.8},
    "tld": {"precision_20px": 0.519, "mean_fps": 24.4},
    "camshift-kalman-fpga": {"precision_20px": 0.484, "mean_fps": 309.91},
    "cxt": {"precision_20px": 0.454, "mean_fps": 13.9},
    "vtd": {"precision_20px": 0.444, "mean_fps": None},
    "cpf": {"precision_20px": 0.431, "mean_fps": None},
    "vts": {"precision_20px": 0.422, "mean_fps": 6.3},
    "lot": {"precision_20px": 0.407, "mean_fps": 0.5},
    "oab": {"precision_20px": 0.405, "mean_fps": 5.5},
    "kms": {"precision_20px": 0.389, "mean_fps": None},
}


def iou(a: Rect, b: Rect) -> float:
    """Intersection over union with exact integer areas."""
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def center_error(a: Rect, b: Rect) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


@dataclass(frozen=True)
class Curve:
    thresholds: tuple
    values: tuple
    auc: float


def success_curve(
    results: Seq[Rect], gt: Seq[Rect], thresholds: Optional[Seq[float]] = None
) -> Curve:
    """Fraction of frames with iou > t (strict) per threshold."""
    if len(results) != len(gt):
        raise ValueError(f"{len(results)} results vs {len(gt)} truth boxes")
    ts = tuple(thresholds) if thresholds is not None else SUCCESS_THRESHOLDS
    if not ts:
        raise ValueError("empty threshold grid")
    overlaps = [iou(r, g) for r, g in zip(results, gt)]
    values = tuple(sum(o > t for o in overlaps) / len(overlaps) for t in ts)
    return Curve(ts, values, sum(values) / len(values))


def precision_curve(
    results: Seq[Rect], gt: Seq[Rect], thresholds: Optional[Seq[float]] = None
) -> tuple[Curve, float]:
    """Fraction of frames with center error <= t; score reported at 20 px."""
    if len(results) != len(gt):
        raise ValueError(f"{len(results)} results vs {len(gt)} truth boxes")
    ts = tuple(thresholds) if thresholds is not None else PRECISION_THRESHOLDS
    if not ts:
        raise ValueError("empty threshold grid")
    errors = [center_error(r, g) for r, g in zip(results, gt)]
    values = tuple(sum(e <= t for e in errors) / len(errors) for t in ts)
    at_20 = sum(e <= 20 for e in errors) / len(errors)
    return Curve(ts, values, sum(values) / len(values)), at_20


def load_ground_truth(path) -> list[Rect]:
    """Read one 'x,y,w,h' line per frame (comma/tab/space separated),
    converting 1-based corner coordinates to 0-based."""
    boxes = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = re.split(r"[,\t ]+", line)
        if len(parts) != 4:
            raise SequenceError(f"{path}:{lineno}: expected x,y,w,h, got {line!r}")
        x, y, w, h = (math.floor(float(p) + 0.5) for p in parts)
        boxes.append(Rect(x - 1, y - 1, w, h))
    if not boxes:
        raise SequenceError(f"{path}: no ground-truth boxes")
    return boxes


@dataclass(eq=False)
class SequenceResult:
    name: str
    n_frames: int
    success: Curve
    precision: Curve
    precision_at_20: float
    mean_fps: float
    ious: list[float]
    errors: list[float]
    modes: list[str]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_frames": self.n_frames,
            "success_auc": self.success.auc,
            "success_thresholds": list(self.success.thresholds),
            "success_values": list(self.success.values),
            "precision_at_20px": self.precision_at_20,
            "precision_thresholds": list(self.precision.thresholds),
            "precision_values": list(self.precision.values),
            "mean_fps": self.mean_fps,
        }


@dataclass(eq=False)
class BenchReport:
    sequences: list[SequenceResult]
    failures: list[tuple[str, str]]
    mean_success_auc: float
    mean_precision_at_20: float
    mean_fps: float

    def to_dict(self) -> dict:
        return {
            "sequences": [s.to_dict() for s in self.sequences],
            "failures": [{"name": n, "error": e} for n, e in self.failures],
            "aggregate": {
                "mean_success_auc": self.mean_success_auc,
                "mean_precision_at_20px": self.mean_precision_at_20,
                "mean_fps": self.mean_fps,
            },
            "reference_baselines": PUBLISHED_BASELINES,
        }


def run_benchmark(
    sequences: Seq[tuple[Sequence, Seq[Rect], Rect]],
    config: TrackerConfig,
    names: Optional[Seq[str]] = None,
) -> BenchReport:
    """Track every (sequence, ground truth, init box) entry and score it.

    Per-sequence failures are recorded and the run continues. Frame 0
    reports the init box; FPS is wall time over track_frame calls only.
    """
    if not sequences:
        raise ValueError("benchmark needs at least one sequence")
    if names is None:
        names = [f"seq{i:03d}" for i in range(len(sequences))]
    results: list[SequenceResult] = []
    failures: list[tuple[str, str]] = []
    for name, (seq, gt, init_box) in zip(names, sequences):
        try:
            results.append(_run_one(name, seq, gt, init_box, config))
        except (TrackError, ValueError) as exc:
            failures.append((name, str(exc)))
    if results:
        mean_auc = sum(r.success.auc for r in results) / len(results)
        mean_p20 = sum(r.precision_at_20 for r in results) / len(results)
        mean_fps = sum(r.mean_fps for r in results) / len(results)
    else:
        mean_auc = mean_p20 = mean_fps = 0.0
    return BenchReport(results, failures, mean_auc, mean_p20, mean_fps)


def _run_one(name, seq, gt, init_box, config) -> SequenceResult:
    if len(gt) != len(seq):
        raise SequenceError(
            f"{name}: {len(gt)} truth boxes for {len(seq)} frames"
        )
    run = track_sequence(seq, init_box, config)
    boxes = [o.box for o in run.outputs]
    ious = [iou(r, g) for r, g in zip(boxes, gt)]
    errors = [center_error(r, g) for r, g in zip(boxes, gt)]
    success = success_curve(boxes, gt)
    precision, at_20 = precision_curve(boxes, gt)
    tracked = len(boxes) - 1  # frame 0 is initialization
    fps = tracked / run.track_seconds if run.track_seconds > 0 else float("inf")
    return SequenceResult(
        name=name,
        n_frames=len(boxes),
        success=success,
        precision=precision,
        precision_at_20=at_20,
        mean_fps=fps,
        ious=ious,
        errors=errors,
        modes=[o.mode for o in run.outputs],
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_FORMATS = ("csv", "json", "svg")

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_report(report: BenchReport, out_dir, formats=("csv", "json", "svg")) -> list[Path]:
    """Write report.json / frames.csv / success.svg + precision.svg."""
    unknown = set(formats) - set(_FORMATS)
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "json" in formats:
        path = out / "report.json"
        path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        written.append(path)
    if "csv" in formats:
        path = out / "frames.csv"
        rows = ["sequence,frame,iou,center_error,mode"]
        for sr in report.sequences:
            for i, (o, e, m) in enumerate(zip(sr.ious, sr.errors, sr.modes)):
                rows.append(f"{sr.name},{i},{o:.6f},{e:.3f},{m}")
        path.write_text("\n".join(rows) + "\n")
        written.append(path)
    if "svg" in formats:
        spath = out / "success.svg"
        spath.write_text(
            _svg_plot(
                title="Success plot (one-pass)",
                xlabel="overlap threshold",
                ylabel="success rate",
                series=[
                    (f"{sr.name} [AUC {sr.success.auc:.3f}]",
                     sr.success.thresholds, sr.success.values)
                    for sr in report.sequences
                ],
                x_max=1.0,
                reference_lines=[],
            )
        )
        written.append(spath)
        ppath = out / "precision.svg"
        ppath.write_text(
            _svg_plot(
                title="Precision plot (one-pass)",
                xlabel="center error threshold [px]",
                ylabel="precision",
                series=[
                    (f"{sr.name} [{sr.precision_at_20:.3f} @20px]",
                     sr.precision.thresholds, sr.precision.values)
                    for sr in report.sequences
                ],
                x_max=float(PRECISION_THRESHOLDS[-1]),
                reference_lines=[
                    (f"{name} {figures['precision_20px']:.1%} (published)",
                     figures["precision_20px"])
                    for name, figures in list(PUBLISHED_BASELINES.items())[:3]
                ],
            )
        )
        written.append(ppath)
    return written


def _svg_plot(title, xlabel, ylabel, series, x_max, reference_lines) -> str:
    width, height = 640, 420
    left, top, right, bottom = 60, 40, 200, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + pw * (x / x_max if x_max else 0.0)

    def sy(y):
        return top + ph * (1.0 - y)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="black"/>',
    ]
    for i in range(6):  # axis ticks at 0, 0.2, ... 1.0 of each range
        fx = i / 5
        x = left + pw * fx
        y = top + ph * (1 - fx)
        parts.append(
            f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 4}" stroke="black"/>'
            f'<text x="{x}" y="{top + ph + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{fx * x_max:g}</text>'
            f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>'
            f'<text x="{left - 8}" y="{y + 3}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{fx:g}</text>'
        )
    parts.append(
        f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11">{xlabel}</text>'
        f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 16 {top + ph / 2})">{ylabel}</text>'
    )
    legend_y = top + 8
    for ref_label, ref_value in reference_lines:
        y = sy(ref_value)
        parts.append(
            f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" '
            f'stroke="#888888" stroke-dasharray="6 4"/>'
            f'<text x="{left + pw + 6}" y="{legend_y}" font-family="sans-serif" '
            f'font-size="10" fill="#555555">-- {ref_label}</text>'
        )
        legend_y += 14
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
            f'<text x="{left + pw + 6}" y="{legend_y}" font-family="sans-serif" '
            f'font-size="10" fill="{color}">&#8212; {label}</text>'
        )
        legend_y += 14
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
