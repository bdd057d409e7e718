"""Batch evaluation over configuration manifests.

A configuration counts as localised when the fit produced a centroid; a fit
without converged circumferences is localised but has no dimensions.
Millimetre values are rounded to 3 decimals before aggregation so that the
CSV rows re-aggregate to the exact summary.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from lode_app.camera import CalibratedCamera, load_calibration
from lode_app.exceptions import (
    DegenerateBaselineError,
    InputFormatError,
    LodeError,
    ManifestError,
    NoConvergedCircumferenceError,
    NoObjectError,
)
from lode_app.fitting import FitParams, default_params, fit, load_views
from lode_app.formats.serializers import ManifestSerializer, load_validated
from lode_app.mask import Mask, load_mask
from lode_app.parallel import ordered_map
from lode_app.synth import DepthMap, load_depth

logger = logging.getLogger(__name__)

PERCENTILE_RULE = "linear interpolation between closest ranks"
CSV_HEADER = ("id", "success", "w_mm", "h_mm", "err_w_mm", "err_h_mm", "iterations", "reason")
SEGDD_CSV_HEADER = ("id", "camera", "success", "w_mm", "h_mm", "err_w_mm", "err_h_mm", "reason")


@dataclass(frozen=True)
class Configuration:
    id: str
    calib: Path
    masks: tuple[Path, Path]
    depth: tuple[Path, ...] | None
    ground_truth: tuple[float, float]
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if min(self.ground_truth) <= 0:
            raise ManifestError(f"{self.id}: ground-truth dimensions must be positive")


@dataclass(frozen=True)
class OutcomeRow:
    id: str
    success: bool
    width: float | None = None
    height: float | None = None
    err_w: float | None = None
    err_h: float | None = None
    iterations: int | None = None
    reason: str = ""
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SegddRow:
    id: str
    camera: str
    success: bool
    width: float | None = None
    height: float | None = None
    err_w: float | None = None
    err_h: float | None = None
    reason: str = ""
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ErrorStats:
    median: float
    min: float
    max: float
    q25: float
    q75: float

    def as_dict(self) -> dict[str, float]:
        return {"median": self.median, "min": self.min, "max": self.max, "q25": self.q25, "q75": self.q75}


@dataclass(frozen=True)
class Report:
    rows: tuple[OutcomeRow, ...]
    segdd_rows: tuple[SegddRow, ...] = ()
    params: FitParams = field(default_factory=default_params)

    def summary(self) -> dict[str, Any]:
        summary: dict[str, Any] = {
            "percentile_rule": PERCENTILE_RULE,
            "params": self.params.as_dict(),
            **summarise(self.rows),
        }
        if self.segdd_rows:
            summary["segdd"] = summarise(self.segdd_rows)
        return summary


def lsr(successes: int, total: int) -> float:
    """Localisation success ratio in percent, 2 decimals."""
    if total <= 0:
        raise ValueError("total must be positive")
    return round(100.0 * successes / total, 2)


def error_stats(values: Sequence[float]) -> ErrorStats:
    if len(values) == 0:
        raise ValueError("error statistics need at least one value")
    quantiles = np.percentile(np.asarray(values, dtype=np.float64), [0, 25, 50, 75, 100])
    q0, q25, q50, q75, q100 = (float(q) for q in quantiles)
    return ErrorStats(median=q50, min=q0, max=q100, q25=q25, q75=q75)


def segdd_estimate(mask: Mask, depth: DepthMap, camera: CalibratedCamera) -> tuple[float, float]:
    """Extent of the mask pixels back-projected with their depth, camera frame."""
    if mask.data.shape != depth.data.shape:
        raise InputFormatError("mask and depth map sizes differ")
    rows, cols = np.nonzero((mask.data == 1) & (depth.data > 0))
    if rows.size == 0:
        raise NoObjectError()
    k = camera.intrinsics
    z = depth.data[rows, cols]
    xs = (cols - k.cx) * z / k.fx
    ys = (rows - k.cy) * z / k.fy
    return float(xs.max() - xs.min()), float(ys.max() - ys.min())


def _mm(value: float) -> float:
    return round(float(value), 3)


def _group(rows: Iterable[OutcomeRow | SegddRow]) -> dict[str, Any]:
    rows = list(rows)
    err_w = [r.err_w for r in rows if r.err_w is not None]
    err_h = [r.err_h for r in rows if r.err_h is not None]
    return {
        "count": len(rows),
        "successes": sum(1 for r in rows if r.success),
        "lsr": lsr(sum(1 for r in rows if r.success), len(rows)),
        "width_error_mm": error_stats(err_w).as_dict() if err_w else None,
        "height_error_mm": error_stats(err_h).as_dict() if err_h else None,
    }


def summarise(rows: Sequence[OutcomeRow | SegddRow]) -> dict[str, Any]:
    tags = sorted({tag for row in rows for tag in row.tags})
    return {
        "overall": _group(rows),
        "tags": {tag: _group(r for r in rows if tag in r.tags) for tag in tags},
    }


def load_manifest(path: str | Path) -> list[Configuration]:
    path = Path(path)
    data = load_validated(ManifestSerializer, path, ManifestError)
    if not data["configurations"]:
        raise ManifestError("empty manifest")
    root = path.parent

    def resolve(entry: str) -> Path:
        return root / entry

    return [
        Configuration(
            id=entry["id"],
            calib=resolve(entry["calib"]),
            masks=(resolve(entry["masks"][0]), resolve(entry["masks"][1])),
            depth=tuple(resolve(p) for p in entry["depth"]) if entry.get("depth") else None,
            ground_truth=(entry["gt_w_mm"], entry["gt_h_mm"]),
            tags=tuple(entry["tags"]),
        )
        for entry in data["configurations"]
    ]


def _failure_reason(exc: Exception) -> str:
    if isinstance(exc, NoObjectError):
        return "no_object"
    if isinstance(exc, DegenerateBaselineError):
        return "degenerate_baseline"
    if isinstance(exc, OSError):
        return "io_error"
    return "invalid_input"


def evaluate_lode(config: Configuration, params: FitParams) -> OutcomeRow:
    gt_w, gt_h = config.ground_truth
    try:
        cam1, cam2, mask1, mask2 = load_views(config.calib, *config.masks)
        estimate = fit(cam1, cam2, mask1, mask2, params)
    except NoConvergedCircumferenceError as exc:
        logger.warning("%s: localised, no converged circumference", config.id)
        return OutcomeRow(
            id=config.id, success=True, iterations=exc.iterations,
            reason="no_converged_circumference", tags=config.tags,
        )
    except (LodeError, OSError) as exc:
        logger.warning("%s: %s", config.id, exc)
        return OutcomeRow(id=config.id, success=False, reason=_failure_reason(exc), tags=config.tags)
    width, height = _mm(estimate.width), _mm(estimate.height)
    return OutcomeRow(
        id=config.id,
        success=True,
        width=width,
        height=height,
        err_w=_mm(abs(width - gt_w)),
        err_h=_mm(abs(height - gt_h)),
        iterations=estimate.iterations,
        tags=config.tags,
    )


def evaluate_segdd(config: Configuration) -> list[SegddRow]:
    """One SegDD row per camera with a depth map."""
    if not config.depth:
        return []
    gt_w, gt_h = config.ground_truth
    rows: list[SegddRow] = []
    try:
        cameras = load_calibration(config.calib, min_cameras=len(config.depth))
    except (LodeError, OSError) as exc:
        logger.warning("%s (segdd): %s", config.id, exc)
        reason = _failure_reason(exc)
        return [
            SegddRow(id=config.id, camera=str(i), success=False, reason=reason, tags=config.tags)
            for i in range(len(config.depth))
        ]
    for camera, mask_path, depth_path in zip(cameras, config.masks, config.depth):
        try:
            width, height = segdd_estimate(load_mask(mask_path), load_depth(depth_path), camera)
        except (LodeError, OSError) as exc:
            logger.warning("%s (segdd, camera %s): %s", config.id, camera.id, exc)
            rows.append(SegddRow(
                id=config.id, camera=camera.id, success=False, reason=_failure_reason(exc), tags=config.tags,
            ))
            continue
        width, height = _mm(width), _mm(height)
        rows.append(SegddRow(
            id=config.id,
            camera=camera.id,
            success=True,
            width=width,
            height=height,
            err_w=_mm(abs(width - gt_w)),
            err_h=_mm(abs(height - gt_h)),
            tags=config.tags,
        ))
    return rows


def run_manifest(manifest: str | Path, params: FitParams | None = None, workers: int | None = None) -> Report:
    params = params or default_params()
    configurations = load_manifest(manifest)
    logger.info("evaluating %d configurations from %s", len(configurations), manifest)

    def evaluate(config: Configuration) -> tuple[OutcomeRow, list[SegddRow]]:
        return evaluate_lode(config, params), evaluate_segdd(config)

    results = ordered_map(evaluate, configurations, workers=workers)
    return Report(
        rows=tuple(row for row, _ in results),
        segdd_rows=tuple(seg for _, segs in results for seg in segs),
        params=params,
    )


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.3f}"


def write_report(report: Report, csv_path: str | Path) -> list[Path]:
    """Write the fit CSV, its JSON summary sidecar and the SegDD CSV when depth rows exist."""
    csv_path = Path(csv_path)
    written = [csv_path, csv_path.with_suffix(".json")]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in report.rows:
            writer.writerow([
                row.id, int(row.success), _fmt(row.width), _fmt(row.height),
                _fmt(row.err_w), _fmt(row.err_h), _fmt(row.iterations), row.reason,
            ])
    with open(written[1], "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if report.segdd_rows:
        segdd_path = csv_path.with_name(f"{csv_path.stem}_segdd.csv")
        written.append(segdd_path)
        with open(segdd_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SEGDD_CSV_HEADER)
            for seg in report.segdd_rows:
                writer.writerow([
                    seg.id, seg.camera, int(seg.success), _fmt(seg.width), _fmt(seg.height),
                    _fmt(seg.err_w), _fmt(seg.err_h), seg.reason,
                ])
    return written


def read_report_rows(csv_path: str | Path) -> tuple[OutcomeRow, ...]:
    """Parse a fit report CSV back into rows (tags are not part of the CSV)."""

    def number(text: str) -> float | None:
        return float(text) if text else None

    with open(csv_path, newline="", encoding="utf-8") as fh:
        return tuple(
            OutcomeRow(
                id=rec["id"],
                success=rec["success"] == "1",
                width=number(rec["w_mm"]),
                height=number(rec["h_mm"]),
                err_w=number(rec["err_w_mm"]),
                err_h=number(rec["err_h_mm"]),
                iterations=int(rec["iterations"]) if rec["iterations"] else None,
                reason=rec["reason"],
            )
            for rec in csv.DictReader(fh)
        )
