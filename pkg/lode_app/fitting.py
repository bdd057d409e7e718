"""Iterative 3D-2D shape fitting of stacked circumferences.

The object is localised by triangulating the intensity centroids of the two
masks. A band of horizontal circumferences is centred on that point; every
pass re-samples the unconverged circumferences one schedule step smaller and
freezes those whose projected points fall inside both masks. Width and
height come from the converged circumferences.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from lode_app.camera import CalibratedCamera, load_calibration, project_points, triangulate
from lode_app.exceptions import InputFormatError, NoConvergedCircumferenceError
from lode_app.formats.serializers import FitParamsSerializer, load_validated
from lode_app.mask import Mask, contains_points, load_mask, mask_centroid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitParams:
    num_circumferences: int
    height_step: float
    points_per_circumference: int
    radius_schedule: tuple[float, ...]
    min_radius: float

    def __post_init__(self) -> None:
        schedule = tuple(float(r) for r in self.radius_schedule)
        object.__setattr__(self, "radius_schedule", schedule)
        if self.num_circumferences < 1:
            raise InputFormatError("num_circumferences must be at least 1")
        if self.points_per_circumference < 3:
            raise InputFormatError("points_per_circumference must be at least 3")
        if not (self.height_step > 0 and self.min_radius > 0):
            raise InputFormatError("height_step and min_radius must be positive")
        if not schedule or any(b >= a for a, b in zip(schedule, schedule[1:])):
            raise InputFormatError("radius_schedule must be non-empty and strictly decreasing")
        if schedule[-1] != self.min_radius:
            raise InputFormatError("radius_schedule must end at min_radius")

    @classmethod
    def from_schedule(
        cls,
        num_circumferences: int,
        height_step: float,
        points_per_circumference: int,
        r_start: float,
        r_step: float,
        rho: float,
    ) -> FitParams:
        """Schedule r_start, r_start - r_step, ... down to the smallest value >= rho + r_step, then rho."""
        if r_step <= 0:
            raise InputFormatError("r_step must be positive")
        steps = math.floor((r_start - (rho + r_step)) / r_step + 1e-9)
        if steps < 0:
            raise InputFormatError("r_start must be at least rho + r_step")
        schedule = tuple(round(r_start - i * r_step, 9) for i in range(steps + 1)) + (rho,)
        return cls(
            num_circumferences=num_circumferences,
            height_step=height_step,
            points_per_circumference=points_per_circumference,
            radius_schedule=schedule,
            min_radius=rho,
        )

    def as_dict(self) -> dict[str, float | int]:
        return {
            "L": self.num_circumferences,
            "dz_mm": self.height_step,
            "N": self.points_per_circumference,
            "r_start_mm": self.radius_schedule[0],
            "rho_mm": self.min_radius,
            "schedule_length": len(self.radius_schedule),
        }


@dataclass(frozen=True)
class Circumference:
    radius: float
    height: float
    converged: bool
    schedule_index: int


@dataclass(frozen=True)
class CircumferenceSet:
    circumferences: tuple[Circumference, ...]
    center: tuple[float, float, float]

    @property
    def converged(self) -> tuple[Circumference, ...]:
        return tuple(c for c in self.circumferences if c.converged)


@dataclass(frozen=True)
class ObjectEstimate:
    centroid: tuple[float, float, float]
    width: float
    height: float
    converged_count: int
    iterations: int


PassHook = Callable[[int, CircumferenceSet], None]


def default_params() -> FitParams:
    return FitParams.from_schedule(
        num_circumferences=500,
        height_step=1.0,
        points_per_circumference=20,
        r_start=150.0,
        r_step=0.5,
        rho=1.0,
    )


def load_params(path: str | Path) -> FitParams:
    data = load_validated(FitParamsSerializer, path, InputFormatError)
    return FitParams.from_schedule(
        num_circumferences=data["L"],
        height_step=data["dz_mm"],
        points_per_circumference=data["N"],
        r_start=data["r_start_mm"],
        r_step=data["r_step_mm"],
        rho=data["rho_mm"],
    )


def load_views(
    calib: str | Path,
    mask1: str | Path,
    mask2: str | Path,
) -> tuple[CalibratedCamera, CalibratedCamera, Mask, Mask]:
    """First two calibrated cameras and their masks; each mask must match its camera's image size."""
    cameras = load_calibration(calib, min_cameras=2)
    masks = (load_mask(mask1), load_mask(mask2))
    for camera, mask in zip(cameras, masks):
        size = (camera.intrinsics.width, camera.intrinsics.height)
        if (mask.width, mask.height) != size:
            raise InputFormatError(
                f"mask is {mask.width}x{mask.height}, camera {camera.id} expects {size[0]}x{size[1]}"
            )
    return cameras[0], cameras[1], masks[0], masks[1]


def _band_heights(center_z: float, params: FitParams) -> np.ndarray:
    count = params.num_circumferences
    offsets = np.arange(1, count + 1, dtype=np.float64) - (count + 1) / 2.0
    return center_z + offsets * params.height_step


def _snapshot(
    center: np.ndarray,
    heights: np.ndarray,
    schedule: np.ndarray,
    index: np.ndarray,
    converged: np.ndarray,
) -> CircumferenceSet:
    return CircumferenceSet(
        circumferences=tuple(
            Circumference(
                radius=float(schedule[i]),
                height=float(z),
                converged=bool(done),
                schedule_index=int(i),
            )
            for i, z, done in zip(index, heights, converged)
        ),
        center=(float(center[0]), float(center[1]), float(center[2])),
    )


def init_model(centroid: Sequence[float], params: FitParams) -> CircumferenceSet:
    center = np.asarray(centroid, dtype=np.float64)
    count = params.num_circumferences
    return _snapshot(
        center,
        _band_heights(center[2], params),
        np.asarray(params.radius_schedule),
        np.zeros(count, dtype=np.intp),
        np.zeros(count, dtype=bool),
    )


def _circle_points(center_xy: np.ndarray, radii: np.ndarray, heights: np.ndarray, count: int) -> np.ndarray:
    """Points (k, count, 3) on k horizontal circles, first point at angle 0."""
    angles = 2.0 * np.pi * np.arange(count) / count
    radii = np.asarray(radii, dtype=np.float64)[:, None]
    xs = center_xy[0] + radii * np.cos(angles)
    ys = center_xy[1] + radii * np.sin(angles)
    zs = np.broadcast_to(np.asarray(heights, dtype=np.float64)[:, None], xs.shape)
    return np.stack((xs, ys, zs), axis=-1)


def sample_circumference(circ: Circumference, center_xy: Sequence[float], count: int) -> np.ndarray:
    if count < 3:
        raise ValueError("a circumference needs at least 3 points")
    return _circle_points(
        np.asarray(center_xy, dtype=np.float64), np.array([circ.radius]), np.array([circ.height]), count
    )[0]


def sample_model(model: CircumferenceSet, count: int) -> np.ndarray:
    """Points (L, count, 3) of every circumference at its current radius."""
    circs = model.circumferences
    return _circle_points(
        np.asarray(model.center[:2]),
        np.array([c.radius for c in circs]),
        np.array([c.height for c in circs]),
        count,
    )


def _membership(points: np.ndarray, camera: CalibratedCamera, mask: Mask) -> np.ndarray:
    """Per-point membership for points (..., 3); behind camera or out of bounds is outside."""
    flat = points.reshape(-1, 3)
    uv, in_front = project_points(camera, flat)
    return (contains_points(mask, uv) & in_front).reshape(points.shape[:-1])


def _eta(
    points: np.ndarray,
    cam1: CalibratedCamera,
    cam2: CalibratedCamera,
    mask1: Mask,
    mask2: Mask,
) -> np.ndarray:
    inside = _membership(points, cam1, mask1).astype(np.int64) + _membership(points, cam2, mask2)
    return inside.sum(axis=-1)


def verify_circumference(
    points: Sequence[Sequence[float]] | np.ndarray,
    cam1: CalibratedCamera,
    cam2: CalibratedCamera,
    mask1: Mask,
    mask2: Mask,
) -> int:
    batch = np.asarray(points, dtype=np.float64).reshape(1, -1, 3)
    return int(_eta(batch, cam1, cam2, mask1, mask2)[0])


def localise(cam1: CalibratedCamera, cam2: CalibratedCamera, mask1: Mask, mask2: Mask) -> np.ndarray:
    """3D centroid from the triangulated 2D intensity centroids."""
    c1 = mask_centroid(mask1)
    c2 = mask_centroid(mask2)
    centroid = triangulate(cam1, cam2, (c1.u, c1.v), (c2.u, c2.v))
    logger.debug("2D centroids (%.2f, %.2f) / (%.2f, %.2f) -> 3D %s", c1.u, c1.v, c2.u, c2.v, centroid)
    return centroid


def fit_circumferences(
    centroid: Sequence[float],
    cam1: CalibratedCamera,
    cam2: CalibratedCamera,
    mask1: Mask,
    mask2: Mask,
    params: FitParams,
    on_pass: PassHook | None = None,
) -> tuple[CircumferenceSet, int]:
    """Run the shrink loop; returns the final model and the number of passes."""
    center = np.asarray(centroid, dtype=np.float64)
    heights = _band_heights(center[2], params)
    schedule = np.asarray(params.radius_schedule)
    last = len(schedule) - 1
    count = params.points_per_circumference
    index = np.zeros(params.num_circumferences, dtype=np.intp)
    converged = np.zeros(params.num_circumferences, dtype=bool)
    exhausted = np.zeros(params.num_circumferences, dtype=bool)

    passes = 0
    while True:
        active = np.flatnonzero(~converged & ~exhausted)
        if active.size == 0:
            break
        passes += 1
        points = _circle_points(center[:2], schedule[index[active]], heights[active], count)
        fits = _eta(points, cam1, cam2, mask1, mask2) == 2 * count
        converged[active[fits]] = True
        failed = active[~fits]
        at_end = index[failed] == last
        exhausted[failed[at_end]] = True
        index[failed[~at_end]] += 1
        logger.debug("pass %d: %d/%d converged", passes, int(converged.sum()), len(converged))
        if on_pass is not None:
            on_pass(passes, _snapshot(center, heights, schedule, index, converged))

    return _snapshot(center, heights, schedule, index, converged), passes


def extract_dimensions(model: CircumferenceSet) -> tuple[float, float]:
    fitted = model.converged
    if not fitted:
        raise NoConvergedCircumferenceError(centroid=model.center)
    radius = max(c.radius for c in fitted)
    heights = [c.height for c in fitted]
    return 2.0 * radius, max(heights) - min(heights)


def fit(
    cam1: CalibratedCamera,
    cam2: CalibratedCamera,
    mask1: Mask,
    mask2: Mask,
    params: FitParams | None = None,
    on_pass: PassHook | None = None,
) -> ObjectEstimate:
    params = params or default_params()
    centroid = localise(cam1, cam2, mask1, mask2)
    model, passes = fit_circumferences(centroid, cam1, cam2, mask1, mask2, params, on_pass=on_pass)
    try:
        width, height = extract_dimensions(model)
    except NoConvergedCircumferenceError as exc:
        raise NoConvergedCircumferenceError(centroid=model.center, iterations=passes) from exc
    estimate = ObjectEstimate(
        centroid=model.center,
        width=width,
        height=height,
        converged_count=len(model.converged),
        iterations=passes,
    )
    logger.info(
        "fit: w=%.2f mm h=%.2f mm (%d converged, %d passes)", width, height, estimate.converged_count, passes
    )
    return estimate
