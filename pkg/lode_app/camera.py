"""Pinhole camera model.

World frame: calibration-board frame, z vertical up, millimetres.
Extrinsics are world->camera: ``x_cam = R @ X + t``. No lens distortion.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from lode_app.exceptions import BehindCameraError, CalibrationError, DegenerateBaselineError
from lode_app.formats.serializers import CalibrationSerializer, load_validated

logger = logging.getLogger(__name__)

EPS_DEPTH = 1e-6
ROTATION_TOL = 1e-9
MIN_RAY_ANGLE_DEG = 0.1


def _frozen_array(values: Iterable[float] | np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.fx, self.fy, self.cx, self.cy)):
            raise CalibrationError("intrinsics must be finite")
        if not (self.fx > 0 and self.fy > 0):
            raise CalibrationError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise CalibrationError("principal point must lie inside the image")


@dataclass(frozen=True, eq=False)
class CameraPose:
    rotation: np.ndarray  # (3, 3) world-to-camera
    translation: np.ndarray  # (3,) world-to-camera, mm

    def __post_init__(self) -> None:
        rotation = _frozen_array(self.rotation, (3, 3))
        translation = _frozen_array(self.translation, (3,))
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise CalibrationError("pose must be finite")
        orthonormal = np.abs(rotation.T @ rotation - np.eye(3)).max() <= ROTATION_TOL
        if not orthonormal or abs(np.linalg.det(rotation) - 1.0) > ROTATION_TOL:
            raise CalibrationError("invalid rotation")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation


@dataclass(frozen=True, eq=False)
class CalibratedCamera:
    intrinsics: Intrinsics
    pose: CameraPose
    id: str

    @property
    def center(self) -> np.ndarray:
        return self.pose.center

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        """World points (n, 3) to camera-frame points (n, 3)."""
        return np.asarray(points, dtype=np.float64) @ self.pose.rotation.T + self.pose.translation

    def pixel_directions(self, pixels: np.ndarray) -> np.ndarray:
        """Unit camera-frame directions (n, 3) through pixels (n, 2)."""
        pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
        k = self.intrinsics
        dirs = np.column_stack(
            ((pixels[:, 0] - k.cx) / k.fx, (pixels[:, 1] - k.cy) / k.fy, np.ones(len(pixels)))
        )
        return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        direction = _frozen_array(self.direction, (3,))
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise ValueError("ray direction must be a unit vector")
        object.__setattr__(self, "origin", _frozen_array(self.origin, (3,)))
        object.__setattr__(self, "direction", direction)

    def at(self, distance: float) -> np.ndarray:
        return self.origin + distance * self.direction


def project_points(camera: CalibratedCamera, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project world points (n, 3).

    Returns pixel coordinates (n, 2) and a mask of points in front of the
    camera; pixels of points behind the camera are NaN.
    """
    cam = camera.to_camera(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    depth = cam[:, 2]
    in_front = depth > EPS_DEPTH
    k = camera.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(in_front, depth, np.nan)
        uv = np.column_stack((k.fx * cam[:, 0] / safe + k.cx, k.fy * cam[:, 1] / safe + k.cy))
    return uv, in_front


def project(camera: CalibratedCamera, point: Sequence[float]) -> np.ndarray:
    uv, in_front = project_points(camera, np.asarray(point, dtype=np.float64).reshape(1, 3))
    if not in_front[0]:
        raise BehindCameraError()
    return uv[0]


def backproject_ray(camera: CalibratedCamera, pixel: Sequence[float]) -> Ray:
    direction_cam = camera.pixel_directions(np.asarray(pixel, dtype=np.float64))[0]
    direction = camera.pose.rotation.T @ direction_cam
    return Ray(origin=camera.center, direction=direction / np.linalg.norm(direction))


def triangulate(
    cam1: CalibratedCamera,
    cam2: CalibratedCamera,
    px1: Sequence[float],
    px2: Sequence[float],
) -> np.ndarray:
    """Midpoint of the common perpendicular between the two pixel rays."""
    ray1 = backproject_ray(cam1, px1)
    ray2 = backproject_ray(cam2, px2)
    d1, d2 = ray1.direction, ray2.direction
    sin_angle = np.linalg.norm(np.cross(d1, d2))
    if sin_angle < math.sin(math.radians(MIN_RAY_ANGLE_DEG)):
        raise DegenerateBaselineError()
    w0 = ray1.origin - ray2.origin
    b = float(d1 @ d2)
    d = float(d1 @ w0)
    e = float(d2 @ w0)
    denom = 1.0 - b * b
    s = (b * e - d) / denom
    t = (e - b * d) / denom
    return 0.5 * (ray1.at(s) + ray2.at(t))


def look_at(
    camera_id: str,
    center: Sequence[float],
    target: Sequence[float],
    intrinsics: Intrinsics,
    up: Sequence[float] = (0.0, 0.0, 1.0),
) -> CalibratedCamera:
    """Camera at ``center`` whose optical axis passes through ``target``.

    Image rows grow against ``up``.
    """
    center = np.asarray(center, dtype=np.float64)
    z_axis = np.asarray(target, dtype=np.float64) - center
    z_axis /= np.linalg.norm(z_axis)
    x_axis = np.cross(z_axis, np.asarray(up, dtype=np.float64))
    norm = np.linalg.norm(x_axis)
    if norm < 1e-12:
        raise CalibrationError("viewing direction is parallel to the up vector")
    x_axis /= norm
    y_axis = np.cross(z_axis, x_axis)
    rotation = np.vstack((x_axis, y_axis, z_axis))
    return CalibratedCamera(
        intrinsics=intrinsics,
        pose=CameraPose(rotation=rotation, translation=-rotation @ center),
        id=camera_id,
    )


def load_calibration(path: str | Path, min_cameras: int = 1) -> list[CalibratedCamera]:
    data = load_validated(CalibrationSerializer, path, CalibrationError)
    cameras = [
        CalibratedCamera(
            intrinsics=Intrinsics(**entry["intrinsics"]),
            pose=CameraPose(rotation=entry["rotation"], translation=entry["translation"]),
            id=entry["id"],
        )
        for entry in data["cameras"]
    ]
    if len(cameras) < min_cameras:
        raise CalibrationError(f"{path}: expected at least {min_cameras} cameras, found {len(cameras)}")
    logger.debug("loaded %d cameras from %s", len(cameras), path)
    return cameras


def dump_calibration(cameras: Sequence[CalibratedCamera], path: str | Path) -> None:
    payload = {
        "cameras": [
            {
                "id": cam.id,
                "intrinsics": {
                    "fx": cam.intrinsics.fx,
                    "fy": cam.intrinsics.fy,
                    "cx": cam.intrinsics.cx,
                    "cy": cam.intrinsics.cy,
                    "width": cam.intrinsics.width,
                    "height": cam.intrinsics.height,
                },
                "rotation": [float(v) for v in cam.pose.rotation.ravel()],
                "translation": [float(v) for v in cam.pose.translation],
            }
            for cam in cameras
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
