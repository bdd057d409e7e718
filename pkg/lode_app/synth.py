"""Ground-truth silhouettes and depth maps of solids of revolution.

Rays are cast through pixel centres (integer coordinates) against the
lateral conical frusta of a piecewise-linear profile and its two end disks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from django.conf import settings
from scipy.ndimage import maximum_filter, minimum_filter

from lode_app.camera import CalibratedCamera, Ray
from lode_app.exceptions import InputFormatError, MaskFormatError
from lode_app.formats.pgm import read_pgm, write_pgm
from lode_app.formats.serializers import NoiseSerializer, ShapeSerializer, load_validated
from lode_app.mask import Mask
from lode_app.parallel import ordered_map

logger = logging.getLogger(__name__)

HIT_EPS = 1e-9
RANGE_TOL = 1e-9
DEPTH_MAXVAL = 65535


@dataclass(frozen=True, eq=False)
class RevolutionShape:
    axis_base: np.ndarray  # (3,), z is the table height
    profile: np.ndarray  # (k, 2) rows of (height offset, radius)

    def __post_init__(self) -> None:
        base = np.array(self.axis_base, dtype=np.float64).reshape(3)
        profile = np.array(self.profile, dtype=np.float64)
        if profile.ndim != 2 or profile.shape[1] != 2 or len(profile) < 2:
            raise InputFormatError("profile needs at least 2 (height, radius) pairs")
        if profile[0, 0] != 0 or np.any(np.diff(profile[:, 0]) <= 0):
            raise InputFormatError("profile heights must start at 0 and strictly increase")
        if np.any(profile[:, 1] < 0):
            raise InputFormatError("profile radii must be non-negative")
        base.setflags(write=False)
        profile.setflags(write=False)
        object.__setattr__(self, "axis_base", base)
        object.__setattr__(self, "profile", profile)

    @property
    def true_width(self) -> float:
        return 2.0 * float(self.profile[:, 1].max())

    @property
    def true_height(self) -> float:
        return float(self.profile[-1, 0])

    @classmethod
    def cylinder(cls, radius: float, height: float, axis_base: Sequence[float] = (0.0, 0.0, 0.0)) -> RevolutionShape:
        return cls(axis_base=np.asarray(axis_base), profile=np.array([[0.0, radius], [height, radius]]))


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Camera-frame z per pixel in mm, 0 = no surface."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2 or np.any(data < 0):
            raise ValueError("depth must be a non-negative 2D grid")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class NoiseParams:
    boundary_flip_prob: float = 0.0
    dilation_px: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.boundary_flip_prob <= 1.0:
            raise InputFormatError("boundary_flip_prob must lie in [0, 1]")
        if self.seed < 0:
            raise InputFormatError("seed must be non-negative")


def load_shape(path: str | Path) -> RevolutionShape:
    data = load_validated(ShapeSerializer, path, InputFormatError)
    return RevolutionShape(axis_base=data["axis_base"], profile=data["profile"])


def load_noise(path: str | Path) -> NoiseParams:
    return NoiseParams(**load_validated(NoiseSerializer, path, InputFormatError))


def _cast(origin: np.ndarray, directions: np.ndarray, shape: RevolutionShape) -> np.ndarray:
    """Nearest hit distance for rays sharing one origin; inf where nothing is hit."""
    ox = origin[0] - shape.axis_base[0]
    oy = origin[1] - shape.axis_base[1]
    oz = origin[2]
    dx, dy, dz = directions[:, 0], directions[:, 1], directions[:, 2]
    best = np.full(len(directions), np.inf)
    if shape.profile[:, 1].max() <= 0:
        return best
    heights = shape.axis_base[2] + shape.profile[:, 0]
    radii = shape.profile[:, 1]

    def keep(t: np.ndarray, valid: np.ndarray) -> None:
        valid &= np.isfinite(t) & (t > HIT_EPS) & (t < best)
        best[valid] = t[valid]

    with np.errstate(divide="ignore", invalid="ignore"):
        for z0, z1, r0, r1 in zip(heights[:-1], heights[1:], radii[:-1], radii[1:]):
            if r0 == 0 and r1 == 0:
                continue
            slope = (r1 - r0) / (z1 - z0)
            q = r0 + slope * (oz - z0)
            kd = slope * dz
            a = dx * dx + dy * dy - kd * kd
            b = 2.0 * (ox * dx + oy * dy - q * kd)
            c = ox * ox + oy * oy - q * q
            disc = b * b - 4.0 * a * c
            root = np.sqrt(np.where(disc >= 0, disc, np.nan))
            linear = np.abs(a) < 1e-12
            candidates = (
                np.where(linear, -c / b, (-b - root) / (2.0 * a)),
                np.where(linear, np.nan, (-b + root) / (2.0 * a)),
            )
            for t in candidates:
                z = oz + t * dz
                valid = (z >= z0 - RANGE_TOL) & (z <= z1 + RANGE_TOL) & (q + kd * t >= -RANGE_TOL)
                keep(t, valid)

        for z_cap, r_cap in ((heights[0], radii[0]), (heights[-1], radii[-1])):
            if r_cap <= 0:
                continue
            t = (z_cap - oz) / dz
            hx = ox + t * dx
            hy = oy + t * dy
            keep(t, hx * hx + hy * hy <= r_cap * r_cap + RANGE_TOL)
    return best


def ray_shape_intersect(ray: Ray, shape: RevolutionShape) -> float | None:
    t = float(_cast(ray.origin, ray.direction.reshape(1, 3), shape)[0])
    return t if np.isfinite(t) else None


def _render_rows(camera: CalibratedCamera, shape: RevolutionShape, rows: range) -> np.ndarray:
    """Camera-frame hit depth for a block of image rows; inf where nothing is hit."""
    width = camera.intrinsics.width
    us, vs = np.meshgrid(np.arange(width, dtype=np.float64), np.asarray(rows, dtype=np.float64))
    dirs_cam = camera.pixel_directions(np.column_stack((us.ravel(), vs.ravel())))
    dirs_world = dirs_cam @ camera.pose.rotation
    t = _cast(camera.center, dirs_world, shape)
    return (t * dirs_cam[:, 2]).reshape(len(rows), width)


def _render(camera: CalibratedCamera, shape: RevolutionShape) -> np.ndarray:
    height = camera.intrinsics.height
    chunk = int(getattr(settings, "LODE", {}).get("RENDER_CHUNK_ROWS", 64))
    blocks = [range(start, min(start + chunk, height)) for start in range(0, height, chunk)]
    depth = np.vstack(ordered_map(lambda rows: _render_rows(camera, shape, rows), blocks))
    logger.debug("rendered camera %s: %d silhouette pixels", camera.id, int(np.isfinite(depth).sum()))
    return depth


def render(
    camera: CalibratedCamera,
    shape: RevolutionShape,
    backdrop_mm: float | None = None,
) -> tuple[Mask, DepthMap]:
    """Silhouette and depth from one pass of ray casting."""
    depth = _render(camera, shape)
    hit = np.isfinite(depth)
    background = 0.0 if backdrop_mm is None else float(backdrop_mm)
    return Mask(hit.astype(np.uint8)), DepthMap(np.where(hit, depth, background))


def render_mask(camera: CalibratedCamera, shape: RevolutionShape) -> Mask:
    return render(camera, shape)[0]


def render_depth(
    camera: CalibratedCamera,
    shape: RevolutionShape,
    backdrop_mm: float | None = None,
) -> DepthMap:
    """Depth of the nearest surface; pixels without one get ``backdrop_mm`` or 0."""
    return render(camera, shape, backdrop_mm)[1]


def save_depth(depth: DepthMap, path: str | Path) -> None:
    write_pgm(path, np.clip(np.rint(depth.data), 0, DEPTH_MAXVAL).astype(np.uint16), maxval=DEPTH_MAXVAL)


def load_depth(path: str | Path) -> DepthMap:
    image, maxval = read_pgm(path)
    if maxval != DEPTH_MAXVAL:
        raise MaskFormatError("unsupported maxval")
    return DepthMap(image.astype(np.float64))


def perturb_mask(mask: Mask, noise: NoiseParams) -> Mask:
    """Signed 3x3 morphology, then seeded flips of boundary-adjacent pixels."""
    data = mask.data.copy()
    for _ in range(abs(noise.dilation_px)):
        if noise.dilation_px > 0:
            data = maximum_filter(data, size=3, mode="constant", cval=0)
        else:
            data = minimum_filter(data, size=3, mode="nearest")
    if noise.boundary_flip_prob > 0:
        boundary = maximum_filter(data, size=3, mode="nearest") != minimum_filter(data, size=3, mode="nearest")
        # one draw per pixel in row-major order, whether or not it is flipped
        draws = np.random.default_rng(noise.seed).random(data.shape)
        flip = boundary & (draws < noise.boundary_flip_prob)
        data = np.where(flip, 1 - data, data).astype(np.uint8)
    return Mask(data)
