"""Shared cameras, scenes and file helpers for the test suites."""
from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from lode_app.camera import CalibratedCamera, Intrinsics, dump_calibration, look_at
from lode_app.mask import Mask, save_mask
from lode_app.synth import DepthMap, RevolutionShape, render, save_depth

# two orthogonal 1280x720 views, 400 mm from the origin
FIXTURE_INTRINSICS = Intrinsics(fx=600.0, fy=600.0, cx=640.0, cy=360.0, width=1280, height=720)
# low-resolution views for batch runs
SMALL_INTRINSICS = Intrinsics(fx=150.0, fy=150.0, cx=80.0, cy=60.0, width=160, height=120)
# wide field of view: the whole default circumference band fits in the image
WIDE_INTRINSICS = Intrinsics(fx=50.0, fy=50.0, cx=63.5, cy=63.5, width=128, height=128)

INTRINSICS = {"fixture": FIXTURE_INTRINSICS, "small": SMALL_INTRINSICS, "wide": WIDE_INTRINSICS}
ELEVATION_MM = {"fixture": 0.0, "small": 60.0, "wide": 0.0}

CYLINDER = RevolutionShape.cylinder(radius=40.0, height=120.0)


def fixture_cameras(kind: str = "fixture") -> tuple[CalibratedCamera, CalibratedCamera]:
    z = ELEVATION_MM[kind]
    intrinsics = INTRINSICS[kind]
    return (
        look_at("cam1", (400.0, 0.0, z), (0.0, 0.0, z), intrinsics),
        look_at("cam2", (0.0, 400.0, z), (0.0, 0.0, z), intrinsics),
    )


@lru_cache(maxsize=None)
def cylinder_scene(kind: str = "fixture", backdrop_mm: float | None = None) -> tuple[Mask, Mask, DepthMap, DepthMap]:
    """Noiseless masks and depth maps of ``CYLINDER`` from both fixture cameras."""
    cam1, cam2 = fixture_cameras(kind)
    mask1, depth1 = render(cam1, CYLINDER, backdrop_mm)
    mask2, depth2 = render(cam2, CYLINDER, backdrop_mm)
    return mask1, mask2, depth1, depth2


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def write_scene(
    directory: str | Path,
    cameras: Sequence[CalibratedCamera],
    masks: Sequence[Mask],
    depths: Sequence[DepthMap] | None = None,
) -> dict[str, Any]:
    """Write calibration.json, mask_<id>.pgm and optionally depth_<id>.pgm."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    calib = directory / "calibration.json"
    dump_calibration(cameras, calib)
    mask_paths = []
    depth_paths = []
    for index, (camera, mask) in enumerate(zip(cameras, masks)):
        mask_path = directory / f"mask_{camera.id}.pgm"
        save_mask(mask, mask_path)
        mask_paths.append(mask_path)
        if depths is not None:
            depth_path = directory / f"depth_{camera.id}.pgm"
            save_depth(depths[index], depth_path)
            depth_paths.append(depth_path)
    return {"calib": calib, "masks": mask_paths, "depth": depth_paths}


def write_pgm_bytes(path: str | Path, header: bytes, payload: bytes) -> Path:
    path = Path(path)
    path.write_bytes(header + payload)
    return path


def single_pixel_mask(width: int, height: int, col: int, row: int) -> Mask:
    data = np.zeros((height, width), dtype=np.uint8)
    data[row, col] = 1
    return Mask(data)


def read_ppm(path: str | Path) -> np.ndarray:
    """Parse a P6 file written by ``write_ppm`` (no header comments)."""
    data = Path(path).read_bytes()
    magic, size, maxval, raster = data.split(b"\n", 3)
    assert magic == b"P6" and maxval == b"255"
    width, height = (int(v) for v in size.split())
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
