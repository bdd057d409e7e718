"""Binary segmentation masks: ingestion, membership and intensity centroid."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lode_app.exceptions import MaskFormatError, NoObjectError
from lode_app.formats.pgm import read_pgm, write_pgm

logger = logging.getLogger(__name__)

BINARIZE_THRESHOLD = 127


@dataclass(frozen=True, eq=False)
class Mask:
    """Row-major (height, width) grid, 1 = object."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.uint8)
        if data.ndim != 2 or data.size == 0:
            raise ValueError("mask data must be a non-empty 2D grid")
        if np.any(data > 1):
            raise ValueError("mask values must be 0 or 1")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def mass(self) -> int:
        return int(self.data.sum(dtype=np.int64))

    @classmethod
    def empty(cls, width: int, height: int) -> Mask:
        return cls(np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def full(cls, width: int, height: int) -> Mask:
        return cls(np.ones((height, width), dtype=np.uint8))


@dataclass(frozen=True)
class PixelCentroid:
    u: float
    v: float
    mass: int


def load_mask(path: str | Path) -> Mask:
    image, maxval = read_pgm(path)
    if maxval != 255:
        raise MaskFormatError("unsupported maxval")
    mask = Mask((image > BINARIZE_THRESHOLD).astype(np.uint8))
    logger.debug("loaded %dx%d mask from %s (%d object pixels)", mask.width, mask.height, path, mask.mass)
    return mask


def save_mask(mask: Mask, path: str | Path) -> None:
    write_pgm(path, mask.data * np.uint8(255), maxval=255)


def mask_centroid(mask: Mask) -> PixelCentroid:
    """Intensity centroid from integer image moments."""
    rows, cols = np.nonzero(mask.data)
    m00 = int(rows.size)
    if m00 == 0:
        raise NoObjectError()
    m10 = int(cols.sum(dtype=np.int64))
    m01 = int(rows.sum(dtype=np.int64))
    return PixelCentroid(u=m10 / m00, v=m01 / m00, mass=m00)


def round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def contains_points(mask: Mask, points: np.ndarray) -> np.ndarray:
    """Vectorised membership for (n, 2) real pixel coordinates."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    with np.errstate(invalid="ignore"):
        cols = round_half_away(points[:, 0])
        rows = round_half_away(points[:, 1])
        inside = (cols >= 0) & (cols < mask.width) & (rows >= 0) & (rows < mask.height)
    result = np.zeros(len(points), dtype=bool)
    result[inside] = mask.data[rows[inside].astype(np.intp), cols[inside].astype(np.intp)] == 1
    return result


def mask_contains(mask: Mask, point: tuple[float, float] | np.ndarray) -> bool:
    return bool(contains_points(mask, np.asarray(point, dtype=np.float64))[0])
