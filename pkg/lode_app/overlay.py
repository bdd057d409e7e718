"""Per-camera visualisation of the circumference model over the mask.

Red: point outside this camera's mask. Blue: inside. Green: the point's
circumference has converged (inside both masks).
"""
from __future__ import annotations

import numpy as np

from lode_app.camera import CalibratedCamera, project_points
from lode_app.fitting import CircumferenceSet, sample_model
from lode_app.mask import Mask, contains_points, round_half_away

RED = (255, 0, 0)
BLUE = (0, 0, 255)
GREEN = (0, 255, 0)
BACKGROUND_GRAY = 48
OBJECT_GRAY = 160


def render_overlay(
    camera: CalibratedCamera,
    mask: Mask,
    model: CircumferenceSet,
    points_per_circumference: int,
) -> np.ndarray:
    """RGB image (height, width, 3) of ``model`` seen from ``camera``."""
    gray = np.where(mask.data == 1, OBJECT_GRAY, BACKGROUND_GRAY).astype(np.uint8)
    image = np.repeat(gray[:, :, None], 3, axis=2)

    points = sample_model(model, points_per_circumference)
    converged = np.repeat(
        np.array([c.converged for c in model.circumferences])[:, None], points_per_circumference, axis=1
    ).ravel()
    uv, in_front = project_points(camera, points.reshape(-1, 3))
    inside = contains_points(mask, uv) & in_front

    with np.errstate(invalid="ignore"):
        cols = round_half_away(uv[:, 0])
        rows = round_half_away(uv[:, 1])
        visible = in_front & (cols >= 0) & (cols < mask.width) & (rows >= 0) & (rows < mask.height)

    # later layers overwrite earlier ones
    for color, selected in ((RED, ~inside & ~converged), (BLUE, inside & ~converged), (GREEN, converged)):
        pick = visible & selected
        image[rows[pick].astype(np.intp), cols[pick].astype(np.intp)] = color
    return image
