"""Validation of the JSON file formats and shaping of JSON output.

Each input format (calibration, shape, noise, fit parameters, manifest) has
a serializer; ``load_validated`` ties file reading, strict JSON parsing and
validation together and folds failures into the caller's error class.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from rest_framework import serializers

from lode_app.exceptions import LodeError


def _reject_constant(token: str) -> Any:
    raise ValueError(f"non-finite number {token} is not permitted")


def _finite_float(token: str) -> float:
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(f"number {token} overflows to a non-finite value")
    return value


def _bounded_int(token: str) -> int:
    value = int(token)
    try:
        float(value)
    except OverflowError as exc:
        raise ValueError(f"integer of {len(token)} digits is out of range") from exc
    return value


def read_json(path: str | Path) -> Any:
    """Parse a UTF-8 JSON file, refusing NaN/Infinity literals and overflowing numbers."""
    with open(path, encoding="utf-8") as fh:
        return json.load(
            fh, parse_constant=_reject_constant, parse_float=_finite_float, parse_int=_bounded_int
        )


def load_validated(
    serializer_class: type[serializers.Serializer],
    path: str | Path,
    error_class: type[LodeError],
) -> dict[str, Any]:
    try:
        data = read_json(path)
    except (ValueError, UnicodeDecodeError) as exc:
        raise error_class(f"{path}: parse failure: {exc}") from exc
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise error_class(f"{path}: {json.dumps(serializer.errors, sort_keys=True)}")
    return serializer.validated_data


class IntrinsicsSerializer(serializers.Serializer):
    fx = serializers.FloatField()
    fy = serializers.FloatField()
    cx = serializers.FloatField()
    cy = serializers.FloatField()
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        if attrs["fx"] <= 0 or attrs["fy"] <= 0:
            raise serializers.ValidationError("focal lengths must be positive")
        if not (0 <= attrs["cx"] < attrs["width"] and 0 <= attrs["cy"] < attrs["height"]):
            raise serializers.ValidationError("principal point must lie inside the image")
        return attrs


class CameraSerializer(serializers.Serializer):
    id = serializers.CharField(max_length=64)
    intrinsics = IntrinsicsSerializer()
    rotation = serializers.ListField(child=serializers.FloatField(), min_length=9, max_length=9)
    translation = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3)


class CalibrationSerializer(serializers.Serializer):
    cameras = CameraSerializer(many=True, allow_empty=False)

    def validate_cameras(self, value: list[dict[str, Any]]) -> list[dict[str, Any]]:
        ids = [cam["id"] for cam in value]
        if len(set(ids)) != len(ids):
            raise serializers.ValidationError("camera ids must be unique")
        return value


class ShapeSerializer(serializers.Serializer):
    axis_base = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3)
    profile = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        min_length=2,
    )

    def validate_profile(self, value: list[list[float]]) -> list[list[float]]:
        heights = [h for h, _ in value]
        if heights[0] != 0:
            raise serializers.ValidationError("height offsets must start at 0")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise serializers.ValidationError("height offsets must be strictly increasing")
        if any(r < 0 for _, r in value):
            raise serializers.ValidationError("radii must be non-negative")
        return value


class NoiseSerializer(serializers.Serializer):
    boundary_flip_prob = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.0)
    dilation_px = serializers.IntegerField(default=0)
    seed = serializers.IntegerField(min_value=0, default=0)


class FitParamsSerializer(serializers.Serializer):
    L = serializers.IntegerField(min_value=1)
    dz_mm = serializers.FloatField()
    N = serializers.IntegerField(min_value=3)
    r_start_mm = serializers.FloatField()
    r_step_mm = serializers.FloatField()
    rho_mm = serializers.FloatField()

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        for key in ("dz_mm", "r_step_mm", "rho_mm"):
            if attrs[key] <= 0:
                raise serializers.ValidationError({key: "must be positive"})
        if attrs["r_start_mm"] < attrs["rho_mm"] + attrs["r_step_mm"]:
            raise serializers.ValidationError({"r_start_mm": "must be at least rho_mm + r_step_mm"})
        return attrs


class PathListField(serializers.ListField):
    """List of paths; a single path string is read as a one-element list."""

    def to_internal_value(self, data: Any) -> list[Any]:
        if isinstance(data, str):
            data = [data]
        return super().to_internal_value(data)


class ConfigurationSerializer(serializers.Serializer):
    id = serializers.CharField(max_length=128)
    calib = serializers.CharField()
    masks = serializers.ListField(child=serializers.CharField(), min_length=2, max_length=2)
    depth = PathListField(
        child=serializers.CharField(), min_length=1, max_length=2, required=False, allow_null=True
    )
    gt_w_mm = serializers.FloatField()
    gt_h_mm = serializers.FloatField()
    tags = serializers.ListField(child=serializers.CharField(), required=False, default=list)

    def validate_gt_w_mm(self, value: float) -> float:
        if value <= 0:
            raise serializers.ValidationError("ground-truth width must be positive")
        return value

    def validate_gt_h_mm(self, value: float) -> float:
        if value <= 0:
            raise serializers.ValidationError("ground-truth height must be positive")
        return value


class ManifestSerializer(serializers.Serializer):
    configurations = ConfigurationSerializer(many=True)


class ObjectEstimateSerializer(serializers.Serializer):
    centroid_mm = serializers.ListField(child=serializers.FloatField(), source="centroid")
    width_mm = serializers.FloatField(source="width")
    height_mm = serializers.FloatField(source="height")
    converged = serializers.IntegerField(source="converged_count")
    iterations = serializers.IntegerField()
