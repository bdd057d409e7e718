from __future__ import annotations

import json
import shutil
import zlib
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from lode_app.camera import CalibratedCamera, Intrinsics, dump_calibration, look_at
from lode_app.mask import save_mask
from lode_app.management.commands._pipeline import dump, pipeline_errors
from lode_app.synth import NoiseParams, RevolutionShape, perturb_mask, render, save_depth

SUITE_CAMERA_CENTERS = {
    "cam1": (400.0, 0.0, 100.0),
    "cam2": (0.0, 400.0, 100.0),
}

SUITE_SHAPES = {
    "tumbler": [[0.0, 40.0], [120.0, 40.0]],
    "cup": [[0.0, 28.0], [95.0, 42.0]],
    "bottle": [[0.0, 35.0], [150.0, 35.0], [175.0, 15.0], [210.0, 13.0]],
}

SUITE_NOISE = {
    "clean": {"boundary_flip_prob": 0.0, "dilation_px": 0},
    "flip": {"boundary_flip_prob": 0.3, "dilation_px": 0},
    "dilate": {"boundary_flip_prob": 0.3, "dilation_px": 2},
}

SUITE_TARGET = (0.0, 0.0, 100.0)
BACKDROP_MM = 1000.0
CALIBRATION_FILE = "calibration.json"
MANIFEST_FILE = "manifest.json"


def derive_seed(seed: int, tag: str) -> int:
    """Independent, stable sub-seed per (suite seed, tag)."""
    return (int(seed) ^ zlib.crc32(tag.encode("utf-8"))) & 0xFFFFFFFF


class Command(BaseCommand):
    help = (
        "Generate a synthetic evaluation suite: calibration, masks and depth maps of container-like "
        "shapes at several noise levels, and the manifest tying them together. Deterministic for a "
        "fixed seed. Use --reset to remove a previously generated suite first."
    )

    def add_arguments(self, parser):
        parser.add_argument("--outdir", required=True, help="Suite directory.")
        parser.add_argument("--seed", type=int, default=0, help="Base seed of the mask noise.")
        parser.add_argument("--width", type=int, default=640, help="Image width in pixels.")
        parser.add_argument("--height", type=int, default=480, help="Image height in pixels.")
        parser.add_argument("--focal", type=float, default=500.0, help="Focal length in pixels.")
        parser.add_argument(
            "--reset",
            action="store_true",
            help="Delete previously generated suite files before writing new ones.",
        )

    def handle(self, *args, **options):
        if options["width"] < 1 or options["height"] < 1 or options["focal"] <= 0:
            raise CommandError("--width, --height and --focal must be positive", returncode=1)
        outdir = Path(options["outdir"])

        with pipeline_errors():
            if options.get("reset"):
                self.stderr.write(self.style.WARNING(f"Removing previous suite in {outdir}..."))
                self._reset_suite(outdir)
            outdir.mkdir(parents=True, exist_ok=True)

            cameras = self._cameras(options["width"], options["height"], options["focal"])
            dump_calibration(cameras, outdir / CALIBRATION_FILE)
            configurations = [
                self._configuration(outdir, cameras, shape_name, noise_name, options["seed"])
                for shape_name in SUITE_SHAPES
                for noise_name in SUITE_NOISE
            ]
            manifest = outdir / MANIFEST_FILE
            with open(manifest, "w", encoding="utf-8") as fh:
                json.dump({"configurations": configurations}, fh, indent=2)
                fh.write("\n")

        self.stderr.write(self.style.SUCCESS(f"Generated {len(configurations)} configurations."))
        self.stdout.write(dump({"manifest": str(manifest), "configurations": len(configurations)}))

    # --- helpers ---

    def _reset_suite(self, outdir: Path) -> None:
        for name in (CALIBRATION_FILE, MANIFEST_FILE):
            (outdir / name).unlink(missing_ok=True)
        for shape_name in SUITE_SHAPES:
            shutil.rmtree(outdir / shape_name, ignore_errors=True)

    def _cameras(self, width: int, height: int, focal: float) -> list[CalibratedCamera]:
        intrinsics = Intrinsics(
            fx=focal, fy=focal, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0, width=width, height=height
        )
        return [
            look_at(camera_id, center, SUITE_TARGET, intrinsics)
            for camera_id, center in SUITE_CAMERA_CENTERS.items()
        ]

    def _configuration(
        self,
        outdir: Path,
        cameras: list[CalibratedCamera],
        shape_name: str,
        noise_name: str,
        seed: int,
    ) -> dict:
        shape = RevolutionShape(axis_base=(0.0, 0.0, 0.0), profile=SUITE_SHAPES[shape_name])
        folder = outdir / shape_name / noise_name
        folder.mkdir(parents=True, exist_ok=True)

        masks: list[str] = []
        depths: list[str] = []
        for camera in cameras:
            tag = f"{shape_name}/{noise_name}/{camera.id}"
            mask, depth = render(camera, shape, BACKDROP_MM)
            noise = NoiseParams(**SUITE_NOISE[noise_name], seed=derive_seed(seed, tag))
            mask = perturb_mask(mask, noise)
            save_mask(mask, folder / f"mask_{camera.id}.pgm")
            save_depth(depth, folder / f"depth_{camera.id}.pgm")
            masks.append(f"{shape_name}/{noise_name}/mask_{camera.id}.pgm")
            depths.append(f"{shape_name}/{noise_name}/depth_{camera.id}.pgm")

        return {
            "id": f"{shape_name}-{noise_name}",
            "calib": CALIBRATION_FILE,
            "masks": masks,
            "depth": depths,
            "gt_w_mm": shape.true_width,
            "gt_h_mm": shape.true_height,
            "tags": [f"shape:{shape_name}", f"noise:{noise_name}"],
        }
