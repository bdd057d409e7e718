from __future__ import annotations

import dataclasses
from pathlib import Path

from django.core.management.base import BaseCommand

from lode_app.camera import load_calibration
from lode_app.mask import save_mask
from lode_app.management.commands._pipeline import dump, pipeline_errors
from lode_app.synth import NoiseParams, load_noise, load_shape, perturb_mask, render, save_depth


class Command(BaseCommand):
    help = "Render mask_<camid>.pgm and depth_<camid>.pgm of a solid of revolution for every calibrated camera."

    def add_arguments(self, parser):
        parser.add_argument("--calib", required=True, help="Calibration JSON.")
        parser.add_argument("--shape", required=True, help="Shape JSON (axis_base + profile).")
        parser.add_argument("--outdir", required=True, help="Directory receiving the PGM files.")
        parser.add_argument("--noise", help="NoiseParams JSON applied to the masks.")
        parser.add_argument("--seed", type=int, help="Override the noise seed.")
        parser.add_argument(
            "--backdrop-mm",
            type=float,
            dest="backdrop_mm",
            help="Depth assigned to pixels without surface (default: 0, no surface).",
        )

    def handle(self, *args, **options):
        with pipeline_errors():
            cameras = load_calibration(options["calib"])
            shape = load_shape(options["shape"])
            noise = self._noise(options.get("noise"), options.get("seed"))
            outdir = Path(options["outdir"])
            outdir.mkdir(parents=True, exist_ok=True)

            written: list[str] = []
            for index, camera in enumerate(cameras):
                mask, depth = render(camera, shape, options.get("backdrop_mm"))
                if noise is not None:
                    mask = perturb_mask(mask, dataclasses.replace(noise, seed=noise.seed + index))
                mask_path = outdir / f"mask_{camera.id}.pgm"
                depth_path = outdir / f"depth_{camera.id}.pgm"
                save_mask(mask, mask_path)
                save_depth(depth, depth_path)
                written += [str(mask_path), str(depth_path)]
        self.stdout.write(dump({"files": written}))

    def _noise(self, path: str | None, seed: int | None) -> NoiseParams | None:
        if path is None and seed is None:
            return None
        noise = load_noise(path) if path else NoiseParams()
        return noise if seed is None else dataclasses.replace(noise, seed=seed)
