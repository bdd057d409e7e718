from __future__ import annotations

from django.core.management.base import BaseCommand, CommandError

from lode_app.fitting import CircumferenceSet, fit_circumferences, init_model, load_views, localise
from lode_app.formats.pgm import write_ppm
from lode_app.management.commands._pipeline import dump, ensure_parent, params_option, pipeline_errors
from lode_app.overlay import render_overlay


class Command(BaseCommand):
    help = (
        "Draw the sampled circumference points over each mask: red outside the mask, "
        "blue inside, green for converged circumferences. Writes <out-prefix>_<camid>.ppm."
    )

    def add_arguments(self, parser):
        parser.add_argument("--calib", required=True, help="Calibration JSON with at least two cameras.")
        parser.add_argument("--mask1", required=True, help="PGM mask seen by the first camera.")
        parser.add_argument("--mask2", required=True, help="PGM mask seen by the second camera.")
        parser.add_argument("--out-prefix", required=True, dest="out_prefix", help="Output path prefix.")
        parser.add_argument("--params", help="FitParams JSON overriding the default schedule.")
        parser.add_argument(
            "--iteration",
            type=int,
            help="Show the model after this many passes (0 = initial model; default: final state).",
        )

    def handle(self, *args, **options):
        iteration = options.get("iteration")
        if iteration is not None and iteration < 0:
            raise CommandError("--iteration must be non-negative", returncode=1)

        with pipeline_errors():
            cam1, cam2, mask1, mask2 = load_views(options["calib"], options["mask1"], options["mask2"])
            params = params_option(options.get("params"))
            centroid = localise(cam1, cam2, mask1, mask2)

            snapshots: dict[int, CircumferenceSet] = {0: init_model(centroid, params)}

            def keep_snapshot(number: int, model: CircumferenceSet) -> None:
                if number == iteration:
                    snapshots[number] = model

            final, passes = fit_circumferences(centroid, cam1, cam2, mask1, mask2, params, on_pass=keep_snapshot)
            shown = final if iteration is None or iteration >= passes else snapshots[iteration]

            written: list[str] = []
            for camera, mask in ((cam1, mask1), (cam2, mask2)):
                path = ensure_parent(f"{options['out_prefix']}_{camera.id}.ppm")
                write_ppm(path, render_overlay(camera, mask, shown, params.points_per_circumference))
                written.append(str(path))

        if not final.converged:
            raise CommandError("no converged circumference", returncode=3)
        self.stdout.write(dump({
            "files": written,
            "iteration": min(iteration, passes) if iteration is not None else passes,
            "converged": len(shown.converged),
        }))
