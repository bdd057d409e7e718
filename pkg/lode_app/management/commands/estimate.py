from __future__ import annotations

import json

from django.core.management.base import BaseCommand

from lode_app.fitting import fit, load_views
from lode_app.formats.serializers import ObjectEstimateSerializer
from lode_app.management.commands._pipeline import ensure_parent, params_option, pipeline_errors


class Command(BaseCommand):
    help = (
        "Localise the object and estimate its width and height from two masks. "
        "Exit codes: 0 success, 1 I/O or parse error, 2 no object, 3 no converged circumference."
    )

    def add_arguments(self, parser):
        parser.add_argument("--calib", required=True, help="Calibration JSON with at least two cameras.")
        parser.add_argument("--mask1", required=True, help="PGM mask seen by the first camera.")
        parser.add_argument("--mask2", required=True, help="PGM mask seen by the second camera.")
        parser.add_argument("--params", help="FitParams JSON overriding the default schedule.")
        parser.add_argument("--out", help="Also write the JSON result to this file.")

    def handle(self, *args, **options):
        with pipeline_errors():
            cam1, cam2, mask1, mask2 = load_views(options["calib"], options["mask1"], options["mask2"])
            estimate = fit(cam1, cam2, mask1, mask2, params_option(options.get("params")))
            payload = json.dumps(ObjectEstimateSerializer(estimate).data)
            if options.get("out"):
                ensure_parent(options["out"]).write_text(payload + "\n", encoding="utf-8")
        self.stdout.write(payload)
