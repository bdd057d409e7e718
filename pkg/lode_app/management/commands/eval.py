from __future__ import annotations

from django.core.management.base import BaseCommand
from django.db import transaction

from lode_app.evaluation import Report, run_manifest, write_report
from lode_app.management.commands._pipeline import dump, ensure_parent, params_option, pipeline_errors
from lode_app.models import ConfigurationOutcome, EvaluationRun


class Command(BaseCommand):
    help = (
        "Run the fit over every configuration of a manifest and write the CSV report with its JSON summary. "
        "Failed configurations are data; the exit code is 0 unless the manifest itself is unusable."
    )

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="Manifest JSON listing the configurations.")
        parser.add_argument("--report", required=True, help="CSV path; the summary is written next to it as .json.")
        parser.add_argument("--params", help="FitParams JSON overriding the default schedule.")
        parser.add_argument(
            "--store",
            action="store_true",
            help="Also persist the run and its rows in the database.",
        )

    def handle(self, *args, **options):
        with pipeline_errors():
            report = run_manifest(options["manifest"], params_option(options.get("params")))
            written = write_report(report, ensure_parent(options["report"]))

        overall = report.summary()["overall"]
        payload = {"files": [str(p) for p in written], "lsr": overall["lsr"], "successes": overall["successes"]}
        if options.get("store"):
            run = self._store_run(report, options["manifest"])
            payload["run_id"] = run.pk
            self.stderr.write(self.style.SUCCESS(f"Stored evaluation run {run.pk}."))
        self.stdout.write(dump(payload))

    # --- helpers ---

    def _store_run(self, report: Report, manifest: str) -> EvaluationRun:
        summary = report.summary()
        with transaction.atomic():
            run = EvaluationRun.objects.create(
                manifest=str(manifest),
                params=report.params.as_dict(),
                configuration_count=summary["overall"]["count"],
                success_count=summary["overall"]["successes"],
                lsr=summary["overall"]["lsr"],
                summary=summary,
            )
            ConfigurationOutcome.objects.bulk_create(
                ConfigurationOutcome(
                    run=run,
                    position=position,
                    config_id=row.id,
                    success=row.success,
                    width_mm=row.width,
                    height_mm=row.height,
                    err_w_mm=row.err_w,
                    err_h_mm=row.err_h,
                    iterations=row.iterations,
                    reason=row.reason,
                    tags=list(row.tags),
                )
                for position, row in enumerate(report.rows)
            )
        return run
