from __future__ import annotations

from django.db import models
from django.utils import timezone


class TimeStampedModel(models.Model):
    """Abstract base model with created/updated timestamps."""

    created_at: timezone.datetime = models.DateTimeField(auto_now_add=True)
    updated_at: timezone.datetime = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True


class EvaluationRun(TimeStampedModel):
    manifest: str = models.CharField(max_length=1024)
    params = models.JSONField(default=dict)
    configuration_count: int = models.PositiveIntegerField()
    success_count: int = models.PositiveIntegerField()
    lsr: float = models.FloatField(help_text="Localisation success ratio in percent")
    summary = models.JSONField(default=dict)

    class Meta:
        ordering = ["-created_at"]
        indexes = [models.Index(fields=["manifest"], name="lode_run_manifest_idx")]

    def __str__(self) -> str:
        return f"Run {self.pk} ({self.manifest}): LSR {self.lsr:.2f}%"


class ConfigurationOutcome(TimeStampedModel):
    run = models.ForeignKey(EvaluationRun, on_delete=models.CASCADE, related_name="outcomes")
    position: int = models.PositiveIntegerField(help_text="Row index in manifest order")
    config_id: str = models.CharField(max_length=128, db_index=True)
    success: bool = models.BooleanField()
    width_mm: float | None = models.FloatField(null=True, blank=True)
    height_mm: float | None = models.FloatField(null=True, blank=True)
    err_w_mm: float | None = models.FloatField(null=True, blank=True)
    err_h_mm: float | None = models.FloatField(null=True, blank=True)
    iterations: int | None = models.PositiveIntegerField(null=True, blank=True)
    reason: str = models.CharField(max_length=64, blank=True)
    tags = models.JSONField(default=list)

    class Meta:
        ordering = ["run", "position"]
        constraints = [
            models.UniqueConstraint(fields=["run", "position"], name="uniq_outcome_run_position"),
        ]

    def __str__(self) -> str:
        return f"{self.config_id}: {'localised' if self.success else self.reason}"
