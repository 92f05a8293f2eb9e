from django.db import models
from django.db.models import Q


class ExperimentRun(models.Model):
  class Status(models.TextChoices):
    RUNNING = "running", "Running"
    SUCCEEDED = "succeeded", "Succeeded"
    FAILED = "failed", "Failed"

  command = models.CharField(max_length=32)
  config = models.JSONField(help_text="Resolved experiment config; re-running it reproduces the artifacts.")
  seed = models.BigIntegerField()
  output_dir = models.CharField(max_length=512)
  status = models.CharField(max_length=16, choices=Status.choices, default=Status.RUNNING)
  created_at = models.DateTimeField(auto_now_add=True)
  finished_at = models.DateTimeField(null=True, blank=True)

  class Meta:
    ordering = ["-created_at", "-id"]

  def __str__(self):
    return f"{self.command} #{self.pk} ({self.status})"


class BenchmarkResult(models.Model):
  run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='results')
  task = models.CharField(max_length=64)
  scheme = models.CharField(max_length=1)
  m_used = models.PositiveIntegerField()
  mse = models.FloatField()
  digitized_errors = models.IntegerField(null=True, blank=True)
  training_mse = models.FloatField(default=0.0)
  baseline_mse = models.FloatField(default=0.0)
  effective_rank = models.PositiveIntegerField(default=0)

  class Meta:
    ordering = ["id"]
    constraints = [
      models.UniqueConstraint(fields=['run', 'task', 'scheme', 'm_used'], name='unique_result_per_run_task_m'),
      models.CheckConstraint(condition=Q(mse__gte=0), name='result_mse_gte_0'),
      models.CheckConstraint(condition=Q(m_used__gte=1), name='result_m_used_gte_1'),
    ]

  def __str__(self):
    errors = "-" if self.digitized_errors is None else self.digitized_errors
    return f"{self.task} M={self.m_used}: mse={self.mse:.3e} errors={errors}"
