import logging

from django.conf import settings
from django.db import DatabaseError, transaction
from django.utils import timezone

from .models import ExperimentRun, BenchmarkResult

logger = logging.getLogger(__name__)


def recording_enabled(no_record=False):
  return settings.QRC_RECORD_RUNS and not no_record


def record_run(command, config_echo, seed, output_dir, enabled=True):
  # Registry problems never fail the experiment itself
  if not enabled:
    return None
  try:
    return ExperimentRun.objects.create(
      command=command, config=config_echo, seed=seed, output_dir=str(output_dir),
    )
  except DatabaseError as exc:
    logger.warning("run registry unavailable, not recording: %s", exc)
    return None


def record_results(run, reports):
  if run is None:
    return []
  rows = [
    BenchmarkResult(
      run=run,
      task=r.task.name,
      scheme=r.scheme,
      m_used=r.m_used,
      mse=r.mse,
      digitized_errors=r.digitized_errors,
      training_mse=r.training_mse,
      baseline_mse=r.baseline_mse,
      effective_rank=r.effective_rank,
    )
    for r in reports
  ]
  try:
    with transaction.atomic():
      return BenchmarkResult.objects.bulk_create(rows)
  except DatabaseError as exc:
    logger.warning("could not record results for run %s: %s", run.pk, exc)
    return []


def finish_run(run, succeeded=True):
  if run is None:
    return
  run.status = ExperimentRun.Status.SUCCEEDED if succeeded else ExperimentRun.Status.FAILED
  run.finished_at = timezone.now()
  run.save(update_fields=["status", "finished_at"])
