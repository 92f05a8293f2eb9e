import logging

from django.conf import settings
from django.core.exceptions import ValidationError

from qrc import artifacts, utils
from qrc.management.base import ExperimentCommand
from qrc.tasks import SCHEME_B, SCHEME_C, m_sweep, run_battery

logger = logging.getLogger(__name__)


def parse_m_values(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError({"sweep_m": f"expected comma-separated integers, got {text!r}"})
    if not values:
        raise ValidationError({"sweep_m": "at least one M value is required"})
    # repeated values would produce duplicate (task, M) rows
    return list(dict.fromkeys(values))


class Command(ExperimentCommand):
    help = "Train and evaluate linear readouts on the configured task or the full task battery"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--task", help="Task name, e.g. xor2, adder2_1, parity_1_3, multiply")
        parser.add_argument("--all", action="store_true", help="Run the 13-row task battery")
        parser.add_argument("--sweep-m", help="Comma-separated M' values, e.g. 2,3,4,6,11")

    def execute_experiment(self, *args, **options):
        if options.get("all") and options.get("task"):
            raise ValidationError({"task": "--task and --all are mutually exclusive"})

        config = self.load_config(options).with_overrides(task=options.get("task"))
        out = self.output_dir(config, options)
        self.start_run(options, config=config, out=out)

        m_values = parse_m_values(options["sweep_m"]) if options.get("sweep_m") else [config.M]
        bench = config.benchmark_settings(n_jobs=settings.QRC_N_JOBS)
        if options.get("all"):
            function_scheme = SCHEME_C if config.scheme == SCHEME_C else SCHEME_B
            logger.info("benchmark: battery (functions in scheme %s), M=%s, seed=%d",
                        function_scheme, m_values, config.run_seed)
            reports = run_battery(bench, m_values, seed=config.run_seed, function_scheme=function_scheme)
        else:
            task = config.task_spec()
            logger.info("benchmark: %s, M=%s, seed=%d", task, m_values, config.run_seed)
            reports = m_sweep(task, bench, m_values, seed=config.run_seed)
        utils.record_results(self.run, reports)

        metrics = artifacts.metrics_frame(reports)
        result = artifacts.RunArtifacts(output_dir=out)
        result.config = self.write_config_echo(out, config)
        result.metrics = artifacts.write_csv(out / "metrics.csv", "metrics", metrics)
        result.predictions = artifacts.write_csv(
            out / "predictions.csv", "predictions", artifacts.predictions_frame(reports)
        )
        table = artifacts.summary_table(metrics)
        result.summary = out / "summary.txt"
        result.summary.write_text(table + "\n", encoding="utf-8")

        self.stdout.write(table)
        self.stdout.write(self.style.SUCCESS(
            f"{len(reports)} result(s) written to {out}"
        ))
