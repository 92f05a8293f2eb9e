from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management.base import CommandError

from qrc import artifacts
from qrc.management.base import EXIT_VALIDATION, ExperimentCommand


class Command(ExperimentCommand):
    help = "Summarize metrics CSVs and write plot-ready data (MSE vs M, function surfaces)"

    uses_config = False

    def add_arguments(self, parser):
        parser.add_argument("metrics", nargs="*", help="metrics.csv files written by the benchmark command")
        parser.add_argument("--predictions", help="predictions.csv to turn into function-surface data")
        super().add_arguments(parser)

    def output_dir(self, config, options) -> Path:
        path = Path(options.get("out") or Path(settings.QRC_OUTPUT_DIR) / "report")
        path.mkdir(parents=True, exist_ok=True)
        return path

    def execute_experiment(self, *args, **options):
        frames = {}
        for name in options["metrics"]:
            frame = artifacts.read_csv(name, kind="metrics")
            if not frame.empty:
                frames[name] = frame
        if not frames:
            raise CommandError("no data: give at least one non-empty metrics CSV", returncode=EXIT_VALIDATION)

        out = self.output_dir(None, options)
        echo = {"metrics": list(options["metrics"]), "predictions": options.get("predictions")}
        self.start_run(options, echo=echo, out=out)

        for source, frame in frames.items():
            self.stdout.write(f"== {source}")
            self.stdout.write(artifacts.summary_table(frame))

        result = artifacts.RunArtifacts(output_dir=out)
        result.plot = artifacts.write_csv(out / "plot.csv", "plot", artifacts.plot_frame(frames))
        if options.get("predictions"):
            predictions = artifacts.read_csv(options["predictions"], kind="predictions")
            result.surface = artifacts.write_csv(out / "surface.csv", "surface", artifacts.surface_frame(predictions))

        combined = pd.concat(frames.values(), ignore_index=True)
        result.summary = out / "summary.txt"
        result.summary.write_text(artifacts.summary_table(combined) + "\n", encoding="utf-8")

        self.stdout.write(self.style.SUCCESS(
            f"Report for {combined['task'].nunique()} task(s) written to {out}"
        ))
