from django.conf import settings
from django.core.exceptions import ValidationError

from qrc import artifacts
from qrc.management.base import ExperimentCommand
from qrc.reservoir import ReservoirSimulator
from qrc.tasks import binary_streams


def parse_stream(text):
    """'1,-1,1,1' -> (1.0, -1.0, 1.0, 1.0); values are system inputs s' in [-1, 1]."""
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError({"stream": f"expected comma-separated numbers, got {text!r}"})


class Command(ExperimentCommand):
    help = "Simulate reservoir traces for every binary stream of length L (or one given stream)"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--stream", help="Single stream of system inputs, e.g. 1,-1,1,1")

    def execute_experiment(self, *args, **options):
        config = self.load_config(options)
        out = self.output_dir(config, options)
        self.start_run(options, config=config, out=out)

        streams = [parse_stream(options["stream"])] if options.get("stream") else binary_streams(config.L)
        simulator = ReservoirSimulator(config.spin_system(), config.sequence_params())
        traces = simulator.run_many(streams, config.epsilon, n_jobs=settings.QRC_N_JOBS)

        result = artifacts.RunArtifacts(output_dir=out)
        result.config = self.write_config_echo(out, config)
        result.traces = artifacts.write_csv(out / "traces.csv", "traces", artifacts.traces_frame(traces))

        self.stdout.write(self.style.SUCCESS(
            f"Simulated {len(traces)} stream(s) x {config.L * config.M} samples -> {result.traces}"
        ))
