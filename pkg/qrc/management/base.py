import logging
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from qrc import utils
from qrc.exceptions import NumericalError, SchemaError
from qrc.experiment import config_to_dict, config_to_json, parse_config

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _messages(exc: ValidationError) -> str:
    if hasattr(exc, "message_dict"):
        return "; ".join(f"{field}: {msg}" for field, msgs in exc.message_dict.items() for msg in msgs)
    return "; ".join(exc.messages)


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing for the experiment commands: config loading, the run
    registry and the exception -> exit code mapping.
    """

    uses_config = True

    def add_arguments(self, parser):
        if self.uses_config:
            parser.add_argument("--config", help="JSON experiment config; omitted means the default experiment")
            parser.add_argument("--seed", type=int, help="Override the config's global seed")
        parser.add_argument("--out", help="Output directory (defaults to the config's output_dir)")
        parser.add_argument("--no-record", action="store_true", help="Do not store this run in the registry")

    def load_config(self, options):
        config = parse_config(options.get("config"))
        return config.with_overrides(seed=options.get("seed"), output_dir=options.get("out"))

    def output_dir(self, config, options) -> Path:
        out = options.get("out") or (config.output_dir if config is not None else settings.QRC_OUTPUT_DIR)
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def write_config_echo(self, out: Path, config) -> Path:
        path = out / "config.json"
        path.write_text(config_to_json(config), encoding="utf-8")
        return path

    def start_run(self, options, config=None, echo=None, seed=0, out=""):
        if config is not None:
            echo, seed = config_to_dict(config), config.seed
        self.run = utils.record_run(
            self.command_name, echo or {}, seed, out,
            enabled=utils.recording_enabled(options.get("no_record", False)),
        )
        return self.run

    @property
    def command_name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def handle(self, *args, **options):
        self.run = None
        try:
            self._execute(*args, **options)
        except ValidationError as exc:
            raise CommandError(f"invalid input: {_messages(exc)}", returncode=EXIT_VALIDATION)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            raise CommandError(f"numerical failure: {exc}", returncode=EXIT_NUMERICAL)
        except (OSError, SchemaError) as exc:
            raise CommandError(f"I/O failure: {exc}", returncode=EXIT_IO)

    def _execute(self, *args, **options):
        try:
            self.execute_experiment(*args, **options)
        except Exception:
            utils.finish_run(self.run, succeeded=False)
            raise
        utils.finish_run(self.run)

    def execute_experiment(self, *args, **options):
        raise NotImplementedError
