"""
Experiment configuration: a strict JSON document validated by
``ExperimentConfigSerializer`` and turned into the library objects the
commands need.
"""
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError

from .readout import NoiseSpec
from .reservoir import SequenceParams, SpinSystem
from .serializers import ExperimentConfigSerializer
from .tasks import BenchmarkSettings, TaskSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemConfig:
    n_input_spins: int
    couplings_ic: Optional[tuple]
    couplings_ij: Optional[tuple]
    coupling_seed: int
    coupling_min_hz: float
    coupling_max_hz: float


@dataclass(frozen=True)
class NoiseConfig:
    copies: int
    relative_std: float
    seed: int
    measurement_std: float
    function_copies: int
    function_relative_std: float


@dataclass(frozen=True)
class ReadoutConfig:
    bias: bool
    tolerance: Optional[float]


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    epsilon: float
    tau_seconds: float
    L: int
    M: int
    rotation_axis: str
    warmup_cycles: int
    task: str
    scheme: Optional[str]
    noise: NoiseConfig
    readout: ReadoutConfig
    output_dir: str
    seed: int

    def spin_system(self) -> SpinSystem:
        s = self.system
        if s.couplings_ic is not None:
            return SpinSystem(s.n_input_spins, s.couplings_ic, s.couplings_ij)
        return SpinSystem.default(
            seed=s.coupling_seed,
            n_input_spins=s.n_input_spins,
            coupling_range_hz=(s.coupling_min_hz, s.coupling_max_hz),
        )

    def sequence_params(self) -> SequenceParams:
        return SequenceParams(
            input_length=self.L,
            samples_per_input=self.M,
            sample_interval=self.tau_seconds,
            rotation_axis=self.rotation_axis,
            warmup_cycles=self.warmup_cycles,
        )

    def task_spec(self, name: Optional[str] = None) -> TaskSpec:
        return TaskSpec.from_name(name or self.task, self.scheme)

    @property
    def run_seed(self) -> int:
        """Seed handed to the benchmark runner; mixes the global and noise seeds."""
        return int(np.random.SeedSequence([self.seed, self.noise.seed]).generate_state(1)[0])

    def benchmark_settings(self, n_jobs: int = 1) -> BenchmarkSettings:
        n = self.noise
        return BenchmarkSettings(
            system=self.spin_system(),
            params=self.sequence_params(),
            epsilon=self.epsilon,
            noise=NoiseSpec(n.copies, n.relative_std, n.seed),
            function_noise=NoiseSpec(n.function_copies, n.function_relative_std, n.seed),
            measurement_std=n.measurement_std,
            bias=self.readout.bias,
            tolerance=self.readout.tolerance,
            n_jobs=n_jobs,
        )

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Apply top-level overrides (e.g. from command flags) and re-validate."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        return load_config_dict({**config_to_dict(self), **changes})


def flatten_errors(detail, prefix: str = ""):
    """DRF error detail -> ["system.couplings_ic: ...", ...]."""
    if isinstance(detail, dict):
        lines = []
        for key, value in detail.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            if key == "non_field_errors":
                path = prefix or "config"
            lines.extend(flatten_errors(value, path))
        return lines
    if isinstance(detail, (list, tuple)):
        lines = []
        for item in detail:
            lines.extend(flatten_errors(item, prefix))
        return lines
    return [f"{prefix or 'config'}: {detail}"]


def _tupled(values):
    return None if values is None else tuple(float(v) for v in values)


def load_config_dict(data) -> ExperimentConfig:
    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ValidationError(flatten_errors(serializer.errors))
    v = serializer.validated_data
    system = dict(v["system"])
    system["couplings_ic"] = _tupled(system["couplings_ic"])
    system["couplings_ij"] = _tupled(system["couplings_ij"])
    return ExperimentConfig(
        system=SystemConfig(**system),
        noise=NoiseConfig(**dict(v["noise"])),
        readout=ReadoutConfig(**dict(v["readout"])),
        **{k: v[k] for k in ("epsilon", "tau_seconds", "L", "M", "rotation_axis", "warmup_cycles",
                             "task", "scheme", "output_dir", "seed")},
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    data = asdict(config)
    for key in ("couplings_ic", "couplings_ij"):
        if data["system"][key] is not None:
            data["system"][key] = list(data["system"][key])
    return data


def config_to_json(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"


def parse_config(path=None) -> ExperimentConfig:
    """
    Read and validate a JSON experiment config. ``None`` or an empty file
    gives the default experiment. An unreadable file raises ``OSError``;
    malformed JSON and bad values raise ``ValidationError``.
    """
    if path is None:
        return load_config_dict({})
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        logger.info("config %s is empty; using defaults", path)
        return load_config_dict({})
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError({"config": f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})"})
    return load_config_dict(data)
