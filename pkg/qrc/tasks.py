"""
Benchmark tasks: input streams, targets, spatial multiplexing and the three
evaluation schemes.

Scheme A  binary tasks. One clean simulation is turned into two realizations
          with independent measurement noise; the first is augmented and
          trained on, the second is evaluated.
Scheme B  continuous tasks, leave-one-out over the functional inputs; the
          training rows are augmented, the held-out row is clean.
Scheme C  continuous tasks, train on every augmented row and evaluate on the
          clean rows.

Binary streams carry their inputs most-significant first. The adders read
positions (1, 2) as the first number and, for the 2-bit adder, (3, 4) as the
second.
"""
import logging
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError
from joblib import Parallel, delayed

from . import linalg, readout
from .readout import DesignMatrix, NoiseSpec
from .reservoir import ReservoirSimulator, SequenceParams, SpinSystem, signed_input

logger = logging.getLogger(__name__)

BINARY = "binary"
CONTINUOUS = "continuous"

SCHEME_A, SCHEME_B, SCHEME_C = "A", "B", "C"
SCHEMES = (SCHEME_A, SCHEME_B, SCHEME_C)

GRID_STEP = 0.125
FUNCTION_STREAM_LENGTH = 2

BINARY_KINDS = ("input_recognition", "parity", "xor", "nand", "adder1", "adder2")
CONTINUOUS_KINDS = ("multiply", "divide", "nonlinear1", "nonlinear2")

# rows of the task battery table, in order
BATTERY = (
    "xor2", "xor3", "xor4", "nand",
    "adder1_0", "adder1_1", "adder2_0", "adder2_1", "adder2_2",
    "multiply", "divide", "nonlinear1", "nonlinear2",
)
RECOGNITION_AND_PARITY = (
    "input_recognition_1", "input_recognition_2", "input_recognition_3", "input_recognition_4",
    "parity_1_3", "parity_2_3",
)

_NAME_PATTERNS = (
    (re.compile(r"^input_recognition_(\d+)$"), "input_recognition"),
    (re.compile(r"^parity_(\d+)_(\d+)$"), "parity"),
    (re.compile(r"^xor(\d+)$"), "xor"),
    (re.compile(r"^nand$"), "nand"),
    (re.compile(r"^adder1_(\d+)$"), "adder1"),
    (re.compile(r"^adder2_(\d+)$"), "adder2"),
    (re.compile(r"^(multiply|divide|nonlinear1|nonlinear2)$"), None),
)


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    arg: tuple = ()
    scheme: Optional[str] = None

    def __post_init__(self):
        if self.kind not in BINARY_KINDS + CONTINUOUS_KINDS:
            raise ValidationError({"task": f"unknown task kind {self.kind!r}"})
        object.__setattr__(self, "arg", tuple(int(a) for a in self.arg))
        scheme = self.scheme or (SCHEME_A if self.input_mode == BINARY else SCHEME_B)
        object.__setattr__(self, "scheme", scheme)
        self._validate()

    def _validate(self):
        kind, arg = self.kind, self.arg
        expected_arity = {"input_recognition": 1, "parity": 2, "xor": 1, "adder1": 1, "adder2": 1}.get(kind, 0)
        if len(arg) != expected_arity:
            raise ValidationError({"task": f"{kind} takes {expected_arity} parameter(s), got {arg}"})
        if kind == "xor" and arg[0] not in (2, 3, 4):
            raise ValidationError({"task": "xor k must be 2, 3 or 4"})
        if kind == "adder1" and arg[0] not in (0, 1):
            raise ValidationError({"task": "adder1 order must be 0 or 1"})
        if kind == "adder2" and arg[0] not in (0, 1, 2):
            raise ValidationError({"task": "adder2 order must be 0, 1 or 2"})
        if kind in ("input_recognition", "parity") and min(arg) < 1:
            raise ValidationError({"task": "stream positions are 1-based"})
        if kind == "parity" and arg[0] == arg[1]:
            raise ValidationError({"task": "parity needs two distinct positions"})
        if self.scheme not in SCHEMES:
            raise ValidationError({"scheme": f"scheme must be one of {SCHEMES}"})
        if self.input_mode == BINARY and self.scheme != SCHEME_A:
            raise ValidationError({"scheme": f"binary task {self.name} is evaluated with scheme A"})
        if self.input_mode == CONTINUOUS and self.scheme == SCHEME_A:
            raise ValidationError({"scheme": f"continuous task {self.name} needs scheme B or C"})

    @property
    def input_mode(self) -> str:
        return BINARY if self.kind in BINARY_KINDS else CONTINUOUS

    @property
    def binary_target(self) -> bool:
        return self.input_mode == BINARY

    @property
    def name(self) -> str:
        if self.kind == "input_recognition":
            return f"input_recognition_{self.arg[0]}"
        if self.kind == "parity":
            return f"parity_{self.arg[0]}_{self.arg[1]}"
        if self.kind == "xor":
            return f"xor{self.arg[0]}"
        if self.kind in ("adder1", "adder2"):
            return f"{self.kind}_{self.arg[0]}"
        return self.kind

    @property
    def positions_needed(self) -> int:
        """Minimum stream length the binary target reads."""
        if self.kind in ("input_recognition", "parity", "xor"):
            return max(self.arg)
        return {"nand": 2, "adder1": 2, "adder2": 4}.get(self.kind, FUNCTION_STREAM_LENGTH)

    def with_scheme(self, scheme) -> "TaskSpec":
        return TaskSpec(self.kind, self.arg, scheme)

    @classmethod
    def from_name(cls, name: str, scheme: Optional[str] = None) -> "TaskSpec":
        for pattern, kind in _NAME_PATTERNS:
            match = pattern.match(name or "")
            if match:
                if kind is None:
                    return cls(match.group(1), (), scheme)
                return cls(kind, tuple(int(g) for g in match.groups()), scheme)
        raise ValidationError({"task": f"unknown task {name!r}"})

    def __str__(self):
        return self.name


def binary_patterns(L: int):
    """All 2^L bit tuples in lexicographic order (all-zeros first)."""
    if L < 1:
        raise ValidationError({"L": "stream length must be >= 1"})
    return [tuple(bits) for bits in product((0, 1), repeat=L)]


def binary_streams(L: int):
    """Signed system inputs s' = 2b - 1 for every bit pattern."""
    return [tuple(signed_input(b) for b in bits) for bits in binary_patterns(L)]


def target_for(task: TaskSpec, inputs) -> float:
    inputs = tuple(inputs)
    if task.binary_target:
        if len(inputs) < task.positions_needed:
            raise ValidationError({"inputs": f"{task.name} reads {task.positions_needed} bits, got {len(inputs)}"})
        bits = [int(b) for b in inputs]
        if any(b not in (0, 1) for b in bits):
            raise ValidationError({"inputs": f"binary task inputs must be bits, got {inputs}"})
        kind, arg = task.kind, task.arg
        if kind == "input_recognition":
            return float(bits[arg[0] - 1])
        if kind == "parity":
            return float(bits[arg[0] - 1] ^ bits[arg[1] - 1])
        if kind == "xor":
            return float(sum(bits[: arg[0]]) % 2)
        if kind == "nand":
            return float(not (bits[0] and bits[1]))
        if kind == "adder1":
            return float(((bits[0] + bits[1]) >> arg[0]) & 1)
        first = 2 * bits[0] + bits[1]
        second = 2 * bits[2] + bits[3]
        return float(((first + second) >> arg[0]) & 1)

    if len(inputs) != 2:
        raise ValidationError({"inputs": f"{task.name} takes (s1, s2), got {len(inputs)} values"})
    s1, s2 = (float(s) for s in inputs)
    if task.kind == "multiply":
        return s1 * s2
    if task.kind == "divide":
        return s1 / (1.0 + s2)
    if task.kind == "nonlinear1":
        return s1 * s2 * (1.0 - s1)
    return s1 ** 2 + s2 ** 2


def continuous_grid(step: float = GRID_STEP, lo: float = 0.0, hi: float = 1.0):
    """Half-open grid lo, lo + step, ... below hi."""
    if not step > 0:
        raise ValidationError({"step": "grid step must be > 0"})
    if not lo < hi:
        raise ValidationError({"range": f"degenerate grid range [{lo}, {hi})"})
    count = int(np.floor((hi - lo) / step + 1e-9))
    if count < 1:
        raise ValidationError({"range": f"range [{lo}, {hi}) holds no step of {step}"})
    return [lo + k * step for k in range(count)]


def function_inputs(step: float = GRID_STEP):
    grid = continuous_grid(step, 0.0, 1.0)
    return [(s1, s2) for s1 in grid for s2 in grid]


def multiplex_expand(s1: float, s2: float):
    """The four sign patterns fed to the reservoir for one functional input."""
    return [(s1, s2), (-s1, s2), (s1, -s2), (-s1, -s2)]


@dataclass(frozen=True)
class Dataset:
    instances: tuple
    provenance: str

    @property
    def streams(self):
        return [stream for stream, _ in self.instances]

    @property
    def targets(self):
        return np.array([target for _, target in self.instances], dtype=np.float64)


@dataclass(frozen=True)
class InstanceResult:
    input: str
    target: float
    prediction: float


@dataclass(frozen=True)
class BenchmarkReport:
    task: TaskSpec
    m_used: int
    mse: float
    digitized_errors: Optional[int]
    per_instance: tuple = field(repr=False)
    training_mse: float = 0.0
    effective_rank: int = 0
    baseline_mse: float = 0.0
    rounds: int = 1

    @property
    def scheme(self) -> str:
        return self.task.scheme


@dataclass(frozen=True)
class BenchmarkSettings:
    """Everything a benchmark needs apart from the task, M' and seed."""

    system: SpinSystem
    params: SequenceParams
    epsilon: float
    noise: NoiseSpec = NoiseSpec()
    function_noise: NoiseSpec = NoiseSpec(copies=1000, relative_std=1e-2)
    measurement_std: float = readout.DEFAULT_RELATIVE_STD
    bias: bool = False
    tolerance: Optional[float] = None
    n_jobs: int = 1


def binary_dataset(task: TaskSpec, L: int) -> Dataset:
    patterns = binary_patterns(L)
    instances = tuple(
        (tuple(signed_input(b) for b in bits), target_for(task, bits)) for bits in patterns
    )
    return Dataset(instances, f"binary_streams(L={L}) -> {task.name}")


def function_dataset(task: TaskSpec, step: float = GRID_STEP) -> Dataset:
    instances = tuple(((s1, s2), target_for(task, (s1, s2))) for s1, s2 in function_inputs(step))
    return Dataset(instances, f"continuous_grid(step={step}, [0, 1))^2 -> {task.name}")


def _bits_label(stream):
    return "".join("1" if s > 0 else "0" for s in stream)


def _pair_label(pair):
    return f"{pair[0]:g}:{pair[1]:g}"


def _seeds(seed: int, n: int):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _fit_and_predict(train_design, train_targets, eval_values, noise, bias, tolerance):
    augmented, augmented_targets = readout.augment_noise(train_design, train_targets, noise)
    model = readout.train(augmented, augmented_targets, tolerance=tolerance, bias=bias)
    return model, model.predict_rows(eval_values)


class BenchmarkRunner:
    """
    Runs tasks against one reservoir configuration. Traces and noisy
    realizations are cached so that a battery or an M sweep simulates each
    stream only once.
    """

    def __init__(self, settings: BenchmarkSettings):
        self.settings = settings
        self.simulator = ReservoirSimulator(settings.system, settings.params)
        self._function_simulator = None
        self._traces = {}
        self._realizations = {}

    # -- simulation -----------------------------------------------------

    def _simulate(self, simulator, streams):
        missing = [s for s in dict.fromkeys(streams) if (simulator.params, s) not in self._traces]
        if missing:
            traces = simulator.run_many(missing, self.settings.epsilon, n_jobs=self.settings.n_jobs)
            for stream, trace in zip(missing, traces):
                self._traces[simulator.params, stream] = trace
        return [self._traces[simulator.params, s] for s in streams]

    @property
    def function_simulator(self):
        if self._function_simulator is None:
            p = self.settings.params
            params = SequenceParams(
                input_length=FUNCTION_STREAM_LENGTH,
                samples_per_input=p.samples_per_input,
                sample_interval=p.sample_interval,
                rotation_axis=p.rotation_axis,
                warmup_cycles=p.warmup_cycles,
            )
            self._function_simulator = ReservoirSimulator(self.settings.system, params)
        return self._function_simulator

    def binary_traces(self):
        return self._simulate(self.simulator, binary_streams(self.settings.params.L))

    def binary_realizations(self, m_used: int, seed: int):
        """Two noisy acquisitions of the clean binary design, plus the clean one."""
        key = (m_used, seed)
        if key not in self._realizations:
            clean = readout.assemble_design_matrix(
                self.binary_traces(), m_used=m_used,
                row_labels=[_bits_label(s) for s in binary_streams(self.settings.params.L)],
            )
            scale = self.settings.measurement_std * float(np.max(np.abs(clean.values), initial=0.0))
            realizations = []
            for s in _seeds(seed, 3)[:2]:
                values = clean.values
                if scale > 0:
                    values = values + np.random.default_rng(s).normal(0.0, scale, size=values.shape)
                realizations.append(DesignMatrix(values, m_used, clean.row_labels))
            self._realizations[key] = (clean, *realizations)
        return self._realizations[key]

    def function_design(self, m_used: int, step: float = GRID_STEP):
        """64 x (4 L M') design: the four multiplexed traces of each functional input side by side."""
        pairs = function_inputs(step)
        expanded = [multiplex_expand(s1, s2) for s1, s2 in pairs]
        streams = [tuple(float(v) for v in p) for group in expanded for p in group]
        traces = self._simulate(self.function_simulator, streams)
        parts = []
        for j in range(4):
            parts.append(readout.assemble_design_matrix(traces[j::4], m_used=m_used))
        return DesignMatrix.concat(parts, row_labels=[_pair_label(p) for p in pairs])

    # -- schemes --------------------------------------------------------

    def run(self, task: TaskSpec, m_used: Optional[int] = None, seed: int = 0) -> BenchmarkReport:
        M = self.settings.params.M
        m_used = M if m_used is None else int(m_used)
        if not 1 <= m_used <= M:
            raise ValidationError({"m_used": f"M' must lie in [1, {M}], got {m_used}"})
        logger.info("benchmark %s (scheme %s, M=%d, seed=%d)", task.name, task.scheme, m_used, seed)

        if task.scheme == SCHEME_A:
            report = self._scheme_a(task, m_used, seed)
        elif task.scheme == SCHEME_B:
            report = self._scheme_b(task, m_used, seed)
        else:
            report = self._scheme_c(task, m_used, seed)

        logger.info("benchmark %s done: mse=%.4e errors=%s", task.name, report.mse, report.digitized_errors)
        return report

    def _scheme_a(self, task, m_used, seed):
        L = self.settings.params.L
        if task.positions_needed > L:
            raise ValidationError({"task": f"{task.name} reads {task.positions_needed} positions but L={L}"})
        dataset = binary_dataset(task, L)
        targets = dataset.targets
        _, learn, held = self.binary_realizations(m_used, seed)
        noise = NoiseSpec(self.settings.noise.copies, self.settings.noise.relative_std, _seeds(seed, 3)[2])

        model, predictions = _fit_and_predict(
            learn, targets, held.values, noise, self.settings.bias, self.settings.tolerance
        )
        metrics = readout.evaluate(predictions, targets, digitize_output=True)
        return BenchmarkReport(
            task=task,
            m_used=m_used,
            mse=metrics.mse,
            digitized_errors=metrics.digitized_errors,
            per_instance=tuple(
                InstanceResult(label, float(t), float(p))
                for label, t, p in zip(held.row_labels, targets, predictions)
            ),
            training_mse=model.training_mse,
            effective_rank=model.effective_rank,
            baseline_mse=readout.constant_baseline_mse(targets),
        )

    def _function_noise(self, seed):
        fn = self.settings.function_noise
        return NoiseSpec(fn.copies, fn.relative_std, seed)

    def _scheme_b(self, task, m_used, seed):
        design = self.function_design(m_used)
        targets = function_dataset(task).targets
        fold_seeds = _seeds(seed, design.rows)

        def fold(i):
            keep = np.arange(design.rows) != i
            train_design = DesignMatrix(design.values[keep], design.samples_per_input)
            model, prediction = _fit_and_predict(
                train_design, targets[keep], design.values[i], self._function_noise(fold_seeds[i]),
                self.settings.bias, self.settings.tolerance,
            )
            return float(prediction[0]), model.training_mse, model.effective_rank

        n_jobs = self.settings.n_jobs
        if n_jobs == 1:
            folds = [fold(i) for i in range(design.rows)]
        else:
            folds = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fold)(i) for i in range(design.rows))

        predictions = np.array([f[0] for f in folds])
        metrics = readout.evaluate(predictions, targets)
        return BenchmarkReport(
            task=task,
            m_used=m_used,
            mse=metrics.mse,
            digitized_errors=None,
            per_instance=tuple(
                InstanceResult(label, float(t), float(p))
                for label, t, p in zip(design.row_labels, targets, predictions)
            ),
            training_mse=float(np.mean([f[1] for f in folds])),
            effective_rank=int(min(f[2] for f in folds)),
            baseline_mse=readout.constant_baseline_mse(targets),
            rounds=len(folds),
        )

    def _scheme_c(self, task, m_used, seed):
        design = self.function_design(m_used)
        targets = function_dataset(task).targets
        model, predictions = _fit_and_predict(
            design, targets, design.values, self._function_noise(_seeds(seed, 1)[0]),
            self.settings.bias, self.settings.tolerance,
        )
        metrics = readout.evaluate(predictions, targets)
        return BenchmarkReport(
            task=task,
            m_used=m_used,
            mse=metrics.mse,
            digitized_errors=None,
            per_instance=tuple(
                InstanceResult(label, float(t), float(p))
                for label, t, p in zip(design.row_labels, targets, predictions)
            ),
            training_mse=model.training_mse,
            effective_rank=model.effective_rank,
            baseline_mse=readout.constant_baseline_mse(targets),
        )

    # -- batteries ------------------------------------------------------

    def sweep(self, tasks, m_values=None, seed: int = 0):
        m_values = list(m_values or [self.settings.params.M])
        return [self.run(task, m, seed) for task in tasks for m in m_values]


def run_benchmark(task: TaskSpec, settings: BenchmarkSettings, m_used: Optional[int] = None,
                  seed: int = 0) -> BenchmarkReport:
    return BenchmarkRunner(settings).run(task, m_used, seed)


def m_sweep(task: TaskSpec, settings: BenchmarkSettings, m_values, seed: int = 0):
    """One report per M' for a single task, sharing the simulated traces."""
    return BenchmarkRunner(settings).sweep([task], m_values, seed)


def battery_tasks(function_scheme: str = SCHEME_B):
    return [
        TaskSpec.from_name(name, function_scheme if name in CONTINUOUS_KINDS else None)
        for name in BATTERY
    ]


def run_battery(settings: BenchmarkSettings, m_values=None, seed: int = 0, function_scheme: str = SCHEME_B):
    return BenchmarkRunner(settings).sweep(battery_tasks(function_scheme), m_values, seed)


def raw_input_control(task: TaskSpec, L: int = 4, bias: bool = True) -> readout.Metrics:
    """Readout trained on the raw bits themselves, bypassing the reservoir."""
    dataset = binary_dataset(task, L)
    bits = np.array(binary_patterns(L), dtype=np.float64)
    features = np.hstack([bits, np.ones((bits.shape[0], 1))]) if bias else bits
    solution = linalg.least_squares_pinv(features, dataset.targets)
    return readout.evaluate(features @ solution.weights, dataset.targets, digitize_output=True)
