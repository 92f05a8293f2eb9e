"""
Linear readout y_k = sum_{l,m} W_lm x_lm^(k), trained with the Moore-Penrose
inverse of the K x LM design matrix.

MSE is always reported as the mean over instances; training minimizes the
plain sum of squares, which has the same argmin.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError

from . import linalg
from .exceptions import ShapeError

logger = logging.getLogger(__name__)

THRESHOLD = 0.5
DEFAULT_COPIES = 10_000
DEFAULT_RELATIVE_STD = 1e-4


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    samples_per_input: int
    row_labels: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError({"values": f"design matrix must be 2-D, got shape {values.shape}"})
        if not np.all(np.isfinite(values)):
            raise ShapeError({"values": "design matrix contains non-finite values"})
        object.__setattr__(self, "values", values)
        labels = tuple(self.row_labels) or tuple(range(values.shape[0]))
        if len(labels) != values.shape[0]:
            raise ShapeError({"row_labels": f"{len(labels)} labels for {values.shape[0]} rows"})
        object.__setattr__(self, "row_labels", labels)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def input_length(self) -> int:
        return self.cols // self.samples_per_input

    def column_index(self, l: int, m: int) -> int:
        """Column of sample (l, m), both 1-based."""
        return (l - 1) * self.samples_per_input + (m - 1)

    def subsample(self, m_used: int) -> "DesignMatrix":
        """Keep only the columns with m <= m_used in every input block."""
        M = self.samples_per_input
        if not 1 <= m_used <= M:
            raise ValidationError({"m_used": f"M' must lie in [1, {M}], got {m_used}"})
        blocks = self.values.reshape(self.rows, -1, M)[:, :, :m_used]
        return DesignMatrix(blocks.reshape(self.rows, -1), m_used, self.row_labels)

    @classmethod
    def concat(cls, parts, row_labels=()):
        """Column-wise concatenation of designs sharing rows (spatial multiplexing)."""
        parts = list(parts)
        if not parts:
            raise ShapeError({"parts": "nothing to concatenate"})
        M = parts[0].samples_per_input
        if any(p.rows != parts[0].rows or p.samples_per_input != M for p in parts):
            raise ShapeError({"parts": "multiplexed designs must share rows and M"})
        return cls(np.hstack([p.values for p in parts]), M, row_labels or parts[0].row_labels)


@dataclass(frozen=True)
class NoiseSpec:
    copies: int = DEFAULT_COPIES
    relative_std: float = DEFAULT_RELATIVE_STD
    seed: int = 0

    def __post_init__(self):
        errors = {}
        if self.copies < 1:
            errors["copies"] = "copies must be >= 1"
        if not (self.relative_std >= 0 and np.isfinite(self.relative_std)):
            errors["relative_std"] = "relative_std must be a finite value >= 0"
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class ReadoutModel:
    weights: np.ndarray
    bias: bool
    tolerance_used: float
    training_mse: float
    effective_rank: int = 0
    singular_values: np.ndarray = field(default=None, repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0] - (1 if self.bias else 0)

    def predict_rows(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[None, :]
        if values.shape[1] != self.n_features:
            raise ShapeError({"design": f"expected {self.n_features} columns, got {values.shape[1]}"})
        return _with_bias(values, self.bias) @ self.weights


@dataclass(frozen=True)
class Metrics:
    mse: float
    count: int
    digitized_errors: Optional[int] = None


def _with_bias(values, bias: bool):
    if not bias:
        return values
    return np.hstack([values, np.ones((values.shape[0], 1))])


def _row_of(trace):
    flatten = getattr(trace, "flatten", None)
    return np.asarray(flatten() if callable(flatten) else trace, dtype=np.float64).reshape(-1)


def assemble_design_matrix(traces, m_used: Optional[int] = None, row_labels=()) -> DesignMatrix:
    traces = list(traces)
    if not traces:
        raise ShapeError({"traces": "at least one trace is required"})
    shape = traces[0].signals.shape
    for k, t in enumerate(traces):
        if t.signals.shape != shape:
            raise ShapeError({"traces": f"trace {k} has shape {t.signals.shape}, expected {shape}"})
    values = np.vstack([t.signals.reshape(1, -1) for t in traces])
    design = DesignMatrix(values, shape[1], row_labels)
    if m_used is not None and m_used != shape[1]:
        design = design.subsample(m_used)
    return design


def augment_noise(design: DesignMatrix, targets, spec: NoiseSpec):
    """
    Replicate each row ``spec.copies`` times with i.i.d. Gaussian noise of
    standard deviation ``relative_std * max|design|``. Targets are repeated
    unchanged. Copies of a row are contiguous.
    """
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if targets.shape[0] != design.rows:
        raise ShapeError({"targets": f"expected {design.rows} targets, got {targets.shape[0]}"})

    values = np.repeat(design.values, spec.copies, axis=0)
    scale = spec.relative_std * float(np.max(np.abs(design.values), initial=0.0))
    if scale > 0:
        rng = np.random.default_rng(spec.seed)
        values = values + rng.normal(0.0, scale, size=values.shape)
    labels = tuple(label for label in design.row_labels for _ in range(spec.copies))
    logger.debug("augment_noise: %d rows -> %d (std=%.3e)", design.rows, values.shape[0], scale)
    return DesignMatrix(values, design.samples_per_input, labels), np.repeat(targets, spec.copies)


def mean_squared_error(predictions, targets) -> float:
    diff = np.asarray(predictions, dtype=np.float64) - np.asarray(targets, dtype=np.float64)
    return float(np.mean(diff * diff))


def train(design: DesignMatrix, targets, tolerance=None, bias: bool = False) -> ReadoutModel:
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if targets.shape[0] != design.rows:
        raise ShapeError({"targets": f"expected {design.rows} targets, got {targets.shape[0]}"})

    features = _with_bias(design.values, bias)
    solution = linalg.least_squares_pinv(features, targets, tolerance)
    fitted = features @ solution.weights
    model = ReadoutModel(
        weights=solution.weights,
        bias=bias,
        tolerance_used=solution.tolerance_used,
        training_mse=mean_squared_error(fitted, targets),
        effective_rank=solution.effective_rank,
        singular_values=solution.singular_values,
    )
    logger.debug("trained readout: K=%d features=%d rank=%d mse=%.3e",
                 design.rows, features.shape[1], model.effective_rank, model.training_mse)
    return model


def predict(model: ReadoutModel, trace) -> float:
    return float(model.predict_rows(_row_of(trace))[0])


def predict_rows(model: ReadoutModel, design):
    values = design.values if isinstance(design, DesignMatrix) else design
    return model.predict_rows(values)


def digitize(values):
    # exactly 0.5 counts as 1
    return (np.asarray(values, dtype=np.float64) >= THRESHOLD).astype(int)


def evaluate(predictions, targets, digitize_output: bool = False) -> Metrics:
    predictions = np.asarray(predictions, dtype=np.float64).reshape(-1)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if predictions.size == 0:
        raise ValidationError({"predictions": "cannot evaluate an empty prediction vector"})
    if predictions.shape != targets.shape:
        raise ShapeError({"targets": f"{predictions.size} predictions vs {targets.size} targets"})

    errors = None
    if digitize_output:
        errors = int(np.count_nonzero(digitize(predictions) != digitize(targets)))
    return Metrics(mse=mean_squared_error(predictions, targets), count=int(predictions.size),
                   digitized_errors=errors)


def constant_baseline_mse(targets) -> float:
    """MSE of always predicting the mean target."""
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    return mean_squared_error(np.full_like(targets, targets.mean()), targets)
