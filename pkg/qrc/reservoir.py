"""
The nuclear-spin reservoir.

Four (by default) 1H-like input spins occupy Kronecker sites 0..N_H-1 and the
13C-like probe spin the last site. Couplings are configured in Hz and enter
the Hamiltonian as angular frequencies (2*pi*d). Signals are ensemble
expectations of the probe Z magnetization normalized by the thermal
polarization, so they are O(1) and independent of epsilon.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np
from django.core.exceptions import ValidationError
from joblib import Parallel, delayed

from . import linalg
from .exceptions import NumericalError, ShapeError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

DEFAULT_COUPLING_SEED = 1729
DEFAULT_COUPLING_RANGE_HZ = (2.0e3, 30.0e3)
DEFAULT_INPUT_SPINS = 4
DEFAULT_EPSILON = 3e-5
DEFAULT_TAU_SECONDS = 2e-6
DEFAULT_INPUT_LENGTH = 4
DEFAULT_SAMPLES_PER_INPUT = 11

AXES = ("X", "Y", "Z")
TRANSVERSE_AXES = ("X", "Y")

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pair_index(n_input_spins: int):
    """(i, j) pairs with i < j in the storage order of ``couplings_ij``."""
    return list(combinations(range(n_input_spins), 2))


@dataclass(frozen=True)
class SpinSystem:
    n_input_spins: int
    couplings_ic: tuple
    couplings_ij: tuple = ()

    def __post_init__(self):
        ic = tuple(float(d) for d in self.couplings_ic)
        ij = tuple(float(d) for d in self.couplings_ij)
        object.__setattr__(self, "couplings_ic", ic)
        object.__setattr__(self, "couplings_ij", ij)

        errors = {}
        if self.n_input_spins < 1:
            errors["n_input_spins"] = "at least one input spin is required"
        elif len(ic) != self.n_input_spins:
            errors["couplings_ic"] = f"expected {self.n_input_spins} values, got {len(ic)}"
        n_pairs = self.n_input_spins * (self.n_input_spins - 1) // 2
        if self.n_input_spins >= 1 and len(ij) != n_pairs:
            errors["couplings_ij"] = f"expected {n_pairs} values (i<j pairs), got {len(ij)}"
        if not all(np.isfinite(ic)) or not all(np.isfinite(ij)):
            errors.setdefault("couplings_ic", "couplings must be finite")
        if errors:
            raise ValidationError(errors)

        if not any(ic):
            logger.warning("SpinSystem has no nonzero input-probe coupling; the probe will never see a signal")

    @property
    def n_spins(self) -> int:
        return self.n_input_spins + 1

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    @property
    def probe_site(self) -> int:
        return self.n_input_spins

    def pair_couplings(self):
        return zip(pair_index(self.n_input_spins), self.couplings_ij)

    def coupling_table(self):
        """Symmetric N_H x N_H table of d_ij (Hz), zero diagonal."""
        table = np.zeros((self.n_input_spins, self.n_input_spins))
        for (i, j), d in self.pair_couplings():
            table[i, j] = table[j, i] = d
        return table

    @classmethod
    def default(cls, seed=DEFAULT_COUPLING_SEED, n_input_spins=DEFAULT_INPUT_SPINS,
                coupling_range_hz=DEFAULT_COUPLING_RANGE_HZ):
        """
        Seeded placeholder couplings: magnitudes uniform in the given range
        with random signs. Not a physical alanine geometry.
        """
        lo, hi = coupling_range_hz
        n_pairs = n_input_spins * (n_input_spins - 1) // 2
        rng = np.random.default_rng(seed)
        magnitudes = rng.uniform(lo, hi, size=n_input_spins + n_pairs)
        signs = 2 * rng.integers(0, 2, size=n_input_spins + n_pairs) - 1
        values = magnitudes * signs
        return cls(
            n_input_spins=n_input_spins,
            couplings_ic=tuple(values[:n_input_spins]),
            couplings_ij=tuple(values[n_input_spins:]),
        )

    @classmethod
    def two_spin(cls, d_hz: float):
        return cls(n_input_spins=1, couplings_ic=(d_hz,), couplings_ij=())


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray
    polarization_epsilon: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, obs) -> float:
        return linalg.trace_product(self.matrix, obs)

    def purity(self) -> float:
        return linalg.trace_product(self.matrix, self.matrix)


@dataclass(frozen=True)
class SequenceParams:
    input_length: int = DEFAULT_INPUT_LENGTH
    samples_per_input: int = DEFAULT_SAMPLES_PER_INPUT
    sample_interval: float = DEFAULT_TAU_SECONDS
    rotation_axis: str = "Y"
    warmup_cycles: int = 0

    def __post_init__(self):
        errors = {}
        if self.input_length < 1:
            errors["input_length"] = "L must be >= 1"
        if self.samples_per_input < 1:
            errors["samples_per_input"] = "M must be >= 1"
        if not (self.sample_interval > 0 and np.isfinite(self.sample_interval)):
            errors["sample_interval"] = "tau must be a finite value > 0"
        if self.rotation_axis not in TRANSVERSE_AXES:
            errors["rotation_axis"] = f"rotation axis must be one of {TRANSVERSE_AXES}"
        if self.warmup_cycles < 0:
            errors["warmup_cycles"] = "warm-up cycles must be >= 0"
        if errors:
            raise ValidationError(errors)

    @property
    def L(self) -> int:
        return self.input_length

    @property
    def M(self) -> int:
        return self.samples_per_input


@dataclass(frozen=True)
class ReservoirTrace:
    signals: np.ndarray
    input_stream: tuple
    params: SequenceParams = field(repr=False)

    @property
    def shape(self):
        return self.signals.shape

    def flatten(self):
        # column index (l-1)*M + (m-1)
        return self.signals.reshape(-1)

    def sample_times(self):
        """t = m * tau within each input block, as an L x M array."""
        m = np.arange(1, self.params.M + 1) * self.params.sample_interval
        return np.tile(m, (self.params.L, 1))


class ProbeSignal(NamedTuple):
    value: float
    normalized: bool


def site_operator(n: int, site: int, axis: str):
    """Spin-1/2 operator I_axis = sigma_axis / 2 acting on ``site`` of ``n`` spins."""
    if not 0 <= site < n:
        raise ValidationError({"site": f"site {site} out of range for {n} spins"})
    if axis not in AXES:
        raise ValidationError({"axis": f"axis must be one of {AXES}, got {axis!r}"})
    factors = [_PAULI["I"]] * n
    factors[site] = 0.5 * _PAULI[axis]
    if n == 1:
        return factors[0].copy()
    return linalg.kron(*factors)


def total_z(system: SpinSystem):
    n = system.n_spins
    return sum(site_operator(n, k, "Z") for k in range(n))


def build_hamiltonian(system: SpinSystem):
    """
    Interaction-frame dipolar Hamiltonian in rad/s:

        H = sum_i d_iC (Ix_i Ix_C + Iy_i Iy_C)
          + sum_{i<j} d_ij (2 Iz_i Iz_j - Iy_i Iy_j - Ix_i Ix_j)
    """
    n = system.n_spins
    ops = {(k, a): site_operator(n, k, a) for k in range(n) for a in AXES}
    c = system.probe_site
    h = np.zeros((system.dim, system.dim), dtype=np.complex128)

    for i, d in enumerate(system.couplings_ic):
        if d:
            h += TWO_PI * d * (ops[i, "X"] @ ops[c, "X"] + ops[i, "Y"] @ ops[c, "Y"])
    for (i, j), d in system.pair_couplings():
        if d:
            h += TWO_PI * d * (
                2.0 * ops[i, "Z"] @ ops[j, "Z"] - ops[i, "Y"] @ ops[j, "Y"] - ops[i, "X"] @ ops[j, "X"]
            )
    return h


def psd_bound(system: SpinSystem) -> float:
    return 1.0 / system.n_input_spins


def thermal_initial_state(system: SpinSystem, epsilon: float) -> DensityState:
    """rho = (1 + 2 eps sum_i Iz_i) / 2^n over input spins; the probe is saturated."""
    bound = psd_bound(system)
    if not np.isfinite(epsilon) or abs(epsilon) >= bound:
        raise ValidationError(
            {"epsilon": f"|epsilon| must be below the PSD bound {bound:g} for {system.n_input_spins} input spins, got {epsilon!r}"}
        )
    n = system.n_spins
    polarization = sum(site_operator(n, i, "Z") for i in range(system.n_input_spins))
    rho = (np.eye(system.dim, dtype=np.complex128) + 2.0 * epsilon * polarization) / system.dim
    return DensityState(matrix=rho, polarization_epsilon=float(epsilon))


def signed_input(s: float) -> float:
    """Map a task input s in [0, 1] to the signed system input s' = 2s - 1."""
    return 2.0 * float(s) - 1.0


def rotation_angle(s: float) -> float:
    if not np.isfinite(s) or s < -1.0 or s > 1.0:
        raise ValidationError({"s": f"signed input must lie in [-1, 1], got {s!r}"})
    return float(np.arccos(s))


def input_unitary(system: SpinSystem, s: float, axis: str = "Y"):
    """Global rotation of the input spins by theta = arccos(s) about a transverse axis."""
    if axis not in TRANSVERSE_AXES:
        raise ValidationError({"axis": f"injection axis must be transverse, one of {TRANSVERSE_AXES}"})
    theta = rotation_angle(s)
    single = np.cos(theta / 2) * _PAULI["I"] - 1j * np.sin(theta / 2) * _PAULI[axis]
    factors = [single] * system.n_input_spins + [_PAULI["I"]]
    return linalg.kron(*factors)


def evolve(rho: DensityState, u) -> DensityState:
    u = linalg.as_matrix(u)
    if u.shape != rho.matrix.shape:
        raise ShapeError({"u": f"propagator shape {u.shape} does not match state {rho.matrix.shape}"})
    err = linalg.unitarity_error(u)
    if err >= linalg.UNITARY_TOL:
        raise NumericalError(f"propagator is not unitary: max|U^H U - 1| = {err:.3e}")
    return DensityState(matrix=u @ rho.matrix @ u.conj().T, polarization_epsilon=rho.polarization_epsilon)


def measure_probe_z(rho: DensityState, system: SpinSystem) -> ProbeSignal:
    """Normalized probe signal Tr(rho 2Iz_C) / eps; the state is not disturbed."""
    obs = 2.0 * site_operator(system.n_spins, system.probe_site, "Z")
    raw = rho.expectation(obs)
    if rho.polarization_epsilon == 0:
        return ProbeSignal(value=raw, normalized=False)
    return ProbeSignal(value=raw / rho.polarization_epsilon, normalized=True)


class ReservoirSimulator:
    """
    Holds the Hamiltonian, its eigendecomposition and the sampling propagator
    for one (system, params) pair so that many streams can share them.
    """

    def __init__(self, system: SpinSystem, params: SequenceParams):
        self.system = system
        self.params = params
        self.hamiltonian = build_hamiltonian(system)
        self.spectrum = linalg.herm_eig(self.hamiltonian)
        self.step = self.spectrum.propagator(params.sample_interval)
        self._injections = {}

    def injection(self, s: float):
        key = float(s)
        if key not in self._injections:
            self._injections[key] = input_unitary(self.system, key, self.params.rotation_axis)
        return self._injections[key]

    def run(self, stream, epsilon: float) -> ReservoirTrace:
        stream = tuple(float(s) for s in stream)
        p = self.params
        if len(stream) != p.L:
            raise ShapeError({"stream": f"stream length {len(stream)} does not match L={p.L}"})

        rho = thermal_initial_state(self.system, epsilon)
        if epsilon == 0:
            logger.warning("epsilon = 0: probe signals are raw expectations, not normalized")
        for _ in range(p.warmup_cycles):
            rho = evolve(rho, self.step)

        signals = np.empty((p.L, p.M), dtype=np.float64)
        for l, s in enumerate(stream):
            rho = evolve(rho, self.injection(s))
            for m in range(p.M):
                rho = evolve(rho, self.step)
                signals[l, m] = measure_probe_z(rho, self.system).value

        if not np.all(np.isfinite(signals)):
            raise NumericalError("reservoir trace contains non-finite signals")
        return ReservoirTrace(signals=signals, input_stream=stream, params=p)

    def run_many(self, streams, epsilon: float, n_jobs: int = 1):
        streams = [tuple(s) for s in streams]
        logger.debug("simulating %d streams (n_jobs=%d)", len(streams), n_jobs)
        if n_jobs == 1:
            return [self.run(s, epsilon) for s in streams]
        # results come back in submission order, so traces stay deterministic
        return Parallel(n_jobs=n_jobs)(delayed(self.run)(s, epsilon) for s in streams)


def run_sequence(system: SpinSystem, stream, params: SequenceParams, epsilon: float) -> ReservoirTrace:
    return ReservoirSimulator(system, params).run(stream, epsilon)
