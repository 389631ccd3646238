"""Statevector simulation of the QFT pricing pipeline.

normalise -> prepare |x~> -> inverse QFT -> read amplitudes (exact) or
sample shots (finite statistics) -> undo normalisation and damping.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .carr_madan import GridSpec, PriceCurve, _alternating_sign, _atomic_write
from .exceptions import ArgumentError
from .fourier import FORWARD, INVERSE, fft_radix2, is_power_of_two

__all__ = [
    "StateVector",
    "NormalizedInput",
    "ShotResult",
    "normalize",
    "prepare_state",
    "inverse_qft",
    "qft",
    "price_from_amplitudes",
    "sample",
    "price_from_shots",
    "amplitude_scale",
]

NORM_TOL = 1e-10
_CHUNK = 1 << 22


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex, copy=True).reshape(-1)
        if not is_power_of_two(amps.size):
            raise ArgumentError(f"state length must be a power of two, got {amps.size}")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ArgumentError(f"state is not normalised (norm={nrm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def basis(cls, index: int, num_qubits: int) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)


@dataclass(frozen=True)
class NormalizedInput:
    tilde_x: np.ndarray
    norm: float


@dataclass(frozen=True)
class ShotResult:
    """Histogram of measured basis states.

    ``counts`` is dense: ``counts[l]`` is the number of shots that returned
    basis state ``l``.
    """

    counts: np.ndarray
    shots: int
    seed: int

    def __post_init__(self):
        if int(np.sum(self.counts)) != self.shots:
            raise ArgumentError("counts do not sum to the number of shots")

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# shots={self.shots} seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("index", "count"))
        for i, c in enumerate(self.counts):
            w.writerow((i, int(c)))
        text = buf.getvalue()
        if path is not None:
            _atomic_write(path, text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "ShotResult":
        seed = 0
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "seed":
                        seed = int(val)
            elif line.strip():
                rows.append(line)
        reader = csv.reader(rows)
        if tuple(next(reader)) != ("index", "count"):
            raise ArgumentError("unexpected ShotResult CSV header")
        pairs = [(int(i), int(c)) for i, c in reader]
        counts = np.zeros(len(pairs), dtype=np.int64)
        for i, c in pairs:
            counts[i] = c
        return cls(counts, int(counts.sum()), seed)


def normalize(x) -> NormalizedInput:
    x = np.asarray(x, dtype=complex).reshape(-1)
    nrm = float(np.linalg.norm(x))
    if not nrm > 0:
        raise ArgumentError("cannot normalise the zero vector")
    return NormalizedInput(x / nrm, nrm)


def prepare_state(inp: NormalizedInput) -> StateVector:
    """Load ``tilde_x`` as amplitudes (the gate-level version is in ``qcircuit``)."""
    if not is_power_of_two(inp.tilde_x.size):
        raise ArgumentError(f"state length must be a power of two, got {inp.tilde_x.size}")
    return StateVector(inp.tilde_x)


def inverse_qft(state: StateVector) -> StateVector:
    """``y_l = 2**(-m/2) sum_j x_j exp(-2 pi i l j / 2**m)``."""
    amps = state.amplitudes
    out = fft_radix2(amps, FORWARD) / math.sqrt(amps.size)
    return _renormalised(out)


def qft(state: StateVector) -> StateVector:
    """Inverse of :func:`inverse_qft` (kernel ``exp(+2 pi i l j / 2**m)``)."""
    amps = state.amplitudes
    out = fft_radix2(amps, INVERSE) * math.sqrt(amps.size)
    return _renormalised(out)


def _renormalised(amps):
    # Unitary up to rounding; guard only against drift beyond the tolerance.
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ArithmeticError(f"transform lost unitarity (norm={nrm!r})")
    return StateVector(amps)


def amplitude_scale(grid: GridSpec, input_norm: float) -> float:
    """``sqrt(sum |x_j|^2) * 2**((n+1)/2)``, the factor undoing normalisation."""
    if not input_norm > 0:
        raise ArgumentError(f"input_norm must be positive, got {input_norm!r}")
    return input_norm * math.sqrt(grid.size)


def _check_dim(size: int, grid: GridSpec):
    if size != grid.size:
        raise ArgumentError(f"state has {size} amplitudes but the grid needs {grid.size}")


def _prefactor(grid: GridSpec, input_norm: float) -> np.ndarray:
    return (
        np.exp(-grid.alpha * grid.log_strikes)
        / (2.0 * math.pi)
        * grid.dv
        * amplitude_scale(grid, input_norm)
    )


def price_from_amplitudes(y: StateVector, input_norm: float, grid: GridSpec) -> PriceCurve:
    """Prices from exact output amplitudes, phase ``exp(i pi l)`` included."""
    _check_dim(y.amplitudes.size, grid)
    c = _prefactor(grid, input_norm) * _alternating_sign(grid.size) * y.amplitudes
    return PriceCurve(grid.strikes, c.real.copy(), c.imag.copy(), grid)


def sample(state: StateVector, shots: int, seed: int) -> ShotResult:
    """Draw ``shots`` measurements in the computational basis.

    Uses a Philox (counter-based) stream keyed by ``seed``. Sorted uniforms
    are generated as normalised partial sums of exponentials and inverted
    against the cumulative distribution, so the result depends only on
    ``(state, shots, seed)``. The stream is replayed in two passes to keep
    memory bounded for large shot counts.
    """
    shots = int(shots)
    if shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")
    probs = state.probabilities
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    cdf[-1] = np.inf
    total = shots + 1  # shots+1 spacings -> shots order statistics

    def spacings():
        rng = np.random.Generator(np.random.Philox(seed))
        left = total
        while left:
            k = min(left, _CHUNK)
            yield rng.standard_exponential(k)
            left -= k

    grand = 0.0
    for chunk in spacings():
        grand += float(np.sum(chunk))

    below = np.zeros(cdf.size, dtype=np.int64)
    acc = 0.0
    seen = 0
    for chunk in spacings():
        partial = acc + np.cumsum(chunk)
        acc = float(partial[-1])
        take = min(partial.size, shots - seen)
        u = partial[:take] / grand
        below += np.searchsorted(u, cdf, side="left")
        seen += take
    counts = np.diff(below, prepend=0)
    return ShotResult(counts, shots, int(seed))


def price_from_shots(result: ShotResult, input_norm: float, grid: GridSpec) -> PriceCurve:
    """Prices from observed frequencies, ``sqrt(p_l)`` standing in for ``exp(i pi l) y_l``."""
    if result.shots < 1:
        raise ArgumentError("no shots recorded")
    _check_dim(result.counts.size, grid)
    c = _prefactor(grid, input_norm) * np.sqrt(result.frequencies)
    return PriceCurve(grid.strikes, c, np.zeros(grid.size), grid, [f"shots={result.shots}", f"seed={result.seed}"])
