"""Damped Fourier transform of the call price and its DFT discretisation.

The log-strike grid is ``k_l = k0 + dk*l`` for ``0 <= l < 2N`` and the
frequency grid is ``v_j = dv*(j - N)``; coupling ``dk*dv = pi/N`` turns the
Riemann sum for the inverse transform into a length-``2N`` DFT.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import ArgumentError, GridRangeError, ModelDomainError
from .fourier import FORWARD, fft_radix2
from .models import MarketParams, ModelSpec, VarianceGamma, char_fn

__all__ = [
    "GridSpec",
    "make_grid",
    "default_grid",
    "psi",
    "build_x_vector",
    "PriceCurve",
    "curve_from_dft",
    "price_fft",
    "price_at_strike",
    "parity_puts",
    "strikes_in",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("strike", "price", "imag_residual")


@dataclass(frozen=True)
class GridSpec:
    """Log-strike / frequency discretisation with ``N = 2**n`` per half range.

    ``dv`` is derived from ``dk`` so the coupling holds by construction.
    """

    n: int
    dk: float
    k0: float
    alpha: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ArgumentError(f"n must be a nonnegative integer, got {self.n!r}")
        if not (self.dk > 0 and math.isfinite(self.dk)):
            raise ArgumentError(f"dk must be positive, got {self.dk!r}")
        if not math.isfinite(self.k0):
            raise ArgumentError(f"k0 must be finite, got {self.k0!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ArgumentError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def N(self) -> int:
        return 1 << int(self.n)

    @property
    def size(self) -> int:
        """Number of grid points, ``2N``."""
        return 2 * self.N

    @property
    def qubits(self) -> int:
        return int(self.n) + 1

    @property
    def dv(self) -> float:
        return math.pi / (self.N * self.dk)

    @property
    def log_strikes(self) -> np.ndarray:
        return self.k0 + self.dk * np.arange(self.size)

    @property
    def strikes(self) -> np.ndarray:
        return np.exp(self.log_strikes)

    @property
    def frequencies(self) -> np.ndarray:
        return self.dv * (np.arange(self.size) - self.N)

    def with_alpha(self, alpha: float) -> "GridSpec":
        return GridSpec(self.n, self.dk, self.k0, alpha)


def make_grid(n: int, dk: float, k0: float, alpha: float) -> GridSpec:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"n must be an integer >= 1, got {n!r}")
    return GridSpec(int(n), float(dk), float(k0), float(alpha))


def default_grid(market: MarketParams, n: int = 10, alpha: float = 2.5) -> GridSpec:
    """Reference grid: ``dk = 1/sqrt(N)``, ``k0 = ln S0 - N*dk/2``.

    The spot sits at index ``N/2`` of the ``2N`` points.
    """
    N = 1 << n
    dk = 1.0 / math.sqrt(N)
    return GridSpec(n, dk, math.log(market.spot) - N * dk / 2.0, alpha)


def psi(model: ModelSpec, alpha: float, v):
    """Fourier transform of the damped call price ``exp(alpha*k) C(k)``.

    ``psi(v) = exp(-rT) Phi(v - i(1+alpha)) / ((alpha + iv)(1 + alpha + iv))``
    for scalar or array ``v``.
    """
    if not alpha > 0:
        raise ArgumentError(f"alpha must be positive, got {alpha!r}")
    v = np.asarray(v, dtype=float)
    u = v - 1j * (1.0 + alpha)
    variant = model.variant
    if isinstance(variant, VarianceGamma) and 1.0 + alpha >= variant.max_shift():
        raise ModelDomainError(
            f"alpha exceeds the variance gamma strip (alpha < {variant.max_shift() - 1.0:.6g})",
            u=complex(np.ravel(u)[0]),
            alpha=alpha,
        )
    try:
        phi = char_fn(model, u)
    except ModelDomainError as exc:
        raise ModelDomainError(str(exc), u=exc.u, alpha=alpha) from None
    val = model.market.discount * phi / ((alpha + 1j * v) * (1.0 + alpha + 1j * v))
    return complex(val) if np.ndim(val) == 0 else val


def build_x_vector(grid: GridSpec, model: ModelSpec) -> np.ndarray:
    """DFT input ``x_j = exp(-i dv j k0) exp(i dv N k0) psi(dv (j - N))``."""
    j = np.arange(grid.size)
    dv, k0 = grid.dv, grid.k0
    phase = np.exp(-1j * dv * j * k0) * np.exp(1j * dv * grid.N * k0)
    return phase * psi(model, grid.alpha, grid.frequencies)


@dataclass
class PriceCurve:
    """Call prices on the grid strikes ``K_l = exp(k0 + dk*l)``.

    ``imag_residual`` is the imaginary part left over by the discretisation;
    the exact transform is real, so a large residual flags a bad grid.
    """

    strikes: np.ndarray
    prices: np.ndarray
    imag_residual: np.ndarray
    grid: Optional[GridSpec] = None
    comments: list = field(default_factory=list)

    def __len__(self):
        return len(self.strikes)

    @property
    def log_strikes(self) -> np.ndarray:
        if self.grid is not None:
            return self.grid.log_strikes
        return np.log(self.strikes)

    def to_csv(self, path=None) -> str:
        """Write ``strike,price,imag_residual`` with 17 significant digits.

        Returns the text; also writes it to ``path`` when given.
        """
        buf = io.StringIO()
        for line in self.comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(self.strikes, self.prices, self.imag_residual):
            w.writerow([format(float(v), ".17g") for v in row])
        text = buf.getvalue()
        if path is not None:
            _atomic_write(path, text)
        return text

    @classmethod
    def from_csv(cls, source, grid: Optional[GridSpec] = None) -> "PriceCurve":
        """Parse a CSV written by :meth:`to_csv` (path or text)."""
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, newline="") as fh:
                text = fh.read()
        else:
            text = str(source)
        comments = []
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif line.strip():
                rows.append(line)
        reader = csv.reader(rows)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ArgumentError(f"unexpected CSV header {header!r}")
        data = np.array([[float(v) for v in r] for r in reader], dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2], grid, comments)


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _alternating_sign(size: int) -> np.ndarray:
    """``exp(i pi l)`` for integer ``l``, exactly +-1."""
    s = np.ones(size)
    s[1::2] = -1.0
    return s


def curve_from_dft(grid: GridSpec, transformed: np.ndarray, scale: float = 1.0) -> PriceCurve:
    """Apply ``exp(-alpha k_l)/(2 pi) * dv * exp(i pi l) * scale`` to a DFT output."""
    transformed = np.asarray(transformed)
    if transformed.shape != (grid.size,):
        raise ArgumentError(f"expected {grid.size} values, got shape {transformed.shape}")
    pref = np.exp(-grid.alpha * grid.log_strikes) / (2.0 * math.pi) * grid.dv * scale
    c = pref * _alternating_sign(grid.size) * transformed
    return PriceCurve(grid.strikes, c.real.copy(), c.imag.copy(), grid)


def price_fft(
    grid: GridSpec,
    model: ModelSpec,
    transform: Callable[..., np.ndarray] = fft_radix2,
) -> PriceCurve:
    """Classical price curve: forward DFT of the x-vector plus the prefactor."""
    x = build_x_vector(grid, model)
    return curve_from_dft(grid, transform(x, FORWARD))


def price_at_strike(curve: PriceCurve, K: float, mode: str = "linear") -> float:
    """Price at an arbitrary strike inside the grid.

    ``nearest`` takes the grid point closest in log-strike, ``linear``
    interpolates linearly in log-strike between the bracketing points.
    """
    if mode not in ("nearest", "linear"):
        raise ArgumentError(f"mode must be 'nearest' or 'linear', got {mode!r}")
    if not K > 0:
        raise ArgumentError(f"strike must be positive, got {K!r}")
    ks = curve.log_strikes
    k = math.log(K)
    span = ks[-1] - ks[0]
    eps = 1e-12 * max(1.0, abs(span))
    if k < ks[0] - eps or k > ks[-1] + eps:
        raise GridRangeError(
            f"strike {K!r} outside grid [{math.exp(ks[0])!r}, {math.exp(ks[-1])!r}]"
        )
    if mode == "nearest":
        return float(curve.prices[int(np.argmin(np.abs(ks - k)))])
    i = int(np.searchsorted(ks, k, side="right")) - 1
    i = min(max(i, 0), len(ks) - 2)
    t = (k - ks[i]) / (ks[i + 1] - ks[i])
    if t <= 0.0:
        return float(curve.prices[i])
    if t >= 1.0:
        return float(curve.prices[i + 1])
    return float((1.0 - t) * curve.prices[i] + t * curve.prices[i + 1])


def parity_puts(curve: PriceCurve, market: MarketParams) -> np.ndarray:
    """Put prices implied by the call curve through put-call parity."""
    return curve.prices - market.spot + curve.strikes * market.discount


def strikes_in(curve_or_grid, lo: float, hi: float) -> np.ndarray:
    """Indices of grid strikes inside ``[lo, hi]``."""
    strikes = curve_or_grid.strikes
    return np.flatnonzero((strikes >= lo) & (strikes <= hi))
