"""Error propagation, dampening sweeps, and convergence / shot-noise studies."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .carr_madan import GridSpec, PriceCurve, _atomic_write, build_x_vector, default_grid, price_fft, psi
from .exceptions import ArgumentError, ModelDomainError
from .models import BlackScholes, ModelSpec, bs_closed_form
from .qsim import amplitude_scale, inverse_qft, normalize, prepare_state, price_from_shots, sample

log = logging.getLogger(__name__)

__all__ = [
    "error_factor",
    "error_factors",
    "required_amplitude_precision",
    "atm_index",
    "default_window",
    "reference_price",
    "ErrorFactorSurface",
    "alpha_sweep",
    "sweet_spot",
    "ConvergenceRow",
    "convergence_study",
    "ShotRow",
    "shot_study",
    "rows_to_csv",
]


def error_factors(grid: GridSpec, model: ModelSpec, x: Optional[np.ndarray] = None) -> np.ndarray:
    """Amplitude-to-price error multiplier for every grid index.

    ``F_l = exp(-alpha k_l)/(2 pi) * dv * ||x|| * 2**((n+1)/2)``; a readout
    error ``eps_l`` in ``|y_l|`` moves the price at ``l`` by ``F_l * eps_l``.
    """
    if x is None:
        x = build_x_vector(grid, model)
    scale = amplitude_scale(grid, float(np.linalg.norm(x)))
    return np.exp(-grid.alpha * grid.log_strikes) / (2.0 * math.pi) * grid.dv * scale


def error_factor(grid: GridSpec, model: ModelSpec, l: int) -> float:
    if not 0 <= l < grid.size:
        raise ArgumentError(f"index {l} outside [0, {grid.size})")
    return float(error_factors(grid, model)[l])


def required_amplitude_precision(price_precision: float, factor: float) -> float:
    """Amplitude accuracy needed so that ``factor * eps`` stays below ``price_precision``."""
    if not factor > 0:
        raise ArgumentError(f"factor must be positive, got {factor!r}")
    return price_precision / factor


def atm_index(grid: GridSpec, spot: float) -> int:
    """Grid index nearest the spot in log-strike; ties go to the lower index."""
    return int(np.argmin(np.abs(grid.log_strikes - math.log(spot))))


def default_window(spot: float) -> Tuple[float, float]:
    return 0.8 * spot, 1.2 * spot


def reference_price(model: ModelSpec, K: float, alpha: float = 1.5) -> float:
    """Independent reference call price.

    Closed form for Black-Scholes; otherwise adaptive quadrature of the
    undiscretised inverse transform
    ``C(k) = exp(-alpha k)/pi * int_0^inf Re[exp(-ivk) psi(v)] dv``.
    """
    if isinstance(model.variant, BlackScholes):
        return bs_closed_form(model.market, model.variant.sigma, K)
    k = math.log(K)

    def integrand(v):
        return (np.exp(-1j * v * k) * psi(model, alpha, v)).real

    val, _ = integrate.quad(integrand, 0.0, np.inf, limit=500, epsabs=1e-13, epsrel=1e-12)
    return math.exp(-alpha * k) / math.pi * val


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


@dataclass
class ErrorFactorSurface:
    rows: List[Tuple[float, float, float]] = field(default_factory=list)
    skipped: List[Tuple[float, str]] = field(default_factory=list)

    @property
    def alphas(self) -> np.ndarray:
        return np.unique([r[1] for r in self.rows])

    def factors_for(self, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
        sel = [(K, F) for K, a, F in self.rows if a == alpha]
        arr = np.array(sel, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def to_csv(self, path=None) -> str:
        return rows_to_csv(("strike", "alpha", "factor"), self.rows, path)


def alpha_sweep(
    model: ModelSpec,
    alphas: Sequence[float],
    window: Tuple[float, float],
    template: Optional[GridSpec] = None,
    workers: int = 1,
) -> ErrorFactorSurface:
    """Error factors on the strikes in ``window`` for each dampening value.

    The x-vector is rebuilt per alpha. Values outside the model's strip are
    skipped and recorded in ``surface.skipped``.
    """
    if template is None:
        template = default_grid(model.market)
    lo, hi = window
    for a in alphas:
        if not a > 0:
            raise ArgumentError(f"alpha values must be positive, got {a!r}")

    def cell(a):
        grid = template.with_alpha(float(a))
        try:
            F = error_factors(grid, model)
        except ModelDomainError as exc:
            return float(a), None, str(exc)
        K = grid.strikes
        sel = (K >= lo) & (K <= hi)
        return float(a), [(float(k), float(a), float(f)) for k, f in zip(K[sel], F[sel])], None

    surface = ErrorFactorSurface()
    for a, rows, err in sorted(_map(cell, list(alphas), workers), key=lambda c: c[0]):
        if rows is None:
            log.warning("alpha=%r skipped: %s", a, err)
            surface.skipped.append((a, err))
        else:
            surface.rows.extend(rows)
    return surface


def sweet_spot(surface: ErrorFactorSurface) -> Tuple[float, float]:
    """Alpha minimising the worst error factor over the surface's strikes.

    Returns ``(alpha, max_factor_at_alpha)``.
    """
    best = None
    for a in surface.alphas:
        _, F = surface.factors_for(a)
        if F.size == 0:
            continue
        worst = float(F.max())
        if best is None or worst < best[1]:
            best = (float(a), worst)
    if best is None:
        raise ArgumentError("surface has no rows")
    return best


class ConvergenceRow(NamedTuple):
    n: int
    mse: float
    points: int


def convergence_study(
    model: ModelSpec,
    alpha: float,
    n_values: Sequence[int],
    window: Optional[Tuple[float, float]] = None,
    reference: Optional[Callable[[float], float]] = None,
    workers: int = 1,
) -> List[ConvergenceRow]:
    """Mean squared error of the FFT price curve on the window strikes, per ``n``.

    Each ``n`` uses the default grid (``dk = 1/sqrt(N)``, ``k0 = ln S0 - N*dk/2``).
    """
    n_values = list(n_values)
    if n_values != sorted(n_values):
        raise ArgumentError("n values must be ascending")
    lo, hi = window or default_window(model.market.spot)
    if reference is None:
        def reference(K):
            return reference_price(model, K)

    def cell(n):
        curve = price_fft(default_grid(model.market, n, alpha), model)
        sel = np.flatnonzero((curve.strikes >= lo) & (curve.strikes <= hi))
        if sel.size == 0:
            return ConvergenceRow(n, math.nan, 0)
        err = np.array([curve.prices[i] - reference(curve.strikes[i]) for i in sel])
        return ConvergenceRow(n, float(np.mean(err**2)), int(sel.size))

    return _map(cell, n_values, workers)


def mse_from_curve(curve: PriceCurve, reference: Callable[[float], float], window) -> float:
    lo, hi = window
    sel = np.flatnonzero((curve.strikes >= lo) & (curve.strikes <= hi))
    err = np.array([curve.prices[i] - reference(curve.strikes[i]) for i in sel])
    return float(np.mean(err**2))


class ShotRow(NamedTuple):
    shots: int
    mean_abs_error: float
    std_abs_error: float
    seeds: int


def shot_study(
    model: ModelSpec,
    grid: GridSpec,
    shot_counts: Sequence[int],
    seeds: Sequence[int],
    reference: Optional[float] = None,
    workers: int = 1,
) -> List[ShotRow]:
    """ATM absolute error of the shot-based price, averaged over seeds."""
    shot_counts = [int(s) for s in shot_counts]
    if shot_counts != sorted(shot_counts):
        raise ArgumentError("shot counts must be ascending")
    seeds = list(seeds)
    if not seeds:
        raise ArgumentError("need at least one seed")
    x = build_x_vector(grid, model)
    inp = normalize(x)
    y = inverse_qft(prepare_state(inp))
    atm = atm_index(grid, model.market.spot)
    if reference is None:
        reference = reference_price(model, float(grid.strikes[atm]))

    def cell(args):
        shots, seed = args
        curve = price_from_shots(sample(y, shots, seed), inp.norm, grid)
        return abs(curve.prices[atm] - reference)

    rows = []
    for shots in shot_counts:
        errs = np.array(_map(cell, [(shots, s) for s in seeds], workers))
        rows.append(ShotRow(shots, float(errs.mean()), float(errs.std(ddof=1)) if errs.size > 1 else 0.0, len(seeds)))
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def rows_to_csv(header, rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    text = buf.getvalue()
    if path is not None:
        _atomic_write(path, text)
    return text
