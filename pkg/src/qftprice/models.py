"""Characteristic functions of the log-price and the Black-Scholes oracle.

Every model exposes ``Phi(u) = E[exp(i u ln S_T)]`` under the risk-neutral
measure, evaluated directly for complex ``u``. The damped Fourier pricer
needs ``Phi`` on the horizontal line ``Im u = -(1 + alpha)``, so each closed
form is written to stay on a single branch there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .exceptions import ArgumentError, ModelDomainError

__all__ = [
    "MarketParams",
    "BlackScholes",
    "Heston",
    "VarianceGamma",
    "ModelSpec",
    "char_fn",
    "max_alpha",
    "bs_closed_form",
    "bs_put_closed_form",
    "norm_cdf",
    "ParityPut",
    "put_price_via_parity",
]


@dataclass(frozen=True)
class MarketParams:
    spot: float
    rate: float
    maturity: float

    def __post_init__(self):
        if not (self.spot > 0 and math.isfinite(self.spot)):
            raise ArgumentError(f"spot must be positive, got {self.spot!r}")
        if not (self.maturity > 0 and math.isfinite(self.maturity)):
            raise ArgumentError(f"maturity must be positive, got {self.maturity!r}")
        if not math.isfinite(self.rate):
            raise ArgumentError(f"rate must be finite, got {self.rate!r}")

    @property
    def discount(self) -> float:
        return math.exp(-self.rate * self.maturity)

    @property
    def forward(self) -> float:
        return self.spot * math.exp(self.rate * self.maturity)


def _require_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ArgumentError(f"{name} must be strictly positive, got {value!r}")


def _log1p_over(z):
    """``log(1 + z) / z`` without cancellation for small ``|z|``."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    out = np.empty_like(z)
    zs = z[small]
    out[small] = 1.0 - zs / 2.0 + zs * zs / 3.0 - zs * zs * zs / 4.0
    zb = z[~small]
    out[~small] = np.log1p(zb) / zb
    return out


@dataclass(frozen=True)
class BlackScholes:
    sigma: float

    name = "black_scholes"

    def __post_init__(self):
        _require_positive("sigma", self.sigma)

    def log_cf(self, u, market: MarketParams):
        s2 = self.sigma * self.sigma
        T = market.maturity
        drift = math.log(market.spot) + (market.rate - 0.5 * s2) * T
        return 1j * u * drift - 0.5 * s2 * T * u * u


@dataclass(frozen=True)
class Heston:
    """Heston stochastic volatility.

    ``v0`` initial variance, ``kappa`` mean reversion speed, ``theta`` long
    run variance, ``xi`` vol-of-vol, ``rho`` spot/variance correlation.
    """

    v0: float
    kappa: float
    theta: float
    xi: float
    rho: float

    name = "heston"

    def __post_init__(self):
        for field in ("v0", "kappa", "theta", "xi"):
            _require_positive(field, getattr(self, field))
        if not (-1.0 <= self.rho <= 1.0):
            raise ArgumentError(f"rho must lie in [-1, 1], got {self.rho!r}")

    def log_cf(self, u, market: MarketParams):
        # "Little trap" arrangement: g uses (beta - d) in the numerator so that
        # |g exp(-dT)| < 1 and the logarithm never wraps. beta - d and the log
        # term are rewritten to cancel xi**2 analytically, which keeps the
        # xi -> 0 limit finite.
        u = np.asarray(u, dtype=complex)
        T = market.maturity
        xi2 = self.xi * self.xi
        iu = 1j * u
        a = iu + u * u
        beta = self.kappa - self.rho * self.xi * iu
        d = np.sqrt(beta * beta + xi2 * a)
        bpd = beta + d
        # a == 0 (u = 0 or u = -i) gives C = D = 0 exactly, but beta + d
        # vanishes there when kappa <= rho*xi; substitute a harmless value
        flat = a == 0
        bpd = np.where(flat, 1.0, bpd)
        e = np.exp(-d * T)
        one_minus_e = -np.expm1(-d * T)
        g = -xi2 * a / (bpd * bpd)  # (beta - d) / (beta + d)
        D = -a / bpd * one_minus_e / (1.0 - g * e)
        w_over = -a * one_minus_e / (bpd * bpd * (1.0 - g))  # w / xi**2
        log_term = _log1p_over(xi2 * w_over) * w_over  # log1p(w) / xi**2
        C = self.kappa * self.theta * (-a * T / bpd - 2.0 * log_term)
        drift = math.log(market.spot) + market.rate * T
        return iu * drift + C + D * self.v0


@dataclass(frozen=True)
class VarianceGamma:
    """Variance Gamma with risk-neutral drift correction.

    ``sigma`` and ``theta`` are the volatility and drift of the subordinated
    Brownian motion, ``nu`` the variance rate of the gamma clock.
    """

    sigma: float
    nu: float
    theta: float

    name = "variance_gamma"

    def __post_init__(self):
        _require_positive("sigma", self.sigma)
        _require_positive("nu", self.nu)
        if not math.isfinite(self.theta):
            raise ArgumentError(f"theta must be finite, got {self.theta!r}")
        if self.theta * self.nu + 0.5 * self.sigma**2 * self.nu >= 1.0:
            raise ArgumentError(
                "variance gamma requires theta*nu + sigma**2*nu/2 < 1 "
                f"(got {self.theta * self.nu + 0.5 * self.sigma**2 * self.nu!r})"
            )

    @property
    def omega(self) -> float:
        z = -self.theta * self.nu - 0.5 * self.sigma**2 * self.nu
        return math.log1p(z) / self.nu

    def max_shift(self) -> float:
        """Largest ``a`` with ``1 - theta*nu*a - sigma**2*nu*a**2/2 > 0``."""
        s2n = self.sigma**2 * self.nu
        tn = self.theta * self.nu
        return (-tn + math.sqrt(tn * tn + 2.0 * s2n)) / s2n

    def log_cf(self, u, market: MarketParams):
        u = np.asarray(u, dtype=complex)
        T = market.maturity
        z = -1j * self.theta * self.nu * u + 0.5 * self.sigma**2 * self.nu * u * u
        if np.any((z.real <= -1.0) & (np.abs(z.imag) < 1e-300)):
            raise ModelDomainError("variance gamma base crosses the branch cut")
        log_base = _log1p_over(z) * z
        drift = math.log(market.spot) + (market.rate + self.omega) * T
        return 1j * u * drift - (T / self.nu) * log_base


Variant = Union[BlackScholes, Heston, VarianceGamma]


@dataclass(frozen=True)
class ModelSpec:
    market: MarketParams
    variant: Variant

    @property
    def name(self) -> str:
        return self.variant.name


def char_fn(model: ModelSpec, u):
    """Characteristic function of ``ln S_T`` at (possibly complex) ``u``.

    Accepts a scalar or an array of arguments and returns the same shape.

    Raises
    ------
    ModelDomainError
        If the closed form overflows or leaves its branch for some ``u``.
    """
    scalar = np.ndim(u) == 0
    uu = np.asarray(u, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.exp(model.variant.log_cf(uu, model.market))
    bad = ~np.isfinite(val)
    if np.any(bad):
        first = uu.reshape(-1)[np.flatnonzero(bad.reshape(-1))[0]]
        raise ModelDomainError(f"{model.name} characteristic function is not finite", u=first)
    return complex(val) if scalar else val


def max_alpha(model: ModelSpec) -> float:
    """Upper end of the admissible dampening range (``inf`` if unbounded).

    Heston's bound depends on moment explosion times and is not computed in
    closed form here; it reports ``inf`` and relies on the finiteness check in
    :func:`char_fn`.
    """
    if isinstance(model.variant, VarianceGamma):
        return model.variant.max_shift() - 1.0
    return math.inf


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _d1_d2(market: MarketParams, sigma: float, K: float):
    vol = sigma * math.sqrt(market.maturity)
    d1 = (math.log(market.spot / K) + (market.rate + 0.5 * sigma * sigma) * market.maturity) / vol
    return d1, d1 - vol


def bs_closed_form(market: MarketParams, sigma: float, K: float) -> float:
    """Black-Scholes European call value."""
    _require_positive("strike", K)
    _require_positive("sigma", sigma)
    d1, d2 = _d1_d2(market, sigma, K)
    return market.spot * norm_cdf(d1) - K * market.discount * norm_cdf(d2)


def bs_put_closed_form(market: MarketParams, sigma: float, K: float) -> float:
    """Black-Scholes European put value, computed directly (not via parity)."""
    _require_positive("strike", K)
    _require_positive("sigma", sigma)
    d1, d2 = _d1_d2(market, sigma, K)
    return K * market.discount * norm_cdf(-d2) - market.spot * norm_cdf(-d1)


class ParityPut(NamedTuple):
    price: float
    below_floor: bool


def put_price_via_parity(call: float, market: MarketParams, K: float) -> ParityPut:
    """Put value from a call via ``P = C - S0 + K exp(-rT)``.

    A negative result is returned unchanged with ``below_floor`` set, which
    happens when the supplied call is under its no-arbitrage lower bound.
    """
    if call < 0:
        raise ArgumentError(f"call price must be nonnegative, got {call!r}")
    _require_positive("strike", K)
    put = call - market.spot + K * market.discount
    return ParityPut(put, put < 0)
