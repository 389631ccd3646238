import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from qftprice.exceptions import ArgumentError, ModelDomainError
from qftprice.models import (
    BlackScholes,
    Heston,
    MarketParams,
    ModelSpec,
    VarianceGamma,
    bs_closed_form,
    bs_put_closed_form,
    char_fn,
    max_alpha,
    put_price_via_parity,
)

from conftest import REF_MARKET, REF_SIGMA

# exp(-rT) * int_k^inf (e^s - K) f(s) ds for S0=100, r=0.05, sigma=0.3,
# T=0.5, K=100, by adaptive quadrature against the lognormal density
# (abs. error estimate 4e-14).
BS_ATM_QUADRATURE = 9.634876628449229

markets = st.builds(
    MarketParams,
    spot=st.floats(1.0, 1000.0),
    rate=st.floats(-0.05, 0.15),
    maturity=st.floats(0.05, 30.0),
)
bs_variants = st.builds(BlackScholes, sigma=st.floats(0.01, 1.5))
heston_variants = st.builds(
    Heston,
    v0=st.floats(0.005, 0.5),
    kappa=st.floats(0.1, 6.0),
    theta=st.floats(0.005, 0.5),
    xi=st.floats(0.01, 1.5),
    rho=st.floats(-1.0, 1.0),
)
vg_variants = st.builds(
    VarianceGamma,
    sigma=st.floats(0.05, 0.6),
    nu=st.floats(0.01, 1.0),
    theta=st.floats(-0.5, 0.3),
).filter(lambda v: v.theta * v.nu + 0.5 * v.sigma**2 * v.nu < 0.9)
models = st.builds(ModelSpec, markets, st.one_of(bs_variants, heston_variants, vg_variants))


def test_char_fn_at_zero_is_one(any_model):
    assert char_fn(any_model, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_martingale_identity_reference_market(bs_model):
    assert char_fn(bs_model, -1j) == pytest.approx(100.0 * math.exp(0.025), rel=1e-12)


def test_bs_char_fn_matches_density_quadrature(bs_model):
    m = REF_MARKET
    mu = math.log(m.spot) + (m.rate - 0.5 * REF_SIGMA**2) * m.maturity
    sd = REF_SIGMA * math.sqrt(m.maturity)

    def dens(s):
        return math.exp(-((s - mu) ** 2) / (2 * sd * sd)) / (sd * math.sqrt(2 * math.pi))

    lo, hi = mu - 40 * sd, mu + 40 * sd
    re = integrate.quad(lambda s: math.cos(s) * dens(s), lo, hi, limit=400, epsabs=1e-14)[0]
    im = integrate.quad(lambda s: math.sin(s) * dens(s), lo, hi, limit=400, epsabs=1e-14)[0]
    assert abs(char_fn(bs_model, 1.0) - complex(re, im)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(models)
def test_phi_zero_and_martingale_random_draws(model):
    assert abs(char_fn(model, 0.0) - 1.0) < 1e-12
    fwd = model.market.spot * math.exp(model.market.rate * model.market.maturity)
    assert abs(char_fn(model, -1j) - fwd) <= 1e-10 * fwd


@settings(max_examples=50, deadline=None)
@given(models, st.floats(-50.0, 50.0))
def test_hermitian_symmetry_on_real_line(model, u):
    assert abs(char_fn(model, -u) - np.conj(char_fn(model, u))) < 1e-12


def test_vg_degenerates_to_bs():
    u = np.linspace(-20.0, 20.0, 801)
    bs = ModelSpec(REF_MARKET, BlackScholes(0.3))
    vg = ModelSpec(REF_MARKET, VarianceGamma(sigma=0.3, nu=1e-8, theta=0.1))
    assert np.max(np.abs(char_fn(vg, u) - char_fn(bs, u))) < 1e-4


def test_heston_degenerates_to_bs():
    u = np.linspace(-20.0, 20.0, 801)
    bs = ModelSpec(REF_MARKET, BlackScholes(0.3))
    h = ModelSpec(REF_MARKET, Heston(v0=0.09, kappa=1.5, theta=0.09, xi=1e-8, rho=-0.5))
    assert np.max(np.abs(char_fn(h, u) - char_fn(bs, u))) < 1e-4


def _heston_textbook(u, m, h):
    # plain little-trap form without the xi**2 cancellation rewrite
    T = m.maturity
    b = h.kappa - h.rho * h.xi * 1j * u
    d = np.sqrt(b * b + h.xi**2 * (1j * u + u * u))
    g = (b - d) / (b + d)
    e = np.exp(-d * T)
    C = h.kappa * h.theta / h.xi**2 * ((b - d) * T - 2 * np.log((1 - g * e) / (1 - g)))
    D = (b - d) / h.xi**2 * (1 - e) / (1 - g * e)
    return np.exp(1j * u * (math.log(m.spot) + m.rate * T) + C + D * h.v0)


@pytest.mark.parametrize("u", [0.3, 2.0, -5.0, 1 - 3.5j, -7 - 3.5j, 25 - 2j])
def test_heston_matches_textbook_form(heston_model, u):
    ref = _heston_textbook(u, heston_model.market, heston_model.variant)
    assert char_fn(heston_model, u) == pytest.approx(ref, rel=1e-10)


def test_heston_long_maturity_has_no_branch_jump():
    m = MarketParams(100.0, 0.02, 30.0)
    h = ModelSpec(m, Heston(v0=0.04, kappa=0.5, theta=0.04, xi=1.0, rho=-0.9))
    u = np.linspace(0.0, 40.0, 4001)
    phi = char_fn(h, u)
    # the modulus is smooth; a branch jump shows up as a step in the phase increment
    steps = np.abs(np.diff(np.unwrap(np.angle(phi))))
    assert np.all(np.isfinite(phi))
    assert steps.max() < 0.5


def test_vg_drift_correction_is_required():
    v = VarianceGamma(sigma=0.2, nu=0.3, theta=-0.1)
    assert v.omega == pytest.approx(math.log(1 - v.theta * v.nu - 0.5 * v.sigma**2 * v.nu) / v.nu)


def test_vg_strip_bound(vg_model):
    v = vg_model.variant
    a = max_alpha(vg_model) + 1.0
    assert 1 - v.theta * v.nu * a - 0.5 * v.sigma**2 * v.nu * a * a == pytest.approx(0.0, abs=1e-12)
    assert max_alpha(ModelSpec(REF_MARKET, BlackScholes(0.3))) == math.inf


def test_overflow_is_a_domain_error():
    m = ModelSpec(REF_MARKET, BlackScholes(0.3))
    with pytest.raises(ModelDomainError) as info:
        char_fn(m, -2000j)
    assert info.value.u == -2000j


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(spot=0.0, rate=0.0, maturity=1.0),
        dict(spot=100.0, rate=0.0, maturity=0.0),
        dict(spot=100.0, rate=math.nan, maturity=1.0),
    ],
)
def test_market_invariants(kwargs):
    with pytest.raises(ArgumentError):
        MarketParams(**kwargs)


def test_variant_invariants():
    with pytest.raises(ArgumentError):
        BlackScholes(0.0)
    with pytest.raises(ArgumentError):
        Heston(0.04, 1.0, 0.04, 0.3, rho=1.5)
    with pytest.raises(ArgumentError):
        VarianceGamma(sigma=0.2, nu=0.0, theta=0.0)
    with pytest.raises(ArgumentError):
        VarianceGamma(sigma=1.0, nu=2.0, theta=0.1)


def test_bs_closed_form_matches_frozen_quadrature(market):
    assert abs(bs_closed_form(market, REF_SIGMA, 100.0) - BS_ATM_QUADRATURE) < 1e-12


def test_bs_closed_form_small_strike_limit(market):
    assert bs_closed_form(market, REF_SIGMA, 1e-12) == pytest.approx(market.spot, abs=1e-10)


def test_bs_closed_form_zero_vol_limit(market):
    expected = math.exp(-0.025) * max(100.0 * math.exp(0.025) - 100.0, 0.0)
    assert bs_closed_form(market, 1e-9, 100.0) == pytest.approx(expected, abs=1e-10)


def test_parity_floor(market):
    K = 95.0
    res = put_price_via_parity(market.spot - K * market.discount, market, K)
    assert res.price == pytest.approx(0.0, abs=1e-12)


def test_parity_matches_closed_form_put(market):
    call = bs_closed_form(market, REF_SIGMA, 100.0)
    put = put_price_via_parity(call, market, 100.0)
    assert not put.below_floor
    assert put.price == pytest.approx(bs_put_closed_form(market, REF_SIGMA, 100.0), abs=1e-12)


def test_parity_small_strike_limit(market):
    K = 1e-12
    put = put_price_via_parity(market.spot, market, K)
    assert put.price == pytest.approx(0.0, abs=1e-10)


def test_parity_flags_calls_below_floor(market):
    put = put_price_via_parity(0.0, market, 50.0)
    assert put.below_floor and put.price < 0
    with pytest.raises(ArgumentError):
        put_price_via_parity(-1.0, market, 50.0)


@pytest.mark.parametrize("rho", [0.5, 1.0])
def test_heston_martingale_when_kappa_below_rho_xi(rho):
    m = MarketParams(1.0, 0.0, 1.0)
    h = ModelSpec(m, Heston(v0=0.5, kappa=0.5, theta=0.5, xi=1.0, rho=rho))
    assert char_fn(h, -1j) == pytest.approx(1.0, abs=1e-14)
    assert char_fn(h, 0.0) == pytest.approx(1.0, abs=1e-14)
