import math

import pytest

from qftprice.carr_madan import default_grid
from qftprice.models import BlackScholes, Heston, MarketParams, ModelSpec, VarianceGamma

# Black-Scholes reference setup: S0=100, r=0.05, sigma=0.3, T=0.5.
REF_MARKET = MarketParams(spot=100.0, rate=0.05, maturity=0.5)
REF_SIGMA = 0.3

# Heston / VG regimes are our own choice (equity-like skew, moderate
# vol-of-vol); they only need to exercise the non-Gaussian code paths.
HESTON = Heston(v0=0.04, kappa=1.5, theta=0.04, xi=0.3, rho=-0.7)
VG = VarianceGamma(sigma=0.12, nu=0.2, theta=-0.14)


@pytest.fixture
def market():
    return REF_MARKET


@pytest.fixture
def bs_model():
    return ModelSpec(REF_MARKET, BlackScholes(REF_SIGMA))


@pytest.fixture
def heston_model():
    return ModelSpec(REF_MARKET, HESTON)


@pytest.fixture
def vg_model():
    return ModelSpec(REF_MARKET, VG)


ALL_MODELS = {
    "bs": ModelSpec(REF_MARKET, BlackScholes(REF_SIGMA)),
    "heston": ModelSpec(REF_MARKET, HESTON),
    "vg": ModelSpec(REF_MARKET, VG),
}


@pytest.fixture(params=sorted(ALL_MODELS))
def any_model(request):
    return ALL_MODELS[request.param]


@pytest.fixture
def ref_grid():
    return default_grid(REF_MARKET, n=10, alpha=2.5)


def ref_k0(n=10):
    N = 1 << n
    return math.log(100.0) - N * (1.0 / math.sqrt(N)) / 2.0


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record a criterion's outcome for the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        _ACCEPTANCE[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
