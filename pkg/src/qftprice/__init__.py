"""European call pricing by damped Fourier inversion, classically and on a simulated QFT."""
from .carr_madan import GridSpec, PriceCurve, build_x_vector, default_grid, make_grid, price_at_strike, price_fft, psi
from .exceptions import ArgumentError, GridRangeError, ModelDomainError, QftPriceError
from .kernels import BACKEND as KERNEL_BACKEND
from .models import (
    BlackScholes,
    Heston,
    MarketParams,
    ModelSpec,
    VarianceGamma,
    bs_closed_form,
    char_fn,
    put_price_via_parity,
)

__version__ = "0.1.0"
