import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qftprice.exceptions import ArgumentError
from qftprice.fourier import FORWARD, INVERSE, dft_naive, fft_radix2, is_power_of_two


def _random_vector(m, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


def test_delta_at_one_gives_exact_roots():
    out = fft_radix2([0, 1, 0, 0], FORWARD)
    assert np.array_equal(out, np.array([1, -1j, -1, 1j]))


def test_forward_sign_convention():
    # X[1] of exp(+2 pi i j / M) collects all mass: the kernel is exp(-2 pi i j l / M)
    m = 16
    x = np.exp(2j * np.pi * np.arange(m) / m)
    out = fft_radix2(x, FORWARD)
    assert abs(out[1] - m) < 1e-12
    assert np.max(np.abs(np.delete(out, 1))) < 1e-12


def test_naive_against_textbook_sum():
    m = 12
    x = _random_vector(m, 3)
    j = np.arange(m)
    ref = np.array([np.sum(x * np.exp(-2j * np.pi * j * l / m)) for l in range(m)])
    assert np.allclose(dft_naive(x), ref, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 4, 8, 64, 512, 4096])
def test_fft_matches_naive(m):
    x = _random_vector(m, m)
    for direction in (FORWARD, INVERSE):
        diff = np.max(np.abs(fft_radix2(x, direction) - dft_naive(x, direction)))
        scale = np.linalg.norm(x) * (1.0 if direction == FORWARD else 1.0 / m)
        assert diff <= 1e-12 * max(scale, 1e-300)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_round_trip(bits, seed):
    x = _random_vector(1 << bits, seed)
    back = fft_radix2(fft_radix2(x, FORWARD), INVERSE)
    assert np.max(np.abs(back - x)) < 1e-12 * max(1.0, np.linalg.norm(x))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_parseval(bits, seed):
    x = _random_vector(1 << bits, seed)
    X = fft_radix2(x, FORWARD)
    assert np.linalg.norm(X) ** 2 == pytest.approx(x.size * np.linalg.norm(x) ** 2, rel=1e-12)


def test_does_not_modify_input():
    x = _random_vector(32, 0)
    keep = x.copy()
    fft_radix2(x)
    assert np.array_equal(x, keep)


@pytest.mark.parametrize("m", [0, 3, 6, 1000])
def test_rejects_non_power_of_two(m):
    with pytest.raises(ArgumentError):
        fft_radix2(np.ones(m))


def test_rejects_unknown_direction():
    with pytest.raises(ArgumentError):
        fft_radix2(np.ones(4), "backward")
    with pytest.raises(ArgumentError):
        dft_naive(np.ones(4), "sideways")


def test_is_power_of_two():
    assert [m for m in range(20) if is_power_of_two(m)] == [1, 2, 4, 8, 16]
