"""Discrete Fourier transforms in the single convention used by the pricer.

forward: ``X[l] = sum_j x[j] exp(-2 pi i j l / M)``  (no prefactor)
inverse: ``x[j] = (1/M) sum_l X[l] exp(+2 pi i j l / M)``
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import kernels
from .exceptions import ArgumentError

__all__ = ["FORWARD", "INVERSE", "dft_naive", "fft_radix2", "is_power_of_two"]

FORWARD = "forward"
INVERSE = "inverse"

_NAIVE_BLOCK = 256


def is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def _check_direction(direction):
    if direction not in (FORWARD, INVERSE):
        raise ArgumentError(f"direction must be 'forward' or 'inverse', got {direction!r}")


@lru_cache(maxsize=64)
def _unit_roots(m: int) -> np.ndarray:
    """``exp(-2 pi i k / m)`` for ``k < m``, read-only.

    Built from the first quadrant and rotated by exact powers of ``-i`` so
    quarter turns are exact and the table has the group's symmetry.
    """
    if m % 4:
        w = np.exp(-2j * np.pi * np.arange(m) / m)
    else:
        q = m // 4
        theta = 2.0 * np.pi * np.arange(q) / m
        base = np.cos(theta) - 1j * np.sin(theta)
        w = np.concatenate([base, -1j * base, -base, 1j * base])
    w.setflags(write=False)
    return w


def dft_naive(x, direction: str = FORWARD) -> np.ndarray:
    """O(M^2) DFT, the reference every fast path is checked against.

    Phases are looked up by the exact integer ``j*l mod M`` so rounding
    does not grow with the index product.
    """
    _check_direction(direction)
    x = np.asarray(x, dtype=complex).reshape(-1)
    m = x.size
    if m < 1:
        raise ArgumentError("dft_naive needs at least one element")
    roots = _unit_roots(m)
    if direction == INVERSE:
        roots = roots.conj()
    j = np.arange(m)
    out = np.empty(m, dtype=complex)
    for lo in range(0, m, _NAIVE_BLOCK):
        rows = np.arange(lo, min(lo + _NAIVE_BLOCK, m))
        out[rows] = roots[np.outer(rows, j) % m] @ x
    if direction == INVERSE:
        out /= m
    return out


@lru_cache(maxsize=64)
def _plan(m: int):
    bits = m.bit_length() - 1
    idx = np.arange(m, dtype=np.intp)
    rev = np.zeros(m, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    half = max(m // 2, 1)
    fwd = np.ascontiguousarray(_unit_roots(m)[:half])
    inv = np.ascontiguousarray(fwd.conj())
    for arr in (rev, fwd, inv):
        arr.setflags(write=False)
    return rev, fwd, inv


def fft_radix2(x, direction: str = FORWARD) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT.

    Returns a new array; the input is not modified.

    Raises
    ------
    ArgumentError
        If ``len(x)`` is not a power of two.
    """
    _check_direction(direction)
    a = np.array(x, dtype=complex, copy=True).reshape(-1)
    m = a.size
    if not is_power_of_two(m):
        raise ArgumentError(f"fft_radix2 needs a power-of-two length, got {m}")
    rev, fwd, inv = _plan(m)
    kernels.fft_inplace(a, fwd if direction == FORWARD else inv, rev)
    if direction == INVERSE:
        a /= m
    return a
