"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and in-place semantics; vectorised over index sets instead
of scalar loops.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=256)
def _pair_indices(n, q):
    idx = np.arange(n, dtype=np.intp)
    i0 = idx[(idx >> q) & 1 == 0]
    return i0, i0 | (1 << q)


def fft_inplace(a, tw, rev):
    n = a.shape[0]
    a[:] = a[rev]
    size = 2
    while size <= n:
        half = size >> 1
        w = tw[:: n // size][:half]
        blocks = a.reshape(n // size, size)
        u = blocks[:, :half].copy()
        t = blocks[:, half:] * w
        blocks[:, :half] = u + t
        blocks[:, half:] = u - t
        size <<= 1


def apply_1q(psi, q, m00, m01, m10, m11):
    i0, i1 = _pair_indices(psi.shape[0], q)
    a0 = psi[i0]
    a1 = psi[i1]
    psi[i0] = m00 * a0 + m01 * a1
    psi[i1] = m10 * a0 + m11 * a1


def apply_cx(psi, control, target):
    i0, i1 = _pair_indices(psi.shape[0], target)
    sel = (i0 >> control) & 1 == 1
    i0, i1 = i0[sel], i1[sel]
    psi[i0], psi[i1] = psi[i1], psi[i0].copy()


def apply_swap(psi, qa, qb):
    idx = np.arange(psi.shape[0], dtype=np.intp)
    src = idx[((idx >> qa) & 1 == 1) & ((idx >> qb) & 1 == 0)]
    dst = (src ^ (1 << qa)) | (1 << qb)
    psi[src], psi[dst] = psi[dst], psi[src].copy()


def apply_cphase(psi, qa, qb, phase):
    idx = np.arange(psi.shape[0], dtype=np.intp)
    mask = (1 << qa) | (1 << qb)
    psi[(idx & mask) == mask] *= phase


def apply_ucr(psi, target, controls, mats):
    i0, i1 = _pair_indices(psi.shape[0], target)
    c = np.zeros_like(i0)
    for k, q in enumerate(controls):
        c |= ((i0 >> q) & 1) << k
    m = mats[c]
    a0 = psi[i0]
    a1 = psi[i1]
    psi[i0] = m[:, 0, 0] * a0 + m[:, 0, 1] * a1
    psi[i1] = m[:, 1, 0] * a0 + m[:, 1, 1] * a1
