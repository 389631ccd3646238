# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: radix-2 butterflies and statevector gate updates.

Every routine mutates its first argument in place. Signatures match
``_kernels_py`` exactly.
"""

ctypedef double complex cplx


def fft_inplace(cplx[::1] a, const cplx[::1] tw, const Py_ssize_t[::1] rev):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, start, half, step, size
    cdef cplx u, t, w
    for i in range(n):
        j = rev[i]
        if i < j:
            u = a[i]
            a[i] = a[j]
            a[j] = u
    size = 2
    while size <= n:
        half = size >> 1
        step = n // size
        start = 0
        while start < n:
            for k in range(half):
                w = tw[k * step]
                t = w * a[start + k + half]
                u = a[start + k]
                a[start + k] = u + t
                a[start + k + half] = u - t
            start += size
        size <<= 1


def apply_1q(cplx[::1] psi, Py_ssize_t q, cplx m00, cplx m01, cplx m10, cplx m11):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, i1
    cdef cplx a0, a1
    for i in range(n):
        if i & bit:
            continue
        i1 = i | bit
        a0 = psi[i]
        a1 = psi[i1]
        psi[i] = m00 * a0 + m01 * a1
        psi[i1] = m10 * a0 + m11 * a1


def apply_cx(cplx[::1] psi, Py_ssize_t control, Py_ssize_t target):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t cb = (<Py_ssize_t>1) << control
    cdef Py_ssize_t tb = (<Py_ssize_t>1) << target
    cdef Py_ssize_t i
    cdef cplx tmp
    for i in range(n):
        if (i & cb) and not (i & tb):
            tmp = psi[i]
            psi[i] = psi[i | tb]
            psi[i | tb] = tmp


def apply_swap(cplx[::1] psi, Py_ssize_t qa, Py_ssize_t qb):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t ab = (<Py_ssize_t>1) << qa
    cdef Py_ssize_t bb = (<Py_ssize_t>1) << qb
    cdef Py_ssize_t i, j
    cdef cplx tmp
    for i in range(n):
        if (i & ab) and not (i & bb):
            j = (i ^ ab) | bb
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp


def apply_cphase(cplx[::1] psi, Py_ssize_t qa, Py_ssize_t qb, cplx phase):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t mask = ((<Py_ssize_t>1) << qa) | ((<Py_ssize_t>1) << qb)
    cdef Py_ssize_t i
    for i in range(n):
        if (i & mask) == mask:
            psi[i] = psi[i] * phase


def apply_ucr(cplx[::1] psi, Py_ssize_t target, const Py_ssize_t[::1] controls,
              const cplx[:, :, ::1] mats):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t tb = (<Py_ssize_t>1) << target
    cdef Py_ssize_t nc = controls.shape[0]
    cdef Py_ssize_t i, i1, c, k
    cdef cplx a0, a1
    for i in range(n):
        if i & tb:
            continue
        c = 0
        for k in range(nc):
            if (i >> controls[k]) & 1:
                c |= (<Py_ssize_t>1) << k
        i1 = i | tb
        a0 = psi[i]
        a1 = psi[i1]
        psi[i] = mats[c, 0, 0] * a0 + mats[c, 0, 1] * a1
        psi[i1] = mats[c, 1, 0] * a0 + mats[c, 1, 1] * a1
