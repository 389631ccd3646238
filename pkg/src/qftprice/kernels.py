"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``QFTPRICE_PURE_PYTHON=1`` to force the fallback.
"""
import importlib
import os

_NAMES = ("fft_inplace", "apply_1q", "apply_cx", "apply_swap", "apply_cphase", "apply_ucr")


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("qftprice._kernels")
    if name == "python":
        return importlib.import_module("qftprice._kernels_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("QFTPRICE_PURE_PYTHON", "") not in ("", "0"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", load_backend("python")


BACKEND, _impl = _select()

fft_inplace = _impl.fft_inplace
apply_1q = _impl.apply_1q
apply_cx = _impl.apply_cx
apply_swap = _impl.apply_swap
apply_cphase = _impl.apply_cphase
apply_ucr = _impl.apply_ucr

__all__ = ["BACKEND", "load_backend", *_NAMES]
