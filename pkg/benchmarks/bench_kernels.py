"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--fft-sizes 10 14 18] [--qubits 8 12]

Reports the best-of-``repeat`` wall time for a radix-2 FFT and for running a
decomposed state-preparation + inverse-QFT gate list, per backend.
"""
import argparse
import math
import timeit

import numpy as np

from qftprice import kernels
from qftprice.fourier import _plan
from qftprice.qcircuit import build_inverse_qft_circuit, build_state_prep_circuit, decompose, u3_matrix


def backends():
    out = {"python": kernels.load_backend("python")}
    try:
        out["cython"] = kernels.load_backend("cython")
    except ImportError:
        print("compiled kernels not built; timing the fallback only")
    return out


def bench_fft(mod, bits, repeat):
    m = 1 << bits
    rev, fwd, _ = _plan(m)
    x = np.random.default_rng(bits).standard_normal(m).astype(complex)

    def run():
        a = x.copy()
        mod.fft_inplace(a, fwd, rev)

    number = max(1, 2**20 // m)
    return min(timeit.repeat(run, number=number, repeat=repeat)) / number


def _lowered_ops(m):
    rng = np.random.default_rng(m)
    a = rng.standard_normal(1 << m) + 1j * rng.standard_normal(1 << m)
    circ = build_state_prep_circuit(a / np.linalg.norm(a))
    circ.extend(build_inverse_qft_circuit(m))
    ops = []
    for g in decompose(circ).gates:
        if g.kind == "CX":
            ops.append(("cx", g.qubits))
        else:
            u = u3_matrix(*g.params)
            ops.append(("1q", (g.qubits[0], *map(complex, u.ravel()))))
    return ops


def bench_circuit(mod, m, repeat, ops):
    psi0 = np.zeros(1 << m, dtype=complex)
    psi0[0] = 1.0

    def run():
        psi = psi0.copy()
        for kind, args in ops:
            if kind == "cx":
                mod.apply_cx(psi, *args)
            else:
                mod.apply_1q(psi, *args)

    return min(timeit.repeat(run, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--fft-sizes", type=int, nargs="+", default=[10, 14, 18])
    p.add_argument("--qubits", type=int, nargs="+", default=[8, 12])
    args = p.parse_args(argv)
    mods = backends()

    print(f"{'case':<28}" + "".join(f"{name:>14}" for name in mods) + f"{'speedup':>10}")
    for bits in args.fft_sizes:
        t = {name: bench_fft(mod, bits, args.repeat) for name, mod in mods.items()}
        _row(f"fft M=2^{bits}", t)
    for m in args.qubits:
        ops = _lowered_ops(m)
        t = {name: bench_circuit(mod, m, args.repeat, ops) for name, mod in mods.items()}
        _row(f"circuit m={m} ({len(ops)} gates)", t)


def _row(label, t):
    cells = "".join(f"{v * 1e3:>12.3f}ms" for v in t.values())
    speed = t["python"] / t["cython"] if "cython" in t else math.nan
    print(f"{label:<28}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
