"""Gate-level circuits for state preparation and the inverse QFT.

Qubit ``q`` is bit ``q`` of the basis index (little-endian). Builders emit
high-level gates (H, CPHASE, SWAP, uniformly controlled RY/RZ);
:func:`decompose` lowers them to CX + U3 with an exactly tracked global
phase, and :func:`metrics` reports depth and counts of the lowered circuit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from . import kernels
from .exceptions import ArgumentError
from .fourier import is_power_of_two

__all__ = [
    "Gate",
    "Circuit",
    "BASIS_KINDS",
    "build_inverse_qft_circuit",
    "build_state_prep_circuit",
    "decompose",
    "metrics",
    "simulate",
    "u3_matrix",
]

ANGLE_EPS = 1e-12
BASIS_KINDS = frozenset({"CX", "U3"})
_ONE_QUBIT = {"H": 0, "PHASE": 1, "RY": 1, "RZ": 1, "U3": 3}
_TWO_QUBIT = {"CX": 0, "SWAP": 0, "CPHASE": 1}
_UNIFORM = ("UCRY", "UCRZ")


@dataclass(frozen=True)
class Gate:
    """One operation.

    For ``UCRY``/``UCRZ`` the first qubit is the target, the rest are the
    controls (control ``k`` is bit ``k`` of the selector), and ``params``
    holds one angle per control pattern. For ``CX`` the order is
    ``(control, target)``.
    """

    kind: str
    qubits: Tuple[int, ...]
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k, qs, ps = self.kind, self.qubits, self.params
        if k in _ONE_QUBIT:
            ok = len(qs) == 1 and len(ps) == _ONE_QUBIT[k]
        elif k in _TWO_QUBIT:
            ok = len(qs) == 2 and len(ps) == _TWO_QUBIT[k]
        elif k in _UNIFORM:
            ok = len(qs) >= 1 and len(ps) == 1 << (len(qs) - 1)
        else:
            raise ArgumentError(f"unknown gate kind {k!r}")
        if not ok:
            raise ArgumentError(f"malformed {k} gate: qubits={qs} params={ps}")
        if len(set(qs)) != len(qs) or min(qs) < 0:
            raise ArgumentError(f"{k} gate needs distinct nonnegative qubits, got {qs}")

    def to_line(self) -> str:
        line = f"{self.kind} {','.join(map(str, self.qubits))}"
        if self.params:
            line += " " + ",".join(repr(p) for p in self.params)
        return line

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ArgumentError(f"cannot parse gate line {line!r}")
        qubits = tuple(int(q) for q in parts[1].split(","))
        params = tuple(float(p) for p in parts[2].split(",")) if len(parts) == 3 else ()
        return cls(parts[0], qubits, params)


@dataclass
class Circuit:
    width: int
    gates: List[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def __post_init__(self):
        if self.width < 1:
            raise ArgumentError(f"circuit width must be >= 1, got {self.width}")
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate):
        if max(gate.qubits) >= self.width:
            raise ArgumentError(f"{gate.kind} on {gate.qubits} exceeds width {self.width}")

    def append(self, gate: Gate) -> None:
        self._check(gate)
        self.gates.append(gate)

    def extend(self, other: "Circuit") -> None:
        if other.width != self.width:
            raise ArgumentError("cannot join circuits of different width")
        for g in other.gates:
            self.append(g)
        self.global_phase += other.global_phase

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def to_text(self) -> str:
        head = f"# width={self.width} global_phase={self.global_phase!r}\n"
        return head + "".join(g.to_line() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        width = None
        phase = 0.0
        gates = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "width":
                        width = int(val)
                    elif key == "global_phase":
                        phase = float(val)
                continue
            gates.append(Gate.from_line(line))
        if width is None:
            width = 1 + max((max(g.qubits) for g in gates), default=0)
        return cls(width, gates, phase)


def build_inverse_qft_circuit(m: int) -> Circuit:
    """H / controlled-phase ladder followed by the qubit-reversal swaps.

    The textbook QFT ladder with every phase negated realises the complex
    conjugate unitary, i.e. the kernel ``exp(-2 pi i l j / 2**m)``.
    """
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    circ = Circuit(m)
    for j in reversed(range(m)):
        circ.append(Gate("H", (j,)))
        for k in reversed(range(j)):
            circ.append(Gate("CPHASE", (j, k), (-math.pi / (1 << (j - k)),)))
    for q in range(m // 2):
        circ.append(Gate("SWAP", (q, m - 1 - q)))
    return circ


def _uniform_rotation(kind: str, target: int, controls: Sequence[int], angles) -> List[Gate]:
    angles = np.asarray(angles, dtype=float)
    if np.all(np.abs(angles) < ANGLE_EPS):
        return []
    if np.all(np.abs(angles - angles[0]) < ANGLE_EPS):
        return [Gate(kind[2:], (target,), (float(angles[0]),))]
    return [Gate(kind, (target, *controls), tuple(angles))]


def build_state_prep_circuit(tilde_x) -> Circuit:
    """Amplitude-encoding circuit with ``C |0> = tilde_x`` exactly.

    Magnitudes are loaded by a cascade of uniformly controlled RY gates that
    split probability mass from the most significant qubit down; phases are
    then fixed by a cascade of uniformly controlled RZ gates from the least
    significant qubit up, with the leftover phase stored as global phase.
    """
    a = np.asarray(tilde_x, dtype=complex).reshape(-1)
    if not is_power_of_two(a.size) or a.size < 2:
        raise ArgumentError(f"state prep needs a power-of-two length >= 2, got {a.size}")
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ArgumentError(f"state prep needs a unit vector (norm={np.linalg.norm(a)!r})")
    m = a.size.bit_length() - 1
    circ = Circuit(m)

    probs = np.abs(a) ** 2
    for t in reversed(range(m)):
        blocks = probs.reshape(1 << (m - t - 1), 2, 1 << t).sum(axis=2)
        theta = 2.0 * np.arctan2(np.sqrt(blocks[:, 1]), np.sqrt(blocks[:, 0]))
        for g in _uniform_rotation("UCRY", t, range(t + 1, m), theta):
            circ.append(g)

    phi = np.where(np.abs(a) > 0, np.angle(a), 0.0)
    for t in range(m):
        pairs = phi.reshape(-1, 2)
        beta = pairs[:, 1] - pairs[:, 0]
        for g in _uniform_rotation("UCRZ", t, range(t + 1, m), beta):
            circ.append(g)
        phi = pairs.mean(axis=1)
    circ.global_phase = float(phi[0])
    return circ


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def _ry(theta):
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _ucr_decomposition(kind: str, target: int, controls: Sequence[int], angles) -> List[Gate]:
    """Uniformly controlled rotation as 2**k rotations and 2**k CX (Gray code).

    Rotation ``i`` sees the sign ``(-1)**popcount(g_i & c)`` for control
    pattern ``c``, so the rotation angles solve a Walsh system whose matrix
    is orthogonal up to ``2**k``.
    """
    k = len(controls)
    size = 1 << k
    alpha = np.asarray(angles, dtype=float)
    idx = np.arange(size)
    both = idx[:, None] & _gray(idx)[None, :]
    parity = np.zeros_like(both)
    for b in range(k):
        parity ^= (both >> b) & 1
    theta = (1 - 2 * parity).T @ alpha / size
    rot = "RY" if kind == "UCRY" else "RZ"
    out: List[Gate] = []
    for i in range(size):
        if abs(theta[i]) >= ANGLE_EPS:
            out.append(Gate(rot, (target,), (float(theta[i]),)))
        if k:
            flip = _gray(i) ^ _gray((i + 1) % size)
            out.append(Gate("CX", (controls[flip.bit_length() - 1], target)))
    return out


def decompose(circuit: Circuit) -> Circuit:
    """Lower every gate to CX and U3, tracking the global phase exactly.

    CPHASE -> 2 CX + 3 phase rotations, SWAP -> 3 CX, uniformly controlled
    rotation on k controls -> 2**k CX + up to 2**k rotations. Rotations with
    all angles below 1e-12 are dropped.
    """
    out = Circuit(circuit.width, [], circuit.global_phase)

    def u3(q, theta, phi, lam):
        if abs(theta) < ANGLE_EPS and abs(phi) < ANGLE_EPS and abs(lam) < ANGLE_EPS:
            return
        out.append(Gate("U3", (q,), (theta, phi, lam)))

    def lower(g: Gate):
        kind, qs, ps = g.kind, g.qubits, g.params
        if kind == "U3":
            u3(qs[0], *ps)
        elif kind == "CX":
            out.append(g)
        elif kind == "H":
            u3(qs[0], math.pi / 2.0, 0.0, math.pi)
        elif kind == "PHASE":
            u3(qs[0], 0.0, 0.0, ps[0])
        elif kind == "RY":
            u3(qs[0], ps[0], 0.0, 0.0)
        elif kind == "RZ":
            # RZ(t) = exp(-i t/2) * diag(1, exp(i t))
            if abs(ps[0]) >= ANGLE_EPS:
                out.global_phase -= ps[0] / 2.0
            u3(qs[0], 0.0, 0.0, ps[0])
        elif kind == "SWAP":
            a, b = qs
            out.append(Gate("CX", (a, b)))
            out.append(Gate("CX", (b, a)))
            out.append(Gate("CX", (a, b)))
        elif kind == "CPHASE":
            a, b = qs
            t = ps[0]
            if abs(t) < ANGLE_EPS:
                return
            u3(a, 0.0, 0.0, t / 2.0)
            out.append(Gate("CX", (a, b)))
            u3(b, 0.0, 0.0, -t / 2.0)
            out.append(Gate("CX", (a, b)))
            u3(b, 0.0, 0.0, t / 2.0)
        elif kind in _UNIFORM:
            for h in _ucr_decomposition(kind, qs[0], qs[1:], ps):
                lower(h)
        else:  # pragma: no cover - Gate validates kinds
            raise RuntimeError(f"no decomposition rule for {kind}")

    for g in circuit.gates:
        lower(g)
    return out


def metrics(circuit: Circuit) -> dict:
    """Depth (greedy as-soon-as-possible layering) and gate counts."""
    bad = {g.kind for g in circuit.gates} - BASIS_KINDS
    if bad:
        raise ArgumentError(f"metrics need a CX/U3 circuit; found {sorted(bad)}")
    level = [0] * circuit.width
    for g in circuit.gates:
        layer = 1 + max(level[q] for q in g.qubits)
        for q in g.qubits:
            level[q] = layer
    return {
        "width": circuit.width,
        "depth": max(level, default=0),
        "cx_count": circuit.count("CX"),
        "total_gates": len(circuit.gates),
    }


def metrics_json(circuit: Circuit) -> str:
    return json.dumps(metrics(circuit), sort_keys=True)


def simulate(circuit: Circuit, state=None) -> np.ndarray:
    """Apply the gate list to ``state`` (default ``|0...0>``), global phase included."""
    size = 1 << circuit.width
    if state is None:
        psi = np.zeros(size, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.array(state, dtype=complex, copy=True).reshape(-1)
        if psi.size != size:
            raise ArgumentError(f"state has {psi.size} amplitudes, circuit needs {size}")
    for g in circuit.gates:
        kind, qs, ps = g.kind, g.qubits, g.params
        if kind == "CX":
            kernels.apply_cx(psi, qs[0], qs[1])
        elif kind == "SWAP":
            kernels.apply_swap(psi, qs[0], qs[1])
        elif kind == "CPHASE":
            kernels.apply_cphase(psi, qs[0], qs[1], complex(np.exp(1j * ps[0])))
        elif kind in _UNIFORM:
            rot = _ry if kind == "UCRY" else _rz
            mats = np.ascontiguousarray(np.stack([rot(t) for t in ps]))
            kernels.apply_ucr(psi, qs[0], np.asarray(qs[1:], dtype=np.intp), mats)
        else:
            if kind == "H":
                u = _H
            elif kind == "PHASE":
                u = np.diag([1.0, np.exp(1j * ps[0])])
            elif kind == "RY":
                u = _ry(ps[0])
            elif kind == "RZ":
                u = _rz(ps[0])
            else:
                u = u3_matrix(*ps)
            kernels.apply_1q(psi, qs[0], complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1]))
    if circuit.global_phase:
        psi *= np.exp(1j * circuit.global_phase)
    return psi
