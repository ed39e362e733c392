"""Exact density-matrix simulation of small noisy circuit fragments.

Two 6-qubit backends share a pair of all-to-all triangles ``{0, 1, 2}`` and
``{3, 4, 5}``.  The chiplet backend joins them with a single link edge 2-3 that
adds depolarizing-then-damping noise; the monolithic backend joins them with
three ordinary edges 0-3, 1-4, 2-5.  Qubit 0 is the most significant bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import check_density, state_fidelity
from .topology import EdgeKind

MAX_QUBITS = 8

SINGLE_QUBIT_GATES = ("H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ")
ROTATIONS = ("RX", "RY", "RZ")
TWO_QUBIT_GATES = ("CX", "SWAP")

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "X": _X, "Y": _Y, "Z": _Z,
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
}
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


class SimulationError(ValueError):
    """Invalid circuit, backend or simulation request."""


def gate_matrix(gate: str, angle: float | None = None) -> np.ndarray:
    if gate in _FIXED:
        return _FIXED[gate]
    if gate in ROTATIONS:
        if angle is None:
            raise SimulationError(f"{gate} needs an angle")
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        if gate == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]])
        if gate == "RY":
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    if gate == "CX":
        return _CX
    if gate == "SWAP":
        return _SWAP
    raise SimulationError(f"unknown gate {gate!r}")


# ------------------------------------------------------------------ circuits

@dataclass(frozen=True)
class Op:
    gate: str
    qubits: tuple[int, ...]
    angle: float | None = None
    moved: int | None = None  # SWAP only: physical qubit that carries the routed state


@dataclass
class Circuit:
    n_qubits: int
    ops: list[Op] = field(default_factory=list)
    final_layout: tuple[int, ...] | None = None  # logical -> physical after routing

    def __post_init__(self):
        if not (1 <= self.n_qubits <= MAX_QUBITS):
            raise SimulationError(f"n_qubits must lie in [1, {MAX_QUBITS}]")
        for op in self.ops:
            self._check(op)

    def _check(self, op: Op) -> None:
        arity = 2 if op.gate in TWO_QUBIT_GATES else 1
        if op.gate not in SINGLE_QUBIT_GATES + TWO_QUBIT_GATES:
            raise SimulationError(f"unknown gate {op.gate!r}")
        if len(op.qubits) != arity or len(set(op.qubits)) != arity:
            raise SimulationError(f"{op.gate} needs {arity} distinct operands: {op.qubits}")
        if any(not (0 <= q < self.n_qubits) for q in op.qubits):
            raise SimulationError(f"operand out of range in {op}")

    def append(self, gate: str, *qubits: int, angle: float | None = None) -> "Circuit":
        op = Op(gate, tuple(qubits), angle)
        self._check(op)
        self.ops.append(op)
        return self

    def count(self, gate: str) -> int:
        return sum(op.gate == gate for op in self.ops)


def random_circuit(n_qubits: int = 6, depth: int = 12, seed: int = 0) -> Circuit:
    """Layered random circuit.

    Each layer shuffles the qubits into pairs.  A pair receives a CX (control
    first) with probability 1/2; otherwise each of its qubits receives a gate
    drawn uniformly from ``SINGLE_QUBIT_GATES`` with rotation angles uniform
    in ``[0, 2 pi)``.  An unpaired qubit always receives a single-qubit gate.
    """
    if depth < 1:
        raise SimulationError(f"depth must be >= 1: {depth}")
    rng = np.random.default_rng(seed)
    c = Circuit(n_qubits)

    def single(q):
        g = SINGLE_QUBIT_GATES[rng.integers(len(SINGLE_QUBIT_GATES))]
        angle = float(rng.uniform(0, 2 * math.pi)) if g in ROTATIONS else None
        c.append(g, int(q), angle=angle)

    for _ in range(depth):
        order = rng.permutation(n_qubits)
        for i in range(0, n_qubits - 1, 2):
            a, b = int(order[i]), int(order[i + 1])
            if rng.random() < 0.5:
                c.append("CX", a, b)
            else:
                single(a)
                single(b)
        if n_qubits % 2:
            single(order[-1])
    return c


# ------------------------------------------------------------------ backends

@dataclass(frozen=True)
class Backend:
    n_qubits: int
    edges: tuple[tuple[int, int, EdgeKind], ...]
    cx_depolarizing: float
    link_depolarizing: float = 0.0
    link_damping: float = 0.0
    name: str = ""

    def __post_init__(self):
        for v in (self.cx_depolarizing, self.link_depolarizing, self.link_damping):
            if not (0.0 <= v <= 1.0):
                raise SimulationError(f"noise parameters must lie in [0, 1]: {v}")
        adj = self.adjacency()
        seen, todo = {0}, [0]
        while todo:
            for v in adj[todo.pop()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        if len(seen) != self.n_qubits:
            raise SimulationError("backend connectivity must be connected")

    def adjacency(self) -> dict[int, list[int]]:
        adj = {q: [] for q in range(self.n_qubits)}
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {q: sorted(ns) for q, ns in adj.items()}

    def kind(self, a: int, b: int) -> EdgeKind | None:
        for u, v, k in self.edges:
            if {u, v} == {a, b}:
                return k
        return None


_TRIANGLES = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
LINK_DEPOLARIZING = 0.01
LINK_DAMPING = 0.12


def chiplet_backend(p_cx: float, link_depolarizing: float = LINK_DEPOLARIZING,
                    link_damping: float = LINK_DAMPING) -> Backend:
    edges = [(u, v, EdgeKind.LOCAL) for u, v in _TRIANGLES] + [(2, 3, EdgeKind.LINK)]
    return Backend(6, tuple(edges), p_cx, link_depolarizing, link_damping, "chiplet")


def monolithic_backend(p_cx: float) -> Backend:
    edges = [(u, v, EdgeKind.LOCAL) for u, v in _TRIANGLES + [(0, 3), (1, 4), (2, 5)]]
    return Backend(6, tuple(edges), p_cx, name="monolithic")


# ------------------------------------------------------------------- routing

def _shortest_path(adj: dict[int, list[int]], src: int, dst: int) -> list[int]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if dst not in prev:
        raise SimulationError(f"no path between {src} and {dst}")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def route(c: Circuit, b: Backend) -> Circuit:
    """Make every CX act on coupled qubits by inserting SWAPs.

    The control's state walks along a BFS shortest path toward the target
    until the two are adjacent.  The returned circuit acts on physical qubits
    and ``final_layout[l]`` is the physical home of logical qubit ``l``.
    """
    if c.n_qubits > b.n_qubits:
        raise SimulationError("circuit is wider than the backend")
    adj = b.adjacency()
    layout = list(range(c.n_qubits))  # logical -> physical
    where = {p: l for l, p in enumerate(layout)}  # physical -> logical
    out = Circuit(b.n_qubits)
    for op in c.ops:
        if op.gate == "CX":
            src, dst = layout[op.qubits[0]], layout[op.qubits[1]]
            path = _shortest_path(adj, src, dst)
            for here, there in zip(path[:-2], path[1:-1]):
                out.ops.append(Op("SWAP", (here, there), moved=there))
                lh, lt = where.get(here), where.get(there)
                if lh is not None:
                    layout[lh] = there
                if lt is not None:
                    layout[lt] = here
                where = {p: l for l, p in enumerate(layout)}
            out.ops.append(Op("CX", (layout[op.qubits[0]], layout[op.qubits[1]])))
        elif op.gate == "SWAP":
            raise SimulationError("input circuits must not contain SWAP")
        else:
            out.ops.append(Op(op.gate, (layout[op.qubits[0]],), op.angle))
    out.final_layout = tuple(layout)
    return out


# ---------------------------------------------------------------- simulation

@dataclass
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrix":
        if not (1 <= n_qubits <= MAX_QUBITS):
            raise SimulationError(f"n_qubits must lie in [1, {MAX_QUBITS}]")
        m = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
        m[0, 0] = 1.0
        return cls(n_qubits, m)

    def check(self, tol: float = 1e-9) -> None:
        check_density(self.matrix, tol)

    def apply(self, op: np.ndarray, qubits: Sequence[int]) -> None:
        self.matrix = _conjugate(self.matrix, op, qubits, self.n_qubits)

    def apply_kraus(self, kraus: Sequence[np.ndarray], qubits: Sequence[int]) -> None:
        self.matrix = sum(_conjugate(self.matrix, k, qubits, self.n_qubits) for k in kraus)

    def depolarize_pair(self, p: float, qubits: Sequence[int]) -> None:
        """``(1 - p) rho + p (I/4 on the pair) x (partial trace over the pair)``."""
        if p == 0:
            return
        n = self.n_qubits
        a, b = qubits
        t = self.matrix.reshape([2] * (2 * n))
        front = np.moveaxis(t, [a, b, n + a, n + b], [0, 1, 2, 3])
        reduced = np.einsum("ijij...->...", front)
        mixed = np.multiply.outer(np.eye(4).reshape(2, 2, 2, 2) / 4, reduced)
        mixed = np.moveaxis(mixed, [0, 1, 2, 3], [a, b, n + a, n + b])
        self.matrix = (1 - p) * self.matrix + p * mixed.reshape(self.matrix.shape)

    def permuted(self, layout: Sequence[int]) -> "DensityMatrix":
        """State reordered so logical qubit ``l`` is read from physical ``layout[l]``."""
        n = self.n_qubits
        full = list(layout) + [q for q in range(n) if q not in layout]
        t = self.matrix.reshape([2] * (2 * n)).transpose(full + [n + q for q in full])
        return DensityMatrix(n, t.reshape(self.matrix.shape))


def _conjugate(rho: np.ndarray, op: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    t = rho.reshape([2] * (2 * n))
    u = op.reshape([2] * (2 * k))
    rows = list(qubits)
    cols = [n + q for q in qubits]
    t = np.tensordot(u, t, axes=(list(range(k, 2 * k)), rows))
    t = np.moveaxis(t, list(range(k)), rows)
    t = np.tensordot(u.conj(), t, axes=(list(range(k, 2 * k)), cols))
    t = np.moveaxis(t, list(range(k)), cols)
    return t.reshape(rho.shape)


def depolarizing_kraus(a: float) -> list[np.ndarray]:
    return [math.sqrt(1 - 3 * a / 4) * _I2] + [math.sqrt(a / 4) * p for p in (_X, _Y, _Z)]


def damping_kraus(a: float) -> list[np.ndarray]:
    return [np.array([[1, 0], [0, math.sqrt(1 - a)]], dtype=complex),
            np.array([[0, math.sqrt(a)], [0, 0]], dtype=complex)]


def _link_noise(rho: DensityMatrix, b: Backend, q: int) -> None:
    if b.link_depolarizing:
        rho.apply_kraus(depolarizing_kraus(b.link_depolarizing), [q])
    if b.link_damping:
        rho.apply_kraus(damping_kraus(b.link_damping), [q])


def simulate(c: Circuit, b: Backend | None = None, ideal: bool = False,
             check: bool = False) -> DensityMatrix:
    """Evolve ``|0...0>`` through a routed circuit.

    Every CX and every SWAP (three CX) on a coupled pair is followed by
    two-qubit depolarizing of strength ``b.cx_depolarizing`` per CX.  A CX on a
    link edge then applies link noise to its control; a SWAP on a link edge
    applies it once to the qubit being routed.
    """
    n = b.n_qubits if b is not None else c.n_qubits
    rho = DensityMatrix.zero(n)
    noisy = not ideal and b is not None
    for op in c.ops:
        if len(op.qubits) == 2:
            kind = b.kind(*op.qubits) if b is not None else EdgeKind.LOCAL
            if kind is None:
                raise SimulationError(f"{op.gate} on uncoupled qubits {op.qubits}; route first")
            rho.apply(gate_matrix(op.gate), op.qubits)
            if noisy:
                n_cx = 3 if op.gate == "SWAP" else 1
                for _ in range(n_cx):
                    rho.depolarize_pair(b.cx_depolarizing, op.qubits)
                if kind is EdgeKind.LINK:
                    target = op.qubits[0] if op.gate == "CX" else op.moved
                    _link_noise(rho, b, op.qubits[1] if target is None else target)
        else:
            rho.apply(gate_matrix(op.gate, op.angle), op.qubits)
        if check:
            rho.check()
    return rho


def circuit_fidelity(c: Circuit, b: Backend) -> float:
    """Fidelity between the noisy and noiseless outputs of ``c`` routed onto ``b``."""
    routed = route(c, b)
    return state_fidelity(simulate(routed, b).matrix, simulate(routed, b, ideal=True).matrix)


# --------------------------------------------------------------------- sweep

CHIPLET_REFERENCE_P = 0.0045


def default_p_grid() -> list[float]:
    return [round(0.0045 + 0.0025 * i, 6) for i in range(15)]


@dataclass(frozen=True)
class FragmentSweep:
    rows: list[dict]
    chiplet_reference: float
    crossover: float | None


def fragment_sweep(n_circuits: int = 30, depth: int = 12,
                   p_cx_range: Sequence[float] | None = None, seed: int = 0,
                   chiplet_p: float = CHIPLET_REFERENCE_P) -> FragmentSweep:
    """Mean monolithic fidelity per ``p_cx`` against one chiplet reference.

    Circuit ``i`` is drawn with seed ``(seed, i)`` so every grid point sees the
    same circuits.  ``crossover`` is the smallest grid ``p_cx`` from which the
    chiplet reference stays above the monolithic mean.
    """
    grid = list(p_cx_range) if p_cx_range is not None else default_p_grid()
    circuits = [random_circuit(6, depth, seed=int(np.random.SeedSequence([seed, i])
                                                 .generate_state(1)[0]))
                for i in range(n_circuits)]
    chip = chiplet_backend(chiplet_p)
    ref = float(np.mean([circuit_fidelity(c, chip) for c in circuits]))
    rows = []
    for p in grid:
        mono = monolithic_backend(p)
        mean = float(np.mean([circuit_fidelity(c, mono) for c in circuits]))
        rows.append({"p_cx": p, "mean_fidelity_mono": mean, "mean_fidelity_chiplet": ref,
                     "n_circuits": n_circuits, "depth": depth, "seed": seed})
    cross = None
    for row in reversed(rows):
        if ref > row["mean_fidelity_mono"]:
            cross = row["p_cx"]
        else:
            break
    return FragmentSweep(rows, ref, cross)
