"""Single-qubit channels in Choi and superoperator form.

Conventions
-----------
A Choi matrix is the normalized state ``J = (1/d) sum_ij |i><j| (x) Phi(|i><j|)``:
the reference (input) factor comes first, the channel output second, and
``Tr J = 1``.  For a qubit the basis order is ``|00>, |01>, |10>, |11>``.

A superoperator acts on column-stacked density matrices,
``vec(rho) = (rho00, rho10, rho01, rho11)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np

STRUCT_TOL = 1e-9


class ChannelError(ValueError):
    pass


class Kind(str, Enum):
    DEPOLARIZING = "depolarizing"
    DAMPING = "damping"
    DEPHASING = "dephasing"
    ROTATION = "rotation"


@dataclass(frozen=True)
class D4Params:
    """Per-hop rates of the depolarizing-damping-dephasing-drift channel."""

    epsilon: float
    eta: float
    delta: float
    theta: float

    def __post_init__(self):
        if min(self.epsilon, self.eta, self.delta) < 0:
            raise ChannelError(f"D4 rates must be non-negative: {self}")
        if not (-math.pi < self.theta <= math.pi):
            raise ChannelError(f"D4 angle must lie in (-pi, pi]: {self.theta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.epsilon, self.eta, self.delta, self.theta])


# Table-1 fits for three 27-qubit devices.
D4_PRESETS: dict[str, D4Params] = {
    "montreal": D4Params(0.048, 0.013, 0.026, -0.024),
    "sydney": D4Params(0.052, 0.004, 0.014, -0.056),
    "mumbai": D4Params(0.030, 0.008, 0.005, -0.025),
}

IDENTITY_CHOI = np.zeros((4, 4), dtype=complex)
IDENTITY_CHOI[np.ix_([0, 3], [0, 3])] = 0.5
IDENTITY_CHOI.setflags(write=False)


def _basis_op(i: int, j: int, d: int = 2) -> np.ndarray:
    op = np.zeros((d, d), dtype=complex)
    op[i, j] = 1.0
    return op


def choi_from_map(channel: Callable[[np.ndarray], np.ndarray], d: int = 2) -> np.ndarray:
    """Choi state of a linear map given as a function on ``d x d`` matrices."""
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d:(i + 1) * d, j * d:(j + 1) * d] = channel(_basis_op(i, j, d))
    return out / d


def _depolarize(a):
    return lambda rho: (1 - a) * rho + a * np.trace(rho) * np.eye(2) / 2


def _damp(a):
    s = math.sqrt(1 - a)
    return lambda rho: np.array([[rho[0, 0] + a * rho[1, 1], s * rho[0, 1]],
                                 [s * rho[1, 0], (1 - a) * rho[1, 1]]])


def _dephase(a):
    return lambda rho: np.array([[rho[0, 0], (1 - a) * rho[0, 1]],
                                 [(1 - a) * rho[1, 0], rho[1, 1]]])


def _rotate(theta):
    ph = np.exp(1j * theta)
    return lambda rho: np.array([[rho[0, 0], ph * rho[0, 1]],
                                 [np.conj(ph) * rho[1, 0], rho[1, 1]]])


def primitive_channel(kind: Kind | str, value: float) -> np.ndarray:
    """Choi matrix of a depolarizing, damping, dephasing (strength in [0, 1])
    or Z-rotation (angle in (-pi, pi]) channel."""
    kind = Kind(kind)
    if kind is Kind.ROTATION:
        if not (-math.pi < value <= math.pi):
            raise ChannelError(f"rotation angle must lie in (-pi, pi]: {value}")
        return choi_from_map(_rotate(value))
    if not (0.0 <= value <= 1.0):
        raise ChannelError(f"{kind.value} strength must lie in [0, 1]: {value}")
    builder = {Kind.DEPOLARIZING: _depolarize, Kind.DAMPING: _damp,
               Kind.DEPHASING: _dephase}[kind]
    return choi_from_map(builder(value))


def equilibrium_excitation(p: D4Params) -> float:
    """The ``|11>`` Choi entry at the fixed point, ``epsilon / (4 (epsilon + eta))``."""
    total = p.epsilon + p.eta
    return 0.0 if total == 0 else p.epsilon / (4 * total)


def d4_choi(p: D4Params, t: int = 1) -> np.ndarray:
    """Choi matrix of the D4 channel after ``t`` hops.

    Populations relax at the combined rate ``epsilon + eta`` toward the excited
    fraction ``epsilon / (2 (epsilon + eta))``; coherences decay at
    ``epsilon + eta/2 + delta`` and precess by ``theta`` per hop.
    """
    if t < 0 or int(t) != t:
        raise ChannelError(f"hop count must be a non-negative integer: {t}")
    rho44 = equilibrium_excitation(p)
    relax = math.exp(-(p.epsilon + p.eta) * t)
    coh = 0.5 * np.exp((-p.epsilon - p.eta / 2 - p.delta) * t + 1j * p.theta * t)
    j = np.zeros((4, 4), dtype=complex)
    j[0, 0] = 0.5 - rho44 * (1 - relax)
    j[1, 1] = rho44 * (1 - relax)
    j[2, 2] = (0.5 - rho44) * (1 - relax)
    j[3, 3] = rho44 + (0.5 - rho44) * relax
    j[0, 3] = coh
    j[3, 0] = np.conj(coh)
    return j


def damping_rate(strength: float) -> float:
    """Per-hop damping rate whose single hop reproduces damping ``strength``."""
    if not (0.0 <= strength < 1.0):
        raise ChannelError(f"damping strength must lie in [0, 1): {strength}")
    return -math.log1p(-strength)


# --------------------------------------------------------------- conversions

def choi_to_superop(j: np.ndarray) -> np.ndarray:
    d = math.isqrt(j.shape[0])
    j4 = np.asarray(j).reshape(d, d, d, d)  # [i, k, j, l]
    return (d * j4.transpose(3, 1, 2, 0)).reshape(d * d, d * d)


def superop_to_choi(s: np.ndarray) -> np.ndarray:
    d = math.isqrt(s.shape[0])
    s4 = np.asarray(s).reshape(d, d, d, d)  # [l, k, j, i]
    return (s4.transpose(3, 1, 2, 0) / d).reshape(d * d, d * d)


def compose(first: np.ndarray, then: np.ndarray) -> np.ndarray:
    """Choi of ``then o first`` (``first`` acts first)."""
    return superop_to_choi(choi_to_superop(then) @ choi_to_superop(first))


def compose_all(chois: Iterable[np.ndarray]) -> np.ndarray:
    s = np.eye(4, dtype=complex)
    for j in chois:
        s = choi_to_superop(j) @ s
    return superop_to_choi(s)


def apply(j: np.ndarray, rho: np.ndarray, check: bool = True) -> np.ndarray:
    """Apply a channel to a density matrix: ``d * Tr_ref[(rho^T (x) I) J]``."""
    rho = np.asarray(rho, dtype=complex)
    if check:
        check_density(rho)
    d = rho.shape[0]
    j4 = np.asarray(j).reshape(d, d, d, d)
    return d * np.einsum("ij,ikjl->kl", rho, j4)


def apply_superop(s: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    return (s @ rho.reshape(-1, order="F")).reshape(d, d, order="F")


def check_density(rho: np.ndarray, tol: float = STRUCT_TOL) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ChannelError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ChannelError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ChannelError("density matrix trace differs from 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
        raise ChannelError("density matrix is not positive semidefinite")


def partial_trace_output(j: np.ndarray) -> np.ndarray:
    d = math.isqrt(j.shape[0])
    return np.einsum("ikjk->ij", np.asarray(j).reshape(d, d, d, d))


def choi_violations(j: np.ndarray, tp: bool = True) -> dict[str, float]:
    """Magnitude of each Choi-invariant violation (all ~0 for a valid channel)."""
    d = math.isqrt(j.shape[0])
    herm = (j + j.conj().T) / 2
    out = {
        "hermitian": float(np.abs(j - j.conj().T).max()),
        "negativity": float(max(0.0, -np.linalg.eigvalsh(herm).min())),
        "trace": float(abs(np.trace(j) - 1)),
    }
    if tp:
        out["trace_preserving"] = float(np.abs(partial_trace_output(j) - np.eye(d) / d).max())
    return out


def is_valid_choi(j: np.ndarray, tol: float = STRUCT_TOL, tp: bool = True) -> bool:
    return all(v <= tol for v in choi_violations(j, tp=tp).values())


def check_choi(j: np.ndarray, tol: float = STRUCT_TOL, tp: bool = True) -> np.ndarray:
    bad = {k: v for k, v in choi_violations(j, tp=tp).items() if v > tol}
    if bad:
        raise ChannelError(f"invalid Choi matrix: {bad}")
    return j


# ------------------------------------------------------------------ fidelity

def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))^2`` of two density matrices."""
    sa = _psd_sqrt(a)
    w = np.linalg.eigvalsh(sa @ b @ sa)
    f = float(np.sqrt(np.clip(w, 0, None)).sum() ** 2)
    return min(max(f, 0.0), 1.0)


def process_fidelity(j1: np.ndarray, j2: np.ndarray) -> float:
    """Fidelity between the Choi states of two channels."""
    return state_fidelity(j1, j2)


def bell_overlap(j: np.ndarray) -> float:
    """Process fidelity with the identity channel, ``<Omega|J|Omega>``."""
    d = math.isqrt(j.shape[0])
    omega = np.eye(d).reshape(-1) / math.sqrt(d)
    return float(np.real(omega @ j @ omega))


def average_gate_fidelity(j: np.ndarray) -> float:
    """Average fidelity with identity over pure inputs, ``(d F_pro + 1) / (d + 1)``."""
    d = math.isqrt(j.shape[0])
    return (d * bell_overlap(j) + 1) / (d + 1)


# ---------------------------------------------------- tomography post-processing

def choi_cleanup(raw: np.ndarray, threshold: float = 0.025, tol: float = STRUCT_TOL) -> np.ndarray:
    """Zero entries below ``threshold`` in magnitude and fill the missing trace
    with the completely mixed state."""
    m = np.array(raw, dtype=complex)
    d = m.shape[0]
    m[np.abs(m) < threshold] = 0
    deficit = 1 - np.trace(m).real
    if deficit < -tol:
        raise ChannelError(f"trace {1 - deficit:.6g} exceeds 1 after thresholding")
    return m + max(deficit, 0.0) * np.eye(d) / d


def positivity_repair(m: np.ndarray) -> np.ndarray:
    """Mix in ``lambda * I/d`` to cancel the most negative eigenvalue, then renormalize."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    lam = max(0.0, -d * np.linalg.eigvalsh((m + m.conj().T) / 2).min())
    out = m + lam * np.eye(d) / d
    return out / np.trace(out).real


# ----------------------------------------------------------- reference data

@dataclass(frozen=True)
class ReferenceChois:
    swap2q: np.ndarray
    swap1q: np.ndarray
    link: np.ndarray
    metadata: Mapping[str, dict] = field(default_factory=dict)


def _printed_swap2q() -> np.ndarray:
    idx = [0, 6, 9, 15]
    block = np.array([[0.24, 0.23, 0.23, 0.22],
                      [0.23, 0.23, 0.22, 0.22],
                      [0.23, 0.22, 0.23, 0.22],
                      [0.22, 0.22, 0.22, 0.23]])
    m = np.zeros((16, 16), dtype=complex)
    m[np.ix_(idx, idx)] = block
    return m + 0.07 * np.eye(16) / 16


def _printed_swap1q() -> np.ndarray:
    m = np.diag([0.4961, 0.0083, 0.0194, 0.4762]).astype(complex)
    m[0, 3] = m[3, 0] = 0.4726
    return m


def _printed_link() -> np.ndarray:
    m = np.diag([0.50, 0.0, 0.16, 0.34]).astype(complex)
    m[0, 3] = m[3, 0] = 0.39
    return m


def reference_chois() -> ReferenceChois:
    """Measured SWAP (two- and one-qubit) and microwave-link Choi matrices.

    Each printed matrix is symmetrized and passed through
    :func:`positivity_repair`; ``metadata`` records how far that moved it and
    the residual deviation from trace preservation of the rounded data.
    """
    out, meta = {}, {}
    for name, printed in (("swap2q", _printed_swap2q()), ("swap1q", _printed_swap1q()),
                          ("link", _printed_link())):
        sym = (printed + printed.conj().T) / 2
        repaired = positivity_repair(sym)
        repaired.setflags(write=False)
        out[name] = repaired
        viol = choi_violations(repaired)
        meta[name] = {
            "repair_max_abs_change": float(np.abs(repaired - printed).max()),
            "min_eigenvalue_printed": float(np.linalg.eigvalsh(sym).min()),
            "tp_deviation": viol["trace_preserving"],
        }
    return ReferenceChois(metadata=meta, **out)


# ----------------------------------------------------------- serialization

def choi_to_dict(j: np.ndarray, atol: float = 0.0) -> dict:
    entries = [
        {"row": int(r), "col": int(c), "re": float(j[r, c].real), "im": float(j[r, c].imag)}
        for r in range(j.shape[0]) for c in range(j.shape[1])
        if abs(j[r, c]) > atol
    ]
    return {"dim": int(j.shape[0]), "entries": entries}


def choi_from_dict(data: Mapping) -> np.ndarray:
    m = np.zeros((data["dim"], data["dim"]), dtype=complex)
    for e in data["entries"]:
        m[e["row"], e["col"]] = complex(e["re"], e["im"])
    return m
