"""SWAP-chain channel estimators, D4 fitting and the model-agreement check.

Four ways to estimate the channel a qubit experiences along a chain of hops:

* ``estimate_multiplication``: the multiplicative ratio model from ``fidmodel``.
* ``estimate_composition``: compose per-hop Choi matrices in order.
* ``estimate_powering``: raise one averaged hop channel to the chain length.
* ``estimate_d4_chain``: evaluate the D4 family at the hop count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import channel as ch
from . import fidmodel


class ChainError(ValueError):
    """Invalid chain description or fitting input."""


@dataclass(frozen=True)
class LocalSwap:
    choi: np.ndarray


@dataclass(frozen=True)
class Link:
    choi: np.ndarray


@dataclass(frozen=True)
class ChainSpec:
    """Regular chain: ``m`` local SWAPs before each of ``k`` link crossings.

    ``hops`` optionally carries an explicit hop list for composition.
    """

    m: int
    k: int
    link_eta: float = 0.0
    hops: tuple = ()

    def __post_init__(self):
        if self.m < 0:
            raise ChainError(f"m must be >= 0: {self.m}")
        if self.k < 1:
            raise ChainError(f"k must be >= 1: {self.k}")
        if not (0.0 <= self.link_eta <= 1.0):
            raise ChainError(f"link damping must lie in [0, 1]: {self.link_eta}")

    @property
    def t_swap(self) -> int:
        return self.m * self.k

    @property
    def t_link(self) -> int:
        return self.k

    def hop_chois(self) -> list[np.ndarray]:
        return [h.choi for h in self.hops]


# ---------------------------------------------------------------- estimators

def estimate_multiplication(chain: ChainSpec, f_cx: float, f_link: float) -> float:
    return fidmodel.path_process_fidelity(chain.t_swap, chain.t_link, f_cx, f_link)


def estimate_composition(hop_chois: Iterable[np.ndarray]) -> np.ndarray:
    return ch.compose_all(hop_chois)


def estimate_powering(avg: np.ndarray, length: int) -> np.ndarray:
    if length < 0:
        raise ChainError(f"length must be >= 0: {length}")
    s = np.linalg.matrix_power(ch.choi_to_superop(avg), length)
    return ch.superop_to_choi(s)


def average_choi(chois: Sequence[np.ndarray]) -> np.ndarray:
    if not chois:
        raise ChainError("cannot average an empty list of channels")
    return np.mean(np.stack(chois), axis=0)


def estimate_d4_chain(p: ch.D4Params, t: int) -> np.ndarray:
    return ch.d4_choi(p, t)


def link_choi(link_eta: float) -> np.ndarray:
    """Link hop as a pure-damping D4 step with the rate that reproduces strength ``link_eta``."""
    return ch.d4_choi(ch.D4Params(0.0, ch.damping_rate(link_eta), 0.0, 0.0), 1)


def composite_link_chain(p: ch.D4Params, link_eta: float, m: int, k: int) -> np.ndarray:
    """``(Phi_D^m then Phi_link)`` repeated ``k`` times."""
    ChainSpec(m, k, link_eta)
    block = ch.compose(ch.d4_choi(p, m), link_choi(link_eta))
    return estimate_powering(block, k)


# ------------------------------------------------------------------ fitting

@dataclass(frozen=True)
class FitResult:
    params: ch.D4Params
    residual: float
    reconstruction_fidelity: float


def _wrap_angle(theta: float) -> float:
    wrapped = math.remainder(theta, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def _to_params(x: np.ndarray) -> ch.D4Params:
    return ch.D4Params(abs(x[0]), abs(x[1]), abs(x[2]), _wrap_angle(x[3]))


def _objective(x, obs):
    p = _to_params(x)
    return sum(float(np.sum(np.abs(ch.d4_choi(p, t) - j) ** 2)) for t, j in obs)


def fit_d4(observations: Sequence[tuple[int, np.ndarray]], seed: int = 0,
           starts: int = 8) -> FitResult:
    """Least-squares D4 fit (Frobenius distance summed over observations).

    Deterministic multi-start Nelder-Mead; rates are optimised through their
    absolute value so the search is unconstrained.
    """
    obs = [(int(t), np.asarray(j, dtype=complex)) for t, j in observations]
    ts = {t for t, _ in obs}
    if len(obs) < 4 or len(ts) < 2:
        raise ChainError("fit_d4 needs >= 4 observations spanning >= 2 hop counts")
    if ts == {0}:
        raise ChainError("observations at t=0 carry no information about the rates")
    rng = np.random.default_rng(seed)
    x0s = [np.array([0.03, 0.01, 0.01, 0.0])]
    x0s += [np.concatenate([rng.uniform(0, 0.1, 3), rng.uniform(-0.2, 0.2, 1)])
            for _ in range(starts - 1)]
    opts = {"xatol": 1e-12, "fatol": 1e-16, "maxiter": 20000, "maxfev": 40000}
    best = None
    for x0 in x0s:
        res = minimize(_objective, x0, args=(obs,), method="Nelder-Mead", options=opts)
        res = minimize(_objective, res.x, args=(obs,), method="Nelder-Mead", options=opts)
        if best is None or res.fun < best.fun:
            best = res
    p = _to_params(best.x)
    fid = min(ch.process_fidelity(ch.d4_choi(p, t), j) for t, j in obs)
    return FitResult(params=p, residual=float(best.fun), reconstruction_fidelity=fid)


def synthetic_observations(p: ch.D4Params, ts: Iterable[int] = range(21), noise: float = 0.0,
                           seed: int = 0) -> list[tuple[int, np.ndarray]]:
    """D4 Choi matrices at each ``t``, optionally with Hermitian Gaussian noise
    of relative scale ``noise`` followed by positivity repair."""
    rng = np.random.default_rng(seed)
    out = []
    for t in ts:
        j = ch.d4_choi(p, t)
        if noise:
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            j = ch.positivity_repair(j + noise * (g + g.conj().T) / 2 * np.abs(j).max())
        out.append((t, j))
    return out


# --------------------------------------------------------- model agreement

@dataclass(frozen=True)
class Agreement:
    max_abs_diff: float
    argmax: tuple[int, int]
    max_rel_diff: float


def hop_ratio(j: np.ndarray) -> float:
    """Depolarizing-equivalent ratio ``R`` of one hop, from its Bell overlap."""
    return (4 * ch.bell_overlap(j) - 1) / 3


def compare_models(p: ch.D4Params, link_eta: float, m_range: Iterable[int] = range(1, 21),
                   k_range: Iterable[int] = range(1, 21)) -> Agreement:
    """Largest gap between the composite-chain fidelity and the ratio model.

    Both sides are average gate fidelities: the composite chain through
    ``(2 B + 1) / 3`` of its Bell overlap ``B``, the ratio model through
    ``(1 + R_total) / 2`` with per-hop ratios taken from single-hop overlaps.
    """
    R_swap = hop_ratio(ch.d4_choi(p, 1))
    R_link = hop_ratio(link_choi(link_eta))
    max_abs, argmax, max_rel = 0.0, (0, 0), 0.0
    for m in m_range:
        for k in k_range:
            f_d4 = ch.average_gate_fidelity(composite_link_chain(p, link_eta, m, k))
            f_simple = fidmodel.fidelity_from_ratio(R_swap ** (m * k) * R_link ** k)
            diff = abs(f_d4 - f_simple)
            if diff > max_abs:
                max_abs, argmax = diff, (m, k)
            max_rel = max(max_rel, diff / max(f_d4, f_simple))
    return Agreement(max_abs, argmax, max_rel)


def chain_rows(p: ch.D4Params, link_eta: float, m_values: Iterable[int],
               k_values: Iterable[int]) -> list[dict]:
    """Per-(m, k) overlaps for the composite chain and the ratio model."""
    R_swap = hop_ratio(ch.d4_choi(p, 1))
    R_link = hop_ratio(link_choi(link_eta))
    rows = []
    for m in m_values:
        for k in k_values:
            j = composite_link_chain(p, link_eta, m, k)
            rows.append({"method": "composite", "m": m, "k": k,
                         "bell_overlap": ch.bell_overlap(j),
                         "process_fidelity_vs_identity": ch.process_fidelity(j, ch.IDENTITY_CHOI),
                         "average_gate_fidelity": ch.average_gate_fidelity(j)})
            R = R_swap ** (m * k) * R_link ** k
            rows.append({"method": "multiplication", "m": m, "k": k,
                         "bell_overlap": (1 + 3 * R) / 4,
                         "process_fidelity_vs_identity": (1 + 3 * R) / 4,
                         "average_gate_fidelity": fidmodel.fidelity_from_ratio(R)})
    return rows
