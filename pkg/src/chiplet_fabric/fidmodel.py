"""Multiplicative depolarizing-ratio model of qubit-movement fidelity.

Each hop contributes a non-depolarizing ratio ``R = 1 - r``: a link with
``r = 2 (1 - F_link)``, a local SWAP with ``(1 - 4/3 (1 - F_CX))**3``.  Ratios
multiply along a path and the path fidelity is ``1 - (1 - R_total) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import topology as topo


class ModelRangeError(ValueError):
    """Parameters push the simplified model outside its valid range."""


# On-chip CX fidelity presets.
F_CX_MUMBAI = 1 - 0.009
F_CX_BROOKLYN = 1 - 0.018
F_CX_HYBRID_THRESHOLD = 1 - 0.0045
F_CX_SURFACE_THRESHOLD = 1 - 0.01
F_CX_BACON_SHOR_THRESHOLD = 1 - 2e-5

LINK_FIDELITY_PRESETS = {"lo": 0.86, "mid": 0.91, "hi": 0.96}

LINK_LATENCY_NS = 200.0
SWAP_LATENCY_NS = 1200.0


@dataclass(frozen=True)
class ScalingParams:
    f_cx_chip: float
    n_chip: int
    delta_infid: float
    f_link: float

    def __post_init__(self):
        for name in ("f_cx_chip", "f_link"):
            value = getattr(self, name)
            if not (0 < value <= 1):
                raise ModelRangeError(f"{name} must lie in (0, 1]: {value}")
        if self.delta_infid < 0:
            raise ModelRangeError(f"delta_infid must be >= 0: {self.delta_infid}")
        if self.n_chip < 1:
            raise ModelRangeError(f"n_chip must be >= 1: {self.n_chip}")


@dataclass(frozen=True)
class Ratios:
    r_cx: float
    R_cx: float
    R_swap: float
    r_link: float
    R_link: float


@dataclass(frozen=True)
class SweepRow:
    n_total: int
    topology: str
    t_swap: int
    t_link: int
    f_chiplet: float
    f_mono_by_delta: dict = field(default_factory=dict)
    f_chiplet_by_link: dict = field(default_factory=dict)


def infidelity_rate(f_small: float = F_CX_MUMBAI, f_large: float = F_CX_BROOKLYN,
                    n_small: int = 27, n_large: int = 65) -> float:
    """Per-qubit CX infidelity growth between two device sizes."""
    return (f_small - f_large) / (n_large - n_small)


def f_cx_mono(n_total: int, p: ScalingParams) -> float:
    """Average CX fidelity of an ``n_total``-qubit monolithic device."""
    if n_total < p.n_chip:
        raise ModelRangeError(f"n_total={n_total} is below the chiplet size {p.n_chip}")
    f = 1 - ((n_total - p.n_chip) * p.delta_infid + (1 - p.f_cx_chip))
    if f <= 0:
        raise ModelRangeError(f"monolithic CX fidelity {f:.4g} <= 0 at N={n_total}")
    return f


def _ratio_link(f_link: float) -> float:
    r = 2 * (1 - f_link)
    if r > 1:
        raise ModelRangeError(f"link fidelity {f_link} too low for the model (r={r:.4g})")
    return 1 - r


def _ratio_cx(f_cx: float) -> float:
    r = 4 / 3 * (1 - f_cx)
    if r > 1:
        raise ModelRangeError(f"CX fidelity {f_cx} too low for the model (r={r:.4g})")
    return 1 - r


def non_depolarizing_ratios(f_cx: float, f_link: float) -> Ratios:
    for name, f in (("f_cx", f_cx), ("f_link", f_link)):
        if not (0 < f <= 1):
            raise ModelRangeError(f"{name} must lie in (0, 1]: {f}")
    R_cx = _ratio_cx(f_cx)
    R_link = _ratio_link(f_link)
    return Ratios(r_cx=1 - R_cx, R_cx=R_cx, R_swap=R_cx ** 3, r_link=1 - R_link, R_link=R_link)


def fidelity_from_ratio(R_total: float) -> float:
    return 1 - (1 - R_total) / 2


def path_process_fidelity(t_swap: int, t_link: int, f_cx: float, f_link: float) -> float:
    if t_swap < 0 or t_link < 0:
        raise ModelRangeError("hop counts must be non-negative")
    r = non_depolarizing_ratios(f_cx, f_link)
    return fidelity_from_ratio(r.R_link ** t_link * r.R_swap ** t_swap)


def monolithic_path_fidelity(t_hops: int, n_total: int, p: ScalingParams) -> float:
    """Every hop is a local SWAP at the size-degraded CX fidelity."""
    R = _ratio_cx(f_cx_mono(n_total, p))
    return fidelity_from_ratio(R ** (3 * t_hops))


# ------------------------------------------------------------------- sweeps

SWEEP_FAMILIES = {
    "falcon": 27,
    "heavyhex_chiplets": 80,
    "chiplet_grid": 25,
    "grid_tree": 25,
    "expander": 27,
}


def family_sizes(family: str, n_max: int = 4000, square_only: bool = True) -> list[int]:
    """Default N grid up to ``n_max`` qubits.

    Planar tilings use ``k x k`` chips by default; ``square_only=False`` adds
    every exact near-square ``w x h`` tiling, whose diameters are not monotone
    in N because a wide tiling can be longer than the next square one.
    """
    if family not in SWEEP_FAMILIES:
        raise topo.InvalidParameter(f"unknown sweep family {family!r}")
    n_chip = SWEEP_FAMILIES[family]
    if family == "grid_tree":
        return [n_chip * (2 ** d - 1) for d in range(1, 20) if n_chip * (2 ** d - 1) <= n_max]
    if family == "heavyhex_chiplets":
        return [n_chip * b for b in range(1, n_max // n_chip + 1)]
    if family == "expander":
        return [n_chip * c for c in range(4, n_max // n_chip + 1, 2)]
    sizes = []
    for chips in range(1, n_max // n_chip + 1):
        w, h = topo.near_square_tiling(chips)
        if w * h == chips and (w == h or not square_only):
            sizes.append(n_chip * chips)
    return sizes


def sweep(family: str, n_range: Sequence[int], p: ScalingParams, deltas: Sequence[float],
          link_fidelities: Sequence[float] = tuple(LINK_FIDELITY_PRESETS.values()),
          seed: int = 0, graph_trials: int = 80, embed_trials: int = 6,
          strict: bool = True) -> list[SweepRow]:
    """Chiplet vs. monolithic fidelity of a qubit crossing the graph diameter.

    For each N the size-matched chiplet topology supplies the diameter path
    (t_swap local hops, t_link links).  The chiplet path uses ``p.f_cx_chip``
    on local hops and the link fidelity on links; the monolithic comparator
    sends the same number of hops through local SWAPs at ``f_cx_mono(N)``.
    With ``strict=False`` a monolithic value outside the model's range is
    reported as NaN instead of raising.
    """
    if family not in SWEEP_FAMILIES:
        raise topo.InvalidParameter(f"unknown sweep family {family!r}")
    rows = []
    for n in n_range:
        t = topo.build_family(family, n, seed=seed, graph_trials=graph_trials,
                              embed_trials=embed_trials)
        path = topo.diameter_path(t)
        n_total = t.node_count
        by_link = {f: path_process_fidelity(path.t_swap, path.t_link, p.f_cx_chip, f)
                   for f in link_fidelities}
        by_delta = {}
        for d in deltas:
            q = ScalingParams(p.f_cx_chip, p.n_chip, d, p.f_link)
            try:
                by_delta[d] = monolithic_path_fidelity(path.t_swap + path.t_link,
                                                       max(n_total, p.n_chip), q)
            except ModelRangeError:
                if strict:
                    raise
                by_delta[d] = float("nan")
        rows.append(SweepRow(
            n_total=n_total, topology=t.layout_name, t_swap=path.t_swap, t_link=path.t_link,
            f_chiplet=path_process_fidelity(path.t_swap, path.t_link, p.f_cx_chip, p.f_link),
            f_mono_by_delta=by_delta, f_chiplet_by_link=by_link,
        ))
    return rows


def crossover(rows: Sequence[SweepRow], delta: float) -> int | None:
    """Smallest N beyond which the chiplet path beats the monolithic one at ``delta``.

    Rows whose monolithic value is NaN (outside the model's range) are skipped.
    """
    winner = None
    for row in reversed(rows):
        mono = row.f_mono_by_delta[delta]
        if math.isnan(mono):
            continue
        if row.f_chiplet > mono:
            winner = row.n_total
        else:
            break
    return winner


# ----------------------------------------------------------- link threshold

def required_link_fidelity(t_swap: int, t_link: int, f_cx_chip: float, f_cx_mono: float) -> float:
    """Link fidelity at which the chiplet and monolithic diameter paths tie.

    Solves ``R_link**t_link * R_chip**(3 t_swap) = R_mono**(3 (t_swap + t_link))``
    and maps the ratio back to a fidelity with the link error model.
    """
    if t_link < 1:
        raise ModelRangeError("required link fidelity needs at least one link hop")
    if t_swap < 0:
        raise ModelRangeError("t_swap must be non-negative")
    R_chip = _ratio_cx(f_cx_chip)
    R_mono = _ratio_cx(f_cx_mono)
    if R_mono <= 0 or (R_chip <= 0 and t_swap > 0):
        raise ModelRangeError("CX depolarizing ratios must be positive")
    log_chip = 3 * t_swap * math.log(R_chip) if t_swap else 0.0
    log_R = (3 * (t_swap + t_link) * math.log(R_mono) - log_chip) / t_link
    R_link = math.exp(log_R)
    if not (0 < R_link <= 1):
        raise ModelRangeError(f"infeasible: required link ratio {R_link:.6g} is outside (0, 1]")
    return 1 - (1 - R_link) / 2


def required_link_sweep(family: str, n_range: Sequence[int], p: ScalingParams,
                        deltas: Sequence[float], seed: int = 0, graph_trials: int = 80,
                        embed_trials: int = 6) -> list[dict]:
    rows = []
    for n in n_range:
        t = topo.build_family(family, n, seed=seed, graph_trials=graph_trials,
                              embed_trials=embed_trials)
        path = topo.diameter_path(t)
        if path.t_link == 0:
            continue
        row = {"n_total": t.node_count, "topology": t.layout_name,
               "t_swap": path.t_swap, "t_link": path.t_link}
        for d in deltas:
            q = ScalingParams(p.f_cx_chip, p.n_chip, d, p.f_link)
            try:
                row[d] = required_link_fidelity(path.t_swap, path.t_link, p.f_cx_chip,
                                                f_cx_mono(t.node_count, q))
            except ModelRangeError:
                row[d] = float("nan")
        rows.append(row)
    return rows


# -------------------------------------------------------- rescaling identity

def chip_to_mono_ratio(t_swap: int, t_link: int, R_cx: float, delta: float, R_link: float,
                       n_total: int, n_chip: int) -> float:
    """``R_chip_total / R_mono_total`` with the monolithic CX ratio degraded linearly in N."""
    R_mono = R_cx - 4 / 3 * (n_total - n_chip) * delta
    log_ratio = (t_link * math.log(R_link) + 3 * t_swap * math.log(R_cx)
                 - 3 * (t_swap + t_link) * math.log(R_mono))
    return math.exp(log_ratio)


def rescaling_invariance_check(t_swap: int, t_link: int, R_cx: float, delta: float,
                               R_link: float, n_total: int, n_chip: int, a: float) -> dict:
    if a <= 0:
        raise ModelRangeError("scale factor must be positive")
    ratio = chip_to_mono_ratio(t_swap, t_link, R_cx, delta, R_link, n_total, n_chip)
    scaled = chip_to_mono_ratio(t_swap, t_link, a * R_cx, a * delta, a ** 3 * R_link,
                                n_total, n_chip)
    return {"ratio": ratio, "ratio_scaled": scaled}


# --------------------------------------------------- yield and latency

def defect_yield(n_qubits: int, p_defect: float) -> float:
    if not (0 <= p_defect < 1):
        raise ModelRangeError(f"defect probability must lie in [0, 1): {p_defect}")
    return (1 - p_defect) ** n_qubits


def expected_attempts(chips_needed: int, chip_size: int, p_defect: float) -> float:
    return chips_needed / defect_yield(chip_size, p_defect)


def path_latency(t_swap: int, t_link: int, swap_ns: float = SWAP_LATENCY_NS,
                 link_ns: float = LINK_LATENCY_NS, link_reuse_stall_ns: float = 0.0) -> float:
    """Wall-clock nanoseconds to walk a path; ``link_reuse_stall_ns`` is charged
    between consecutive link uses."""
    if t_swap < 0 or t_link < 0:
        raise ModelRangeError("hop counts must be non-negative")
    return swap_ns * t_swap + link_ns * t_link + link_reuse_stall_ns * max(t_link - 1, 0)
