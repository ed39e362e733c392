"""Constant-weight codes that detect amplitude damping on a link.

Every codeword has exactly ``k`` excitations, so losing any excitation drops
the measured weight below ``k`` and leaves the code space.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations


class CodeError(ValueError):
    """Invalid code parameters or measurement input."""


class Detection(str, Enum):
    OK = "ok"
    DAMPING_DETECTED = "damping_detected"


@dataclass(frozen=True)
class WeightCode:
    n: int
    m: int
    k: int
    codewords: tuple[str, ...]

    def __post_init__(self):
        if len(self.codewords) != 2 ** self.n:
            raise CodeError(f"expected {2 ** self.n} codewords, got {len(self.codewords)}")
        if len(set(self.codewords)) != len(self.codewords):
            raise CodeError("codewords must be distinct")
        for w in self.codewords:
            if len(w) != self.m or w.count("1") != self.k or set(w) - {"0", "1"}:
                raise CodeError(f"codeword {w!r} is not an {self.m}-bit string of weight {self.k}")
        if list(self.codewords) != sorted(self.codewords, key=lambda w: int(w, 2)):
            raise CodeError("codewords must be in ascending integer order")

    @property
    def efficiency(self) -> float:
        return self.n / self.m


def weight_k_strings(m: int, k: int, limit: int | None = None) -> list[str]:
    """The ``limit`` smallest ``m``-bit strings of weight ``k`` in ascending order."""
    values = sorted(sum(1 << b for b in bits) for bits in combinations(range(m), k))
    if limit is not None:
        values = values[:limit]
    return [format(v, f"0{m}b") for v in values]


def min_parameters(n: int, m_max: int = 64) -> tuple[int, int]:
    """Smallest ``m``, then smallest ``k <= m // 2``, with ``C(m, k) >= 2**n``."""
    if n < 1:
        raise CodeError(f"n must be >= 1: {n}")
    for m in range(2, m_max + 1):
        for k in range(1, m // 2 + 1):
            if math.comb(m, k) >= 2 ** n:
                return m, k
    raise CodeError(f"no code with m <= {m_max} for n={n}")


def min_code_for(n: int) -> WeightCode:
    m, k = min_parameters(n)
    return WeightCode(n, m, k, tuple(weight_k_strings(m, k, 2 ** n)))


def encode_basis_map(code: WeightCode) -> dict[int, str]:
    return dict(enumerate(code.codewords))


def decode(measured: str, code: WeightCode) -> int | None:
    """Logical index of ``measured``, or ``None`` if it is not a codeword."""
    try:
        return code.codewords.index(measured)
    except ValueError:
        return None


def detect(measured: str, code: WeightCode) -> Detection:
    if len(measured) != code.m or set(measured) - {"0", "1"}:
        raise CodeError(f"measurement must be an {code.m}-bit string: {measured!r}")
    return Detection.OK if measured in code.codewords else Detection.DAMPING_DETECTED


def failure_probability(code: WeightCode, eta: float) -> dict[str, float]:
    """First-order and exact (independent damping per excitation) loss probability."""
    if not (0.0 <= eta <= 1.0):
        raise CodeError(f"eta must lie in [0, 1]: {eta}")
    return {"first_order": code.k * eta, "exact": 1 - (1 - eta) ** code.k}


def efficiency(code: WeightCode) -> float:
    return code.efficiency


def stirling_bound(m: int) -> int:
    """Lower bound on the qubits a balanced weight code on ``m`` qubits carries."""
    if m < 2:
        raise CodeError(f"m must be >= 2: {m}")
    return m - math.ceil(0.5 * math.log2(math.pi * m))


# Published encodings for 1..10 logical qubits: n -> (m, k, efficiency).
PUBLISHED_TABLE = {
    1: (2, 1, 0.50), 2: (4, 1, 0.50), 3: (3, 5, 0.60), 4: (6, 3, 0.67),
    5: (7, 3, 0.71), 6: (8, 4, 0.75), 7: (10, 4, 0.70), 8: (11, 4, 0.73),
    9: (12, 5, 0.75), 10: (13, 5, 0.77),
}

TABLE_HEADER = ("Qubits Sent", "Qubits Used", "Error Multiplier", "Efficiency")


@dataclass(frozen=True)
class TableRow:
    n: int
    m: int
    k: int
    efficiency: float


def encoding_table(max_n: int) -> list[TableRow]:
    if max_n < 1:
        raise CodeError(f"max_n must be >= 1: {max_n}")
    return [TableRow(n, *min_parameters(n), round(n / min_parameters(n)[0], 10))
            for n in range(1, max_n + 1)]


def table_mismatches(rows: list[TableRow]) -> list[dict]:
    """Rows whose (m, k, rounded efficiency) disagree with the published encodings."""
    out = []
    for r in rows:
        pub = PUBLISHED_TABLE.get(r.n)
        if pub is None:
            continue
        ours = (r.m, r.k, round(r.efficiency, 2))
        if ours != pub:
            out.append({"n": r.n, "computed": ours, "published": pub})
    return out


def table_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for r in rows:
        w.writerow([r.n, r.m, r.k, f"{r.efficiency:.2f}"])
    return buf.getvalue()


def postselect_efficiency(link_success: float, readout_error: float) -> float:
    for name, v in (("link_success", link_success), ("readout_error", readout_error)):
        if not (0.0 <= v <= 1.0):
            raise CodeError(f"{name} must lie in [0, 1]: {v}")
    return link_success * (1 - readout_error)
