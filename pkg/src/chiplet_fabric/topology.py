"""Connectivity layouts for monolithic and chiplet architectures, plus graph metrics.

Every constructor returns a :class:`Topology` whose integer nodes are numbered
``0 .. node_count - 1``.  Edges carry a kind: ``local`` for on-chip couplers and
``link`` for inter-chiplet microwave links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import kernels


class InvalidParameter(ValueError):
    pass


class TopologyError(ValueError):
    """A topology violates one of its structural invariants."""


class DisconnectedGraphError(TopologyError):
    pass


class EdgeKind(str, Enum):
    LOCAL = "local"
    LINK = "link"


# Public 27-qubit Falcon coupling map.
FALCON_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10),
    (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14), (14, 16),
    (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23),
    (22, 25), (23, 24), (24, 25), (25, 26),
)
FALCON_SIZE = 27
# Degree-1 qubits listed clockwise from the top-left tail.
FALCON_PORTS: tuple[int, ...] = (6, 17, 26, 20, 9, 0)
# Port used when a Falcon chip in a rectangular tiling links toward each side.
FALCON_SIDE_PORT = {"north": 17, "east": 26, "south": 9, "west": 0}

HEAVYHEX_BLOCK_ROWS = 4
HEAVYHEX_BLOCK_WIDTH = 16


@dataclass(frozen=True)
class Topology:
    node_count: int
    edges: tuple[tuple[int, int, EdgeKind], ...]
    chiplet_of: tuple[int, ...]
    layout_name: str
    layout_params: dict = field(default_factory=dict)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR adjacency with each neighbor list sorted ascending."""
        n = self.node_count
        if not self.edges:
            return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
        e = np.array([(u, v) for u, v, _ in self.edges], dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), np.ascontiguousarray(cols)

    @cached_property
    def degrees(self) -> np.ndarray:
        indptr, _ = self.csr
        return np.diff(indptr)

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[u]:indptr[u + 1]]

    @cached_property
    def kind_of(self) -> dict[tuple[int, int], EdgeKind]:
        return {(u, v): k for u, v, k in self.edges}

    def edge_kind(self, u: int, v: int) -> EdgeKind:
        return self.kind_of[(min(u, v), max(u, v))]

    @property
    def links(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v, k in self.edges if k is EdgeKind.LINK]

    @property
    def n_links(self) -> int:
        return sum(1 for _, _, k in self.edges if k is EdgeKind.LINK)

    @property
    def n_chiplets(self) -> int:
        return len(set(self.chiplet_of))

    def is_connected(self) -> bool:
        if self.node_count <= 1:
            return True
        indptr, indices = self.csr
        return bool((kernels.bfs_distances(indptr, indices, 0) >= 0).all())

    def validate(self, monolithic: bool | None = None) -> "Topology":
        """Check the structural invariants; raise :class:`TopologyError` on failure."""
        n = self.node_count
        if n < 1:
            raise TopologyError("topology must have at least one node")
        if len(self.chiplet_of) != n:
            raise TopologyError("chiplet_of must cover every node")
        seen = set()
        for u, v, kind in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"edge ({u}, {v}) references a missing node")
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TopologyError(f"duplicate edge {key}")
            seen.add(key)
            same = self.chiplet_of[u] == self.chiplet_of[v]
            if kind is EdgeKind.LINK and same:
                raise TopologyError(f"link ({u}, {v}) joins a chiplet to itself")
            if kind is EdgeKind.LOCAL and not same:
                raise TopologyError(f"local edge ({u}, {v}) crosses chiplets")
        if not self.is_connected():
            raise DisconnectedGraphError(f"{self.layout_name} is not connected")
        if monolithic and self.n_chiplets != 1:
            raise TopologyError("monolithic layout has more than one chiplet")
        return self

    def to_dict(self) -> dict:
        return {
            "layout_name": self.layout_name,
            "layout_params": dict(self.layout_params),
            "nodes": self.node_count,
            "edges": [{"u": u, "v": v, "kind": k.value} for u, v, k in self.edges],
            "chiplet_of": list(self.chiplet_of),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        return _make(
            data["nodes"],
            [(e["u"], e["v"], EdgeKind(e["kind"])) for e in data["edges"]],
            data["chiplet_of"],
            data["layout_name"],
            data.get("layout_params", {}),
        )


@dataclass(frozen=True)
class PathStats:
    nodes: tuple[int, ...]
    t_swap: int
    t_link: int

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


def _make(n, edges, chiplet_of, name, params, monolithic=None) -> Topology:
    canon = sorted(
        {(min(u, v), max(u, v)): EdgeKind(k) for u, v, k in edges}.items()
    )
    if len(canon) != len(edges):
        raise TopologyError("duplicate edges passed to constructor")
    topo = Topology(
        node_count=int(n),
        edges=tuple((u, v, k) for (u, v), k in canon),
        chiplet_of=tuple(int(c) for c in chiplet_of),
        layout_name=name,
        layout_params=dict(params),
    )
    return topo.validate(monolithic=monolithic)


def _kinded(edges, chiplet_of):
    return [
        (u, v, EdgeKind.LOCAL if chiplet_of[u] == chiplet_of[v] else EdgeKind.LINK)
        for u, v in edges
    ]


def _require_positive(**dims):
    for name, value in dims.items():
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidParameter(f"{name} must be an integer >= 1, got {value!r}")


def _grid_edges(width: int, height: int) -> list[tuple[int, int]]:
    edges = []
    for y in range(height):
        for x in range(width):
            u = y * width + x
            if x + 1 < width:
                edges.append((u, u + 1))
            if y + 1 < height:
                edges.append((u, u + width))
    return edges


# ---------------------------------------------------------------- constructors

def build_grid(width: int, height: int) -> Topology:
    _require_positive(width=width, height=height)
    n = width * height
    edges = [(u, v, EdgeKind.LOCAL) for u, v in _grid_edges(width, height)]
    return _make(n, edges, [0] * n, "grid", {"width": width, "height": height},
                 monolithic=True)


def build_chiplet_grid(chips_w: int, chips_h: int, chip_w: int = 5, chip_h: int = 5) -> Topology:
    """Rectangular array of grid chiplets.

    Adjacent chiplets share one link between the midpoints (index ``side // 2``)
    of their facing boundaries; all other cross-chip couplers are dropped.
    """
    _require_positive(chips_w=chips_w, chips_h=chips_h, chip_w=chip_w, chip_h=chip_h)
    width, height = chips_w * chip_w, chips_h * chip_h
    n = width * height
    chiplet_of = [
        (y // chip_h) * chips_w + x // chip_w for y in range(height) for x in range(width)
    ]
    edges = [
        (u, v, EdgeKind.LOCAL)
        for u, v in _grid_edges(width, height)
        if chiplet_of[u] == chiplet_of[v]
    ]
    for cy in range(chips_h):
        for cx in range(chips_w):
            x0, y0 = cx * chip_w, cy * chip_h
            if cx + 1 < chips_w:
                y = y0 + chip_h // 2
                edges.append((y * width + x0 + chip_w - 1, y * width + x0 + chip_w, EdgeKind.LINK))
            if cy + 1 < chips_h:
                x = x0 + chip_w // 2
                edges.append(((y0 + chip_h - 1) * width + x, (y0 + chip_h) * width + x, EdgeKind.LINK))
    params = {"chips_w": chips_w, "chips_h": chips_h, "chip_w": chip_w, "chip_h": chip_h}
    return _make(n, edges, chiplet_of, "chiplet_grid", params)


def build_grid_tree(depth: int, chip_w: int = 5, chip_h: int = 5) -> Topology:
    """Complete binary tree of grid chiplets.

    A child links from its top-middle qubit to a bottom corner of its parent:
    the left child to the bottom-left corner, the right child to the bottom-right.
    """
    _require_positive(depth=depth, chip_w=chip_w, chip_h=chip_h)
    size = chip_w * chip_h
    n_chips = 2 ** depth - 1
    local = _grid_edges(chip_w, chip_h)
    edges = []
    for c in range(n_chips):
        base = c * size
        edges.extend((base + u, base + v, EdgeKind.LOCAL) for u, v in local)
        if c > 0:
            parent = (c - 1) // 2
            corner_x = 0 if c == 2 * parent + 1 else chip_w - 1
            top_mid = base + chip_w // 2
            corner = parent * size + (chip_h - 1) * chip_w + corner_x
            edges.append((top_mid, corner, EdgeKind.LINK))
    chiplet_of = [c for c in range(n_chips) for _ in range(size)]
    params = {"depth": depth, "chip_w": chip_w, "chip_h": chip_h}
    return _make(n_chips * size, edges, chiplet_of, "grid_tree", params)


def _heavyhex_rows(rows: int, width: int, shifted: bool, tails: bool):
    """Row-based heavy-hex lattice.

    ``rows`` horizontal chains are joined by bridge qubits every fourth column,
    with the bridge columns alternating between ``1 mod 4`` and ``3 mod 4`` from
    one gap to the next so that every cell is a 12-cycle.  With ``shifted`` the
    odd rows are offset one column right (the IBM layout); with ``tails`` the
    bridge positions of the two outer virtual gaps become dangling qubits.

    Returns (positions, edges, kind-of-node) with node order: row qubits row-major,
    then bridges and tails ordered by (gap, column).
    """
    nodes: dict[tuple[str, int, int], int] = {}
    positions: list[tuple[float, float]] = []
    edges: list[tuple[int, int]] = []

    def add(key, pos):
        nodes[key] = len(positions)
        positions.append(pos)
        return nodes[key]

    spans = []
    for r in range(rows):
        lo = (r % 2) if shifted else 0
        spans.append((lo, lo + width - 1))
        prev = None
        for x in range(lo, lo + width):
            u = add(("q", r, x), (x, 2 * r))
            if prev is not None:
                edges.append((prev, u))
            prev = u

    def bridge_columns(gap):
        phase = 1 + 2 * (gap % 2)
        return phase

    for gap in range(-1, rows):
        phase = bridge_columns(gap)
        above, below = gap, gap + 1
        for x in range(phase, max(hi for _, hi in spans) + 1, 4):
            has_above = 0 <= above < rows and spans[above][0] <= x <= spans[above][1]
            has_below = 0 <= below < rows and spans[below][0] <= x <= spans[below][1]
            if has_above and has_below:
                b = add(("b", gap, x), (x, 2 * gap + 1))
                edges.append((nodes[("q", above, x)], b))
                edges.append((b, nodes[("q", below, x)]))
            elif tails and (has_above or has_below) and (gap == -1 or gap == rows - 1):
                row = above if has_above else below
                b = add(("t", gap, x), (x, 2 * gap + 1))
                edges.append((nodes[("q", row, x)], b))
    return nodes, positions, edges


def heavyhex_node_count(rows: int, cells: int) -> int:
    nodes, _, _ = _heavyhex_rows(rows, 4 * cells + 2, shifted=True, tails=True)
    return len(nodes)


def build_heavyhex(target_n: int) -> Topology:
    """Monolithic heavy-hex lattice with node count closest to ``target_n``.

    The lattice has ``rows`` chains of ``4 * cells + 2`` qubits; (2, 2) is the
    27-qubit Falcon layout.  Ties go to the squarer aspect.
    """
    _require_positive(target_n=target_n)
    best = None
    max_dim = max(2, int(math.isqrt(target_n)) + 3)
    for rows in range(1, max_dim + 1):
        for cells in range(1, max_dim + 1):
            count = heavyhex_node_count(rows, cells)
            width, height = 4 * cells + 2, 2 * rows + 1
            key = (abs(count - target_n), abs(math.log(width / height)), rows, cells)
            if best is None or key < best[0]:
                best = (key, rows, cells)
            if count > 2 * target_n + 50:
                break
    _, rows, cells = best
    nodes, _, edges = _heavyhex_rows(rows, 4 * cells + 2, shifted=True, tails=True)
    n = len(nodes)
    return _make(n, [(u, v, EdgeKind.LOCAL) for u, v in edges], [0] * n, "heavyhex",
                 {"target_n": target_n, "rows": rows, "cells": cells}, monolithic=True)


def _block_shape(n_blocks: int) -> tuple[int, int]:
    # A block is 16 columns by 4 rows (about 8 units tall with bridges): favor
    # arrangements whose overall outline is closest to square.
    best = None
    for bh in range(1, n_blocks + 1):
        if n_blocks % bh:
            continue
        bw = n_blocks // bh
        key = (abs(math.log((HEAVYHEX_BLOCK_WIDTH * bw) / (2 * HEAVYHEX_BLOCK_ROWS * bh))), bh)
        if best is None or key < best[0]:
            best = (key, bw, bh)
    return best[1], best[2]


def build_heavyhex_chiplets(n_blocks: int) -> Topology:
    """Heavy-hex lattice cut into 80-qubit blocks (4 rows x 16 columns + bridges).

    Every coupler crossing a block boundary becomes a link; an interior block
    has 4 links per side, 16 in total.
    """
    _require_positive(n_blocks=n_blocks)
    bw, bh = _block_shape(n_blocks)
    rows = HEAVYHEX_BLOCK_ROWS * bh
    width = HEAVYHEX_BLOCK_WIDTH * bw
    nodes, positions, edges = _heavyhex_rows(rows, width, shifted=False, tails=False)
    chiplet_of = [0] * len(nodes)
    for (kind, r, x), idx in nodes.items():
        # a bridge joins the block of the row above it
        row = r
        chiplet_of[idx] = (min(row // HEAVYHEX_BLOCK_ROWS, bh - 1) * bw
                           + min(x // HEAVYHEX_BLOCK_WIDTH, bw - 1))
    params = {"n_blocks": n_blocks, "blocks_w": bw, "blocks_h": bh}
    return _make(len(nodes), _kinded(edges, chiplet_of), chiplet_of, "heavyhex_chiplets", params)


def _falcon_block(base: int) -> list[tuple[int, int, EdgeKind]]:
    return [(base + u, base + v, EdgeKind.LOCAL) for u, v in FALCON_EDGES]


def build_falcon_chiplets(chips_w: int, chips_h: int) -> Topology:
    """Rectangular tiling of 27-qubit Falcon chiplets.

    Neighboring chips are joined by one link between degree-1 qubits: the east
    port of one chip meets the west port of the next, south meets north.
    """
    _require_positive(chips_w=chips_w, chips_h=chips_h)
    edges = []
    for cy in range(chips_h):
        for cx in range(chips_w):
            c = cy * chips_w + cx
            edges.extend(_falcon_block(c * FALCON_SIZE))
            if cx + 1 < chips_w:
                edges.append((c * FALCON_SIZE + FALCON_SIDE_PORT["east"],
                              (c + 1) * FALCON_SIZE + FALCON_SIDE_PORT["west"], EdgeKind.LINK))
            if cy + 1 < chips_h:
                edges.append((c * FALCON_SIZE + FALCON_SIDE_PORT["south"],
                              (c + chips_w) * FALCON_SIZE + FALCON_SIDE_PORT["north"], EdgeKind.LINK))
    n_chips = chips_w * chips_h
    chiplet_of = [c for c in range(n_chips) for _ in range(FALCON_SIZE)]
    return _make(n_chips * FALCON_SIZE, edges, chiplet_of, "falcon_chiplets",
                 {"chips_w": chips_w, "chips_h": chips_h})


# ------------------------------------------------------------------ expanders

def random_regular_graph(n: int, degree: int, rng: np.random.Generator,
                         max_tries: int = 10_000) -> list[tuple[int, int]]:
    """Uniform-ish random ``degree``-regular simple graph by the configuration model.

    Stubs are paired by a random permutation; any pairing with a self-loop or a
    repeated edge is rejected whole and redrawn.
    """
    if (n * degree) % 2 or degree >= n or degree < 1:
        raise InvalidParameter(f"no simple {degree}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        pairs.sort(axis=1)
        edges = {(int(a), int(b)) for a, b in pairs}
        if len(edges) == len(pairs):
            return sorted(edges)
    raise InvalidParameter(f"configuration model failed after {max_tries} tries")


def _embed_chip_graph(chip_edges, n_chips, port_choice) -> Topology:
    """Qubit-level topology for a chip graph; ``port_choice[c]`` lists ports in
    the order chip ``c``'s incident chip edges are visited."""
    used = [0] * n_chips
    edges = []
    for c in range(n_chips):
        edges.extend(_falcon_block(c * FALCON_SIZE))
    for a, b in chip_edges:
        pa = port_choice[a][used[a]]
        pb = port_choice[b][used[b]]
        used[a] += 1
        used[b] += 1
        edges.append((a * FALCON_SIZE + pa, b * FALCON_SIZE + pb, EdgeKind.LINK))
    chiplet_of = [c for c in range(n_chips) for _ in range(FALCON_SIZE)]
    return Topology(
        node_count=n_chips * FALCON_SIZE,
        edges=tuple(sorted(edges)),
        chiplet_of=tuple(chiplet_of),
        layout_name="expander_chiplets",
    )


def expander_candidate(n_chips: int, graph_index: int, embed_index: int, seed: int,
                       degree: int = 3) -> tuple[list[tuple[int, int]], Topology]:
    """The candidate at (graph_index, embed_index) of the seeded search stream."""
    g_rng = np.random.default_rng([seed, graph_index])
    chip_edges = random_regular_graph(n_chips, degree, g_rng)
    e_rng = np.random.default_rng([seed, graph_index, embed_index, 1])
    ports = [[FALCON_PORTS[i] for i in e_rng.permutation(len(FALCON_PORTS))[:degree]]
             for _ in range(n_chips)]
    return chip_edges, _embed_chip_graph(chip_edges, n_chips, ports)


def build_expander_chiplets(n_chips: int, seed: int, graph_trials: int = 800,
                            embed_trials: int = 60, degree: int = 3) -> Topology:
    """Falcon chiplets wired by a random regular chip graph, best of a random search.

    Draws ``graph_trials`` random ``degree``-regular chip graphs and, for each,
    ``embed_trials`` random assignments of link endpoints to degree-1 qubits.
    Keeps the connected qubit-level topology with the largest spectral gap
    (first found wins ties); disconnected chip graphs are skipped.  Candidate ``(g, e)`` depends only on ``(seed, g, e)``.
    """
    _require_positive(n_chips=n_chips, graph_trials=graph_trials, embed_trials=embed_trials,
                      degree=degree)
    if n_chips < 4 or degree >= n_chips or (n_chips * degree) % 2:
        raise InvalidParameter(f"no simple {degree}-regular graph on {n_chips} chips")
    if degree > len(FALCON_PORTS):
        raise InvalidParameter(f"degree {degree} exceeds {len(FALCON_PORTS)} link qubits per chip")
    best_gap, best = -1.0, None
    for g in range(graph_trials):
        for e in range(embed_trials):
            chip_edges, topo = expander_candidate(n_chips, g, e, seed, degree)
            if not topo.is_connected():
                break  # a disconnected chip graph stays disconnected for every embedding
            gap = spectral_gap(topo)
            if gap > best_gap:
                best_gap, best = gap, (g, e, chip_edges, topo)
    if best is None:
        raise TopologyError(f"all {graph_trials} random chip graphs were disconnected")
    g, e, chip_edges, topo = best
    params = {"n_chips": n_chips, "degree": degree, "seed": seed,
              "graph_trials": graph_trials, "embed_trials": embed_trials,
              "best_graph": g, "best_embedding": e,
              "chip_edges": [list(ce) for ce in chip_edges]}
    return _make(topo.node_count, topo.edges, topo.chiplet_of, "expander_chiplets", params)


# --------------------------------------------------------------------- metrics

def _require_connected(t: Topology) -> None:
    if not t.is_connected():
        raise DisconnectedGraphError(f"{t.layout_name} is not connected")


def eccentricities(t: Topology) -> np.ndarray:
    indptr, indices = t.csr
    ecc = kernels.eccentricities(indptr, indices)
    if (ecc < 0).any():
        raise DisconnectedGraphError(f"{t.layout_name} is not connected")
    return ecc


def diameter(t: Topology) -> int:
    """Longest shortest path (in hops; links and local couplers count equally)."""
    return int(eccentricities(t).max())


def diameter_path(t: Topology) -> PathStats:
    """A shortest path realizing the diameter, with its local/link hop split.

    Endpoints are the lexicographically smallest pair at maximal distance; each
    step moves to the smallest-id neighbor one hop closer to the far end.
    """
    ecc = eccentricities(t)
    diam = int(ecc.max())
    indptr, indices = t.csr
    u = int(np.argmax(ecc == diam))
    dist_u = kernels.bfs_distances(indptr, indices, u)
    v = int(np.argmax(dist_u == diam))
    dist_v = kernels.bfs_distances(indptr, indices, v)
    path = [u]
    cur = u
    while cur != v:
        nbrs = indices[indptr[cur]:indptr[cur + 1]]
        cur = int(nbrs[dist_v[nbrs] == dist_v[cur] - 1][0])
        path.append(cur)
    t_link = sum(1 for a, b in zip(path, path[1:]) if t.edge_kind(a, b) is EdgeKind.LINK)
    return PathStats(nodes=tuple(path), t_swap=len(path) - 1 - t_link, t_link=t_link)


def normalized_laplacian(t: Topology, sparse: bool = False):
    deg = t.degrees.astype(float)
    if (deg == 0).any():
        raise TopologyError("normalized Laplacian undefined: isolated node")
    indptr, indices = t.csr
    adj = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(t.node_count,) * 2)
    inv_sqrt = sp.diags(1.0 / np.sqrt(deg))
    lap = sp.identity(t.node_count, format="csr") - inv_sqrt @ adj @ inv_sqrt
    return lap.tocsc() if sparse else lap.toarray()


DENSE_SPECTRUM_MAX = 400


def spectral_gap(t: Topology, tol: float = 1e-9, dense: bool | None = None) -> float:
    """Smallest eigenvalue above ``tol`` of the normalized Laplacian ``I - D^-1/2 A D^-1/2``.

    Small graphs use a dense symmetric eigensolve; larger ones use shift-invert
    Lanczos about a point just below zero.
    """
    if t.node_count < 2:
        raise InvalidParameter("spectral gap needs at least two nodes")
    _require_connected(t)
    if dense is None:
        dense = t.node_count <= DENSE_SPECTRUM_MAX
    if dense:
        vals = np.linalg.eigvalsh(normalized_laplacian(t))
    else:
        lap = normalized_laplacian(t, sparse=True)
        vals = eigsh(lap, k=3, sigma=-1e-2, which="LM", return_eigenvectors=False, tol=0)
    vals = np.sort(vals)
    return float(vals[vals > tol][0])


def qubit_link_ratio(t: Topology) -> float:
    links = t.n_links
    if links == 0:
        raise TopologyError(f"{t.layout_name} has no links (monolithic)")
    return t.node_count / links


def links_per_chiplet(t: Topology) -> dict[int, int]:
    counts = {c: 0 for c in set(t.chiplet_of)}
    for u, v in t.links:
        counts[t.chiplet_of[u]] += 1
        counts[t.chiplet_of[v]] += 1
    return counts


# ----------------------------------------------------- size-matched families

FAMILIES = ("grid", "chiplet_grid", "grid_tree", "heavyhex", "heavyhex_chiplets",
            "falcon", "expander")


def near_square_tiling(chips: int) -> tuple[int, int]:
    """(w, h) with h <= w <= 2h whose product is closest to ``chips`` (squarer wins ties)."""
    best = None
    for h in range(1, math.isqrt(max(chips, 1)) + 2):
        for w in range(h, 2 * h + 1):
            key = (abs(w * h - chips), w - h, w)
            if best is None or key < best[0]:
                best = (key, (w, h))
    return best[1]


def build_family(family: str, n_target: int, seed: int = 0, graph_trials: int = 800,
                 embed_trials: int = 60) -> Topology:
    """Instance of ``family`` whose qubit count is closest to ``n_target``."""
    _require_positive(n_target=n_target)
    if family == "grid":
        best = min(
            ((w, h) for h in range(1, math.isqrt(n_target) + 2)
             for w in {max(1, round(n_target / h))} if w >= h),
            key=lambda p: (abs(p[0] * p[1] - n_target), p[0] - p[1]),
        )
        return build_grid(*best)
    if family == "chiplet_grid":
        chips = max(1, round(n_target / 25))
        return build_chiplet_grid(*near_square_tiling(chips))
    if family == "grid_tree":
        depth = min(range(1, 16), key=lambda d: abs(25 * (2 ** d - 1) - n_target))
        return build_grid_tree(depth)
    if family == "heavyhex":
        return build_heavyhex(n_target)
    if family == "heavyhex_chiplets":
        return build_heavyhex_chiplets(max(1, round(n_target / 80)))
    if family == "falcon":
        chips = max(1, round(n_target / FALCON_SIZE))
        return build_falcon_chiplets(*near_square_tiling(chips))
    if family == "expander":
        chips = max(4, 2 * round(n_target / (2 * FALCON_SIZE)))
        return build_expander_chiplets(chips, seed=seed, graph_trials=graph_trials,
                                       embed_trials=embed_trials)
    raise InvalidParameter(f"unknown topology family {family!r}; choose from {FAMILIES}")


def summarize(t: Topology) -> dict:
    row = {
        "layout": t.layout_name,
        "nodes": t.node_count,
        "chiplets": t.n_chiplets,
        "links": t.n_links,
        "diameter": diameter(t),
        "spectral_gap": spectral_gap(t) if t.node_count > 1 else float("nan"),
        "qubit_link_ratio": qubit_link_ratio(t) if t.n_links else float("inf"),
    }
    path = diameter_path(t)
    row["t_swap"], row["t_link"] = path.t_swap, path.t_link
    return row


def as_networkx(t: Topology):
    """NetworkX view (edge attribute ``kind``, node attribute ``chiplet``)."""
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from((i, {"chiplet": c}) for i, c in enumerate(t.chiplet_of))
    g.add_edges_from((u, v, {"kind": k.value}) for u, v, k in t.edges)
    return g


__all__: Sequence[str] = (
    "EdgeKind", "Topology", "PathStats", "InvalidParameter", "TopologyError",
    "DisconnectedGraphError", "build_grid", "build_chiplet_grid", "build_grid_tree",
    "build_heavyhex", "build_heavyhex_chiplets", "build_falcon_chiplets",
    "build_expander_chiplets", "expander_candidate", "random_regular_graph",
    "diameter", "diameter_path", "spectral_gap", "qubit_link_ratio", "build_family",
    "summarize", "FAMILIES",
)
