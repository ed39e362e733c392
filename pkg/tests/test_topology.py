import json
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiplet_fabric import topology as topo
from chiplet_fabric import _bfs_py, kernels


def _nx(t):
    return topo.as_networkx(t)


class TestFalcon:
    def test_single_chip(self):
        t = topo.build_falcon_chiplets(1, 1)
        assert t.node_count == 27 and len(t.edges) == 28 and t.n_links == 0
        assert sorted(np.flatnonzero(t.degrees == 1)) == sorted(topo.FALCON_PORTS)
        assert set(t.degrees) <= {1, 2, 3}

    def test_heavyhex_2x2_is_falcon(self):
        hh = topo.build_heavyhex(27)
        assert hh.layout_params["rows"] == 2 and hh.layout_params["cells"] == 2
        assert nx.is_isomorphic(_nx(hh), _nx(topo.build_falcon_chiplets(1, 1)))

    def test_tiling_links(self):
        t = topo.build_falcon_chiplets(3, 2)
        assert t.n_links == 2 * 2 + 3 * 1
        assert topo.qubit_link_ratio(t) == pytest.approx(162 / 7)
        for u, v in t.links:
            assert u % 27 in topo.FALCON_PORTS and v % 27 in topo.FALCON_PORTS

    def test_2x2_metrics(self):
        row = topo.summarize(topo.build_falcon_chiplets(2, 2))
        assert (row["nodes"], row["links"], row["diameter"]) == (108, 4, 30)
        assert (row["t_swap"], row["t_link"]) == (28, 2)


class TestGrids:
    @pytest.mark.parametrize("w,h", [(1, 2), (5, 5), (10, 3), (7, 12)])
    def test_grid_diameter(self, w, h):
        assert topo.diameter(topo.build_grid(w, h)) == w + h - 2

    def test_chiplet_grid_matches_monolithic_diameter(self):
        assert topo.diameter(topo.build_chiplet_grid(2, 2)) == 18
        assert topo.diameter(topo.build_grid(10, 10)) == 18

    def test_chiplet_grid_path_split(self):
        path = topo.diameter_path(topo.build_chiplet_grid(2, 1))
        assert (path.t_swap, path.t_link) == (12, 1)

    def test_chiplet_grid_links(self):
        t = topo.build_chiplet_grid(3, 2)
        assert t.n_links == 2 * 2 + 3 * 1
        assert max(topo.links_per_chiplet(t).values()) <= 4

    def test_grid_tree(self):
        t = topo.build_grid_tree(3)
        assert t.node_count == 7 * 25 and t.n_links == 6
        assert nx.is_tree(nx.quotient_graph(_nx(t), _chip_partition(t)))


def _chip_partition(t):
    parts = {}
    for node, chip in enumerate(t.chiplet_of):
        parts.setdefault(chip, set()).add(node)
    return list(parts.values())


class TestHeavyHex:
    @pytest.mark.parametrize("target", [27, 65, 127, 433, 1000])
    def test_degrees(self, target):
        t = topo.build_heavyhex(target)
        assert set(t.degrees) <= {1, 2, 3}

    @pytest.mark.parametrize("blocks,nodes,links", [(1, 76, 0), (2, 156, 4), (4, 312, 16),
                                                    (10, 792, 52)])
    def test_chiplet_blocks(self, blocks, nodes, links):
        t = topo.build_heavyhex_chiplets(blocks)
        assert (t.node_count, t.n_links) == (nodes, links)
        assert max(topo.links_per_chiplet(t).values(), default=0) <= 16
        assert set(t.degrees) <= {1, 2, 3}

    def test_chiplets_match_monolithic_structure(self):
        t = topo.build_heavyhex_chiplets(4)
        assert all(len(c) <= 80 for c in _chip_partition(t))


class TestExpander:
    def test_regular_graph(self):
        edges = topo.random_regular_graph(10, 3, np.random.default_rng(0))
        g = nx.Graph(edges)
        assert all(d == 3 for _, d in g.degree()) and g.number_of_edges() == 15

    def test_deterministic(self):
        a = topo.build_expander_chiplets(6, seed=4, graph_trials=5, embed_trials=3)
        b = topo.build_expander_chiplets(6, seed=4, graph_trials=5, embed_trials=3)
        assert a == b
        assert a.layout_params["best_graph"] < 5

    def test_best_is_max_gap(self):
        t = topo.build_expander_chiplets(6, seed=1, graph_trials=4, embed_trials=3)
        gaps = []
        for g in range(4):
            for e in range(3):
                _, cand = topo.expander_candidate(6, g, e, 1)
                if cand.is_connected():
                    gaps.append(topo.spectral_gap(cand))
        assert topo.spectral_gap(t) == pytest.approx(max(gaps))

    def test_ratio(self):
        t = topo.build_expander_chiplets(8, seed=0, graph_trials=3, embed_trials=2)
        assert topo.qubit_link_ratio(t) == pytest.approx(27 * 8 / 12)
        assert t.is_connected()

    def test_odd_chip_count_rejected(self):
        with pytest.raises(topo.InvalidParameter):
            topo.build_expander_chiplets(5, seed=0)


class TestMetrics:
    @pytest.mark.parametrize("n", [5, 12, 31])
    def test_cycle_gap(self, n):
        t = topo._make(n, [(i, (i + 1) % n, topo.EdgeKind.LOCAL) for i in range(n)], [0] * n,
                       "cycle", {})
        assert topo.spectral_gap(t) == pytest.approx(1 - math.cos(2 * math.pi / n))
        assert topo.diameter(t) == n // 2

    def test_complete_graph_gap(self):
        n = 6
        edges = [(i, j, topo.EdgeKind.LOCAL) for i in range(n) for j in range(i + 1, n)]
        t = topo._make(n, edges, [0] * n, "complete", {})
        assert topo.spectral_gap(t) == pytest.approx(n / (n - 1))

    def test_dense_and_sparse_agree(self):
        t = topo.build_heavyhex_chiplets(6)
        assert topo.spectral_gap(t, dense=True) == pytest.approx(
            topo.spectral_gap(t, dense=False), rel=1e-8)

    def test_gap_matches_networkx(self):
        t = topo.build_chiplet_grid(2, 2)
        lap = nx.normalized_laplacian_matrix(_nx(t)).toarray()
        expected = sorted(np.linalg.eigvalsh(lap))[1]
        assert topo.spectral_gap(t) == pytest.approx(expected)

    def test_diameter_matches_networkx(self):
        for t in (topo.build_falcon_chiplets(2, 3), topo.build_grid_tree(3),
                  topo.build_heavyhex(200)):
            assert topo.diameter(t) == nx.diameter(_nx(t))

    def test_diameter_path_is_shortest(self):
        t = topo.build_falcon_chiplets(3, 3)
        path = topo.diameter_path(t)
        g = _nx(t)
        assert path.length == topo.diameter(t)
        assert nx.shortest_path_length(g, path.nodes[0], path.nodes[-1]) == path.length
        assert all(g.has_edge(a, b) for a, b in zip(path.nodes, path.nodes[1:]))

    def test_disconnected_rejected(self):
        with pytest.raises(topo.DisconnectedGraphError):
            topo._make(4, [(0, 1, topo.EdgeKind.LOCAL), (2, 3, topo.EdgeKind.LOCAL)],
                       [0] * 4, "split", {})

    def test_zero_links_ratio(self):
        with pytest.raises(topo.TopologyError):
            topo.qubit_link_ratio(topo.build_grid(3, 3))

    def test_link_inside_chip_rejected(self):
        with pytest.raises(topo.TopologyError):
            topo._make(2, [(0, 1, topo.EdgeKind.LINK)], [0, 0], "bad", {})


class TestSerialization:
    def test_json_round_trip(self):
        t = topo.build_falcon_chiplets(2, 1)
        data = json.loads(json.dumps(t.to_dict()))
        assert set(data) == {"layout_name", "layout_params", "nodes", "edges", "chiplet_of"}
        assert data["edges"][0].keys() == {"u", "v", "kind"}
        assert topo.Topology.from_dict(data) == t


class TestFamilies:
    @pytest.mark.parametrize("family", topo.FAMILIES)
    def test_build_family_near_target(self, family):
        t = topo.build_family(family, 300, graph_trials=2, embed_trials=2)
        assert 0.5 * 300 <= t.node_count <= 1.5 * 300

    @pytest.mark.parametrize("chips", range(1, 40))
    def test_near_square_tiling(self, chips):
        w, h = topo.near_square_tiling(chips)
        assert h <= w <= 2 * h


@st.composite
def random_graph(draw):
    n = draw(st.integers(1, 40))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=80))
    edges = sorted({(min(a, b), max(a, b)) for a, b in pairs if a != b})
    rows = [u for u, v in edges] + [v for u, v in edges]
    cols = [v for u, v in edges] + [u for u, v in edges]
    order = np.lexsort((cols, rows))
    rows, cols = np.array(rows, dtype=np.int64)[order], np.array(cols, dtype=np.int64)[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), np.ascontiguousarray(cols), n, edges


class TestKernels:
    @settings(max_examples=100, deadline=None)
    @given(random_graph())
    def test_backends_agree_with_networkx(self, graph):
        indptr, indices, n, edges = graph
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        lengths = dict(nx.single_source_shortest_path_length(g, 0))
        expected = np.array([lengths.get(v, -1) for v in range(n)])
        assert np.array_equal(kernels.bfs_distances(indptr, indices, 0), expected)
        assert np.array_equal(_bfs_py.bfs_distances(indptr, indices, 0), expected)
        assert np.array_equal(kernels.eccentricities(indptr, indices),
                              _bfs_py.eccentricities(indptr, indices))

    def test_backend_reported(self):
        assert kernels.BACKEND in ("cython", "python")
