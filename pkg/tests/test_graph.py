import json

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from udmis.graph import (BRUTE_FORCE_MAX_N, ConnectivityError, Graph, InvalidSpecError,
                         LatticeSpec, RewireError, SizeLimitError, brute_force_census,
                         disk_offsets, edge_count_bounds, generate_er_gnm, generate_ud_lattice,
                         graph_density, rewire, unit_disk_graph, validate_independent_set)


@st.composite
def small_graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, edges)


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        LatticeSpec(0, 800, 2)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(5, 0, 2)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(5, 1001, 2)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(5, 800, 0)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(5, 800, 2, occupancy="poisson")


def test_node_count_rounding():
    assert LatticeSpec(21, 800, 2).n_nodes == round(0.8 * 441)
    assert LatticeSpec(13, 800, 2).n_nodes == 135
    assert LatticeSpec(5, 500, 2).n_nodes == 12  # 12.5 rounds half to even
    assert LatticeSpec(3, 500, 2).n_nodes == 4   # 4.5 -> 4


def test_full_2x2_is_k4():
    g = generate_ud_lattice(LatticeSpec(2, 1000, 2, 99))
    assert g.n == 4 and g.num_edges == 6


def test_full_3x3_edge_count():
    g = generate_ud_lattice(LatticeSpec(3, 1000, 2, 5))
    assert (g.n, g.num_edges) == (9, 20)


def test_zero_nodes_is_invalid():
    with pytest.raises(InvalidSpecError):
        generate_ud_lattice(LatticeSpec(2, 100, 2))


def test_connectivity_exhaustion_reported():
    # five scattered sites on a 40x40 lattice with nearest-neighbour links are never connected
    with pytest.raises(ConnectivityError, match="1000"):
        generate_ud_lattice(LatticeSpec(40, 3, 1, 0))


@pytest.mark.parametrize("r2", [1, 2, 4, 5, 8, 9, 10, 13, 16])
def test_unit_disk_predicate_is_exact(r2):
    for seed in range(3):
        g = generate_ud_lattice(LatticeSpec(8, 700, r2, seed, connected=False))
        assert list(g.edges) == oracles.unit_disk_edges(g.coords, r2)
        assert len(set(g.coords)) == g.n == LatticeSpec(8, 700, r2).n_nodes


def test_union_jack_structure():
    assert sorted(disk_offsets(2)) == [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                                       if (dx, dy) != (0, 0)]
    for seed in range(10):
        g = generate_ud_lattice(LatticeSpec(10, 800, 2, seed))
        assert g.max_degree() <= 8
        assert g.num_edges <= 4 * 100 - 60 + 2
        assert g.is_connected()


def test_generation_is_deterministic_bytes():
    a = generate_ud_lattice(LatticeSpec(9, 800, 2, 42)).to_json()
    b = generate_ud_lattice(LatticeSpec(9, 800, 2, 42)).to_json()
    assert a == b
    assert a != generate_ud_lattice(LatticeSpec(9, 800, 2, 43)).to_json()


def test_bernoulli_occupancy():
    g = generate_ud_lattice(LatticeSpec(20, 500, 2, 3, occupancy="bernoulli", connected=False))
    assert 140 < g.n < 260


def test_json_round_trip(tmp_path):
    g = generate_ud_lattice(LatticeSpec(6, 800, 5, 1))
    p = tmp_path / "g.json"
    g.save(p)
    h = Graph.load(p)
    assert h == g and h.to_json() == g.to_json()
    d = json.loads(g.to_json())
    assert d["format_version"] == 1 and d["kind"] == "ud_lattice"
    assert d["edges"] == sorted(d["edges"])


def test_edge_count_bounds():
    assert edge_count_bounds(21, 0.8) == (1640, pytest.approx(1049.6))
    assert edge_count_bounds(2, 1.0) == (6, 6.0)
    assert edge_count_bounds(1, 0.5) == (0, 0.0)


def test_mean_edge_count_near_expected():
    # sampling without replacement gives a slightly different mean than rho^2 * max;
    # the agreement is loose at this sample size
    counts = [generate_ud_lattice(LatticeSpec(21, 800, 2, s, connected=False)).num_edges
              for s in range(200)]
    mean = sum(counts) / len(counts)
    var = sum((c - mean) ** 2 for c in counts) / (len(counts) - 1)
    se = (var / len(counts)) ** 0.5
    assert abs(mean - 1049.6) < 3 * se + 0.5


def test_density():
    assert graph_density(Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])) == 1.0
    assert graph_density(Graph.from_edges(2, [(0, 1)])) == 1.0
    assert graph_density(Graph.from_edges(2, [])) == 0.0
    with pytest.raises(ValueError):
        graph_density(Graph.from_edges(1, []))


def test_er_gnm():
    k4 = generate_er_gnm(4, 6, 3)
    assert k4.edges == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert generate_er_gnm(5, 0, 1).num_edges == 0
    with pytest.raises(InvalidSpecError):
        generate_er_gnm(3, 4, 0)
    g = generate_er_gnm(30, 100, 9)
    assert g.num_edges == 100 and g == generate_er_gnm(30, 100, 9)


def test_rewire():
    g = generate_ud_lattice(LatticeSpec(6, 1000, 2, 0))
    assert rewire(g, 0, 5).edges == g.edges
    h = rewire(g, 1.0, 5)
    assert (h.n, h.num_edges) == (g.n, g.num_edges)
    assert h.meta["epsilon_ppt"] == 1000 and h.meta["kind"] == "rewired"
    long_edges = [(i, j) for i, j in h.edges
                  if (g.coords[i][0] - g.coords[j][0]) ** 2 + (g.coords[i][1] - g.coords[j][1]) ** 2 > 2]
    assert long_edges
    assert rewire(g, 0.5, 5) == rewire(g, 0.5, 5)
    k4 = Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    with pytest.raises(RewireError):
        rewire(k4, 0.5, 1)


@given(small_graphs(), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_rewire_preserves_counts(g, eps, seed):
    if g.n < 2 or g.num_edges == g.n * (g.n - 1) // 2:
        return
    h = rewire(g, eps, seed)
    assert h.n == g.n and h.num_edges == g.num_edges
    assert len(set(h.edges)) == h.num_edges


def test_validate_independent_set(p3):
    assert validate_independent_set(p3, {0, 2})
    assert not validate_independent_set(p3, {0, 1})
    assert validate_independent_set(p3, set())
    with pytest.raises(ValueError):
        validate_independent_set(p3, {5})


def test_brute_force_examples(p3, k4, empty3):
    assert tuple(vars(brute_force_census(p3)).values()) == (2, 1, 3)
    assert tuple(vars(brute_force_census(k4)).values()) == (1, 4, 1)
    assert tuple(vars(brute_force_census(empty3)).values()) == (3, 1, 3)
    with pytest.raises(SizeLimitError):
        brute_force_census(Graph.from_edges(BRUTE_FORCE_MAX_N + 1, []))


@given(small_graphs(max_n=14))
@settings(max_examples=150, deadline=None)
def test_brute_force_matches_enumeration(g):
    c = brute_force_census(g)
    assert (c.mis_size, c.d_mis, c.d_mis_m1) == oracles.census(g.n, g.edges)
    if c.mis_size >= 1:
        assert c.d_mis_m1 >= 1


def test_unit_disk_graph_sorts_coords():
    g = unit_disk_graph([(1, 0), (0, 0)], 1)
    assert g.coords == ((0, 0), (1, 0)) and g.edges == ((0, 1),)
