import re

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from udmis.bnb import BnbConfig, bnb_solve, clique_cover_bound, export_ilp, reduce
from udmis.graph import Graph, LatticeSpec, generate_er_gnm, generate_ud_lattice, rewire
from udmis.sla import sla_solve


@st.composite
def er_graphs(draw, max_n=16):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, n * (n - 1) // 2))
    return generate_er_gnm(n, m, draw(st.integers(0, 2**32)))


def test_reduce_examples(p3, k4):
    r = reduce(Graph.from_edges(2, [(0, 1)]))
    assert r.residual.n == 0 and r.offset == 1
    r = reduce(p3)
    assert r.residual.n == 0 and r.offset == 2 and r.forced_in == {0, 2}
    r = reduce(k4)
    assert r.residual.n == 4 and r.residual.num_edges == 6 and r.offset == 0


@given(er_graphs())
@settings(max_examples=100, deadline=None)
def test_reduction_sound(g):
    r = reduce(g)
    assert r.offset + oracles.mis_size(r.residual.n, r.residual.edges) == oracles.mis_size(g.n, g.edges)


def test_clique_cover_examples(p3, k4):
    assert clique_cover_bound(k4) == 1
    assert clique_cover_bound(p3) == 2
    assert clique_cover_bound(Graph.from_edges(5, [])) == 5
    assert clique_cover_bound(p3, {0, 2}) == 2


@given(er_graphs(), st.data())
@settings(max_examples=150, deadline=None)
def test_clique_cover_admissible(g, data):
    free = data.draw(st.sets(st.integers(0, g.n - 1)))
    sub = g.induced(sorted(free))
    assert clique_cover_bound(g, free) >= oracles.mis_size(sub.n, sub.edges)


def test_solve_examples(p3, k4):
    r = bnb_solve(p3)
    assert r.mis_size == 2 and r.status == "optimal"
    r = bnb_solve(k4)
    assert r.mis_size == 1 and r.status == "optimal" and r.nodes_explored <= 9
    g = generate_ud_lattice(LatticeSpec(8, 800, 2, 7))
    assert bnb_solve(g).mis_size == sla_solve(g).mis_size


@given(er_graphs(), st.booleans(), st.booleans())
@settings(max_examples=120, deadline=None)
def test_exact_against_enumeration(g, domination, warm):
    cfg = BnbConfig(domination=domination, disable_rounding_heuristics=not warm)
    r = bnb_solve(g, cfg)
    assert r.mis_size == oracles.mis_size(g.n, g.edges)
    assert len(r.witness) == r.mis_size
    sizes = [s for _, s in r.incumbents]
    assert sizes == sorted(set(sizes)) and sizes[-1] == r.mis_size
    assert r.tts <= r.tto


def test_matches_sla_on_lattices():
    for seed in range(30):
        for r2 in (2, 4, 5):
            g = generate_ud_lattice(LatticeSpec(9, 800, r2, seed))
            assert bnb_solve(g).mis_size == sla_solve(g).mis_size
        h = rewire(generate_ud_lattice(LatticeSpec(7, 800, 2, seed)), 0.5, seed)
        assert bnb_solve(h).mis_size == sla_solve(h, witness=False).mis_size


def test_target_mode():
    g = generate_ud_lattice(LatticeSpec(10, 800, 4, 1))
    opt = sla_solve(g).mis_size
    r = bnb_solve(g, BnbConfig(target=opt))
    assert r.status == "target-reached" and r.mis_size == opt
    assert r.tto is None and r.tts is not None


def test_timeout_returns_incumbent():
    g = generate_er_gnm(90, 500, 3)
    r = bnb_solve(g, BnbConfig(time_limit=0.05))
    assert r.status == "timeout" and r.mis_size >= 1 and r.tto is None


def test_search_tree_is_deterministic():
    g = generate_ud_lattice(LatticeSpec(10, 800, 4, 2))
    a, b = bnb_solve(g), bnb_solve(g)
    assert a.nodes_explored == b.nodes_explored and a.witness == b.witness
    assert [s for _, s in a.incumbents] == [s for _, s in b.incumbents]


def test_process_clock_and_json():
    r = bnb_solve(generate_er_gnm(20, 40, 1), BnbConfig(clock="process"))
    d = r.to_dict()
    assert d["clock"] == "process" and d["incumbents"][-1]["size"] == r.mis_size
    with pytest.raises(ValueError):
        BnbConfig(clock="cpu")


def test_export_ilp(p3, k4):
    text = export_ilp(p3)
    assert "x0 + x1 <= 1" in text and "x1 + x2 <= 1" in text
    assert re.search(r"Binary\n x0 x1 x2\nEnd", text)
    assert text.startswith("\\") and "Maximize\n obj: x0 + x1 + x2" in text
    e2 = export_ilp(Graph.from_edges(2, []))
    assert "obj: x0 + x1" in e2 and "<=" not in e2
    cons = [ln for ln in export_ilp(k4).splitlines() if "<=" in ln]
    assert [c.split(": ")[1] for c in cons] == [f"x{i} + x{j} <= 1" for i, j in k4.edges]
    assert export_ilp(k4) == export_ilp(k4)
