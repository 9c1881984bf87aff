import pytest

from sslab import caps
from sslab.activity import alpha_n
from sslab.core.engine import apply_word
from sslab.errors import CapExceeded, ValidationError
from sslab.schreier import (cofinal, cofinality_folner_sets, export_graph, folner_chain,
                            import_csv, level_graph, orbit_ball, orbit_partition,
                            select_disjoint, symmetric, tail_transversal)
from sslab.words import RaySpec
from sslab.zoo import zoo_build


def machine(name):
    return zoo_build(name).machine


BASILICA_LEVEL1_DOT = """\
digraph schreier {
  n0 [label="0", shape=doublecircle];
  n1 [label="1"];
  n0 -> n1 [label="a", color="black"];
  n0 -> n1 [label="a^-1", color="blue"];
  n0 -> n0 [label="b", color="red"];
  n0 -> n0 [label="b^-1", color="darkgreen"];
  n1 -> n0 [label="a", color="black"];
  n1 -> n0 [label="a^-1", color="blue"];
  n1 -> n1 [label="b", color="red"];
  n1 -> n1 [label="b^-1", color="darkgreen"];
}
"""


def test_basilica_level_one_dot():
    m = machine("basilica")
    assert export_graph(level_graph(m, ["a", "b"], 1), "dot") == BASILICA_LEVEL1_DOT


def test_empty_generating_set():
    m = machine("basilica")
    g = orbit_ball(m, [], RaySpec.of((), ("0",)), 3)
    assert len(g.vertices) == 1 and not g.edges
    assert "n0 [label=\":0\", shape=doublecircle];" in export_graph(g)
    assert export_graph(g, "csv") == "src,label,dst\n:0,,\n"


def test_csv_round_trip():
    m = machine("grigorchuk")
    g = level_graph(m, ["a", "b", "c"], 4)
    verts, edges = import_csv(export_graph(g, "csv"))
    assert verts == {g.label(i) for i in range(len(g.vertices))}
    assert edges == {(g.label(s), l, g.label(t)) for s, l, t in g.edges}
    with pytest.raises(ValidationError):
        import_csv("a,b\n")


def test_level_graph_is_regular():
    m = machine("grigorchuk")
    g = level_graph(m, ["a", "b", "c", "d"], 5)
    assert len(g.edges) == 8 * 32  # one edge per generator and inverse per vertex


def test_symmetric_order():
    gens = symmetric(machine("basilica"), ["a", "b"])
    assert [g.label for g in gens] == ["a", "b", "a^-1", "b^-1"]
    assert [g.positive for g in gens] == [True, True, False, False]


def test_henon_ball():
    m = machine("henon")
    ball = orbit_ball(m, ["t"], RaySpec.of((), ("0",)), 3)
    assert len(ball.vertices) == 7
    assert sorted(ball.distance) == [0, 1, 1, 2, 2, 3, 3]
    assert len(ball.sphere) == 2
    assert len(ball.network_edges()) == 6


def test_ball_stable_under_caps(monkeypatch):
    m = machine("basilica")
    p = RaySpec.of((), ("1",))
    ref = orbit_ball(m, ["a", "b"], p, 4)
    monkeypatch.setenv("SSLAB_CAPS", "ray_cycles=64")
    again = orbit_ball(m, ["a", "b"], p, 4)
    assert again == ref
    monkeypatch.setenv("SSLAB_CAPS", "orbit=5")
    with pytest.raises(CapExceeded):
        orbit_ball(m, ["a", "b"], p, 4)
    assert caps.get("orbit") == 5


def test_mating_partitions_and_pointwise():
    m = machine("mating_img")
    full = ["a", "b", "c", "bp", "cp"]
    sub = [m.word("a"), m.word("b bp"), m.word("c cp")]
    pairs = [("b", "b bp"), ("bp", "b bp"), ("c", "c cp"), ("cp", "c cp")]
    for n in range(1, 7):
        assert orbit_partition(level_graph(m, full, n)) == orbit_partition(level_graph(m, sub, n))
        for v in m.words(n):
            for small, big in pairs:
                img = apply_word(m, m.word(small), v)
                if img != v:
                    assert img == apply_word(m, m.word(big), v)


def test_cofinal():
    assert cofinal(RaySpec.of(("0",), ("1",)), RaySpec.of((), ("1",)))
    assert not cofinal(RaySpec.of((), ("0", "1")), RaySpec.of((), ("1", "0")))
    assert cofinal(RaySpec.of(("1",), ("0", "1")), RaySpec.of((), ("1", "0")))


def test_basilica_transversal_and_chain():
    m = machine("basilica")
    p = RaySpec.of((), ("1",))
    reps = tail_transversal(m, ["a", "b"], p)
    assert len(reps) == 3
    chain = folner_chain(m, ["a", "b"], p, range(1, 9))
    assert chain.nested()
    assert chain.boundary_sizes == (4, 5, 5, 5, 5, 5, 5, 5)
    assert [f.size for f in chain.sets] == [3 * 2 ** n for n in range(1, 9)]
    sel = select_disjoint(chain)
    assert sel.disjoint_boundaries() and sel.nested()
    assert sel.ns == (1, 3, 5, 7)


def test_constant_tails_bound():
    m = machine("zb_line")
    S = ["a", "b"]
    gens = symmetric(m, S)
    for n in range(2, 9):
        F = cofinality_folner_sets(m, S, RaySpec.of((), ("0",)), n, constant_tails=True)
        assert F.size == 2 ** (n + 1)
        bound = 2 * sum(alpha_n(m, g.word, n) for g in gens)
        assert len(F.boundary) <= bound


def test_constant_tails_needs_tree():
    m = machine("fibonacci")
    with pytest.raises(ValidationError):
        cofinality_folner_sets(m, ["t"], RaySpec.of((), ("a1", "a0")), 2, constant_tails=True)
