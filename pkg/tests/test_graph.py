import random

import pytest
from hypothesis import given, settings, strategies as st

from causalbfs import CausalGraph, EdgeResult, UnknownNodeError

from conftest import random_dag


def test_add_edge_checked_added():
    g = CausalGraph(["A", "B", "C"])
    assert g.add_edge_checked("A", "B") is EdgeResult.ADDED
    assert g.has_edge("A", "B")


def test_add_edge_checked_rejects_cycle():
    g = CausalGraph(["A", "B", "C"])
    g.add_edge_checked("A", "B")
    g.add_edge_checked("B", "C")
    assert g.add_edge_checked("C", "A") is EdgeResult.REJECTED_CYCLE
    assert not g.has_edge("C", "A")
    assert g.is_dag()


def test_add_edge_checked_rejects_duplicate():
    g = CausalGraph(["A", "B"])
    g.add_edge_checked("A", "B")
    assert g.add_edge_checked("A", "B") is EdgeResult.REJECTED_DUPLICATE
    assert g.edges == (("A", "B"),)


def test_add_edge_unknown_endpoint_names_the_culprit():
    g = CausalGraph(["A", "B"])
    with pytest.raises(UnknownNodeError) as exc:
        g.add_edge_checked("A", "Z")
    assert "Z" in str(exc.value)


def test_add_edge_rejects_self_loop():
    g = CausalGraph(["A"])
    with pytest.raises(ValueError):
        g.add_edge("A", "A")


def test_creates_cycle_empty_graph():
    g = CausalGraph(["A", "B"])
    assert g.creates_cycle("A", "B") is False


def test_creates_cycle_via_reachability():
    g = CausalGraph(["A", "B", "C"])
    g.add_edge("B", "C")
    g.add_edge("C", "A")
    assert g.creates_cycle("A", "B") is True


def test_creates_cycle_self_loop():
    g = CausalGraph(["A", "B"])
    assert g.creates_cycle("A", "A") is True


def test_creates_cycle_unknown_name():
    g = CausalGraph(["A", "B"])
    with pytest.raises(UnknownNodeError):
        g.creates_cycle("A", "mystery")


def test_creates_cycle_does_not_mutate():
    g = CausalGraph(["A", "B", "C"])
    g.add_edge("A", "B")
    before = (g.nodes, g.edges)
    g.creates_cycle("B", "C")
    g.creates_cycle("B", "A")
    assert (g.nodes, g.edges) == before


def test_is_dag_cases():
    g = CausalGraph(["A", "B", "C"])
    assert g.is_dag()
    g.add_edge("A", "B")
    g.add_edge("A", "C")
    g.add_edge("B", "C")
    assert g.is_dag()
    cyclic = CausalGraph(["A", "B"])
    cyclic.add_edge("A", "B")
    cyclic.add_edge("B", "A")
    assert not cyclic.is_dag()


def test_roots_in_node_order():
    g = CausalGraph(["C", "A", "B"])
    g.add_edge("C", "B")
    assert g.roots() == ("C", "A")


def _closure(n, index, edges):
    """Floyd-Warshall reachability, an oracle independent of the DFS path."""
    reach = [[False] * n for _ in range(n)]
    for u, v in edges:
        reach[index[u]][index[v]] = True
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if reach[i][k] and reach[k][j]:
                    reach[i][j] = True
    return reach


@pytest.mark.parametrize("seed", range(25))
def test_creates_cycle_matches_transitive_closure(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 12)
    g = random_dag(rng, n)
    index = {name: i for i, name in enumerate(g.nodes)}
    reach = _closure(n, index, g.edges)
    for u in g.nodes:
        for v in g.nodes:
            expected = u == v or reach[index[v]][index[u]]
            assert g.creates_cycle(u, v) == expected


@pytest.mark.parametrize("seed", range(25))
def test_creates_cycle_iff_insertion_breaks_dag(seed):
    rng = random.Random(seed)
    g = random_dag(rng, rng.randint(2, 10))
    for u in g.nodes:
        for v in g.nodes:
            if g.has_edge(u, v):
                continue
            probe = g.copy()
            if u != v:
                probe.add_edge(u, v)
                assert g.creates_cycle(u, v) == (not probe.is_dag())
            else:
                assert g.creates_cycle(u, v)


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_random_checked_streams_stay_acyclic(seed):
    rng = random.Random(seed)
    names = [f"N{i}" for i in range(rng.randint(1, 10))]
    g = CausalGraph(names)
    for _ in range(40):
        u, v = rng.choice(names), rng.choice(names)
        if u != v:
            g.add_edge_checked(u, v)
    assert g.is_dag()
    assert all(u != v for u, v in g.edges)


def test_edge_list_round_trip():
    g = CausalGraph(["x", "y", "z"])
    g.add_edge("x", "y")
    g.add_edge("y", "z")
    text = g.to_edge_list()
    assert text == "x,y\ny,z\n"
    again = CausalGraph.from_edge_list(text, ["x", "y", "z"])
    assert again == g
    assert again.edges == g.edges


def test_from_edge_list_rejects_garbage():
    with pytest.raises(ValueError, match="line 1"):
        CausalGraph.from_edge_list("x;y\n", ["x", "y"])
    with pytest.raises(ValueError):
        CausalGraph.from_edge_list("x,x\n", ["x", "y"])
    with pytest.raises(UnknownNodeError):
        CausalGraph.from_edge_list("x,q\n", ["x", "y"])


def test_dot_output():
    g = CausalGraph(["a b", "c", "lonely"])
    g.add_edge("a b", "c")
    dot = g.to_dot()
    assert dot.startswith("digraph {")
    assert '"a b" -> "c";' in dot
    assert '"lonely";' in dot
    assert dot.rstrip().endswith("}")
