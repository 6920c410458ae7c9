"""Tests for src.core.graphs"""

import pytest

from src.core.graphs import (
    builtin_graph,
    cliques,
    is_tree,
    make_graph,
    path_graph,
    petz_order,
    separates,
    separator_triples,
    to_networkx,
)
from src.models import Graph, SeparatorTriple
from src.utils.errors import GraphError


class TestConstruction:
    @pytest.mark.parametrize("name,n,n_edges", [("chain3", 3, 2), ("chain4", 4, 3), ("claw", 4, 3), ("fig1", 4, 4)])
    def test_builtin(self, name, n, n_edges):
        g = builtin_graph(name)
        assert g.n_vertices == n
        assert len(g.edges) == n_edges
        assert g.name == name

    def test_unknown_builtin(self):
        with pytest.raises(GraphError):
            builtin_graph("petersen")

    def test_edges_are_normalised(self):
        g = make_graph(3, [(2, 1), (3, 2)])
        assert g.sorted_edges() == [(1, 2), (2, 3)]

    def test_duplicate_edge(self):
        with pytest.raises(GraphError):
            make_graph(3, [(1, 2), (2, 1)])

    @pytest.mark.parametrize("edges", [[(1, 1)], [(0, 1)], [(1, 4)]])
    def test_bad_edges(self, edges):
        with pytest.raises(GraphError):
            Graph(3, frozenset(edges))

    def test_networkx_view(self, fig1):
        h = to_networkx(fig1)
        assert sorted(h.nodes) == [1, 2, 3, 4]
        assert h.number_of_edges() == 4

    def test_path_graph(self):
        assert path_graph(4).sorted_edges() == builtin_graph("chain4").sorted_edges()


class TestCombinatorics:
    def test_cliques_of_fig1(self, fig1):
        assert cliques(fig1) == [(1, 2, 3), (2, 4)]

    def test_cliques_of_chain(self, chain3):
        assert cliques(chain3) == [(1, 2), (2, 3)]

    def test_is_tree(self, chain3, fig1):
        assert is_tree(chain3)
        assert is_tree(builtin_graph("claw"))
        assert not is_tree(fig1)

    def test_separates(self, chain3, fig1):
        assert separates(chain3, 1, 2, 3)
        assert not separates(chain3, 1, 3, 2)
        assert not separates(fig1, 1, 2, 3)

    def test_separator_triples_chain4(self):
        triples = separator_triples(builtin_graph("chain4"))
        assert triples == [SeparatorTriple(1, 2, 3), SeparatorTriple(1, 2, 4),
                           SeparatorTriple(1, 3, 4), SeparatorTriple(2, 3, 4)]

    def test_separator_triples_claw(self):
        triples = separator_triples(builtin_graph("claw"))
        assert triples == [SeparatorTriple(1, 4, 2), SeparatorTriple(1, 4, 3), SeparatorTriple(2, 4, 3)]

    def test_separator_triples_need_tree(self, fig1):
        with pytest.raises(GraphError):
            separator_triples(fig1)


class TestPetzOrder:
    def test_chain3_is_base_case(self, chain3):
        assert petz_order(chain3) == []

    def test_chain4(self):
        steps = petz_order(builtin_graph("chain4"))
        assert [(s.v1, s.v2) for s in steps] == [(1, 4)]
        assert steps[0].middle == (2, 3)

    def test_claw(self):
        steps = petz_order(builtin_graph("claw"))
        assert [(s.v1, s.v2) for s in steps] == [(1, 2)]

    def test_chain5_recurses(self):
        steps = petz_order(path_graph(5))
        assert [(s.v1, s.v2) for s in steps] == [(1, 5), (2, 5), (1, 4)]

    def test_too_small(self):
        with pytest.raises(GraphError):
            petz_order(path_graph(2))
