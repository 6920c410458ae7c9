"""
Graph ingestion and combinatorics: cliques, tree checks, separator triples and
the leaf-pair order of the Petz recursion.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from src.models import Graph, PetzStep, SeparatorTriple
from src.utils.constants import BUILTIN_GRAPHS, MAX_GRAPH_VERTICES
from src.utils.errors import GraphError

logger = logging.getLogger(__name__)


def make_graph(n_vertices: int, edges: Iterable[Tuple[int, int]], name: Optional[str] = None) -> Graph:
    edges = list(edges)
    seen = set()
    for u, v in edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
    return Graph(n_vertices, frozenset(edges), name)


def builtin_graph(name: str) -> Graph:
    """chain3, chain4, claw (centre 4) or fig1 (edges 12, 13, 23, 24)"""
    if name not in BUILTIN_GRAPHS:
        raise GraphError(f"unknown built-in graph {name!r}; choose from {sorted(BUILTIN_GRAPHS)}")
    n, edges = BUILTIN_GRAPHS[name]
    return make_graph(n, edges, name)


def path_graph(n: int) -> Graph:
    return make_graph(n, [(i, i + 1) for i in range(1, n)], f"chain{n}")


def to_networkx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from(g.sorted_edges())
    return h


def is_tree(g: Graph) -> bool:
    return nx.is_tree(to_networkx(g))


def _require_tree(g: Graph, min_vertices: int = 1) -> nx.Graph:
    h = to_networkx(g)
    if not nx.is_tree(h):
        raise GraphError("graph is not a tree", n_vertices=g.n_vertices, edges=g.sorted_edges())
    if g.n_vertices < min_vertices:
        raise GraphError(f"tree needs at least {min_vertices} vertices, has {g.n_vertices}")
    return h


def cliques(g: Graph) -> List[Tuple[int, ...]]:
    """All maximal cliques, each sorted, in lexicographic order"""
    if g.n_vertices > MAX_GRAPH_VERTICES:
        raise GraphError(f"clique enumeration supports at most {MAX_GRAPH_VERTICES} vertices")
    found = [tuple(sorted(c)) for c in nx.find_cliques(to_networkx(g))]
    return sorted(found)


def separates(g: Graph, i: int, j: int, k: int) -> bool:
    """True when every path from i to k passes through j"""
    if j in (i, k):
        return False
    h = to_networkx(g)
    h.remove_node(j)
    return not nx.has_path(h, i, k)


def separator_triples(g: Graph) -> List[SeparatorTriple]:
    """
    Triples (i, j, k), i < k, with the single vertex j separating i from k.

    Sorted by (i, k, j).
    """
    h = _require_tree(g)
    triples = []
    for i in g.vertices:
        for k in g.vertices:
            if k <= i:
                continue
            path = nx.shortest_path(h, i, k)
            for j in path[1:-1]:
                triples.append(SeparatorTriple(i, j, k))
    triples.sort(key=lambda t: (t.i, t.k, t.j))
    for t in triples:
        if not separates(g, t.i, t.j, t.k):
            raise GraphError(f"internal error: {t} failed the reachability check")
    return triples


def leaves(h: nx.Graph, vertices: Sequence[int]) -> List[int]:
    sub = h.subgraph(vertices)
    return sorted(v for v in sub.nodes if sub.degree(v) == 1)


def leaf_pair(h: nx.Graph, vertices: Sequence[int]) -> Tuple[int, int]:
    """The two smallest leaves of the subtree on ``vertices``"""
    found = leaves(h, vertices)
    if len(found) < 2:
        raise GraphError(f"subtree on {sorted(vertices)} has fewer than two leaves")
    return found[0], found[1]


def petz_order(g: Graph) -> List[PetzStep]:
    """
    Leaf-pair reduction steps of the Petz recursion.

    Each step removes the two smallest leaves v1, v2 of the current subtree and
    recurses into the subtrees without v1 and without v2 (depth first, v1 side
    first). Subtrees on three vertices are the 3-chain base case.
    """
    h = _require_tree(g, min_vertices=3)
    steps: List[PetzStep] = []

    def expand(vertices: Tuple[int, ...]) -> None:
        if len(vertices) <= 3:
            return
        v1, v2 = leaf_pair(h, vertices)
        steps.append(PetzStep(v1, v2, vertices))
        expand(tuple(v for v in vertices if v != v1))
        expand(tuple(v for v in vertices if v != v2))

    expand(tuple(g.vertices))
    logger.debug("Petz order for %s: %s", g.name or g.sorted_edges(), [(s.v1, s.v2) for s in steps])
    return steps


def chain_middle(h: nx.Graph, vertices: Sequence[int]) -> int:
    """Centre vertex of a 3-vertex subtree"""
    sub = h.subgraph(vertices)
    centre = [v for v in sub.nodes if sub.degree(v) == 2]
    if len(centre) != 1:
        raise GraphError(f"vertices {sorted(vertices)} do not form a 3-chain")
    return centre[0]
