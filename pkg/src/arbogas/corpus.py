"""Bundled small-graph corpus: all connected graphs on up to 5 vertices.

One representative per isomorphism class (canonical form = lexicographic
minimum of the sorted edge list over vertex permutations), generated on first
use: 1 + 2 + 6 + 21 = 30 graphs on 2..5 vertices.  These are the graphs on
which the cross-representation identities are checked exactly.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache

from .graphs import WeightedGraph, make_graph


def _components(n, pairs):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j) in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(v) for v in range(n)})


def _canonical(n, pairs):
    best = None
    for perm in itertools.permutations(range(n)):
        mapped = tuple(sorted(tuple(sorted((perm[i], perm[j]))) for (i, j) in pairs))
        if best is None or mapped < best:
            best = mapped
    return best


@lru_cache(maxsize=1)
def connected_graph_shapes(max_vertices: int = 5) -> tuple[tuple[int, tuple], ...]:
    """(n, edge pairs) for each connected graph up to isomorphism."""
    out = []
    for n in range(2, max_vertices + 1):
        all_pairs = list(itertools.combinations(range(n), 2))
        seen = set()
        for bits in itertools.product((0, 1), repeat=len(all_pairs)):
            pairs = [all_pairs[k] for k in range(len(all_pairs)) if bits[k]]
            if _components(n, pairs) != 1:
                continue
            canon = _canonical(n, pairs)
            if canon not in seen:
                seen.add(canon)
                out.append((n, tuple(pairs)))
    return tuple(out)


def corpus_graphs(beta=1) -> list[WeightedGraph]:
    """The corpus with one common edge weight."""
    return [make_graph(n, [(i, j, beta) for (i, j) in pairs])
            for (n, pairs) in connected_graph_shapes()]


def random_rational_weights(n: int, pairs, rng: random.Random,
                            with_h: bool = False) -> WeightedGraph:
    """Corpus graph with random small-rational edge (and optional vertex) weights."""
    edges = [(i, j, Fraction(rng.randint(1, 9), rng.randint(1, 9)))
             for (i, j) in pairs]
    h = None
    if with_h:
        h = tuple(Fraction(rng.randint(0, 3), rng.randint(1, 4)) for _ in range(n))
    return make_graph(n, edges, h)
