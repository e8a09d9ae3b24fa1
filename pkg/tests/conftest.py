"""Shared fixtures: the small-graph corpus and independent brute-force oracles.

The oracles here deliberately avoid the package's backtracking enumerator:
they iterate all 2^m edge subsets and test acyclicity with a fresh union-find,
so they can catch bugs in the pruned enumeration.
"""

from __future__ import annotations

import itertools
import random

import pytest

from arbogas.corpus import (connected_graph_shapes, corpus_graphs,
                            random_rational_weights)
from arbogas.graphs import WeightedGraph


# --- independent subset oracle ------------------------------------------------

def subset_is_forest(n, pairs):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j) in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def components_of(n, pairs):
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
    comps: dict[int, list[int]] = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def oracle_forests(g: WeightedGraph):
    """All forests of g as (set of edge indices, weight), by full 2^m iteration."""
    m = g.n_edges
    out = []
    for bits in itertools.product((0, 1), repeat=m):
        chosen = [k for k in range(m) if bits[k]]
        pairs = [(g.edges[k][0], g.edges[k][1]) for k in chosen]
        if not subset_is_forest(g.n_vertices, pairs):
            continue
        w = 1
        for k in chosen:
            w = w * g.edges[k][2]
        out.append((frozenset(chosen), w))
    return out


def oracle_partition(g: WeightedGraph, h=None):
    if h is None:
        h = g.vertex_weights
    total = 0
    for chosen, w in oracle_forests(g):
        pairs = [(g.edges[k][0], g.edges[k][1]) for k in chosen]
        f = w
        for comp in components_of(g.n_vertices, pairs):
            s = sum(h[v] for v in comp)
            f = f * (1 + s)
        total += f
    return total


# --- corpus: the package's bundled connected <= 5 vertex graphs ----------------
#
# The corpus supplies *inputs* only; expected values in tests come from the
# oracles above or from frozen literals, so sharing it with the package does
# not weaken any check.

corpus_edge_sets = connected_graph_shapes
corpus_graphs = corpus_graphs


def random_rational_graph(n, pairs, rng: random.Random, with_h=False):
    return random_rational_weights(n, pairs, rng, with_h)


@pytest.fixture(scope="session")
def corpus():
    return connected_graph_shapes()
