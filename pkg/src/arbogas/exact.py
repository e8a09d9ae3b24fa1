"""Brute-force and determinantal exact computations on small graphs.

Everything here is the ground-truth oracle for the other solvers.  The core
is a backtracking enumeration of all acyclic edge subsets: edges are visited
in sorted ``(i, j)`` order and a branch is pruned as soon as adding an edge
would close a cycle (union-find with an undo trail), so the number of leaves
equals the number of forests.

Arithmetic is generic: graphs built with ``fractions.Fraction`` weights flow
through every sum exactly, float weights run fast.  Probabilities weight each
forest by ``prod beta_e`` times, when vertex weights are present, a factor
``(1 + sum_{i in T} h_i)`` per tree ``T`` of the forest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .graphs import WeightedGraph, Weight, percolation_parameter, require_connected

DEFAULT_EDGE_CAP = 30

EdgeMask = int


class CapExceededError(ValueError):
    """Enumeration refused: the graph has more edges than the cap allows."""


def _ratio(a, b):
    """Division that keeps int/Fraction operands exact."""
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return Fraction(a) / Fraction(b)


def _check_cap(g: WeightedGraph, cap: int):
    if g.n_edges > cap:
        raise CapExceededError(
            f"graph has {g.n_edges} edges, enumeration cap is {cap}; "
            f"raise the cap explicitly if you really want 2^{g.n_edges} work")


def _forest_scan(g: WeightedGraph, visit: Callable, cap: int = DEFAULT_EDGE_CAP):
    """Call ``visit(mask, weight, find)`` for every forest of ``g``.

    ``find`` maps a vertex to its component root in the current forest;
    ``weight`` is ``prod beta_e`` over the selected edges in the graph's
    native arithmetic (int seed keeps Fractions exact).
    """
    _check_cap(g, cap)
    n, m = g.n_vertices, g.n_edges
    edges = g.edges
    parent = list(range(n))
    size = [1] * n
    trail: list[int] = []

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(k: int, mask: int, weight):
        if k == m:
            visit(mask, weight, find)
            return
        i, j, beta = edges[k]
        rec(k + 1, mask, weight)
        if beta != 0 and find(i) != find(j):
            ra, rb = find(i), find(j)
            if size[ra] > size[rb]:
                ra, rb = rb, ra
            parent[ra] = rb
            size[rb] += size[ra]
            trail.append(ra)
            rec(k + 1, mask | (1 << k), weight * beta)
            ra = trail.pop()
            size[parent[ra]] -= size[ra]
            parent[ra] = ra

    rec(0, 0, 1)


def enumerate_forests(g: WeightedGraph,
                      cap: int = DEFAULT_EDGE_CAP) -> Iterator[tuple[EdgeMask, Weight]]:
    """Yield every acyclic edge subset once as ``(edge bitmask, prod beta_e)``."""
    _check_cap(g, cap)
    out: list[tuple[int, Weight]] = []
    _forest_scan(g, lambda mask, w, find: out.append((mask, w)), cap)
    return iter(out)


def _tree_factor(g: WeightedGraph, h: Sequence[Weight], find) -> Weight:
    """Per-forest factor ``prod_T (1 + sum_{i in T} h_i)`` over trees T."""
    sums: dict[int, Weight] = {}
    for v in range(g.n_vertices):
        hv = h[v]
        if hv != 0:
            r = find(v)
            sums[r] = sums.get(r, 0) + hv
    factor = 1
    for s in sums.values():
        factor = factor * (1 + s)
    return factor


def _resolve_h(g: WeightedGraph, h) -> tuple[Weight, ...]:
    if h is None:
        return g.vertex_weights
    if isinstance(h, (int, float, Fraction)):
        return (h,) * g.n_vertices
    return tuple(h)


def partition_function(g: WeightedGraph, h=None, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Forest partition function ``sum_F prod beta_e prod_T (1 + sum_T h_i)``.

    With ``h = 0`` this is the plain weighted forest count ``sum_F beta^{|F|}``.
    """
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    total = [0]
    if use_h:
        def visit(mask, w, find):
            total[0] += w * _tree_factor(g, hs, find)
    else:
        def visit(mask, w, find):
            total[0] += w
    _forest_scan(g, visit, cap)
    return total[0]


def connection_matrix(g: WeightedGraph, h=None, cap: int = DEFAULT_EDGE_CAP):
    """Matrix of ``P[i and j in the same tree]``; diagonal is identically 1.

    Returns a nested list in the graph's native arithmetic.
    """
    n = g.n_vertices
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    acc = [[0] * n for _ in range(n)]
    z = [0]

    def visit(mask, w, find):
        if use_h:
            w = w * _tree_factor(g, hs, find)
        z[0] += w
        roots = [find(v) for v in range(n)]
        for i in range(n):
            ri = roots[i]
            for j in range(i + 1, n):
                if ri == roots[j]:
                    acc[i][j] += w

    _forest_scan(g, visit, cap)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = 1
        for j in range(i + 1, n):
            p = _ratio(acc[i][j], z[0])
            out[i][j] = p
            out[j][i] = p
    return out


def _edge_index_set(g: WeightedGraph, S) -> int:
    """Normalize an iterable of edge indices or (i, j) pairs to a bitmask."""
    pair_to_idx = {(i, j): k for k, (i, j, _) in enumerate(g.edges)}
    mask = 0
    for e in S:
        if isinstance(e, tuple):
            key = (min(e), max(e))
            if key not in pair_to_idx:
                raise ValueError(f"no edge {key} in graph")
            mask |= 1 << pair_to_idx[key]
        else:
            if not (0 <= e < g.n_edges):
                raise ValueError(f"edge index {e} out of range")
            mask |= 1 << e
    return mask


def edge_marginal(g: WeightedGraph, S, h=None, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Probability that every edge of ``S`` is in the forest (``S = {}`` gives 1)."""
    smask = _edge_index_set(g, S)
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    num, z = [0], [0]

    def visit(mask, w, find):
        if use_h:
            w = w * _tree_factor(g, hs, find)
        z[0] += w
        if mask & smask == smask:
            num[0] += w

    _forest_scan(g, visit, cap)
    return _ratio(num[0], z[0])


def expected_tree_size(g: WeightedGraph, v: int = 0, h=None,
                       cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Mean number of vertices in the tree containing ``v``."""
    n = g.n_vertices
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    num, z = [0], [0]

    def visit(mask, w, find):
        if use_h:
            w = w * _tree_factor(g, hs, find)
        z[0] += w
        rv = find(v)
        t = sum(1 for u in range(n) if find(u) == rv)
        num[0] += w * t

    _forest_scan(g, visit, cap)
    return _ratio(num[0], z[0])


def z0_expectation(g: WeightedGraph, h, v: int = 0, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Expectation of ``S0 / (1 + S0)`` with ``S0 = sum of h over the tree of v``.

    The expectation uses the h-weighted forest measure (per-tree factors
    ``1 + sum h``), so with uniform ``h`` this is ``E[h|T_v| / (1 + h|T_v|)]``.
    """
    n = g.n_vertices
    hs = _resolve_h(g, h)
    if all(hv == 0 for hv in hs):
        return 0
    num, z = [0], [0]

    def visit(mask, w, find):
        w = w * _tree_factor(g, hs, find)
        z[0] += w
        rv = find(v)
        s0 = sum(hs[u] for u in range(n) if find(u) == rv)
        num[0] += _ratio(w * s0, 1 + s0)

    _forest_scan(g, visit, cap)
    return _ratio(num[0], z[0])


def na_deficit(g: WeightedGraph, e1, e2, h=None, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Pair-occupancy deficit ``P[e1, e2] - P[e1] P[e2]`` for distinct edges.

    Negative association would make this nonpositive for every graph; it is a
    conjecture for forests, so callers should report rather than assert.
    """
    m1 = _edge_index_set(g, [e1])
    m2 = _edge_index_set(g, [e2])
    if m1 == m2:
        raise ValueError("na_deficit needs two distinct edges")
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    both, p1, p2, z = [0], [0], [0], [0]

    def visit(mask, w, find):
        if use_h:
            w = w * _tree_factor(g, hs, find)
        z[0] += w
        if mask & m1:
            p1[0] += w
        if mask & m2:
            p2[0] += w
        if (mask & m1) and (mask & m2):
            both[0] += w

    _forest_scan(g, visit, cap)
    return _ratio(both[0], z[0]) - _ratio(p1[0], z[0]) * _ratio(p2[0], z[0])


def na_deficit_matrix(g: WeightedGraph, cap: int = DEFAULT_EDGE_CAP) -> dict:
    """All pairwise deficits ``P[e,f] - P[e]P[f]`` from a single enumeration.

    Returns ``{(e, f): deficit}`` over edge-index pairs ``e < f``.
    """
    m = g.n_edges
    z = [0]
    singles = [0] * m
    joints: dict[tuple[int, int], Weight] = {}

    def visit(mask, w, find):
        z[0] += w
        bits = []
        mm = mask
        while mm:
            low = mm & -mm
            bits.append(low.bit_length() - 1)
            mm ^= low
        for a, e in enumerate(bits):
            singles[e] += w
            for f in bits[a + 1:]:
                key = (e, f)
                joints[key] = joints.get(key, 0) + w

    _forest_scan(g, visit, cap)
    out = {}
    for e in range(m):
        for f in range(e + 1, m):
            pe = _ratio(singles[e], z[0])
            pf = _ratio(singles[f], z[0])
            pef = _ratio(joints.get((e, f), 0), z[0])
            out[(e, f)] = pef - pe * pf
    return out


def ust_deficit_matrix(g: WeightedGraph, cap: int = DEFAULT_EDGE_CAP) -> dict:
    """All spanning-tree pair deficits from one enumeration; each is <= 0."""
    require_connected(g, "ust_deficit_matrix")
    n, m = g.n_vertices, g.n_edges
    z = [0]
    singles = [0] * m
    joints: dict[tuple[int, int], Weight] = {}

    def visit(mask, w, find):
        if mask.bit_count() != n - 1:
            return
        z[0] += w
        bits = []
        mm = mask
        while mm:
            low = mm & -mm
            bits.append(low.bit_length() - 1)
            mm ^= low
        for a, e in enumerate(bits):
            singles[e] += w
            for f in bits[a + 1:]:
                key = (e, f)
                joints[key] = joints.get(key, 0) + w

    _forest_scan(g, visit, cap)
    out = {}
    for e in range(m):
        for f in range(e + 1, m):
            pe = _ratio(singles[e], z[0])
            pf = _ratio(singles[f], z[0])
            pef = _ratio(joints.get((e, f), 0), z[0])
            out[(e, f)] = pef - pe * pf
    return out


@dataclass(frozen=True)
class DominationReport:
    """Forest-vs-percolation comparison; all entries nonpositive iff dominated."""

    edge_violations: tuple            # P_forest[e in F] - p_beta(e), per edge
    tail_violations: tuple            # P_forest[|F| >= k] - P_perc[|F| >= k], per k

    @property
    def max_violation(self):
        worst = max(self.edge_violations)
        if self.tail_violations:
            worst = max(worst, max(self.tail_violations))
        return worst


def domination_check(g: WeightedGraph, cap: int = DEFAULT_EDGE_CAP) -> DominationReport:
    """Compare the forest measure against independent ``beta/(1+beta)`` bonds.

    Checks every edge marginal and the full edge-count tail distribution;
    stochastic domination makes every reported violation nonpositive.
    """
    m = g.n_edges
    z = [0]
    edge_acc = [0] * m
    count_acc = [0] * (m + 1)

    def visit(mask, w, find):
        z[0] += w
        k = mask.bit_count()
        count_acc[k] += w
        while mask:
            low = mask & -mask
            edge_acc[low.bit_length() - 1] += w
            mask ^= low

    _forest_scan(g, visit, cap)

    edge_viol = tuple(_ratio(edge_acc[k], z[0]) - percolation_parameter(g.beta(k))
                      for k in range(m))

    # Poisson-binomial edge-count distribution of independent bonds.
    perc = [1]
    for k in range(m):
        p = percolation_parameter(g.beta(k))
        nxt = [0] * (len(perc) + 1)
        for c, w in enumerate(perc):
            nxt[c] += w * (1 - p)
            nxt[c + 1] += w * p
        perc = nxt
    forest = [_ratio(c, z[0]) for c in count_acc]

    tails = []
    ft = sum(forest)
    pt = sum(perc)
    for k in range(m + 1):
        tails.append(ft - pt)
        ft -= forest[k]
        pt -= perc[k]
    return DominationReport(edge_viol, tuple(tails))


# --- determinant identities --------------------------------------------------

def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    """Fraction-exact determinant by fraction-free Gaussian elimination."""
    a = [row[:] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = Fraction(1, 1) / a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] * inv
                for cc in range(c, n):
                    a[r][cc] -= f * a[c][cc]
    return det


def _laplacian_rows(g: WeightedGraph, h, drop: int | None = None,
                    vertex_factors=None) -> list[list]:
    """Rows of ``L_beta + diag(h)`` in native arithmetic, optionally with one
    vertex removed and with per-vertex weight multipliers on the edges."""
    n = g.n_vertices
    idx = [v for v in range(n) if v != drop]
    pos = {v: k for k, v in enumerate(idx)}
    rows = [[0] * len(idx) for _ in idx]
    for (i, j, beta) in g.edges:
        w = beta
        if vertex_factors is not None:
            w = w * vertex_factors[i] * vertex_factors[j]
        if i in pos and j in pos:
            rows[pos[i]][pos[j]] -= w
            rows[pos[j]][pos[i]] -= w
        if i in pos:
            rows[pos[i]][pos[i]] += w
        if j in pos:
            rows[pos[j]][pos[j]] += w
    if h is not None:
        for v in idx:
            rows[pos[v]][pos[v]] += h[v]
    return rows


def rooted_forest_determinant(g: WeightedGraph, h=None) -> Weight:
    """``det(L_beta + diag(h))``: the weighted sum over rooted spanning forests.

    Each forest contributes ``prod beta_e`` times ``h_root`` for every tree.
    Exact when the weights are rational; float otherwise.
    """
    hs = _resolve_h(g, h)
    rows = _laplacian_rows(g, hs)
    if all(isinstance(x, (int, Fraction)) for row in rows for x in row):
        return _exact_det([[Fraction(x) for x in row] for row in rows])
    return float(np.linalg.det(np.array(rows, dtype=float)))


def rooted_forest_sum(g: WeightedGraph, h=None, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Brute-force oracle for ``rooted_forest_determinant``."""
    n = g.n_vertices
    hs = _resolve_h(g, h)
    total = [0]

    def visit(mask, w, find):
        sums: dict[int, Weight] = {}
        for v in range(n):
            r = find(v)
            sums[r] = sums.get(r, 0) + hs[v]
        f = w
        for s in sums.values():
            f = f * s
        total[0] += f

    _forest_scan(g, visit, cap)
    return total[0]


def spanning_tree_sum(g: WeightedGraph, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Weighted spanning-tree count ``sum_T prod beta_e`` by enumeration."""
    n = g.n_vertices
    total = [0]

    def visit(mask, w, find):
        if mask.bit_count() == n - 1:
            total[0] += w

    _forest_scan(g, visit, cap)
    return total[0]


def ust_edge_probability(g: WeightedGraph, e) -> float:
    """Spanning-tree edge marginal ``beta_e * R_eff(i, j)`` via the reduced Laplacian."""
    require_connected(g, "ust_edge_probability")
    emask = _edge_index_set(g, [e])
    k = emask.bit_length() - 1
    i, j, beta = g.edges[k]
    rows = _laplacian_rows(g, None, drop=0)
    K = np.array([[float(x) for x in row] for row in rows])
    n1 = g.n_vertices - 1
    chi = np.zeros(n1)
    if i != 0:
        chi[i - 1] = 1.0
    if j != 0:
        chi[j - 1] -= 1.0
    x = np.linalg.solve(K, chi)
    return float(beta) * float(chi @ x)


def ust_pair_probability(g: WeightedGraph, e1, e2, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """P[both edges in the spanning tree], exact via tree enumeration."""
    require_connected(g, "ust_pair_probability")
    n = g.n_vertices
    m1 = _edge_index_set(g, [e1])
    m2 = _edge_index_set(g, [e2])
    num, z = [0], [0]

    def visit(mask, w, find):
        if mask.bit_count() != n - 1:
            return
        z[0] += w
        if (mask & m1) and (mask & m2):
            num[0] += w

    _forest_scan(g, visit, cap)
    return _ratio(num[0], z[0])


def ust_na_deficit(g: WeightedGraph, e1, e2, cap: int = DEFAULT_EDGE_CAP) -> Weight:
    """Spanning-tree pair deficit ``P[e1,e2] - P[e1]P[e2]``, exact, always <= 0."""
    require_connected(g, "ust_na_deficit")
    n = g.n_vertices
    m1 = _edge_index_set(g, [e1])
    m2 = _edge_index_set(g, [e2])
    if m1 == m2:
        raise ValueError("ust_na_deficit needs two distinct edges")
    both, p1, p2, z = [0], [0], [0], [0]

    def visit(mask, w, find):
        if mask.bit_count() != n - 1:
            return
        z[0] += w
        if mask & m1:
            p1[0] += w
        if mask & m2:
            p2[0] += w
        if (mask & m1) and (mask & m2):
            both[0] += w

    _forest_scan(g, visit, cap)
    return _ratio(both[0], z[0]) - _ratio(p1[0], z[0]) * _ratio(p2[0], z[0])


# --- aggregated profiles ------------------------------------------------------
#
# For graphs with one common edge weight, a single enumeration pass collecting
# integer histograms answers every (beta, h) query afterwards: the weight of a
# forest with k edges is beta^k, and the vertex-weight factor depends only on
# the multiset of tree sizes.

@dataclass(frozen=True)
class UniformProfile:
    """Integer census of all forests of a uniformly weighted graph."""

    n_vertices: int
    edge_count_hist: tuple[int, ...]            # [k] -> number of forests with k edges
    conn_hist: tuple[tuple[int, ...], ...]      # [j][k] -> forests with origin ~ j
    origin_tree_hist: tuple[tuple[int, int, int], ...]   # (|T_origin|, k, count)
    tree_size_census: tuple[tuple[tuple[int, ...], int, int], ...]
    # (sorted tree sizes, |T_origin|, count); sizes list all components incl. singletons


@lru_cache(maxsize=32)
def uniform_profile(g: WeightedGraph, origin: int = 0,
                    cap: int = DEFAULT_EDGE_CAP) -> UniformProfile:
    betas = {beta for (_, _, beta) in g.edges}
    if len(betas) != 1:
        raise ValueError("uniform_profile needs a single common edge weight")
    n, m = g.n_vertices, g.n_edges
    hist = [0] * (m + 1)
    conn = [[0] * (m + 1) for _ in range(n)]
    t0_hist: dict[tuple[int, int], int] = {}
    census: dict[tuple[tuple[int, ...], int], int] = {}

    def visit(mask, w, find):
        k = mask.bit_count()
        hist[k] += 1
        r0 = find(origin)
        sizes: dict[int, int] = {}
        for v in range(n):
            r = find(v)
            sizes[r] = sizes.get(r, 0) + 1
            if r == r0:
                conn[v][k] += 1
        s0 = sizes[r0]
        t0_hist[(s0, k)] = t0_hist.get((s0, k), 0) + 1
        key = (tuple(sorted(sizes.values())), s0)
        census[key] = census.get(key, 0) + 1

    _forest_scan(g, visit, cap)
    return UniformProfile(
        n_vertices=n,
        edge_count_hist=tuple(hist),
        conn_hist=tuple(tuple(row) for row in conn),
        origin_tree_hist=tuple((s, k, c) for (s, k), c in sorted(t0_hist.items())),
        tree_size_census=tuple((sz, s0, c) for (sz, s0), c in sorted(census.items())),
    )


def profile_partition(profile: UniformProfile, beta: Weight) -> Weight:
    return sum(c * beta**k for k, c in enumerate(profile.edge_count_hist))


def profile_connection(profile: UniformProfile, beta: Weight, j: int) -> Weight:
    z = profile_partition(profile, beta)
    num = sum(c * beta**k for k, c in enumerate(profile.conn_hist[j]))
    return _ratio(num, z)


def profile_tree_size_mean(profile: UniformProfile, beta: Weight) -> Weight:
    z = profile_partition(profile, beta)
    num = sum(s * c * beta**k for (s, k, c) in profile.origin_tree_hist)
    return _ratio(num, z)


def profile_partition_h(profile: UniformProfile, beta: Weight, h: Weight) -> Weight:
    """Partition function with a uniform vertex weight ``h`` from the census."""
    total = 0
    for sizes, _s0, count in profile.tree_size_census:
        k = profile.n_vertices - len(sizes)
        f = beta**k
        for s in sizes:
            f = f * (1 + h * s)
        total += count * f
    return total


def profile_z0_expectation(profile: UniformProfile, beta: Weight, h: Weight) -> Weight:
    """Census version of :func:`z0_expectation` for uniform ``beta`` and ``h``."""
    if h == 0:
        return 0
    num = 0
    z = 0
    for sizes, s0, count in profile.tree_size_census:
        k = profile.n_vertices - len(sizes)
        f = count * beta**k
        for s in sizes:
            f = f * (1 + h * s)
        z += f
        num += _ratio(f * (h * s0), 1 + h * s0)
    return _ratio(num, z)


# --- summary / export --------------------------------------------------------

@dataclass(frozen=True)
class ExactSummary:
    """Bundle of exact observables for one graph."""

    partition: Weight
    connection: tuple        # n x n, P[i ~ j]
    edge_marginals: tuple    # per edge, P[e in F]
    tree_size_mean: tuple    # per vertex, E|T_v|

    def to_json(self) -> str:
        return json.dumps({
            "partition": float(self.partition),
            "connection": [[float(x) for x in row] for row in self.connection],
            "edge_marginals": [float(x) for x in self.edge_marginals],
            "tree_size_mean": [float(x) for x in self.tree_size_mean],
        }, indent=1)


def exact_summary(g: WeightedGraph, h=None, cap: int = DEFAULT_EDGE_CAP) -> ExactSummary:
    """One enumeration pass collecting partition, connections, marginals and E|T_v|."""
    n, m = g.n_vertices, g.n_edges
    hs = _resolve_h(g, h)
    use_h = any(hv != 0 for hv in hs)
    z = [0]
    conn = [[0] * n for _ in range(n)]
    edge_acc = [0] * m
    tsize = [0] * n

    def visit(mask, w, find):
        if use_h:
            w = w * _tree_factor(g, hs, find)
        z[0] += w
        roots = [find(v) for v in range(n)]
        counts: dict[int, int] = {}
        for r in roots:
            counts[r] = counts.get(r, 0) + 1
        for i in range(n):
            tsize[i] += w * counts[roots[i]]
            for j in range(i + 1, n):
                if roots[i] == roots[j]:
                    conn[i][j] += w
        mm = mask
        while mm:
            low = mm & -mm
            edge_acc[low.bit_length() - 1] += w
            mm ^= low

    _forest_scan(g, visit, cap)
    zz = z[0]
    cm = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            cm[i][j] = cm[j][i] = _ratio(conn[i][j], zz)
    return ExactSummary(
        partition=zz,
        connection=tuple(tuple(row) for row in cm),
        edge_marginals=tuple(_ratio(a, zz) for a in edge_acc),
        tree_size_mean=tuple(_ratio(t, zz) for t in tsize),
    )


def matrix_to_csv(matrix, path):
    """Write a matrix as ``row,col,value`` lines."""
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for i, row in enumerate(matrix):
            for j, x in enumerate(row):
                fh.write(f"{i},{j},{float(x)!r}\n")
