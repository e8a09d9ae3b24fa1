"""Weighted graphs, Laplacians and torus Fourier data shared by all solvers.

Vertices are dense integers ``0..n-1``; vertex 0 is the default pin/origin.
Graphs are immutable after construction and safe to share across threads.
Edge and vertex weights are kept in whatever numeric type they were given
(``float``, ``int`` or ``fractions.Fraction``), so exact-arithmetic callers
can build graphs with rational weights and float callers pay no conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

Weight = float | int | Fraction


def make_graph(n: int, edges, h=None) -> "WeightedGraph":
    """Normalize ``(i, j, beta)`` triples (orient i < j, sort) into a graph."""
    norm = tuple(sorted((min(i, j), max(i, j), b) for (i, j, b) in edges))
    if h is None:
        hs = (0,) * n
    elif isinstance(h, (int, float, Fraction)):
        hs = (h,) * n
    else:
        hs = tuple(h)
    return WeightedGraph(n, norm, hs)


@dataclass(frozen=True)
class TorusMeta:
    """Side length and dimension of a periodic hypercubic lattice."""

    side: int
    dim: int


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with edge weights ``beta >= 0`` and vertex weights ``h >= 0``.

    ``edges`` holds ``(i, j, beta)`` with ``i < j`` and at most one edge per
    vertex pair.  Parallel edges arising from small tori are merged into a
    single edge with summed weight; ``edge_multiplicity`` records how many
    parallel copies were merged (a merged pair can never be simultaneously
    occupied by a forest, so the summed weight is exact).
    """

    n_vertices: int
    edges: tuple[tuple[int, int, Weight], ...]
    vertex_weights: tuple[Weight, ...]
    edge_multiplicity: tuple[int, ...] = ()
    torus: TorusMeta | None = None

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if len(self.vertex_weights) != self.n_vertices:
            raise ValueError("vertex_weights length must equal n_vertices")
        if not self.edge_multiplicity:
            object.__setattr__(self, "edge_multiplicity", (1,) * len(self.edges))
        if len(self.edge_multiplicity) != len(self.edges):
            raise ValueError("edge_multiplicity length must equal edge count")
        seen = set()
        prev = (-1, -1)
        for (i, j, beta) in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i},{j}) out of range")
            if i > j:
                raise ValueError(f"edge ({i},{j}) not stored with i < j")
            if (i, j) <= prev:
                raise ValueError("edges must be sorted lexicographically")
            prev = (i, j)
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            if beta < 0:
                raise ValueError(f"negative edge weight on ({i},{j})")
        for v, h in enumerate(self.vertex_weights):
            if h < 0:
                raise ValueError(f"negative vertex weight at {v}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def beta(self, k: int) -> Weight:
        return self.edges[k][2]

    def neighbors(self, v: int) -> list[tuple[int, Weight]]:
        out = []
        for (i, j, beta) in self.edges:
            if i == v:
                out.append((j, beta))
            elif j == v:
                out.append((i, beta))
        return out

    def with_vertex_weights(self, h: Sequence[Weight] | Weight) -> "WeightedGraph":
        """Copy of this graph with vertex weights replaced (scalar = uniform)."""
        if isinstance(h, (int, float, Fraction)):
            hs = (h,) * self.n_vertices
        else:
            hs = tuple(h)
        return WeightedGraph(self.n_vertices, self.edges, hs,
                             self.edge_multiplicity, self.torus)


@dataclass(frozen=True)
class FourierMode:
    """Momentum vector with components ``2*pi*k/L`` in ``[0, 2*pi)``."""

    p: tuple[float, ...]

    def __post_init__(self):
        for c in self.p:
            if not (0.0 <= c < 2.0 * math.pi):
                raise ValueError("momentum components must lie in [0, 2*pi)")


def build_complete(N: int, alpha: Weight) -> WeightedGraph:
    """Complete graph K_N with every edge weight ``alpha/N`` and ``h = 0``.

    ``alpha`` may be a Fraction, in which case the weights stay rational.
    """
    if N < 2:
        raise ValueError("complete graph needs N >= 2")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    beta = Fraction(alpha, N) if isinstance(alpha, (int, Fraction)) else alpha / N
    edges = tuple((i, j, beta) for i in range(N) for j in range(i + 1, N))
    return WeightedGraph(N, edges, (0,) * N)


def build_torus(L: int, d: int, beta: Weight) -> WeightedGraph:
    """Periodic hypercubic lattice with ``L**d`` vertices and constant weights.

    Vertex ids are lexicographic with axis 0 fastest.  For ``L == 2`` the two
    parallel wrap edges per axis collapse to one edge with doubled weight.
    """
    if L < 2:
        raise ValueError("torus needs side length L >= 2")
    if d not in (1, 2, 3):
        raise ValueError("torus dimension must be 1, 2 or 3")
    if beta <= 0:
        raise ValueError("beta must be positive")
    n = L**d
    strides = [L**a for a in range(d)]

    def coords(v):
        return tuple((v // strides[a]) % L for a in range(d))

    def vid(c):
        return sum((c[a] % L) * strides[a] for a in range(d))

    acc: dict[tuple[int, int], list] = {}
    for v in range(n):
        c = coords(v)
        for a in range(d):
            c2 = list(c)
            c2[a] = (c[a] + 1) % L
            w = vid(tuple(c2))
            key = (min(v, w), max(v, w))
            if key in acc:
                acc[key][0] += beta
                acc[key][1] += 1
            else:
                acc[key] = [beta, 1]
    keys = sorted(acc)
    edges = tuple((i, j, acc[(i, j)][0]) for (i, j) in keys)
    mult = tuple(acc[k][1] for k in keys)
    return WeightedGraph(n, edges, (0,) * n, mult, TorusMeta(L, d))


def torus_coords(g: WeightedGraph, v: int) -> tuple[int, ...]:
    """Lattice coordinates of vertex ``v`` on a torus graph."""
    if g.torus is None:
        raise ValueError("graph carries no torus metadata")
    L, d = g.torus.side, g.torus.dim
    return tuple((v // L**a) % L for a in range(d))


def torus_vertex(g: WeightedGraph, coords: Sequence[int]) -> int:
    """Vertex id of the given lattice coordinates (reduced mod L)."""
    if g.torus is None:
        raise ValueError("graph carries no torus metadata")
    L, d = g.torus.side, g.torus.dim
    if len(coords) != d:
        raise ValueError("coordinate dimension mismatch")
    return sum((c % L) * L**a for a, c in enumerate(coords))


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted graph Laplacian as a dense float array.

    Row sums are zero; entry ``(i, j)`` is ``-beta_ij`` off the diagonal.
    """
    n = g.n_vertices
    lap = np.zeros((n, n))
    for (i, j, beta) in g.edges:
        b = float(beta)
        lap[i, j] -= b
        lap[j, i] -= b
        lap[i, i] += b
        lap[j, j] += b
    return lap


def percolation_parameter(beta: Weight):
    """Bond-occupation probability ``beta / (1 + beta)`` of the matching percolation.

    Exact (a Fraction) for int or Fraction input, float for float input.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if isinstance(beta, (int, Fraction)):
        return Fraction(beta) / (1 + Fraction(beta))
    return beta / (1 + beta)


def fourier_multiplier(g: WeightedGraph, mode: FourierMode) -> float:
    """Dispersion ``lambda(p) = sum_j beta_0j (1 - cos(p . j))`` of the torus Laplacian.

    The sum runs over the (merged) neighbours of the origin with their lattice
    displacement vectors; it vanishes only at ``p = 0``.
    """
    if g.torus is None:
        raise ValueError("fourier_multiplier needs a torus graph")
    L, d = g.torus.side, g.torus.dim
    if len(mode.p) != d:
        raise ValueError("momentum dimension mismatch")
    total = 0.0
    origin = 0
    for (i, j, beta) in g.edges:
        if i != origin and j != origin:
            continue
        other = j if i == origin else i
        disp = torus_coords(g, other)
        dot = sum(pc * dc for pc, dc in zip(mode.p, disp))
        total += float(beta) * (1.0 - math.cos(dot))
    return total


def torus_modes(g: WeightedGraph) -> list[FourierMode]:
    """All ``L**d`` Fourier modes of a torus graph (including ``p = 0``)."""
    if g.torus is None:
        raise ValueError("graph carries no torus metadata")
    L, d = g.torus.side, g.torus.dim
    modes = []
    for v in range(L**d):
        ks = [(v // L**a) % L for a in range(d)]
        modes.append(FourierMode(tuple(2.0 * math.pi * k / L for k in ks)))
    return modes


def is_connected(g: WeightedGraph) -> bool:
    """Whether edges with nonzero weight connect all vertices."""
    n = g.n_vertices
    if n == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for (i, j, beta) in g.edges:
        if beta != 0:
            adj[i].append(j)
            adj[j].append(i)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def require_connected(g: WeightedGraph, what: str = "operation"):
    if not is_connected(g):
        raise ValueError(f"{what} requires a connected graph")


# --- text format -----------------------------------------------------------
#
# First line ``n m``; then m lines ``i j beta``; then optional lines
# ``v i h`` setting vertex weights.  Whitespace separated decimals.

def parse_graph_text(text: str) -> WeightedGraph:
    """Parse the plain-text graph format; rejects duplicate edges."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'n m'")
    n, m = int(head[0]), int(head[1])
    if len(lines) < 1 + m:
        raise ValueError(f"expected {m} edge lines")
    edges = []
    seen = set()
    for ln in lines[1:1 + m]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"bad edge line: {ln!r}")
        i, j, beta = int(parts[0]), int(parts[1]), float(parts[2])
        i, j = min(i, j), max(i, j)
        if (i, j) in seen:
            raise ValueError(f"duplicate edge ({i},{j})")
        seen.add((i, j))
        edges.append((i, j, beta))
    h = [0.0] * n
    for ln in lines[1 + m:]:
        parts = ln.split()
        if len(parts) != 3 or parts[0] != "v":
            raise ValueError(f"bad vertex-weight line: {ln!r}")
        h[int(parts[1])] = float(parts[2])
    edges.sort()
    return WeightedGraph(n, tuple(edges), tuple(h))


def graph_to_text(g: WeightedGraph) -> str:
    out = [f"{g.n_vertices} {g.n_edges}"]
    for (i, j, beta) in g.edges:
        out.append(f"{i} {j} {float(beta)!r}")
    for v, h in enumerate(g.vertex_weights):
        if h != 0:
            out.append(f"v {v} {float(h)!r}")
    return "\n".join(out) + "\n"
