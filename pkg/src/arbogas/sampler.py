"""Heat-bath Monte Carlo for the forest measure on large graphs.

One sweep visits every edge in the graph's fixed edge order and resamples its
occupancy from the conditional distribution given the rest of the forest: an
occupied edge stays with probability ``beta/(1+beta)``, a vacant edge whose
endpoints are already connected must stay vacant (cycle constraint), and a
vacant edge between two different trees enters with ``beta/(1+beta)``.  Each
edge move satisfies detailed balance, so the sweep composition leaves the
forest measure invariant.  Exactly one uniform variate is consumed per edge
per sweep, which makes trajectories reproducible across kernel backends.

Connectivity is tracked with component labels over the occupied forest:
every vertex carries a label, inserting an edge relabels the smaller
component (breadth-first over occupied edges), and deleting an edge finds the
smaller side with a bidirectional search before giving it a fresh label.
Since forest components stay small in the regimes of interest, the amortized
cost per move is far below the worst case; connectivity and component-size
queries are O(1).  The sweep kernel is compiled with numba when available
(releasing the GIL so chain ensembles can run on threads) and falls back to
the same pure-Python code path, consuming the identical random stream.

A deliberately naive reference dynamics (union-find rebuilt from scratch for
every connectivity query) lives in ``reference_sweep`` as the test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .chainstats import ChainStats, merge_stats, stats_from_batches
from .graphs import WeightedGraph, torus_coords, torus_vertex

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(**kwargs):
        def wrap(f):
            return f
        return wrap

    _HAVE_NUMBA = False

MIN_BATCHES = 32
AUDIT_PERIOD = 1000

# observable kinds understood by the kernel
_K_EDGE, _K_CONN, _K_TREE, _K_NTREES, _K_DENSITY, _K_CONNMEAN = 0, 1, 2, 3, 4, 5


def _sweep_batch_impl(comp, csize, free, free_top, adj, deg, edge_in, eu, ev,
                      p_ins, uniforms, okind, oa, ob, oc, connlist,
                      acc, raw, rawsq, trace, counters, qa, qb, sa, sb):
    S, m = uniforms.shape
    n = comp.shape[0]
    n_obs = okind.shape[0]
    for s in range(S):
        for k in range(m):
            a = eu[k]
            b = ev[k]
            want = uniforms[s, k] < p_ins[k]
            if edge_in[k] == 1:
                if not want:
                    # cut: drop adjacency, split the component
                    edge_in[k] = 0
                    counters[0] -= 1
                    for t in range(deg[a]):
                        if adj[a, t] == b:
                            deg[a] -= 1
                            adj[a, t] = adj[a, deg[a]]
                            break
                    for t in range(deg[b]):
                        if adj[b, t] == a:
                            deg[b] -= 1
                            adj[b, t] = adj[b, deg[b]]
                            break
                    counters[1] += 1
                    stamp = counters[1]
                    qa[0] = a
                    sa[a] = stamp
                    ha, ta = 0, 1
                    qb[0] = b
                    sb[b] = stamp
                    hb, tb = 0, 1
                    side = 0
                    while True:
                        if ha == ta:
                            side = 0
                            break
                        v = qa[ha]
                        ha += 1
                        for t in range(deg[v]):
                            w = adj[v, t]
                            if sa[w] != stamp:
                                sa[w] = stamp
                                qa[ta] = w
                                ta += 1
                        if hb == tb:
                            side = 1
                            break
                        v = qb[hb]
                        hb += 1
                        for t in range(deg[v]):
                            w = adj[v, t]
                            if sb[w] != stamp:
                                sb[w] = stamp
                                qb[tb] = w
                                tb += 1
                    old = comp[a]
                    newlab = free[free_top - 1]
                    free_top -= 1
                    if side == 0:
                        csize[old] -= ta
                        csize[newlab] = ta
                        for t in range(ta):
                            comp[qa[t]] = newlab
                    else:
                        csize[old] -= tb
                        csize[newlab] = tb
                        for t in range(tb):
                            comp[qb[t]] = newlab
            else:
                if want and comp[a] != comp[b]:
                    # link: relabel the smaller component, then add the edge
                    ca = comp[a]
                    cb = comp[b]
                    if csize[ca] <= csize[cb]:
                        seed_v, small, big = a, ca, cb
                    else:
                        seed_v, small, big = b, cb, ca
                    counters[1] += 1
                    stamp = counters[1]
                    qa[0] = seed_v
                    sa[seed_v] = stamp
                    h, t_ = 0, 1
                    while h < t_:
                        v = qa[h]
                        h += 1
                        comp[v] = big
                        for t in range(deg[v]):
                            w = adj[v, t]
                            if sa[w] != stamp:
                                sa[w] = stamp
                                qa[t_] = w
                                t_ += 1
                    csize[big] += csize[small]
                    free[free_top] = small
                    free_top += 1
                    edge_in[k] = 1
                    counters[0] += 1
                    adj[a, deg[a]] = b
                    deg[a] += 1
                    adj[b, deg[b]] = a
                    deg[b] += 1
        if n_obs > 0:
            for o in range(n_obs):
                kd = okind[o]
                if kd == 0:
                    val = 1.0 if edge_in[oa[o]] == 1 else 0.0
                elif kd == 1:
                    val = 1.0 if comp[oa[o]] == comp[ob[o]] else 0.0
                elif kd == 2:
                    val = float(csize[comp[oa[o]]])
                elif kd == 3:
                    val = float(n - counters[0])
                elif kd == 4:
                    val = float(csize[comp[oa[o]]]) / n
                else:
                    base = comp[oa[o]]
                    cnt = 0
                    for t in range(oc[o]):
                        if comp[connlist[ob[o] + t]] == base:
                            cnt += 1
                    val = cnt / oc[o]
                acc[o] += val
                raw[o] += val
                rawsq[o] += val * val
                if trace.shape[0] > 0:
                    trace[s, o] = val
    return free_top


if _HAVE_NUMBA:
    _sweep_batch = njit(nogil=True, cache=True)(_sweep_batch_impl)
else:  # pragma: no cover
    _sweep_batch = _sweep_batch_impl

_NO_OBS = (np.zeros(0, dtype=np.int32),) * 4
_NO_TRACE = np.zeros((0, 0))


class DynamicForest:
    """Forest configuration with O(1) connectivity and component-size queries.

    Maintains, over exactly the occupied edges: adjacency lists, a component
    label per vertex and the size of each live label.  ``link``/``cut``
    relabel the smaller side of the affected component.
    """

    def __init__(self, graph: WeightedGraph, edge_mask: int = 0):
        n, m = graph.n_vertices, graph.n_edges
        if m == 0:
            raise ValueError("graph has no edges to sample")
        self.graph = graph
        degree = np.zeros(n, dtype=np.int64)
        for (i, j, _) in graph.edges:
            degree[i] += 1
            degree[j] += 1
        dmax = int(degree.max())
        self.comp = np.arange(n, dtype=np.int32)
        self.csize = np.ones(n, dtype=np.int32)
        self.free = np.zeros(n, dtype=np.int32)
        self.free_top = 0
        self.adj = np.zeros((n, dmax), dtype=np.int32)
        self.deg = np.zeros(n, dtype=np.int32)
        self.edge_in = np.zeros(m, dtype=np.uint8)
        self.eu = np.array([e[0] for e in graph.edges], dtype=np.int32)
        self.ev = np.array([e[1] for e in graph.edges], dtype=np.int32)
        self.p_ins = np.array([float(b) / (1.0 + float(b))
                               for (_, _, b) in graph.edges])
        self.counters = np.zeros(2, dtype=np.int64)   # [edges in forest, stamp]
        self._qa = np.zeros(n, dtype=np.int32)
        self._qb = np.zeros(n, dtype=np.int32)
        self._sa = np.zeros(n, dtype=np.int64)
        self._sb = np.zeros(n, dtype=np.int64)
        for k in range(m):
            if edge_mask >> k & 1:
                self.link(k)

    # -- queries ---------------------------------------------------------

    def connected(self, u: int, v: int) -> bool:
        return self.comp[u] == self.comp[v]

    def component_size(self, v: int) -> int:
        return int(self.csize[self.comp[v]])

    @property
    def n_edges_in_forest(self) -> int:
        return int(self.counters[0])

    @property
    def edge_mask(self) -> int:
        mask = 0
        for k in range(self.graph.n_edges):
            if self.edge_in[k]:
                mask |= 1 << k
        return mask

    # -- updates ---------------------------------------------------------

    def _bfs_members(self, start: int) -> list[int]:
        self.counters[1] += 1
        stamp = self.counters[1]
        sa, qa, adj, deg = self._sa, self._qa, self.adj, self.deg
        qa[0] = start
        sa[start] = stamp
        h, t = 0, 1
        while h < t:
            v = qa[h]
            h += 1
            for s in range(deg[v]):
                w = adj[v, s]
                if sa[w] != stamp:
                    sa[w] = stamp
                    qa[t] = w
                    t += 1
        return [int(x) for x in qa[:t]]

    def link(self, k: int):
        """Insert edge ``k``; raises if occupied or if it would close a cycle."""
        if self.edge_in[k]:
            raise ValueError(f"edge {k} already in forest")
        a, b = int(self.eu[k]), int(self.ev[k])
        ca, cb = self.comp[a], self.comp[b]
        if ca == cb:
            raise ValueError(f"edge {k} would close a cycle")
        seed = a if self.csize[ca] <= self.csize[cb] else b
        small = self.comp[seed]
        big = cb if small == ca else ca
        members = self._bfs_members(seed)
        for v in members:
            self.comp[v] = big
        self.csize[big] += self.csize[small]
        self.free[self.free_top] = small
        self.free_top += 1
        self.edge_in[k] = 1
        self.counters[0] += 1
        self.adj[a, self.deg[a]] = b
        self.deg[a] += 1
        self.adj[b, self.deg[b]] = a
        self.deg[b] += 1

    def cut(self, k: int):
        """Remove edge ``k``; raises if vacant."""
        if not self.edge_in[k]:
            raise ValueError(f"edge {k} not in forest")
        a, b = int(self.eu[k]), int(self.ev[k])
        for (x, y) in ((a, b), (b, a)):
            for t in range(self.deg[x]):
                if self.adj[x, t] == y:
                    self.deg[x] -= 1
                    self.adj[x, t] = self.adj[x, self.deg[x]]
                    break
        self.edge_in[k] = 0
        self.counters[0] -= 1
        side_a = self._bfs_members(a)
        side_b = self._bfs_members(b)
        side = side_a if len(side_a) <= len(side_b) else side_b
        old = self.comp[a]
        newlab = self.free[self.free_top - 1]
        self.free_top -= 1
        self.csize[old] -= len(side)
        self.csize[newlab] = len(side)
        for v in side:
            self.comp[v] = newlab

    def audit(self):
        """Union-find rebuild: verify acyclicity and label consistency."""
        n = self.graph.n_vertices
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        count = 0
        for k, (i, j, _) in enumerate(self.graph.edges):
            if self.edge_in[k]:
                ri, rj = find(i), find(j)
                if ri == rj:
                    raise AssertionError(f"cycle through edge {k}")
                parent[ri] = rj
                count += 1
        if count != self.counters[0]:
            raise AssertionError("edge counter out of sync")
        label_of_root: dict[int, int] = {}
        sizes: dict[int, int] = {}
        for v in range(n):
            r = find(v)
            lab = int(self.comp[v])
            if r in label_of_root:
                if label_of_root[r] != lab:
                    raise AssertionError(f"vertex {v} labeled inconsistently")
            else:
                label_of_root[r] = lab
            sizes[lab] = sizes.get(lab, 0) + 1
        if len(set(label_of_root.values())) != len(label_of_root):
            raise AssertionError("two components share a label")
        for lab, sz in sizes.items():
            if int(self.csize[lab]) != sz:
                raise AssertionError(f"size of label {lab} out of sync")

    # -- kernel plumbing ----------------------------------------------------

    def _run_batch(self, uniforms, okind, oa, ob, oc, connlist,
                   acc, raw, rawsq, trace=_NO_TRACE):
        self.free_top = _sweep_batch(
            self.comp, self.csize, self.free, self.free_top, self.adj,
            self.deg, self.edge_in, self.eu, self.ev, self.p_ins, uniforms,
            okind, oa, ob, oc, connlist, acc, raw, rawsq, trace,
            self.counters, self._qa, self._qb, self._sa, self._sb)


def heat_bath_sweep(state: DynamicForest, rng: np.random.Generator) -> DynamicForest:
    """One in-place heat-bath pass over all edges (one uniform per edge)."""
    uniforms = rng.random((1, state.graph.n_edges))
    zero = np.zeros(0)
    state._run_batch(uniforms, *_NO_OBS, np.zeros(0, dtype=np.int32)[:0],
                     zero, zero.copy(), zero.copy())
    return state


def reference_sweep(g: WeightedGraph, mask: int, uniforms) -> int:
    """Oracle dynamics: same update rule, union-find rebuilt per query."""

    def connected(mask, a, b):
        parent = list(range(g.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k, (i, j, _) in enumerate(g.edges):
            if mask >> k & 1:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
        return find(a) == find(b)

    for k, (i, j, beta) in enumerate(g.edges):
        p = float(beta) / (1.0 + float(beta))
        want = uniforms[k] < p
        if mask >> k & 1:
            if not want:
                mask &= ~(1 << k)
        else:
            if want and not connected(mask, i, j):
                mask |= 1 << k
    return mask


# --- observables ------------------------------------------------------------------


def parse_observables(g: WeightedGraph, names, origin: int = 0):
    """Compile observable names to kernel arrays.

    Recognized names: ``edge:<k>``, ``conn:<j>`` (connection of ``origin`` to
    vertex j), ``tree0`` (size of the origin's tree), ``num_trees``,
    ``density`` (origin tree size over n).
    """
    okind, oa, ob, oc = [], [], [], []
    connlist: list[int] = []
    for name in names:
        if name.startswith("edge:"):
            k = int(name.split(":")[1])
            if not (0 <= k < g.n_edges):
                raise ValueError(f"unknown observable {name!r}: edge out of range")
            okind.append(_K_EDGE)
            oa.append(k)
            ob.append(0)
            oc.append(0)
        elif name.startswith("conn:"):
            j = int(name.split(":")[1])
            if not (0 <= j < g.n_vertices):
                raise ValueError(f"unknown observable {name!r}: vertex out of range")
            okind.append(_K_CONN)
            oa.append(origin)
            ob.append(j)
            oc.append(0)
        elif name == "tree0":
            okind.append(_K_TREE)
            oa.append(origin)
            ob.append(0)
            oc.append(0)
        elif name == "num_trees":
            okind.append(_K_NTREES)
            oa.append(0)
            ob.append(0)
            oc.append(0)
        elif name == "density":
            okind.append(_K_DENSITY)
            oa.append(origin)
            ob.append(0)
            oc.append(0)
        elif name.startswith("connmean:"):
            verts = [int(x) for x in name.split(":")[1].split("+")]
            for v in verts:
                if not (0 <= v < g.n_vertices):
                    raise ValueError(f"unknown observable {name!r}")
            okind.append(_K_CONNMEAN)
            oa.append(origin)
            ob.append(len(connlist))
            oc.append(len(verts))
            connlist.extend(verts)
        else:
            raise ValueError(f"unknown observable {name!r}")
    return (np.array(okind, dtype=np.int32), np.array(oa, dtype=np.int32),
            np.array(ob, dtype=np.int32), np.array(oc, dtype=np.int32),
            np.array(connlist, dtype=np.int32))


# --- chains ------------------------------------------------------------------------


def _run_single_chain(g, sweeps, burn_in, observables, seed, n_batches,
                      origin, debug, trace_file):
    if sweeps <= burn_in:
        raise ValueError("sweeps must exceed burn_in")
    names = tuple(observables)
    okind, oa, ob, oc, connlist = parse_observables(g, names, origin)
    n_obs = len(names)
    measured = sweeps - burn_in
    if measured < n_batches:
        raise ValueError(f"need at least {n_batches} measured sweeps")
    batch_size = measured // n_batches

    rng = np.random.default_rng(seed)
    state = DynamicForest(g)
    m = g.n_edges
    zero_acc = np.zeros(0)

    def run_plain(n_sweeps):
        done = 0
        chunk = AUDIT_PERIOD if debug else 20000
        while done < n_sweeps:
            step = min(chunk, n_sweeps - done)
            u = rng.random((step, m))
            state._run_batch(u, *_NO_OBS, connlist[:0], zero_acc,
                             zero_acc.copy(), zero_acc.copy())
            done += step
            if debug:
                state.audit()

    run_plain(burn_in)

    batch_sums = np.zeros((n_batches, n_obs))
    raw = np.zeros(n_obs)
    rawsq = np.zeros(n_obs)
    for b in range(n_batches):
        u = rng.random((batch_size, m))
        if trace_file is not None:
            trace = np.zeros((batch_size, n_obs))
            state._run_batch(u, okind, oa, ob, oc, connlist,
                             batch_sums[b], raw, rawsq, trace)
            trace.astype("<f8").tofile(trace_file)
        else:
            state._run_batch(u, okind, oa, ob, oc, connlist,
                             batch_sums[b], raw, rawsq)
        if debug:
            state.audit()
    leftover = measured - batch_size * n_batches
    run_plain(leftover)

    return stats_from_batches(names, batch_sums, batch_size, raw, rawsq,
                              sweeps=sweeps, burn_in=burn_in, seed=seed)


def run_chain(g: WeightedGraph, sweeps: int, burn_in: int, observables,
              seed: int, *, chains: int = 1, threads: int = 1,
              n_batches: int = MIN_BATCHES, origin: int = 0,
              debug: bool = False, trace_path=None) -> ChainStats:
    """Sample the forest measure and estimate the named observables.

    Deterministic given ``(g, parameters, seed)``.  ``chains > 1`` runs
    independent chains from seeds spawned off ``seed`` and pools them; with
    ``threads > 1`` chains run concurrently (the compiled kernel releases
    the GIL).  ``trace_path`` dumps the per-sweep observable matrix of the
    first chain as raw little-endian float64.
    """
    if chains == 1:
        if trace_path is not None:
            with open(trace_path, "wb") as fh:
                return _run_single_chain(g, sweeps, burn_in, observables, seed,
                                         n_batches, origin, debug, fh)
        return _run_single_chain(g, sweeps, burn_in, observables, seed,
                                 n_batches, origin, debug, None)
    seeds = [int(s.generate_state(1)[0])
             for s in np.random.SeedSequence(seed).spawn(chains)]

    def one(i):
        path = trace_path if i == 0 else None
        return run_chain(g, sweeps, burn_in, observables, seeds[i],
                         n_batches=n_batches, origin=origin, debug=debug,
                         trace_path=path)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(chains)))
    else:
        parts = [one(i) for i in range(chains)]
    return merge_stats(parts)


# --- torus estimators -----------------------------------------------------------------


def displacement_images(g: WeightedGraph, origin: int, disp) -> list[int]:
    """Distinct vertices reached from ``origin`` by all signed axis
    permutations of the displacement vector (torus symmetry)."""
    if g.torus is None:
        raise ValueError("two-point estimation needs a torus graph")
    L, d = g.torus.side, g.torus.dim
    disp = tuple(disp)
    if len(disp) != d:
        raise ValueError("displacement dimension mismatch")
    if any(abs(c) >= L for c in disp):
        raise ValueError(f"displacement {disp} outside torus of side {L}")
    oc = torus_coords(g, origin)
    out = set()
    for perm in permutations(range(d)):
        for signs in product((1, -1), repeat=d):
            c = [oc[a] + signs[a] * disp[perm[a]] for a in range(d)]
            out.add(torus_vertex(g, c))
    return sorted(out)


@dataclass(frozen=True)
class TwoPointRow:
    displacement: tuple[int, ...]
    vertices: tuple[int, ...]
    mean: float
    stderr: float
    tau_int: float


def estimate_two_point(g: WeightedGraph, origin: int, displacements, sweeps: int,
                       burn_in: int, seed: int, *, chains: int = 1,
                       threads: int = 1) -> list[TwoPointRow]:
    """Monte Carlo two-point function, averaged over torus-symmetric images."""
    disps = [tuple(d) for d in displacements]
    names = []
    images = []
    for disp in disps:
        verts = displacement_images(g, origin, disp)
        images.append(verts)
        names.append("connmean:" + "+".join(map(str, verts)))
    stats = run_chain(g, sweeps, burn_in, names, seed, chains=chains,
                      threads=threads, origin=origin)
    rows = []
    for i, disp in enumerate(disps):
        rows.append(TwoPointRow(disp, tuple(images[i]), stats.mean[i],
                                stats.stderr[i], stats.tau_int[i]))
    return rows


def estimate_density(g: WeightedGraph, sweeps: int, burn_in: int, seed: int, *,
                     chains: int = 1, threads: int = 1,
                     origin: int = 0) -> tuple[float, float]:
    """(mean, stderr) of the origin-tree density ``|T_origin| / n``."""
    if g.torus is None:
        raise ValueError("density estimation needs a torus graph")
    stats = run_chain(g, sweeps, burn_in, ["density"], seed, chains=chains,
                      threads=threads, origin=origin)
    return stats.mean[0], stats.stderr[0]
