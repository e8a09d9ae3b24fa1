import math
from fractions import Fraction

import numpy as np
import pytest

from arbogas import exact
from arbogas.graphs import build_complete, build_torus, make_graph
from arbogas.sampler import (DynamicForest, displacement_images,
                             estimate_density, estimate_two_point,
                             heat_bath_sweep, parse_observables,
                             reference_sweep, run_chain)


def float_graph(g):
    return make_graph(g.n_vertices, [(i, j, float(b)) for (i, j, b) in g.edges])


# --- dynamic forest structure ---------------------------------------------------

def test_link_cut_queries():
    g = build_torus(3, 2, 1.0)
    st = DynamicForest(g)
    assert not st.connected(0, 1)
    assert st.component_size(0) == 1
    st.link(0)
    assert st.connected(*g.edges[0][:2])
    st.audit()
    with pytest.raises(ValueError):
        st.link(0)
    st.cut(0)
    assert not st.connected(*g.edges[0][:2])
    with pytest.raises(ValueError):
        st.cut(0)
    st.audit()


def test_link_rejects_cycle():
    g = build_complete(3, 3)
    st = DynamicForest(g, edge_mask=0b011)
    with pytest.raises(ValueError):
        st.link(2)
    assert st.n_edges_in_forest == 2
    assert st.component_size(0) == 3


def test_mask_roundtrip_and_random_ops():
    rng = np.random.default_rng(0)
    g = build_torus(4, 2, 1.0)
    st = DynamicForest(g)
    mask = 0
    for _ in range(3000):
        k = int(rng.integers(g.n_edges))
        (i, j, _) = g.edges[k]
        if mask >> k & 1:
            st.cut(k)
            mask &= ~(1 << k)
        elif not st.connected(i, j):
            st.link(k)
            mask |= 1 << k
    assert st.edge_mask == mask
    st.audit()


def test_audit_detects_corruption():
    g = build_complete(3, 3)
    st = DynamicForest(g, edge_mask=0b1)
    st.comp[0] = st.comp[0] + 1 if st.comp[0] + 1 < 3 else 0
    with pytest.raises(AssertionError):
        st.audit()


# --- kernel vs reference oracle ----------------------------------------------------

@pytest.mark.parametrize("g", [build_torus(3, 2, 1.0),
                               float_graph(build_complete(5, 2)),
                               build_torus(2, 2, 0.7)])
def test_kernel_matches_reference_trajectory(g):
    rng = np.random.default_rng(12)
    st = DynamicForest(g)
    mask = 0
    for sweep in range(150):
        u = rng.random(g.n_edges)
        rng2 = _FixedRng(u)
        heat_bath_sweep(st, rng2)
        mask = reference_sweep(g, mask, u)
        assert st.edge_mask == mask, f"diverged at sweep {sweep}"
    st.audit()


class _FixedRng:
    """Feeds a fixed uniform vector to heat_bath_sweep."""

    def __init__(self, u):
        self.u = np.asarray(u)

    def random(self, shape):
        assert shape == (1, len(self.u))
        return self.u.reshape(1, -1)


# --- stationary distribution --------------------------------------------------------

def test_single_edge_marginal():
    g = make_graph(2, [(0, 1, 1.0)])
    stats = run_chain(g, 60000, 3000, ["edge:0"], seed=7)
    mean, err = stats["edge:0"]
    assert err <= 0.01
    assert abs(mean - 0.5) <= 4 * err


def test_triangle_observables_match_exact():
    g = float_graph(build_complete(3, 3))
    stats = run_chain(g, 200_000, 10_000, ["conn:1", "tree0", "num_trees",
                                           "density", "edge:0"], seed=3)
    expect = {"conn:1": 4 / 7, "tree0": 15 / 7, "num_trees": 3 - 9 / 7,
              "density": 15 / 21, "edge:0": 3 / 7}
    for name, want in expect.items():
        mean, err = stats[name]
        assert abs(mean - want) <= 4 * err, (name, mean, err, want)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_estimator_consistency_full_budget(beta):
    # at 1e6 sweeps every observable matches enumeration within 3 stderr and
    # the stderr itself stays under 0.005
    g = build_torus(3, 2, beta)
    prof = exact.uniform_profile(build_torus(3, 2, 1))
    bq = Fraction(beta).limit_denominator(10)
    stats = run_chain(g, 1_000_000 + 90, 90,
                      [f"conn:{j}" for j in (1, 4)] + ["tree0", "edge:0"],
                      seed=31)
    gq = build_torus(3, 2, bq)
    refs = {
        "conn:1": float(exact.profile_connection(prof, bq, 1)),
        "conn:4": float(exact.profile_connection(prof, bq, 4)),
        "tree0": float(exact.profile_tree_size_mean(prof, bq)),
        "edge:0": float(exact.edge_marginal(gq, [0], cap=20)),
    }
    for name, want in refs.items():
        mean, err = stats[name]
        assert err <= 0.005, (name, err)
        assert abs(mean - want) <= 3 * err, (name, mean, want, err)


def test_k5_connection_vs_profile():
    gq = build_complete(5, 2)          # beta = 2/5
    prof = exact.uniform_profile(gq)
    want = float(exact.profile_connection(prof, Fraction(2, 5), 1))
    stats = run_chain(float_graph(gq), 150_000, 10_000, ["conn:1"], seed=8)
    mean, err = stats["conn:1"]
    assert abs(mean - want) <= 4 * err


def test_beta_zero_absorbs():
    g = make_graph(3, [(0, 1, 0.0), (1, 2, 0.0)])
    stats = run_chain(g, 2000, 100, ["num_trees"], seed=1)
    assert stats["num_trees"] == (3.0, 0.0)


def test_detailed_balance_flows_on_triangle():
    # per-edge-move transition flows between forest states balance under the
    # stationary measure beta^{|F|}
    beta = 2.0
    g = float_graph(build_complete(3, 3 * beta))
    st = DynamicForest(g)
    rng = np.random.default_rng(42)
    p = beta / (1 + beta)
    flows: dict[tuple[int, int], int] = {}
    mask = 0
    for _ in range(40_000):
        for k, (i, j, _) in enumerate(g.edges):
            old = mask
            want = rng.random() < p
            if mask >> k & 1:
                if not want:
                    st.cut(k)
                    mask &= ~(1 << k)
            elif want and not st.connected(i, j):
                st.link(k)
                mask |= 1 << k
            if mask != old:
                flows[(old, mask)] = flows.get((old, mask), 0) + 1
    for (a, b), n_ab in sorted(flows.items()):
        if a < b:
            n_ba = flows.get((b, a), 0)
            assert abs(n_ab - n_ba) <= 5 * math.sqrt(n_ab + n_ba), (a, b)


# --- chain mechanics ------------------------------------------------------------------

def test_seed_determinism_bit_identical():
    g = build_torus(3, 2, 1.0)
    s1 = run_chain(g, 5000, 500, ["conn:1", "tree0"], seed=11)
    s2 = run_chain(g, 5000, 500, ["conn:1", "tree0"], seed=11)
    assert s1 == s2
    s3 = run_chain(g, 5000, 500, ["conn:1", "tree0"], seed=12)
    assert s3 != s1


def test_chain_ensemble_merges():
    g = build_torus(3, 2, 1.0)
    single = run_chain(g, 20_000, 2000, ["conn:1"], seed=5)
    pooled = run_chain(g, 20_000, 2000, ["conn:1"], seed=5, chains=4, threads=2)
    assert pooled.n_samples == 4 * single.n_samples
    assert pooled.stderr[0] < single.stderr[0]
    want = float(exact.profile_connection(exact.uniform_profile(build_torus(3, 2, 1)),
                                          1, 1))
    assert abs(pooled.mean[0] - want) <= 4 * pooled.stderr[0]


def test_run_chain_validation():
    g = build_torus(3, 2, 1.0)
    with pytest.raises(ValueError):
        run_chain(g, 100, 100, ["conn:1"], seed=0)
    with pytest.raises(ValueError):
        run_chain(g, 1000, 100, ["bogus"], seed=0)
    with pytest.raises(ValueError):
        run_chain(g, 1000, 100, ["conn:99"], seed=0)
    with pytest.raises(ValueError):
        parse_observables(g, ["edge:99"])


def test_debug_audit_runs():
    g = build_torus(3, 2, 1.0)
    run_chain(g, 3000, 500, ["conn:1"], seed=2, debug=True)


def test_trace_dump(tmp_path):
    g = build_torus(3, 2, 1.0)
    path = tmp_path / "trace.f64"
    stats = run_chain(g, 1200, 100, ["edge:0", "conn:1"], seed=9,
                      trace_path=path)
    data = np.fromfile(path, dtype="<f8").reshape(-1, 2)
    assert data.shape[0] == stats.n_samples
    assert set(np.unique(data)) <= {0.0, 1.0}
    assert data[:, 0].mean() == pytest.approx(stats.mean[0], abs=1e-12)


# --- torus estimators ----------------------------------------------------------------

def test_displacement_images():
    g = build_torus(4, 2, 1.0)
    assert displacement_images(g, 0, (0, 0)) == [0]
    imgs = displacement_images(g, 0, (1, 0))
    assert sorted(imgs) == sorted({1, 3, 4, 12})
    with pytest.raises(ValueError):
        displacement_images(g, 0, (4, 0))
    with pytest.raises(ValueError):
        displacement_images(build_complete(3, 1.0), 0, (1,))


def test_two_point_at_zero_is_one():
    g = build_torus(3, 2, 1.0)
    rows = estimate_two_point(g, 0, [(0, 0), (1, 0)], 2000, 200, seed=4)
    assert rows[0].mean == 1.0
    assert rows[0].stderr == 0.0
    assert 0 < rows[1].mean < 1


def test_two_point_matches_exact_on_3x3():
    g = build_torus(3, 2, 1.0)
    prof = exact.uniform_profile(build_torus(3, 2, 1))
    rows = estimate_two_point(g, 0, [(1, 0)], 120_000, 8000, seed=6)
    want = float(exact.profile_connection(prof, 1, 1))   # all images equivalent
    assert abs(rows[0].mean - want) <= 4 * rows[0].stderr


def test_density_on_3x3_matches_exact():
    g = build_torus(3, 2, 1.0)
    prof = exact.uniform_profile(build_torus(3, 2, 1))
    want = float(exact.profile_tree_size_mean(prof, 1)) / 9
    mean, err = estimate_density(g, 120_000, 8000, seed=13)
    assert abs(mean - want) <= 4 * err
    with pytest.raises(ValueError):
        estimate_density(build_complete(4, 1.0), 1000, 100, seed=0)
