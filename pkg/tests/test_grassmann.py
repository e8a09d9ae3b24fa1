import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from arbogas import exact
from arbogas.grassmann import (GrassmannForm, PinnedSpinAlgebra, SpinAlgebra,
                               action_form, apply_S, apply_T, apply_Tbar,
                               berezin_top, boltzmann_form, derivative, eta,
                               exp_even, fgff_expectation,
                               fgff_pinned_expectation, h02_partition,
                               h02_unnorm, hyperbolic_integral,
                               pinned_expectation, scalar,
                               ust_edge_probability_fermionic,
                               ust_na_deficit_fermionic, xi)
from arbogas.graphs import build_complete, make_graph

from conftest import corpus_edge_sets, random_rational_graph


def rand_form(n, rng, nterms=6):
    terms = {}
    for _ in range(nterms):
        mask = rng.randrange(1 << (2 * n))
        terms[mask] = terms.get(mask, 0) + Fraction(rng.randint(-5, 5))
    return GrassmannForm(n, terms)


# --- algebra laws -----------------------------------------------------------------

def test_nilpotency_and_anticommutation():
    x1, e1 = xi(2, 0), eta(2, 0)
    assert (x1 * x1).terms == {}
    assert x1 * e1 == GrassmannForm(2, {0b11: 1})
    assert e1 * x1 == GrassmannForm(2, {0b11: -1})


def test_square_of_z_like_form():
    # (1 - xi eta)^2 = 1 - 2 xi eta
    z = SpinAlgebra(1).z(0)
    assert z * z == GrassmannForm(1, {0: 1, 0b11: -2})


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_multiplication_associative_and_distributive(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    a, b, c = (rand_form(n, rng, 4) for _ in range(3))
    assert a.mul(b.mul(c)) == a.mul(b).mul(c)
    assert a.mul(b.add(c)) == a.mul(b).add(a.mul(c))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_parity_commutation_rule(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    ga = rng.randrange(2 * n)
    gb = rng.randrange(2 * n)
    a = GrassmannForm(n, {1 << ga: 1})
    b = GrassmannForm(n, {1 << gb: 1})
    if ga == gb:
        assert a.mul(b).terms == {}
    else:
        assert a.mul(b) == b.mul(a).scale(-1)


def test_universe_mismatch_rejected():
    with pytest.raises(ValueError):
        xi(2, 0).mul(xi(3, 0))


# --- exp --------------------------------------------------------------------------

def test_exp_even_basics():
    assert exp_even(GrassmannForm(2)) == scalar(2, 1)
    c = Fraction(5, 3)
    a = (xi(2, 0) * eta(2, 0)).scale(c)
    assert exp_even(a) == scalar(2, 1) + a


def test_exp_even_two_sites():
    n = 2
    a = xi(n, 0) * eta(n, 0) + xi(n, 1) * eta(n, 1)
    expect = (scalar(n, 1) + xi(n, 0) * eta(n, 0) + xi(n, 1) * eta(n, 1)
              + xi(n, 0) * eta(n, 0) * xi(n, 1) * eta(n, 1))
    assert exp_even(a) == expect


def test_exp_even_rejects_odd():
    with pytest.raises(ValueError):
        exp_even(xi(1, 0))


def test_exp_even_homomorphism_on_commuting_evens():
    n = 3
    a = (xi(n, 0) * eta(n, 1)).scale(Fraction(2)) * eta(n, 0).mul(xi(n, 1)).scale(1)
    b = (xi(n, 2) * eta(n, 2)).scale(Fraction(-3, 2))
    assert exp_even(a.add(b)) == exp_even(a).mul(exp_even(b))


# --- integrals ---------------------------------------------------------------------

def test_hyperbolic_integral_of_one():
    assert hyperbolic_integral(scalar(3, 1)) == 1


def test_tree_integral_is_one():
    # single-edge "tree" factor integrates to 1
    alg = SpinAlgebra(2)
    f = alg.uu(0, 1) + alg.one()
    assert hyperbolic_integral(f) == 1
    # a path of two edges too
    alg3 = SpinAlgebra(3)
    f3 = (alg3.uu(0, 1) + alg3.one()) * (alg3.uu(1, 2) + alg3.one())
    assert hyperbolic_integral(f3) == 1


def test_cycle_product_vanishes():
    alg = SpinAlgebra(3)
    prod = alg.one()
    for (i, j) in [(0, 1), (1, 2), (0, 2)]:
        prod = prod * (alg.uu(i, j) + alg.one())
    assert prod.terms == {}


def test_uu_square_vanishes():
    alg = SpinAlgebra(2)
    f = alg.uu(0, 1) + alg.one()
    assert f.mul(f).terms == {}
    assert alg.uu(0, 0) == alg.scalar(-1)


# --- partition function -------------------------------------------------------------

def test_h02_partition_triangle_and_edge():
    g = build_complete(3, 3)
    assert h02_partition(g) == 7
    g2 = make_graph(2, [(0, 1, 2)])
    assert h02_partition(g2) == 3


def test_h02_partition_path_with_field_matches_exact():
    rng = random.Random(0)
    g = random_rational_graph(3, ((0, 1), (1, 2)), rng, with_h=True)
    assert h02_partition(g) == exact.partition_function(g)


def test_h02_partition_exp_route_agrees():
    rng = random.Random(4)
    for (n, pairs) in corpus_edge_sets():
        if n > 4:
            continue
        g = random_rational_graph(n, pairs, rng, with_h=True)
        assert h02_partition(g, via_exp=True) == h02_partition(g)


def test_h02_cap():
    g = build_complete(13, 1.0)
    with pytest.raises(ValueError):
        h02_partition(g)


def test_expansion_identity_term_by_term():
    # exp(sum_edges beta (uu+1)) equals the edge product, as forms
    rng = random.Random(9)
    for (n, pairs) in corpus_edge_sets():
        if n > 4:
            continue
        g = random_rational_graph(n, pairs, rng)
        assert exp_even(action_form(g).scale(-1)) == boltzmann_form(g)


# --- symmetry operators --------------------------------------------------------------

def test_operator_tables():
    n = 2
    alg = SpinAlgebra(n)
    assert apply_T(xi(n, 0), 0) == alg.z(0)
    assert apply_T(eta(n, 0), 0).terms == {}
    assert apply_T(alg.z(0), 0) == eta(n, 0).scale(-1)
    assert apply_Tbar(eta(n, 0), 0) == alg.z(0)
    assert apply_Tbar(xi(n, 0), 0).terms == {}
    assert apply_Tbar(alg.z(0), 0) == xi(n, 0)
    assert apply_S(xi(n, 0), 0) == eta(n, 0)
    assert apply_S(eta(n, 0), 0) == xi(n, 0)
    assert apply_S(alg.z(0), 0).terms == {}


def test_inner_product_invariance():
    alg = SpinAlgebra(3)
    f = alg.uu(0, 1)
    assert apply_T(f).terms == {}
    assert apply_Tbar(f).terms == {}
    assert apply_S(f).terms == {}


def test_s_on_xi_pair():
    n = 2
    got = apply_S(xi(n, 0) * xi(n, 1))
    expect = xi(n, 0) * eta(n, 1) - xi(n, 1) * eta(n, 0)
    assert got == expect


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_ward_identities_free(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    F = rand_form(n, rng)
    a = rng.randrange(n)
    assert hyperbolic_integral(apply_T(F, a)) == 0
    assert hyperbolic_integral(apply_Tbar(F, a)) == 0
    assert hyperbolic_integral(apply_S(F, a)) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_ward_identities_interacting(seed):
    rng = random.Random(seed)
    (n, pairs) = corpus_edge_sets()[rng.randrange(10)]
    g = random_rational_graph(n, pairs, rng)
    F = rand_form(n, rng)
    w = boltzmann_form(g)
    assert hyperbolic_integral(apply_T(F).mul(w)) == 0
    assert hyperbolic_integral(apply_Tbar(F).mul(w)) == 0


# --- correlation identities -----------------------------------------------------------

def test_correlations_match_exact_engine():
    rng = random.Random(21)
    for (n, pairs) in corpus_edge_sets()[:12]:
        g = random_rational_graph(n, pairs, rng)
        alg = SpinAlgebra(n)
        z = exact.partition_function(g)
        conn = exact.connection_matrix(g)
        for a in range(n):
            assert h02_unnorm(alg.z(a), g) == 0
        for a in range(n):
            for b in range(a + 1, n):
                zazb = h02_unnorm(alg.z(a) * alg.z(b), g)
                xieta = h02_unnorm(alg.xi(a) * alg.eta(b), g)
                assert Fraction(xieta) / z == conn[a][b]
                assert -Fraction(zazb) / z == conn[a][b]


def test_edge_product_marginal_identity():
    # P[S] = < prod_{ij in S} beta (uu+1) > for an edge set S
    rng = random.Random(33)
    g = random_rational_graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)), rng)
    alg = SpinAlgebra(4)
    z = exact.partition_function(g)
    S = [(0, 1), (2, 3)]
    obs = alg.one()
    for (i, j) in S:
        beta = next(b for (a, bb, b) in g.edges if (a, bb) == (i, j))
        obs = obs * (alg.uu(i, j) + alg.one()).scale(beta)
    assert Fraction(h02_unnorm(obs, g)) / z == exact.edge_marginal(g, S)


# --- pinning -----------------------------------------------------------------------

def test_pinned_partition_equals_unpinned():
    rng = random.Random(2)
    for (n, pairs) in corpus_edge_sets()[:10]:
        g = random_rational_graph(n, pairs, rng)
        val = pinned_expectation(g, 0, lambda alg: alg.one())
        assert val == exact.partition_function(g)


def test_pinned_routes_agree_on_z_observable():
    g = make_graph(2, [(0, 1, Fraction(7, 3))])
    val = pinned_expectation(g, 0, lambda alg: alg.z(1))
    assert isinstance(val, (int, Fraction))


def test_pinned_spin_product_identity():
    # <(u_0.u_1 + 1)> is the same pinned and unpinned
    rng = random.Random(6)
    g = random_rational_graph(3, ((0, 1), (1, 2), (0, 2)), rng)
    alg = SpinAlgebra(3)
    z = exact.partition_function(g)
    unpinned = h02_unnorm(alg.uu(0, 1) + alg.one(), g)
    pinned = pinned_expectation(g, 0, lambda a: a.uu(0, 1) + a.one())
    assert pinned == unpinned


def test_pinned_rejects_disconnected():
    g = make_graph(4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(ValueError):
        PinnedSpinAlgebra(g, 0)


# --- fermionic Gaussian free field ----------------------------------------------------

def test_fgff_is_rooted_forest_determinant():
    g = build_complete(3, 3)
    one = scalar(3, 1)
    assert fgff_expectation(one, g, h=(1, 1, 1)) == 16
    assert fgff_expectation(one, g, h=(0, 0, 0)) == 0


def test_fgff_matches_determinant_on_corpus():
    rng = random.Random(8)
    for (n, pairs) in corpus_edge_sets()[:14]:
        g = random_rational_graph(n, pairs, rng, with_h=True)
        got = fgff_expectation(scalar(n, 1), g)
        assert got == exact.rooted_forest_determinant(g)


def test_fgff_ust_marginal_k3():
    g = build_complete(3, 3)
    assert ust_edge_probability_fermionic(g, (0, 1)) == Fraction(2, 3)


def test_fgff_ust_deficit_matches_enumeration():
    rng = random.Random(12)
    for (n, pairs) in corpus_edge_sets():
        if len(pairs) < 2 or n > 4:
            continue
        g = random_rational_graph(n, pairs, rng)
        d_ferm = ust_na_deficit_fermionic(g, 0, 1)
        d_enum = exact.ust_na_deficit(g, 0, 1)
        assert d_ferm == d_enum
        assert d_ferm <= 0


# --- dump -------------------------------------------------------------------------

def test_dump_deterministic():
    f = SpinAlgebra(2).uu(0, 1)
    assert f.dump().splitlines() == sorted(f.dump().splitlines(),
                                           key=lambda ln: int(ln.split()[0], 16))
    g = SpinAlgebra(2).uu(0, 1)
    assert f.dump() == g.dump()
