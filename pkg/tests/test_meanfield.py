import cmath
import math
import random
from fractions import Fraction

import pytest

from arbogas import exact
from arbogas.graphs import build_complete
from arbogas.meanfield import (MeanFieldModel, asymptotic_connect,
                               asymptotic_log_partition, asymptotic_Z,
                               critical_amplitude, laplace_b01,
                               laplace_expansion, potential_P, potential_V,
                               quadrature_connect, quadrature_log_partition,
                               quadrature_Z, stationary_points, weight_F,
                               weight_F01, weight_F01_literal)


def contour_derivs(alpha, w0):
    """(V2, V3, V4, G0, G1, G2) along the line w = w0 + i alpha t, G = F."""
    q = 1.0 / (1.0 - w0)
    p2, p3, p4 = 1 / alpha - q * q, -2 * q**3, -6 * q**4
    return (alpha**2 * p2, 1j * alpha**3 * p3, -(alpha**4) * p4,
            1 - alpha * q, 1j * alpha * (-alpha * q * q),
            -(alpha**2) * (-2 * alpha * q**3))


# --- scalar functions ------------------------------------------------------------

def test_potential_values():
    assert potential_P(0.0, 0.7) == 0
    assert weight_F(0.0, 0.7) == pytest.approx(0.3)
    # P'(1 - alpha) = 0 for both phases
    for alpha in (0.5, 2.0, 3.7):
        w0 = 1 - alpha
        eps = 1e-7
        dp = (potential_P(w0 + eps, alpha) - potential_P(w0 - eps, alpha)) / (2 * eps)
        assert abs(dp) < 1e-6


def test_potential_v_is_minus_p_rotated():
    z = 0.37
    alpha = 1.3
    assert potential_V(z, alpha) == -potential_P(1j * alpha * z, alpha)


def test_branch_cut_rejected():
    with pytest.raises(ValueError):
        potential_P(1.5, 1.0)
    with pytest.raises(ValueError):
        potential_P(1.0, 1.0)


def test_f01_regular_at_zero():
    # combined form vanishes at w = 0; series of the literal form about 0
    # starts at order w (coefficient -2 alpha / N)
    alpha, N = 1.7, 23
    assert weight_F01(0.0, alpha, N) == 0
    for r in (1e-3, 1e-4, 1e-5):
        lit = weight_F01_literal(r, alpha, N)
        assert lit / r == pytest.approx(-2 * alpha / N, rel=1e-2)


def test_f01_combined_matches_literal():
    rng = random.Random(1)
    worst = 0.0
    for _ in range(100):
        r = 10 ** rng.uniform(-3, math.log10(0.5))
        w = r * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        a = weight_F01(w, 1.3, 57)
        b = weight_F01_literal(w, 1.3, 57)
        worst = max(worst, abs(a - b) / abs(b))
    assert worst < 1e-12


# --- stationary points -------------------------------------------------------------

def test_stationary_points_subcritical():
    sd = stationary_points(0.5)
    assert sd.roots == (0.0, 0.5)
    assert sd.stable_root == 0.0
    assert sd.p2 == pytest.approx(1.0)
    assert not sd.degenerate


def test_stationary_points_supercritical():
    sd = stationary_points(2.0)
    assert sd.stable_root == -1.0
    assert sd.p2 == pytest.approx(0.25)


def test_stationary_points_degenerate():
    sd = stationary_points(1.0)
    assert sd.degenerate
    assert sd.p2 == 0.0
    assert math.isnan(sd.b0)


# --- quadrature exactness ------------------------------------------------------------

@pytest.mark.parametrize("N", [2, 3, 4, 5, 6, 7])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
def test_quadrature_exact_on_small_complete_graphs(N, alpha):
    g = build_complete(N, Fraction(alpha))
    z_exact = float(exact.partition_function(g))
    p_exact = float(exact.connection_matrix(g)[0][1])
    m = MeanFieldModel(alpha, N)
    assert quadrature_Z(m) == pytest.approx(z_exact, rel=1e-8)
    assert quadrature_connect(m) == pytest.approx(p_exact, rel=1e-8)


def test_quadrature_examples():
    assert quadrature_Z(MeanFieldModel(3.0, 3)) == pytest.approx(7.0, rel=1e-9)
    assert quadrature_Z(MeanFieldModel(4.0, 4)) == pytest.approx(38.0, rel=1e-9)
    assert quadrature_Z(MeanFieldModel(2.0, 2)) == pytest.approx(2.0, rel=1e-9)
    assert quadrature_connect(MeanFieldModel(3.0, 3)) == pytest.approx(4 / 7, rel=1e-10)
    assert quadrature_connect(MeanFieldModel(2.0, 2)) == pytest.approx(0.5, rel=1e-10)


def test_contour_shift_independence():
    base = quadrature_log_partition(MeanFieldModel(2.0, 50))
    for s in (0.0, 0.25, 0.5, 0.7):
        v = quadrature_log_partition(MeanFieldModel(2.0, 50), contour_shift=s)
        assert v == pytest.approx(base, rel=1e-9)


def test_line_contour_refused_near_critical_at_large_n():
    with pytest.raises(ValueError):
        quadrature_log_partition(MeanFieldModel(1.01, 10**5), contour_rotation=0.0)


# --- asymptotics ---------------------------------------------------------------------

def test_critical_amplitude_value():
    # gamma-function oracle for 3^{2/3} Gamma(4/3) / Gamma(2/3)
    c = critical_amplitude()
    assert c == pytest.approx(3 ** (2 / 3) * math.gamma(4 / 3) / math.gamma(2 / 3))
    assert c == pytest.approx(1.3717, abs=5e-5)


def test_asymptotic_connect_values():
    assert 10 * asymptotic_connect(MeanFieldModel(0.5, 10)) == pytest.approx(1.0)
    assert asymptotic_connect(MeanFieldModel(2.0, 10)) == pytest.approx(0.25)
    m = MeanFieldModel(1.0, 1000)
    assert asymptotic_connect(m) == pytest.approx(critical_amplitude() / 1000 ** (2 / 3))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_quadrature_converges_to_asymptotics(alpha):
    devs = []
    for N in (100, 1000, 10000):
        m = MeanFieldModel(alpha, N)
        devs.append(abs(quadrature_log_partition(m) - asymptotic_log_partition(m)))
    assert devs[-1] < 5e-3            # ratio within half a percent at N = 1e4
    assert devs[0] > devs[1] > devs[2]


def test_critical_window_monotone_approach():
    c = critical_amplitude()
    vals = [quadrature_connect(MeanFieldModel(1.0, N)) * N ** (2 / 3)
            for N in (10**2, 10**3, 10**4, 10**5)]
    assert vals == sorted(vals)
    assert all(v < c for v in vals)
    assert c - vals[-1] < 0.04


def test_supercritical_amplitude_constant_fit():
    # the Z asymptotic above the transition, written with a single constant
    # a as  a^{N+3/2} e^{(a^2+N)/(2a)} / ((a-1)^{5/2} N)  (up to the same
    # e^{a/2} bookkeeping offset as the integral prefactor), forces a = alpha:
    # fitting a against quadrature at two large N must land on alpha.
    alpha = 2.0
    import scipy.optimize as opt

    def log_a_form(a, N):
        return ((N + 1.5) * math.log(a) + N / (2 * a)
                - 2.5 * math.log(a - 1) - math.log(N))

    for N in (2000, 8000):
        target = quadrature_log_partition(MeanFieldModel(alpha, N))
        a_fit = opt.brentq(lambda a: log_a_form(a, N) - target, 1.2, 4.0)
        assert a_fit == pytest.approx(alpha, abs=2e-3)


# --- Laplace expansion ----------------------------------------------------------------

def test_laplace_gaussian_first_term():
    # V = t^2/2, G = 1: first term is sqrt(2 pi / N), correction vanishes
    N = 37
    assert laplace_expansion(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, N, order=1) \
        == pytest.approx(math.sqrt(2 * math.pi / N))
    assert laplace_expansion(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, N, order=2) \
        == pytest.approx(math.sqrt(2 * math.pi / N))


def test_laplace_rejects_degenerate():
    with pytest.raises(ValueError):
        laplace_expansion(0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 10)
    with pytest.raises(ValueError):
        laplace_b01(-1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def test_laplace_two_terms_match_quadrature():
    # two-term expansion of the plain contour integral agrees with quadrature
    # to O(N^-2) relative at N = 100 (and improves fourfold at 2N)
    alpha = 0.5
    sd = stationary_points(alpha)
    p0 = potential_P(sd.stable_root, alpha).real

    def integral(N):
        m = MeanFieldModel(alpha, N)
        lq = quadrature_log_partition(m)
        return math.exp(lq - N * alpha / 2
                        - 0.5 * math.log(N * alpha / (2 * math.pi)) - N * p0)

    def expansion(N, order):
        return laplace_expansion(*contour_derivs(alpha, sd.stable_root), N, order=order)

    rel100 = abs(expansion(100, 2) - integral(100)) / integral(100)
    rel200 = abs(expansion(200, 2) - integral(200)) / integral(200)
    assert rel100 < 10.0 / 100**2
    assert rel200 < rel100 / 3.0
    # the two-term value strictly improves on one term
    assert abs(expansion(100, 2) - integral(100)) < abs(expansion(100, 1) - integral(100))


def test_saddle_data_b0_matches_leading_ratio():
    # b0 reproduces the leading integral value: I ~ 2 Gamma(1/2) b0 / sqrt(N)
    alpha = 0.5
    sd = stationary_points(alpha)
    N = 4000
    m = MeanFieldModel(alpha, N)
    p0 = potential_P(sd.stable_root, alpha).real
    lq = quadrature_log_partition(m)
    integral = math.exp(lq - N * alpha / 2
                        - 0.5 * math.log(N * alpha / (2 * math.pi)) - N * p0)
    lead = 2 * math.gamma(0.5) * sd.b0 / math.sqrt(N)
    assert integral == pytest.approx(lead, rel=5e-3)


def test_model_validation():
    with pytest.raises(ValueError):
        MeanFieldModel(0.0, 10)
    with pytest.raises(ValueError):
        MeanFieldModel(1.0, 1)
