"""Sparse calculator for the anticommuting algebra behind the forest identities.

A :class:`GrassmannForm` over ``n`` vertices is a polynomial in ``2n``
anticommuting generators (one ``xi_i, eta_i`` pair per vertex) stored as a
map from a generator bitmask to a coefficient.  Generator ``xi_i`` occupies
bit ``2i`` and ``eta_i`` bit ``2i + 1``, and every monomial is stored in
canonically sorted generator order; insertion signs are computed by counting
transpositions with popcount tricks, so sign conventions live in exactly two
small routines (:func:`_mul_sign` and the left derivative).

Coefficients are exact (``int``/``Fraction``) unless constructed from floats.
Everything of interest reduces to two linear functionals:

- ``hyperbolic_integral``: the normalized fermionic integral that weights
  every vertex with ``1/z_i = 1 + xi_i eta_i`` (so ``[1] = 1``), and
- ``berezin_top``: plain top-coefficient extraction (the flat integral used
  by the fermionic Gaussian-free-field identities).

The spin forms ``z_i = 1 - xi_i eta_i`` and the inner product ``u_i . u_j``
are provided by :class:`SpinAlgebra`; products of ``1 + beta (u_i.u_j + 1)``
over the edges build the Boltzmann factor exactly because the square of
``u_i.u_j + 1`` vanishes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .graphs import WeightedGraph, Weight, make_graph, require_connected

DEFAULT_VERTEX_CAP = 12


def _mul_sign(ma: int, mb: int) -> int:
    """Sign from concatenating canonical monomials ``ma``, ``mb`` and resorting."""
    parity = 0
    b = mb
    while b:
        low = b & -b
        g = low.bit_length() - 1
        parity ^= (ma >> (g + 1)).bit_count() & 1
        b ^= low
    return -1 if parity else 1


class GrassmannForm:
    """Element of the algebra: ``{monomial bitmask: coefficient}``.

    Treat instances as immutable values; all operations return new forms.
    """

    __slots__ = ("universe", "terms")

    def __init__(self, universe: int, terms: dict[int, Weight] | None = None):
        self.universe = universe
        self.terms = {} if terms is None else {m: c for m, c in terms.items() if c != 0}

    # -- ring operations ------------------------------------------------

    def _check(self, other: "GrassmannForm"):
        if self.universe != other.universe:
            raise ValueError("forms live in different generator universes")

    def add(self, other: "GrassmannForm") -> "GrassmannForm":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        return GrassmannForm(self.universe, out)

    def scale(self, c) -> "GrassmannForm":
        if c == 0:
            return GrassmannForm(self.universe)
        return GrassmannForm(self.universe, {m: c * v for m, v in self.terms.items()})

    def mul(self, other: "GrassmannForm") -> "GrassmannForm":
        self._check(other)
        out: dict[int, Weight] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                c = ca * cb * _mul_sign(ma, mb)
                m = ma | mb
                s = out.get(m, 0) + c
                if s == 0:
                    out.pop(m, None)
                else:
                    out[m] = s
        return GrassmannForm(self.universe, out)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scale(-1))

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, GrassmannForm):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, GrassmannForm)
                and self.universe == other.universe and self.terms == other.terms)

    def __repr__(self):
        return f"GrassmannForm(n={self.universe}, terms={len(self.terms)})"

    # -- structure ---------------------------------------------------------

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def degree0(self):
        return self.terms.get(0, 0)

    def coefficient(self, mask: int):
        return self.terms.get(mask, 0)

    def dump(self) -> str:
        """Deterministic debug dump: one ``mask_hex coefficient`` line per term."""
        lines = [f"{m:x} {c}" for m, c in sorted(self.terms.items())]
        return "\n".join(lines)


def scalar(n: int, c=1) -> GrassmannForm:
    return GrassmannForm(n, {0: c})


def xi(n: int, i: int) -> GrassmannForm:
    return GrassmannForm(n, {1 << (2 * i): 1})


def eta(n: int, i: int) -> GrassmannForm:
    return GrassmannForm(n, {1 << (2 * i + 1): 1})


def derivative(form: GrassmannForm, gen_bit: int) -> GrassmannForm:
    """Left derivative with respect to the generator occupying ``gen_bit``."""
    out: dict[int, Weight] = {}
    bit = 1 << gen_bit
    below = bit - 1
    for m, c in form.terms.items():
        if not (m & bit):
            continue
        sign = -1 if (m & below).bit_count() & 1 else 1
        out[m ^ bit] = out.get(m ^ bit, 0) + sign * c
    return GrassmannForm(form.universe, out)


def exp_even(a: GrassmannForm) -> GrassmannForm:
    """``exp`` of an even form via the nilpotent power series.

    The series truncates once the nilpotent part is exhausted (degree grows by
    at least 2 per power).  A nonzero degree-0 part is exponentiated as a
    float scale factor.
    """
    if not a.is_even():
        raise ValueError("exp_even needs an even form")
    n = a.universe
    c0 = a.degree0()
    rest = GrassmannForm(n, {m: c for m, c in a.terms.items() if m != 0})
    exact = not any(isinstance(c, float) for c in a.terms.values())
    result = scalar(n, 1)
    term = scalar(n, 1)
    for k in range(1, n + 1):
        term = term.mul(rest)
        if not term.terms:
            break
        term = term.scale(Fraction(1, k) if exact else 1.0 / k)
        result = result.add(term)
    if c0 != 0:
        result = result.scale(math.exp(float(c0)))
    return result


@lru_cache(maxsize=64)
def _xi_bits(n: int) -> int:
    return sum(1 << (2 * i) for i in range(n))


def hyperbolic_integral(form: GrassmannForm) -> Weight:
    """Fermionic integral with per-vertex weights ``1/z_i``, so ``[1] = 1``.

    Multiplying by ``prod_i (1 + xi_i eta_i)`` and extracting the top
    coefficient reduces to summing the coefficients of monomials whose mask
    contains, per vertex, either both generators or neither.
    """
    even = _xi_bits(form.universe)
    total = 0
    for m, c in form.terms.items():
        if (m & even) == ((m >> 1) & even):
            total += c
    return total


def berezin_top(form: GrassmannForm) -> Weight:
    """Flat fermionic integral: coefficient of the full monomial."""
    full = (1 << (2 * form.universe)) - 1
    return form.coefficient(full)


# --- spin forms -------------------------------------------------------------


class SpinAlgebra:
    """Constructors for the spin forms over the vertices of a graph."""

    def __init__(self, n: int):
        self.n = n

    def one(self) -> GrassmannForm:
        return scalar(self.n, 1)

    def scalar(self, c) -> GrassmannForm:
        return scalar(self.n, c)

    def xi(self, i: int) -> GrassmannForm:
        return xi(self.n, i)

    def eta(self, i: int) -> GrassmannForm:
        return eta(self.n, i)

    def z(self, i: int) -> GrassmannForm:
        """``z_i = 1 - xi_i eta_i``."""
        pair = (1 << (2 * i)) | (1 << (2 * i + 1))
        return GrassmannForm(self.n, {0: 1, pair: -1})

    def uu(self, i: int, j: int) -> GrassmannForm:
        """Inner product ``u_i . u_j`` (equals ``-1`` when ``i == j``)."""
        if i == j:
            return scalar(self.n, -1)
        out = self.scalar(-1)
        out = out - self.xi(i) * self.eta(j)
        out = out - self.xi(j) * self.eta(i)
        out = out + self.xi(i) * self.eta(i)
        out = out + self.xi(j) * self.eta(j)
        out = out - self.xi(i) * self.eta(i) * self.xi(j) * self.eta(j)
        return out


def action_form(g: WeightedGraph, h=None) -> GrassmannForm:
    """The quadratic action ``-sum_edges beta (u_i.u_j + 1) - sum_i h_i xi_i eta_i``.

    This is the (negated) exponent whose Boltzmann factor generates forests;
    it is even with vanishing degree-0 part.
    """
    alg = SpinAlgebra(g.n_vertices)
    hs = g.vertex_weights if h is None else tuple(h)
    total = GrassmannForm(g.n_vertices)
    for (i, j, beta) in g.edges:
        if beta != 0:
            total = total - (alg.uu(i, j) + alg.one()).scale(beta)
    for v, hv in enumerate(hs):
        if hv != 0:
            total = total - (alg.xi(v) * alg.eta(v)).scale(hv)
    return total


def boltzmann_form(g: WeightedGraph, h=None) -> GrassmannForm:
    """``exp`` of minus the action, built exactly as a product over edges.

    Each edge factor is ``1 + beta (u_i.u_j + 1)`` (the square of the spin
    term vanishes) and each vertex factor is ``1 + h_i xi_i eta_i``.
    """
    alg = SpinAlgebra(g.n_vertices)
    hs = g.vertex_weights if h is None else tuple(h)
    out = alg.one()
    for (i, j, beta) in g.edges:
        if beta != 0:
            out = out.mul(alg.one() + (alg.uu(i, j) + alg.one()).scale(beta))
    for v, hv in enumerate(hs):
        if hv != 0:
            out = out.mul(alg.one() + (alg.xi(v) * alg.eta(v)).scale(hv))
    return out


def h02_unnorm(F: GrassmannForm, g: WeightedGraph, h=None) -> Weight:
    """Unnormalized spin expectation ``[F e^{-action}]``."""
    return hyperbolic_integral(F.mul(boltzmann_form(g, h)))


def h02_partition(g: WeightedGraph, h=None, cap: int = DEFAULT_VERTEX_CAP,
                  via_exp: bool = False) -> Weight:
    """Forest partition function computed fermionically.

    By default uses the exact edge-product factorization of the Boltzmann
    form; ``via_exp`` instead exponentiates the action with the truncating
    power series (slower; used to cross-validate the factorization).
    """
    if g.n_vertices > cap:
        raise ValueError(
            f"graph has {g.n_vertices} vertices, fermionic cap is {cap}")
    if via_exp:
        weights = exp_even(action_form(g, h).scale(-1))
        return hyperbolic_integral(weights)
    return hyperbolic_integral(boltzmann_form(g, h))


# --- symmetry operators --------------------------------------------------------


def apply_T(F: GrassmannForm, vertex: int | None = None) -> GrassmannForm:
    """Boost operator ``T = sum_i z_i d/d(xi_i)`` (or one summand)."""
    n = F.universe
    alg = SpinAlgebra(n)
    vs = range(n) if vertex is None else [vertex]
    out = GrassmannForm(n)
    for i in vs:
        out = out.add(alg.z(i).mul(derivative(F, 2 * i)))
    return out


def apply_Tbar(F: GrassmannForm, vertex: int | None = None) -> GrassmannForm:
    """Conjugate boost ``Tbar = sum_i z_i d/d(eta_i)`` (or one summand)."""
    n = F.universe
    alg = SpinAlgebra(n)
    vs = range(n) if vertex is None else [vertex]
    out = GrassmannForm(n)
    for i in vs:
        out = out.add(alg.z(i).mul(derivative(F, 2 * i + 1)))
    return out


def apply_S(F: GrassmannForm, vertex: int | None = None) -> GrassmannForm:
    """Symplectic operator ``S = sum_i (eta_i d/d(xi_i) + xi_i d/d(eta_i))``."""
    n = F.universe
    vs = range(n) if vertex is None else [vertex]
    out = GrassmannForm(n)
    for i in vs:
        out = out.add(eta(n, i).mul(derivative(F, 2 * i)))
        out = out.add(xi(n, i).mul(derivative(F, 2 * i + 1)))
    return out


# --- pinning ----------------------------------------------------------------------


class PinnedSpinAlgebra:
    """Spin constructors after pinning one vertex to the base point.

    The pinned vertex's generators are dropped: the algebra lives over the
    remaining vertices (reindexed densely), ``z_pin`` evaluates to 1 and
    ``u_pin . u_j`` to ``-z_j``.  The pinned graph moves every edge weight
    ``beta_{pin,j}`` into the vertex weight of ``j``.
    """

    def __init__(self, g: WeightedGraph, pin: int):
        require_connected(g, "pinning")
        self.g = g
        self.pin = pin
        keep = [v for v in range(g.n_vertices) if v != pin]
        self.index = {v: k for k, v in enumerate(keep)}
        self.n = len(keep)
        self._alg = SpinAlgebra(self.n)
        h = [g.vertex_weights[v] for v in keep]
        edges = []
        for (i, j, beta) in g.edges:
            if i == pin:
                h[self.index[j]] = h[self.index[j]] + beta
            elif j == pin:
                h[self.index[i]] = h[self.index[i]] + beta
            else:
                edges.append((self.index[i], self.index[j], beta))
        self.reduced_graph = make_graph(self.n, edges, h)

    def one(self):
        return self._alg.one()

    def scalar(self, c):
        return self._alg.scalar(c)

    def z(self, i: int):
        if i == self.pin:
            return self._alg.one()
        return self._alg.z(self.index[i])

    def uu(self, i: int, j: int):
        if i == self.pin and j == self.pin:
            return self._alg.scalar(-1)
        if i == self.pin:
            return self._alg.z(self.index[j]).scale(-1)
        if j == self.pin:
            return self._alg.z(self.index[i]).scale(-1)
        return self._alg.uu(self.index[i], self.index[j])


Observable = Callable[[object], GrassmannForm]


def pinned_expectation(g: WeightedGraph, pin: int, observable: Observable,
                       h=None) -> Weight:
    """Unnormalized pinned expectation of ``observable``, computed two ways.

    ``observable`` is a callable receiving an algebra with ``one/scalar/z/uu``
    constructors; it is evaluated once in the pinned algebra (generators at
    the pin vertex dropped, boundary weights moved into vertex weights) and
    once in the full algebra multiplied by ``1 - z_pin``.  The two routes are
    required to agree exactly and the common value is returned.
    """
    if h is not None:
        g = g.with_vertex_weights(h)
    pinned = PinnedSpinAlgebra(g, pin)
    val_sub = hyperbolic_integral(
        observable(pinned).mul(boltzmann_form(pinned.reduced_graph)))

    full = SpinAlgebra(g.n_vertices)
    one_minus_z = full.one() - full.z(pin)
    val_full = hyperbolic_integral(
        one_minus_z.mul(observable(full)).mul(boltzmann_form(g)))
    if val_sub != val_full:
        raise AssertionError(
            f"pinned substitution {val_sub} != projector route {val_full}")
    return val_sub


# --- fermionic Gaussian free field -------------------------------------------------


def _fgff_weight(g: WeightedGraph, h) -> GrassmannForm:
    """``exp(sum_ij M_ij xi_i eta_j)`` with ``M = L_beta + diag(h)``.

    Expanded exactly as a product of ``1 + M_ij xi_i eta_j`` factors.
    """
    n = g.n_vertices
    alg = SpinAlgebra(n)
    hs = g.vertex_weights if h is None else tuple(h)
    diag = list(hs)
    out = alg.one()
    for (i, j, beta) in g.edges:
        if beta == 0:
            continue
        diag[i] = diag[i] + beta
        diag[j] = diag[j] + beta
        out = out.mul(alg.one() + (alg.xi(i) * alg.eta(j)).scale(-beta))
        out = out.mul(alg.one() + (alg.xi(j) * alg.eta(i)).scale(-beta))
    for v in range(n):
        if diag[v] != 0:
            out = out.mul(alg.one() + (alg.xi(v) * alg.eta(v)).scale(diag[v]))
    return out


def fgff_expectation(F: GrassmannForm, g: WeightedGraph, h=None,
                     cap: int = DEFAULT_VERTEX_CAP) -> Weight:
    """Flat Berezin integral of ``F`` against the Gaussian fermionic weight.

    With ``F = 1`` this equals ``det(L_beta + diag(h))``, the weighted count
    of rooted spanning forests.
    """
    if g.n_vertices > cap:
        raise ValueError(f"graph has {g.n_vertices} vertices, fermionic cap is {cap}")
    return berezin_top(F.mul(_fgff_weight(g, h)))


def fgff_pinned_expectation(F: GrassmannForm, g: WeightedGraph, pin: int = 0) -> Weight:
    """Normalized spanning-tree expectation ``<F>`` of the pinned Gaussian field."""
    require_connected(g, "fgff_pinned_expectation")
    n = g.n_vertices
    alg = SpinAlgebra(n)
    pin_factor = alg.xi(pin) * alg.eta(pin)
    num = fgff_expectation(pin_factor.mul(F), g, h=(0,) * n)
    den = fgff_expectation(pin_factor, g, h=(0,) * n)
    if isinstance(num, float) or isinstance(den, float):
        return num / den
    return Fraction(num) / Fraction(den)


def ust_edge_probability_fermionic(g: WeightedGraph, e, pin: int = 0) -> Weight:
    """Spanning-tree edge marginal via the Gaussian fermionic representation."""
    if isinstance(e, tuple):
        i, j = min(e), max(e)
        beta = next(b for (a, bb, b) in g.edges if (a, bb) == (i, j))
    else:
        i, j, beta = g.edges[e]
    n = g.n_vertices
    alg = SpinAlgebra(n)
    dxi = alg.xi(i) - alg.xi(j)
    deta = alg.eta(i) - alg.eta(j)
    return fgff_pinned_expectation(dxi.mul(deta).scale(beta), g, pin)


def ust_na_deficit_fermionic(g: WeightedGraph, e1, e2, pin: int = 0) -> Weight:
    """Spanning-tree pair deficit as minus a product of two cross expectations."""
    def edge(e):
        if isinstance(e, tuple):
            i, j = min(e), max(e)
            beta = next(b for (a, bb, b) in g.edges if (a, bb) == (i, j))
            return i, j, beta
        return g.edges[e]

    i, j, b1 = edge(e1)
    k, l, b2 = edge(e2)
    n = g.n_vertices
    alg = SpinAlgebra(n)
    cross1 = (alg.xi(i) - alg.xi(j)).mul(alg.eta(k) - alg.eta(l))
    cross2 = (alg.xi(k) - alg.xi(l)).mul(alg.eta(i) - alg.eta(j))
    return -(b1 * b2 * fgff_pinned_expectation(cross1, g, pin)
             * fgff_pinned_expectation(cross2, g, pin))
