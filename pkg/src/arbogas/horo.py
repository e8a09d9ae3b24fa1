"""Real-field (horospherical) representation of the forest measure.

After pinning a vertex, forest observables become expectations of a real
field ``t`` over the remaining vertices under the density proportional to

    exp( - sum_edges beta_ij (cosh(t_i - t_j) - 1) ) * D(t)^a,
    D(t) = Dtilde(t) * prod_i exp(-2 t_i),     a = 3/2,

where ``Dtilde(t)`` is the determinant of the pin-reduced Laplacian with
tilted weights ``beta_ij e^{t_i + t_j}`` (by the matrix-tree theorem, the
weighted spanning-tree sum).  The connection probability is the expectation
of ``e^{t_j}``, and ``<e^{3 t_j}> = 1`` identically: a built-in canary that a
biased sampler fails.

Note the sign of the linear term: written as an energy the exponent is

    H(t) = sum_edges beta_ij (cosh(t_i - t_j) - 1) - a log Dtilde(t)
           + 2 a sum_i t_i,

i.e. ``+ 2a sum t`` (equivalently ``D^a`` with ``D = Dtilde e^{-2 sum t}``).
The opposite sign fails the ``<e^{3t}> = 1`` identity already on a single
edge, where the integrals are Bessel functions and can be checked in closed
form.

Sampling is Metropolis-adjusted Langevin (MALA) with the exact accept ratio;
the log-determinant gradient uses the inverse-matrix entries touched by each
coordinate.  An unpinned variant with a vertex field ``h > 0`` (used by the
Mermin-Wagner checker on large tori) is available via ``field_h``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import exact
from .chainstats import ChainStats, stats_from_batches
from .graphs import (WeightedGraph, build_torus, fourier_multiplier,
                     require_connected, torus_modes)

MIN_BATCHES = 32
T_GUARD = 500.0          # proposals beyond this magnitude are rejected outright


def reduced_det(t, g: WeightedGraph, pin: int = 0) -> tuple[float, float]:
    """(determinant, log-determinant) of the pin-reduced tilted Laplacian.

    Equals the weighted spanning-tree sum with edge weights
    ``beta_ij e^{t_i + t_j}``; positive for connected graphs.
    """
    require_connected(g, "reduced_det")
    dens = HoroDensity(g, pin=pin)
    M = dens.matrix(np.asarray(t, dtype=float))
    logdet = _chol_logdet(M)
    try:
        det = math.exp(logdet)
    except OverflowError:
        det = math.inf
    return det, logdet


def reduced_det_exact(factors, g: WeightedGraph, pin: int = 0) -> Fraction:
    """Exact rational determinant with per-vertex weight multipliers.

    ``factors`` plays the role of ``e^{t}``: edge ``ij`` gets weight
    ``beta_ij * factors[i] * factors[j]``.  Oracle for :func:`reduced_det`.
    """
    rows = exact._laplacian_rows(g, None, drop=pin,
                                 vertex_factors=[Fraction(f) for f in factors])
    return exact._exact_det([[Fraction(x) for x in row] for row in rows])


def _chol_logdet(M: np.ndarray) -> float:
    try:
        c, low = cho_factor(M, check_finite=False)
    except np.linalg.LinAlgError as err:
        cond = np.linalg.cond(M)
        raise ValueError(f"tilted Laplacian numerically singular "
                         f"(condition ~ {cond:.2e})") from err
    return 2.0 * float(np.sum(np.log(np.diag(c))))


class HoroDensity:
    """Energy and gradient of the tilted-field density.

    ``pin`` mode drops the pinned coordinate (``t_pin = 0``) and uses the
    pin-reduced determinant; ``field_h`` mode keeps all coordinates and adds
    a vertex weight ``h > 0`` (cosh potential plus determinant diagonal).
    Exponent ``a`` defaults to 3/2 (the forest case); 1/2 and 1 are the other
    members of the family satisfying ``<e^{2 a t_k}> = 1``.
    """

    def __init__(self, g: WeightedGraph, pin: int | None = 0, field_h=None,
                 a: float = 1.5):
        require_connected(g, "horospherical density")
        if (pin is None) == (field_h is None):
            raise ValueError("exactly one of pin / field_h must be given")
        if field_h is not None and any(hv <= 0 for hv in np.atleast_1d(field_h)):
            raise ValueError("field_h must be positive")
        self.g = g
        self.pin = pin
        self.a = a
        n = g.n_vertices
        if field_h is None:
            self.h = None
            self.active = np.array([v for v in range(n) if v != pin])
        else:
            h = np.asarray(field_h, dtype=float)
            self.h = np.full(n, float(field_h)) if h.ndim == 0 else h
            self.active = np.arange(n)
        self.dim = len(self.active)
        self._pos = {int(v): k for k, v in enumerate(self.active)}
        self._edges = [(i, j, float(b)) for (i, j, b) in g.edges]
        # vectorized edge data: endpoints, weights, positions (-1 = pinned)
        self._ei = np.array([e[0] for e in self._edges], dtype=np.intp)
        self._ej = np.array([e[1] for e in self._edges], dtype=np.intp)
        self._eb = np.array([e[2] for e in self._edges])
        pos_full = np.full(n, -1, dtype=np.intp)
        pos_full[self.active] = np.arange(self.dim)
        self._pi = pos_full[self._ei]
        self._pj = pos_full[self._ej]

    # -- matrix of tilted weights ------------------------------------------

    def matrix(self, t: np.ndarray) -> np.ndarray:
        """Tilted Laplacian over active vertices (pin row/column removed)."""
        d = self.dim
        w = self._eb * np.exp(t[self._ei] + t[self._ej])
        M = np.zeros((d, d))
        pi, pj = self._pi, self._pj
        both = (pi >= 0) & (pj >= 0)
        np.subtract.at(M, (pi[both], pj[both]), w[both])
        np.subtract.at(M, (pj[both], pi[both]), w[both])
        diag = np.zeros(d)
        np.add.at(diag, pi[pi >= 0], w[pi >= 0])
        np.add.at(diag, pj[pj >= 0], w[pj >= 0])
        if self.h is not None:
            diag = diag + self.h * np.exp(t)
        M[np.arange(d), np.arange(d)] += diag
        return M

    def _full_t(self, x: np.ndarray) -> np.ndarray:
        t = np.zeros(self.g.n_vertices)
        t[self.active] = x
        return t

    # -- energy / gradient ----------------------------------------------------

    def energy(self, x: np.ndarray) -> float:
        """Energy of the active coordinates (pinned coordinate fixed at 0)."""
        t = self._full_t(x)
        diff = t[self._ei] - t[self._ej]
        val = float(np.sum(self._eb * (np.cosh(diff) - 1.0)))
        if self.h is not None:
            val += float(np.sum(self.h * (np.cosh(t) - 1.0)))
        M = self.matrix(t)
        val -= self.a * _chol_logdet(M)
        val += 2.0 * self.a * float(np.sum(t[self.active]))
        return val

    def energy_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Energy and its gradient with respect to the active coordinates.

        The log-determinant part is ``tr(M^{-1} dM/dt_k)``, which reduces to
        ``2 rowsum(M^{-1} o M) - diag(M^{-1}) M`` since every entry of row k
        and the incident diagonal entries carry exactly one factor e^{t_k}.
        """
        t = self._full_t(x)
        grad = np.zeros(self.dim)
        diff = t[self._ei] - t[self._ej]
        val = float(np.sum(self._eb * (np.cosh(diff) - 1.0)))
        s = self._eb * np.sinh(diff)
        pi, pj = self._pi, self._pj
        np.add.at(grad, pi[pi >= 0], s[pi >= 0])
        np.subtract.at(grad, pj[pj >= 0], s[pj >= 0])
        if self.h is not None:
            val += float(np.sum(self.h * (np.cosh(t) - 1.0)))
            grad += self.h * np.sinh(t)
        M = self.matrix(t)
        c, low = cho_factor(M, check_finite=False)
        logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
        Minv = cho_solve((c, low), np.eye(self.dim), check_finite=False)
        trs = 2.0 * np.sum(Minv * M, axis=1) - np.diag(Minv) @ M
        val += -self.a * logdet + 2.0 * self.a * float(np.sum(t[self.active]))
        grad += -self.a * trs + 2.0 * self.a
        return val, grad


def htilde0(t, g: WeightedGraph, pin: int = 0) -> float:
    """Pinned-field energy at full-length ``t`` (``t[pin]`` is forced to 0)."""
    dens = HoroDensity(g, pin=pin)
    x = np.asarray(t, dtype=float)[dens.active]
    return dens.energy(x)


def grad_htilde0(t, g: WeightedGraph, pin: int = 0) -> np.ndarray:
    """Gradient of :func:`htilde0` as a full-length vector (zero at the pin)."""
    dens = HoroDensity(g, pin=pin)
    x = np.asarray(t, dtype=float)[dens.active]
    _, grad = dens.energy_grad(x)
    out = np.zeros(g.n_vertices)
    out[dens.active] = grad
    return out


# --- functionals -----------------------------------------------------------------


def _parse_functionals(g: WeightedGraph, names, active):
    """Compile names (exp_t:j / exp_2t:j / exp_3t:j / sum_exp_t) to evaluators."""
    specs = []
    active_set = set(int(v) for v in active)
    for name in names:
        if name == "sum_exp_t":
            specs.append((0, -1))
            continue
        try:
            kind, vs = name.split(":")
            j = int(vs)
            power = {"exp_t": 1, "exp_2t": 2, "exp_3t": 3}[kind]
        except (ValueError, KeyError):
            raise ValueError(f"unknown functional {name!r}") from None
        if not (0 <= j < g.n_vertices):
            raise ValueError(f"unknown functional {name!r}: vertex out of range")
        specs.append((power, j))
    return specs


def _eval_functionals(specs, t_full):
    out = np.empty(len(specs))
    for k, (power, j) in enumerate(specs):
        if power == 0:
            out[k] = float(np.sum(np.exp(t_full)))
        else:
            out[k] = math.exp(power * t_full[j])
    return out


# --- MALA -------------------------------------------------------------------------


def _preconditioner(dens: HoroDensity) -> tuple[np.ndarray, np.ndarray]:
    """Mode of the density and a Cholesky factor of the inverse Hessian there.

    Sampling in the transformed coordinates ``x = x0 + R y`` makes the local
    Gaussian isotropic, which collapses the autocorrelation of the soft
    collective modes that plain single-scale Langevin steps crawl through.
    """
    from scipy.optimize import minimize

    res = minimize(dens.energy_grad, np.zeros(dens.dim), jac=True,
                   method="L-BFGS-B", options={"maxiter": 200, "gtol": 1e-8})
    x0 = res.x
    d = dens.dim
    hess = np.empty((d, d))
    h = 1e-5
    for k in range(d):
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        hess[k] = (dens.energy_grad(xp)[1] - dens.energy_grad(xm)[1]) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    lam = np.linalg.eigvalsh(hess)
    if lam[0] <= 1e-8:
        hess += (1e-8 - lam[0] + 1e-6) * np.eye(d)
    # R R^T = hess^{-1}: with hess = L L^T, take R = (L^T)^{-1}
    L = np.linalg.cholesky(hess)
    R = np.linalg.inv(L).T
    return x0, R


def mala_chain(g: WeightedGraph, step: float, steps: int, burn_in: int,
               seed: int, functionals=None, *, pin: int | None = 0,
               field_h=None, a: float = 1.5, tune: bool = True,
               precondition: bool = True,
               n_batches: int = MIN_BATCHES) -> ChainStats:
    """Metropolis-adjusted Langevin sampling of the tilted-field density.

    Proposals act in coordinates preconditioned by the inverse Hessian at the
    density's mode (disable with ``precondition=False``); the step size is
    tuned toward 50-60% acceptance during burn-in and then frozen (tuning
    during measurement would bias the chain).  Since ``<e^{3 t_j}> = 1``
    exactly, requesting the ``exp_3t`` functionals gives a bias canary.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if steps <= burn_in:
        raise ValueError("steps must exceed burn_in")
    dens = HoroDensity(g, pin=pin, field_h=field_h, a=a)
    if functionals is None:
        functionals = [f"exp_t:{j}" for j in dens.active]
    names = tuple(functionals)
    specs = _parse_functionals(g, names, dens.active)

    if precondition:
        x_ref, R = _preconditioner(dens)
        Rt = R.T

        def energy_grad(y):
            e, gx = dens.energy_grad(x_ref + R @ y)
            return e, Rt @ gx

        def to_field(y):
            return x_ref + R @ y
    else:
        def energy_grad(y):
            return dens.energy_grad(y)

        def to_field(y):
            return y

    rng = np.random.default_rng(seed)
    x = np.zeros(dens.dim)
    e_cur, g_cur = energy_grad(x)
    eps = float(step)

    measured = steps - burn_in
    if measured < n_batches:
        raise ValueError(f"need at least {n_batches} measured steps")
    batch_size = measured // n_batches
    batch_sums = np.zeros((n_batches, len(names)))
    raw = np.zeros(len(names))
    rawsq = np.zeros(len(names))

    accepted = 0
    window_acc = 0
    for it in range(steps):
        noise = rng.standard_normal(dens.dim)
        u_accept = rng.random()
        prop = x - 0.5 * eps * eps * g_cur + eps * noise
        ok = bool(np.max(np.abs(to_field(prop))) <= T_GUARD)
        if ok:
            e_prop, g_prop = energy_grad(prop)
            fwd = prop - x + 0.5 * eps * eps * g_cur
            bwd = x - prop + 0.5 * eps * eps * g_prop
            log_alpha = (e_cur - e_prop
                         + (fwd @ fwd - bwd @ bwd) / (2.0 * eps * eps))
            if math.log(u_accept) < log_alpha:
                x, e_cur, g_cur = prop, e_prop, g_prop
                accepted += 1
                window_acc += 1
        if it < burn_in:
            if tune and (it + 1) % 100 == 0:
                rate = window_acc / 100.0
                if rate > 0.65:
                    eps *= 1.12
                elif rate < 0.50:
                    eps /= 1.12
                window_acc = 0
            continue
        k = it - burn_in
        if k < batch_size * n_batches:
            vals = _eval_functionals(specs, dens._full_t(to_field(x)))
            b = k // batch_size
            batch_sums[b] += vals
            raw += vals
            rawsq += vals * vals

    rate = accepted / steps
    if rate < 0.05 or rate > 0.95:
        warnings.warn(f"MALA acceptance rate {rate:.1%}; try step "
                      f"{'smaller' if rate < 0.05 else 'larger'} than {eps:.3g}",
                      RuntimeWarning)
    return stats_from_batches(names, batch_sums, batch_size, raw, rawsq,
                              sweeps=steps, burn_in=burn_in, seed=seed,
                              acceptance_rate=rate, step_size=eps)


def estimate_connection_horo(g: WeightedGraph, pin: int, j: int, steps: int,
                             burn_in: int, seed: int,
                             step: float = 0.3) -> tuple[float, float]:
    """(mean, stderr) MALA estimate of the pin-to-j connection ``<e^{t_j}>``."""
    if j == pin:
        return 1.0, 0.0
    stats = mala_chain(g, step, steps, burn_in, seed, [f"exp_t:{j}"], pin=pin)
    return stats.mean[0], stats.stderr[0]


# --- Mermin-Wagner ------------------------------------------------------------------


@dataclass(frozen=True)
class MWReport:
    """Both sides of the momentum-sum lower bound on ``1/<z_0>``."""

    lhs: float                 # 1 / <z_0>
    rhs: float                 # 1 + (2 pi L)^{-d} sum_p 1/(lambda(p) + h)
    holds: bool                # lhs >= rhs
    rhs_volume_normalized: float   # same sum with the plain 1/L^d average
    lhs_stderr: float | None   # None when the lhs is exact
    method: str                # "exact" or "mala"


def mw_bound(g: WeightedGraph, beta, h, *, method: str = "auto",
             steps: int = 200_000, burn_in: int = 20_000, seed: int = 1,
             exact_edge_cap: int = 20) -> MWReport:
    """Check the momentum-sum lower bound for ``1/<z_0>`` on a torus.

    ``<z_0>`` is the expectation of ``S/(1+S)`` with ``S = h |T_0|``; it is
    computed exactly by enumeration when feasible and otherwise estimated as
    ``<e^{t_0}>`` under the unpinned field density with vertex weight ``h``.
    The asserted right side uses the ``(2 pi L)^{-d}`` prefactor; the
    conventional volume average is also reported (it is the stronger bound
    and is not asserted).
    """
    if g.torus is None:
        raise ValueError("mw_bound needs a torus graph")
    if h <= 0:
        raise ValueError("mw_bound needs h > 0 (the momentum sum diverges)")
    if beta is not None and any(b != beta for (_, _, b) in g.edges):
        g = build_torus(g.torus.side, g.torus.dim, beta)
    L, d = g.torus.side, g.torus.dim

    lam = [fourier_multiplier(g, mode) for mode in torus_modes(g)]
    s = sum(1.0 / (lv + float(h)) for lv in lam)
    rhs = 1.0 + s / (2.0 * math.pi * L) ** d
    rhs_vol = 1.0 + s / L**d

    if method == "auto":
        method = "exact" if g.n_edges <= exact_edge_cap else "mala"
    if method == "exact":
        beta0 = g.edges[0][2]
        if all(b == beta0 for (_, _, b) in g.edges):
            prof = exact.uniform_profile(g)
            z0 = exact.profile_z0_expectation(
                prof, Fraction(beta0) if not isinstance(beta0, float) else beta0,
                Fraction(h) if not isinstance(h, float) else h)
        else:
            z0 = exact.z0_expectation(g, h)
        lhs = 1.0 / float(z0)
        err = None
    elif method == "mala":
        stats = mala_chain(g, 0.25, steps, burn_in, seed, ["exp_t:0"],
                           pin=None, field_h=float(h))
        mean, stderr = stats.mean[0], stats.stderr[0]
        lhs = 1.0 / mean
        err = stderr / mean**2
    else:
        raise ValueError(f"unknown method {method!r}")
    return MWReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs,
                    rhs_volume_normalized=rhs_vol, lhs_stderr=err, method=method)
