"""Closed-form conjugates, membership sets and the dual functionals.

The two convex blocks have explicit Legendre transforms:

    G1*(v*)       = (v* + f)^T (K - A)^{-1} (v* + f) / 2
    G2*(v*, v0*)  = v*^T M(v0*)^{-1} v* / 2
                    + sum_j (v0*)_j^2 / (2 gamma_j) - sum_j c_j (v0*)_j

with M(v0*) = sum_j (v0*)_j B_j + K.  The G2* formula is the supremum
only where M(v0*) is positive definite; that region is C*.  Outside C*
the operations raise rather than return a meaningless number.

The partial dual is J*(v*, v0*) = G1*(v*) - G2*(v*, v0*), which is
concave in v0* on C*, and

    Jt*(v*) = sup_{v0* in C*} J*(v*, v0*)      (evaluated via its
                                                interior stationarity
                                                system)
    J2*(v*) = sup_{v0* in A*} J*(v*, v0*)      (A* = B* intersect C*,
                                                log-det barrier
                                                continuation)
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import (
    AStarEmptyError,
    LeftCstarError,
    NoConvergenceError,
    OutsideCstarError,
)

INNER_TOL_FACTOR = 1e-12
INNER_MAX_ITER = 100
INNER_MAX_BACKTRACKS = 40
INNER_EXTRA_INITS = 8  # multistart fallback budget for the inner sup

BARRIER_WEIGHTS = (1e-2, 1e-4, 1e-6)
BOUNDARY_MARGIN = 1e-6


class Membership(NamedTuple):
    inside: bool
    margin: float


@dataclass(frozen=True)
class DualPoint:
    """A dual pair (v*, v0*) with its membership margins.

    ``c_star_margin`` is the smallest eigenvalue of M(v0*) and
    ``b_star_margin`` the smallest eigenvalue of A + sum_j (v0*)_j B_j.
    """

    v_star: np.ndarray
    v0_star: np.ndarray
    c_star_margin: float
    c_star_eps: float
    b_star_margin: float
    b_star_eps: float

    @property
    def in_c_star(self):
        return self.c_star_margin > self.c_star_eps

    @property
    def in_b_star(self):
        return self.b_star_margin > self.b_star_eps

    @property
    def in_a_star(self):
        return self.in_c_star and self.in_b_star


def make_dual_point(P, v_star, v0_star):
    v_star = P.require_x(v_star)
    v0_star = P.require_v0(v0_star)
    cm, ce = linalg.pd_margin(P.mixed_matrix(v0_star))
    bm, be = linalg.pd_margin(P.ab_matrix(v0_star))
    return DualPoint(v_star=v_star, v0_star=v0_star,
                     c_star_margin=cm, c_star_eps=ce,
                     b_star_margin=bm, b_star_eps=be)


def in_C_star(P, v0_star):
    """Is M(v0*) positive definite?  Returns (bool, smallest eigenvalue)."""
    v0_star = P.require_v0(v0_star)
    margin, eps = linalg.pd_margin(P.mixed_matrix(v0_star))
    return Membership(margin > eps, margin)


def in_B_star(P, v0_star):
    """Is A + sum_j (v0*)_j B_j positive definite?"""
    v0_star = P.require_v0(v0_star)
    margin, eps = linalg.pd_margin(P.ab_matrix(v0_star))
    return Membership(margin > eps, margin)


def in_A_star(P, v0_star):
    """A* = B* intersect C*; margin is the smaller of the two."""
    c = in_C_star(P, v0_star)
    b = in_B_star(P, v0_star)
    return Membership(c.inside and b.inside, min(c.margin, b.margin))


def g1_star(P, v_star):
    """Conjugate of G1, attained at x = (K - A)^{-1}(v* + f)."""
    v_star = P.require_x(v_star)
    rhs = v_star + P.f
    return float(0.5 * rhs @ linalg.solve_pd(P.K_minus_A, rhs))


def _g2_star_checked(P, v_star, v0_star):
    M = P.mixed_matrix(v0_star)
    margin, eps = linalg.pd_margin(M)
    if margin <= eps:
        raise OutsideCstarError(
            f"M(v0*) has smallest eigenvalue {margin:.3e}; the closed form "
            "for G2* is not the supremum there")
    quad = 0.5 * v_star @ linalg.solve_pd(M, v_star)
    return float(quad + 0.5 * np.sum(v0_star ** 2 / P.gamma)
                 - np.sum(P.c * v0_star))


def g2_star(P, d, v0_star=None):
    """Conjugate of G2 at a dual point.

    Accepts a DualPoint or a raw (v_star, v0_star) pair.  Raises
    OutsideCstarError when M(v0*) is not positive definite.
    """
    if isinstance(d, DualPoint):
        v_star, v0_star = d.v_star, d.v0_star
    else:
        v_star = P.require_x(d)
        v0_star = P.require_v0(v0_star)
    return _g2_star_checked(P, v_star, v0_star)


def j_star(P, d, v0_star=None):
    """J*(v*, v0*) = G1*(v*) - G2*(v*, v0*)."""
    if isinstance(d, DualPoint):
        v_star, v0_star = d.v_star, d.v0_star
    else:
        v_star = P.require_x(d)
        v0_star = P.require_v0(v0_star)
    return g1_star(P, v_star) - _g2_star_checked(P, v_star, v0_star)


def default_inner_init(P, v_star):
    """Lift of x0 = (K - A)^{-1}(v* + f) into the multiplier space."""
    x_bar = linalg.solve_pd(P.K_minus_A, v_star + P.f)
    return P.gamma * P.quartic_terms(x_bar)


def _inner_residual(P, v_star, v0, M_factor):
    """Stationarity residual of the inner sup and the matching x_bar."""
    x_bar = linalg.cho_solve(M_factor, v_star)
    w = P.quartic_terms(x_bar)
    return w - v0 / P.gamma, x_bar


def _inner_matrix(P, x_bar, M_factor):
    """E(x_bar) = P2 P1 + diag(1/gamma), the negated v0*-Hessian of J*."""
    p1 = P.bx_columns(x_bar)
    p2 = linalg.cho_solve(M_factor, p1).T
    return linalg.symmetrize(p2 @ p1) + np.diag(1.0 / P.gamma)


def _inner_newton(P, v_star, v0):
    """Damped Newton on the inner stationarity system.

    Returns the converged multiplier.  Raises LeftCstarError if the
    iterate cannot stay strictly inside C*, NoConvergenceError on
    iteration exhaustion.
    """
    M = P.mixed_matrix(v0)
    if not linalg.chol_feasible(M):
        raise LeftCstarError("inner start is not strictly inside C*")
    factor = linalg.cho_factor(M)
    res, x_bar = _inner_residual(P, v_star, v0, factor)
    res_norm = float(np.max(np.abs(res)))
    for _ in range(INNER_MAX_ITER):
        if res_norm <= INNER_TOL_FACTOR * (1.0 + float(np.max(np.abs(v0)))):
            return v0
        E = _inner_matrix(P, x_bar, factor)
        step = np.linalg.solve(E, res)
        t = 1.0
        for _ in range(INNER_MAX_BACKTRACKS):
            cand = v0 + t * step
            M_cand = P.mixed_matrix(cand)
            if linalg.chol_feasible(M_cand):
                cand_factor = linalg.cho_factor(M_cand)
                cand_res, cand_x = _inner_residual(P, v_star, cand, cand_factor)
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_norm < res_norm:
                    v0, factor, res, x_bar = cand, cand_factor, cand_res, cand_x
                    res_norm = cand_norm
                    break
            t *= 0.5
        else:
            raise LeftCstarError(
                "inner Newton could not find a feasible descent step; "
                "the supremum is not attained at an interior stationary point")
    raise NoConvergenceError(
        f"inner Newton residual {res_norm:.3e} after {INNER_MAX_ITER} iterations")


def j_tilde_star(P, v_star, init=None):
    """Evaluate Jt*(v*) = sup over C* of J*(v*, .).

    Solves the interior fixed-point system (v0*)_j = gamma_j
    (x_bar^T B_j x_bar / 2 + c_j) with x_bar = M(v0*)^{-1} v* by damped
    Newton.  Returns (value, argmax).  The default start is the lift of
    (K - A)^{-1}(v* + f); if it fails, a deterministic batch of
    perturbed starts is tried and the best converged value wins.
    """
    v_star = P.require_x(v_star)
    inits = [P.require_v0(init) if init is not None
             else default_inner_init(P, v_star)]
    first_error = None
    try:
        v0 = _inner_newton(P, v_star, inits[0])
        return j_star(P, v_star, v0), v0
    except (NoConvergenceError, OutsideCstarError) as exc:
        first_error = exc

    # fallback multistart around the default init; J*(v*, .) is concave
    # on C*, so every converged start returns the same interior point
    rng = np.random.default_rng(0)
    base = inits[0]
    scale = 1.0 + np.abs(base)
    best = None
    for _ in range(INNER_EXTRA_INITS):
        trial = base + scale * rng.standard_normal(P.N)
        try:
            v0 = _inner_newton(P, v_star, trial)
        except (NoConvergenceError, OutsideCstarError):
            continue
        value = j_star(P, v_star, v0)
        if best is None or value > best[0]:
            best = (value, v0)
    if best is not None:
        return best
    raise first_error


@dataclass(frozen=True)
class J2Result:
    value: float
    v0_star: np.ndarray
    boundary_attained: bool
    a_star_margin: float


def _feasible_a_star_point(P, v0, max_iter=200):
    """Push v0 toward strict A* feasibility by margin ascent.

    The objective min(lmin(A + sum v B), lmin(M(v))) is concave; we
    follow eigenvector subgradients with a halving line search.
    """
    def margins(v):
        wa, ua = np.linalg.eigh(linalg.symmetrize(P.ab_matrix(v)))
        wm, um = np.linalg.eigh(linalg.symmetrize(P.mixed_matrix(v)))
        if wa[0] <= wm[0]:
            u = ua[:, 0]
        else:
            u = um[:, 0]
        grad = np.einsum("jkl,k,l->j", P.B, u, u)
        return min(wa[0], wm[0]), grad

    target = max(10.0 * BOUNDARY_MARGIN, 1e-5)
    value, grad = margins(v0)
    if value > target:
        return v0
    step = 1.0
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            break
        cand = v0 + step * grad / gnorm
        cand_value, cand_grad = margins(cand)
        if cand_value > value:
            v0, value, grad = cand, cand_value, cand_grad
            step *= 1.5
            if value > target:
                return v0
        else:
            step *= 0.5
            if step < 1e-12:
                break
    raise AStarEmptyError(
        f"could not reach a strictly feasible A* point near the start "
        f"(best margin {value:.3e})")


def _barrier_ascent(P, v_star, v0, mu, max_iter=INNER_MAX_ITER):
    """Maximize J*(v*, .) + mu logdet(A + sum v B) inside A*."""
    def eval_point(v):
        S = P.ab_matrix(v)
        M = P.mixed_matrix(v)
        if not (linalg.chol_feasible(S) and linalg.chol_feasible(M)):
            return None
        S_factor = linalg.cho_factor(S)
        M_factor = linalg.cho_factor(M)
        logdet = 2.0 * float(np.sum(np.log(np.diag(S_factor[0]))))
        value = j_star(P, v_star, v) + mu * logdet
        return value, S_factor, M_factor

    state = eval_point(v0)
    if state is None:
        raise AStarEmptyError("barrier start left A*")
    value, S_factor, M_factor = state
    for _ in range(max_iter):
        res, x_bar = _inner_residual(P, v_star, v0, M_factor)
        Sinv = linalg.symmetrize(
            linalg.cho_solve(S_factor, np.eye(P.n)))
        barrier_grad = mu * np.einsum("kl,jlk->j", Sinv, P.B)
        grad = res + barrier_grad
        if float(np.max(np.abs(grad))) <= 1e-10 * (1.0 + float(np.max(np.abs(v0)))):
            break
        E = _inner_matrix(P, x_bar, M_factor)
        X = np.einsum("kl,jlm->jkm", Sinv, P.B)
        T = linalg.symmetrize(np.einsum("jkm,imk->ji", X, X))
        step = np.linalg.solve(E + mu * T, grad)
        t = 1.0
        improved = False
        for _ in range(INNER_MAX_BACKTRACKS):
            cand = v0 + t * step
            cand_state = eval_point(cand)
            if cand_state is not None and cand_state[0] > value:
                v0, (value, S_factor, M_factor) = cand, cand_state
                improved = True
                break
            t *= 0.5
        if not improved:
            break
    return v0


def j2_star(P, v_star, init=None):
    """Evaluate J2*(v*) = sup over A* of J*(v*, .).

    Interior stationary solve with a log-det barrier continuation on
    A + sum_j (v0*)_j B_j.  When the maximizer sits on the A* boundary
    the barrier-path limit value is returned tagged boundary_attained.
    """
    v_star = P.require_x(v_star)
    v0 = P.require_v0(init) if init is not None else default_inner_init(P, v_star)
    v0 = _feasible_a_star_point(P, v0)
    for mu in BARRIER_WEIGHTS:
        v0 = _barrier_ascent(P, v_star, v0, mu)

    # try to polish to the unconstrained interior stationary point; if it
    # lands on or beyond the A* boundary the sup is a boundary limit
    polished = None
    try:
        polished = _inner_newton(P, v_star, v0)
    except (NoConvergenceError, OutsideCstarError):
        polished = None
    if polished is not None:
        margin, _ = linalg.pd_margin(P.ab_matrix(polished))
        if margin >= BOUNDARY_MARGIN:
            return J2Result(j_star(P, v_star, polished), polished,
                            False, margin)
        if margin >= -BOUNDARY_MARGIN:
            # stationary point sits on the boundary; its value is the
            # exact barrier-path limit
            return J2Result(j_star(P, v_star, polished), polished,
                            True, margin)
    margin, _ = linalg.pd_margin(P.ab_matrix(v0))
    return J2Result(j_star(P, v_star, v0), v0,
                    margin < BOUNDARY_MARGIN, margin)
