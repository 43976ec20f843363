"""Primal critical points and their dual lifts.

A converged primal critical point x0 is lifted to the dual pair

    (vhat0)_j = gamma_j (x0^T B_j x0 / 2 + c_j)
    vhat      = sum_j (vhat0)_j B_j x0 + K x0

which satisfies the dual stationarity system whenever grad J(x0) = 0.
Nothing in the lift requires the solver: lift_to_dual accepts any x0
and reports residuals in both spaces.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from . import linalg
from .errors import DualityError, OutsideCstarError
from .problem import primal_gradient, primal_hessian, primal_value

NEWTON_TOL_FACTOR = 1e-12
NEWTON_MAX_ITER = 100
NEWTON_MAX_BACKTRACKS = 40
TIKHONOV_FACTOR = 1e-8
DEDUP_DISTANCE = 1e-6


@dataclass(frozen=True)
class SolveResult:
    x0: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float

    @property
    def status(self):
        return "converged" if self.converged else "no-convergence"


@dataclass(frozen=True)
class CriticalPair:
    """A primal point with its lifted dual point and residuals.

    ``dual_residual_vstar`` and ``dual_residual_v0`` are NaN when the
    lifted multiplier is outside C* (the dual stationarity system needs
    M(vhat0)^{-1} there).
    """

    x0: np.ndarray
    v_hat: np.ndarray
    v0_hat: np.ndarray
    primal_residual: float
    dual_residual_vstar: float
    dual_residual_v0: float
    newton_iterations: int

    @property
    def converged(self):
        return self.primal_residual <= 1e-9


def _grad_inf(P, x):
    return float(np.max(np.abs(primal_gradient(P, x))))


def solve_primal_critical(P, x_init):
    """Damped Newton on grad J with backtracking on the gradient norm.

    Singular Hessian steps fall back to a Tikhonov-shifted solve.  Never
    raises on non-convergence: the best iterate is returned with its
    status so batch runs can keep going.
    """
    x = P.require_x(x_init).copy()
    g = primal_gradient(P, x)
    g_norm = float(np.max(np.abs(g)))
    best = (x.copy(), g_norm)
    for it in range(NEWTON_MAX_ITER):
        tol = NEWTON_TOL_FACTOR * (1.0 + float(np.max(np.abs(x))))
        if g_norm <= tol:
            return SolveResult(x, True, it, g_norm)
        H = primal_hessian(P, x)
        step = None
        try:
            step = np.linalg.solve(H, -g)
            if not np.all(np.isfinite(step)):
                step = None
        except np.linalg.LinAlgError:
            step = None
        if step is None:
            shift = TIKHONOV_FACTOR * (1.0 + linalg.spectral_norm_sym(H))
            step = np.linalg.solve(H + shift * np.eye(P.n), -g)
        accepted = False
        t = 1.0
        for _ in range(NEWTON_MAX_BACKTRACKS):
            cand = x + t * step
            cand_norm = _grad_inf(P, cand)
            if cand_norm < g_norm:
                x, g_norm = cand, cand_norm
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # try plain steepest descent on |g| once before giving up
            t = 1.0 / (1.0 + linalg.spectral_norm_sym(H))
            for _ in range(NEWTON_MAX_BACKTRACKS):
                cand = x - t * g
                cand_norm = _grad_inf(P, cand)
                if cand_norm < g_norm:
                    x, g_norm = cand, cand_norm
                    accepted = True
                    break
                t *= 0.5
        if not accepted:
            break
        g = primal_gradient(P, x)
        g_norm = float(np.max(np.abs(g)))
        if g_norm < best[1]:
            best = (x.copy(), g_norm)
    tol = NEWTON_TOL_FACTOR * (1.0 + float(np.max(np.abs(x))))
    if g_norm <= tol:
        return SolveResult(x, True, NEWTON_MAX_ITER, g_norm)
    x, g_norm = best if best[1] < g_norm else (x, g_norm)
    return SolveResult(x, False, NEWTON_MAX_ITER, g_norm)


@dataclass(frozen=True)
class MultistartResult:
    points: List[np.ndarray]
    iterations: List[int]
    n_dropped: int
    n_merged: int


def multistart(P, n_seeds, rng_seed):
    """Deterministic multistart search for distinct critical points.

    Starts are centered Gaussians with scale 1 + |f| / (1 + lmin(K - A)).
    Converged points within inf-distance 1e-6 are merged; the result is
    sorted by J value (ties broken lexicographically), so two runs with
    the same seed agree exactly.
    """
    rng = np.random.default_rng(rng_seed)
    scale = 1.0 + float(np.linalg.norm(P.f)) / (1.0 + P.kma_min_eig)
    starts = scale * rng.standard_normal((int(n_seeds), P.n))
    found = []
    iterations = []
    n_dropped = 0
    n_merged = 0
    for s in starts:
        result = solve_primal_critical(P, s)
        if not result.converged:
            n_dropped += 1
            continue
        for existing in found:
            if float(np.max(np.abs(existing - result.x0))) <= DEDUP_DISTANCE:
                n_merged += 1
                break
        else:
            found.append(result.x0)
            iterations.append(result.iterations)
    order = sorted(range(len(found)),
                   key=lambda i: (primal_value(P, found[i]), tuple(found[i])))
    return MultistartResult(points=[found[i] for i in order],
                            iterations=[iterations[i] for i in order],
                            n_dropped=n_dropped, n_merged=n_merged)


def lift_to_dual(P, x0, newton_iterations=0):
    """Lift a primal point to its dual pair and account for residuals."""
    x0 = P.require_x(x0)
    w = P.quartic_terms(x0)
    v0_hat = P.gamma * w
    v_hat = P.bx_columns(x0) @ v0_hat + P.K @ x0
    primal_residual = _grad_inf(P, x0)

    r_vstar = float("nan")
    r_v0 = float("nan")
    if in_c_star(P, v0_hat):
        r_vstar, r_v0 = _stationarity_residuals(P, x0, v_hat, v0_hat)

    if primal_residual <= 1e-8:
        # recomputing vhat from the other side of the stationarity
        # identity must agree; a disagreement means lift and gradient
        # code have diverged
        other = -P.A @ x0 + P.K @ x0 - P.f
        drift = float(np.max(np.abs(other - v_hat)))
        if drift > 1e-9 * (1.0 + float(np.max(np.abs(v_hat)))):
            raise DualityError(
                f"lift identity violated by {drift:.3e} at a converged point")

    return CriticalPair(
        x0=x0, v_hat=v_hat, v0_hat=v0_hat,
        primal_residual=primal_residual,
        dual_residual_vstar=r_vstar,
        dual_residual_v0=r_v0,
        newton_iterations=int(newton_iterations),
    )


def in_c_star(P, v0):
    margin, eps = linalg.pd_margin(P.mixed_matrix(v0))
    return margin > eps


def _stationarity_residuals(P, x0, v_hat, v0_hat):
    lhs = linalg.solve_pd(P.K_minus_A, v_hat + P.f)
    rhs = linalg.solve_pd(P.mixed_matrix(v0_hat), v_hat)
    r_vstar = float(np.max(np.abs(lhs - rhs)))
    r_v0 = float(np.max(np.abs(P.quartic_terms(x0) - v0_hat / P.gamma)))
    return r_vstar, r_v0


def recover_primal(P, v_star):
    """x = (K - A)^{-1}(v* + f), the primal point behind a dual point."""
    v_star = P.require_x(v_star)
    return linalg.solve_pd(P.K_minus_A, v_star + P.f)


def dual_stationarity_residual(P, pair):
    """Residuals of the two dual stationarity identities at a pair."""
    if not in_c_star(P, pair.v0_hat):
        raise OutsideCstarError("lifted multiplier is outside C*")
    return _stationarity_residuals(P, pair.x0, pair.v_hat, pair.v0_hat)


def find_critical_pairs(P, n_seeds, rng_seed):
    """Multistart followed by the dual lift, one pair per distinct point."""
    result = multistart(P, n_seeds, rng_seed)
    return [lift_to_dual(P, x0, newton_iterations=it)
            for x0, it in zip(result.points, result.iterations)]
