"""The second-order matrix chain linking primal and dual Hessians.

At a converged pair with multiplier strictly inside C* the chain

    M  = sum_p (vhat0)_p B_p + K
    P1 = [B_1 x0  ...  B_N x0]                      (n x N)
    P2 = rows x0^T B_j M^{-1}                       (N x n)
    E  = {x0^T B_l M^{-1} B_eta x0 + delta/gamma_l} (N x N)
    H3 = P1 E^{-1} P2
    Bhat = sum_l gamma_l (B_l x0)(B_l x0)^T
    D  = Bhat M^{-1} + I
    alpha  = (I - H3) D - I
    alpha1 = -M^{-1} alpha M
    H1 = (K - A)^{-1},  H2 = M^{-1}

produces the dual Hessian

    d2Jt = -M^{-1} + (K - A)^{-1} + M^{-1} H3

and satisfies d2Jt . D = H1 (d2J(x0) + (K - A) alpha1) H2 exactly.

Two conventions exist for E in the source derivation; the one above is
the implicit-function-theorem version and is the one validated by the
finite-difference oracle on the inner argmax.  The alternative
("statement") variant is kept behind a flag for comparison reports.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .conjugates import j_tilde_star
from .errors import (
    DegenerateCriticalPointError,
    DualityError,
    NotConvergedPairError,
    OutsideCstarError,
)
from .problem import primal_hessian

CONVERGED_RESIDUAL = 1e-9
E_COND_LIMIT = 1e12


@dataclass(frozen=True)
class CurvatureBundle:
    M: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    E: np.ndarray
    E_bar: np.ndarray
    H3: np.ndarray
    B_hat: np.ndarray
    D: np.ndarray
    alpha: np.ndarray
    alpha1: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    dual_hessian: np.ndarray
    dual_hessian_asymmetry: float
    e_convention: str


def build_bundle(P, pair, e_convention="derivation"):
    """Assemble every chain matrix at a converged pair.

    Raises NotConvergedPairError, OutsideCstarError, or
    DegenerateCriticalPointError (E condition number above 1e12).
    """
    if not pair.primal_residual <= CONVERGED_RESIDUAL:
        raise NotConvergedPairError(
            f"primal residual {pair.primal_residual:.3e} exceeds "
            f"{CONVERGED_RESIDUAL:.0e}")
    if e_convention not in ("derivation", "statement"):
        raise DualityError(f"unknown E convention {e_convention!r}")

    x0, v0_hat = pair.x0, pair.v0_hat
    M = P.mixed_matrix(v0_hat)
    margin, eps = linalg.pd_margin(M)
    if margin <= eps:
        raise OutsideCstarError(
            f"M(vhat0) smallest eigenvalue {margin:.3e} (margin {eps:.3e})")

    M_inv = linalg.inv_pd(M)
    p1 = P.bx_columns(x0)                   # n x N
    p2 = p1.T @ M_inv                       # N x n
    core = p2 @ p1                          # x0^T B_l M^{-1} B_eta x0
    if e_convention == "derivation":
        E = linalg.symmetrize(core) + np.diag(1.0 / P.gamma)
    else:
        E = (P.gamma * np.diag(core))[:, None] * np.ones(P.N)[None, :] \
            + np.eye(P.N)

    if e_convention == "derivation":
        w = np.linalg.eigvalsh(E)
        lo, hi = float(np.min(np.abs(w))), float(np.max(np.abs(w)))
    else:
        s = np.linalg.svd(E, compute_uv=False)
        lo, hi = float(s[-1]), float(s[0])
    if lo <= 0.0 or hi / lo > E_COND_LIMIT:
        raise DegenerateCriticalPointError(
            f"inner curvature matrix condition number "
            f"{hi / lo if lo > 0 else np.inf:.3e} exceeds {E_COND_LIMIT:.0e}")
    E_bar = np.linalg.inv(E)
    if e_convention == "derivation":
        E_bar = linalg.symmetrize(E_bar)

    H3 = p1 @ E_bar @ p2
    B_hat = linalg.symmetrize((p1 * P.gamma) @ p1.T)
    D = B_hat @ M_inv + np.eye(P.n)
    alpha = (np.eye(P.n) - H3) @ D - np.eye(P.n)
    alpha1 = -M_inv @ alpha @ M
    H1 = linalg.inv_pd(P.K_minus_A)
    H2 = M_inv
    dual_hessian = -H2 + H1 + H2 @ H3   # kept unsymmetrized on purpose
    asym = linalg.sym_deviation(dual_hessian)

    return CurvatureBundle(
        M=M, P1=p1, P2=p2, E=E, E_bar=E_bar, H3=H3, B_hat=B_hat, D=D,
        alpha=alpha, alpha1=alpha1, H1=H1, H2=H2,
        dual_hessian=dual_hessian, dual_hessian_asymmetry=asym,
        e_convention=e_convention,
    )


def implicit_sensitivity(P, pair, bundle):
    """d(vhat0)/d(v*) at the pair: the implicit derivative of the inner
    argmax, equal to E^{-1} P2."""
    return bundle.E_bar @ bundle.P2


def dual_hessian_fd(P, pair, h):
    """Central-difference Hessian of v* -> Jt*(v*), symmetrized.

    Every probe solves the inner sup warm-started at the lifted
    multiplier; a probe that fails raises ProbeFailureError.
    """
    from .errors import NoConvergenceError, ProbeFailureError

    v_hat, v0_hat = pair.v_hat, pair.v0_hat
    n = P.n

    def value(v):
        try:
            val, _ = j_tilde_star(P, v, init=v0_hat)
        except (NoConvergenceError, OutsideCstarError) as exc:
            raise ProbeFailureError(
                f"inner sup failed at probe offset {v - v_hat}: {exc}") from exc
        return val

    H = np.zeros((n, n))
    center = value(v_hat)
    for k in range(n):
        ek = np.zeros(n); ek[k] = h
        fp = value(v_hat + ek)
        fm = value(v_hat - ek)
        H[k, k] = (fp - 2.0 * center + fm) / (h * h)
    for j in range(n):
        for k in range(j + 1, n):
            ej = np.zeros(n); ej[j] = h
            ek = np.zeros(n); ek[k] = h
            fpp = value(v_hat + ej + ek)
            fpm = value(v_hat + ej - ek)
            fmp = value(v_hat - ej + ek)
            fmm = value(v_hat - ej - ek)
            H[j, k] = H[k, j] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    return linalg.symmetrize(H)


def verify_chain_identity(P, pair, bundle):
    """Relative Frobenius residual of the product identity between the
    dual Hessian and the shifted primal Hessian."""
    lhs = bundle.dual_hessian @ bundle.D
    shifted = primal_hessian(P, pair.x0) + P.K_minus_A @ bundle.alpha1
    rhs = bundle.H1 @ shifted @ bundle.H2
    return float(np.linalg.norm(lhs - rhs, "fro")
                 / (1.0 + np.linalg.norm(rhs, "fro")))


def argmax_sensitivity_fd(P, pair, h=1e-5):
    """Finite-difference oracle for implicit_sensitivity: re-solve the
    inner sup at v_hat +/- h e_k and difference the argmax."""
    v_hat, v0_hat = pair.v_hat, pair.v0_hat
    out = np.zeros((P.N, P.n))
    for k in range(P.n):
        ek = np.zeros(P.n); ek[k] = h
        _, vp = j_tilde_star(P, v_hat + ek, init=v0_hat)
        _, vm = j_tilde_star(P, v_hat - ek, init=v0_hat)
        out[:, k] = (vp - vm) / (2.0 * h)
    return out
