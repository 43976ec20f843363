"""Problem instances and the primal functional.

An instance is the data tuple (n, N, A, {B_j}, {gamma_j}, {c_j}, f, K)
defining

    J(x) = x^T A x / 2 + sum_j gamma_j/2 (x^T B_j x / 2 + c_j)^2 + f^T x,

together with the convex split J = -G1 + G2(.,0) where

    G1(x)    = -x^T A x / 2 + x^T K x / 2 - f^T x,
    G2(x, v) = sum_j gamma_j/2 (x^T B_j x / 2 + c_j + v_j)^2 + x^T K x / 2.

K is stored as a matrix; a scalar k is lifted to k*I so that the
K = A + eps*I sweep needs no second code path.  Instances are immutable
after validation and safe to share across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, ValidationError

COERCIVITY_SAMPLES_PER_DIM = 1000
_COERCIVITY_SEED = 1729  # fixed so validation is deterministic

# central finite differences used by the consistency checks
FD_STEP_FACTOR = 1e-5


@dataclass(frozen=True)
class ProblemInstance:
    """Validated, immutable problem data.

    ``coercivity_margin`` is the smallest sampled value of
    sum_j gamma_j (u^T B_j u / 2)^2 over unit directions u; the
    growth-at-infinity heuristic passed iff it is strictly positive.
    """

    n: int
    N: int
    A: np.ndarray
    B: np.ndarray          # stacked (N, n, n)
    gamma: np.ndarray
    c: np.ndarray
    f: np.ndarray
    K: np.ndarray
    coercivity_margin: float
    coercivity_override: bool
    # cached derived quantities, filled by validate_instance
    K_minus_A: np.ndarray = field(repr=False, default=None)
    kma_min_eig: float = field(repr=False, default=0.0)

    def require_x(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.n,):
            raise DimensionMismatchError(
                f"expected x of length {self.n}, got shape {np.shape(x)}")
        return x

    def require_v0(self, v0):
        v0 = np.asarray(v0, dtype=float).reshape(-1)
        if v0.shape != (self.N,):
            raise DimensionMismatchError(
                f"expected multiplier of length {self.N}, got shape {np.shape(v0)}")
        return v0

    def quartic_terms(self, x):
        """w_j(x) = x^T B_j x / 2 + c_j for all j."""
        return 0.5 * np.einsum("jkl,k,l->j", self.B, x, x) + self.c

    def bx_columns(self, x):
        """The n x N matrix whose columns are B_j x."""
        return np.einsum("jkl,l->kj", self.B, x)

    def mixed_matrix(self, v0):
        """M(v0) = sum_j v0_j B_j + K."""
        return self.K + np.einsum("j,jkl->kl", v0, self.B)

    def ab_matrix(self, v0):
        """A + sum_j v0_j B_j."""
        return self.A + np.einsum("j,jkl->kl", v0, self.B)


def _as_square(M, n, name):
    M = np.asarray(M, dtype=float)
    if M.shape == (n, n):
        return M
    if M.size == n * n:
        return M.reshape(n, n)
    raise DimensionMismatchError(
        f"{name} must be {n}x{n}, got shape {M.shape}")


def _coercivity_margin(B, gamma, n):
    rng = np.random.default_rng(_COERCIVITY_SEED)
    count = max(COERCIVITY_SAMPLES_PER_DIM * n, COERCIVITY_SAMPLES_PER_DIM)
    u = rng.standard_normal((count, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    quad = 0.5 * np.einsum("jkl,sk,sl->sj", B, u, u)
    values = (quad ** 2) @ gamma
    return float(np.min(values))


def validate_instance(A, B, gamma, c, f, K, coercivity_override=False):
    """Check the standing hypotheses and build a ProblemInstance.

    Raises ValidationError with reasons ``dimension-mismatch``,
    ``asymmetric-matrix``, ``nonpositive-gamma``, ``K-minus-A-not-PD``,
    ``coercivity-heuristic-failed`` or ``non-finite``.
    """
    f = np.asarray(f, dtype=float).reshape(-1)
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    n = f.size
    N = gamma.size
    if n < 1 or N < 1:
        raise DimensionMismatchError("need n >= 1 and N >= 1")
    if c.shape != (N,):
        raise DimensionMismatchError(
            f"c must have length {N}, got {c.shape}")

    A = _as_square(A, n, "A")
    B = np.asarray(B, dtype=float)
    if B.shape == (n, n) and N == 1:
        B = B.reshape(1, n, n)
    elif B.size == N * n * n:
        B = B.reshape(N, n, n)
    else:
        raise DimensionMismatchError(
            f"B must hold {N} matrices of shape {n}x{n}, got shape {B.shape}")
    if np.isscalar(K) or np.asarray(K).ndim == 0:
        K = float(K) * np.eye(n)
    else:
        K = _as_square(K, n, "K")

    for arr, name in ((A, "A"), (B, "B"), (gamma, "gamma"), (c, "c"),
                      (f, "f"), (K, "K")):
        if not np.all(np.isfinite(arr)):
            raise ValidationError("non-finite", f"{name} has non-finite entries")

    for M, name in ((A, "A"), (K, "K")):
        if not linalg.is_symmetric(M):
            raise ValidationError(
                "asymmetric-matrix",
                f"{name} asymmetric by {linalg.sym_deviation(M):.3e}")
    for j in range(N):
        if not linalg.is_symmetric(B[j]):
            raise ValidationError(
                "asymmetric-matrix",
                f"B[{j}] asymmetric by {linalg.sym_deviation(B[j]):.3e}")

    if np.any(gamma <= 0.0):
        bad = int(np.argmin(gamma))
        raise ValidationError(
            "nonpositive-gamma", f"gamma[{bad}] = {gamma[bad]} must be > 0")

    K_minus_A = K - A
    margin, eps = linalg.pd_margin(K_minus_A)
    if margin <= eps:
        raise ValidationError(
            "K-minus-A-not-PD",
            f"smallest eigenvalue of K - A is {margin:.3e} (margin {eps:.3e})")

    coercivity_margin = _coercivity_margin(B, gamma, n)
    if coercivity_margin <= 0.0 and not coercivity_override:
        raise ValidationError(
            "coercivity-heuristic-failed",
            "sampled unit directions give min sum_j gamma_j (u^T B_j u/2)^2 = "
            f"{coercivity_margin:.3e}; pass coercivity_override=True to accept")

    for arr in (A, B, gamma, c, f, K, K_minus_A):
        arr.setflags(write=False)

    return ProblemInstance(
        n=n, N=N, A=A, B=B, gamma=gamma, c=c, f=f, K=K,
        coercivity_margin=coercivity_margin,
        coercivity_override=bool(coercivity_override),
        K_minus_A=K_minus_A,
        kma_min_eig=margin,
    )


def primal_value(P, x):
    """J(x)."""
    x = P.require_x(x)
    w = P.quartic_terms(x)
    return float(0.5 * x @ P.A @ x + 0.5 * P.gamma @ (w ** 2) + P.f @ x)


def primal_gradient(P, x):
    """grad J(x) = A x + sum_j gamma_j w_j(x) B_j x + f."""
    x = P.require_x(x)
    w = P.quartic_terms(x)
    bx = P.bx_columns(x)
    return P.A @ x + bx @ (P.gamma * w) + P.f


def primal_hessian(P, x):
    """Hessian of J: A + sum_j gamma_j w_j B_j + sum_j gamma_j (B_j x)(B_j x)^T.

    The returned matrix is exactly symmetric.
    """
    x = P.require_x(x)
    w = P.quartic_terms(x)
    bx = P.bx_columns(x)
    H = (P.A
         + np.einsum("j,jkl->kl", P.gamma * w, P.B)
         + (bx * P.gamma) @ bx.T)
    return linalg.symmetrize(H)


def g1_value(P, x):
    """G1(x) = -x^T A x / 2 + x^T K x / 2 - f^T x (convex when K - A > 0)."""
    x = P.require_x(x)
    return float(-0.5 * x @ P.A @ x + 0.5 * x @ P.K @ x - P.f @ x)


def g2_value(P, x, v):
    """G2(x, v) with the perturbation v entering each quartic term."""
    x = P.require_x(x)
    v = P.require_v0(v)
    w = P.quartic_terms(x) + v
    return float(0.5 * P.gamma @ (w ** 2) + 0.5 * x @ P.K @ x)


def fd_gradient(P, x, value_fn=primal_value):
    """Componentwise central differences of a scalar function of x."""
    x = P.require_x(x)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = FD_STEP_FACTOR * (1.0 + abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        g[i] = (value_fn(P, xp) - value_fn(P, xm)) / (2.0 * h)
    return g


def fd_hessian(P, x):
    """Central differences of the analytic gradient."""
    x = P.require_x(x)
    H = np.zeros((x.size, x.size))
    for i in range(x.size):
        h = FD_STEP_FACTOR * (1.0 + abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        H[:, i] = (primal_gradient(P, xp) - primal_gradient(P, xm)) / (2.0 * h)
    return H
