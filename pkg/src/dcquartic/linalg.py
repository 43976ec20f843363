"""Small dense symmetric linear-algebra helpers.

All checks are eigenvalue based: positive definiteness is decided by the
smallest eigenvalue against a scale-aware margin.  Cholesky is used only
as a fast feasibility probe inside iteration loops; reported margins
always come from ``eigvalsh``.
"""

import numpy as np
import scipy.linalg

SYM_TOL_FACTOR = 1e-12
EPS_PD_FACTOR = 1e-10


def sym_deviation(M):
    """max |M - M^T|, the absolute asymmetry of a square matrix."""
    M = np.asarray(M, dtype=float)
    return float(np.max(np.abs(M - M.T))) if M.size else 0.0


def is_symmetric(M, tol_factor=SYM_TOL_FACTOR):
    M = np.asarray(M, dtype=float)
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    return sym_deviation(M) <= tol_factor * (1.0 + scale)


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def eps_pd(eigenvalues):
    """Scale-aware positive-definiteness margin for a symmetric spectrum."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    return EPS_PD_FACTOR * (1.0 + scale)


def pd_margin(M):
    """Return (smallest eigenvalue, eps) of the symmetrized matrix.

    The matrix counts as positive definite when margin > eps.
    """
    w = np.linalg.eigvalsh(symmetrize(M))
    return float(w[0]), eps_pd(w)


def is_pd(M):
    margin, eps = pd_margin(M)
    return margin > eps


def nd_margin(M):
    """Return (largest eigenvalue, eps); negative definite when
    largest < -eps."""
    w = np.linalg.eigvalsh(symmetrize(M))
    return float(w[-1]), eps_pd(w)


def chol_feasible(M):
    """Cheap strict-PD probe used inside iteration loops."""
    try:
        np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def cho_factor(M):
    return scipy.linalg.cho_factor(M, lower=True, check_finite=False)


def cho_solve(factor, b):
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def solve_pd(M, b):
    """Solve M x = b for symmetric positive definite M via Cholesky."""
    return cho_solve(cho_factor(M), b)


def inv_pd(M):
    """Symmetrized inverse of a symmetric positive definite matrix."""
    n = M.shape[0]
    return symmetrize(solve_pd(M, np.eye(n)))


def spectral_norm_sym(M):
    w = np.linalg.eigvalsh(symmetrize(M))
    return float(np.max(np.abs(w))) if w.size else 0.0


def inertia(M, eps=None):
    """(n_pos, n_neg, n_zero) eigenvalue counts of a symmetric matrix.

    Eigenvalues within ``eps`` of zero count as zero; ``eps`` defaults to
    the scale-aware PD margin of the spectrum.
    """
    w = np.linalg.eigvalsh(symmetrize(M))
    if eps is None:
        eps = eps_pd(w)
    n_pos = int(np.sum(w > eps))
    n_neg = int(np.sum(w < -eps))
    return n_pos, n_neg, int(w.size - n_pos - n_neg)


def ball_samples(rng, center, radius, count):
    """Uniform samples from the closed Euclidean ball around ``center``."""
    center = np.asarray(center, dtype=float)
    n = center.size
    directions = rng.standard_normal((count, n))
    norms = np.linalg.norm(directions, axis=1)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / n)
    return center[None, :] + directions * (radii / norms)[:, None]
