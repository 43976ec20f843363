"""Independent brute-force oracles used by the test suite.

Everything here is deliberately dumb: dense grids with zoom refinement,
bisection on sign changes, batched function evaluation.  None of it
reuses the closed forms under test beyond instance data and eigenvalue
bounds needed to size search boxes.
"""

import numpy as np
from scipy.optimize import brentq

from dcquartic import primal_gradient
from dcquartic.problem import primal_value


def zoom_grid_max(batch_fn, center, half_width, points=11, levels=8):
    """Maximize a batched function over a box by iterative grid zooming.

    Reliable for functions with a unique local maximum in the box (the
    conjugate objectives are concave over their search boxes).
    """
    center = np.asarray(center, dtype=float)
    width = np.full_like(center, float(half_width))
    best_val = -np.inf
    for _ in range(levels):
        axes = [np.linspace(center[i] - width[i], center[i] + width[i], points)
                for i in range(center.size)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = batch_fn(pts)
        k = int(np.argmax(vals))
        best_val = max(best_val, float(vals[k]))
        center = pts[k]
        spacing = 2.0 * width / (points - 1)
        width = 1.5 * spacing
    return best_val, center


def g1_star_grid(P, v_star, points=13, levels=9):
    """Numeric sup_x { v*.x - G1(x) } over a box guaranteed to hold the
    maximizer (|x| <= |v* + f| / lmin(K - A))."""
    v_star = np.asarray(v_star, dtype=float)
    radius = float(np.linalg.norm(v_star + P.f)) / P.kma_min_eig + 1.0

    def batch(xs):
        quad = 0.5 * np.einsum("sk,kl,sl->s", xs, P.K_minus_A, xs)
        return xs @ v_star - quad + xs @ P.f

    val, _ = zoom_grid_max(batch, np.zeros(P.n), radius,
                           points=points, levels=levels)
    return val


def g2_star_grid(P, v_star, v0_star, points=11, levels=12):
    """Numeric sup over (x, v) of v*.x + v0*.v - G2(x, v)."""
    v_star = np.asarray(v_star, dtype=float)
    v0_star = np.asarray(v0_star, dtype=float)
    M = P.mixed_matrix(v0_star)
    lmin = float(np.min(np.linalg.eigvalsh(0.5 * (M + M.T))))
    assert lmin > 0.0, "oracle only valid inside C*"
    x_radius = float(np.linalg.norm(v_star)) / lmin + 1.0

    # v maximizer satisfies w_j(x) + v_j = v0_j / gamma_j; bound the
    # quartic terms over the x box to size the v box
    b_norms = np.array([np.max(np.abs(np.linalg.eigvalsh(Bj)))
                        for Bj in P.B])
    w_bound = 0.5 * b_norms * x_radius ** 2 + np.abs(P.c)
    v_radius = float(np.max(np.abs(v0_star) / P.gamma + w_bound)) + 1.0

    def batch(zs):
        xs = zs[:, :P.n]
        vs = zs[:, P.n:]
        w = 0.5 * np.einsum("jkl,sk,sl->sj", P.B, xs, xs) + P.c + vs
        g2 = 0.5 * (w ** 2) @ P.gamma \
            + 0.5 * np.einsum("sk,kl,sl->s", xs, P.K, xs)
        return xs @ v_star + vs @ v0_star - g2

    center = np.zeros(P.n + P.N)
    half = max(x_radius, v_radius)
    val, _ = zoom_grid_max(batch, center, half, points=points, levels=levels)
    return val


def j_tilde_grid(P, v_star, center, half_width, points=41, levels=8):
    """Numeric sup over v0* in C* of the closed-form J*(v*, v0*).

    Grid points outside C* evaluate to -inf; the domain is convex and
    the objective concave, so zooming cannot get stuck.
    """
    from dcquartic import j_star
    from dcquartic.errors import OutsideCstarError

    def batch(v0s):
        out = np.full(v0s.shape[0], -np.inf)
        for i, v0 in enumerate(v0s):
            try:
                out[i] = j_star(P, v_star, v0)
            except OutsideCstarError:
                pass
        return out

    val, arg = zoom_grid_max(batch, center, half_width,
                             points=points, levels=levels)
    return val, arg


def gradient_roots_1d(P, lo=-6.0, hi=6.0, scans=20001):
    """All roots of the 1-d primal gradient in [lo, hi] by bisection on
    sign changes."""
    assert P.n == 1
    xs = np.linspace(lo, hi, scans)
    gs = np.array([primal_gradient(P, [x])[0] for x in xs])
    roots = []
    for i in range(scans - 1):
        if gs[i] == 0.0:
            roots.append(xs[i])
        elif gs[i] * gs[i + 1] < 0.0:
            roots.append(brentq(lambda t: primal_gradient(P, [t])[0],
                                xs[i], xs[i + 1], xtol=1e-14))
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-8:
            merged.append(r)
    return merged


def grid_min_1d(P, lo=-5.0, hi=5.0, points=100001):
    xs = np.linspace(lo, hi, points)
    vals = [primal_value(P, [x]) for x in xs]
    return float(np.min(vals))
