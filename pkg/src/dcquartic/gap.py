"""Case classification, duality-gap certification and extremality probes.

Three mutually exclusive conclusions are available at a critical pair:

    case1  local min of J at x0, local min of Jt* at vhat, zero gap
    case2  global min of J at x0 (multiplier in A*), zero gap
    case3  local max of J at x0, local max of Jt* at vhat, zero gap

case2 takes precedence over case1 because its conclusion subsumes the
local one.  Pairs on the C* boundary, or with indefinite shifted
Hessians, stay unclassified.

The shifted matrix d2J(x0) + (K - A) alpha1 is not symmetric in
general; its definiteness is read in the quadratic-form sense, i.e.
from the spectrum of the symmetric part.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import linalg
from .conjugates import (
    in_A_star,
    in_B_star,
    in_C_star,
    j2_star,
    j_star,
    j_tilde_star,
)
from .critical import lift_to_dual, multistart
from .curvature import build_bundle, verify_chain_identity
from .errors import (
    DualityError,
    NoConvergenceError,
    NotCase2Error,
    OutsideCstarError,
    ValidationError,
)
from .problem import primal_hessian, primal_value, validate_instance

PROBE_TOL = 1e-9
CERT_GAP_TOL = 1e-8
CERT_SAMPLE_TOL = 1e-9
# j2 values at boundary-attained points carry O(mu log mu) barrier
# truncation, so the midpoint convexity test gets a looser band
J2_CONVEXITY_TOL = 5e-5


@dataclass
class CaseReport:
    case_id: str                       # case1 | case2 | case3 | unclassified
    gap: float
    primal_hessian_margin: float
    shifted_hessian_margin: float
    c_star: bool
    c_star_margin: float
    b_star: bool
    b_star_margin: float
    a_star: bool
    a_star_margin: float
    probe_evidence: Optional["ProbeEvidence"] = None
    j2_convexity_checks: Optional[int] = None


def classify_case(P, pair, bundle):
    """Evaluate the three case predicates with eigenvalue margins."""
    d2j = primal_hessian(P, pair.x0)
    shifted = d2j + P.K_minus_A @ bundle.alpha1
    d2j_min, d2j_eps = linalg.pd_margin(d2j)
    d2j_max, _ = linalg.nd_margin(d2j)
    sh_min, sh_eps = linalg.pd_margin(shifted)
    sh_max, _ = linalg.nd_margin(shifted)

    c = in_C_star(P, pair.v0_hat)
    b = in_B_star(P, pair.v0_hat)
    a = in_A_star(P, pair.v0_hat)

    if a.inside:
        case_id = "case2"
    elif c.inside and d2j_min > d2j_eps and sh_min > sh_eps:
        case_id = "case1"
    elif c.inside and d2j_max < -d2j_eps and sh_max < -sh_eps:
        case_id = "case3"
    else:
        case_id = "unclassified"

    gap = verify_zero_gap(P, pair) if c.inside else float("nan")
    return CaseReport(
        case_id=case_id, gap=gap,
        primal_hessian_margin=d2j_min,
        shifted_hessian_margin=sh_min,
        c_star=c.inside, c_star_margin=c.margin,
        b_star=b.inside, b_star_margin=b.margin,
        a_star=a.inside, a_star_margin=a.margin,
    )


def verify_zero_gap(P, pair):
    """J(x0) - J*(vhat, vhat0); zero at every critical pair in C*."""
    if not in_C_star(P, pair.v0_hat).inside:
        raise OutsideCstarError("lifted multiplier is outside C*")
    return primal_value(P, pair.x0) - j_star(P, pair.v_hat, pair.v0_hat)


@dataclass
class ProbeEvidence:
    case_id: str
    r: float
    r1: float
    n_samples: int
    primal_min_violations: int
    primal_max_violations: int
    dual_min_violations: int
    dual_max_violations: int
    dual_excluded: int
    primal_worst: float
    dual_worst: float

    def violations(self):
        """Violation count relevant to the recorded case."""
        if self.case_id in ("case1", "case2"):
            return self.primal_min_violations + self.dual_min_violations
        if self.case_id == "case3":
            return self.primal_max_violations + self.dual_max_violations
        return (self.primal_min_violations + self.primal_max_violations
                + self.dual_min_violations + self.dual_max_violations)


def local_extremality_probe(P, pair, n_samples, rng_seed,
                            case_id=None, bundle=None):
    """Sample balls around x0 and vhat and count extremality violations.

    The primal radius is 0.1 (1 + |x0|) / sqrt(1 + |d2J(x0)|) and the
    dual radius follows the same scaling with the dual Hessian.  Dual
    probes where the inner sup fails are excluded with a counter.
    """
    if bundle is None:
        bundle = build_bundle(P, pair)
    if case_id is None:
        case_id = classify_case(P, pair, bundle).case_id

    x0, v_hat, v0_hat = pair.x0, pair.v_hat, pair.v0_hat
    d2j = primal_hessian(P, x0)
    r = 0.1 * (1.0 + float(np.linalg.norm(x0))) \
        / np.sqrt(1.0 + linalg.spectral_norm_sym(d2j))
    r1 = 0.1 * (1.0 + float(np.linalg.norm(v_hat))) \
        / np.sqrt(1.0 + linalg.spectral_norm_sym(
            linalg.symmetrize(bundle.dual_hessian)))

    j0 = primal_value(P, x0)
    jt0 = j_star(P, v_hat, v0_hat)

    primal_rng = np.random.default_rng([rng_seed, 0])
    xs = linalg.ball_samples(primal_rng, x0, r, n_samples)
    jvals = np.array([primal_value(P, x) for x in xs])
    p_min = int(np.sum(jvals < j0 - PROBE_TOL))
    p_max = int(np.sum(jvals > j0 + PROBE_TOL))

    dual_rng = np.random.default_rng([rng_seed, 1])
    vs = linalg.ball_samples(dual_rng, v_hat, r1, n_samples)
    d_min = d_max = excluded = 0
    dual_worst = 0.0
    for v in vs:
        try:
            val, _ = j_tilde_star(P, v, init=v0_hat)
        except (NoConvergenceError, OutsideCstarError):
            excluded += 1
            continue
        if val < jt0 - PROBE_TOL:
            d_min += 1
        if val > jt0 + PROBE_TOL:
            d_max += 1
        dual_worst = max(dual_worst, abs(val - jt0)
                         if (val < jt0 - PROBE_TOL or val > jt0 + PROBE_TOL)
                         else 0.0)

    primal_worst = 0.0
    if case_id in ("case1", "case2") and p_min:
        primal_worst = float(j0 - np.min(jvals))
    elif case_id == "case3" and p_max:
        primal_worst = float(np.max(jvals) - j0)

    return ProbeEvidence(
        case_id=case_id, r=float(r), r1=float(r1), n_samples=int(n_samples),
        primal_min_violations=p_min, primal_max_violations=p_max,
        dual_min_violations=d_min, dual_max_violations=d_max,
        dual_excluded=excluded,
        primal_worst=primal_worst, dual_worst=dual_worst,
    )


@dataclass
class GlobalCertificate:
    passed: bool
    inf_estimate: float
    j2_value: float
    j2_gap: float
    multistart_ok: bool
    sample_ok: bool
    j2_matches_primal: bool
    convexity_pass_count: int
    convexity_fail_count: int
    convexity_excluded: int
    weak_duality_ok: bool
    n_samples: int


def global_min_certificate(P, pair, n_seeds=32, rng_seed=7):
    """Certify the case-2 conclusion that x0 is the global minimum.

    Checks: (i) J(x0) below every multistart critical point and a coarse
    global sample; (ii) J2*(vhat) equals J(x0); (iii) midpoint convexity
    of J2* on sampled direction pairs; (iv) weak duality
    J2*(vhat) <= J(x) on every sample.
    """
    bundle = build_bundle(P, pair)
    report = classify_case(P, pair, bundle)
    if report.case_id != "case2":
        raise NotCase2Error(f"pair classified as {report.case_id}")

    j0 = primal_value(P, pair.x0)

    # (i) every other critical point and a coarse global sample
    ms = multistart(P, n_seeds, rng_seed)
    ms_values = [primal_value(P, x) for x in ms.points]
    multistart_ok = all(j0 <= v + CERT_SAMPLE_TOL for v in ms_values)

    span = 5.0 * (1.0 + float(np.max(np.abs(pair.x0))))
    if P.n <= 3:
        per_axis = {1: 100001, 2: 317, 3: 47}[P.n]
        axes = [np.linspace(-span, span, per_axis)] * P.n
        mesh = np.meshgrid(*axes, indexing="ij")
        samples = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        rng = np.random.default_rng([rng_seed, 2])
        samples = rng.uniform(-span, span, size=(100000, P.n))
    sample_values = _batch_primal(P, samples)
    sample_ok = bool(np.all(j0 <= sample_values + CERT_SAMPLE_TOL))
    inf_estimate = float(min(np.min(sample_values), j0))

    # (ii) dual value agreement
    j2 = j2_star(P, pair.v_hat, init=pair.v0_hat)
    j2_gap = abs(j2.value - j0)
    j2_matches = j2_gap <= CERT_GAP_TOL * (1.0 + abs(j0))

    # (iii) midpoint convexity of J2*
    rng = np.random.default_rng([rng_seed, 3])
    scale = 0.5 * (1.0 + float(np.max(np.abs(pair.v_hat))))
    pass_count = fail_count = excluded = 0
    for _ in range(100):
        u = pair.v_hat + scale * rng.standard_normal(P.n)
        w = pair.v_hat + scale * rng.standard_normal(P.n)
        try:
            ju = j2_star(P, u, init=pair.v0_hat).value
            jw = j2_star(P, w, init=pair.v0_hat).value
            jm = j2_star(P, 0.5 * (u + w), init=pair.v0_hat).value
        except DualityError:
            excluded += 1
            continue
        tol = J2_CONVEXITY_TOL * (1.0 + max(abs(ju), abs(jw), abs(jm)))
        if jm <= 0.5 * (ju + jw) + tol:
            pass_count += 1
        else:
            fail_count += 1

    # (iv) weak duality against every sampled point
    weak_ok = bool(np.all(j2.value <= sample_values + CERT_SAMPLE_TOL)) \
        and all(j2.value <= v + CERT_SAMPLE_TOL for v in ms_values)

    passed = (multistart_ok and sample_ok and j2_matches
              and fail_count == 0 and pass_count >= 50 and weak_ok)
    return GlobalCertificate(
        passed=passed, inf_estimate=inf_estimate,
        j2_value=j2.value, j2_gap=float(j2_gap),
        multistart_ok=multistart_ok, sample_ok=sample_ok,
        j2_matches_primal=j2_matches,
        convexity_pass_count=pass_count,
        convexity_fail_count=fail_count,
        convexity_excluded=excluded,
        weak_duality_ok=weak_ok,
        n_samples=int(samples.shape[0]),
    )


def _batch_primal(P, xs):
    w = 0.5 * np.einsum("jkl,sk,sl->sj", P.B, xs, xs) + P.c
    return (0.5 * np.einsum("sk,kl,sl->s", xs, P.A, xs)
            + 0.5 * (w ** 2) @ P.gamma + xs @ P.f)


@dataclass
class SweepPoint:
    eps: float
    ok: bool
    error: Optional[str]
    h1_norm: float
    pairs: List[dict] = field(default_factory=list)


@dataclass
class SweepReport:
    eps_list: List[float]
    points: List[SweepPoint]
    slopes: List[dict] = field(default_factory=list)


def epsilon_sweep(P_base, eps_list, rng_seed, n_seeds=16):
    """Re-solve the instance with K = A + eps I across a list of eps.

    The primal functional does not involve K, so critical points match
    across the sweep; matched pairs give per-point records of
    |(K - A) alpha1| = eps |alpha1| and a fitted log-log slope of that
    norm against eps (only over pairs present, with multiplier in C*, at
    every sweep value).
    """
    base_points = multistart(P_base, n_seeds, rng_seed).points
    points = []
    matched = {i: {} for i in range(len(base_points))}
    for eps in eps_list:
        try:
            P_eps = validate_instance(
                P_base.A, P_base.B, P_base.gamma, P_base.c, P_base.f,
                np.asarray(P_base.A) + eps * np.eye(P_base.n),
                coercivity_override=P_base.coercivity_override)
        except ValidationError as exc:
            points.append(SweepPoint(eps=float(eps), ok=False,
                                     error=f"{exc.reason}: {exc}",
                                     h1_norm=float("nan")))
            continue
        sp = SweepPoint(eps=float(eps), ok=True, error=None,
                        h1_norm=1.0 / eps)
        ms = multistart(P_eps, n_seeds, rng_seed)
        for x0, its in zip(ms.points, ms.iterations):
            pair = lift_to_dual(P_eps, x0, newton_iterations=its)
            record = {
                "x0": x0,
                "gap": float("nan"),
                "chain_residual": float("nan"),
                "alpha1_norm": float("nan"),
                "ka_alpha1_norm": float("nan"),
                "in_c_star": False,
                "base_point": None,
            }
            for i, bp in enumerate(base_points):
                if float(np.max(np.abs(bp - x0))) <= 1e-6:
                    record["base_point"] = i
                    break
            if in_C_star(P_eps, pair.v0_hat).inside:
                record["in_c_star"] = True
                record["gap"] = verify_zero_gap(P_eps, pair)
                try:
                    bundle = build_bundle(P_eps, pair)
                except DualityError:
                    bundle = None
                if bundle is not None:
                    record["chain_residual"] = verify_chain_identity(
                        P_eps, pair, bundle)
                    record["alpha1_norm"] = float(
                        np.linalg.norm(bundle.alpha1, "fro"))
                    record["ka_alpha1_norm"] = float(
                        np.linalg.norm(P_eps.K_minus_A @ bundle.alpha1, "fro"))
                    if record["base_point"] is not None:
                        matched[record["base_point"]][float(eps)] = \
                            record["ka_alpha1_norm"]
            sp.pairs.append(record)
        points.append(sp)

    valid_eps = [p.eps for p in points if p.ok]
    slopes = []
    for i, series in matched.items():
        if len(valid_eps) < 2 or any(e not in series for e in valid_eps):
            continue
        norms = np.array([series[e] for e in valid_eps])
        entry = {"base_point": i,
                 "eps": list(valid_eps),
                 "norms": [float(v) for v in norms],
                 "slope": None}
        # norms at roundoff scale mean alpha1 = 0; no slope to fit there
        if np.all(norms > 1e-12):
            slope = np.polyfit(np.log(valid_eps), np.log(norms), 1)[0]
            entry["slope"] = float(slope)
        slopes.append(entry)
    return SweepReport(eps_list=[float(e) for e in eps_list],
                       points=points, slopes=slopes)
