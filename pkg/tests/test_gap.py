import numpy as np
import pytest

from dcquartic import (
    NotCase2Error,
    build_bundle,
    classify_case,
    epsilon_sweep,
    find_critical_pairs,
    generate_instance,
    global_min_certificate,
    lift_to_dual,
    local_extremality_probe,
    primal_value,
    verify_zero_gap,
)
from oracles import grid_min_1d


class TestClassification:
    def test_tri_sqrt2_case1(self, p_tri, sqrt2):
        pair = lift_to_dual(p_tri, [sqrt2])
        rep = classify_case(p_tri, pair, build_bundle(p_tri, pair))
        assert rep.case_id == "case1"
        assert rep.c_star and not rep.a_star
        assert rep.primal_hessian_margin == pytest.approx(2.0)

    def test_min_case2(self, p_min):
        pair = lift_to_dual(p_min, [0.0])
        rep = classify_case(p_min, pair, build_bundle(p_min, pair))
        assert rep.case_id == "case2"
        assert rep.a_star and rep.a_star_margin == pytest.approx(2.0)

    def test_tri_zero_case3(self, p_tri):
        pair = lift_to_dual(p_tri, [0.0])
        rep = classify_case(p_tri, pair, build_bundle(p_tri, pair))
        assert rep.case_id == "case3"
        assert rep.primal_hessian_margin == pytest.approx(-1.0)


class TestZeroGap:
    def test_hand_pairs(self, p_tri, p_min, sqrt2):
        for P, x in ((p_tri, [sqrt2]), (p_min, [0.0]), (p_tri, [0.0])):
            pair = lift_to_dual(P, x)
            assert abs(verify_zero_gap(P, pair)) <= 1e-12

    def test_random_ensemble(self):
        rng = np.random.default_rng(1)
        tested = 0
        for i in range(25):
            n = int(rng.integers(1, 7))
            N = int(rng.integers(1, 5))
            P = generate_instance(n, N, [40_000, i])
            for pair in find_critical_pairs(P, 8, 7):
                if not pair.converged:
                    continue
                try:
                    gap = verify_zero_gap(P, pair)
                except Exception:
                    continue
                j0 = primal_value(P, pair.x0)
                assert abs(gap) <= 1e-8 * (1.0 + abs(j0))
                tested += 1
        assert tested >= 25


class TestProbes:
    def test_case1_no_violations(self, p_tri, sqrt2):
        pair = lift_to_dual(p_tri, [sqrt2])
        ev = local_extremality_probe(p_tri, pair, 1000, 7)
        assert ev.case_id == "case1"
        assert ev.primal_min_violations == 0
        assert ev.dual_min_violations == 0

    def test_case3_no_violations(self, p_tri):
        pair = lift_to_dual(p_tri, [0.0])
        ev = local_extremality_probe(p_tri, pair, 1000, 7)
        assert ev.case_id == "case3"
        assert ev.primal_max_violations == 0
        assert ev.dual_max_violations == 0

    def test_deterministic(self, p_tri, sqrt2):
        pair = lift_to_dual(p_tri, [sqrt2])
        a = local_extremality_probe(p_tri, pair, 200, 11)
        b = local_extremality_probe(p_tri, pair, 200, 11)
        assert a == b

    def test_unclassified_saddle_reports_violations(self):
        # find a saddle-adjacent pair: indefinite Hessian keeps it
        # unclassified, and the probe reports violations on both sides
        found = False
        for i in range(20):
            P = generate_instance(2, 2, [43_000, i])
            for pair in find_critical_pairs(P, 10, 7):
                try:
                    bundle = build_bundle(P, pair)
                except Exception:
                    continue
                rep = classify_case(P, pair, bundle)
                if rep.case_id != "unclassified":
                    continue
                margins = np.linalg.eigvalsh(
                    0.5 * (bundle.dual_hessian + bundle.dual_hessian.T))
                if margins[0] > -1e-3 or margins[-1] < 1e-3:
                    continue  # want a clearly indefinite saddle
                ev = local_extremality_probe(P, pair, 400, 7,
                                             case_id=rep.case_id,
                                             bundle=bundle)
                assert ev.case_id == "unclassified"
                assert ev.primal_min_violations > 0
                assert ev.primal_max_violations > 0
                found = True
                break
            if found:
                break
        assert found


class TestGlobalCertificate:
    def test_p_min_certificate(self, p_min):
        pair = lift_to_dual(p_min, [0.0])
        cert = global_min_certificate(p_min, pair)
        assert cert.passed
        assert cert.inf_estimate == pytest.approx(0.5, abs=1e-12)
        # independent 1-d grid oracle over [-5, 5]
        assert abs(grid_min_1d(p_min) - primal_value(p_min, pair.x0)) <= 1e-8
        assert cert.j2_gap <= 1e-10
        assert cert.convexity_fail_count == 0
        assert cert.weak_duality_ok

    def test_not_case2(self, p_tri, sqrt2):
        pair = lift_to_dual(p_tri, [sqrt2])
        with pytest.raises(NotCase2Error):
            global_min_certificate(p_tri, pair)

    def test_weak_duality_spot_value(self, p_min):
        # J2*(vhat) = 1/2 <= J(1) = 1.625
        assert primal_value(p_min, [1.0]) == pytest.approx(1.625)

    def test_ensemble_case2_certificates(self):
        # every case2 pair in a small random ensemble certifies globally
        rng = np.random.default_rng(2)
        certified = 0
        for i in range(30):
            if certified >= 8:
                break
            n = int(rng.integers(1, 4))
            N = int(rng.integers(1, 4))
            P = generate_instance(n, N, [42_000, i])
            for pair in find_critical_pairs(P, 10, 7):
                if not pair.converged:
                    continue
                try:
                    bundle = build_bundle(P, pair)
                except Exception:
                    continue
                if classify_case(P, pair, bundle).case_id != "case2":
                    continue
                cert = global_min_certificate(P, pair)
                assert cert.passed, (i, pair.x0, cert)
                certified += 1
        assert certified >= 8


class TestEpsilonSweep:
    def test_tri_norms_vanish(self, p_tri):
        rep = epsilon_sweep(p_tri, [0.1, 0.01, 0.001], 7)
        for point in rep.points:
            assert point.ok
            for rec in point.pairs:
                if rec["in_c_star"]:
                    assert rec["ka_alpha1_norm"] <= 1e-12
        # n = N = 1 means alpha1 = 0: no slope is fitted
        assert all(e["slope"] is None for e in rep.slopes)

    def test_eps_zero_rejected(self, p_tri):
        rep = epsilon_sweep(p_tri, [0.0], 7)
        assert not rep.points[0].ok
        assert "K-minus-A-not-PD" in rep.points[0].error

    def test_h1_norm_tracks_eps(self, p_tri):
        rep = epsilon_sweep(p_tri, [0.1, 0.001], 7)
        assert rep.points[0].h1_norm == pytest.approx(10.0)
        assert rep.points[1].h1_norm == pytest.approx(1000.0)

    def test_gap_and_chain_stable_across_sweep(self):
        P = generate_instance(2, 2, [41_000, 0], f_scale=0.2,
                              c_range=(0.1, 0.5))
        rep = epsilon_sweep(P, [0.1, 0.01, 0.001], 7)
        seen = 0
        for point in rep.points:
            assert point.ok
            for rec in point.pairs:
                if rec["in_c_star"]:
                    assert abs(rec["gap"]) <= 1e-8
                    if np.isfinite(rec["chain_residual"]):
                        assert rec["chain_residual"] <= 1e-8
                    seen += 1
        assert seen >= 3
