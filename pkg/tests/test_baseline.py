import numpy as np
import pytest

from dcquartic import (
    SingularMatrixError,
    correspondence_report,
    generate_instance,
    j1_star_gradient,
    j1_star_hessian,
    j1_star_value,
    lift_to_dual,
    search_correspondence_counterexample,
    validate_instance,
)


class TestValues:
    def test_hand_values(self, p_tri, p_min):
        assert j1_star_value(p_min, [1.0]) == pytest.approx(-0.5)
        assert j1_star_value(p_tri, [2.0]) == pytest.approx(2.0)

    def test_singular_matrix(self, p_tri):
        # A + v0 B = -1 + 1 = 0
        with pytest.raises(SingularMatrixError):
            j1_star_value(p_tri, [1.0])


class TestGradient:
    def test_hand_values(self, p_tri, p_min):
        assert j1_star_gradient(p_min, [1.0]) == pytest.approx([0.0])
        assert j1_star_gradient(p_tri, [2.0]) == pytest.approx([2.0])
        assert j1_star_gradient(p_min, [0.0]) == pytest.approx([-1.0])

    def test_matches_fd(self):
        rng = np.random.default_rng(3)
        tested = 0
        for i in range(40):
            n = int(rng.integers(1, 5))
            N = int(rng.integers(1, 4))
            P = generate_instance(n, N, [50_000, i])
            v0 = rng.normal(scale=0.8, size=N)
            try:
                g = j1_star_gradient(P, v0)
            except SingularMatrixError:
                continue
            fd = np.zeros(N)
            bad = False
            for j in range(N):
                h = 1e-6 * (1.0 + abs(v0[j]))
                vp = v0.copy(); vp[j] += h
                vm = v0.copy(); vm[j] -= h
                try:
                    fd[j] = (j1_star_value(P, vp) - j1_star_value(P, vm)) / (2 * h)
                except SingularMatrixError:
                    bad = True
            if bad:
                continue
            assert np.max(np.abs(g - fd)) <= 1e-5 * (1.0 + np.max(np.abs(g)))
            tested += 1
        assert tested >= 25


class TestHessian:
    def test_hand_values(self, p_tri, p_min):
        assert j1_star_hessian(p_min, [1.0])[0, 0] == pytest.approx(1.0)
        assert j1_star_hessian(p_tri, [2.0])[0, 0] == pytest.approx(1.0)

    def test_f_zero_gives_diag(self):
        P = validate_instance(np.eye(2), [np.eye(2), np.diag([1.0, -1.0])],
                              [2.0, 4.0], [0.1, 0.2], np.zeros(2), 3.0)
        H = j1_star_hessian(P, [0.3, 0.1])
        assert np.array_equal(H, np.diag([0.5, 0.25]))

    def test_matches_fd(self):
        rng = np.random.default_rng(4)
        tested = 0
        for i in range(30):
            n = int(rng.integers(1, 4))
            N = int(rng.integers(1, 4))
            P = generate_instance(n, N, [51_000, i])
            v0 = rng.normal(scale=0.8, size=N)
            try:
                H = j1_star_hessian(P, v0)
            except SingularMatrixError:
                continue
            fd = np.zeros((N, N))
            bad = False
            for j in range(N):
                h = 1e-6 * (1.0 + abs(v0[j]))
                vp = v0.copy(); vp[j] += h
                vm = v0.copy(); vm[j] -= h
                try:
                    fd[:, j] = (j1_star_gradient(P, vp)
                                - j1_star_gradient(P, vm)) / (2 * h)
                except SingularMatrixError:
                    bad = True
            if bad:
                continue
            rel = (np.linalg.norm(H - fd, "fro")
                   / (1.0 + np.linalg.norm(H, "fro")))
            assert rel <= 1e-4
            tested += 1
        assert tested >= 20

    def test_symmetric(self):
        P = generate_instance(3, 3, [52_000, 0])
        H = j1_star_hessian(P, [0.2, -0.1, 0.3])
        assert np.array_equal(H, H.T)


class TestCorrespondence:
    def test_p_min_pair_agrees(self, p_min):
        pair = lift_to_dual(p_min, [0.0])
        rep = correspondence_report(p_min, pair)
        assert rep.correspondence
        assert rep.ab_matrix_pd
        assert rep.primal_hessian_inertia == (1, 0, 0)
        assert rep.baseline_hessian_inertia == (1, 0, 0)

    def test_p_tri_at_zero_counterexample(self, p_tri):
        # d2J = -1 (negative) but the baseline Hessian is [1] (positive);
        # the sign caveat A + v0 B = -1 < 0 explains the failure
        pair = lift_to_dual(p_tri, [0.0])
        rep = correspondence_report(p_tri, pair)
        assert not rep.correspondence
        assert not rep.ab_matrix_pd
        assert rep.primal_hessian_inertia == (0, 1, 0)
        assert rep.baseline_hessian_inertia == (1, 0, 0)

    def test_scalar_pd_caveat_always_agrees(self):
        # every converged n = N = 1 pair with A + v0 B > 0 must agree
        from dcquartic import find_critical_pairs
        rng = np.random.default_rng(5)
        tested = 0
        for i in range(25):
            P = generate_instance(1, 1, [53_000, i])
            for pair in find_critical_pairs(P, 6, 7):
                if not pair.converged:
                    continue
                try:
                    rep = correspondence_report(P, pair)
                except Exception:
                    continue
                if rep.ab_matrix_pd:
                    assert rep.correspondence
                    tested += 1
        assert tested >= 10

    def test_search_finds_counterexample(self):
        hit = search_correspondence_counterexample(2, 1, 30, 60_000)
        assert hit is not None
        assert not hit.report.correspondence
