import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcquartic import (
    DimensionMismatchError,
    ValidationError,
    g1_value,
    g2_value,
    generate_instance,
    primal_gradient,
    primal_hessian,
    primal_value,
    validate_instance,
)
from dcquartic.problem import fd_gradient, fd_hessian


class TestValidation:
    def test_hand_instance_valid(self, p_tri):
        assert p_tri.n == 1 and p_tri.N == 1
        assert p_tri.kma_min_eig == pytest.approx(2.0)
        assert p_tri.coercivity_margin > 0.0

    def test_k_minus_a_not_pd(self):
        with pytest.raises(ValidationError) as err:
            validate_instance([-1.0], [[1.0]], [1.0], [0.0], [0.0], -2.0)
        assert err.value.reason == "K-minus-A-not-PD"

    def test_nonpositive_gamma(self):
        with pytest.raises(ValidationError) as err:
            validate_instance([-1.0], [[1.0]], [0.0], [0.0], [0.0], 1.0)
        assert err.value.reason == "nonpositive-gamma"

    def test_asymmetric_matrix(self):
        A = [[0.0, 1.0], [0.5, 0.0]]
        B = [[[1.0, 0.0], [0.0, 1.0]]]
        with pytest.raises(ValidationError) as err:
            validate_instance(A, B, [1.0], [0.0], [0.0, 0.0], 3.0)
        assert err.value.reason == "asymmetric-matrix"

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            validate_instance([[1.0, 0.0], [0.0, 1.0]], [[1.0]], [1.0],
                              [0.0], [0.0], 2.0)

    def test_coercivity_heuristic(self):
        # B = 0 kills every quartic direction, so the heuristic fails
        with pytest.raises(ValidationError) as err:
            validate_instance([1.0], [[0.0]], [1.0], [0.0], [0.0], 2.0)
        assert err.value.reason == "coercivity-heuristic-failed"
        P = validate_instance([1.0], [[0.0]], [1.0], [0.0], [0.0], 2.0,
                              coercivity_override=True)
        assert P.coercivity_override
        assert P.coercivity_margin == 0.0

    def test_instance_is_immutable(self, p_tri):
        with pytest.raises(ValueError):
            p_tri.A[0, 0] = 5.0


class TestPrimalOps:
    def test_value_examples(self, p_tri, p_min, sqrt2):
        assert primal_value(p_tri, [0.0]) == 0.0
        assert primal_value(p_tri, [sqrt2]) == pytest.approx(-0.5, abs=1e-12)
        assert primal_value(p_min, [0.0]) == pytest.approx(0.5, abs=1e-12)

    def test_gradient_examples(self, p_tri, p_min, sqrt2):
        assert primal_gradient(p_tri, [0.0]) == pytest.approx(0.0)
        assert primal_gradient(p_tri, [sqrt2]) == pytest.approx(0.0, abs=1e-12)
        assert primal_gradient(p_min, [1.0]) == pytest.approx(2.5)

    def test_hessian_examples(self, p_tri, p_min, sqrt2):
        assert primal_hessian(p_tri, [0.0])[0, 0] == pytest.approx(-1.0)
        assert primal_hessian(p_tri, [sqrt2])[0, 0] == pytest.approx(2.0)
        assert primal_hessian(p_min, [0.0])[0, 0] == pytest.approx(2.0)

    def test_g1_g2_examples(self, p_tri, p_min, sqrt2):
        assert g1_value(p_tri, [0.0]) == 0.0
        assert g2_value(p_tri, [sqrt2], [0.0]) == pytest.approx(1.5)
        assert g2_value(p_min, [0.0], [1.0]) == pytest.approx(2.0)

    def test_dimension_checks(self, p_tri):
        with pytest.raises(DimensionMismatchError):
            primal_value(p_tri, [1.0, 2.0])
        with pytest.raises(DimensionMismatchError):
            g2_value(p_tri, [1.0], [1.0, 2.0])


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(42)
    out = []
    for i in range(25):
        n = int(rng.integers(1, 5))
        N = int(rng.integers(1, 4))
        P = generate_instance(n, N, [10_000, i])
        for _ in range(4):
            out.append((P, rng.normal(scale=2.0, size=n)))
    return out


class TestConsistency:
    """Finite-difference and decomposition invariants over a random
    ensemble of instances and evaluation points."""

    def test_gradient_matches_fd(self, samples):
        worst = 0.0
        for P, x in samples:
            g = primal_gradient(P, x)
            g_fd = fd_gradient(P, x)
            err = np.max(np.abs(g - g_fd)) / (1.0 + np.max(np.abs(g)))
            worst = max(worst, err)
        assert worst <= 1e-5

    def test_hessian_matches_fd(self, samples):
        worst = 0.0
        for P, x in samples:
            H = primal_hessian(P, x)
            H_fd = fd_hessian(P, x)
            err = (np.linalg.norm(H - H_fd, "fro")
                   / (1.0 + np.linalg.norm(H, "fro")))
            worst = max(worst, err)
        assert worst <= 1e-4

    def test_hessian_exactly_symmetric(self, samples):
        for P, x in samples:
            H = primal_hessian(P, x)
            assert np.array_equal(H, H.T)

    def test_decomposition_identity(self, samples):
        # J(x) = -G1(x) + G2(x, 0)
        for P, x in samples:
            j = primal_value(P, x)
            split = -g1_value(P, x) + g2_value(P, x, np.zeros(P.N))
            assert abs(j - split) <= 1e-10 * (1.0 + abs(j))

    def test_g1_midpoint_convexity(self, samples):
        rng = np.random.default_rng(3)
        for P, x in samples[:40]:
            y = rng.normal(scale=2.0, size=P.n)
            mid = g1_value(P, 0.5 * (x + y))
            avg = 0.5 * (g1_value(P, x) + g1_value(P, y))
            assert mid <= avg + 1e-9 * (1.0 + abs(avg))


@given(x=st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=1),
       a=st.floats(-2.0, 2.0), gamma=st.floats(0.1, 3.0),
       c=st.floats(-1.0, 1.0), f=st.floats(-1.0, 1.0))
@settings(max_examples=50, deadline=None, derandomize=True)
def test_scalar_value_closed_form(x, a, gamma, c, f):
    P = validate_instance([a], [[1.0]], [gamma], [c], [f], abs(a) + 1.0)
    t = x[0]
    expected = 0.5 * a * t * t + 0.5 * gamma * (0.5 * t * t + c) ** 2 + f * t
    assert primal_value(P, x) == pytest.approx(expected, abs=1e-12, rel=1e-12)


@given(x=st.floats(-10.0, 10.0), a=st.floats(-2.0, 2.0),
       b=st.floats(-2.0, 2.0).filter(lambda v: abs(v) > 1e-3),
       gamma=st.floats(0.1, 3.0), c=st.floats(-1.0, 1.0),
       f=st.floats(-1.0, 1.0))
@settings(max_examples=100, deadline=None, derandomize=True)
def test_decomposition_identity_scalar(x, a, b, gamma, c, f):
    # J(x) = -G1(x) + G2(x, 0) for every admissible scalar instance
    P = validate_instance([a], [[b]], [gamma], [c], [f], abs(a) + 1.0)
    j = primal_value(P, [x])
    split = -g1_value(P, [x]) + g2_value(P, [x], [0.0])
    assert abs(j - split) <= 1e-10 * (1.0 + abs(j))
