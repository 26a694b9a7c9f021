import math

import numpy as np
import pytest

from abkernels.divergences import (
    DivergenceBranch,
    DivergenceSpec,
    DomainError,
    RangeError,
    ab_divergence,
    abs_divergence,
    branch_select,
    dt_squared,
    symmetrize_type1,
)

import oracle

REL = 1e-12


def rel_err(got, want):
    return abs(got - want) / max(1.0, abs(want))


class TestBranchSelect:
    @pytest.mark.parametrize("alpha,beta,expected", [
        (1, 1, DivergenceBranch.GENERIC),
        (1, 0, DivergenceBranch.ALPHA_ONLY),
        (1, -1 + 1e-15, DivergenceBranch.SKEW_PAIR),
        (0, 2, DivergenceBranch.BETA_ONLY),
        (0, 0, DivergenceBranch.BOTH_ZERO),
        (1e-13, -1e-13, DivergenceBranch.BOTH_ZERO),
        (-0.5, 0.5, DivergenceBranch.SKEW_PAIR),
        (2, -0.5, DivergenceBranch.GENERIC),
    ])
    def test_tags(self, alpha, beta, expected):
        assert branch_select(alpha, beta, 1e-12) is expected

    def test_exactly_one_tag(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            a, b = rng.uniform(-3, 3, size=2)
            assert isinstance(branch_select(a, b), DivergenceBranch)

    def test_eps_param_must_be_positive(self):
        with pytest.raises(DomainError):
            branch_select(1, 1, eps_param=0)

    def test_nonfinite_params_rejected(self):
        with pytest.raises(DomainError):
            branch_select(np.nan, 1)


class TestAbDivergence:
    def test_generic_example(self):
        assert ab_divergence(1, 1, 2, 1) == pytest.approx(0.5, abs=1e-15)

    def test_alpha_only_example(self):
        # 2 ln 2 - 1
        assert rel_err(ab_divergence(1, 0, 2, 1), 0.38629436111989062) < REL

    def test_skew_example(self):
        # ln(1/2) + 2 - 1
        assert rel_err(ab_divergence(1, -1, 2, 1), 0.30685281944005469) < REL

    @pytest.mark.parametrize("alpha,beta", [(1, 1), (0.5, -1), (1, 0),
                                            (0, 1.3), (2, -2), (0, 0)])
    def test_identity(self, alpha, beta):
        for x in (0.2, 1.0, 3.7):
            assert ab_divergence(alpha, beta, x, x) == 0.0

    def test_nonnegative_random(self):
        rng = np.random.default_rng(1)
        for _ in range(2000):
            a, b = rng.uniform(-3, 3, size=2)
            x, y = np.exp(rng.uniform(-2, 2, size=2))
            assert ab_divergence(a, b, x, y) >= 0.0

    def test_matches_oracle_random(self):
        # parameters and the x/y ratio stay clear of the singular lines so
        # the double-precision evaluation can be compared this tightly
        rng = np.random.default_rng(2)
        for _ in range(300):
            a, b = rng.uniform(-2.5, 2.5, size=2)
            if min(abs(a), abs(b), abs(a + b)) < 0.1:
                continue
            y = float(np.exp(rng.uniform(-1.2, 1.2)))
            x = y * float(np.exp(rng.choice([-1, 1]) * rng.uniform(0.3, 1.5)))
            want = float(oracle.ab(a, b, x, y))
            assert rel_err(ab_divergence(a, b, x, y), want) < 1e-10

    @pytest.mark.parametrize("branch_params", [(1, 0), (0, 1), (1, -1), (0, 0)])
    def test_special_branches_match_oracle(self, branch_params):
        a, b = branch_params
        for x, y in [(2, 1), (0.3, 1.7), (5, 0.2)]:
            want = float(oracle.ab(a, b, x, y))
            assert rel_err(ab_divergence(a, b, x, y), want) < 1e-11

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ab_divergence(1, 1, 0.0, 1.0)
        with pytest.raises(DomainError):
            ab_divergence(1, 1, 1.0, -2.0)
        with pytest.raises(DomainError):
            ab_divergence(1, 1, np.inf, 1.0)

    def test_overflow_names_term(self):
        with pytest.raises(RangeError, match="x\\*\\*alpha"):
            ab_divergence(3, 1, 1e300, 1.0)

    def test_array_broadcast(self):
        x = np.array([2.0, 3.0, 0.5])
        got = ab_divergence(1, 0, x, 1.0)
        want = [ab_divergence(1, 0, float(v), 1.0) for v in x]
        np.testing.assert_allclose(got, want, rtol=1e-15)


class TestAbsDivergence:
    @pytest.mark.parametrize("args,want", [
        ((1, 1, 2, 1), 1.0),
        ((0.5, 1, 4, 1), 6.0),
        ((1, 0, 2, 1), 0.69314718055994531),
        ((1, -1, 2, 1), 0.5),
        ((0.5, -1, 2, 1), 0.41421356237309505),
    ])
    def test_examples(self, args, want):
        assert rel_err(abs_divergence(*args), want) < REL

    def test_identity(self):
        for params in [(1, 1), (0.5, -1), (1, 0), (0, 2), (1, -1), (0, 0)]:
            assert abs_divergence(*params, 1.37, 1.37) == 0.0

    def test_symmetry_exact(self):
        rng = np.random.default_rng(3)
        for params in [(1.2, 0.7), (0.5, -1), (1, 0), (0, 2), (1, -1), (0, 0)]:
            for _ in range(200):
                x, y = np.exp(rng.uniform(-2, 2, size=2))
                assert abs_divergence(*params, x, y) == \
                    abs_divergence(*params, y, x)

    def test_type1_identity_generic(self):
        # the symmetric form equals the sum of both asymmetric orientations
        rng = np.random.default_rng(4)
        for _ in range(500):
            a, b = rng.uniform(-3, 3, size=2)
            if min(abs(a), abs(b), abs(a + b)) < 0.1:
                continue
            x = float(np.exp(rng.uniform(-1.5, 1.5)))
            y = x * float(np.exp(rng.choice([-1, 1]) * rng.uniform(0.1, 1.5)))
            lhs = abs_divergence(a, b, x, y)
            rhs = 2.0 * symmetrize_type1(a, b, x, y)
            assert rel_err(lhs, rhs) < 1e-12

    @pytest.mark.parametrize("params", [(1.3, 0), (0, 0.8), (0.9, -0.9)])
    def test_type1_identity_special_branches(self, params):
        for x, y in [(2, 1), (0.4, 1.9), (3.2, 0.7)]:
            lhs = abs_divergence(*params, x, y)
            rhs = 2.0 * symmetrize_type1(*params, x, y)
            assert rel_err(lhs, rhs) < 1e-12

    def test_both_zero_uses_halved_square(self):
        # (log x - log y)^2 / 2 exactly; twice the type-1 symmetrization
        # does NOT apply at this isolated parameter point
        want = 0.5 * (math.log(2.0)) ** 2
        assert abs_divergence(0, 0, 2, 1) == pytest.approx(want, rel=1e-15)

    def test_skew_modes(self):
        base = abs_divergence(1, -1, 2, 1)
        extra = abs_divergence(1, -1, 2, 1, skew_mode="jeffreys")
        assert extra == pytest.approx(base + (2 - 1) * math.log(2), rel=1e-12)
        assert rel_err(extra, float(oracle.abs_(1, -1, 2, 1, "jeffreys"))) < REL
        with pytest.raises(DomainError):
            abs_divergence(1, -1, 2, 1, skew_mode="bogus")

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            a, b = rng.uniform(-2.5, 2.5, size=2)
            if min(abs(a), abs(b), abs(a + b)) < 0.1:
                continue
            y = float(np.exp(rng.uniform(-1.2, 1.2)))
            x = y * float(np.exp(rng.choice([-1, 1]) * rng.uniform(0.3, 1.5)))
            want = float(oracle.abs_(a, b, x, y))
            assert rel_err(abs_divergence(a, b, x, y), want) < 1e-12

    def test_homogeneity(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            a, b = rng.uniform(-3, 3, size=2)
            c = rng.uniform(0.05, 10.0)
            x, y = np.exp(rng.uniform(-1.5, 1.5, size=2))
            lhs = abs_divergence(a, b, c * x, c * y)
            rhs = c ** (a + b) * abs_divergence(a, b, x, y)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))

    @pytest.mark.parametrize("alpha", [0.7, -1.4, 2.2])
    def test_branch_continuity_beta_to_zero(self, alpha):
        for x, y in [(2.4, 0.7), (0.3, 1.1)]:
            near = abs_divergence(alpha, 1e-7, x, y)
            limit = abs_divergence(alpha, 0.0, x, y)
            assert rel_err(near, limit) < 1e-5

    def test_branch_continuity_alpha_to_zero(self):
        near = abs_divergence(1e-7, 1.3, 2.4, 0.7)
        limit = abs_divergence(0.0, 1.3, 2.4, 0.7)
        assert rel_err(near, limit) < 1e-5

    def test_branch_continuity_skew(self):
        near = abs_divergence(0.9, -0.9 + 1e-7, 2.4, 0.7)
        limit = abs_divergence(0.9, -0.9, 2.4, 0.7)
        assert rel_err(near, limit) < 1e-5


class TestDtSquared:
    @pytest.mark.parametrize("args,want", [
        ((0.5, 4, 1), 2.0),
        ((1, 4, 1), 4.5),
        ((-1, 2, 1), 0.125),
    ])
    def test_examples(self, args, want):
        assert dt_squared(*args) == pytest.approx(want, rel=1e-14)

    def test_identity_and_symmetry(self):
        for t in (-1, -0.5, 0, 0.5, 1, 2.3):
            assert dt_squared(t, 0.8, 0.8) == 0.0
            assert dt_squared(t, 2.0, 0.3) == dt_squared(t, 0.3, 2.0)

    def test_homogeneity_2t(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            t = rng.uniform(-2, 2)
            c = rng.uniform(0.05, 10.0)
            x, y = np.exp(rng.uniform(-1.5, 1.5, size=2))
            lhs = dt_squared(t, c * x, c * y)
            rhs = c ** (2 * t) * dt_squared(t, x, y)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))

    def test_continuity_at_zero(self):
        near = dt_squared(1e-7, 2.4, 0.7)
        limit = dt_squared(0.0, 2.4, 0.7)
        assert rel_err(near, limit) < 1e-5

    def test_family_bridge(self):
        # dt_squared(t) is half the symmetric divergence at alpha = beta = t
        rng = np.random.default_rng(8)
        for _ in range(300):
            t = rng.uniform(-2, 2)
            if abs(t) < 1e-3:
                continue
            x, y = np.exp(rng.uniform(-1.5, 1.5, size=2))
            lhs = dt_squared(t, x, y)
            rhs = 0.5 * abs_divergence(t, t, x, y)
            assert rel_err(lhs, rhs) < 1e-12

    def test_matches_oracle(self):
        for t in (-1.7, -0.5, 0.5, 1.9):
            for x, y in [(2, 1), (0.3, 1.7)]:
                assert rel_err(dt_squared(t, x, y),
                               float(oracle.dt(t, x, y))) < 1e-11


class TestSymmetrizeType1:
    def test_examples(self):
        assert symmetrize_type1(1, 1, 2, 1) == pytest.approx(0.5, rel=1e-15)
        assert rel_err(symmetrize_type1(1, 0, 2, 1),
                       0.34657359027997265) < REL
        assert symmetrize_type1(2, 0.3, 1.1, 1.1) == 0.0


class TestDivergenceSpec:
    def test_constructors_and_labels(self):
        assert DivergenceSpec.ab(1, 2).label() == "ab:1,2"
        assert DivergenceSpec.abs(0.5, -1).label() == "abs:0.5,-1"
        assert DivergenceSpec.dt(-0.5).label() == "dt:-0.5"

    def test_homogeneity_degree(self):
        assert DivergenceSpec.abs(0.5, 0.5).homogeneity == 1.0
        assert DivergenceSpec.dt(-0.5).homogeneity == -1.0

    def test_validation(self):
        with pytest.raises(DomainError):
            DivergenceSpec("abs", alpha=1.0)
        with pytest.raises(DomainError):
            DivergenceSpec("dt", t=np.nan)
        with pytest.raises(DomainError):
            DivergenceSpec("nope", alpha=1.0, beta=1.0)

    def test_evaluate_dispatch(self):
        assert DivergenceSpec.ab(1, 0).evaluate(2, 1) == \
            ab_divergence(1, 0, 2, 1)
        assert DivergenceSpec.dt(1).evaluate(4, 1) == dt_squared(1, 4, 1)
