import math

import numpy as np
import pytest

from abkernels.divergences import DivergenceSpec
from abkernels.kernels import (
    GramMatrix,
    KernelSpec,
    UnsupportedSpecError,
    cpd_check,
    divergence_gram,
    gaussian_from_divergence,
    gaussian_kernel,
    gram,
    kernel_from_divergence,
    kernel_rows,
    lemma_gram,
    probe_hilbertianity,
    psd_check,
    sample_densities,
)
from abkernels.measures import (
    SingularAtomError,
    ValidationError,
    divergence_measures,
    validate_density,
)

P = validate_density([0.5, 0.5])
Q = validate_density([0.25, 0.75])
HELLINGER = DivergenceSpec.abs(0.5, 0.5)


class TestKernelSpec:
    def test_sigma_required_iff_gaussian(self):
        KernelSpec(HELLINGER, "gaussian", 0.5)
        with pytest.raises(ValidationError):
            KernelSpec(HELLINGER, "gaussian")
        with pytest.raises(ValidationError):
            KernelSpec(HELLINGER, "gaussian", -1.0)
        with pytest.raises(ValidationError):
            KernelSpec(HELLINGER, "lemma-pd", 0.5)
        with pytest.raises(ValidationError):
            KernelSpec(HELLINGER, "rbf")


class TestKernelFromDivergence:
    def test_hellinger_example(self):
        got = kernel_from_divergence(HELLINGER, P, Q)
        assert got == pytest.approx(3.8637033051562731, rel=1e-14)

    def test_euclidean_example(self):
        got = kernel_from_divergence(DivergenceSpec.abs(1, 1), P, Q)
        assert got == pytest.approx(0.5, abs=1e-15)

    def test_dt_example(self):
        got = kernel_from_divergence(DivergenceSpec.dt(1), P, Q)
        assert got == pytest.approx(0.25, abs=1e-15)

    def test_self_kernel_normalized_hellinger(self):
        assert kernel_from_divergence(HELLINGER, P, P) == \
            pytest.approx(4.0, rel=1e-15)

    def test_jeffreys_closed_form(self):
        got = kernel_from_divergence(DivergenceSpec.abs(1, 0), P, Q)
        assert got == pytest.approx(-1.1373265360835137, rel=1e-14)

    def test_negative_t_closed_forms(self):
        # K_t = sum w (p q)^t / (2 t^2), printed for t = -1 and t = -1/2
        got = kernel_from_divergence(DivergenceSpec.dt(-1), P, Q)
        assert got == pytest.approx(0.5 * (1 / 0.125 + 1 / 0.375), rel=1e-14)
        got = kernel_from_divergence(DivergenceSpec.dt(-0.5), P, Q)
        want = 2.0 * (1 / math.sqrt(0.125) + 1 / math.sqrt(0.375))
        assert got == pytest.approx(want, rel=1e-14)

    def test_unsupported_specs(self):
        for spec in (DivergenceSpec.abs(0.5, -1), DivergenceSpec.abs(0, 0),
                     DivergenceSpec.abs(0, 1), DivergenceSpec.dt(0),
                     DivergenceSpec.abs(2, 0)):
            with pytest.raises(UnsupportedSpecError):
                kernel_from_divergence(spec, P, Q)

    def test_closed_forms_match_lemma_construction(self):
        # where the zero-measure divergence is finite both routes agree
        rng = np.random.default_rng(0)
        closed = {
            (0.5, 0.5): lambda p, q, w: 4 * np.sum(np.sqrt(p * q) * w),
            (1.0, 1.0): lambda p, q, w: np.sum(p * q * w),
            (0.5, 1.0): lambda p, q, w: np.sum((q * np.sqrt(p)
                                                + p * np.sqrt(q)) * w),
        }
        for (a, b), row in closed.items():
            spec = DivergenceSpec.abs(a, b)
            for _ in range(100):
                V = rng.exponential(size=(2, 5))
                w = rng.uniform(0.5, 2.0, size=5)
                A, B = validate_density(V[0], w), validate_density(V[1], w)
                got = kernel_from_divergence(spec, A, B)
                want = row(V[0], V[1], w)
                assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
        for t in (0.5, 1.0, 2.0):
            spec = DivergenceSpec.dt(t)
            for _ in range(100):
                V = rng.exponential(size=(2, 5))
                A, B = validate_density(V[0]), validate_density(V[1])
                want = np.sum((V[0] * V[1]) ** t) / (2 * t * t)
                got = kernel_from_divergence(spec, A, B)
                assert abs(got - want) <= 1e-10 * max(1.0, abs(want))

    def test_zero_atom_with_negative_t_raises(self):
        A = validate_density([0.0, 1.0])
        with pytest.raises(SingularAtomError):
            kernel_from_divergence(DivergenceSpec.dt(-1), A, Q)


class TestGaussianKernel:
    def test_identity_is_one(self):
        assert gaussian_kernel(HELLINGER, 0.5, P, P) == 1.0

    def test_euclidean_example(self):
        got = gaussian_kernel(DivergenceSpec.abs(1, 1), 0.5, P, Q)
        assert got == pytest.approx(0.77880078307140487, rel=1e-14)

    def test_large_sigma_limit(self):
        assert gaussian_kernel(HELLINGER, 1e9, P, Q) == \
            pytest.approx(1.0, abs=1e-12)

    def test_monotone_decreasing_in_divergence(self):
        d1 = divergence_measures(HELLINGER, P, Q)
        R = validate_density([0.05, 0.95])
        d2 = divergence_measures(HELLINGER, P, R)
        assert d2 > d1
        assert gaussian_kernel(HELLINGER, 0.7, P, R) < \
            gaussian_kernel(HELLINGER, 0.7, P, Q)

    def test_sigma_validation(self):
        with pytest.raises(ValidationError):
            gaussian_kernel(HELLINGER, 0.0, P, Q)


class TestGram:
    def test_single_density(self):
        G = gram(KernelSpec(HELLINGER, "lemma-pd"), [P])
        assert G.order == 1
        assert G.entries[0, 0] == pytest.approx(4.0, rel=1e-15)

    def test_identical_densities_gaussian(self):
        G = gram(KernelSpec(HELLINGER, "gaussian", 0.5), [P, P, P])
        np.testing.assert_array_equal(G.entries, np.ones((3, 3)))

    def test_lemma_example(self):
        G = gram(KernelSpec(DivergenceSpec.abs(1, 1), "lemma-pd"), [P, Q])
        np.testing.assert_allclose(G.entries, [[0.5, 0.5], [0.5, 0.625]],
                                   rtol=1e-14)

    def test_gaussian_diagonal_exactly_one(self):
        rng = np.random.default_rng(1)
        densities = sample_densities(rng, 12, 6)
        G = gram(KernelSpec(DivergenceSpec.dt(-0.5), "gaussian", 1.5),
                 densities)
        np.testing.assert_array_equal(np.diag(G.entries), np.ones(12))
        assert np.all(G.entries > 0) and np.all(G.entries <= 1)

    def test_neg_divergence_mode(self):
        spec = DivergenceSpec.abs(1, 1)
        G = gram(KernelSpec(spec, "neg-divergence-cpd"), [P, Q])
        D = divergence_gram(spec, [P, Q])
        np.testing.assert_array_equal(G.entries, -D.entries)
        assert np.all(np.diag(D.entries) == 0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        densities = sample_densities(rng, 6, 4)
        G = gram(KernelSpec(HELLINGER, "lemma-pd"), densities)
        perm = [3, 0, 5, 1, 4, 2]
        G2 = gram(KernelSpec(HELLINGER, "lemma-pd"),
                  [densities[i] for i in perm])
        np.testing.assert_array_equal(G2.entries,
                                      G.entries[np.ix_(perm, perm)])

    def test_element_error_located(self):
        bad = validate_density([0.5, 0.5, 0.0])
        ok = validate_density([0.2, 0.3, 0.5])
        with pytest.raises(SingularAtomError, match="\\(0, 1\\)"):
            divergence_gram(DivergenceSpec.dt(-1), [bad, ok])

    def test_closed_form_gram_for_negative_t(self):
        rng = np.random.default_rng(3)
        densities = sample_densities(rng, 5, 4)
        G = gram(KernelSpec(DivergenceSpec.dt(-0.5), "lemma-pd"), densities)
        want = kernel_from_divergence(DivergenceSpec.dt(-0.5), densities[0],
                                      densities[1])
        assert G.entries[0, 1] == pytest.approx(want, rel=1e-14)

    def test_kernel_rows_match_gram(self):
        rng = np.random.default_rng(4)
        densities = sample_densities(rng, 6, 4)
        for kspec in (KernelSpec(HELLINGER, "lemma-pd"),
                      KernelSpec(HELLINGER, "gaussian", 0.7),
                      KernelSpec(HELLINGER, "neg-divergence-cpd"),
                      KernelSpec(DivergenceSpec.dt(-1), "lemma-pd")):
            G = gram(kspec, densities)
            rows = kernel_rows(kspec, densities[:4], densities[4:])
            np.testing.assert_allclose(rows, G.entries[4:, :4], rtol=1e-12)


class TestSpectrumChecks:
    def test_identity_is_psd(self):
        report = psd_check(GramMatrix(np.eye(4)))
        assert report.verdict == "psd"
        assert report.min_eig == pytest.approx(1.0)
        assert not report.centered

    def test_indefinite_example(self):
        report = psd_check(GramMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])))
        assert report.verdict == "indefinite"
        assert report.min_eig == pytest.approx(-1.0)
        assert report.max_eig == pytest.approx(3.0)

    def test_gaussian_gram_of_dt_half_is_psd(self):
        rng = np.random.default_rng(5)
        densities = sample_densities(rng, 20, 8)
        G = gram(KernelSpec(DivergenceSpec.dt(0.5), "gaussian", 1.0),
                 densities)
        assert psd_check(G).verdict == "psd"

    def test_zero_matrix_cpd(self):
        assert cpd_check(GramMatrix(np.zeros((5, 5)))).verdict == "psd"

    def test_euclidean_scalars_cpd(self):
        densities = [validate_density([v]) for v in (1.0, 2.0, 3.0)]
        D = divergence_gram(DivergenceSpec.abs(1, 1), densities)
        report = cpd_check(D)
        assert report.verdict == "psd"
        assert report.centered

    def test_cpd_rejects_nonzero_diagonal(self):
        with pytest.raises(ValidationError):
            cpd_check(GramMatrix(np.eye(3)))

    def test_nonfinite_rejected(self):
        M = np.zeros((2, 2))
        M[0, 1] = M[1, 0] = np.inf
        with pytest.raises(ValidationError):
            psd_check(GramMatrix(M))

    def test_report_kv_lines(self):
        report = psd_check(GramMatrix(np.eye(2)))
        lines = report.to_kv_lines()
        assert "verdict=psd" in lines
        assert any(line.startswith("min_eig=") for line in lines)

    def test_verdict_threshold_is_relative(self):
        M = np.diag([1e6, -1e-4])
        assert psd_check(GramMatrix(M), tol=1e-8).verdict == "psd"
        assert psd_check(GramMatrix(np.diag([1.0, -1e-4]))).verdict == \
            "indefinite"


class TestLemmaEquivalence:
    def test_cpd_iff_lemma_origin_psd(self):
        # both directions of the origin construction, random instances
        rng = np.random.default_rng(6)
        seen = {"psd": 0, "indefinite": 0}
        for trial in range(40):
            n = int(rng.integers(4, 16))
            if trial % 2 == 0:
                X = rng.normal(size=(n, 3))
                D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
            else:
                S = rng.normal(size=(n, n))
                D = np.abs(S + S.T)
                np.fill_diagonal(D, 0.0)
            D = GramMatrix(np.triu(D) + np.triu(D, 1).T)
            cpd = cpd_check(D).verdict
            seen[cpd] += 1
            for origin in (0, n // 2, n - 1):
                lemma = psd_check(lemma_gram(D, origin)).verdict
                assert lemma == cpd
        assert seen["psd"] > 0 and seen["indefinite"] > 0

    def test_origin_bounds(self):
        D = GramMatrix(np.zeros((3, 3)))
        with pytest.raises(ValidationError):
            lemma_gram(D, 3)


class TestProbe:
    def test_deterministic(self):
        r1 = probe_hilbertianity(DivergenceSpec.abs(1, 1), 10, 5, seed=3)
        r2 = probe_hilbertianity(DivergenceSpec.abs(1, 1), 10, 5, seed=3)
        assert r1.worst_relative_eig == r2.worst_relative_eig
        assert [r.min_eig for r in r1.reports] == \
            [r.min_eig for r in r2.reports]

    def test_diagonal_specs_probe_psd(self):
        for spec in (DivergenceSpec.abs(1, 1), DivergenceSpec.dt(-1)):
            result = probe_hilbertianity(spec, 15, 10, seed=0)
            assert result.all_psd

    def test_off_diagonal_probe_records_indefinite(self):
        # the asymmetric-exponent specs genuinely fail the centered check
        # on random densities; the probe records this, nothing asserts psd
        result = probe_hilbertianity(DivergenceSpec.abs(0.5, 1), 20, 20,
                                     seed=3)
        assert len(result.reports) == 20
        assert result.worst_relative_eig < 0
        assert not result.all_psd

    def test_probe_kv_lines(self):
        result = probe_hilbertianity(HELLINGER, 5, 2, seed=1)
        lines = result.to_kv_lines()
        assert f"spec={HELLINGER.label()}" in lines
        assert any(line.startswith("trial1.verdict=") for line in lines)

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            probe_hilbertianity(HELLINGER, 2, 5, seed=0)
        with pytest.raises(ValidationError):
            probe_hilbertianity(HELLINGER, 5, 0, seed=0)


class TestGramMatrixType:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValidationError):
            GramMatrix(np.array([[1.0, 2.0], [3.0, 1.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValidationError):
            GramMatrix(np.zeros((2, 3)))
