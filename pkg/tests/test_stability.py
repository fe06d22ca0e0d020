import math

import numpy as np
import pytest

from semistab.cases import diagonal_family, random_hurwitz_family, zabczyk_family
from semistab.errors import DomainError, ShapeError, UnboundedSemigroupError
from semistab.measure import DiscretizedMeasureSpace
from semistab.report import INCONCLUSIVE, NOT_STABLE, STABLE
from semistab.semigroup import PointwiseFamily, random_probes
from semistab.stability import (
    build_report,
    certify_bounded,
    cesaro_verify,
    classify_almost_weak,
    classify_strong,
    classify_uniform,
    imaginary_point_spectrum,
    weak_orbit_density_test,
)


def family_from_matrices(mats, weights=None):
    mats = np.asarray(mats, dtype=complex)
    n_cells = mats.shape[0]
    weights = np.ones(n_cells) if weights is None else np.asarray(weights, float)
    space = DiscretizedMeasureSpace(
        weights=weights, labels=np.arange(n_cells, dtype=float)
    )
    return PointwiseFamily(space=space, dim=mats.shape[1], generators=mats)


class TestClassifyUniform:
    def test_scalar_decay(self):
        result = classify_uniform(diagonal_family([-1.0, -1.0]), 1.0, 1e-6)
        assert result.verdict == STABLE
        assert result.decay_eps == pytest.approx(1.0, abs=1e-9)
        assert result.rho_star == pytest.approx(math.exp(-1.0))
        assert result.bound_M >= 1.0

    def test_unitary_is_not_stable_with_witness(self):
        result = classify_uniform(diagonal_family([1j, -1.0]), 1.0, 1e-6)
        assert result.verdict == NOT_STABLE
        assert result.decay_eps is None
        assert result.witnesses and result.witnesses[0].cell == 0

    def test_margin_band_is_inconclusive(self):
        # rho* = e^{-0.01} ~ 0.990: inside a margin band of 0.05
        result = classify_uniform(diagonal_family([-0.01]), 1.0, 0.05)
        assert result.verdict == INCONCLUSIVE

    def test_counterexample_truncation(self):
        family = zabczyk_family(10)
        result = classify_uniform(family, 0.5, 1e-6)
        assert result.verdict == STABLE
        assert result.rho_star == pytest.approx(math.exp(-0.5 / 10), rel=1e-12)
        assert result.decay_eps == pytest.approx(0.1, abs=1e-6)

    def test_fitted_envelope_holds_on_grid(self):
        family = random_hurwitz_family(seed=2, dim=5, cells=4, margin=0.3)
        result = classify_uniform(family, 1.0, 1e-3)
        assert result.verdict == STABLE
        envelope = result.bound_M * np.exp(-result.decay_eps * result.times)
        assert np.all(result.ess_norms <= envelope * (1 + 1e-12))

    def test_invalid_parameters(self):
        family = diagonal_family([-1.0])
        with pytest.raises(DomainError):
            classify_uniform(family, 0.0, 1e-6)
        with pytest.raises(DomainError):
            classify_uniform(family, 1.0, 0.0)


class TestCertifyBounded:
    def test_contraction_certificate(self):
        cert = certify_bounded(diagonal_family([-0.5, -1.0]), 20.0)
        assert cert.certified

    def test_spectral_certificate_for_rotations(self):
        cert = certify_bounded(diagonal_family([1j, 2j]), 20.0)
        assert cert.certified
        assert cert.bound == pytest.approx(1.0, abs=1e-12)

    def test_growing_cell_fails(self):
        cert = certify_bounded(diagonal_family([0.1]), 20.0)
        assert not cert.certified
        assert any(w.kind == "positive-spectral-bound" for w in cert.witnesses)

    def test_defective_imaginary_eigenvalue_fails(self):
        shift = np.array([[[0.0, 1.0], [0.0, 0.0]]], dtype=complex)
        cert = certify_bounded(family_from_matrices(shift), 20.0)
        assert not cert.certified
        assert any(w.kind == "defective-imaginary-eigenvalue" for w in cert.witnesses)


class TestClassifyStrong:
    def test_slow_normal_family_is_stable(self):
        family = diagonal_family([-1.0 / k for k in range(1, 11)])
        probes = random_probes(family, 3, seed=0)
        # slowest decay time for the probe check is about 10 * ln(1e6) = 138
        result = classify_strong(family, 200.0, probes)
        assert result.verdict == STABLE
        assert result.certified
        assert result.bound_M == pytest.approx(1.0)

    def test_single_rotating_cell_flips_verdict(self):
        family = diagonal_family([-1.0, 1j, -2.0])
        probes = random_probes(family, 2, seed=1)
        result = classify_strong(family, 50.0, probes)
        assert result.verdict == NOT_STABLE
        witness = result.witnesses[0]
        assert witness.cell == 1
        assert witness.value == pytest.approx(1j)

    def test_counterexample_truncation_reports_huge_bound(self):
        family = zabczyk_family(10)
        probes = random_probes(family, 2, seed=2)
        result = classify_strong(family, 800.0, probes, grid_points=64)
        assert result.verdict == STABLE
        assert result.bound_M > 1e3

    def test_uncertified_gate_is_inconclusive(self):
        shift = np.array([[[0.0, 1.0], [0.0, 0.0]]], dtype=complex)
        family = family_from_matrices(shift)
        result = classify_strong(family, 20.0, random_probes(family, 1, seed=3))
        assert result.verdict == INCONCLUSIVE
        assert not result.certified

    def test_too_short_horizon_downgrades(self):
        family = diagonal_family([-0.01])
        result = classify_strong(family, 10.0, random_probes(family, 1, seed=4))
        assert result.verdict == INCONCLUSIVE
        assert any(w.kind == "probe-did-not-decay" for w in result.witnesses)

    def test_probes_required(self):
        with pytest.raises(ShapeError):
            classify_strong(diagonal_family([-1.0]), 10.0, [])


class TestImaginaryPointSpectrum:
    def test_hurwitz_family_has_none(self):
        assert imaginary_point_spectrum(diagonal_family([-1.0, -2.0])) == []

    def test_exact_match_merges_cells(self):
        clusters = imaginary_point_spectrum(diagonal_family([2j, 2j], [0.5, 0.25]))
        assert len(clusters) == 1
        assert clusters[0].cells == (0, 1)
        assert clusters[0].measure == pytest.approx(0.75)
        assert clusters[0].eigenvalue == pytest.approx(2j)

    def test_separate_cells_stay_separate(self):
        clusters = imaginary_point_spectrum(diagonal_family([1j, 3j]))
        assert len(clusters) == 2
        assert [c.measure for c in clusters] == [1.0, 1.0]

    def test_invariant_under_cell_permutation(self):
        a = diagonal_family([1j, 3j, 1j], [0.2, 0.3, 0.5])
        b = diagonal_family([3j, 1j, 1j], [0.3, 0.5, 0.2])
        ca = imaginary_point_spectrum(a)
        cb = imaginary_point_spectrum(b)
        assert [(c.eigenvalue, c.measure) for c in ca] == [
            (c.eigenvalue, c.measure) for c in cb
        ]

    def test_zero_weight_cells_are_invisible(self):
        with_null = diagonal_family([1j, 5j], [1.0, 0.0])
        without = diagonal_family([1j], [1.0])
        got = imaginary_point_spectrum(with_null)
        want = imaginary_point_spectrum(without)
        assert [(c.eigenvalue, c.measure) for c in got] == [
            (c.eigenvalue, c.measure) for c in want
        ]

    def test_bad_tolerances(self):
        with pytest.raises(DomainError):
            imaginary_point_spectrum(diagonal_family([1j]), re_tol=0.0)


class TestClassifyAlmostWeak:
    def test_shifted_spectrum_is_stable(self):
        result = classify_almost_weak(diagonal_family([-1.0 + 5j, -1.0 + 5j]))
        assert result.verdict == STABLE
        assert result.mode == "Atomic"

    def test_unitary_atomic_family_fails_with_full_measure(self):
        result = classify_almost_weak(diagonal_family([1j, 1j]))
        assert result.verdict == NOT_STABLE
        assert result.clusters[0].measure == pytest.approx(2.0)

    def test_rotation_interval_measure_scaling(self):
        from semistab.cases import rotation_family

        family = rotation_family(64)
        deltas = (0.1, 0.05, 0.025)
        result = classify_almost_weak(family, delta_sweep=deltas)
        assert result.verdict == STABLE
        assert result.mode == "NonAtomicLimit"
        # measured support of each eigenvalue ball stays within 2*delta + width
        widths = [1.0 / 64, 1.0 / 128, 1.0 / 256]
        for delta, width, measure in zip(deltas, widths, result.measures):
            assert measure <= 2 * delta + width + 1e-12
        assert result.slope <= 2.1

    def test_fixed_atom_is_caught_in_limit_mode(self):
        # one persistent eigenvalue carried by fixed measure: the cluster
        # measure does not shrink with delta, so the limit verdict is NotStable
        space = DiscretizedMeasureSpace.uniform_grid(16)

        def rule(s):
            return np.array([[1j]])

        family = PointwiseFamily(
            space=space,
            dim=1,
            generators=np.stack([rule(s) for s in space.labels]),
            generator_rule=rule,
        )
        result = classify_almost_weak(family, mode="NonAtomicLimit")
        assert result.verdict == NOT_STABLE

    def test_uncertified_gate_is_inconclusive(self):
        result = classify_almost_weak(diagonal_family([0.1]))
        assert result.verdict == INCONCLUSIVE


class TestWeakOrbitDensityTest:
    def test_scalar_decay_needs_long_horizon(self):
        a = np.array([[-1.0]], dtype=complex)
        x = np.array([1.0])
        short = weak_orbit_density_test(a, x, x, 100.0, 1e-3)
        long = weak_orbit_density_test(a, x, x, 200.0, 1e-3)
        # bad set is [0, ln(1e3)] ~ [0, 6.9]
        assert short.bad_density == pytest.approx(math.log(1e3) / 100.0, abs=0.01)
        assert not short.passed
        assert long.passed

    def test_unimodular_orbit_never_passes(self):
        a = np.array([[1j]], dtype=complex)
        x = np.array([1.0])
        result = weak_orbit_density_test(a, x, x, 100.0, 1e-3)
        assert result.bad_density == pytest.approx(1.0)
        assert not result.passed

    def test_two_frequency_almost_periodic_orbit_fails(self):
        a = np.diag([1j, 2j])
        x = np.array([1.0, 1.0]) / math.sqrt(2)
        result = weak_orbit_density_test(a, x, x, 500.0, 1e-3)
        # w(t) = |cos(t/2)|: essentially never below 1e-3
        assert not result.passed
        assert result.bad_density > 0.9

    def test_zero_vectors_rejected(self):
        a = np.array([[-1.0]], dtype=complex)
        with pytest.raises(DomainError):
            weak_orbit_density_test(a, np.array([0.0]), np.array([1.0]), 10.0, 1e-3)

    def test_pass_rates_split_cleanly_by_spectrum(self):
        rng = np.random.default_rng(25)
        horizon, eps = 500.0, 1e-3
        for k in range(50):
            n = int(rng.integers(2, 7))
            g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
            hurwitz = g - (np.linalg.eigvals(g).real.max() + 0.5) * np.eye(n)
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            phi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            assert weak_orbit_density_test(hurwitz, x, phi, horizon, eps).passed
            # plant a semisimple eigenvalue on the imaginary axis
            neutral = np.diag([1j * rng.uniform(0.5, 2.0)] + list(-1 - rng.uniform(0, 1, n - 1)))
            basis = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 2 * np.eye(n)
            planted = basis @ neutral @ np.linalg.inv(basis)
            assert not weak_orbit_density_test(planted, x, phi, horizon, eps).passed


class TestCesaroVerify:
    def test_planted_kernel_residual_bound(self):
        a = np.diag([0.0, -1.0])
        x = np.array([1.0, 1.0])
        for t, residual in cesaro_verify(a, x, [10.0, 100.0]):
            # exact residual is (1 - e^{-t})/t
            assert residual <= 1.0 / t + 1e-9
            assert residual == pytest.approx((1 - math.exp(-t)) / t, abs=1e-9)

    def test_pure_rotation_mean_shrinks(self):
        a = np.array([[1j]], dtype=complex)
        x = np.array([1.0])
        for t, residual in cesaro_verify(a, x, [5.0, 50.0]):
            assert residual <= 2.0 / t

    def test_fixed_vector_has_zero_residual(self):
        a = np.diag([0.0, -1.0])
        x = np.array([1.0, 0.0])  # in the kernel
        for _, residual in cesaro_verify(a, x, [3.0, 30.0]):
            assert residual <= 1e-12

    def test_defective_zero_raises(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(UnboundedSemigroupError):
            cesaro_verify(a, np.array([1.0, 0.0]), [1.0])

    def test_residuals_nonincreasing_up_to_factor_two(self):
        a = np.diag([0.0, 1j, -0.5])
        x = np.array([1.0, 1.0, 1.0])
        residuals = [r for _, r in cesaro_verify(a, x, [5.0, 10.0, 20.0, 40.0])]
        for earlier, later in zip(residuals, residuals[1:]):
            assert later <= 2.0 * earlier


class TestImplicationChain:
    def test_uniform_implies_strong_implies_almost_weak(self):
        for seed in range(5):
            family = random_hurwitz_family(seed=seed, dim=4, cells=5, margin=0.25)
            uniform = classify_uniform(family, 1.0, 1e-3)
            strong = classify_strong(family, 150.0, random_probes(family, 2, seed=seed))
            weak = classify_almost_weak(family, mode="Atomic")
            if uniform.verdict == STABLE:
                assert strong.verdict == STABLE
            if strong.verdict == STABLE:
                assert weak.verdict == STABLE

    def test_report_assembly(self):
        family = random_hurwitz_family(seed=3, dim=3, cells=4, margin=0.3)
        report = build_report(
            classify_uniform(family, 1.0, 1e-3),
            classify_strong(family, 120.0, random_probes(family, 2, seed=3)),
            classify_almost_weak(family, mode="Atomic"),
        )
        assert report.uniform.verdict == STABLE
        assert report.decay_eps == pytest.approx(0.3, abs=1e-8)
        assert report.bound_M >= 1.0
        payload = report.as_dict()
        assert payload["uniform"]["verdict"] == "Stable"
        assert payload["mode"] == "Atomic"

    def test_report_invariants_are_enforced(self):
        from semistab.report import AlmostWeakResult, StabilityReport, StrongResult, UniformResult

        ok_strong = StrongResult(STABLE)
        ok_weak = AlmostWeakResult(STABLE, "Atomic")
        with pytest.raises(ValueError):
            # a Stable uniform verdict must carry its decay rate
            StabilityReport(
                UniformResult(STABLE, 0.5), ok_strong, ok_weak, mode="Atomic"
            )
        with pytest.raises(ValueError):
            # NotStable needs at least one witness
            StabilityReport(
                UniformResult(NOT_STABLE, 1.0), ok_strong, ok_weak, mode="Atomic"
            )
