"""Tests for frame operators, dual reconstruction and Stratonovich-Weyl reports."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spinwigner.config import LimitSettings, Settings, use_settings
from spinwigner.errors import NotInformationallyCompleteError, ResourceLimitError
from spinwigner.kernels import evaluate_many, make_kernel, rotated_kernel
from spinwigner.models import FrameReport
from spinwigner.phase_space import build_quadrature, default_quadrature, wigner
from spinwigner.states import evolve_kernel, oat_hamiltonian, random_mixed_state
from spinwigner.verify import (
    biorthogonality_residual,
    covariance_residual,
    dual_kernel,
    frame_spectrum_estimate,
    frame_superoperator,
    reconstruct,
    sw_report,
)

# =============================================================================
# Frame operator
# =============================================================================


class TestFrame:
    """Tests for S = Σ w vec Δ vec Δ†."""

    def test_qubit_is_self_dual(self):
        kernel = make_kernel("qubit")
        frame = frame_superoperator(kernel, default_quadrature(kernel))
        assert_allclose(frame, np.eye(4), atol=1e-12)

    def test_tensor_product_is_self_dual(self):
        kernel = make_kernel("tensor-product", k=2)
        frame = frame_superoperator(kernel, default_quadrature(kernel))
        assert_allclose(frame, np.eye(16), atol=1e-11)

    @pytest.mark.parametrize(
        "family,params",
        [("spin-j", {"j": 1}), ("multiqubit-global", {"k": 2}), ("qudit-sun", {"n": 3})],
    )
    def test_trace_and_positivity(self, family, params):
        kernel = make_kernel(family, **params)
        frame = frame_superoperator(kernel, default_quadrature(kernel))
        assert_allclose(frame, frame.conj().T, atol=1e-12)
        assert np.trace(frame).real == pytest.approx(kernel.dimension**2, rel=1e-10)
        assert np.linalg.eigvalsh(frame).min() > 1e-8

    def test_global_kernel_is_not_self_dual(self):
        kernel = make_kernel("multiqubit-global", k=2)
        spectrum = np.linalg.eigvalsh(frame_superoperator(kernel, default_quadrature(kernel)))
        assert np.max(np.abs(spectrum - 1)) > 1e-3

    def test_frame_cap(self):
        use_settings(Settings(limits=LimitSettings(max_frame_dimension=8)))
        kernel = make_kernel("spin-j", j=1)
        with pytest.raises(ResourceLimitError):
            frame_superoperator(kernel, default_quadrature(kernel))

    def test_independent_of_workers(self):
        use_settings(Settings(limits=LimitSettings(chunk_size=16)))
        kernel = make_kernel("spin-j", j="3/2")
        quadrature = default_quadrature(kernel)
        serial = frame_superoperator(kernel, quadrature, workers=1)
        threaded = frame_superoperator(kernel, quadrature, workers=3)
        assert np.array_equal(serial, threaded)


# =============================================================================
# Dual frame and reconstruction
# =============================================================================


class TestReconstruction:
    """Tests for the dual kernel."""

    @pytest.mark.parametrize(
        "family,params",
        [
            ("qubit", {}),
            ("spin-j", {"j": "1/2"}),
            ("spin-j", {"j": 1}),
            ("spin-j", {"j": "3/2"}),
            ("multiqubit-global", {"k": 2}),
            ("multiqubit-global", {"k": 3}),
            ("tensor-product", {"k": 2}),
            ("qudit-sun", {"n": 3}),
        ],
    )
    def test_round_trip(self, family, params, rng):
        kernel = make_kernel(family, **params)
        quadrature = default_quadrature(kernel)
        dual = dual_kernel(kernel, quadrature)
        for _ in range(20):
            rho = random_mixed_state(kernel.dimension, rng)
            field = wigner(rho, kernel, quadrature)
            rebuilt = reconstruct(field, kernel, quadrature, dual=dual)
            assert np.max(np.abs(rebuilt.matrix - rho.matrix)) <= 1e-8

    def test_biorthogonality(self):
        kernel = make_kernel("spin-j", j=1)
        quadrature = default_quadrature(kernel)
        assert biorthogonality_residual(dual_kernel(kernel, quadrature), quadrature) <= 1e-9

    def test_self_dual_kernel_is_its_own_dual(self, rng):
        kernel = make_kernel("qubit")
        dual = dual_kernel(kernel, default_quadrature(kernel))
        thetas = rng.uniform(0, math.pi / 2, (10, 1))
        phis = rng.uniform(0, math.pi, (10, 1))
        assert_allclose(dual.evaluate_many(thetas, phis), evaluate_many(kernel, thetas, phis),
                        atol=1e-11)

    def test_singular_frame(self):
        kernel = make_kernel("spin-j", j="3/2")
        quadrature = build_quadrature(kernel, (2, 2))
        with pytest.raises(NotInformationallyCompleteError):
            dual_kernel(kernel, quadrature)


# =============================================================================
# Covariance
# =============================================================================


class TestCovariance:
    """Tests for the covariance residual."""

    @pytest.mark.parametrize(
        "family,params",
        [
            ("qubit", {}),
            ("spin-j", {"j": 2}),
            ("multiqubit-global", {"k": 3}),
            ("qudit-sun", {"n": 3}),
        ],
    )
    def test_families_are_covariant(self, family, params, rng):
        kernel = make_kernel(family, **params)
        quadrature = default_quadrature(kernel)
        probes = [random_mixed_state(kernel.dimension, rng) for _ in range(2)]
        sample = slice(0, min(quadrature.size, 200))
        residual = covariance_residual(
            kernel, quadrature.thetas[sample], quadrature.phis[sample], probes, rng
        )
        assert residual <= 1e-10

    def test_rotated_kernel_is_covariant_in_rotated_frame(self, rng):
        kernel = evolve_kernel(make_kernel("multiqubit-global", k=2), oat_hamiltonian(2), 0.3)
        quadrature = default_quadrature(kernel)
        probes = [random_mixed_state(4, rng)]
        residual = covariance_residual(kernel, quadrature.thetas, quadrature.phis, probes, rng)
        assert residual <= 1e-10


# =============================================================================
# Monte-Carlo cross-check
# =============================================================================


class TestFrameEstimate:
    """Tests for the independent frame spectrum estimate."""

    @pytest.mark.parametrize(
        "family,params",
        [
            ("spin-j", {"j": 1}),
            ("spin-j", {"j": 2}),
            ("multiqubit-global", {"k": 2}),
        ],
    )
    def test_agrees_with_exact_spectrum(self, family, params):
        kernel = make_kernel(family, **params)
        frame = frame_superoperator(kernel, default_quadrature(kernel))
        estimate = frame_spectrum_estimate(kernel, frame, samples=100_000, seed=5)
        assert estimate.samples == 100_000
        assert len(estimate.estimates) == kernel.dimension**2
        assert estimate.agrees()

    def test_detects_wrong_spectrum(self):
        kernel = make_kernel("spin-j", j=1)
        frame = frame_superoperator(kernel, default_quadrature(kernel))
        estimate = frame_spectrum_estimate(kernel, 2 * frame, samples=20_000, seed=5)
        assert not estimate.agrees()


# =============================================================================
# Reports
# =============================================================================


class TestReport:
    """Tests for sw_report and its gate."""

    @pytest.mark.parametrize(
        "family,params",
        [
            ("qubit", {}),
            ("spin-j", {"j": "3/2"}),
            ("multiqubit-global", {"k": 2}),
            ("tensor-product", {"k": 2}),
            ("qudit-sun", {"n": 3}),
        ],
    )
    def test_families_pass(self, family, params):
        kernel = make_kernel(family, **params)
        report = sw_report(kernel, default_quadrature(kernel), probes=2, seed=1)
        assert report.failures() == []
        assert report.gate()
        assert report.completeness
        assert report.reconstruction_error is not None

    def test_self_duality_reported_for_global_kernels(self):
        kernel = make_kernel("multiqubit-global", k=2)
        report = sw_report(kernel, default_quadrature(kernel), probes=1)
        assert not report.documented_self_dual
        assert report.self_duality_residual > 1e-3
        assert report.gate()

    def test_rotated_kernel_passes(self):
        kernel = rotated_kernel(make_kernel("spin-j", j=1), np.diag([1, 1j, -1]))
        report = sw_report(kernel, default_quadrature(kernel), probes=2)
        assert report.gate()
        assert report.kernel_id.endswith("~rotated")

    def test_incomplete_frame_fails(self):
        kernel = make_kernel("spin-j", j="3/2")
        report = sw_report(kernel, build_quadrature(kernel, (2, 2)), probes=1)
        assert not report.completeness
        assert report.reconstruction_error is None
        assert not report.gate()
        assert any("informationally complete" in f for f in report.failures())

    def test_json_round_trip(self):
        kernel = make_kernel("qubit")
        report = sw_report(kernel, default_quadrature(kernel), probes=1)
        restored = FrameReport.model_validate_json(report.model_dump_json())
        assert restored.frame_spectrum == pytest.approx(report.frame_spectrum)
        assert restored.kernel_id == "qubit"

    def test_deterministic(self):
        kernel = make_kernel("spin-j", j=1)
        quadrature = default_quadrature(kernel)
        a = sw_report(kernel, quadrature, probes=2, seed=3)
        b = sw_report(kernel, quadrature, probes=2, seed=3)
        assert a.model_dump() == b.model_dump()
