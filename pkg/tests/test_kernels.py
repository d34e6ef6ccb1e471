"""Tests for parity operators and kernel families."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from spinwigner.errors import (
    ArgumentError,
    ContractViolationError,
    InvalidDimensionError,
    ResourceLimitError,
)
from spinwigner.kernels import (
    evaluate,
    evaluate_many,
    make_kernel,
    norm_constant,
    parity_operator,
    rotated_kernel,
)
from spinwigner.models import KernelFamily, PhasePoint

# =============================================================================
# Fixtures
# =============================================================================

FAMILIES = [
    ("qubit", {}),
    ("spin-j", {"j": "1/2"}),
    ("spin-j", {"j": 1}),
    ("spin-j", {"j": "3/2"}),
    ("multiqubit-global", {"k": 2}),
    ("multiqubit-global", {"k": 3}),
    ("qudit-sun", {"n": 3}),
    ("tensor-product", {"k": 2}),
]


def random_points(kernel, count, rng):
    bounds = np.array(kernel.domain)
    shape = (count, kernel.symmetry.n_theta)
    thetas = bounds[:, 0, 0] + (bounds[:, 0, 1] - bounds[:, 0, 0]) * rng.random(shape)
    phis = bounds[:, 1, 0] + (bounds[:, 1, 1] - bounds[:, 1, 0]) * rng.random(shape)
    return thetas, phis


# =============================================================================
# Parity
# =============================================================================


class TestParity:
    """Tests for N(D) and Π^[D]."""

    def test_norm_constant_values(self):
        assert norm_constant(2) == pytest.approx(math.sqrt(3))
        assert norm_constant(4) == pytest.approx(math.sqrt(30))
        assert norm_constant(4) == pytest.approx(math.sqrt(5 * 4 * 3 / 2))

    def test_norm_constant_rejects_small_dimension(self):
        with pytest.raises(InvalidDimensionError):
            norm_constant(1)

    def test_qubit_parity(self):
        s3 = math.sqrt(3)
        assert_allclose(parity_operator(2), np.diag([1 - s3, 1 + s3]), atol=1e-14)

    def test_four_dimensional_parity(self):
        s5 = math.sqrt(5)
        expected = np.diag([1 - s5, 1 - s5, 1 - s5, 1 + 3 * s5])
        assert_allclose(parity_operator(4), expected, atol=1e-13)

    @pytest.mark.parametrize("dim", range(2, 9))
    def test_traces(self, dim):
        parity = parity_operator(dim)
        assert np.trace(parity).real == pytest.approx(dim, abs=1e-12)
        assert np.trace(parity @ parity).real == pytest.approx(dim**3, rel=1e-12)


# =============================================================================
# Construction
# =============================================================================


class TestMakeKernel:
    """Tests for the kernel factory."""

    def test_qubit(self):
        kernel = make_kernel("qubit")
        assert kernel.dimension == 2
        assert kernel.family == KernelFamily.QUBIT
        assert_allclose(kernel.parity, parity_operator(2))

    def test_tensor_parity_differs_from_global(self):
        tensor = make_kernel("tensor-product", k=2)
        s3 = math.sqrt(3)
        expected = np.diag([4 - 2 * s3, -2, -2, 4 + 2 * s3])
        assert_allclose(tensor.parity, expected, atol=1e-13)
        global_kernel = make_kernel("multiqubit-global", k=2)
        assert np.linalg.norm(tensor.parity - global_kernel.parity) > 0.1

    def test_single_multiqubit_is_qubit(self, rng):
        multi = make_kernel("multiqubit-global", k=1)
        qubit = make_kernel("qubit")
        thetas, phis = random_points(qubit, 10, rng)
        assert_allclose(evaluate_many(multi, thetas, phis), evaluate_many(qubit, thetas, phis))

    def test_tensor_of_mixed_components(self):
        kernel = make_kernel(
            "tensor-product", components=[make_kernel("qubit"), make_kernel("spin-j", j=1)]
        )
        assert kernel.dimension == 6
        assert kernel.symmetry.n_theta == 2
        assert "spin-j(j=1)" in kernel.label

    def test_qudit_sun_sites(self):
        kernel = make_kernel("qudit-sun", n=3, k=2)
        assert kernel.dimension == 9
        assert kernel.symmetry.n_theta == 4

    @pytest.mark.parametrize(
        "family,params,error",
        [
            ("wigner", {}, ArgumentError),
            ("spin-j", {}, ArgumentError),
            ("spin-j", {"j": 0}, InvalidDimensionError),
            ("multiqubit-global", {"k": 0}, InvalidDimensionError),
            ("qudit-sun", {"n": 1}, InvalidDimensionError),
            ("tensor-product", {}, ArgumentError),
            ("spin-j", {"j": 200}, ResourceLimitError),
            ("multiqubit-global", {"k": 11}, ResourceLimitError),
        ],
    )
    def test_invalid_parameters(self, family, params, error):
        with pytest.raises(error):
            make_kernel(family, **params)

    def test_harmonic_degree(self):
        assert make_kernel("qubit").harmonic_degree == 2
        assert make_kernel("spin-j", j="7/2").harmonic_degree == 7
        assert make_kernel("qudit-sun", n=3).harmonic_degree == 3
        assert make_kernel("multiqubit-global", k=3).harmonic_degree == 2

    def test_documented_self_dual(self):
        assert make_kernel("qubit").documented_self_dual
        assert make_kernel("tensor-product", k=3).documented_self_dual
        assert not make_kernel("multiqubit-global", k=2).documented_self_dual
        assert not make_kernel("spin-j", j=1).documented_self_dual

    def test_fiducial_is_last_basis_vector(self):
        fiducial = make_kernel("spin-j", j=1).fiducial
        assert_allclose(fiducial, [0, 0, 1])


# =============================================================================
# Evaluation
# =============================================================================


class TestEvaluate:
    """Tests for Δ(Ω)."""

    def test_qubit_origin(self):
        delta = evaluate(make_kernel("qubit"), PhasePoint(theta=(0.0,), phi=(0.0,)))
        s3 = math.sqrt(3)
        assert_allclose(delta, np.diag([1 - s3, 1 + s3]) / 2, atol=1e-14)

    @pytest.mark.parametrize("family,params", FAMILIES)
    def test_hermitian_unit_trace_fixed_spectrum(self, family, params, rng):
        kernel = make_kernel(family, **params)
        thetas, phis = random_points(kernel, 25, rng)
        deltas = evaluate_many(kernel, thetas, phis)
        expected = np.sort(kernel.parity_diagonal) / kernel.dimension
        for delta in deltas:
            assert np.max(np.abs(delta - delta.conj().T)) <= 1e-12
            assert np.trace(delta).real == pytest.approx(1, abs=1e-12)
            assert_allclose(np.linalg.eigvalsh(delta), expected, atol=1e-11)

    def test_spin_half_is_qubit_at_half_angles(self, rng):
        spin = make_kernel("spin-j", j="1/2")
        qubit = make_kernel("qubit")
        thetas = rng.uniform(0, np.pi, (100, 1))
        phis = rng.uniform(0, 2 * np.pi, (100, 1))
        assert_allclose(
            evaluate_many(spin, thetas, phis),
            evaluate_many(qubit, thetas / 2, phis / 2),
            atol=1e-12,
        )

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            evaluate(make_kernel("multiqubit-global", k=2), PhasePoint(theta=(0.1,), phi=(0.1,)))


class TestRotatedKernel:
    """Tests for V†Δ(Ω)V kernels."""

    def test_identity_leaves_kernel(self, rng):
        kernel = make_kernel("spin-j", j=1)
        thetas, phis = random_points(kernel, 5, rng)
        rotated = rotated_kernel(kernel, np.eye(3))
        assert_allclose(evaluate_many(rotated, thetas, phis), evaluate_many(kernel, thetas, phis))

    def test_conjugation_identity(self, rng):
        kernel = make_kernel("multiqubit-global", k=2)
        v = unitary_group.rvs(4, random_state=11)
        rotated = rotated_kernel(kernel, v)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        thetas, phis = random_points(kernel, 20, rng)
        direct = evaluate_many(kernel, thetas, phis)
        twisted = evaluate_many(rotated, thetas, phis)
        moved = v @ rho @ v.conj().T
        for d, t in zip(direct, twisted, strict=True):
            assert abs(np.trace(moved @ d) - np.trace(rho @ t)) <= 1e-12

    def test_rotations_compose(self):
        kernel = make_kernel("qubit")
        a = unitary_group.rvs(2, random_state=1)
        b = unitary_group.rvs(2, random_state=2)
        twice = rotated_kernel(rotated_kernel(kernel, a), b)
        point = PhasePoint(theta=(0.4,), phi=(1.0,))
        expected = (a @ b).conj().T @ evaluate(kernel, point) @ (a @ b)
        assert_allclose(evaluate(twice, point), expected, atol=1e-13)

    def test_own_rotation_moves_origin(self):
        kernel = make_kernel("spin-j", j="3/2")
        point = PhasePoint(theta=(0.9,), phi=(2.2,))
        u = kernel.rotation.evaluate(point)
        rotated = rotated_kernel(kernel, u.conj().T)
        origin = PhasePoint(theta=(0.0,), phi=(0.0,))
        assert_allclose(evaluate(rotated, origin), evaluate(kernel, point), atol=1e-12)

    def test_non_unitary_rejected(self):
        with pytest.raises(ContractViolationError):
            rotated_kernel(make_kernel("qubit"), np.diag([1.0, 2.0]))

    def test_tensor_components_with_twists(self, rng):
        v = unitary_group.rvs(2, random_state=3)
        twisted = rotated_kernel(make_kernel("qubit"), v)
        kernel = make_kernel("tensor-product", components=[twisted, make_kernel("qubit")])
        assert_allclose(kernel.twist, np.kron(v, np.eye(2)), atol=1e-15)
