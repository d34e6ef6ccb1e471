"""Tests for the rotation families."""

from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from spinwigner.errors import ArgumentError
from spinwigner.kernels import parity_operator
from spinwigner.models import PhasePoint, SiteConvention, SiteSpec, SymmetrySpec
from spinwigner.operators import SIGMA_Y, SIGMA_Z, kron_all, spin_operators
from spinwigner.rotations import (
    RotationFamily,
    product_rotation,
    qubit_rotation,
    spinj_rotation,
    sun_rotation,
    sun_state_tangents,
)

QUBIT = SiteSpec(convention=SiteConvention.QUBIT, n=2, d=2)


def _spin_site(two_j: int) -> SiteSpec:
    return SiteSpec(convention=SiteConvention.SPIN, n=2, d=two_j + 1)


def _sun_site(n: int) -> SiteSpec:
    return SiteSpec(convention=SiteConvention.SUN, n=n, d=n)


class TestSingleSite:
    """Tests for one-site rotations."""

    def test_qubit_identity(self):
        assert_allclose(qubit_rotation(0, 0, 0), np.eye(2), atol=1e-15)

    def test_qubit_matches_expm(self):
        theta, phi, big_phi = 0.3, 1.1, -0.4
        expected = expm(1j * SIGMA_Z * phi) @ expm(1j * SIGMA_Y * theta) @ expm(
            1j * SIGMA_Z * big_phi
        )
        assert_allclose(qubit_rotation(theta, phi, big_phi), expected, atol=1e-13)

    @pytest.mark.parametrize("j", ["1/2", 1, "3/2"])
    def test_spin_matches_expm(self, j):
        ops = spin_operators(j)
        theta, phi = 0.8, 2.1
        expected = expm(1j * ops.J3 * phi) @ expm(1j * ops.J2 * theta)
        assert_allclose(spinj_rotation(j, theta, phi), expected, atol=1e-12)

    def test_spin_half_is_qubit_at_half_angles(self, rng):
        for theta, phi in rng.uniform(0, 2 * np.pi, size=(20, 2)):
            assert_allclose(
                spinj_rotation("1/2", theta, phi), qubit_rotation(theta / 2, phi / 2), atol=1e-13
            )

    def test_sun_two_is_qubit(self):
        assert_allclose(sun_rotation(2, [0.4], [1.3]), qubit_rotation(0.4, 1.3), atol=1e-13)

    @pytest.mark.parametrize("n", [3, 4])
    def test_sun_unitary(self, n, rng):
        u = sun_rotation(n, rng.uniform(0, 1.5, n - 1), rng.uniform(0, 6, n - 1))
        assert_allclose(u.conj().T @ u, np.eye(n), atol=1e-12)

    def test_sun_wrong_angle_count(self):
        with pytest.raises(ArgumentError):
            sun_rotation(3, [0.1], [0.2, 0.3])


class TestSunTangents:
    """Tests for SU(N) coherent-state derivatives."""

    def test_state_is_last_column(self, rng):
        thetas = rng.uniform(0, 1.5, (5, 2))
        phis = rng.uniform(0, 6, (5, 2))
        states, _ = sun_state_tangents(3, thetas, phis)
        for p in range(5):
            assert_allclose(states[p], sun_rotation(3, thetas[p], phis[p])[:, -1], atol=1e-13)

    def test_tangents_match_finite_differences(self, rng):
        thetas = rng.uniform(0.1, 1.4, (1, 2))
        phis = rng.uniform(0, 6, (1, 2))
        _, tangents = sun_state_tangents(3, thetas, phis)
        step = 1e-6
        for column in range(4):
            shift_t = np.zeros((1, 2))
            shift_p = np.zeros((1, 2))
            if column < 2:
                shift_t[0, column] = step
            else:
                shift_p[0, column - 2] = step
            plus = sun_rotation(3, (thetas + shift_t)[0], (phis + shift_p)[0])[:, -1]
            minus = sun_rotation(3, (thetas - shift_t)[0], (phis - shift_p)[0])[:, -1]
            assert_allclose(tangents[0, column], (plus - minus) / (2 * step), atol=1e-7)


class TestRotationFamily:
    """Tests for composite rotation families."""

    def test_product_of_sites(self):
        symmetry = SymmetrySpec(sites=(QUBIT, _spin_site(2), _sun_site(3)))
        point = PhasePoint(theta=(0.2, 1.0, 0.3, 0.7), phi=(0.5, 2.0, 1.1, 4.0))
        expected = kron_all([
            qubit_rotation(0.2, 0.5),
            spinj_rotation(1, 1.0, 2.0),
            sun_rotation(3, [0.3, 0.7], [1.1, 4.0]),
        ])
        assert_allclose(product_rotation(symmetry, point), expected, atol=1e-12)

    def test_evaluate_many_matches_evaluate(self, rng):
        family = RotationFamily(symmetry=SymmetrySpec(sites=(QUBIT, QUBIT)))
        thetas = rng.uniform(0, 1.5, (6, 2))
        phis = rng.uniform(0, 3, (6, 2))
        stack = family.evaluate_many(thetas, phis)
        for p in range(6):
            point = PhasePoint(theta=tuple(thetas[p]), phi=tuple(phis[p]))
            assert_allclose(stack[p], family.evaluate(point), atol=1e-13)

    def test_big_phi_honoured(self):
        family = RotationFamily(symmetry=SymmetrySpec(sites=(QUBIT,)))
        point = PhasePoint(theta=(0.3,), phi=(0.2,), Phi=(0.9,))
        assert_allclose(family.evaluate(point), qubit_rotation(0.3, 0.2, 0.9), atol=1e-13)

    def test_shape_mismatch(self):
        family = RotationFamily(symmetry=SymmetrySpec(sites=(QUBIT, QUBIT)))
        with pytest.raises(ArgumentError):
            family.evaluate(PhasePoint(theta=(0.1,), phi=(0.2,)))
        with pytest.raises(ArgumentError):
            family.evaluate_many(np.zeros((3, 1)), np.zeros((3, 1)))


class TestInvariants:
    """Φ drops out of kernels and φ-rotations compose additively."""

    @pytest.mark.parametrize("dim", [2, 3, 4, 6])
    def test_big_phi_drops_out_of_spin_kernels(self, dim, rng):
        parity = parity_operator(dim)
        j = Fraction(dim - 1, 2)
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        reference = spinj_rotation(j, theta, phi)
        for big_phi in rng.uniform(0, 2 * np.pi, 5):
            u = spinj_rotation(j, theta, phi, big_phi)
            assert_allclose(
                u @ parity @ u.conj().T, reference @ parity @ reference.conj().T, atol=1e-12
            )

    def test_big_phi_drops_out_of_qubit_kernel(self, rng):
        parity = parity_operator(2)
        reference = qubit_rotation(0.7, 1.9)
        for big_phi in rng.uniform(0, np.pi, 5):
            u = qubit_rotation(0.7, 1.9, big_phi)
            assert_allclose(
                u @ parity @ u.conj().T, reference @ parity @ reference.conj().T, atol=1e-12
            )

    def test_phi_composition(self, rng):
        for a, b in rng.uniform(-np.pi, np.pi, (5, 2)):
            assert_allclose(
                qubit_rotation(0, a) @ qubit_rotation(0, b), qubit_rotation(0, a + b), atol=1e-13
            )
            assert_allclose(
                spinj_rotation(2, 0, a) @ spinj_rotation(2, 0, b),
                spinj_rotation(2, 0, a + b),
                atol=1e-12,
            )
