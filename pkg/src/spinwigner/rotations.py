"""Parametrized unitary families 𝕌(Ω), the "displacements" of the kernels.

Three site conventions coexist:

- qubit:  e^{iσz φ} e^{iσy θ} e^{iσz Φ}, full Pauli exponents (Bloch angle 2θ)
- spin-j: e^{iJ3 φ} e^{iJ2 θ} e^{iJ3 Φ}
- SU(N):  Π_{m=2..N} e^{iλ_diag(m-1) φ_{m-1}} e^{iλ_anti(m-1,m) θ_{m-1}},
          the factor for m = N acting first on the fiducial |N⟩

A composite family is the tensor product of its site rotations in site order.
All exponents carry +i.
"""

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict

from spinwigner.errors import ArgumentError
from spinwigner.models import PhasePoint, SiteConvention, SiteSpec, SymmetrySpec
from spinwigner.operators import (
    SIGMA_Y,
    SIGMA_Z,
    HermitianExponential,
    antisymmetric_generator,
    diagonal_generator,
    kron_batch,
    spin_operators,
)

_EXP_SIGMA_Y = HermitianExponential(SIGMA_Y)
_EXP_SIGMA_Z = HermitianExponential(SIGMA_Z)


@lru_cache(maxsize=64)
def _spin_exponentials(two_j: int) -> tuple[HermitianExponential, HermitianExponential]:
    ops = spin_operators(f"{two_j}/2")
    return HermitianExponential(ops.J2), HermitianExponential(ops.J3)


@lru_cache(maxsize=64)
def _sun_generators(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """(diagonal, antisymmetric) generator pairs for levels l = 0..n-2."""
    return [
        (diagonal_generator(level + 1, n), antisymmetric_generator(level, level + 1, n))
        for level in range(n - 1)
    ]


@lru_cache(maxsize=64)
def _sun_exponentials(n: int) -> list[tuple[HermitianExponential, HermitianExponential]]:
    return [(HermitianExponential(d), HermitianExponential(a)) for d, a in _sun_generators(n)]


# =============================================================================
# Single-site rotations
# =============================================================================


def qubit_rotation(theta: float, phi: float, Phi: float = 0.0) -> np.ndarray:
    """e^{iσz φ} e^{iσy θ} e^{iσz Φ}."""
    return _EXP_SIGMA_Z(phi) @ _EXP_SIGMA_Y(theta) @ _EXP_SIGMA_Z(Phi)


def spinj_rotation(j, theta: float, phi: float, Phi: float = 0.0) -> np.ndarray:
    """e^{iJ3 φ} e^{iJ2 θ} e^{iJ3 Φ} in dimension 2j+1."""
    two_j = spin_operators(j).two_j
    exp_j2, exp_j3 = _spin_exponentials(two_j)
    return exp_j3(phi) @ exp_j2(theta) @ exp_j3(Phi)


def sun_rotation(n: int, thetas, phis) -> np.ndarray:
    """SU(N) coherent-state rotation from N-1 θ's and N-1 φ's.

    Reduces to qubit_rotation(θ₁, φ₁, 0) for N = 2.
    """
    thetas = np.asarray(thetas, dtype=float).ravel()
    phis = np.asarray(phis, dtype=float).ravel()
    if n < 2 or thetas.size != n - 1 or phis.size != n - 1:
        raise ArgumentError(f"SU({n}) rotation needs {n - 1} θ and {n - 1} φ angles")
    return _sun_batch(n, thetas[None, :], phis[None, :])[0]


def _sun_batch(n: int, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    out = None
    for level, (exp_diag, exp_anti) in enumerate(_sun_exponentials(n)):
        factor = exp_diag.batch(phis[:, level]) @ exp_anti.batch(thetas[:, level])
        out = factor if out is None else out @ factor
    return out


def sun_state_tangents(n: int, thetas: np.ndarray, phis: np.ndarray):
    """Coherent states U|N⟩ and their parameter derivatives.

    Returns ``(states, tangents)`` with shapes (P, N) and (P, 2(N-1), N);
    tangents are ordered θ₁…θ_{N-1}, φ₁…φ_{N-1}.
    """
    thetas = np.atleast_2d(thetas)
    phis = np.atleast_2d(phis)
    points = thetas.shape[0]
    factors: list[tuple[np.ndarray, np.ndarray, int]] = []  # (matrices, generator, column)
    gens = _sun_generators(n)
    for level, (exp_diag, exp_anti) in enumerate(_sun_exponentials(n)):
        diag, anti = gens[level]
        factors.append((exp_diag.batch(phis[:, level]), diag, (n - 1) + level))
        factors.append((exp_anti.batch(thetas[:, level]), anti, level))

    # suffix[q] = G_q … G_last |N⟩
    suffix = [np.zeros((points, n), dtype=complex)] * (len(factors) + 1)
    fiducial = np.zeros((points, n), dtype=complex)
    fiducial[:, -1] = 1.0
    suffix[-1] = fiducial
    for q in range(len(factors) - 1, -1, -1):
        suffix[q] = np.einsum("pab,pb->pa", factors[q][0], suffix[q + 1])

    tangents = np.empty((points, 2 * (n - 1), n), dtype=complex)
    prefix = np.broadcast_to(np.eye(n, dtype=complex), (points, n, n))
    for q, (matrices, generator, column) in enumerate(factors):
        inner = 1j * np.einsum("ab,pb->pa", generator, suffix[q])
        tangents[:, column, :] = np.einsum("pab,pb->pa", prefix, inner)
        prefix = prefix @ matrices
    return suffix[0], tangents


def site_rotation_batch(site: SiteSpec, thetas: np.ndarray, phis: np.ndarray,
                        Phis: np.ndarray | None = None) -> np.ndarray:
    """Stack of one site's rotations, shape (P, d, d)."""
    if site.convention == SiteConvention.SUN:
        return _sun_batch(site.n, thetas, phis)
    if site.convention == SiteConvention.QUBIT:
        exp_y, exp_z = _EXP_SIGMA_Y, _EXP_SIGMA_Z
    else:
        exp_y, exp_z = _spin_exponentials(site.d - 1)
    out = exp_z.batch(phis[:, 0]) @ exp_y.batch(thetas[:, 0])
    if Phis is not None:
        out = out @ exp_z.batch(Phis[:, 0])
    return out


# =============================================================================
# Composite families
# =============================================================================


class RotationFamily(BaseModel):
    """𝕌(Ω) = ⊗ᵢ U_{nᵢ}^{[dᵢ]} over the sites of a symmetry."""

    symmetry: SymmetrySpec

    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        return self.symmetry.dimension

    def check_point(self, point: PhasePoint) -> None:
        if len(point.theta) != self.symmetry.n_theta:
            raise ArgumentError(
                f"point has {len(point.theta)} θ components, "
                f"symmetry needs {self.symmetry.n_theta}"
            )

    def evaluate(self, point: PhasePoint) -> np.ndarray:
        """𝕌 at one point, Φ components honored when present."""
        self.check_point(point)
        thetas = np.array([point.theta], dtype=float)
        phis = np.array([point.phi], dtype=float)
        Phis = np.array([point.Phi], dtype=float) if point.Phi else None
        return self.evaluate_many(thetas, phis, Phis)[0]

    def evaluate_many(self, thetas: np.ndarray, phis: np.ndarray,
                      Phis: np.ndarray | None = None) -> np.ndarray:
        """Stack of 𝕌 over points given as (P, n_theta) angle arrays."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        phis = np.atleast_2d(np.asarray(phis, dtype=float))
        if thetas.shape != phis.shape or thetas.shape[1] != self.symmetry.n_theta:
            raise ArgumentError(
                f"angle arrays of shape {thetas.shape}/{phis.shape} do not match "
                f"{self.symmetry.n_theta} components per point"
            )
        out = None
        for site, cols in zip(self.symmetry.sites, self.symmetry.site_slices(), strict=True):
            site_phis = None
            if Phis is not None and site.convention != SiteConvention.SUN:
                site_phis = np.asarray(Phis, dtype=float)[:, cols]
            factor = site_rotation_batch(site, thetas[:, cols], phis[:, cols], site_phis)
            out = factor if out is None else kron_batch(out, factor)
        return out


def product_rotation(symmetry: SymmetrySpec, point: PhasePoint) -> np.ndarray:
    """Tensor product of per-site rotations in site order."""
    return RotationFamily(symmetry=symmetry).evaluate(point)
