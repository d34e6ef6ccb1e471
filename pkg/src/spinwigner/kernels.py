"""Parity operators and Wigner kernel families.

A kernel is Δ(Ω) = (1/D) 𝕌(Ω) Π 𝕌†(Ω) with Π = I − N(D) Λ_{D²−1}. Kernels are
immutable and evaluated on demand; grids and measures live in phase_space.
"""

import logging
import math
from fractions import Fraction
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from spinwigner.config import get_settings
from spinwigner.errors import ArgumentError, InvalidDimensionError, ResourceLimitError
from spinwigner.models import (
    KernelFamily,
    PhasePoint,
    SiteConvention,
    SiteSpec,
    SymmetrySpec,
)
from spinwigner.operators import check_unitary, kron_all, lambda_last, parse_spin
from spinwigner.rotations import RotationFamily

logger = logging.getLogger(__name__)


def norm_constant(dim: int) -> float:
    """N(D) = √((D+1) D (D−1) / 2)."""
    if dim < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {dim}")
    return math.sqrt((dim + 1) * dim * (dim - 1) / 2)


def parity_operator(dim: int) -> np.ndarray:
    """Π^[D] = I − N(D) Λ_{D²−1}; diagonal, Tr Π = D, Tr Π² = D³."""
    return np.eye(dim, dtype=complex) - norm_constant(dim) * lambda_last(dim)


# =============================================================================
# Kernel
# =============================================================================


class Kernel(BaseModel):
    """A kernel family Δ(Ω) over the phase space of a symmetry.

    ``twist`` is the accumulated unitary V of rotated kernels, which evaluate
    to V†Δ(Ω)V. ``components`` holds the factors of a tensor-product kernel.
    """

    symmetry: SymmetrySpec
    family: KernelFamily
    parity: np.ndarray
    label: str
    components: tuple["Kernel", ...] = ()
    twist: np.ndarray | None = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def model_post_init(self, __context) -> None:
        self.parity.flags.writeable = False
        if self.twist is not None:
            self.twist.flags.writeable = False

    @property
    def dimension(self) -> int:
        return self.symmetry.dimension

    @cached_property
    def rotation(self) -> RotationFamily:
        return RotationFamily(symmetry=self.symmetry)

    @cached_property
    def parity_diagonal(self) -> np.ndarray:
        """Real diagonal of Π; every parity built here is diagonal."""
        return np.real(np.diag(self.parity)).copy()

    @property
    def fiducial(self) -> np.ndarray:
        """Reference vector of the coherent states: the last basis vector."""
        vector = np.zeros(self.dimension, dtype=complex)
        vector[-1] = 1.0
        return vector

    @property
    def harmonic_degree(self) -> int:
        """Highest φ-harmonic carried by kernel matrix elements on any site."""
        degrees = []
        for site in self.symmetry.sites:
            if site.convention == SiteConvention.QUBIT:
                degrees.append(2)
            elif site.convention == SiteConvention.SPIN:
                degrees.append(site.d - 1)
            else:
                degrees.append(site.n)
        return max(degrees)

    @property
    def documented_self_dual(self) -> bool:
        """True for kernels whose frame is known to be the identity."""
        if self.family == KernelFamily.QUBIT:
            return True
        if self.family == KernelFamily.TENSOR:
            return all(c.documented_self_dual for c in self.components)
        return False

    @property
    def domain(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """(θ-range, φ-range) of every angle pair, site by site."""
        out = []
        for site in self.symmetry.sites:
            out.extend(zip(site.theta_domain, site.phi_domain, strict=True))
        return out

    @property
    def su2_sites_only(self) -> bool:
        return all(s.convention != SiteConvention.SUN for s in self.symmetry.sites)


Kernel.model_rebuild()


# =============================================================================
# Construction
# =============================================================================


def _check_cap(dim: int) -> None:
    cap = get_settings().limits.max_dimension
    if dim > cap:
        raise ResourceLimitError(f"Hilbert dimension {dim} exceeds the configured cap {cap}")


def _spin_label(two_j: int) -> str:
    return str(Fraction(two_j, 2))


def make_kernel(
    family: KernelFamily | str,
    *,
    j: float | int | str | Fraction | None = None,
    k: int | None = None,
    n: int | None = None,
    components: list[Kernel] | tuple[Kernel, ...] | None = None,
) -> Kernel:
    """Build a kernel of the given family.

    Args:
        family: Family tag or its string value.
        j: Spin for ``spin-j``.
        k: Site count for ``multiqubit-global``, ``qudit-sun`` and, without
            ``components``, for a tensor product of k qubit kernels.
        n: Group rank N for ``qudit-sun``.
        components: Factor kernels for ``tensor-product``.

    Raises:
        ArgumentError: unknown family or missing parameters.
        InvalidSpinError / InvalidDimensionError: bad j, k or N.
        ResourceLimitError: D over the configured cap.
    """
    try:
        family = KernelFamily(family)
    except ValueError as e:
        raise ArgumentError(f"unknown kernel family {family!r}") from e

    if family == KernelFamily.QUBIT:
        sites = (SiteSpec(convention=SiteConvention.QUBIT, n=2, d=2),)
        return Kernel(
            symmetry=SymmetrySpec(sites=sites),
            family=family,
            parity=parity_operator(2),
            label="qubit",
        )

    if family == KernelFamily.SPIN_J:
        if j is None:
            raise ArgumentError("spin-j kernels need j")
        spin = parse_spin(j)
        two_j = int(2 * spin)
        if two_j < 1:
            raise InvalidDimensionError("spin-j kernels need j ≥ 1/2")
        _check_cap(two_j + 1)
        sites = (SiteSpec(convention=SiteConvention.SPIN, n=2, d=two_j + 1),)
        return Kernel(
            symmetry=SymmetrySpec(sites=sites),
            family=family,
            parity=parity_operator(two_j + 1),
            label=f"spin-j(j={_spin_label(two_j)})",
        )

    if family == KernelFamily.MULTIQUBIT:
        k = _check_sites(k, "multiqubit-global")
        if k > get_settings().limits.max_qubits:
            raise ResourceLimitError(
                f"{k} qubits exceeds the configured cap {get_settings().limits.max_qubits}"
            )
        if k == 1:
            return make_kernel(KernelFamily.QUBIT)
        _check_cap(2**k)
        sites = tuple(SiteSpec(convention=SiteConvention.QUBIT, n=2, d=2) for _ in range(k))
        return Kernel(
            symmetry=SymmetrySpec(sites=sites),
            family=family,
            parity=parity_operator(2**k),
            label=f"multiqubit-global(k={k})",
        )

    if family == KernelFamily.QUDIT_SUN:
        if n is None or n < 2:
            raise InvalidDimensionError(f"qudit-sun kernels need N ≥ 2, got {n}")
        k = _check_sites(k if k is not None else 1, "qudit-sun")
        _check_cap(n**k)
        sites = tuple(SiteSpec(convention=SiteConvention.SUN, n=n, d=n) for _ in range(k))
        return Kernel(
            symmetry=SymmetrySpec(sites=sites),
            family=family,
            parity=parity_operator(n**k),
            label=f"qudit-sun(N={n},k={k})",
        )

    # tensor product
    if not components:
        if k is None:
            raise ArgumentError("tensor-product kernels need components or k")
        k = _check_sites(k, "tensor-product")
        components = [make_kernel(KernelFamily.QUBIT) for _ in range(k)]
    components = tuple(components)
    dim = math.prod(c.dimension for c in components)
    _check_cap(dim)
    twist = None
    if any(c.twist is not None for c in components):
        twist = kron_all(
            [c.twist if c.twist is not None else np.eye(c.dimension) for c in components]
        )
    return Kernel(
        symmetry=SymmetrySpec(sites=tuple(s for c in components for s in c.symmetry.sites)),
        family=KernelFamily.TENSOR,
        parity=kron_all([c.parity for c in components]),
        label="tensor-product[" + ",".join(c.label for c in components) + "]",
        components=components,
        twist=twist,
    )


def _check_sites(k: int | None, family: str) -> int:
    if k is None or k < 1:
        raise InvalidDimensionError(f"{family} kernels need k ≥ 1, got {k}")
    return k


def rotated_kernel(kernel: Kernel, unitary: np.ndarray) -> Kernel:
    """Kernel evaluating to V†Δ(Ω)V, so Tr[VρV† Δ(Ω)] = Tr[ρ Δ̃(Ω)]."""
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (kernel.dimension, kernel.dimension):
        raise ArgumentError(
            f"rotation of shape {unitary.shape} does not act on dimension {kernel.dimension}"
        )
    check_unitary(unitary)
    twist = unitary.copy() if kernel.twist is None else kernel.twist @ unitary
    twist.flags.writeable = False
    return kernel.model_copy(update={"twist": twist, "label": f"{kernel.label}~rotated"})


# =============================================================================
# Evaluation
# =============================================================================


def effective_rotations(kernel: Kernel, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Stack of V†𝕌(Ω), the rotations actually conjugating Π."""
    stack = kernel.rotation.evaluate_many(thetas, phis)
    if kernel.twist is not None:
        stack = kernel.twist.conj().T[None, :, :] @ stack
    return stack


def evaluate_many(kernel: Kernel, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Stack of Δ(Ω) over (P, n_theta) angle arrays, shape (P, D, D)."""
    rotations = effective_rotations(kernel, thetas, phis)
    weighted = rotations * (kernel.parity_diagonal / kernel.dimension)[None, None, :]
    return weighted @ rotations.conj().transpose(0, 2, 1)


def evaluate(kernel: Kernel, point: PhasePoint) -> np.ndarray:
    """Δ(Ω) at one point: Hermitian, unit trace, spectrum eig(Π)/D."""
    kernel.rotation.check_point(point)
    return evaluate_many(kernel, np.array([point.theta]), np.array([point.phi]))[0]


class KernelSummary(BaseModel):
    """Row of the kernel catalogue shown by the CLI."""

    cli_name: str
    family: KernelFamily
    parameters: str
    dimension: str
    description: str = Field(default="")


KERNEL_CATALOGUE: list[KernelSummary] = [
    KernelSummary(cli_name="qubit", family=KernelFamily.QUBIT, parameters="-",
                  dimension="2", description="single qubit, half-angle Bloch sphere"),
    KernelSummary(cli_name="spinj", family=KernelFamily.SPIN_J, parameters="--j",
                  dimension="2j+1", description="spin-j, global parity"),
    KernelSummary(cli_name="multiqubit", family=KernelFamily.MULTIQUBIT, parameters="--k",
                  dimension="2^k", description="k qubit rotations, global parity"),
    KernelSummary(cli_name="tensorqubit", family=KernelFamily.TENSOR, parameters="--k",
                  dimension="2^k", description="product of k qubit kernels"),
    KernelSummary(cli_name="sun", family=KernelFamily.QUDIT_SUN, parameters="--n [--k]",
                  dimension="N^k", description="SU(N) coherent states, global parity"),
]
