"""Core data models for spinwigner.

All models use Pydantic v2 for validation and serialization. Numeric payloads
are numpy arrays, frozen read-only after validation.
"""

import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from spinwigner.config import get_settings

# =============================================================================
# Enums
# =============================================================================


class SiteConvention(str, Enum):
    """How a site's rotation is parametrized.

    QUBIT uses full Pauli exponents (Bloch angle 2θ), SPIN uses the
    spin-j generators J2, J3, SUN uses the SU(N) coherent-state chain.
    """

    QUBIT = "qubit"
    SPIN = "spin"
    SUN = "sun"


class KernelFamily(str, Enum):
    """Kernel families."""

    QUBIT = "qubit"
    SPIN_J = "spin-j"
    MULTIQUBIT = "multiqubit-global"
    QUDIT_SUN = "qudit-sun"
    TENSOR = "tensor-product"


class StateTag(str, Enum):
    """State factory tags."""

    BASIS = "basis"
    CAT = "cat"
    PLUS = "plus"
    BELL = "bell"
    GHZ = "ghz"
    COHERENT = "coherent"
    MIXED = "mixed"
    FILE = "file"


class Command(str, Enum):
    """CLI job commands."""

    WIGNER = "wigner"
    QFUNC = "qfunc"
    VERIFY = "verify"
    EVOLVE = "evolve"
    RECONSTRUCT = "reconstruct"


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


# =============================================================================
# Symmetry
# =============================================================================


class SiteSpec(BaseModel):
    """One site of a composite system: SU(n) acting in dimension d."""

    convention: SiteConvention
    n: int = Field(ge=2)
    d: int = Field(ge=2)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_convention(self) -> "SiteSpec":
        if self.convention == SiteConvention.QUBIT and (self.n, self.d) != (2, 2):
            raise ValueError("qubit sites have n = d = 2")
        if self.convention == SiteConvention.SPIN and self.n != 2:
            raise ValueError("spin sites carry SU(2), n = 2")
        if self.convention == SiteConvention.SUN and self.n != self.d:
            raise ValueError("SU(N) sites use the defining representation, d = n")
        return self

    @property
    def n_angles(self) -> int:
        """Number of θ components (and of φ components) on this site."""
        return self.n - 1

    @property
    def theta_domain(self) -> list[tuple[float, float]]:
        if self.convention == SiteConvention.SPIN:
            return [(0.0, math.pi)]
        return [(0.0, math.pi / 2)] * self.n_angles

    @property
    def phi_domain(self) -> list[tuple[float, float]]:
        if self.convention == SiteConvention.QUBIT:
            return [(0.0, math.pi)]
        if self.convention == SiteConvention.SPIN:
            return [(0.0, 2 * math.pi)]
        # matrix period of exp(i Λ_l φ) for the l-th diagonal generator
        return [(0.0, 2 * math.pi / math.sqrt(2.0 / (l * (l + 1)))) for l in range(1, self.n)]


class SymmetrySpec(BaseModel):
    """Decomposition of a system into sites; D = Π dᵢ, 𝔇 = Π nᵢ."""

    sites: tuple[SiteSpec, ...] = Field(min_length=1)

    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        return math.prod(s.d for s in self.sites)

    @property
    def group_dimension(self) -> int:
        return math.prod(s.n for s in self.sites)

    @property
    def k(self) -> int:
        return len(self.sites)

    @property
    def n_theta(self) -> int:
        return sum(s.n_angles for s in self.sites)

    @property
    def n_phi(self) -> int:
        return self.n_theta

    def site_slices(self) -> list[slice]:
        """Column ranges of each site inside the flattened θ (or φ) vector."""
        slices, start = [], 0
        for site in self.sites:
            slices.append(slice(start, start + site.n_angles))
            start += site.n_angles
        return slices


# =============================================================================
# Phase space
# =============================================================================


class PhasePoint(BaseModel):
    """Phase-space coordinates Ω, flattened over sites in site order.

    Φ components are optional; the kernels here never depend on them.
    """

    theta: tuple[float, ...]
    phi: tuple[float, ...]
    Phi: tuple[float, ...] = ()

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_angles(self) -> "PhasePoint":
        if len(self.theta) != len(self.phi):
            raise ValueError("theta and phi must have the same number of components")
        if self.Phi and len(self.Phi) != len(self.theta):
            raise ValueError("Phi must be empty or match theta in length")
        if not all(math.isfinite(a) for a in (*self.theta, *self.phi, *self.Phi)):
            raise ValueError("angles must be finite")
        return self

    @classmethod
    def uniform(cls, count: int, theta: float, phi: float) -> "PhasePoint":
        """Point with every component equal (a collective-slice point)."""
        return cls(theta=(theta,) * count, phi=(phi,) * count)


class Quadrature(BaseModel):
    """Weighted node set; weights include the measure density and sum to D."""

    thetas: np.ndarray
    phis: np.ndarray
    weights: np.ndarray
    dimension: int = Field(ge=1)
    exactness: str = ""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_nodes(self) -> "Quadrature":
        thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        phis = np.atleast_2d(np.asarray(self.phis, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if thetas.shape != phis.shape or thetas.shape[0] != weights.shape[0]:
            raise ValueError("node arrays and weights disagree in shape")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(weights.sum() - self.dimension) > 1e-10 * self.dimension:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected {self.dimension}")
        object.__setattr__(self, "thetas", _freeze(thetas))
        object.__setattr__(self, "phis", _freeze(phis))
        object.__setattr__(self, "weights", _freeze(weights))
        return self

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def points(self) -> list[PhasePoint]:
        return [
            PhasePoint(theta=tuple(t), phi=tuple(p))
            for t, p in zip(self.thetas.tolist(), self.phis.tolist(), strict=True)
        ]


class ScalarField(BaseModel):
    """Real field values at phase points, optionally on a rows x cols grid."""

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    shape: tuple[int, int] | None = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_values(self) -> "ScalarField":
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            raise ValueError("field values must be real")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if self.shape is not None and math.prod(self.shape) != values.size:
            raise ValueError("grid shape does not match the number of values")
        object.__setattr__(self, "values", _freeze(values.astype(float)))
        return self

    @property
    def grid(self) -> np.ndarray:
        """Values reshaped to the grid (rows = θ, cols = φ)."""
        if self.shape is None:
            raise ValueError("field is not on a grid")
        return self.values.reshape(self.shape)


# =============================================================================
# States
# =============================================================================


def density_violations(matrix: np.ndarray, tolerance: float | None = None) -> list[str]:
    """List the density-operator invariants a matrix violates.

    With ``tolerance=None`` the configured contract tolerances apply
    (Hermitian 1e-12, trace 1e-12, eigenvalues ≥ -1e-10).
    """
    tol = get_settings().tolerances
    herm_tol = tolerance if tolerance is not None else tol.hermitian
    trace_tol = tolerance if tolerance is not None else tol.trace
    pos_tol = tolerance if tolerance is not None else tol.positivity

    problems: list[str] = []
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return [f"matrix must be square, got shape {matrix.shape}"]
    asym = float(np.max(np.abs(matrix - matrix.conj().T)))
    if asym > herm_tol:
        problems.append(f"not Hermitian (residual {asym:.3g})")
        return problems
    trace = complex(np.trace(matrix))
    if abs(trace - 1) > trace_tol:
        problems.append(f"trace {trace.real:.12g} != 1")
    min_eig = float(np.linalg.eigvalsh(matrix).min())
    if min_eig < -pos_tol:
        problems.append(f"negative eigenvalue {min_eig:.3g}")
    return problems


def nearest_density(matrix: np.ndarray) -> np.ndarray:
    """Hermitian part with negative eigenvalues clipped, renormalized to trace 1."""
    hermitian = (matrix + matrix.conj().T) / 2
    values, vectors = np.linalg.eigh(hermitian)
    values = np.clip(values, 0.0, None)
    if values.sum() <= 0:
        raise ValueError("matrix has no positive part")
    values = values / values.sum()
    return (vectors * values) @ vectors.conj().T


class DensityOperator(BaseModel):
    """Hermitian, positive, trace-one operator of dimension D."""

    matrix: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_complex(cls, value: Any) -> np.ndarray:
        return np.array(value, dtype=complex)

    @model_validator(mode="after")
    def _check_density(self) -> "DensityOperator":
        problems = density_violations(self.matrix)
        if problems:
            raise ValueError("invalid density operator: " + "; ".join(problems))
        _freeze(self.matrix)
        return self

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


class StateSpec(BaseModel):
    """Parsed state mini-language, e.g. ``cat:j=7/2`` or ``plus:6``."""

    tag: StateTag
    two_j: int | None = Field(default=None, ge=0)
    two_m: int | None = None
    k: int | None = Field(default=None, ge=1)
    label: str | None = None
    theta: float | None = None
    phi: float | None = None
    dim: int | None = Field(default=None, ge=1)
    path: Path | None = None
    text: str = ""


# =============================================================================
# Verification
# =============================================================================


class FrameReport(BaseModel):
    """Measured Stratonovich-Weyl residuals and frame spectrum of a kernel."""

    kernel_id: str
    quadrature: str
    dimension: int
    hermiticity_residual: float = Field(ge=0)
    standardization_residual: float = Field(ge=0)
    trace_residual: float = Field(ge=0)
    reality_residual: float = Field(ge=0)
    frame_spectrum: list[float]
    min_frame_eigenvalue: float
    self_duality_residual: float = Field(ge=0)
    covariance_residual: float = Field(ge=0)
    completeness: bool
    reconstruction_error: float | None = None
    documented_self_dual: bool = False

    def failures(self) -> list[str]:
        """Asserted conditions that miss their thresholds.

        The self-duality residual counts only for documented self-dual
        kernels; elsewhere it is reported but never asserted.
        """
        tol = get_settings().tolerances
        checks = [
            ("hermiticity", self.hermiticity_residual, tol.verify),
            ("reality", self.reality_residual, tol.verify),
            ("standardization", self.standardization_residual, tol.verify),
            ("frame trace", self.trace_residual, tol.self_duality * self.dimension**2),
            ("covariance", self.covariance_residual, tol.verify),
        ]
        if self.documented_self_dual:
            checks.append(("self-duality", self.self_duality_residual, tol.self_duality))
        if self.reconstruction_error is not None:
            checks.append(("reconstruction", self.reconstruction_error, tol.reconstruction))
        out = [f"{name} residual {value:.3g} > {limit:.3g}" for name, value, limit in checks
               if value > limit]
        if not self.completeness:
            out.append(f"frame not informationally complete (min eigenvalue "
                       f"{self.min_frame_eigenvalue:.3g})")
        return out

    def gate(self) -> bool:
        """True when every asserted condition passes."""
        return not self.failures()


# =============================================================================
# Jobs
# =============================================================================


class JobConfig(BaseModel):
    """Everything a CLI job needs; built from flags."""

    command: Command
    kernel: str = "qubit"
    j: str | None = None
    k: int | None = Field(default=None, ge=1)
    n: int | None = Field(default=None, ge=2)
    state: str | None = None
    grid: tuple[int, int] = (91, 181)
    theta_range: tuple[float, float] | None = None
    phi_range: tuple[float, float] | None = None
    quad: str | None = None
    time: float = 0.0
    probes: int = Field(default=4, ge=0)
    out: Path | None = None
    gnuplot: bool = False
    seed: int = 0
    threads: int = Field(default=1, ge=1)

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, value: tuple[int, int]) -> tuple[int, int]:
        if min(value) < 2:
            raise ValueError("grid resolution must be at least 2 in each direction")
        return value
