"""Dense operator algebra: generalized Gell-Mann matrices, spin-j operators,
tensor products, exponentials of Hermitian matrices and vectorization.

Matrices are plain ``numpy`` complex arrays. Vectorization stacks columns
(Fortran order) everywhere in the package.
"""

import math
from fractions import Fraction
from functools import reduce

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spinwigner.config import get_settings
from spinwigner.errors import (
    ArgumentError,
    ContractViolationError,
    InvalidDimensionError,
    InvalidSpinError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_dimension(dim: int) -> None:
    if dim < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {dim}")


# =============================================================================
# Generalized Gell-Mann matrices
# =============================================================================


def symmetric_generator(a: int, b: int, dim: int) -> np.ndarray:
    """|a⟩⟨b| + |b⟩⟨a| for 0 ≤ a < b < dim."""
    out = np.zeros((dim, dim), dtype=complex)
    out[a, b] = out[b, a] = 1
    return out


def antisymmetric_generator(a: int, b: int, dim: int) -> np.ndarray:
    """-i|a⟩⟨b| + i|b⟩⟨a| for 0 ≤ a < b < dim; σ_y for (0, 1) in dimension 2."""
    out = np.zeros((dim, dim), dtype=complex)
    out[a, b] = -1j
    out[b, a] = 1j
    return out


def diagonal_generator(level: int, dim: int) -> np.ndarray:
    """The level-th diagonal generator, 1 ≤ level ≤ dim - 1.

    √(2/(l(l+1))) · diag(1, …, 1, -l, 0, …, 0) with l leading ones.
    """
    if not 1 <= level <= dim - 1:
        raise ArgumentError(f"diagonal generator index {level} outside 1..{dim - 1}")
    entries = np.zeros(dim)
    entries[:level] = 1.0
    entries[level] = -level
    return np.diag(entries * math.sqrt(2.0 / (level * (level + 1)))).astype(complex)


def lambda_last(dim: int) -> np.ndarray:
    """Λ_{D²-1}: first D-1 entries √(2/(D(D-1))), last entry -√(2(D-1)/D)."""
    _check_dimension(dim)
    return diagonal_generator(dim - 1, dim)


class OperatorBasis(BaseModel):
    """Ordered Hermitian traceless basis with Tr[Λ_a Λ_b] = 2δ_ab."""

    dim: int = Field(ge=2)
    elements: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_shape(self) -> "OperatorBasis":
        expected = (self.dim**2 - 1, self.dim, self.dim)
        if self.elements.shape != expected:
            raise ValueError(f"expected elements of shape {expected}, got {self.elements.shape}")
        self.elements.flags.writeable = False
        return self

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __getitem__(self, index: int) -> np.ndarray:
        return self.elements[index]

    def gram(self) -> np.ndarray:
        """Matrix of Frobenius products Tr[Λ_a† Λ_b]."""
        flat = self.elements.reshape(len(self), -1)
        return flat.conj() @ flat.T


def gell_mann_basis(dim: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices of su(D).

    Symmetric pairs, then antisymmetric pairs (both in ascending (a, b)
    order), then diagonal generators; the last element is lambda_last(D).
    """
    _check_dimension(dim)
    pairs = [(a, b) for a in range(dim) for b in range(a + 1, dim)]
    elements = (
        [symmetric_generator(a, b, dim) for a, b in pairs]
        + [antisymmetric_generator(a, b, dim) for a, b in pairs]
        + [diagonal_generator(level, dim) for level in range(1, dim)]
    )
    return OperatorBasis(dim=dim, elements=np.array(elements))


# =============================================================================
# Spin-j operators
# =============================================================================


def parse_spin(j: float | int | str | Fraction) -> Fraction:
    """Convert 1/2, "3/2", 1.5, ... to an exact half-integer."""
    try:
        value = Fraction(j) if not isinstance(j, float) else Fraction(j).limit_denominator(2)
    except (ValueError, TypeError, OverflowError, ZeroDivisionError) as e:
        raise InvalidSpinError(f"cannot read spin {j!r}") from e
    if isinstance(j, float) and abs(float(value) - j) > 1e-12:
        raise InvalidSpinError(f"spin {j!r} is not a half-integer")
    if value < 0 or (2 * value).denominator != 1:
        raise InvalidSpinError(f"spin must be a non-negative half-integer, got {j!r}")
    return value


class SpinOperators(BaseModel):
    """Angular-momentum matrices of the (2j+1)-dimensional irrep.

    Basis ordered |j, j⟩, |j, j-1⟩, …, |j, -j⟩ so J3 is diagonal, descending.
    """

    two_j: int = Field(ge=0)
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def casimir(self) -> np.ndarray:
        """J² = J1² + J2² + J3²."""
        return self.J1 @ self.J1 + self.J2 @ self.J2 + self.J3 @ self.J3


def spin_operators(j: float | int | str | Fraction) -> SpinOperators:
    """Standard spin-j matrices built from the ladder operator J+."""
    spin = parse_spin(j)
    dim = int(2 * spin) + 1
    m = np.array([float(spin) - a for a in range(dim)])
    raising = np.zeros((dim, dim), dtype=complex)
    jj = float(spin * (spin + 1))
    for a in range(1, dim):
        raising[a - 1, a] = math.sqrt(jj - m[a] * (m[a] + 1))
    lowering = raising.conj().T
    ops = {
        "J1": (raising + lowering) / 2,
        "J2": (raising - lowering) / 2j,
        "J3": np.diag(m).astype(complex),
    }
    for op in ops.values():
        op.flags.writeable = False
    return SpinOperators(two_j=dim - 1, **ops)


# =============================================================================
# Products, exponentials, contractions
# =============================================================================


def kron_all(factors: list[np.ndarray]) -> np.ndarray:
    """Tensor product in list order."""
    if not factors:
        raise ArgumentError("kron_all needs at least one factor")
    return reduce(np.kron, factors)


def kron_batch(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Pointwise tensor product of two stacks of matrices (P, a, b) ⊗ (P, c, d)."""
    p, a, b = left.shape
    _, c, d = right.shape
    return np.einsum("pab,pcd->pacbd", left, right).reshape(p, a * c, b * d)


def check_hermitian(matrix: np.ndarray, tol: float | None = None) -> None:
    """Raise ContractViolationError unless the matrix is Hermitian."""
    if tol is None:
        tol = get_settings().tolerances.hermitian
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    residual = float(np.max(np.abs(matrix - matrix.conj().T)))
    if residual > tol * scale:
        raise ContractViolationError(f"matrix is not Hermitian (residual {residual:.3g})")


def check_unitary(matrix: np.ndarray, tol: float | None = None) -> None:
    """Raise ContractViolationError unless U†U = I."""
    if tol is None:
        tol = get_settings().tolerances.unitary
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    residual = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))
    if residual > tol:
        raise ContractViolationError(f"matrix is not unitary (residual {residual:.3g})")


class HermitianExponential:
    """e^{isH} for many phases s from a single eigendecomposition of H."""

    def __init__(self, hamiltonian: np.ndarray):
        check_hermitian(hamiltonian)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(hamiltonian)
        self._vectors_h = self.eigenvectors.conj().T

    def __call__(self, s: float) -> np.ndarray:
        phases = np.exp(1j * s * self.eigenvalues)
        return (self.eigenvectors * phases) @ self._vectors_h

    def batch(self, s: np.ndarray) -> np.ndarray:
        """Stack of exponentials, shape (len(s), D, D)."""
        phases = np.exp(1j * np.multiply.outer(np.asarray(s, dtype=float), self.eigenvalues))
        return (self.eigenvectors[None, :, :] * phases[:, None, :]) @ self._vectors_h


def expi_hermitian(hamiltonian: np.ndarray, s: float) -> np.ndarray:
    """Unitary e^{isH} of a Hermitian H via eigendecomposition."""
    return HermitianExponential(np.asarray(hamiltonian, dtype=complex))(s)


def frobenius(a: np.ndarray, b: np.ndarray) -> complex:
    """Tr[A†B]."""
    if a.shape != b.shape:
        raise ArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def vectorize(matrix: np.ndarray) -> np.ndarray:
    """Column-stacked vector of a square matrix."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    return matrix.reshape(-1, order="F")


def vectorize_batch(matrices: np.ndarray) -> np.ndarray:
    """Column-stacked vectors of a stack (P, D, D), shape (P, D²)."""
    p, dim, _ = matrices.shape
    return matrices.transpose(0, 2, 1).reshape(p, dim * dim)


def unvectorize(vector: np.ndarray) -> np.ndarray:
    """Inverse of vectorize."""
    dim = math.isqrt(vector.shape[0])
    if dim * dim != vector.shape[0]:
        raise ArgumentError(f"vector length {vector.shape[0]} is not a square")
    return vector.reshape(dim, dim, order="F")
