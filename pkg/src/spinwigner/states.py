"""Benchmark states, the one-axis-twisting Hamiltonian and unitary evolution.

State strings follow a small mini-language::

    basis:j=1,m=0    cat:j=7/2    plus:6    bell:phi+    ghz:3
    coherent:theta=0.4,phi=1.2    mixed:4    file:state.json

Spin bases are ordered |j, j⟩ … |j, −j⟩; qubit bases |0⟩, |1⟩ with σz|0⟩ = |0⟩.
"""

import logging
import re
from fractions import Fraction
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError

from spinwigner.config import get_settings
from spinwigner.errors import (
    ArgumentError,
    InvalidStateError,
    ResourceLimitError,
)
from spinwigner.kernels import Kernel, effective_rotations, rotated_kernel
from spinwigner.models import (
    DensityOperator,
    StateSpec,
    StateTag,
    density_violations,
    nearest_density,
)
from spinwigner.operators import check_hermitian, expi_hermitian

logger = logging.getLogger(__name__)

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


# =============================================================================
# Parsing
# =============================================================================


def _parse_pairs(body: str, text: str) -> dict[str, str]:
    pairs = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise InvalidStateError(f"expected key=value in state {text!r}, got {part!r}")
        pairs[key.strip().lower()] = value.strip()
    return pairs


def _two_times(value: str, text: str) -> int:
    try:
        fraction = Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidStateError(f"cannot read {value!r} in state {text!r}") from e
    if (2 * fraction).denominator != 1:
        raise InvalidStateError(f"{value!r} is not a half-integer in state {text!r}")
    return int(2 * fraction)


def _positive_int(value: str, text: str) -> int:
    if not re.fullmatch(r"\d+", value.strip()) or int(value) < 1:
        raise InvalidStateError(f"expected a positive integer in state {text!r}, got {value!r}")
    return int(value)


def parse_state_spec(text: str) -> StateSpec:
    """Parse the state mini-language into a StateSpec."""
    tag_text, _, body = text.strip().partition(":")
    try:
        tag = StateTag(tag_text.strip().lower())
    except ValueError as e:
        raise InvalidStateError(f"unknown state tag {tag_text!r} in {text!r}") from e
    body = body.strip()

    try:
        if tag == StateTag.FILE:
            if not body:
                raise InvalidStateError("file states need a path")
            return StateSpec(tag=tag, path=Path(body), text=text)
        if tag in (StateTag.PLUS, StateTag.GHZ):
            return StateSpec(tag=tag, k=_positive_int(body, text), text=text)
        if tag == StateTag.MIXED:
            return StateSpec(tag=tag, dim=_positive_int(body, text), text=text)
        if tag == StateTag.BELL:
            label = body.lower()
            if label not in BELL_LABELS:
                raise InvalidStateError(f"bell label must be one of {BELL_LABELS}, got {body!r}")
            return StateSpec(tag=tag, label=label, text=text)

        pairs = _parse_pairs(body, text) if "=" in body else {"j": body}
        if tag == StateTag.CAT:
            if "j" not in pairs or not pairs["j"]:
                raise InvalidStateError(f"cat states need j, got {text!r}")
            return StateSpec(tag=tag, two_j=_two_times(pairs["j"], text), text=text)
        if tag == StateTag.BASIS:
            if "j" not in pairs or "m" not in pairs:
                raise InvalidStateError(f"basis states need j and m, got {text!r}")
            return StateSpec(
                tag=tag,
                two_j=_two_times(pairs["j"], text),
                two_m=_two_times(pairs["m"], text),
                text=text,
            )
        # coherent
        if "theta" not in pairs or "phi" not in pairs:
            raise InvalidStateError(f"coherent states need theta and phi, got {text!r}")
        try:
            theta, phi = float(pairs["theta"]), float(pairs["phi"])
        except ValueError as e:
            raise InvalidStateError(f"cannot read angles in {text!r}") from e
        return StateSpec(tag=tag, theta=theta, phi=phi, text=text)
    except ValidationError as e:
        raise InvalidStateError(f"invalid state {text!r}: {e.errors()[0]['msg']}") from e


# =============================================================================
# Factory
# =============================================================================


def _projector(vector: np.ndarray) -> DensityOperator:
    vector = vector / np.linalg.norm(vector)
    return DensityOperator(matrix=np.outer(vector, vector.conj()))


def _check_qubits(k: int) -> None:
    cap = get_settings().limits.max_qubits
    if k > cap:
        raise ResourceLimitError(f"{k} qubits exceeds the configured cap {cap}")


def _spin_dimension(two_j: int | None) -> int:
    if two_j is None or two_j < 1:
        raise InvalidStateError("spin states need j ≥ 1/2")
    return two_j + 1


class StateFile(BaseModel):
    """On-disk density matrix: separate real and imaginary D x D arrays."""

    real: list[list[float]]
    imag: list[list[float]]

    def matrix(self) -> np.ndarray:
        real, imag = np.array(self.real, dtype=float), np.array(self.imag, dtype=float)
        if real.ndim != 2 or real.shape != imag.shape or real.shape[0] != real.shape[1]:
            raise InvalidStateError(
                f"state file needs square real/imag arrays of equal shape, got "
                f"{real.shape} and {imag.shape}"
            )
        return real + 1j * imag


def read_state_file(path: Path) -> DensityOperator:
    """Load a state file, projecting onto density operators within 1e-8.

    Raises:
        OSError: unreadable file.
        InvalidStateError: malformed JSON or a matrix too far from a density operator.
    """
    text = Path(path).read_text()
    try:
        matrix = StateFile.model_validate_json(text).matrix()
    except ValidationError as e:
        raise InvalidStateError(f"malformed state file {path}: {e.errors()[0]['msg']}") from e

    problems = density_violations(matrix, get_settings().tolerances.state)
    if problems:
        raise InvalidStateError(f"{path} is not a density operator: " + "; ".join(problems))
    if density_violations(matrix):
        logger.warning("state file %s projected onto the density operators", path)
        matrix = nearest_density(matrix)
    return DensityOperator(matrix=matrix)


def write_state_file(rho: DensityOperator, path: Path) -> None:
    """Write a density operator in the state-file format."""
    payload = StateFile(real=rho.matrix.real.tolist(), imag=rho.matrix.imag.tolist())
    Path(path).write_text(payload.model_dump_json(indent=2))


def make_state(spec: StateSpec | str, kernel: Kernel | None = None) -> DensityOperator:
    """Build the density operator a StateSpec names.

    ``coherent`` states need the kernel whose coherent states they are; the
    angles are applied collectively to every component.
    """
    if isinstance(spec, str):
        spec = parse_state_spec(spec)

    if spec.tag == StateTag.BASIS:
        dim = _spin_dimension(spec.two_j)
        two_m = spec.two_m if spec.two_m is not None else spec.two_j
        if abs(two_m) > spec.two_j or (spec.two_j - two_m) % 2:
            raise InvalidStateError(f"m = {Fraction(two_m, 2)} invalid for "
                                    f"j = {Fraction(spec.two_j, 2)}")
        vector = np.zeros(dim, dtype=complex)
        vector[(spec.two_j - two_m) // 2] = 1
        return _projector(vector)

    if spec.tag == StateTag.CAT:
        dim = _spin_dimension(spec.two_j)
        vector = np.zeros(dim, dtype=complex)
        vector[0] = vector[-1] = 1
        return _projector(vector)

    if spec.tag == StateTag.PLUS:
        _check_qubits(spec.k)
        return _projector(np.ones(2**spec.k, dtype=complex))

    if spec.tag == StateTag.GHZ:
        _check_qubits(spec.k)
        vector = np.zeros(2**spec.k, dtype=complex)
        vector[0] = vector[-1] = 1
        return _projector(vector)

    if spec.tag == StateTag.BELL:
        vector = np.zeros(4, dtype=complex)
        sign = -1 if spec.label.endswith("-") else 1
        if spec.label.startswith("phi"):
            vector[0], vector[3] = 1, sign
        else:
            vector[1], vector[2] = 1, sign
        return _projector(vector)

    if spec.tag == StateTag.MIXED:
        if spec.dim < 2:
            raise InvalidStateError("mixed states need D ≥ 2")
        return DensityOperator(matrix=np.eye(spec.dim) / spec.dim)

    if spec.tag == StateTag.COHERENT:
        if kernel is None:
            raise InvalidStateError("coherent states need a kernel")
        count = kernel.symmetry.n_theta
        rotation = effective_rotations(
            kernel, np.full((1, count), spec.theta), np.full((1, count), spec.phi)
        )[0]
        return _projector(rotation @ kernel.fiducial)

    return read_state_file(spec.path)


def state_for_kernel(spec: StateSpec | str, kernel: Kernel) -> DensityOperator:
    """make_state with a dimension check against the kernel."""
    rho = make_state(spec, kernel)
    if rho.dim != kernel.dimension:
        raise InvalidStateError(
            f"state of dimension {rho.dim} does not fit kernel {kernel.label} "
            f"(dimension {kernel.dimension})"
        )
    return rho


def random_pure_state(dim: int, rng: np.random.Generator) -> DensityOperator:
    """Haar-random pure state."""
    vector = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return _projector(vector)


def random_mixed_state(
    dim: int, rng: np.random.Generator, rank: int | None = None
) -> DensityOperator:
    """Ginibre-random mixed state G G† / Tr(G G†) of the given rank (full by default)."""
    rank = dim if rank is None else rank
    ginibre = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    matrix = ginibre @ ginibre.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return DensityOperator(matrix=matrix / np.trace(matrix).real)


# =============================================================================
# Dynamics
# =============================================================================


def oat_hamiltonian(k: int) -> np.ndarray:
    """(Σᵢ σz⁽ⁱ⁾)² on k qubits, diagonal in the computational basis."""
    if k < 1:
        raise ArgumentError(f"one-axis twisting needs k ≥ 1, got {k}")
    _check_qubits(k)
    excitations = np.array([bin(b).count("1") for b in range(2**k)])
    return np.diag((k - 2 * excitations) ** 2).astype(complex)


def _unitary(hamiltonian: np.ndarray, time: float, dim: int) -> np.ndarray:
    hamiltonian = np.asarray(hamiltonian, dtype=complex)
    if hamiltonian.shape != (dim, dim):
        raise ArgumentError(f"Hamiltonian of shape {hamiltonian.shape} does not act on "
                            f"dimension {dim}")
    check_hermitian(hamiltonian)
    return expi_hermitian(hamiltonian, -time)


def evolve(rho: DensityOperator, hamiltonian: np.ndarray, time: float) -> DensityOperator:
    """V ρ V† with V = e^{−iHt}."""
    unitary = _unitary(hamiltonian, time, rho.dim)
    matrix = unitary @ rho.matrix @ unitary.conj().T
    return DensityOperator(matrix=(matrix + matrix.conj().T) / 2)


def evolve_kernel(kernel: Kernel, hamiltonian: np.ndarray, time: float) -> Kernel:
    """Kernel Δ̃ with Tr[ρ Δ̃(Ω)] = Tr[VρV† Δ(Ω)], V = e^{−iHt}."""
    return rotated_kernel(kernel, _unitary(hamiltonian, time, kernel.dimension))


def purity(rho: DensityOperator) -> float:
    """Tr ρ²."""
    return float(np.real(np.vdot(rho.matrix, rho.matrix)))


# =============================================================================
# Catalogue
# =============================================================================


STATE_CATALOGUE: list[tuple[str, str, str]] = [
    ("basis", "basis:j=1,m=0", "spin basis state |j, m⟩"),
    ("cat", "cat:j=7/2", "(|j, j⟩ + |j, −j⟩)/√2"),
    ("plus", "plus:6", "|+⟩ on k qubits"),
    ("bell", "bell:phi+", "Bell states phi+, phi-, psi+, psi-"),
    ("ghz", "ghz:3", "(|0…0⟩ + |1…1⟩)/√2 on k qubits"),
    ("coherent", "coherent:theta=0.4,phi=1.2", "coherent state of the job's kernel"),
    ("mixed", "mixed:4", "maximally mixed I/D"),
    ("file", "file:state.json", "JSON with real/imag D x D arrays"),
]
