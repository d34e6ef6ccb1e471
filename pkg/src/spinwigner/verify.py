"""Stratonovich-Weyl checks and dual-frame reconstruction.

The frame operator S = Σᵢ wᵢ |Δ(Ωᵢ)⟩⟩⟨⟨Δ(Ωᵢ)| acts on column-stacked
operators. S = I means the kernel is self-dual; any invertible S still
reconstructs states through the dual kernel unvec(S⁻¹ vec Δ).
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from spinwigner.config import get_settings
from spinwigner.errors import (
    ArgumentError,
    InvalidStateError,
    NotInformationallyCompleteError,
    ResourceLimitError,
)
from spinwigner.kernels import Kernel, evaluate_many
from spinwigner.models import (
    DensityOperator,
    FrameReport,
    PhasePoint,
    Quadrature,
    ScalarField,
    density_violations,
    nearest_density,
)
from spinwigner.operators import unvectorize, vectorize_batch
from spinwigner.phase_space import chunk_results, monte_carlo_quadrature, wigner_values
from spinwigner.states import random_mixed_state, random_pure_state

logger = logging.getLogger(__name__)

COVARIANCE_SAMPLE = 512


def _check_frame_size(kernel: Kernel) -> None:
    cap = get_settings().limits.max_frame_dimension
    if kernel.dimension**2 > cap:
        raise ResourceLimitError(
            f"frame operator of size {kernel.dimension**2} exceeds the configured cap {cap}"
        )


class _FrameSums(BaseModel):
    frame: np.ndarray
    standardization: np.ndarray
    hermiticity: float

    model_config = ConfigDict(arbitrary_types_allowed=True)


def _frame_sums(kernel: Kernel, quadrature: Quadrature, workers: int) -> _FrameSums:
    dim = kernel.dimension

    def chunk(thetas: np.ndarray, phis: np.ndarray, weights: np.ndarray):
        deltas = evaluate_many(kernel, thetas, phis)
        vectors = vectorize_batch(deltas)
        frame = (vectors.T * weights) @ vectors.conj()
        standard = np.einsum("p,pab->ab", weights, deltas)
        herm = float(np.max(np.abs(deltas - deltas.conj().transpose(0, 2, 1))))
        return frame, standard, herm

    parts = chunk_results(
        chunk, quadrature.thetas, quadrature.phis, quadrature.weights, workers=workers
    )
    frame = np.zeros((dim * dim, dim * dim), dtype=complex)
    standard = np.zeros((dim, dim), dtype=complex)
    herm = 0.0
    for part_frame, part_standard, part_herm in parts:
        frame += part_frame
        standard += part_standard
        herm = max(herm, part_herm)
    return _FrameSums(frame=frame, standardization=standard, hermiticity=herm)


def frame_superoperator(kernel: Kernel, quadrature: Quadrature, workers: int = 1) -> np.ndarray:
    """S = Σ wᵢ vec Δ(Ωᵢ) vec Δ(Ωᵢ)†, Hermitian PSD with Tr S = D²."""
    _check_frame_size(kernel)
    return _frame_sums(kernel, quadrature, workers).frame


# =============================================================================
# Dual frame
# =============================================================================


class DualKernel(BaseModel):
    """Evaluator of the dual kernel Δ̃(Ω) = unvec(S⁻¹ vec Δ(Ω))."""

    kernel: Kernel
    frame_inverse: np.ndarray
    spectrum: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def evaluate_many(self, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
        deltas = evaluate_many(self.kernel, thetas, phis)
        vectors = vectorize_batch(deltas) @ self.frame_inverse.T
        dim = self.kernel.dimension
        return vectors.reshape(-1, dim, dim).transpose(0, 2, 1)

    def evaluate(self, point: PhasePoint) -> np.ndarray:
        self.kernel.rotation.check_point(point)
        return self.evaluate_many(np.array([point.theta]), np.array([point.phi]))[0]


def _inverse(frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(frame)
    cutoff = get_settings().tolerances.frame_cutoff
    if values[0] <= cutoff:
        raise NotInformationallyCompleteError(
            f"frame operator is singular (min eigenvalue {values[0]:.3g} ≤ {cutoff:g})"
        )
    return (vectors / values) @ vectors.conj().T, values


def dual_kernel(
    kernel: Kernel,
    quadrature: Quadrature,
    *,
    frame: np.ndarray | None = None,
    workers: int = 1,
) -> DualKernel:
    """Dual frame of a kernel on a quadrature.

    Raises:
        NotInformationallyCompleteError: S has an eigenvalue at or below the cutoff.
    """
    if frame is None:
        frame = frame_superoperator(kernel, quadrature, workers)
    inverse, values = _inverse(frame)
    return DualKernel(kernel=kernel, frame_inverse=inverse, spectrum=values)


def reconstruct(
    values: ScalarField | np.ndarray,
    kernel: Kernel,
    quadrature: Quadrature,
    *,
    dual: DualKernel | None = None,
    workers: int = 1,
) -> DensityOperator:
    """ρ = Σᵢ wᵢ W(Ωᵢ) Δ̃(Ωᵢ) from W sampled at the quadrature nodes.

    Raises:
        NotInformationallyCompleteError: singular frame.
        InvalidStateError: the rebuilt matrix is not a density operator.
    """
    values = values.values if isinstance(values, ScalarField) else np.asarray(values, dtype=float)
    if values.shape[0] != quadrature.size:
        raise ArgumentError(f"{values.shape[0]} values for {quadrature.size} quadrature nodes")
    if dual is None:
        dual = dual_kernel(kernel, quadrature, workers=workers)

    def chunk(thetas: np.ndarray, phis: np.ndarray, weights: np.ndarray, w: np.ndarray):
        vectors = vectorize_batch(evaluate_many(kernel, thetas, phis))
        return (weights * w) @ vectors

    parts = chunk_results(
        chunk, quadrature.thetas, quadrature.phis, quadrature.weights, values, workers=workers
    )
    total = np.zeros(kernel.dimension**2, dtype=complex)
    for part in parts:
        total += part
    matrix = unvectorize(dual.frame_inverse @ total)
    matrix = (matrix + matrix.conj().T) / 2

    problems = density_violations(matrix, get_settings().tolerances.state)
    if problems:
        raise InvalidStateError("reconstruction is not a density operator: " + "; ".join(problems))
    if density_violations(matrix):
        matrix = nearest_density(matrix)
    return DensityOperator(matrix=matrix)


# =============================================================================
# Report
# =============================================================================


def _probe_states(dim: int, count: int, rng: np.random.Generator) -> list[DensityOperator]:
    probes = [random_pure_state(dim, rng) for _ in range(count)]
    probes.append(DensityOperator(matrix=np.eye(dim) / dim))
    return probes


def _conjugate(state: np.ndarray, unitary: np.ndarray) -> np.ndarray:
    return unitary @ state @ unitary.conj().T


def _group_element(kernel: Kernel, theta: float, phi: float) -> np.ndarray:
    """Collective rotation g, conjugated into the rotated frame as V†gV."""
    count = kernel.symmetry.n_theta
    g = kernel.rotation.evaluate_many(np.full((1, count), theta), np.full((1, count), phi))[0]
    if kernel.twist is not None:
        g = kernel.twist.conj().T @ g @ kernel.twist
    return g


def covariance_residual(
    kernel: Kernel,
    thetas: np.ndarray,
    phis: np.ndarray,
    probes: list[DensityOperator],
    rng: np.random.Generator,
    workers: int = 1,
) -> float:
    """max |W_{gρg†}(Ω) − W_ρ(g⁻¹·Ω)| over collective φ-shifts and θ-shifts at φ = 0.

    θ-shifts are checked only when every site is an SU(2) site.
    """
    residual = 0.0
    for rho in probes:
        delta = float(rng.uniform(0, 2 * np.pi))
        g = _group_element(kernel, 0.0, delta)
        moved = wigner_values(_conjugate(rho.matrix, g), kernel, thetas, phis, workers)
        shifted = wigner_values(rho, kernel, thetas, phis - delta, workers)
        residual = max(residual, float(np.max(np.abs(moved - shifted))))

        if kernel.su2_sites_only:
            delta = float(rng.uniform(0, np.pi))
            g = _group_element(kernel, delta, 0.0)
            zero = np.zeros_like(phis)
            moved = wigner_values(_conjugate(rho.matrix, g), kernel, thetas, zero, workers)
            shifted = wigner_values(rho, kernel, thetas - delta, zero, workers)
            residual = max(residual, float(np.max(np.abs(moved - shifted))))
    return residual


def sw_report(
    kernel: Kernel,
    quadrature: Quadrature,
    probes: int = 4,
    seed: int = 0,
    workers: int = 1,
) -> FrameReport:
    """Measure every Stratonovich-Weyl residual of a kernel on a quadrature."""
    _check_frame_size(kernel)
    dim = kernel.dimension
    rng = np.random.default_rng(seed)
    sums = _frame_sums(kernel, quadrature, workers)
    spectrum = np.linalg.eigvalsh(sums.frame)
    cutoff = get_settings().tolerances.frame_cutoff
    logger.debug("frame spectrum of %s: %s", kernel.label, np.array2string(spectrum, precision=6))

    states = _probe_states(dim, probes, rng)
    reality = 0.0
    for rho in states:
        values = wigner_values(rho, kernel, quadrature.thetas, quadrature.phis, workers)
        reality = max(reality, float(np.max(np.abs(values.imag))))

    sample = np.sort(rng.choice(quadrature.size, min(quadrature.size, COVARIANCE_SAMPLE),
                                replace=False))
    covariance = covariance_residual(
        kernel, quadrature.thetas[sample], quadrature.phis[sample], states, rng, workers
    )

    complete = bool(spectrum[0] > cutoff)
    reconstruction = None
    if complete:
        dual = dual_kernel(kernel, quadrature, frame=sums.frame)
        reconstruction = 0.0
        mixed = [random_mixed_state(dim, rng) for _ in range(probes)]
        for rho in [*mixed, *states]:
            values = wigner_values(rho, kernel, quadrature.thetas, quadrature.phis, workers).real
            rebuilt = reconstruct(values, kernel, quadrature, dual=dual, workers=workers)
            reconstruction = max(
                reconstruction, float(np.max(np.abs(rebuilt.matrix - rho.matrix)))
            )

    report = FrameReport(
        kernel_id=kernel.label,
        quadrature=quadrature.exactness,
        dimension=dim,
        hermiticity_residual=sums.hermiticity,
        standardization_residual=float(np.max(np.abs(sums.standardization - np.eye(dim)))),
        trace_residual=abs(float(np.trace(sums.frame).real) - dim**2),
        reality_residual=reality,
        frame_spectrum=spectrum.tolist(),
        min_frame_eigenvalue=float(spectrum[0]),
        self_duality_residual=float(np.max(np.abs(spectrum - 1))),
        covariance_residual=covariance,
        completeness=complete,
        reconstruction_error=reconstruction,
        documented_self_dual=kernel.documented_self_dual,
    )
    logger.debug("report for %s: %s", kernel.label, report.model_dump_json())
    return report


# =============================================================================
# Monte Carlo cross-check
# =============================================================================


class FrameEstimate(BaseModel):
    """Monte-Carlo estimates of exact frame eigenvalues with standard errors."""

    eigenvalues: list[float]
    estimates: list[float]
    standard_errors: list[float]
    samples: int

    def agrees(self, sigmas: float = 4.0) -> bool:
        """Every estimate within ``sigmas`` standard errors of its eigenvalue."""
        return all(
            abs(est - exact) <= sigmas * err + 1e-9
            for exact, est, err in zip(
                self.eigenvalues, self.estimates, self.standard_errors, strict=True
            )
        )


def frame_spectrum_estimate(
    kernel: Kernel,
    frame: np.ndarray,
    samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> FrameEstimate:
    """Independent estimate of each eigenvalue of ``frame`` from Monte-Carlo nodes.

    The Rayleigh quotient v†Sv on each exact eigenvector v is the mean of
    D |⟨v|vec Δ⟩|² over measure samples.
    """
    _check_frame_size(kernel)
    eigenvalues, eigenvectors = np.linalg.eigh(frame)
    quadrature = monte_carlo_quadrature(kernel, samples, seed)
    basis = eigenvectors.conj().T

    def chunk(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
        vectors = vectorize_batch(evaluate_many(kernel, thetas, phis))
        return kernel.dimension * np.abs(vectors @ basis.T) ** 2

    parts = chunk_results(chunk, quadrature.thetas, quadrature.phis, workers=workers)
    draws = np.concatenate(parts, axis=0)
    estimates = draws.mean(axis=0)
    errors = draws.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros_like(
        estimates
    )
    return FrameEstimate(
        eigenvalues=eigenvalues.tolist(),
        estimates=estimates.tolist(),
        standard_errors=errors.tolist(),
        samples=samples,
    )


def biorthogonality_residual(dual: DualKernel, quadrature: Quadrature) -> float:
    """max |Σ wᵢ vec Δ̃ᵢ vec Δᵢ† − I|."""
    kernel = dual.kernel
    deltas = vectorize_batch(evaluate_many(kernel, quadrature.thetas, quadrature.phis))
    duals = vectorize_batch(dual.evaluate_many(quadrature.thetas, quadrature.phis))
    total = (duals.T * quadrature.weights) @ deltas.conj()
    return float(np.max(np.abs(total - np.eye(kernel.dimension**2))))
