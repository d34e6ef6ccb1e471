"""Measures, quadrature rules and scalar fields over kernel phase spaces.

Measures are normalized so the total volume equals the Hilbert dimension D,
which makes Σ wᵢ Δ(Ωᵢ) = I reachable. Per site:

- qubit:  (2/π) sin 2θ on [0, π/2] x [0, π)
- spin-j: ((2j+1)/4π) sin θ on [0, π] x [0, 2π)
- SU(N):  Fubini-Study volume of the coherent-state manifold, normalized to N

Composite measures are products over sites. Field evaluation is chunked with a
fixed chunk size and reduced in chunk order, so results do not depend on the
number of worker threads.
"""

import logging
import math
import re
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.special import roots_legendre

from spinwigner.config import get_settings
from spinwigner.errors import (
    ArgumentError,
    DomainError,
    NumericContractError,
    ResourceLimitError,
)
from spinwigner.kernels import Kernel, effective_rotations
from spinwigner.models import (
    DensityOperator,
    PhasePoint,
    Quadrature,
    ScalarField,
    SiteConvention,
    SiteSpec,
)
from spinwigner.rotations import sun_state_tangents

logger = logging.getLogger(__name__)

PointSet = Sequence[PhasePoint] | Quadrature | tuple[np.ndarray, np.ndarray]


# =============================================================================
# Chunked evaluation
# =============================================================================


def chunk_results(func: Callable[..., Any], *arrays: np.ndarray, workers: int = 1) -> list[Any]:
    """Apply ``func`` to aligned fixed-size chunks of ``arrays``, results in chunk order."""
    size = get_settings().limits.chunk_size
    chunks = [
        tuple(a[s : s + size] for a in arrays) for s in range(0, arrays[0].shape[0], size)
    ]
    if workers <= 1 or len(chunks) <= 1:
        return [func(*c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: func(*c), chunks))


def map_chunks(
    func: Callable[..., np.ndarray], *arrays: np.ndarray, workers: int = 1
) -> np.ndarray:
    """Chunked evaluation of a pointwise function, concatenated in order."""
    results = chunk_results(func, *arrays, workers=workers)
    if not results:
        return np.zeros(0)
    return np.concatenate(results, axis=0)


def _angle_arrays(points: PointSet) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, Quadrature):
        return points.thetas, points.phis
    if isinstance(points, tuple) and len(points) == 2 and isinstance(points[0], np.ndarray):
        return np.atleast_2d(points[0]), np.atleast_2d(points[1])
    points = list(points)
    if not points:
        raise ArgumentError("no phase points given")
    thetas = np.array([p.theta for p in points], dtype=float)
    phis = np.array([p.phi for p in points], dtype=float)
    return thetas, phis


# =============================================================================
# Measures
# =============================================================================


@lru_cache(maxsize=32)
def _sun_normalization(n: int) -> float:
    """Factor taking √det g to a density of total mass N on one SU(N) site."""
    site = SiteSpec(convention=SiteConvention.SUN, n=n, d=n)
    axes = []
    for level in range(1, n):
        u, w = roots_legendre(level // 2 + 2)
        axes.append((np.arccos(u) / 2, w / (2 * np.sqrt(1 - u**2))))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    weights = np.ones_like(grids[0])
    for axis, (_, w) in enumerate(axes):
        shape = [1] * len(axes)
        shape[axis] = -1
        weights = weights * w.reshape(shape)
    thetas = np.stack([g.ravel() for g in grids], axis=1)
    raw = _sun_raw_density(n, thetas, np.zeros_like(thetas))
    phi_volume = math.prod(b - a for a, b in site.phi_domain)
    total = float(np.sum(raw * weights.ravel())) * phi_volume
    logger.debug("SU(%d) Fubini-Study volume before normalization: %.12g", n, total)
    return n / total


def _sun_raw_density(n: int, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """√det of the pullback of the Fubini-Study metric, unnormalized."""
    states, tangents = sun_state_tangents(n, thetas, phis)
    overlaps = np.einsum("pai,pi->pa", tangents.conj(), states)
    gram = np.einsum("pai,pbi->pab", tangents.conj(), tangents)
    metric = np.real(gram - overlaps[:, :, None] * overlaps[:, None, :].conj())
    return np.sqrt(np.clip(np.linalg.det(metric), 0.0, None))


def site_density(site: SiteSpec, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Density of one site's measure with respect to dθ dφ, no domain check."""
    thetas = np.atleast_2d(thetas)
    if site.convention == SiteConvention.QUBIT:
        return (2 / math.pi) * np.sin(2 * thetas[:, 0])
    if site.convention == SiteConvention.SPIN:
        return site.d / (4 * math.pi) * np.sin(thetas[:, 0])
    return _sun_normalization(site.n) * _sun_raw_density(site.n, thetas, np.atleast_2d(phis))


def _check_domain(kernel: Kernel, thetas: np.ndarray, phis: np.ndarray) -> None:
    eps = 1e-12
    for axis, ((t0, t1), (p0, p1)) in enumerate(kernel.domain):
        t, p = thetas[:, axis], phis[:, axis]
        if np.any(t < t0 - eps) or np.any(t > t1 + eps):
            raise DomainError(f"θ component {axis} outside [{t0:.6g}, {t1:.6g}]")
        if np.any(p < p0 - eps) or np.any(p >= p1):
            raise DomainError(f"φ component {axis} outside [{p0:.6g}, {p1:.6g})")


def measure_density_many(kernel: Kernel, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Product of site densities at many points inside the fundamental domain."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    _check_domain(kernel, thetas, phis)
    out = np.ones(thetas.shape[0])
    for site, cols in zip(kernel.symmetry.sites, kernel.symmetry.site_slices(), strict=True):
        out = out * site_density(site, thetas[:, cols], phis[:, cols])
    return out


def measure_density(kernel: Kernel, point: PhasePoint) -> float:
    """Density of the kernel's measure at one point; total volume D."""
    kernel.rotation.check_point(point)
    return float(measure_density_many(kernel, np.array([point.theta]), np.array([point.phi]))[0])


# =============================================================================
# Quadrature
# =============================================================================


def _theta_from_u(site: SiteSpec, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """θ(u) and dθ/du for the site's cosine variable."""
    if site.convention == SiteConvention.SPIN:
        return np.arccos(u), 1 / np.sqrt(1 - u**2)
    return np.arccos(u) / 2, 1 / (2 * np.sqrt(1 - u**2))


def _site_rule(site: SiteSpec, n_u: int, n_phi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss x uniform product rule on one site, weights summing to d."""
    u, wu = roots_legendre(n_u)
    theta_nodes, jacobian = _theta_from_u(site, u)
    axes_theta, axes_phi, axes_w = [], [], []
    for (p0, p1) in site.phi_domain:
        phi_nodes = p0 + (p1 - p0) * np.arange(n_phi) / n_phi
        axes_theta.append(theta_nodes)
        axes_phi.append(phi_nodes)
        axes_w.append((wu * jacobian, np.full(n_phi, (p1 - p0) / n_phi)))

    # one (θ, φ) pair per angle, all pairs tensorized
    count = site.n_angles
    grids = np.meshgrid(*axes_theta, *axes_phi, indexing="ij")
    thetas = np.stack([g.ravel() for g in grids[:count]], axis=1)
    phis = np.stack([g.ravel() for g in grids[count:]], axis=1)
    weight_grids = np.meshgrid(*[w[0] for w in axes_w], *[w[1] for w in axes_w], indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in weight_grids], axis=0), axis=0)
    weights = weights * map_chunks(lambda t, p: site_density(site, t, p), thetas, phis)

    total = float(weights.sum())
    if abs(total - site.d) > 1e-9 * site.d:
        logger.debug("site %s rule sums to %.15g; rescaling to %d", site.convention.value,
                     total, site.d)
    return thetas, phis, weights * (site.d / total)


def _preset_counts(order: int) -> tuple[int, int]:
    if order < 1:
        raise ArgumentError(f"exactness order must be positive, got {order}")
    return max(2, math.ceil((order + 1) / 2)), max(2, order + 1)


def build_quadrature(kernel: Kernel, order: int | str | tuple[int, int]) -> Quadrature:
    """Tensor Gauss-Legendre x uniform quadrature over the full phase space.

    ``order`` is an exactness preset (an int p or ``"exact:p"``: p+1 uniform
    φ nodes and ⌈(p+1)/2⌉ Gauss nodes per angle) or explicit per-angle node
    counts ``(n_u, n_phi)``, each at least 2.

    Raises:
        ResourceLimitError: grid larger than the configured cap.
    """
    if isinstance(order, str):
        match = re.fullmatch(r"\s*exact[:(]\s*(\d+)\s*\)?\s*", order)
        if not match:
            raise ArgumentError(f"cannot read quadrature preset {order!r}")
        order = int(match.group(1))
    if isinstance(order, int):
        n_u, n_phi = _preset_counts(order)
        exactness = f"exact({order})"
    else:
        n_u, n_phi = order
        if n_u < 2 or n_phi < 2:
            raise ArgumentError(f"quadrature needs at least 2 nodes per axis, got {order}")
        exactness = f"gauss({n_u})xuniform({n_phi})"

    size = (n_u * n_phi) ** kernel.symmetry.n_theta
    cap = get_settings().limits.max_grid_points
    if size > cap:
        raise ResourceLimitError(
            f"tensor quadrature of {size} points exceeds the cap {cap}; use Monte Carlo (mc:N)"
        )

    thetas = np.zeros((1, 0))
    phis = np.zeros((1, 0))
    weights = np.ones(1)
    for site in kernel.symmetry.sites:
        st, sp, sw = _site_rule(site, n_u, n_phi)
        thetas = np.concatenate(
            [np.repeat(thetas, st.shape[0], axis=0), np.tile(st, (thetas.shape[0], 1))], axis=1
        )
        phis = np.concatenate(
            [np.repeat(phis, sp.shape[0], axis=0), np.tile(sp, (phis.shape[0], 1))], axis=1
        )
        weights = np.outer(weights, sw).ravel()
    logger.debug("built %s quadrature with %d nodes for %s", exactness, size, kernel.label)
    return Quadrature(
        thetas=thetas,
        phis=phis,
        weights=weights,
        dimension=kernel.dimension,
        exactness=exactness,
    )


def default_quadrature(kernel: Kernel) -> Quadrature:
    """Quadrature exact for products of two kernel elements."""
    return build_quadrature(kernel, 2 * kernel.harmonic_degree)


def monte_carlo_quadrature(kernel: Kernel, samples: int, seed: int = 0) -> Quadrature:
    """I.i.d. points from the normalized measure with equal weights D/samples."""
    if samples < 1:
        raise ArgumentError(f"Monte Carlo needs at least one sample, got {samples}")
    rng = np.random.default_rng(seed)
    theta_cols, phi_cols = [], []
    for site in kernel.symmetry.sites:
        r = rng.random((samples, site.n_angles))
        if site.convention == SiteConvention.SUN:
            levels = np.arange(1, site.n)
            u = 1 - 2 * r ** (1.0 / levels)
        else:
            u = 2 * r - 1
        theta_cols.append(_theta_from_u(site, u)[0])
        bounds = np.array(site.phi_domain)
        phi_cols.append(bounds[:, 0] + (bounds[:, 1] - bounds[:, 0]) * rng.random(r.shape))
    return Quadrature(
        thetas=np.concatenate(theta_cols, axis=1),
        phis=np.concatenate(phi_cols, axis=1),
        weights=np.full(samples, kernel.dimension / samples),
        dimension=kernel.dimension,
        exactness=f"mc({samples},seed={seed})",
    )


def parse_quadrature(kernel: Kernel, text: str | None, seed: int = 0) -> Quadrature:
    """Quadrature from ``exact:P`` or ``mc:SAMPLES``; default is exact."""
    if text is None:
        return default_quadrature(kernel)
    match = re.fullmatch(r"\s*mc:(\d+)\s*", text)
    if match:
        return monte_carlo_quadrature(kernel, int(match.group(1)), seed)
    return build_quadrature(kernel, text)


# =============================================================================
# Fields
# =============================================================================


def _matrix(rho: DensityOperator | np.ndarray, kernel: Kernel) -> np.ndarray:
    matrix = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if matrix.shape != (kernel.dimension, kernel.dimension):
        raise ArgumentError(
            f"state of shape {matrix.shape} does not match kernel dimension {kernel.dimension}"
        )
    return matrix


def _real_part(values: np.ndarray, what: str) -> np.ndarray:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > get_settings().tolerances.imaginary:
        raise NumericContractError(f"{what} has imaginary residue {residue:.3g}")
    return values.real.copy()


def wigner_values(
    rho: DensityOperator | np.ndarray,
    kernel: Kernel,
    thetas: np.ndarray,
    phis: np.ndarray,
    workers: int = 1,
) -> np.ndarray:
    """Complex Tr[ρΔ(Ω)] at many points.

    Π is diagonal, so Tr[ρ 𝕌Π𝕌†] = Σ_k Π_kk (𝕌†ρ𝕌)_kk.
    """
    matrix = _matrix(rho, kernel)
    scaled = kernel.parity_diagonal / kernel.dimension

    def chunk(t: np.ndarray, p: np.ndarray) -> np.ndarray:
        rotations = effective_rotations(kernel, t, p)
        diag = np.sum(rotations.conj() * (matrix @ rotations), axis=1)
        return diag @ scaled

    return map_chunks(chunk, thetas, phis, workers=workers)


def q_values(
    rho: DensityOperator | np.ndarray,
    kernel: Kernel,
    thetas: np.ndarray,
    phis: np.ndarray,
    workers: int = 1,
) -> np.ndarray:
    """Complex ⟨Ω|ρ|Ω⟩ at many points, |Ω⟩ = 𝕌(Ω)|fiducial⟩."""
    matrix = _matrix(rho, kernel)

    def chunk(t: np.ndarray, p: np.ndarray) -> np.ndarray:
        states = effective_rotations(kernel, t, p) @ kernel.fiducial
        return np.sum(states.conj() * (states @ matrix.T), axis=1)

    return map_chunks(chunk, thetas, phis, workers=workers)


def wigner(
    rho: DensityOperator | np.ndarray,
    kernel: Kernel,
    points: PointSet,
    *,
    shape: tuple[int, int] | None = None,
    workers: int = 1,
) -> ScalarField:
    """W(Ω) = Tr[ρΔ(Ω)], checked real to the imaginary tolerance."""
    thetas, phis = _angle_arrays(points)
    values = wigner_values(rho, kernel, thetas, phis, workers)
    return ScalarField(
        thetas=thetas, phis=phis, values=_real_part(values, "Wigner function"), shape=shape
    )


def q_function(
    rho: DensityOperator | np.ndarray,
    kernel: Kernel,
    points: PointSet,
    *,
    shape: tuple[int, int] | None = None,
    workers: int = 1,
) -> ScalarField:
    """Q(Ω) = ⟨Ω|ρ|Ω⟩, the coherent-state expectation."""
    thetas, phis = _angle_arrays(points)
    values = q_values(rho, kernel, thetas, phis, workers)
    return ScalarField(thetas=thetas, phis=phis, values=_real_part(values, "Q function"),
                       shape=shape)


def integrate(values: ScalarField | np.ndarray, quadrature: Quadrature) -> float:
    """Σ wᵢ fᵢ with numpy's pairwise summation."""
    values = values.values if isinstance(values, ScalarField) else np.asarray(values)
    if values.shape[0] != quadrature.size:
        raise ArgumentError(f"{values.shape[0]} values for {quadrature.size} quadrature nodes")
    return float(np.sum(quadrature.weights * values))


def overlap(
    rho_a: DensityOperator | np.ndarray,
    rho_b: DensityOperator | np.ndarray,
    kernel: Kernel,
    quadrature: Quadrature,
    workers: int = 1,
) -> float:
    """∫ W_a W_b dμ; equals Tr[ρ_a ρ_b] only for self-dual kernels."""
    w_a = wigner(rho_a, kernel, quadrature, workers=workers)
    w_b = wigner(rho_b, kernel, quadrature, workers=workers)
    return integrate(w_a.values * w_b.values, quadrature)


def negativity_volume(
    rho: DensityOperator | np.ndarray,
    kernel: Kernel,
    quadrature: Quadrature,
    workers: int = 1,
) -> float:
    """∫ (|W| − W) dμ / 2."""
    values = wigner(rho, kernel, quadrature, workers=workers).values
    return integrate((np.abs(values) - values) / 2, quadrature)


# =============================================================================
# Collective slices
# =============================================================================


def slice_angles(
    components: int,
    theta_range: tuple[float, float],
    phi_range: tuple[float, float],
    resolution: tuple[int, int],
) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (θ outer, φ inner) grid with every component equal."""
    if components < 1:
        raise ArgumentError(f"a slice needs at least one angle component, got {components}")
    rows, cols = resolution
    if rows < 1 or cols < 1:
        raise ArgumentError(f"invalid slice resolution {resolution}")
    theta_axis = np.linspace(theta_range[0], theta_range[1], rows)
    phi_axis = np.linspace(phi_range[0], phi_range[1], cols)
    theta_grid, phi_grid = np.meshgrid(theta_axis, phi_axis, indexing="ij")
    thetas = np.repeat(theta_grid.reshape(-1, 1), components, axis=1)
    phis = np.repeat(phi_grid.reshape(-1, 1), components, axis=1)
    return thetas, phis


def collective_slice(
    k: int,
    theta_range: tuple[float, float],
    phi_range: tuple[float, float],
    resolution: tuple[int, int],
) -> list[PhasePoint]:
    """Grid points where all k angle components share (θ, φ)."""
    thetas, phis = slice_angles(k, theta_range, phi_range, resolution)
    return [
        PhasePoint(theta=tuple(t), phi=tuple(p))
        for t, p in zip(thetas.tolist(), phis.tolist(), strict=True)
    ]


def default_slice_ranges(kernel: Kernel) -> tuple[tuple[float, float], tuple[float, float]]:
    """Fundamental domain of the first angle pair, φ end included."""
    return kernel.domain[0]


def _trapezoid(axis: np.ndarray) -> np.ndarray:
    if axis.size == 1:
        return np.ones(1)
    step = np.diff(axis)
    weights = np.zeros_like(axis)
    weights[:-1] += step / 2
    weights[1:] += step / 2
    return np.abs(weights)


def slice_quadrature(
    kernel: Kernel,
    theta_range: tuple[float, float],
    phi_range: tuple[float, float],
    resolution: tuple[int, int],
) -> Quadrature:
    """Trapezoid rule on a collective slice weighted by the first site's θ-density.

    Nodes where the density vanishes (the poles) carry no weight and are left
    out. Weights are rescaled to total D.
    """
    rows, cols = resolution
    thetas, phis = slice_angles(kernel.symmetry.n_theta, theta_range, phi_range, resolution)
    first = kernel.symmetry.sites[0]
    first_cols = kernel.symmetry.site_slices()[0]
    trap = np.outer(
        _trapezoid(np.linspace(*theta_range, rows)), _trapezoid(np.linspace(*phi_range, cols))
    ).ravel()
    density = site_density(first, thetas[:, first_cols], phis[:, first_cols])
    weights = trap * np.abs(density)
    # sin factors at the poles leave round-off weights, not measure
    keep = weights > 1e-12 * weights.max()
    if not np.any(keep):
        raise ArgumentError("slice has no interior nodes with positive measure")
    weights = weights[keep] * (kernel.dimension / weights[keep].sum())
    return Quadrature(
        thetas=thetas[keep],
        phis=phis[keep],
        weights=weights,
        dimension=kernel.dimension,
        exactness=f"slice({rows}x{cols})",
    )
