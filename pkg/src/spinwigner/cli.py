"""CLI entry point for spinwigner.

Uses Typer for command parsing and Rich for output.
Run with: spinwigner --help

Exit codes: 0 success, 1 asserted check failed, 2 invalid input,
3 I/O failure, 4 resource limit.
"""

import ast
import logging
import math
import operator
import os
from collections.abc import Iterator
from contextlib import contextmanager
from enum import IntEnum
from pathlib import Path
from typing import Annotated

import numpy as np
import typer
from pydantic import BaseModel
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from spinwigner.config import Settings, get_config_dir, get_settings, reload_settings
from spinwigner.errors import ArgumentError, ResourceLimitError
from spinwigner.kernels import KERNEL_CATALOGUE, Kernel, make_kernel
from spinwigner.models import Command, DensityOperator, JobConfig, KernelFamily, ScalarField
from spinwigner.phase_space import (
    default_slice_ranges,
    integrate,
    negativity_volume,
    parse_quadrature,
    q_function,
    slice_angles,
    slice_quadrature,
    wigner,
    wigner_values,
)
from spinwigner.states import (
    STATE_CATALOGUE,
    evolve,
    evolve_kernel,
    oat_hamiltonian,
    purity,
    state_for_kernel,
    write_state_file,
)
from spinwigner.verify import reconstruct, sw_report

app = typer.Typer(
    name="spinwigner",
    help="Wigner functions of spin systems: kernels, fields, frame checks",
    no_args_is_help=True,
)
console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger("spinwigner")


class ExitCode(IntEnum):
    OK = 0
    FAILED = 1
    INVALID = 2
    IO = 3
    LIMIT = 4


@contextmanager
def exit_codes() -> Iterator[None]:
    """Map library errors onto exit codes."""
    try:
        yield
    except ResourceLimitError as e:
        err_console.print(f"[red]Resource limit:[/red] {e}")
        raise typer.Exit(ExitCode.LIMIT) from e
    except OSError as e:
        err_console.print(f"[red]I/O error:[/red] {e}")
        raise typer.Exit(ExitCode.IO) from e
    except ValueError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(ExitCode.INVALID) from e
    except ArithmeticError as e:
        err_console.print(f"[red]Failed:[/red] {e}")
        raise typer.Exit(ExitCode.FAILED) from e


@app.callback()
def callback(
    debug: Annotated[
        bool, typer.Option("--debug", "-d", help="Enable debug output")
    ] = False,
    config: Annotated[
        Path | None, typer.Option("--config", help="Settings YAML file")
    ] = None,
):
    """spinwigner - phase-space pictures of finite-dimensional quantum states."""
    settings = reload_settings(config) if config is not None else get_settings()
    logging.basicConfig(
        level=logging.DEBUG if debug or settings.debug else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


# =============================================================================
# Flag parsing
# =============================================================================

KernelOpt = Annotated[
    str, typer.Option("--kernel", help="qubit | spinj | multiqubit | tensorqubit | sun")
]
SpinOpt = Annotated[str | None, typer.Option("--j", help="Spin for --kernel spinj, e.g. 3/2")]
SitesOpt = Annotated[int | None, typer.Option("--k", help="Number of sites")]
RankOpt = Annotated[int | None, typer.Option("--n", help="N for --kernel sun")]
StateOpt = Annotated[str | None, typer.Option("--state", help="State, e.g. cat:j=3/2, plus:6")]
GridOpt = Annotated[str, typer.Option("--grid", help="Resolution RxC (rows θ, columns φ)")]
SliceOpt = Annotated[
    str | None, typer.Option("--slice", help="Slice through multi-site phase space: collective")
]
ThetaRangeOpt = Annotated[str | None, typer.Option("--thetarange", help="θ range a,b")]
PhiRangeOpt = Annotated[str | None, typer.Option("--phirange", help="φ range a,b")]
QuadOpt = Annotated[str | None, typer.Option("--quad", help="exact:P or mc:SAMPLES")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Random seed")]
ThreadsOpt = Annotated[int | None, typer.Option("--threads", help="Worker threads")]
OutOpt = Annotated[Path | None, typer.Option("--out", "-o", help="Output path")]
GnuplotOpt = Annotated[bool, typer.Option("--gnuplot", help="Also write a gnuplot script")]

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_expression(text: str) -> float:
    """Evaluate arithmetic such as ``pi/125`` without eval()."""

    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int | float):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](walk(node.operand))
        raise ArgumentError(f"unsupported expression {text!r}")

    try:
        value = walk(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, OverflowError) as e:
        raise ArgumentError(f"cannot evaluate {text!r}") from e
    if not math.isfinite(value):
        raise ArgumentError(f"{text!r} is not finite")
    return value


def parse_grid(text: str) -> tuple[int, int]:
    rows, sep, cols = text.lower().partition("x")
    if not sep or not rows.strip().isdigit() or not cols.strip().isdigit():
        raise ArgumentError(f"grid must look like 91x181, got {text!r}")
    return int(rows), int(cols)


def parse_range(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ArgumentError(f"range must look like a,b, got {text!r}")
    return parse_expression(parts[0]), parse_expression(parts[1])


KERNEL_NAMES = {
    "qubit": KernelFamily.QUBIT,
    "spinj": KernelFamily.SPIN_J,
    "multiqubit": KernelFamily.MULTIQUBIT,
    "tensorqubit": KernelFamily.TENSOR,
    "sun": KernelFamily.QUDIT_SUN,
}


def build_kernel(job: JobConfig) -> Kernel:
    """Kernel named by the job's --kernel/--j/--k/--n flags."""
    family = KERNEL_NAMES.get(job.kernel)
    if family is None:
        raise ArgumentError(f"unknown kernel {job.kernel!r}; choose from {sorted(KERNEL_NAMES)}")
    if family == KernelFamily.MULTIQUBIT:
        return make_kernel(family, k=job.k or 1)
    if family == KernelFamily.TENSOR:
        return make_kernel(family, k=job.k or 2)
    return make_kernel(family, j=job.j, k=job.k, n=job.n)


def _job(command: Command, grid: str = "91x181", **values) -> JobConfig:
    threads = values.pop("threads", None) or os.cpu_count() or 1
    return JobConfig(command=command, grid=parse_grid(grid), threads=threads, **values)


def _require_state(job: JobConfig) -> str:
    if not job.state:
        raise ArgumentError(f"{job.command.value} needs --state")
    return job.state


def _slice_setup(
    job: JobConfig, kernel: Kernel, slice_mode: str | None
) -> tuple[np.ndarray, np.ndarray, tuple[float, float], tuple[float, float]]:
    if slice_mode not in (None, "collective"):
        raise ArgumentError(f"unknown slice {slice_mode!r}; only 'collective' is supported")
    if kernel.symmetry.n_theta > 1 and slice_mode is None:
        raise ArgumentError(
            f"{kernel.label} has {kernel.symmetry.n_theta} angle pairs; use --slice collective"
        )
    default_theta, default_phi = default_slice_ranges(kernel)
    theta_range = job.theta_range or default_theta
    phi_range = job.phi_range or default_phi
    thetas, phis = slice_angles(kernel.symmetry.n_theta, theta_range, phi_range, job.grid)
    return thetas, phis, theta_range, phi_range


# =============================================================================
# Output
# =============================================================================


def write_field_csv(field: ScalarField, path: Path) -> None:
    """CSV with header theta,phi,value; 17 significant digits, row-major grid order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([field.thetas[:, 0], field.phis[:, 0], field.values])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="theta,phi,value", comments="")


def write_gnuplot(csv_path: Path, field: ScalarField, title: str) -> Path:
    """Plot script: diverging palette symmetric about zero, black zero contour."""
    rows, cols = field.shape
    bound = max(float(np.max(np.abs(field.values))), 1e-12)
    script = csv_path.with_suffix(".gp")
    script.write_text(
        "\n".join([
            f"# {title}",
            "set datafile separator ','",
            "set view map",
            "set xlabel 'phi'",
            "set ylabel 'theta'",
            f"set title '{title}'",
            f"set dgrid3d {rows},{cols}",
            "set pm3d at b",
            "unset surface",
            "set contour base",
            "set cntrparam levels discrete 0",
            "set palette defined (-1 'red', 0 'white', 1 'blue')",
            f"set cbrange [{-bound:.17g}:{bound:.17g}]",
            f"splot '{csv_path.name}' skip 1 using 2:1:3 with pm3d notitle, \\",
            f"      '{csv_path.name}' skip 1 using 2:1:3 with lines lc rgb 'black' notitle",
            "",
        ])
    )
    return script


def _field_panel(title: str, field: ScalarField, path: Path) -> Panel:
    return Panel.fit(
        f"[bold]Points:[/bold] {field.values.size}\n"
        f"[bold]Min:[/bold] {field.values.min():.6g}\n"
        f"[bold]Max:[/bold] {field.values.max():.6g}\n"
        f"[bold]Output:[/bold] {path}",
        title=title,
    )


# =============================================================================
# Field commands
# =============================================================================


def _field_command(command: Command, kernel_name: str, j, k, n, state, grid, slice_mode,
                   thetarange, phirange, seed, threads, out, gnuplot) -> None:
    with exit_codes():
        job = _job(command, grid, kernel=kernel_name, j=j, k=k, n=n, state=state,
                   theta_range=parse_range(thetarange), phi_range=parse_range(phirange),
                   seed=seed, threads=threads, out=out, gnuplot=gnuplot)
        kernel = build_kernel(job)
        rho = state_for_kernel(_require_state(job), kernel)
        thetas, phis, _, _ = _slice_setup(job, kernel, slice_mode)
        evaluate = wigner if command == Command.WIGNER else q_function
        field = evaluate(rho, kernel, (thetas, phis), shape=job.grid, workers=job.threads)
        path = job.out or Path(f"{command.value}.csv")
        write_field_csv(field, path)
        console.print(_field_panel(f"{command.value} · {kernel.label}", field, path))
        if job.gnuplot:
            script = write_gnuplot(path, field, f"{command.value} {job.state}")
            console.print(f"[green]✓[/green] Plot script {script}")


@app.command("wigner")
def wigner_cmd(
    kernel: KernelOpt = "qubit",
    j: SpinOpt = None,
    k: SitesOpt = None,
    n: RankOpt = None,
    state: StateOpt = None,
    grid: GridOpt = "91x181",
    slice_mode: SliceOpt = None,
    thetarange: ThetaRangeOpt = None,
    phirange: PhiRangeOpt = None,
    seed: SeedOpt = 0,
    threads: ThreadsOpt = None,
    out: OutOpt = None,
    gnuplot: GnuplotOpt = False,
):
    """Write the Wigner function W(Ω) = Tr[ρΔ(Ω)] on a grid as CSV."""
    _field_command(Command.WIGNER, kernel, j, k, n, state, grid, slice_mode, thetarange,
                   phirange, seed, threads, out, gnuplot)


@app.command("qfunc")
def qfunc_cmd(
    kernel: KernelOpt = "qubit",
    j: SpinOpt = None,
    k: SitesOpt = None,
    n: RankOpt = None,
    state: StateOpt = None,
    grid: GridOpt = "91x181",
    slice_mode: SliceOpt = None,
    thetarange: ThetaRangeOpt = None,
    phirange: PhiRangeOpt = None,
    seed: SeedOpt = 0,
    threads: ThreadsOpt = None,
    out: OutOpt = None,
    gnuplot: GnuplotOpt = False,
):
    """Write the Q function ⟨Ω|ρ|Ω⟩ on a grid as CSV."""
    _field_command(Command.QFUNC, kernel, j, k, n, state, grid,
                   slice_mode, thetarange, phirange, seed, threads, out, gnuplot)


# =============================================================================
# Verification
# =============================================================================


def _report_table(report) -> Table:
    table = Table(title=f"Stratonovich-Weyl report · {report.kernel_id}")
    table.add_column("Check", style="cyan")
    table.add_column("Value", style="green")
    table.add_column("Asserted")
    rows = [
        ("hermiticity", report.hermiticity_residual, True),
        ("reality", report.reality_residual, True),
        ("standardization", report.standardization_residual, True),
        ("frame trace", report.trace_residual, True),
        ("covariance", report.covariance_residual, True),
        ("self-duality", report.self_duality_residual, report.documented_self_dual),
        ("min frame eigenvalue", report.min_frame_eigenvalue, True),
    ]
    if report.reconstruction_error is not None:
        rows.append(("reconstruction", report.reconstruction_error, True))
    for name, value, asserted in rows:
        table.add_row(name, f"{value:.3e}", "yes" if asserted else "[dim]measured[/dim]")
    return table


@app.command("verify")
def verify_cmd(
    kernel: KernelOpt = "qubit",
    j: SpinOpt = None,
    k: SitesOpt = None,
    n: RankOpt = None,
    quad: QuadOpt = None,
    probes: Annotated[int, typer.Option("--probes", help="Random probe states")] = 4,
    seed: SeedOpt = 0,
    threads: ThreadsOpt = None,
    out: OutOpt = None,
):
    """Measure the Stratonovich-Weyl residuals of a kernel and write a JSON report."""
    with exit_codes():
        job = _job(Command.VERIFY, kernel=kernel, j=j, k=k, n=n, quad=quad, probes=probes,
                   seed=seed, threads=threads, out=out)
        kern = build_kernel(job)
        quadrature = parse_quadrature(kern, job.quad, job.seed)
        report = sw_report(kern, quadrature, probes=job.probes, seed=job.seed,
                           workers=job.threads)
        payload = report.model_dump_json(indent=2)
        if job.out is not None:
            job.out.parent.mkdir(parents=True, exist_ok=True)
            job.out.write_text(payload + "\n")
        console.print(_report_table(report))

    failures = report.failures()
    for failure in failures:
        console.print(f"[red]✗[/red] {failure}")
    if failures:
        raise typer.Exit(ExitCode.FAILED)
    console.print("[green]✓[/green] All asserted conditions pass")


# =============================================================================
# Evolution
# =============================================================================


class EvolveSummary(BaseModel):
    """Summary written next to the evolved slice CSVs."""

    kernel: str
    state: str
    time: float
    grid: tuple[int, int]
    purity: float
    negativity_volume: float
    slice_integral: float
    min_w: float
    min_q: float
    rotation_audit_residual: float


@app.command("evolve")
def evolve_cmd(
    k: SitesOpt = 6,
    state: StateOpt = None,
    time: Annotated[str, typer.Option("--time", help="Evolution time, e.g. pi/125")] = "0",
    kernel: KernelOpt = "multiqubit",
    grid: GridOpt = "101x101",
    thetarange: ThetaRangeOpt = None,
    phirange: PhiRangeOpt = None,
    seed: SeedOpt = 0,
    threads: ThreadsOpt = None,
    out: OutOpt = None,
    gnuplot: GnuplotOpt = False,
):
    """One-axis twisting (Σσz)² of k qubits; writes W and Q slices plus a summary."""
    with exit_codes():
        k = k or 1
        job = _job(Command.EVOLVE, grid, kernel=kernel, k=k, state=state or f"plus:{k}",
                   time=parse_expression(time), theta_range=parse_range(thetarange),
                   phi_range=parse_range(phirange), seed=seed, threads=threads, out=out,
                   gnuplot=gnuplot)
        kern = build_kernel(job)
        rho = state_for_kernel(job.state, kern)
        hamiltonian = oat_hamiltonian(k)
        evolved = evolve(rho, hamiltonian, job.time)
        twisted = evolve_kernel(kern, hamiltonian, job.time)

        thetas, phis, theta_range, phi_range = _slice_setup(job, kern, "collective")
        w_field = wigner(rho, twisted, (thetas, phis), shape=job.grid, workers=job.threads)
        q_field = q_function(evolved, kern, (thetas, phis), shape=job.grid, workers=job.threads)

        quadrature = slice_quadrature(kern, theta_range, phi_range, job.grid)
        w_nodes = wigner(rho, twisted, quadrature, workers=job.threads)
        audit = _rotation_audit(rho, evolved, kern, twisted, job.seed)
        logger.info("rotated-kernel audit residual %.3g", audit)

        summary = EvolveSummary(
            kernel=kern.label,
            state=job.state,
            time=job.time,
            grid=job.grid,
            purity=purity(evolved),
            negativity_volume=negativity_volume(evolved, kern, quadrature, workers=job.threads),
            slice_integral=integrate(w_nodes, quadrature),
            min_w=float(w_field.values.min()),
            min_q=float(q_field.values.min()),
            rotation_audit_residual=audit,
        )

        out_dir = job.out or Path("evolve")
        out_dir.mkdir(parents=True, exist_ok=True)
        write_field_csv(w_field, out_dir / "wigner.csv")
        write_field_csv(q_field, out_dir / "qfunc.csv")
        (out_dir / "summary.json").write_text(summary.model_dump_json(indent=2) + "\n")
        if job.gnuplot:
            write_gnuplot(out_dir / "wigner.csv", w_field, f"W t={job.time:.6g}")
            write_gnuplot(out_dir / "qfunc.csv", q_field, f"Q t={job.time:.6g}")

        console.print(Panel.fit(
            f"[bold]Purity:[/bold] {summary.purity:.12g}\n"
            f"[bold]Min W:[/bold] {summary.min_w:.6g}\n"
            f"[bold]Min Q:[/bold] {summary.min_q:.6g}\n"
            f"[bold]Negativity volume:[/bold] {summary.negativity_volume:.6g}\n"
            f"[bold]Audit residual:[/bold] {audit:.3g}\n"
            f"[bold]Output:[/bold] {out_dir}",
            title=f"evolve · {kern.label}",
        ))

    if audit > get_settings().tolerances.verify:
        console.print(f"[red]✗[/red] rotated-kernel audit residual {audit:.3g}")
        raise typer.Exit(ExitCode.FAILED)


def _rotation_audit(rho: DensityOperator, evolved: DensityOperator, kernel: Kernel,
                    twisted: Kernel, seed: int, points: int = 50) -> float:
    """max |Tr[VρV†Δ(Ω)] − Tr[ρ V†Δ(Ω)V]| at random points."""
    rng = np.random.default_rng(seed)
    count = kernel.symmetry.n_theta
    bounds = np.array(kernel.domain)
    thetas = bounds[:, 0, 0] + (bounds[:, 0, 1] - bounds[:, 0, 0]) * rng.random((points, count))
    phis = bounds[:, 1, 0] + (bounds[:, 1, 1] - bounds[:, 1, 0]) * rng.random((points, count))
    direct = wigner_values(evolved, kernel, thetas, phis)
    rotated = wigner_values(rho, twisted, thetas, phis)
    return float(np.max(np.abs(direct - rotated)))


# =============================================================================
# Reconstruction
# =============================================================================


@app.command("reconstruct")
def reconstruct_cmd(
    kernel: KernelOpt = "qubit",
    j: SpinOpt = None,
    k: SitesOpt = None,
    n: RankOpt = None,
    state: StateOpt = None,
    quad: QuadOpt = None,
    seed: SeedOpt = 0,
    threads: ThreadsOpt = None,
    out: OutOpt = None,
):
    """Rebuild a state from its Wigner function through the dual frame."""
    with exit_codes():
        job = _job(Command.RECONSTRUCT, kernel=kernel, j=j, k=k, n=n, state=state, quad=quad,
                   seed=seed, threads=threads, out=out)
        kern = build_kernel(job)
        rho = state_for_kernel(_require_state(job), kern)
        quadrature = parse_quadrature(kern, job.quad, job.seed)
        field = wigner(rho, kern, quadrature, workers=job.threads)
        rebuilt = reconstruct(field, kern, quadrature, workers=job.threads)
        error = float(np.max(np.abs(rebuilt.matrix - rho.matrix)))
        path = job.out or Path("reconstructed.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        write_state_file(rebuilt, path)
        console.print(Panel.fit(
            f"[bold]Quadrature:[/bold] {quadrature.exactness} ({quadrature.size} nodes)\n"
            f"[bold]Round-trip error:[/bold] {error:.3e}\n"
            f"[bold]Output:[/bold] {path}",
            title=f"reconstruct · {kern.label}",
        ))

    if error > get_settings().tolerances.reconstruction:
        console.print(f"[red]✗[/red] round-trip error {error:.3g}")
        raise typer.Exit(ExitCode.FAILED)


# =============================================================================
# Catalogues and configuration
# =============================================================================

kernels_app = typer.Typer(help="Kernel families")
app.add_typer(kernels_app, name="kernels")

states_app = typer.Typer(help="State mini-language")
app.add_typer(states_app, name="states")


@kernels_app.command("list")
def kernels_list():
    """List the kernel families."""
    table = Table(title="Kernels")
    table.add_column("--kernel", style="cyan")
    table.add_column("Family")
    table.add_column("Parameters")
    table.add_column("D")
    table.add_column("Description", style="dim")
    for row in KERNEL_CATALOGUE:
        table.add_row(row.cli_name, row.family.value, row.parameters, row.dimension,
                      row.description)
    console.print(table)


@states_app.command("list")
def states_list():
    """List the state tags."""
    table = Table(title="States")
    table.add_column("Tag", style="cyan")
    table.add_column("Example", style="green")
    table.add_column("Description", style="dim")
    for tag, example, description in STATE_CATALOGUE:
        table.add_row(tag, example, description)
    console.print(table)


@app.command("config")
def config_cmd(
    show: Annotated[
        bool, typer.Option("--show", "-s", help="Show current configuration")
    ] = False,
    write: Annotated[
        Path | None, typer.Option("--write", help="Write default settings to a YAML file")
    ] = None,
):
    """Manage spinwigner configuration."""
    with exit_codes():
        if write is not None:
            Settings().save(write)
            console.print(f"[green]✓[/green] Wrote defaults to {write}")
        if show:
            settings = get_settings()
            table = Table(title="spinwigner Configuration")
            table.add_column("Setting", style="cyan")
            table.add_column("Value", style="green")
            for group in ("limits", "tolerances"):
                for key, value in getattr(settings, group).model_dump().items():
                    table.add_row(f"{group}.{key}", str(value))
            table.add_row("debug", str(settings.debug))
            console.print(table)
        elif write is None:
            console.print(f"Config directory: {get_config_dir()}")
            console.print("Use --show to display current configuration")


if __name__ == "__main__":
    app()
