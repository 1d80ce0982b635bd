"""Verification commands: orbit dimension and the oracle suite."""

import time
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from tresse.cli.options import (
    ConfigOpt,
    JsonOpt,
    MaxOrderOpt,
    SeedOpt,
    TolOpt,
    VerboseOpt,
    build_config,
    emit_json,
    invocation,
)
from tresse.core.classify import orbit_codim
from tresse.core.selftest import ORACLES, run_selftest
from tresse.exceptions import TresseError
from tresse.models.report import OracleEntry, OrbitDimReport, SelftestReport

console = Console()


def orbitdim(
    k: Annotated[int, typer.Argument(min=4, max=6, help="Jet order")],
    trials: Annotated[int, typer.Option("--trials", min=1, help="Random jet points")] = 3,
    seed: SeedOpt = None,
    tol: TolOpt = None,
    json_output: JsonOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Codimension of a generic orbit in J^k, against (k³ − 25k + 18)/6."""
    try:
        config = build_config(config_path, seed, tol=tol, verbose=verbose)
        start = time.perf_counter()
        try:
            measured = orbit_codim(k, trials, config)
        except ValueError as e:
            console.print(f"[red]Error:[/red] {e}")
            raise typer.Exit(2) from None
        report = OrbitDimReport(
            invocation=invocation("orbitdim", config, k=str(k)),
            seconds=time.perf_counter() - start,
            k=k,
            codim=measured.codim,
            expected=measured.expected,
            ranks=measured.ranks,
            matches=measured.matches,
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
    else:
        color = "green" if report.matches else "red"
        console.print(
            f"k = {k}: codimension [{color}]{report.codim}[/{color}] (expected {report.expected}), "
            f"ranks {report.ranks}"
        )
    if not report.matches:
        raise typer.Exit(1)


def selftest(
    only: Annotated[
        list[str] | None, typer.Option("--only", help=f"Run only these oracles ({', '.join(ORACLES)})")
    ] = None,
    quick: Annotated[bool, typer.Option("--quick", help="Skip the slow oracles")] = False,
    seed: SeedOpt = None,
    max_order: MaxOrderOpt = None,
    json_output: JsonOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Run the invariance, syzygy and identity oracles."""
    try:
        config = build_config(config_path, seed, max_order=max_order, verbose=verbose)
        start = time.perf_counter()
        try:
            result = run_selftest(config, only, quick)
        except ValueError as e:
            console.print(f"[red]Error:[/red] {e}")
            raise typer.Exit(2) from None
        report = SelftestReport(
            invocation=invocation("selftest", config, only=",".join(only or []), quick=str(quick)),
            seconds=time.perf_counter() - start,
            passed=result.passed,
            oracles=[
                OracleEntry(name=r.name, passed=r.passed, required=r.required, detail=r.detail)
                for r in result.results
            ],
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
    else:
        table = Table(title="Oracles")
        table.add_column("Oracle", style="cyan")
        table.add_column("Status")
        table.add_column("Time", justify="right")
        table.add_column("Detail")
        for r in result.results:
            if r.passed:
                status = "[green]ok[/green]"
            elif r.required:
                status = "[red]FAILED[/red]"
            else:
                status = "[yellow]off[/yellow]"
            table.add_row(r.name, status, f"{r.seconds:.1f}s", r.detail)
        console.print(table)
    if not result.passed:
        raise typer.Exit(1)
