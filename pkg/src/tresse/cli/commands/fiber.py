"""Fiber command: invariants of a curve u(p) under the stabilizer algebra."""

import time
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from tresse.cli.options import (
    ConfigOpt,
    FullOpt,
    JsonOpt,
    SeedOpt,
    VerboseOpt,
    build_config,
    emit_json,
    invocation,
    show_expr,
)
from tresse.core.fiber import analyze_curve
from tresse.core.symcore import parse_expr
from tresse.exceptions import ParseError, TresseError
from tresse.models.report import ComplexValue, CurvePoint, FiberCurveReport

console = Console()


def _parse_points(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParseError(f"Points must be comma-separated numbers, got '{text}'") from None


def fiber(
    u: Annotated[str, typer.Argument(help="Curve u(p), e.g. 'exp(p)'")],
    points: Annotated[str, typer.Option("--points", help="Comma-separated values of p")] = "0.3,0.7,1.1",
    seed: SeedOpt = None,
    json_output: JsonOpt = False,
    full: FullOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """G4, G6, singular-orbit membership and I7 along a curve."""
    try:
        config = build_config(config_path, seed, full=full, verbose=verbose)
        start = time.perf_counter()
        result = analyze_curve(parse_expr(u), _parse_points(points), config.sampling)

        def series(values: list[tuple[float, complex]]) -> list[CurvePoint]:
            return [CurvePoint(p=p, value=ComplexValue.of(v)) for p, v in values]

        report = FiberCurveReport(
            invocation=invocation("fiber", config, u=u, points=points),
            seconds=time.perf_counter() - start,
            curve=u,
            orbit=result.orbit,
            G4=show_expr(result.G4, config)[0] or "",
            G6=show_expr(result.G6, config)[0] or "",
            i7=series(result.i7_values),
            i7_via_diamond=series(result.diamond_values),
            box_i7=series(result.box_values),
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
        return
    console.print(f"u = {report.curve}")
    console.print(f"G4 = {report.G4}\nG6 = {report.G6}")
    if report.orbit is not None:
        console.print(f"[yellow]Curve lies in the singular orbit {report.orbit}; I7 is undefined[/yellow]")
        return
    table = Table(title="Absolute invariants")
    table.add_column("p", justify="right")
    table.add_column("I7", justify="right")
    table.add_column("-10◇p(G4/√G6)", justify="right")
    table.add_column("□p(I7)", justify="right")
    for a, b, c in zip(report.i7, report.i7_via_diamond, report.box_i7, strict=True):
        table.add_row(
            f"{a.p:g}",
            f"{complex(a.value.re, a.value.im):.8g}",
            f"{complex(b.value.re, b.value.im):.8g}",
            f"{complex(c.value.re, c.value.im):.8g}",
        )
    console.print(table)
