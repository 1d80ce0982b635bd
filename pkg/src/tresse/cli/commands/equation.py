"""Commands on one or two equations y'' = f(x, y, p)."""

import time
from typing import Annotated

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from tresse.cli.options import (
    ConfigOpt,
    FullOpt,
    JsonOpt,
    MaxOrderOpt,
    SamplesOpt,
    SeedOpt,
    TolOpt,
    VerboseOpt,
    build_config,
    emit_json,
    finite,
    invocation,
    show_expr,
)
from tresse.core.classify import (
    RankReport,
    Verdict,
    default_box,
    describe,
    equivalent,
    equivalent_under_map,
    sample_box,
    symmetry_dimension,
)
from tresse.core.jetspace import ODE, PointMap, transform_ode
from tresse.core.projective import LinearizationVerdict, linearizable
from tresse.core.symcore import parse_expr
from tresse.exceptions import TresseError
from tresse.models.report import (
    ClassifyReport,
    ComplexValue,
    EquivReport,
    InvariantEntry,
    InvariantsReport,
    LinearizeReport,
    RankEntry,
    TransformReport,
    TransformSample,
)

console = Console()

EquationArg = Annotated[str, typer.Argument(help="Right-hand side f(x, y, p), e.g. 'exp(p)'")]


def _rank_entry(report: RankReport) -> RankEntry:
    return RankEntry(
        rank=report.rank,
        dimension=report.dimension,
        stratum=str(report.stratum),
        names=list(report.names),
        ranks=report.ranks,
        singular_values=report.singular_values,
        note=report.note,
    )


def _print_rank(entry: RankEntry) -> None:
    votes = ", ".join(str(r) for r in entry.ranks) or "-"
    console.print(
        f"Functional rank [bold]{entry.rank}[/bold] (votes: {votes}) → "
        f"symmetry dimension [bold cyan]{entry.dimension}[/bold cyan]"
        + (f" [dim]({entry.note})[/dim]" if entry.note else "")
    )


def invariants(
    f: EquationArg,
    seed: SeedOpt = None,
    samples: SamplesOpt = None,
    tol: TolOpt = None,
    max_order: MaxOrderOpt = None,
    json_output: JsonOpt = False,
    full: FullOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Restricted relative and barred invariants with sampled values."""
    try:
        config = build_config(config_path, seed, samples, tol, max_order, full, verbose)
        ode = ODE.from_text(f)
        start = time.perf_counter()
        desc = describe(ode, config)
        entries = []
        for inv in desc.invariants:
            text, nodes = show_expr(inv.expr, config)
            entries.append(
                InvariantEntry(
                    name=inv.name,
                    weight=inv.weight,
                    expr=text,
                    nodes=nodes,
                    values=[finite(v) for v in inv.values],
                )
            )
        report = InvariantsReport(
            invocation=invocation("invariants", config, f=f),
            seconds=time.perf_counter() - start,
            ode=str(ode),
            stratum=str(desc.stratum),
            points=[list(z) for z in desc.points],
            invariants=entries,
            rank=_rank_entry(desc.rank) if desc.rank is not None else None,
            note=desc.note,
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
        return
    console.print(f"[bold]{report.ode}[/bold]  stratum: [cyan]{report.stratum}[/cyan]")
    if report.note:
        console.print(f"[yellow]{report.note}[/yellow]")
    table = Table(title="Invariants")
    table.add_column("Invariant", style="cyan")
    table.add_column("Weight")
    table.add_column("Restricted")
    for i, z in enumerate(report.points):
        table.add_column(f"z{i} = ({z[0]:.3f}, {z[1]:.3f}, {z[2]:.3f})", justify="right")
    for entry in report.invariants:
        values = ["-" if v is None else f"{v:.6g}" for v in entry.values]
        table.add_row(entry.name, entry.weight or "", entry.expr or "[dim]numeric only[/dim]", *values)
    console.print(table)
    if report.rank is not None:
        _print_rank(report.rank)
    console.print(f"[dim]{report.seconds:.2f}s, seed {report.invocation.seed}[/dim]")


def classify(
    f: EquationArg,
    seed: SeedOpt = None,
    samples: SamplesOpt = None,
    tol: TolOpt = None,
    max_order: MaxOrderOpt = None,
    json_output: JsonOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Dimension of the point symmetry algebra from the functional rank."""
    try:
        config = build_config(config_path, seed, samples, tol, max_order, verbose=verbose)
        ode = ODE.from_text(f)
        start = time.perf_counter()
        result = symmetry_dimension(ode, config)
        report = ClassifyReport(
            invocation=invocation("classify", config, f=f),
            seconds=time.perf_counter() - start,
            ode=str(ode),
            result=_rank_entry(result),
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
        return
    console.print(f"[bold]{report.ode}[/bold]  stratum: [cyan]{report.result.stratum}[/cyan]")
    _print_rank(report.result)
    if report.result.singular_values:
        table = Table(title="Singular values (row-scaled Jacobians)")
        table.add_column("Sample", style="cyan")
        table.add_column("Rank")
        table.add_column("σ")
        for i, (rank, svals) in enumerate(zip(report.result.ranks, report.result.singular_values, strict=True)):
            table.add_row(str(i), str(rank), ", ".join(f"{s:.2e}" for s in svals))
        console.print(table)


def linearize(
    f: EquationArg,
    frobenius: Annotated[
        bool, typer.Option("--frobenius/--no-frobenius", help="Cross-check with Lie's (z, w) system")
    ] = True,
    seed: SeedOpt = None,
    tol: TolOpt = None,
    json_output: JsonOpt = False,
    full: FullOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Lie's linearization test on the cubic stratum."""
    try:
        config = build_config(config_path, seed, tol=tol, full=full, verbose=verbose)
        ode = ODE.from_text(f)
        start = time.perf_counter()
        result = linearizable(ode, config, cross_check=frobenius, proportionality=True)
        report = LinearizeReport(
            invocation=invocation("linearize", config, f=f),
            seconds=time.perf_counter() - start,
            ode=str(ode),
            verdict=str(result.verdict),
            frobenius_integrable=result.frobenius_integrable,
        )
        if result.cubic is not None and result.data is not None:
            report.alpha = [show_expr(a, config)[0] or "" for a in result.cubic.alpha]
            report.L1 = show_expr(result.data.L1, config)[0]
            report.L2 = show_expr(result.data.L2, config)[0]
            report.F3 = show_expr(result.data.F3, config)[0]
            report.f3_variant = result.data.variant
        if result.h_ratio is not None:
            report.h_ratio = finite(result.h_ratio.constant.real)
            report.h_ratio_spread = finite(result.h_ratio.spread)
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
    else:
        color = "green" if result.verdict is LinearizationVerdict.LINEARIZABLE else "red"
        console.print(f"[bold]{report.ode}[/bold]: [{color}]{report.verdict}[/{color}]")
        if report.L1 is not None:
            table = Table(show_header=False)
            table.add_column("Quantity", style="cyan")
            table.add_column("Value")
            for i, a in enumerate(report.alpha):
                table.add_row(f"α{i}", a)
            table.add_row("L1", report.L1)
            table.add_row("L2", report.L2 or "")
            table.add_row(f"F3 ({report.f3_variant})", report.F3 or "")
            if report.h_ratio is not None:
                table.add_row("H/(L1 + p·L2)", f"{report.h_ratio:.6g} (spread {report.h_ratio_spread:.1e})")
            console.print(table)
        if report.frobenius_integrable is not None:
            agree = "agrees" if result.consistent else "[red]disagrees[/red]"
            console.print(f"Frobenius check {agree} (integrable: {report.frobenius_integrable})")
    if result.verdict is not LinearizationVerdict.LINEARIZABLE:
        raise typer.Exit(1)


def equiv(
    f1: EquationArg,
    f2: Annotated[str | None, typer.Argument(help="Second right-hand side (omit with --map)")] = None,
    map_text: Annotated[
        str | None, typer.Option("--map", help="Point map 'X, Y'; compares f1 with its image")
    ] = None,
    seed: SeedOpt = None,
    samples: SamplesOpt = None,
    tol: TolOpt = None,
    max_order: MaxOrderOpt = None,
    json_output: JsonOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Point equivalence of two equations by their signature manifolds."""
    try:
        config = build_config(config_path, seed, samples, tol, max_order, verbose=verbose)
        e1 = ODE.from_text(f1)
        start = time.perf_counter()
        inputs = {"f1": f1}
        if map_text is not None:
            moved, result = equivalent_under_map(e1, PointMap.from_text(map_text), config)
            assert moved.ode is not None
            e2 = moved.ode
            inputs["map"] = map_text
        elif f2 is not None:
            e2 = ODE.from_text(f2)
            result = equivalent(e1, e2, config)
            inputs["f2"] = f2
        else:
            console.print("[red]Error:[/red] Give a second equation or --map")
            raise typer.Exit(2)
        report = EquivReport(
            invocation=invocation("equiv", config, **inputs),
            seconds=time.perf_counter() - start,
            ode1=str(e1),
            ode2=str(e2),
            verdict=str(result.verdict),
            reason=result.reason,
            rank=result.rank,
            sign_pattern=list(result.sign_pattern) if result.sign_pattern else None,
            compared=result.compared,
            matched=result.matched,
            max_discrepancy=finite(result.max_discrepancy) if result.max_discrepancy is not None else None,
            coordinates=list(result.coordinates),
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
    else:
        colors = {Verdict.EQUIVALENT: "green", Verdict.NOT_EQUIVALENT: "red", Verdict.INCONCLUSIVE: "yellow"}
        color = colors[result.verdict]
        console.print(f"{report.ode1}\n{report.ode2}")
        console.print(f"[{color}]{report.verdict}[/{color}]: {report.reason}")
        if report.compared:
            console.print(
                f"[dim]rank {report.rank}, signs {report.sign_pattern}, matched {report.matched}/{report.compared}, "
                f"max discrepancy {report.max_discrepancy}[/dim]"
            )
    if result.verdict is Verdict.NOT_EQUIVALENT:
        raise typer.Exit(1)


def transform(
    f: EquationArg,
    x_new: Annotated[str, typer.Argument(metavar="X", help="New x as a function of (x, y)")],
    y_new: Annotated[str, typer.Argument(metavar="Y", help="New y as a function of (x, y)")],
    points: Annotated[int, typer.Option("--points", help="Sampled points of the image")] = 3,
    seed: SeedOpt = None,
    json_output: JsonOpt = False,
    full: FullOpt = False,
    config_path: ConfigOpt = None,
    verbose: VerboseOpt = False,
) -> None:
    """Push an equation forward along the point map (x, y) ↦ (X, Y)."""
    try:
        config = build_config(config_path, seed, full=full, verbose=verbose)
        ode = ODE.from_text(f)
        point_map = PointMap(parse_expr(x_new), parse_expr(y_new))
        start = time.perf_counter()
        result = transform_ode(point_map, ode, config.sampling)
        samples = []
        for z in sample_box(default_box(config), points, config.sampling.seed):
            with np.errstate(all="ignore"):
                try:
                    X, Y, P, value = result.prolong((float(z[0]), float(z[1]), float(z[2])))
                except (ZeroDivisionError, TypeError):
                    continue
            samples.append(TransformSample(x=X.real, y=Y.real, p=P.real, value=ComplexValue.of(value)))
        report = TransformReport(
            invocation=invocation("transform", config, f=f, X=x_new, Y=y_new),
            seconds=time.perf_counter() - start,
            ode=str(ode),
            map=[x_new, y_new],
            symbolic=result.symbolic,
            transformed=show_expr(result.ode.f, config)[0] if result.ode is not None else None,
            samples=samples,
        )
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(2) from None

    if json_output:
        emit_json(report)
        return
    if report.transformed is not None:
        console.print(f"y'' = {report.transformed}")
    else:
        console.print("[yellow]No symbolic inverse; the transformed equation is sampled numerically[/yellow]")
    table = Table(title="Image points")
    table.add_column("X", justify="right")
    table.add_column("Y", justify="right")
    table.add_column("P", justify="right")
    table.add_column("f̃", justify="right")
    for s in report.samples:
        table.add_row(f"{s.x:.6g}", f"{s.y:.6g}", f"{s.p:.6g}", f"{complex(s.value.re, s.value.im):.6g}")
    console.print(table)
