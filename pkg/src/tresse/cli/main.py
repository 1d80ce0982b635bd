"""Main CLI entry point for Tresse."""

import typer
from rich.console import Console

from tresse import __version__
from tresse.cli.commands import checks, equation, fiber, schema
from tresse.exceptions import TresseError

console = Console()

app = typer.Typer(
    name="tresse",
    help="Point differential invariants of y'' = f(x, y, y'): equivalence, symmetry and linearization.",
    no_args_is_help=True,
    add_completion=True,
)

app.command(name="invariants")(equation.invariants)
app.command(name="classify")(equation.classify)
app.command(name="linearize")(equation.linearize)
app.command(name="equiv")(equation.equiv)
app.command(name="transform")(equation.transform)
app.command(name="orbitdim")(checks.orbitdim)
app.command(name="fiber")(fiber.fiber)
app.command(name="selftest")(checks.selftest)
app.command(name="schema")(schema.schema_command)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"tresse {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool | None = typer.Option(
        None, "--version", "-V", callback=version_callback, is_eager=True, help="Show version"
    ),
) -> None:
    """Equations are written with x, y and p = y', e.g. tresse classify 'exp(p)'."""


def run() -> None:
    """Entry point for the CLI."""
    try:
        app()
    except TresseError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2) from None


if __name__ == "__main__":
    run()
