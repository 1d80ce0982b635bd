"""Options shared by the analysis commands and the report emitter."""

import json
import math
from pathlib import Path
from typing import Annotated, Any

import sympy
import typer

from tresse import __version__
from tresse.core.config import load_config
from tresse.core.symcore import tree_size
from tresse.models.config import TresseConfig
from tresse.models.report import Invocation, Report
from tresse.utils.logging import elide, setup_logging

SeedOpt = Annotated[int | None, typer.Option("--seed", help="Random seed for every sampler")]
SamplesOpt = Annotated[int | None, typer.Option("--samples", help="Signature points per equation")]
TolOpt = Annotated[
    float | None, typer.Option("--tol", help="Relative tolerance for zero tests and signature matches")
]
MaxOrderOpt = Annotated[int | None, typer.Option("--max-order", help="Highest jet order (6..10)")]
JsonOpt = Annotated[bool, typer.Option("--json", help="Output as JSON")]
FullOpt = Annotated[bool, typer.Option("--full", help="Print large expressions in full")]
ConfigOpt = Annotated[Path | None, typer.Option("--config", "-c", help="Path to tresse.yml")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", help="Show debug logging")]


def build_config(
    config_path: Path | None = None,
    seed: int | None = None,
    samples: int | None = None,
    tol: float | None = None,
    max_order: int | None = None,
    full: bool = False,
    verbose: bool = False,
) -> TresseConfig:
    """Load tresse.yml with command-line overrides and set up logging."""
    setup_logging(verbose)
    overrides: dict[str, Any] = {
        "max_order": max_order,
        "sampling": {"seed": seed, "zero_tol": tol},
        "classify": {"samples": samples, "match_rtol": tol},
        "output": {"full": full or None},
    }
    return load_config(config_path, overrides)


def invocation(command: str, config: TresseConfig, **inputs: str) -> Invocation:
    return Invocation(command=command, inputs=inputs, seed=config.sampling.seed, version=__version__)


def show_expr(e: sympy.Expr | None, config: TresseConfig) -> tuple[str | None, int | None]:
    """Printed expression and its node count, elided above the configured limit."""
    if e is None:
        return None, None
    nodes = tree_size(e)
    text = sympy.sstr(e)
    if config.output.full:
        return text, nodes
    return elide(text, nodes, config.output.elide_nodes), nodes


def finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def emit_json(report: Report) -> None:
    """Deterministic JSON: sorted keys, timing excluded."""
    typer.echo(json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True))
