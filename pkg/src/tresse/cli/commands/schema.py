"""Schema command: JSON schemas for tresse.yml and the command reports."""

import json
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console

from tresse.models.report import REPORT_MODELS

console = Console()

CONFIG_SCHEMA = "tresse.config.schema.json"
REPORT_SCHEMA = "tresse.report.schema.json"


def generate_schemas(output_dir: Path = Path(".")) -> tuple[Path, Path]:
    """Write the config schema and one report schema holding every command's model.

    Returns:
        Tuple of (config_schema_path, report_schema_path).
    """
    from tresse.models.config import TresseConfig

    output_dir.mkdir(parents=True, exist_ok=True)

    config_path = output_dir / CONFIG_SCHEMA
    config_path.write_text(json.dumps(TresseConfig.model_json_schema(), indent=2))

    reports = {name: model.model_json_schema() for name, model in REPORT_MODELS.items()}
    report_path = output_dir / REPORT_SCHEMA
    report_path.write_text(json.dumps(reports, indent=2, sort_keys=True))

    return config_path, report_path


def schema_command(
    output_dir: Annotated[Path, typer.Option("--output", "-o", help="Directory for the schema files")] = Path("."),
) -> None:
    """Generate JSON schemas for tresse.yml and the --json reports."""
    config_path, report_path = generate_schemas(output_dir)
    console.print("[green]Generated schemas:[/green]")
    console.print(f"  • {config_path}")
    console.print(f"  • {report_path}")
    console.print("\nAdd this to [bold]tresse.yml[/bold] for autocompletion:")
    console.print(f"  # yaml-language-server: $schema=./{CONFIG_SCHEMA}")
