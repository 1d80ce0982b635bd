import json

import pytest
from typer.testing import CliRunner

from tresse import __version__
from tresse.cli.main import app
from tresse.core.classify import orbit_codim
from tresse.core.jetspace import ODE
from tresse.core.projective import linearizable
from tresse.models.config import TresseConfig

runner = CliRunner()


def test_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_no_args_shows_help():
    result = runner.invoke(app, [])
    assert "linearize" in result.output


def test_linearizable_exits_zero():
    result = runner.invoke(app, ["linearize", "y"])
    assert result.exit_code == 0, result.output
    assert "Linearizable" in result.output


def test_not_linearizable_exits_one():
    result = runner.invoke(app, ["linearize", "y^2"])
    assert result.exit_code == 1
    assert "NotLinearizable" in result.output


def test_not_cubic_exits_one():
    result = runner.invoke(app, ["linearize", "exp(p)", "--json"])
    assert result.exit_code == 1
    assert json.loads(result.stdout)["verdict"] == "NotCubic"


def test_parse_error_exits_two():
    result = runner.invoke(app, ["linearize", "x $ y"])
    assert result.exit_code == 2
    assert "Error" in result.output
    assert "position 2" in result.output


def test_json_is_deterministic():
    first = runner.invoke(app, ["linearize", "y^2", "--json", "--seed", "3"])
    second = runner.invoke(app, ["linearize", "y^2", "--json", "--seed", "3"])
    assert first.stdout == second.stdout
    data = json.loads(first.stdout)
    assert data["schema_version"] == "1"
    assert data["invocation"] == {
        "command": "linearize",
        "inputs": {"f": "y^2"},
        "seed": 3,
        "version": __version__,
    }
    assert "seconds" not in data


def test_cli_matches_library():
    data = json.loads(runner.invoke(app, ["linearize", "y^2", "--json"]).stdout)
    direct = linearizable(ODE.from_text("y^2"), TresseConfig(), cross_check=True, proportionality=True)
    assert data["verdict"] == str(direct.verdict)
    assert data["L1"] == "-6"
    assert data["L2"] == "0"
    assert data["frobenius_integrable"] is False
    assert data["h_ratio"] == pytest.approx(direct.h_ratio.constant.real)


def test_equiv_needs_second_equation():
    result = runner.invoke(app, ["equiv", "p^4"])
    assert result.exit_code == 2


def test_equiv_across_strata_exits_one():
    result = runner.invoke(app, ["equiv", "x*p^3", "p^4", "--json"])
    assert result.exit_code == 1
    data = json.loads(result.stdout)
    assert data["verdict"] == "NotEquivalent"
    assert data["invocation"]["inputs"] == {"f1": "x*p^3", "f2": "p^4"}


@pytest.mark.slow
def test_equiv_under_map():
    result = runner.invoke(app, ["equiv", "p^4", "--map", "x, 2*y", "--json"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["verdict"] == "Equivalent"


def test_transform():
    result = runner.invoke(app, ["transform", "0", "x", "2*y", "--json", "--points", "2"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["symbolic"] is True
    assert data["transformed"] == "0"
    assert len(data["samples"]) == 2
    assert all(s["value"] == {"re": 0.0, "im": 0.0} for s in data["samples"])


def test_orbitdim_matches_library():
    data = json.loads(runner.invoke(app, ["orbitdim", "4", "--json"]).stdout)
    measured = orbit_codim(4, 3, TresseConfig())
    assert data["codim"] == measured.codim == data["expected"] == 0
    assert data["ranks"] == measured.ranks
    assert data["matches"] is True


def test_orbitdim_range():
    result = runner.invoke(app, ["orbitdim", "9"])
    assert result.exit_code == 2


def test_fiber_on_exponential():
    result = runner.invoke(app, ["fiber", "exp(p)", "--points", "0.3,0.7", "--json"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["orbit"] is None
    assert [pt["p"] for pt in data["i7"]] == [0.3, 0.7]
    for pt in data["i7"]:
        assert pt["value"]["re"] == pytest.approx(0.0, abs=1e-9)
        assert pt["value"]["im"] == pytest.approx(4.0)


def test_fiber_bad_points():
    result = runner.invoke(app, ["fiber", "exp(p)", "--points", "a,b"])
    assert result.exit_code == 2


def test_fiber_singular_orbit():
    result = runner.invoke(app, ["fiber", "p^3"])
    assert result.exit_code == 0
    assert "S1" in result.output


def test_invariants_of_trivial_equation():
    result = runner.invoke(app, ["invariants", "0", "--json"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert "trivial stratum I=H=0" in data["note"]
    assert all(entry["expr"] == "0" for entry in data["invariants"])
    assert data["rank"]["dimension"] == 8


def test_selftest_quick_subset():
    result = runner.invoke(app, ["selftest", "--only", "f3", "--quick", "--json"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["passed"] is True
    assert [o["name"] for o in data["oracles"]] == ["f3"]


def test_selftest_unknown_oracle():
    result = runner.invoke(app, ["selftest", "--only", "nope"])
    assert result.exit_code == 2


def test_config_file_is_used(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("sampling:\n  seed: 99\n")
    data = json.loads(runner.invoke(app, ["linearize", "y", "--json", "-c", str(path)]).stdout)
    assert data["invocation"]["seed"] == 99


def test_invalid_config_exits_two(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("max_order: 3\n")
    result = runner.invoke(app, ["linearize", "y", "-c", str(path)])
    assert result.exit_code == 2
    assert "max_order" in result.output


def test_schema(tmp_path):
    result = runner.invoke(app, ["schema", "-o", str(tmp_path)])
    assert result.exit_code == 0
    config_schema = json.loads((tmp_path / "tresse.config.schema.json").read_text())
    assert "sampling" in config_schema["properties"]
    reports = json.loads((tmp_path / "tresse.report.schema.json").read_text())
    assert set(reports) >= {"linearize", "equiv", "fiber", "selftest"}
