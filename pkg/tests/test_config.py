import pytest

from tresse.core.config import load_config
from tresse.exceptions import ConfigError
from tresse.models.config import TresseConfig


def test_defaults():
    config = TresseConfig()
    assert config.max_order == 8
    assert config.sampling.seed == 42
    assert config.sampling.box == (0.3, 1.7)
    assert config.classify.samples == 40
    assert config.classify.rank_samples == 5
    assert config.classify.match_rtol == 1e-5
    assert config.output.full is False


def test_missing_default_file_uses_defaults(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert load_config() == TresseConfig()


def test_load_yaml(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("sampling:\n  seed: 7\n  box: [0.5, 2.5]\nclassify:\n  samples: 12\n")
    config = load_config(path)
    assert config.sampling.seed == 7
    assert config.sampling.box == (0.5, 2.5)
    assert config.classify.samples == 12


def test_found_in_cwd(tmp_path, monkeypatch):
    (tmp_path / "tresse.yaml").write_text("max_order: 7\n")
    monkeypatch.chdir(tmp_path)
    assert load_config().max_order == 7


def test_overrides_beat_file_and_skip_none(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("sampling:\n  seed: 7\n  zero_tol: 1.0e-8\n")
    config = load_config(path, {"sampling": {"seed": 9, "zero_tol": None}, "max_order": None})
    assert config.sampling.seed == 9
    assert config.sampling.zero_tol == 1e-8
    assert config.max_order == 8


def test_empty_file(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("")
    assert load_config(path) == TresseConfig()


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("sampling:\n  box: [2.0, 1.0]\n", "sampling.box"),
        ("max_order: 12\n", "max_order"),
        ("classify:\n  samples: 3\n  rank_samples: 5\n", "rank_samples"),
        ("sampling:\n  colour: red\n", "sampling.colour"),
        ("classify:\n  match_rtol: 0\n", "classify.match_rtol"),
    ],
)
def test_invalid_values(tmp_path, text, fragment):
    path = tmp_path / "tresse.yml"
    path.write_text(text)
    with pytest.raises(ConfigError, match="Invalid configuration") as info:
        load_config(path)
    assert fragment in str(info.value)


def test_invalid_yaml(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("sampling: [unclosed\n")
    with pytest.raises(ConfigError, match="Invalid YAML"):
        load_config(path)


def test_not_a_mapping(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(path)


def test_explicit_path_must_exist(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yml")


def test_error_lines_show_key_and_value(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("sampling:\n  colour: red\nmax_order: 12\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    message = str(info.value)
    assert "  sampling.colour = 'red': " in message
    assert "  max_order = 12: max_order must be between 6 and 10" in message


def test_cross_field_error_is_reported_without_key(tmp_path):
    path = tmp_path / "tresse.yml"
    path.write_text("classify:\n  samples: 3\n  rank_samples: 5\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert "  (config): classify.rank_samples cannot exceed classify.samples" in str(info.value)


def test_yml_preferred_over_yaml(tmp_path, monkeypatch):
    (tmp_path / "tresse.yml").write_text("max_order: 9\n")
    (tmp_path / "tresse.yaml").write_text("max_order: 7\n")
    monkeypatch.chdir(tmp_path)
    assert load_config().max_order == 9
