from fractions import Fraction

import pytest

from tsirelson_lab.config import (
    SUPPORT_BOUND,
    Budgets,
    ExperimentConfig,
    Settings,
    load_experiment_config,
    load_settings,
)
from tsirelson_lab.exceptions import InvalidConfig


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    # setenv first so teardown also removes whatever load_dotenv writes
    for name in ("TSIRELSON_SUPPORT_BOUND", "TSIRELSON_SEED", "TSIRELSON_JOBS"):
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)


def test_defaults(tmp_path):
    settings = load_settings(dotenv_path=str(tmp_path / "missing.env"))
    assert settings.support_bound == SUPPORT_BOUND
    assert settings.decimal_digits == 12
    assert settings.jobs == 1


def test_yaml_then_environment_precedence(tmp_path, monkeypatch):
    path = tmp_path / "lab.yaml"
    path.write_text("settings:\n  support_bound: 40\n  seed: 3\n")
    monkeypatch.setenv("TSIRELSON_SEED", "11")
    settings = load_settings(str(path), str(tmp_path / "missing.env"))
    assert settings.support_bound == 40
    assert settings.seed == 11


def test_dotenv_file_is_read(tmp_path):
    env = tmp_path / ".env"
    env.write_text("TSIRELSON_JOBS=2\n")
    assert load_settings(dotenv_path=str(env)).jobs == 2


def test_invalid_settings_raise_invalid_config(tmp_path, monkeypatch):
    monkeypatch.setenv("TSIRELSON_SUPPORT_BOUND", "0")
    with pytest.raises(InvalidConfig):
        load_settings(dotenv_path=str(tmp_path / "missing.env"))


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("settings: [unclosed\n")
    with pytest.raises(InvalidConfig):
        load_settings(str(path), str(tmp_path / "missing.env"))


def test_experiment_config_file(tmp_path):
    path = tmp_path / "stabilize.yaml"
    path.write_text(
        "experiment: stabilize\n"
        "n: 1\n"
        "epsilon: 1/8\n"
        "k: 3\n"
        "budgets:\n"
        "  support: 64\n"
        "settings:\n"
        "  jobs: 1\n"
    )
    config = load_experiment_config(str(path))
    assert config.epsilon_value == Fraction(1, 8)
    assert config.budgets.support == 64
    assert config.basis.length == 1024


@pytest.mark.parametrize("field, value", [
    ("epsilon", "3/2"),
    ("epsilon", "abc"),
    ("experiment", "unknown"),
    ("c_rule", "harmonic"),
])
def test_experiment_config_validation(field, value):
    with pytest.raises(InvalidConfig):
        ExperimentConfig(**{field: value})


def test_budgets_defaults():
    budgets = Budgets()
    assert budgets.family == 8
    assert budgets.block_width == 2


def test_budgets_follow_the_settings():
    budgets = Budgets.from_settings(Settings(support_bound=40, delta_max_family=3, distortion_averages=2))
    assert budgets.support == 40
    assert budgets.family == 3
    assert budgets.block_width == 2
    assert budgets.averages == 2


def test_delta_family_from_the_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TSIRELSON_DELTA_MAX_FAMILY", "5")
    settings = load_settings(dotenv_path=str(tmp_path / "missing.env"))
    assert Budgets.from_settings(settings).family == 5


def test_experiment_without_budgets_uses_the_settings(tmp_path):
    path = tmp_path / "delta.yaml"
    path.write_text("experiment: delta\nn: 1\nseed: 4\n")
    config = load_experiment_config(str(path))
    assert config.budgets is None
    assert config.seed == 4
