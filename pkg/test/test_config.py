import pytest

from thermoq.config import (
    CONFIG_ENV,
    DEFAULTS,
    Settings,
    env_overrides,
    load_config_file,
    parse_float_list,
    parse_int_list,
)
from thermoq.errors import ConfigError


# --- Pytest Fixtures ---
@pytest.fixture
def config_file(tmp_path):
    """A key=value config file with a comment line."""
    path = tmp_path / "run.cfg"
    path.write_text("# box sweep\nsystem=box\nL=1,2,3\nthreshold=0.05\nsamples=50\n")
    return str(path)


# Test value parsers
def test_parse_float_list():
    assert parse_float_list("1, 2.5,3") == [1.0, 2.5, 3.0]
    assert parse_float_list([1, 2]) == [1.0, 2.0]


def test_parse_int_list_range_and_list():
    assert parse_int_list("0-5") == [0, 1, 2, 3, 4, 5]
    assert parse_int_list("1,3") == [1, 3]
    assert parse_int_list("2") == [2]


# Test load_config_file
def test_load_config_file(config_file):
    values = load_config_file(config_file)
    assert values == {"system": "box", "L": "1,2,3", "threshold": "0.05", "samples": "50"}


def test_load_config_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "nope.cfg"))


def test_load_config_file_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("temperature=2\n")
    with pytest.raises(ConfigError) as excinfo:
        load_config_file(str(path))
    assert "temperature" in str(excinfo.value)


# Test env_overrides
def test_env_overrides_uses_prefix():
    environ = {"THERMOQ_THRESHOLD": "0.2", "THERMOQ_T_MAX": "4", "HOME": "/root"}
    assert env_overrides(environ) == {"threshold": "0.2", "T_max": "4"}


# Test Settings layering
def test_settings_defaults():
    settings = Settings(environ={})
    assert settings["system"] == "box"
    assert settings["L"] == [3.0]
    assert settings["modes"] == [1]
    assert settings["T"] is None
    assert settings.sources["threshold"] == "default"
    assert set(settings.as_dict()) == set(DEFAULTS)


def test_settings_precedence(config_file):
    environ = {CONFIG_ENV: config_file, "THERMOQ_THRESHOLD": "0.2", "THERMOQ_SAMPLES": "70"}
    settings = Settings(flags={"samples": "90", "T": None}, environ=environ)
    assert settings.config_path == config_file
    assert settings["L"] == [1.0, 2.0, 3.0]
    assert settings.sources["L"] == "file"
    assert settings["threshold"] == 0.2
    assert settings.sources["threshold"] == "env"
    assert settings["samples"] == 90
    assert settings.sources["samples"] == "flag"


def test_settings_explicit_path_beats_env(config_file, tmp_path):
    other = tmp_path / "other.cfg"
    other.write_text("system=free\n")
    settings = Settings(config_path=str(other), environ={CONFIG_ENV: config_file})
    assert settings["system"] == "free"
    assert settings["L"] == [3.0]


def test_settings_reads_process_environment(monkeypatch):
    monkeypatch.setenv("THERMOQ_OMEGA", "0.5,1")
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    assert Settings()["omega"] == [0.5, 1.0]


def test_settings_invalid_value_names_source():
    with pytest.raises(ConfigError) as excinfo:
        Settings(flags={"samples": "many"}, environ={})
    assert "samples" in str(excinfo.value)
    assert "flag" in str(excinfo.value)


def test_settings_unknown_flag():
    with pytest.raises(ConfigError):
        Settings(flags={"colour": "red"}, environ={})


def test_settings_get_default():
    settings = Settings(environ={})
    assert settings.get("omega", []) == []
    assert settings.get("threshold") == 0.1
