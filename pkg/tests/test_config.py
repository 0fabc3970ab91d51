from __future__ import annotations

import math

import pytest

from verhulst.config.defaults import DEFAULT_PRESETS, clone_defaults
from verhulst.config.loader import (
    OUTPUT_ENV,
    SETTINGS_ENV,
    Forcing,
    load_config,
    parse_config,
    parse_override,
    serialize_config,
)
from verhulst.core.errors import ConfigError
from verhulst.core.model import Variant


def test_empty_document_gives_defaults():
    config = parse_config("")
    assert config.variant is Variant.CORRELATED
    assert config.N0 == (5.0,)
    assert config.K == 10.0
    assert config.B == 0.0
    assert config.x0 == (0.1,)
    assert config.T == 1000.0
    assert config.dt is None
    assert config.bins == 100
    assert config.forcing == ()
    assert len(config.expand()) == 1


@pytest.mark.parametrize(
    "document, field",
    [
        ("omega: -1", "omega"),
        ("K: 0", "K"),
        ("dt: -0.1", "dt"),
        ("T: 1\ndt: 2", "dt"),
        ("bins: 1", "bins"),
        ("method: euler", "method"),
        ("estimator: entropy", "estimator"),
        ("variant: gompertz", "variant"),
        ("preset: fig99", "preset"),
        ("colour: green", "colour"),
        ("N0: [1, true]", "N0"),
        ("forcing.0.B1: 1", "forcing.0.omega1"),
        ("forcing.0.B1: 1\nforcing.0.omega1: 0", "forcing.0.omega1"),
    ],
)
def test_validation_names_the_field(document, field):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    assert info.value.field == field


def test_malformed_documents():
    with pytest.raises(ConfigError):
        parse_config("omega: [1, 2")
    with pytest.raises(ConfigError):
        parse_config("- just\n- a list\n")


def test_preset_with_omega_list_expands():
    config = parse_config("preset: fig3\nomega: [0.1, 0.5, 1, 2, 5, 10]\n")
    scenarios = config.expand()
    assert len(scenarios) == 6
    assert [s.spec.omega for s in scenarios] == [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    assert scenarios[0].name == "correlated_N0=5_omega=0.1_x0=0.1"


def test_forcing_entries_multiply_the_scenarios():
    config = parse_config("preset: table2\n")
    assert config.forcing[1] == Forcing(1.0, math.sqrt(2.0))
    assert len(config.expand()) == 2 * 4
    assert len(config.expand(include_forcing=False)) == 2
    assert config.expand()[0].spec.is_forced


def test_document_forcing_replaces_preset_forcing():
    config = parse_config("preset: table2\nforcing.0.B1: 2\nforcing.0.omega1: 3\n")
    assert config.forcing == (Forcing(2.0, 3.0),)


@pytest.mark.parametrize("preset", sorted(DEFAULT_PRESETS))
def test_every_preset_round_trips(preset):
    config = parse_config(f"preset: {preset}\n")
    assert parse_config(serialize_config(config)) == config


def test_custom_document_round_trips():
    config = parse_config("variant: case2\nB: 1\nN0: [0.5, 1]\nomega: 0.1\neps_u: 0.01\ndt: 0.002\n")
    assert config.variant is Variant.NEGATIVE_ONLY
    assert parse_config(serialize_config(config)) == config


def test_manifest_lists_numeric_tunables():
    manifest = parse_config("preset: table2\n").to_manifest()
    for key in ("dt", "bins", "eps_u", "eps_rel", "t_resolution", "density_floor", "T", "T_step", "n_points", "tail_fraction"):
        assert key in manifest
    assert manifest["omega"] == [1.0, 10.0]
    assert manifest["forcing"][0] == {"B1": 1.0, "omega1": 1.0}


def test_defaults_are_cloned():
    scenario, presets, theme = clone_defaults()
    scenario["N0"] = 99.0
    presets["fig1"]["params"]["T"] = 1.0
    assert clone_defaults()[0]["N0"] == 5.0
    assert clone_defaults()[1]["fig1"]["params"]["T"] == 50.0
    assert theme["axes"] == "#00ff41"


# ---------------------------------------------------------------------- layering
def test_parse_override():
    assert parse_override("omega=[1, 2]") == ("omega", [1, 2])
    assert parse_override("dt=") == ("dt", None)
    with pytest.raises(ConfigError):
        parse_override("omega")


def test_layering_order(tmp_path, monkeypatch):
    path = tmp_path / "scenario.yaml"
    path.write_text("preset: fig1\nT: 20\nbins: 50\noutput_dir: from-file\n", encoding="utf8")
    config = load_config(path, overrides=["bins=60"], flags={"bins": 70, "dt": None})
    assert config.preset == "fig1"
    assert config.omega == (1.0, 10.0)
    assert config.T == 20.0
    assert config.bins == 70
    assert config.output_dir == "from-file"

    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert load_config(path).output_dir == str(tmp_path / "env")
    assert load_config(path, flags={"output_dir": "flag"}).output_dir == "flag"


def test_unreadable_document_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "missing.yaml")
    assert info.value.field == "config"


def test_settings_environment_variable(tmp_path, monkeypatch):
    path = tmp_path / "scenario.yaml"
    path.write_text("N0: 2\n", encoding="utf8")
    monkeypatch.setenv(SETTINGS_ENV, str(path))
    assert load_config().N0 == (2.0,)


def test_override_keeps_file_forcing(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("forcing.0.B1: 1\nforcing.0.omega1: 2\n", encoding="utf8")
    config = load_config(path, overrides=["forcing.1.B1=3", "forcing.1.omega1=4"])
    assert config.forcing == (Forcing(1.0, 2.0), Forcing(3.0, 4.0))


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "missing.yaml")
    assert info.value.field == "config"
