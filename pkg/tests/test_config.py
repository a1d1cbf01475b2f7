from __future__ import annotations

import json

import pytest

from caplab.config import RunConfig, config_from_mapping, load_config
from caplab.errors import InvalidInputError
from caplab.verify import DEFAULT_TOLERANCES


def test_defaults():
    cfg = load_config(None)
    assert cfg.radii == (25.0, 50.0, 100.0)
    assert cfg.radial.grid_points == 1024
    assert cfg.tolerances == DEFAULT_TOLERANCES


def test_yaml_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "reaction: {kind: expression, expr: '0.7 - u'}\n"
        "kappa: -2\n"
        "radii: [10, 20]\n"
        "radial: {grid_points: 256, initial_guesses: [zero]}\n"
        "profile: {T: 12}\n"
        "tolerances: {pohozaev: 1.0e-3}\n")
    cfg = load_config(path)
    assert cfg.kappa == -2.0 and cfg.radii == (10.0, 20.0)
    assert cfg.radial.grid_points == 256 and cfg.radial.initial_guesses == ("zero",)
    assert cfg.profile.T == 12 and cfg.profile.step == 1e-4
    assert cfg.tolerances["pohozaev"] == 1e-3
    assert cfg.tolerances["hamiltonian_drift"] == DEFAULT_TOLERANCES["hamiltonian_drift"]


def test_tolerance_file_relative_to_config(tmp_path):
    table = dict(DEFAULT_TOLERANCES, radial_residual=5e-7)
    (tmp_path / "tolerances.json").write_text(json.dumps(table))
    (tmp_path / "run.yaml").write_text("tolerances: tolerances.json\n")
    assert load_config(tmp_path / "run.yaml").tolerances["radial_residual"] == 5e-7


@pytest.mark.parametrize("data", [
    {"kappa": 0.5},
    {"radii": [50, 25]},
    {"radii": [-1, 2]},
    {"radial": {"grid_points": 8}},
    {"radial": {"colour": "red"}},
    {"profile": {"horizon": 3}},
    {"tolerances": {"made_up": 1.0}},
    {"tolerances": "missing.json"},
    {"surprise": 1},
])
def test_invalid_mappings(data, tmp_path):
    with pytest.raises(InvalidInputError):
        config_from_mapping(data, base=tmp_path)


def test_incomplete_tolerance_table():
    tol = dict(DEFAULT_TOLERANCES)
    del tol["pohozaev"]
    with pytest.raises(InvalidInputError):
        RunConfig(tolerances=tol)


def test_unreadable_files(tmp_path):
    with pytest.raises(InvalidInputError):
        load_config(tmp_path / "nope.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("radii: [1, 2\n")
    with pytest.raises(InvalidInputError):
        load_config(bad)
    listy = tmp_path / "list.yaml"
    listy.write_text("- 1\n- 2\n")
    with pytest.raises(InvalidInputError):
        load_config(listy)


def test_overrides_revalidate():
    cfg = RunConfig()
    assert cfg.with_overrides(kappa=-3.0).kappa == -3.0
    assert cfg.with_overrides(kappa=None).kappa == -1.0
    with pytest.raises(InvalidInputError):
        cfg.with_overrides(radii=(3.0, 2.0))
