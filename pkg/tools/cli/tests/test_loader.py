import json

import pytest

from tools.cli.core.loader import ScenarioError, load_scenario

BROKEN_SAMPLES = """{
  "schema_version": 1,
  "name": "bad",
  "model": "trivial_line",
  "experiments": [
    {"kind": "grade", "name": "g", "lagrangian": "L0", "samples": 0}
  ]
}
"""


def _write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2) if not isinstance(data, str) else data)
    return path


def _scenario(**overrides):
    data = {
        "schema_version": 1,
        "name": "ok",
        "model": "trivial_line",
        "lagrangians": {
            "L0": {
                "curve": {"kind": "segment", "start": 0.0, "end": 1.0},
                "fiber": {"kind": "point"},
                "grading": {"fiber_anchor": 0.0, "base_anchor": 0.0},
            }
        },
        "experiments": [{"kind": "grade", "name": "g", "lagrangian": "L0"}],
    }
    data.update(overrides)
    return data


def test_load_valid_json(tmp_path):
    scenario = load_scenario(_write(tmp_path, _scenario()))
    assert scenario.name == "ok"
    assert scenario.lagrangians["L0"].curve.end == 1 + 0j


def test_load_valid_yaml(tmp_path):
    text = """
schema_version: 1
name: from-yaml
model: conic
experiments:
  - kind: monodromy
    name: around_zero
    loop: {kind: arc, center: 0.0, radius: 1.0, theta_start: 0.0, theta_end: 6.283185307179586}
    start: [1.0, 1.0]
    expected: [-1.0, -1.0]
"""
    scenario = load_scenario(_write(tmp_path, text, "scenario.yaml"))
    assert scenario.name == "from-yaml"
    assert scenario.experiments[0].expected == [-1 + 0j, -1 + 0j]


def test_schema_error_points_at_line(tmp_path):
    """検証エラーは path:line: message 形式"""
    path = _write(tmp_path, BROKEN_SAMPLES)
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    lines = exc.value.lines()
    assert len(lines) == 1
    assert lines[0].startswith(f"{path}:6: experiments.0.grade.samples:")


def test_invalid_json_line(tmp_path):
    path = _write(tmp_path, '{\n  "schema_version": 1,\n  "name": "x"\n  "model": "conic"\n}\n')
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    assert exc.value.diagnostics[0][0] == 4
    assert "invalid JSON" in exc.value.diagnostics[0][1]


def test_invalid_yaml(tmp_path):
    path = _write(tmp_path, "name: [unclosed\n", "broken.yml")
    with pytest.raises(ScenarioError, match="invalid YAML"):
        load_scenario(path)


def test_top_level_must_be_mapping(tmp_path):
    with pytest.raises(ScenarioError, match="mapping at the top level"):
        load_scenario(_write(tmp_path, "[1, 2]"))


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read scenario"):
        load_scenario(tmp_path / "nope.json")


def test_unknown_model(tmp_path):
    path = _write(tmp_path, _scenario(model="quartic"))
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    line, message = exc.value.diagnostics[0]
    assert line == 4
    assert "Unknown model: quartic" in message
    assert "conic" in message


def test_unknown_setting(tmp_path):
    path = _write(tmp_path, _scenario(settings={"BOGUS_KNOB": 1.0}))
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    assert exc.value.diagnostics[0][1] == "settings.BOGUS_KNOB: unknown setting"


def test_setting_out_of_range(tmp_path):
    path = _write(tmp_path, _scenario(settings={"TRANSPORT_STEP": 0.5}))
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    assert exc.value.diagnostics[0][1].startswith("settings.TRANSPORT_STEP:")


def test_error_message_joins_lines(tmp_path):
    err = ScenarioError(tmp_path / "a.json", [(3, "first"), (None, "second")])
    assert str(err) == f"{tmp_path / 'a.json'}:3: first\n{tmp_path / 'a.json'}: second"
