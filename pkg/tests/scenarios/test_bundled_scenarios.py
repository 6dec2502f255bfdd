"""
バンドル済みシナリオの回帰テスト

- 全シナリオがスキーマ検証を通る
- 全実験のチェックが合格する (slow)
"""

import pytest

from tests.conftest import BUNDLED, SCENARIO_DIR
from tools.cli.core.loader import load_scenario


def test_bundle_is_not_empty():
    assert "trivial_degree" in BUNDLED
    assert len(BUNDLED) >= 10


@pytest.mark.parametrize("name", BUNDLED)
def test_scenario_validates(name):
    scenario = load_scenario(SCENARIO_DIR / f"{name}.json")
    assert scenario.name == name


@pytest.mark.slow
@pytest.mark.parametrize("name", BUNDLED)
def test_scenario_passes(name, scenario_results):
    scenario, _, records = scenario_results(name)
    assert [r.name for r in records] == [e.name for e in scenario.experiments]
    failed = {
        r.name: r.error or [c.invariant for c in r.checks if not c.passed] for r in records if not r.passed
    }
    assert not failed, f"{name}: {failed}"


@pytest.mark.slow
class TestOracles:
    """既知の値との照合"""

    def test_trivial_degree_is_one(self, scenario_results):
        _, _, records = scenario_results("trivial_degree")
        degree = next(r for r in records if r.name == "degree")
        assert [p["degree"] for p in degree.values["points"]] == [1]

    def test_conic_monodromy_swaps_sign(self, scenario_results):
        _, _, records = scenario_results("conic_monodromy")
        around = next(r for r in records if r.name == "around_zero")
        assert around.summary.value <= around.summary.tolerance

    def test_intersections_are_recorded(self, scenario_results):
        _, lab, _ = scenario_results("conic_degree")
        assert lab.intersections
        assert abs(lab.intersections[0] - 2.0) < 1e-7
