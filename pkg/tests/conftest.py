"""
シナリオ回帰テスト共通 Fixture

バンドル済みシナリオ (scenarios/) をロードし、全実験を実行した結果を共有する。
"""

from pathlib import Path

import pytest

from tools.cli.core.experiments import run_scenario
from tools.cli.core.loader import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
BUNDLED = sorted(path.stem for path in SCENARIO_DIR.glob("*.json"))


@pytest.fixture(scope="session")
def scenario_results():
    """シナリオ名 -> (scenario, lab, records) のキャッシュ (session スコープ)"""
    cache: dict[str, tuple] = {}

    def _run(name: str):
        if name not in cache:
            scenario = load_scenario(SCENARIO_DIR / f"{name}.json")
            lab, records = run_scenario(scenario)
            cache[name] = (scenario, lab, records)
        return cache[name]

    return _run
