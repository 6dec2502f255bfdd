from tools.cli import config
from tools.cli.config import find_project_root, PROJECT_ROOT, resolve_scenario


def test_find_project_root():
    """プロジェクトルートが正しく検出されるか確認"""
    root = find_project_root()
    assert (root / "pyproject.toml").exists()
    assert (root / "tools" / "cli").exists()


def test_paths_are_absolute():
    """設定されたパスが絶対パスであることを確認"""
    assert PROJECT_ROOT.is_absolute()
    assert (config.TEMPLATES_DIR / "base.svg.j2").exists()


def test_resolve_existing_path(tmp_path):
    path = tmp_path / "mine.json"
    path.write_text("{}")
    assert resolve_scenario(str(path)) == path.resolve()


def test_resolve_bundled_name(monkeypatch, tmp_path):
    """拡張子を省略したバンドル名を SCENARIO_DIR から探す"""
    (tmp_path / "conic_degree.json").write_text("{}")
    monkeypatch.setattr(config, "SCENARIO_DIR", tmp_path)
    assert resolve_scenario("conic_degree") == (tmp_path / "conic_degree.json").resolve()


def test_resolve_missing_is_returned_as_is(monkeypatch, tmp_path):
    monkeypatch.setattr(config, "SCENARIO_DIR", tmp_path)
    assert str(resolve_scenario("does_not_exist")) == "does_not_exist"


def test_bundled_scenarios_present():
    names = {path.stem for path in config.SCENARIO_DIR.glob("*.json")}
    assert {"trivial_degree", "conic_degree", "conic_monodromy"} <= names
