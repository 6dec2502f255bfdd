import os
from pathlib import Path


def find_project_root(current_path: Path = None) -> Path:
    """pyproject.toml を探してプロジェクトルートを特定する"""
    if current_path is None:
        current_path = Path.cwd()

    for path in [current_path] + list(current_path.parents):
        if (path / "pyproject.toml").exists():
            return path

    return Path(__file__).parent.parent.parent.resolve()


PROJECT_ROOT = find_project_root()
TOOLS_DIR = PROJECT_ROOT / "tools"
TEMPLATES_DIR = Path(__file__).parent / "templates"
DEFAULT_LOG_CONFIG = PROJECT_ROOT / "config" / "lab_log.yaml"
DEFAULT_OUT_DIR = Path("out")


def _resolve_scenario_dir() -> Path:
    """バンドル済みシナリオのディレクトリを解決する"""
    # パス優先順位:
    # 1. 環境変数 LGLAB_SCENARIO_DIR
    # 2. プロジェクトルート直下の scenarios/
    env_dir = os.environ.get("LGLAB_SCENARIO_DIR")
    if env_dir:
        return Path(env_dir).resolve()
    return PROJECT_ROOT / "scenarios"


SCENARIO_DIR = _resolve_scenario_dir()


def resolve_scenario(name: str) -> Path:
    """
    シナリオ引数をファイルパスに解決する。

    既存のパスはそのまま使い、見つからない場合は SCENARIO_DIR 配下の
    同名ファイル (拡張子省略可) を探す。
    """
    # WSL対応: /mnt/C/path... -> /mnt/c/path... に正規化
    parts = name.split("/")
    if len(parts) > 3 and parts[1] == "mnt" and len(parts[2]) == 1 and parts[2].isupper():
        parts[2] = parts[2].lower()
        name = "/".join(parts)

    path = Path(name)
    if path.exists():
        return path.resolve()
    for candidate in (SCENARIO_DIR / name, *(SCENARIO_DIR / f"{name}{ext}" for ext in (".json", ".yaml", ".yml"))):
        if candidate.exists():
            return candidate.resolve()
    return path
