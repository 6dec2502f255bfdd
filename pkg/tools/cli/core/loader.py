"""
Scenario loader

JSON / YAML のシナリオファイルを読み込み、pydantic スキーマで検証する。
エラーは ``path:line: message`` 形式の診断としてまとめて報告する。
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence

import yaml
from pydantic import ValidationError

from services.common.models.scenario import Scenario
from services.geometry.config import GeometryConfig, config
from services.geometry.core.exceptions import ModelCatalogueError
from services.geometry.models import make_model

logger = logging.getLogger("lglab.cli.loader")

YAML_SUFFIXES = (".yaml", ".yml")


class ScenarioError(Exception):
    """シナリオの構文・検証エラー"""

    def __init__(self, path: Path, diagnostics: Sequence[tuple[Optional[int], str]]):
        self.path = Path(path)
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.lines()))

    def lines(self) -> List[str]:
        out = []
        for line, message in self.diagnostics:
            where = f"{self.path}:{line}" if line is not None else str(self.path)
            out.append(f"{where}: {message}")
        return out


def _node_line(root: Optional[yaml.Node], loc: Sequence[Any]) -> Optional[int]:
    """Line (1-based) of the deepest node reachable along a validation location."""
    if root is None:
        return None
    node = root
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((value for k, value in node.value if k.value == str(key)), None)
            if match is None:
                # discriminator tags and unknown keys are not part of the document
                continue
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
            if not 0 <= key < len(node.value):
                break
            node = node.value[key]
        else:
            break
    return node.start_mark.line + 1


def _compose(text: str) -> Optional[yaml.Node]:
    # JSON is read through YAML only to recover line numbers
    try:
        return yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return None


def _parse(path: Path, text: str) -> Any:
    if path.suffix.lower() in YAML_SUFFIXES:
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ScenarioError(path, [(line, f"invalid YAML: {getattr(e, 'problem', None) or e}")]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(path, [(e.lineno, f"invalid JSON: {e.msg}")]) from None


def load_scenario(path: Path | str) -> Scenario:
    """
    シナリオファイルを読み込んで検証する。

    Raises:
        ScenarioError: 読み込み・構文・スキーマ・モデルIDのいずれかが不正
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(path, [(None, f"cannot read scenario: {e.strerror or e}")]) from None

    data = _parse(path, text)
    if not isinstance(data, dict):
        raise ScenarioError(path, [(1, "scenario must be a mapping at the top level")])

    root = _compose(text)
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        diagnostics = []
        for err in e.errors():
            loc = ".".join(str(part) for part in err["loc"]) or "<root>"
            diagnostics.append((_node_line(root, err["loc"]), f"{loc}: {err['msg']}"))
        raise ScenarioError(path, diagnostics) from None

    try:
        make_model(scenario.model)
    except ModelCatalogueError as e:
        raise ScenarioError(path, [(_node_line(root, ["model"]), str(e))]) from None

    diagnostics = [
        (_node_line(root, ["settings", key]), f"settings.{key}: unknown setting")
        for key in sorted(set(scenario.settings) - set(GeometryConfig.model_fields))
    ]
    if not diagnostics:
        try:
            GeometryConfig.model_validate({**config.model_dump(), **scenario.settings})
        except ValidationError as e:
            for err in e.errors():
                key = str(err["loc"][0]) if err["loc"] else ""
                diagnostics.append((_node_line(root, ["settings", key]), f"settings.{key}: {err['msg']}"))
    if diagnostics:
        raise ScenarioError(path, diagnostics)

    logger.debug(
        "loaded scenario %s",
        scenario.name,
        extra={"path": str(path), "experiments": len(scenario.experiments)},
    )
    return scenario
