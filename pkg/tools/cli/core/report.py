"""
Report writer

report.json (全レコード), summary.csv (実験ごとに1行), パッチの列形式CSVを書き出す。
数値は決定的に整形し、同じシナリオとシードからはバイト単位で同じ summary.csv を得る。
"""

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from services.common.models.scenario import Scenario
from tools.cli.core.experiments import ExperimentRecord

REPORT_SCHEMA = "lglab-report/1"
SUMMARY_COLUMNS = ("experiment", "name", "value", "residual", "tolerance", "status")


def to_jsonable(value: Any) -> Any:
    """complex は [re, im]、非有限の浮動小数は null に変換する"""
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return str(value)


def format_number(value: float) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return format(value, ".12g")


def build_report(scenario: Scenario, records: Sequence[ExperimentRecord], seed: int) -> Dict[str, Any]:
    experiments = []
    for record in records:
        experiments.append(
            {
                "name": record.name,
                "kind": record.kind,
                "passed": record.passed,
                "inputs": record.inputs,
                "values": record.values,
                "checks": [asdict(check) for check in record.checks],
                "summary": asdict(record.summary) if record.summary else None,
                "error": record.error,
            }
        )
    return to_jsonable(
        {
            "schema": REPORT_SCHEMA,
            "scenario": scenario.name,
            "model": scenario.model,
            "seed": seed,
            "settings": dict(scenario.settings),
            "passed": all(record.passed for record in records),
            "experiments": experiments,
        }
    )


def summary_rows(records: Sequence[ExperimentRecord]) -> List[List[str]]:
    rows = []
    for record in records:
        s = record.summary
        rows.append(
            [
                record.name,
                s.name if s else "",
                format_number(s.value) if s else "",
                format_number(s.residual) if s else "",
                format_number(s.tolerance) if s else "",
                "pass" if record.passed else "fail",
            ]
        )
    return rows


def write_report(out_dir: Path, report: Dict[str, Any]) -> Path:
    path = Path(out_dir) / "report.json"
    path.write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_summary(out_dir: Path, records: Sequence[ExperimentRecord]) -> Path:
    path = Path(out_dir) / "summary.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerows(summary_rows(records))
    return path


def write_patch_columns(out_dir: Path, label: str, columns: Dict[str, list], index: Optional[int] = None) -> Path:
    """DiscPatch.to_columns() の結果を patches/<label>.csv に書き出す"""
    patch_dir = Path(out_dir) / "patches"
    patch_dir.mkdir(parents=True, exist_ok=True)
    stem = label if index is None else f"{label}_{index}"
    path = patch_dir / f"{stem}.csv"
    keys = list(columns)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(keys)
        for row in zip(*(columns[key] for key in keys)):
            writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])
    return path
