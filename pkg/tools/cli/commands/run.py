import re
from logging import getLogger
from pathlib import Path

from services.geometry.core.exceptions import GeometryError
from tools.cli.config import DEFAULT_OUT_DIR, resolve_scenario
from tools.cli.core import logging
from tools.cli.core.experiments import run_scenario
from tools.cli.core.loader import ScenarioError, load_scenario
from tools.cli.core.report import build_report, write_patch_columns, write_report, write_summary
from tools.cli.core.sketch import write_base_svg

logger = getLogger("lglab.cli.run")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


def _sketch_curves(lab):
    curves = []
    for name in lab.scenario.lagrangians:
        try:
            curves.append((name, lab.lagrangian(name).curve))
        except GeometryError as e:
            # 宣言の不整合は実験側の失敗レコードで報告済み
            logger.debug("skipping %s in sketch: %s", name, e)
    return curves + list(lab.paths)


def run(args) -> int:
    path = resolve_scenario(args.scenario)
    try:
        scenario = load_scenario(path)
    except ScenarioError as e:
        for line in e.lines():
            logging.error(line)
        return EXIT_INVALID

    seed = scenario.seed if args.seed is None else args.seed
    out_dir = Path(args.out) if args.out else DEFAULT_OUT_DIR / scenario.name
    logging.step(
        f"Running {logging.highlight(scenario.name)} "
        f"({len(scenario.experiments)} experiments, seed {seed})"
    )
    lab, records = run_scenario(scenario, seed=seed)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(out_dir, build_report(scenario, records, seed))
    write_summary(out_dir, records)
    if scenario.output.svg:
        write_base_svg(out_dir, lab.model, _sketch_curves(lab), lab.intersections, title=scenario.name)
    if scenario.output.export_patches:
        for index, (label, disc) in enumerate(lab.patches):
            stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", f"{label}_{disc.name}")
            write_patch_columns(out_dir, stem, disc.to_columns(), index)

    failed = [record for record in records if not record.passed]
    for record in records:
        if record.passed:
            logging.success(f"{record.name}: {len(record.checks)} checks passed")
        else:
            broken = ", ".join(check.invariant for check in record.checks if not check.passed)
            logging.error(f"{record.name}: {broken}")
    logging.info(f"Report written to {out_dir}")
    if failed:
        logging.error(f"{len(failed)} of {len(records)} experiments failed.")
        return EXIT_NUMERICAL
    logging.success("All experiments passed.")
    return EXIT_OK
