from tools.cli.config import resolve_scenario
from tools.cli.core import logging
from tools.cli.core.loader import ScenarioError, load_scenario


def run(args) -> int:
    path = resolve_scenario(args.scenario)
    try:
        scenario = load_scenario(path)
    except ScenarioError as e:
        for line in e.lines():
            logging.error(line)
        return 1
    logging.success(
        f"{path}: scenario {logging.highlight(scenario.name)} is valid "
        f"({len(scenario.lagrangians)} Lagrangians, {len(scenario.experiments)} experiments)"
    )
    return 0
