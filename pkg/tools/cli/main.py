#!/usr/bin/env python3
import argparse
import sys
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.append(str(project_root))

from services.common.core.logging_config import setup_logging  # noqa: E402
from services.geometry.config import config  # noqa: E402
from tools.cli.commands import list_models, run, validate  # noqa: E402
from tools.cli.config import PROJECT_ROOT  # noqa: E402
from tools.cli.core import logging  # noqa: E402


def _log_config_path(value: str | None) -> Path:
    path = Path(value or config.LOG_CONFIG_PATH)
    return path if path.is_absolute() else PROJECT_ROOT / path


def main():
    parser = argparse.ArgumentParser(
        description="Fibered Lagrangian laboratory",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--log-config", type=str, help="Path to logging YAML (default: LOG_CONFIG_PATH)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to execute")

    # --- run command ---
    run_parser = subparsers.add_parser("run", help="Run every experiment of a scenario")
    run_parser.add_argument("scenario", help="Scenario file or bundled scenario name")
    run_parser.add_argument("--out", type=str, default=None, help="Output directory (default: out/<name>)")
    run_parser.add_argument("--seed", type=int, default=None, help="Override the scenario seed")

    # --- list-models command ---
    subparsers.add_parser("list-models", help="List the model catalogue")

    # --- validate command ---
    validate_parser = subparsers.add_parser("validate", help="Validate a scenario without running it")
    validate_parser.add_argument("scenario", help="Scenario file or bundled scenario name")

    args = parser.parse_args()
    setup_logging(str(_log_config_path(args.log_config)))

    try:
        if args.command == "run":
            code = run.run(args)
        elif args.command == "list-models":
            code = list_models.run(args)
        elif args.command == "validate":
            code = validate.run(args)
    except KeyboardInterrupt:
        print("\nAborted.")
        sys.exit(0)
    except Exception as e:
        logging.error(f"Error: {e}")
        sys.exit(2)

    if code:
        sys.exit(code)


if __name__ == "__main__":
    main()
