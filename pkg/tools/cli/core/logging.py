import os
import sys


# ANSI Escape Codes for Colors
class Color:
    BLUE = "\033[94m"
    GREEN = "\033[92m"
    YELLOW = "\033[93m"
    RED = "\033[91m"
    CYAN = "\033[96m"
    BOLD = "\033[1m"
    END = "\033[0m"


def _use_color(stream) -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _paint(code: str, msg: str, stream) -> str:
    return f"{code}{msg}{Color.END}" if _use_color(stream) else msg


def info(msg: str):
    print(_paint(Color.CYAN, f"ℹ {msg}", sys.stdout))


def success(msg: str):
    print(_paint(Color.GREEN, f"✅ {msg}", sys.stdout))


def warning(msg: str):
    print(_paint(Color.YELLOW, f"⚠️ {msg}", sys.stdout))


def error(msg: str):
    print(_paint(Color.RED, f"❌ {msg}", sys.stderr), file=sys.stderr)


def highlight(msg: str) -> str:
    return _paint(Color.BOLD, msg, sys.stdout)


def step(msg: str):
    print(_paint(Color.BLUE, f"➜ {msg}", sys.stdout))
