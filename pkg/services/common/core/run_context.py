"""
RunContext コンテキスト管理
ContextVar を使用して、実行中のシナリオ名と実験名をログに伝搬します。
"""

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional

# 実行中のシナリオ名
_scenario_var: ContextVar[Optional[str]] = ContextVar("scenario", default=None)
# 実行中の実験名
_experiment_var: ContextVar[Optional[str]] = ContextVar("experiment", default=None)


def get_scenario() -> Optional[str]:
    """現在のシナリオ名を取得"""
    return _scenario_var.get()


def get_experiment() -> Optional[str]:
    """現在の実験名を取得"""
    return _experiment_var.get()


def set_scenario(name: Optional[str]) -> None:
    _scenario_var.set(name)


@contextmanager
def experiment_scope(name: str) -> Iterator[str]:
    """
    実験名をコンテキストにセットし、ブロック終了時に元へ戻す。

    スレッドプールから呼ばれる場合も各ワーカーのコンテキスト内で完結する。
    """
    token = _experiment_var.set(name)
    try:
        yield name
    finally:
        _experiment_var.reset(token)


def clear() -> None:
    """コンテキストをクリア"""
    _scenario_var.set(None)
    _experiment_var.set(None)
