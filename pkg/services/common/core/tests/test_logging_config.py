import json
import logging

from services.common.core import logging_config, run_context


def _record(msg="Test message", **extra):
    record = logging.LogRecord(
        name="lglab.test",
        level=logging.INFO,
        pathname="test_path.py",
        lineno=10,
        msg=msg,
        args=(),
        exc_info=None,
    )
    for key, value in extra.items():
        setattr(record, key, value)
    return record


def test_formatter_includes_run_context():
    """FormatterがContextからシナリオ名と実験名を取得してログに含めることを確認"""
    run_context.clear()
    run_context.set_scenario("conic_monodromy")

    with run_context.experiment_scope("loop"):
        log_json = json.loads(logging_config.CustomJsonFormatter().format(_record()))

    assert log_json["message"] == "Test message"
    assert log_json["logger"] == "lglab.test"
    assert log_json["scenario"] == "conic_monodromy"
    assert log_json["experiment"] == "loop"
    run_context.clear()


def test_experiment_scope_restores_previous_value():
    run_context.clear()
    with run_context.experiment_scope("outer"):
        with run_context.experiment_scope("inner"):
            assert run_context.get_experiment() == "inner"
        assert run_context.get_experiment() == "outer"
    assert run_context.get_experiment() is None


def test_formatter_serializes_numeric_extras():
    """complex や numpy 由来の値も JSON に落とせること"""
    import numpy as np

    run_context.clear()
    record = _record(residual=np.float64(1.5e-9), point=complex(1.0, -2.0), steps=3)
    log_json = json.loads(logging_config.CustomJsonFormatter().format(record))

    assert log_json["residual"] == 1.5e-9
    assert log_json["point"] == [1.0, -2.0]
    assert log_json["steps"] == 3
    assert "scenario" not in log_json


def test_setup_logging_substitutes_level(tmp_path, monkeypatch):
    config_file = tmp_path / "log.yaml"
    config_file.write_text(
        "version: 1\n"
        "disable_existing_loggers: false\n"
        "loggers:\n"
        "  lglab.sample:\n"
        "    level: ${LOG_LEVEL}\n"
    )
    monkeypatch.setenv("LOG_LEVEL", "ERROR")

    logging_config.setup_logging(str(config_file))

    assert logging.getLogger("lglab.sample").level == logging.ERROR


def test_setup_logging_missing_file_falls_back(tmp_path):
    # 例外にならず basicConfig にフォールバックする
    logging_config.setup_logging(str(tmp_path / "missing.yaml"))
