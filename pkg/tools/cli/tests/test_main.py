import sys
import pytest
from unittest.mock import patch
from tools.cli.main import main


@pytest.fixture(autouse=True)
def _no_logging_setup():
    with patch("tools.cli.main.setup_logging") as mock_setup:
        yield mock_setup


def test_cli_help(capsys):
    """--help が正常に動作するか確認"""
    with patch.object(sys, "argv", ["lglab", "--help"]):
        with pytest.raises(SystemExit) as e:
            main()
        assert e.value.code == 0

    captured = capsys.readouterr()
    assert "Fibered Lagrangian laboratory" in captured.out
    assert "run" in captured.out
    assert "validate" in captured.out
    assert "list-models" in captured.out


def test_cli_requires_command():
    with patch.object(sys, "argv", ["lglab"]):
        with pytest.raises(SystemExit) as e:
            main()
    assert e.value.code == 2


@patch("tools.cli.commands.run.run", return_value=0)
def test_cli_run_dispatch(mock_run):
    """run サブコマンドが正しくディスパッチされるか確認"""
    with patch.object(sys, "argv", ["lglab", "run", "conic_degree", "--seed", "3", "--out", "x"]):
        main()
    mock_run.assert_called_once()
    args = mock_run.call_args[0][0]
    assert args.scenario == "conic_degree"
    assert args.seed == 3
    assert args.out == "x"


@patch("tools.cli.commands.run.run", return_value=0)
def test_cli_run_defaults(mock_run):
    with patch.object(sys, "argv", ["lglab", "run", "trivial_degree"]):
        main()
    args = mock_run.call_args[0][0]
    assert args.seed is None
    assert args.out is None


@patch("tools.cli.commands.run.run", return_value=2)
def test_cli_run_exit_code(mock_run):
    """数値的な失敗は終了コード 2"""
    with patch.object(sys, "argv", ["lglab", "run", "trivial_degree"]):
        with pytest.raises(SystemExit) as e:
            main()
    assert e.value.code == 2


@patch("tools.cli.commands.validate.run", return_value=1)
def test_cli_validate_dispatch(mock_validate):
    with patch.object(sys, "argv", ["lglab", "validate", "broken.json"]):
        with pytest.raises(SystemExit) as e:
            main()
    assert e.value.code == 1
    assert mock_validate.call_args[0][0].scenario == "broken.json"


@patch("tools.cli.commands.list_models.run", return_value=0)
def test_cli_list_models_dispatch(mock_list):
    with patch.object(sys, "argv", ["lglab", "list-models"]):
        main()
    mock_list.assert_called_once()


@patch("tools.cli.commands.list_models.run", return_value=0)
def test_cli_log_config_argument(mock_list, _no_logging_setup, tmp_path):
    """--log-config が setup_logging に渡されるか確認"""
    log_yaml = tmp_path / "log.yaml"
    with patch.object(sys, "argv", ["lglab", "--log-config", str(log_yaml), "list-models"]):
        main()
    _no_logging_setup.assert_called_once_with(str(log_yaml))


@patch("tools.cli.commands.run.run", side_effect=RuntimeError("boom"))
def test_cli_unexpected_error(mock_run, capsys):
    with patch.object(sys, "argv", ["lglab", "run", "trivial_degree"]):
        with pytest.raises(SystemExit) as e:
            main()
    assert e.value.code == 2
    assert "boom" in capsys.readouterr().err
