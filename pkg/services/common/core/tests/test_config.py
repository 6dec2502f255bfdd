from pydantic_settings import BaseSettings


def test_base_app_config_structure():
    """
    BaseAppConfig should exist and expose LOG_LEVEL / LOG_CONFIG_PATH.
    """
    from services.common.core.config import BaseAppConfig

    assert issubclass(BaseAppConfig, BaseSettings)

    config = BaseAppConfig()
    assert config.LOG_LEVEL == "INFO"
    assert config.LOG_CONFIG_PATH.endswith("lab_log.yaml")


def test_base_app_config_env_file():
    """
    BaseAppConfig should verify env_file settings (model_config).
    """
    from services.common.core.config import BaseAppConfig

    assert BaseAppConfig.model_config.get("env_file") == ".env"
    assert BaseAppConfig.model_config.get("extra") == "ignore"


def test_base_app_config_reads_environment(monkeypatch):
    """環境変数で LOG_LEVEL を上書きできること"""
    from services.common.core.config import BaseAppConfig

    monkeypatch.setenv("LOG_LEVEL", "DEBUG")
    assert BaseAppConfig().LOG_LEVEL == "DEBUG"
