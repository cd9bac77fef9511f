import pytest

from freysieve import config
from freysieve.logs import log_debug, log_stage


def test_env_file_overrides_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FREYSIEVE_PRECISION", "38")
    monkeypatch.setenv("FREYSIEVE_WORKERS", "2")
    env = tmp_path / ".env"
    env.write_text("FREYSIEVE_PRECISION=50\nFREYSIEVE_WORKERS=0\n")
    loaded = config.load_settings(str(env))
    assert loaded.precision == 50
    assert loaded.workers == 1


def test_missing_env_file():
    with pytest.raises(FileNotFoundError):
        config.load_settings("/nonexistent/.env")


def test_overrides_skip_none():
    base = config.load_settings()
    changed = base.with_overrides(precision=60, cache_dir=None)
    assert changed.precision == 60
    assert changed.cache_dir == base.cache_dir


def test_log_stage_records_history(capsys):
    history = []
    log_stage("Mazur", "294/1: survives", history)
    assert history[0]["stage"] == "Mazur"
    assert history[0]["message"] == "294/1: survives"
    assert capsys.readouterr().err == ""

    config.set_settings(config.settings.with_overrides(quiet=False, debug=True))
    log_debug("Cache", "conductor 1152: hit")
    assert "[Cache] -> conductor 1152: hit" in capsys.readouterr().err
