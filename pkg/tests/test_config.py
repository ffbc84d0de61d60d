import pytest

from config import PROFILE_SETTINGS, Config, DevelopmentConfig, TestingConfig, config, get_config, load_run_file
from models.data_models import SearchParams


def test_profiles(monkeypatch):
    monkeypatch.delenv('MBH_ENV', raising=False)
    assert get_config('testing') is TestingConfig
    assert get_config() is DevelopmentConfig
    assert get_config('unknown') is DevelopmentConfig
    monkeypatch.setenv('MBH_ENV', 'testing')
    assert get_config() is TestingConfig


def test_search_params_follow_the_profile():
    params = SearchParams.from_config(TestingConfig, seed=3)
    assert params.scan_points == TestingConfig.SCAN_POINTS
    assert params.seed == 3
    assert params.refine_tol == Config.REFINE_TOL


def test_search_overrides_keep_field_types():
    params = SearchParams.from_config(Config, scan_points=16.0, match_tol=None)
    assert params.scan_points == 16 and isinstance(params.scan_points, int)
    assert params.match_tol == Config.MATCH_TOL
    with pytest.raises(KeyError):
        SearchParams.from_config(Config, shots=10)


def test_run_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[run]\nseed = 5\nformat = "csv"\n\n[gamma]\ndegree = [2]\nenergy = [1.5]\n')
    data = load_run_file(path)
    assert data["run"] == {"seed": 5, "format": "csv"}
    assert data["gamma"]["energy"] == [1.5]


@pytest.mark.parametrize("name", sorted(config))
def test_profiles_only_override_settings_read_per_profile(name):
    overridden = {key for key in vars(config[name]) if key.isupper()}
    assert overridden <= PROFILE_SETTINGS
