import os
import sys
from importlib import reload
from pathlib import Path
from unittest.mock import patch

from combinatorial_cstar.default_config_file import default_cstar_config


def test_seed_environment_variable():
    """SEED follows CSTAR_SEED and falls back to 13."""
    module_name = "combinatorial_cstar.default_config_file"
    if module_name in sys.modules:
        del sys.modules[module_name]

    with patch.dict(os.environ, {"CSTAR_SEED": "2024"}):
        import combinatorial_cstar.default_config_file

        assert combinatorial_cstar.default_config_file.SEED == 2024
        assert combinatorial_cstar.default_config_file.default_cstar_config["SEED"] == 2024
        del sys.modules[module_name]

    env = {k: v for k, v in os.environ.items() if k != "CSTAR_SEED"}
    with patch.dict(os.environ, env, clear=True):
        import combinatorial_cstar.default_config_file

        assert combinatorial_cstar.default_config_file.SEED == 13

    reload(combinatorial_cstar.default_config_file)


def test_default_config_contains_required_keys():
    required_keys = [
        "TOLERANCE",
        "HULL_CAP",
        "DIMENSION_CAP",
        "SEED",
        "RETRY_SEED",
        "BRUTE_FORCE_LIMIT",
        "RANDOM_INSTANCES",
        "DEPTH",
        "OUTPUT_FORMAT",
        "FIXTURE_DIR",
    ]

    for key in required_keys:
        assert key in default_cstar_config, f"Required key '{key}' missing from default_cstar_config"


def test_numeric_defaults():
    assert 0 < default_cstar_config["TOLERANCE"] < 1e-6
    assert default_cstar_config["HULL_CAP"] > default_cstar_config["DIMENSION_CAP"] > 0
    assert default_cstar_config["RETRY_SEED"] != default_cstar_config["SEED"]
    assert default_cstar_config["DEPTH"] is None
    assert default_cstar_config["OUTPUT_FORMAT"] == "json"


def test_fixture_dir_points_to_package_data():
    path_obj = Path(default_cstar_config["FIXTURE_DIR"])
    assert path_obj.parts[-2:] == ("combinatorial_cstar", "data")
    assert (path_obj / "fixture_a.json").exists()


def test_all_variable_contains_default_cstar_config():
    from combinatorial_cstar.default_config_file import __all__

    assert "default_cstar_config" in __all__
