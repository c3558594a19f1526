import os
from pathlib import Path

SEED = int(os.environ.get("CSTAR_SEED", "13"))

__all__ = ["default_cstar_config"]

default_cstar_config = {
    "TOLERANCE": 1e-9,  # rank and zero decisions in the matrix model
    "HULL_CAP": 100_000,
    "DIMENSION_CAP": 1024,
    "SEED": SEED,
    "RETRY_SEED": 42,  # second central element when the first splits badly
    "BRUTE_FORCE_LIMIT": 12,  # largest |E| for literal subset enumeration
    "RANDOM_INSTANCES": 100,
    "DEPTH": None,
    "OUTPUT_FORMAT": "json",  # for --out paths without a .json or .asdf suffix
    "FIXTURE_DIR": str(Path(__file__).parent / "data"),
}
