from .default_config_file import *  # noqa: F403

# Import logger from the dedicated logger module
from .logger import logger, set_verbose, setup_logging

# Import after logger setup to avoid circular imports
from .cstar_process import CStarProcess
from .input_handler import InputSpec, parse_input, serialize
from .inverse_hull import InverseHull, PartialBij, generate_hull
from .lcsc_core import Lcsc, validate
from .lemma_suite import LemmaSuite
from .random_instances import RandomInstances
from .tight_groupoid import TightGroupoid, build_tight_groupoid

__all__ = [
    "CStarProcess",
    "InputSpec",
    "InverseHull",
    "Lcsc",
    "LemmaSuite",
    "PartialBij",
    "RandomInstances",
    "TightGroupoid",
    "build_tight_groupoid",
    "generate_hull",
    "parse_input",
    "serialize",
    "validate",
    "set_verbose",
    "setup_logging",
    "logger",
]
