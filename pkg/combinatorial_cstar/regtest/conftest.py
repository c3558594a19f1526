import logging
import sys

import pytest

from combinatorial_cstar.cstar_process import CStarProcess
from combinatorial_cstar.random_instances import RandomInstances


@pytest.fixture(scope="session")
def acceptance_logger():
    """Set up an 'ACCEPTANCE' logger for use in tests.

    Acceptance outcomes are reported on stdout so they appear next to the
    pytest summary when run with ``-s``.
    """
    logger = logging.getLogger("ACCEPTANCE")
    # Keep acceptance lines out of the package log
    logger.propagate = False
    if logger.hasHandlers():
        logger.handlers.clear()

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(
        logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    )
    logger.addHandler(handler)
    logger.setLevel(logging.INFO)
    return logger


@pytest.fixture(scope="session")
def acceptance_process():
    return CStarProcess(config_filename="")


@pytest.fixture(scope="session")
def random_instances(acceptance_process):
    return RandomInstances(acceptance_process.config["SEED"])
