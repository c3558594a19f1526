import logging
import os
import sys

LOGGER_NAME = "combinatorial_cstar"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _info_only(record):
    return record.levelno == logging.INFO


def setup_logging(level=logging.INFO, log_file=None):
    """
    Set up the combinatorial_cstar logger once.

    INFO progress lines go to stderr (reports are printed on stdout); the log
    file, ``CSTAR_LOG_FILE`` or ``combinatorial_cstar.log``, gets every level.
    """
    log_file = log_file or os.environ.get("CSTAR_LOG_FILE", "combinatorial_cstar.log")
    logger = logging.getLogger(LOGGER_NAME)

    if not logger.handlers:
        logger.propagate = False

        # Set the level
        logger.setLevel(logging.DEBUG)  # Capture all levels, handlers will filter

        formatter = logging.Formatter(LOG_FORMAT)

        # Console handler for INFO only
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.addFilter(_info_only)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        # File handler for cross-check details, warnings and errors
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def set_verbose(logger, verbose=True):
    """Show every level on the console, or go back to INFO only."""
    for handler in logger.handlers:
        if isinstance(handler, logging.FileHandler):
            continue
        if verbose:
            handler.setLevel(logging.DEBUG)
            handler.removeFilter(_info_only)
        else:
            handler.setLevel(logging.INFO)
            if _info_only not in handler.filters:
                handler.addFilter(_info_only)


# Create the default logger instance
logger = setup_logging()
