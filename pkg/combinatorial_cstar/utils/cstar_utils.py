import json
from pathlib import Path
from typing import Optional

import numpy as np
from asdf import AsdfFile
from astropy.table import Table

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.logger import logger

REPORT_TREE_KEY = "combinatorial_cstar_report"
SUPPORTED_REPORT_FORMATS = ("json", "asdf")


def to_builtin(obj):
    """
    Convert numpy scalars/arrays, sets and tuples into JSON-friendly values.
    """
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [to_builtin(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def save_report(
    report: dict,
    output_filename: Optional[str] = None,
    output_format: Optional[str] = None,
) -> str:
    """
    Write a report to a JSON or ASDF file, or return it as JSON text.

    Parameters
    ----------
    report : dict
        The report tree.
    output_filename : str, optional
        Destination file. If None, nothing is written and the JSON text is returned.
    output_format : str, optional
        "json" or "asdf", used when the file name has no suffix. A suffix
        always decides the format.

    Returns
    -------
    str
        The JSON rendering of the report.

    Raises
    ------
    ValueError
        If the output format is not supported.
    """
    tree = to_builtin(report)
    text = json.dumps(tree, indent=2, sort_keys=True)
    if output_filename is None:
        return text

    path = Path(output_filename)
    fmt = (path.suffix.lstrip(".") or output_format or "json").lower()
    if fmt not in SUPPORTED_REPORT_FORMATS:
        logger.error(
            f"Unsupported output format: {fmt}. Supported formats are 'json' and 'asdf'."
        )
        raise ValueError(
            f"Unsupported output format: {fmt}. Supported formats are 'json' and 'asdf'."
        )

    logger.info(f"Saving report to {path}...")
    if fmt == "json":
        path.write_text(text + "\n")
    else:
        with AsdfFile({REPORT_TREE_KEY: tree}) as af:
            af.write_to(path)
    logger.info("Report saved successfully")
    return text


def _fixture_dir(fixture_dir: Optional[str]) -> Path:
    return Path(default_cstar_config["FIXTURE_DIR"] if fixture_dir is None else fixture_dir)


def fixture_path(name: str, fixture_dir: Optional[str] = None) -> Path:
    """
    Path of a fixture document, e.g. ``fixture_path("fixture_a")``.

    Fixtures are looked up in ``fixture_dir``, by default the configured
    ``FIXTURE_DIR`` (the packaged ``data`` directory).

    Raises
    ------
    FileNotFoundError
        If there is no such fixture.
    """
    filename = name if name.endswith(".json") else f"{name}.json"
    path = _fixture_dir(fixture_dir) / filename
    if not path.exists():
        logger.error(f"Fixture {filename} not found.")
        raise FileNotFoundError(filename)
    return path


def list_fixtures(fixture_dir: Optional[str] = None) -> list[str]:
    """Names of all fixture documents in ``fixture_dir``."""
    return sorted(p.stem for p in _fixture_dir(fixture_dir).glob("*.json"))


def make_table(rows, names, dtype) -> Table:
    """An astropy Table from row tuples; typed empty columns when there are no rows."""
    rows = [tuple(row) for row in rows]
    if not rows:
        return Table(names=names, dtype=dtype)
    return Table(rows=rows, names=names, dtype=dtype)
