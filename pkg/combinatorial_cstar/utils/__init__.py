from .cstar_utils import (
    fixture_path,
    list_fixtures,
    make_table,
    save_report,
    to_builtin,
)

__all__ = [
    "fixture_path",
    "list_fixtures",
    "make_table",
    "save_report",
    "to_builtin",
]
