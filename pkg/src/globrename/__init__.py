"""Capture-avoiding renaming of global variables in a small C subset,
with an interpreter and property harness to check that renaming
preserves observable behavior."""

__version__ = "0.1.0"

from .core import Ident, Program, intern, name_of  # noqa: E402
from .rename import RenameError, check_sufficient_precondition, rename_globvar_hard  # noqa: E402
from .semantics import run  # noqa: E402
from .syntax import ParseError, parse, pretty_print  # noqa: E402

__all__ = [
    "Ident", "Program", "intern", "name_of", "RenameError",
    "check_sufficient_precondition", "rename_globvar_hard", "run",
    "ParseError", "parse", "pretty_print",
]
