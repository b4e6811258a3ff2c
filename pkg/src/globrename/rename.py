"""Renaming of a global variable ``x`` into ``y`` over a whole program.

The transformation either returns a new :class:`Program` or raises
:class:`RenameError` carrying one of the catalog messages below.  Inside
functions, the four binding situations are handled by
:func:`propagate_change_ident`:

====================  =====================================================
binds x, binds y      body left alone
binds x only          body left alone; refused if ``y`` occurs in it
binds y only          body left alone; refused if ``x`` occurs in it
binds neither         every leaf ``x`` becomes ``y``; refused on a leaf ``y``
====================  =====================================================
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import (
    Assign, Binop, Call, Expr, ExprStmt, Fun, Function, GlobDef, GlobVar, Ident,
    If, Program, Return, Seq, Statement, Unop, Var, While, appears_expr,
    appears_free, appears_statement, binds, defines_func, defines_globvar,
    defines_volatile_globvar,
)

KEYWORD = "target is a C keyword"
X_IS_MAIN = "x equals main"
Y_IS_MAIN = "y equals main"
X_NOT_GLOBAL = "x not declared as a global variable"
X_IS_FUNCTION = "x is declared as a function"
X_IN_OWN_INIT = "x occurs in its own initialization"
ALREADY_OCCURS = "replacing identifier already occurs"
VOLATILE = "variable is volatile"
DEFINES_Y = "program defines y"
Y_IN_FUNCTION = "Replacing identifier occurring in function."
SHADOWING = "This renaming would introduce an undesired shadowing."

CATALOG = (
    KEYWORD, X_IS_MAIN, Y_IS_MAIN, X_NOT_GLOBAL, X_IS_FUNCTION, X_IN_OWN_INIT,
    ALREADY_OCCURS, VOLATILE, DEFINES_Y, Y_IN_FUNCTION, SHADOWING,
)


class RenameError(Exception):
    def __init__(self, message: str, location: Optional[Ident] = None) -> None:
        if message not in CATALOG:
            raise ValueError(f"not a catalog message: {message!r}")
        super().__init__(message)
        self.message = message
        self.location = location

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class RenameRequest:
    x: Ident
    y: Ident

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError("old and new names must differ")


# Engine mutants used to measure the power of the property suites.
MUTANTS = ("drop_case2", "drop_case3", "skip_volatile", "skip_y_in_init")
_mutant: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar("mutant", default=None)


@contextlib.contextmanager
def mutated(name: str) -> Iterator[None]:
    """Run the engine with one deliberately broken check (tests only)."""
    if name not in MUTANTS:
        raise ValueError(f"unknown mutant {name!r}")
    token = _mutant.set(name)
    try:
        yield
    finally:
        _mutant.reset(token)


def _active(name: str) -> bool:
    return _mutant.get() == name


def _distinct(x: Ident, y: Ident) -> None:
    if x == y:
        raise ValueError("old and new names must differ")


# -- leaves -------------------------------------------------------------------

def change_ident_untyped(x: Ident, y: Ident, i: Ident) -> Ident:
    if i == x:
        return y
    if i == y:
        raise RenameError(ALREADY_OCCURS)
    return i


def rename_expr(x: Ident, y: Ident, e: Expr) -> Expr:
    match e:
        case Var(ident=i, ty=t):
            return Var(change_ident_untyped(x, y, i), t)
        case Unop(op=op, operand=a):
            return Unop(op, rename_expr(x, y, a))
        case Binop(op=op, left=a, right=b):
            return Binop(op, rename_expr(x, y, a), rename_expr(x, y, b))
        case Assign(target=t, value=v):
            return Assign(rename_expr(x, y, t), rename_expr(x, y, v))
        case Call(callee=f, args=args):
            return Call(change_ident_untyped(x, y, f), tuple(rename_expr(x, y, a) for a in args))
    # constants and evaluation holes carry no identifiers
    return e


def rename_statement(x: Ident, y: Ident, s: Statement) -> Statement:
    _distinct(x, y)
    return _rename_stmt(x, y, s)


def _rename_stmt(x: Ident, y: Ident, s: Statement) -> Statement:
    match s:
        case ExprStmt(expr=e):
            return ExprStmt(rename_expr(x, y, e))
        case Seq(first=a, second=b):
            return Seq(_rename_stmt(x, y, a), _rename_stmt(x, y, b))
        case If(cond=c, then=a, orelse=b):
            return If(rename_expr(x, y, c), _rename_stmt(x, y, a), _rename_stmt(x, y, b))
        case While(cond=c, body=b):
            return While(rename_expr(x, y, c), _rename_stmt(x, y, b))
        case Return(value=v) if v is not None:
            return Return(rename_expr(x, y, v))
    return s


# -- functions and definitions ----------------------------------------------

def force_body(x: Ident, y: Ident, f: Function) -> Function:
    body = rename_statement(x, y, f.body)
    return Function(f.ret, f.params, f.locals, body)


def propagate_change_ident(x: Ident, y: Ident, f: Function) -> Function:
    if binds(x, f):
        if binds(y, f):
            return f
        if appears_statement(y, f.body) and not _active("drop_case2"):
            raise RenameError(Y_IN_FUNCTION)
        return f
    if binds(y, f):
        if appears_statement(x, f.body):
            if _active("drop_case3"):
                return force_body(x, y, f)
            raise RenameError(SHADOWING)
        return f
    return force_body(x, y, f)


def rename_definition(x: Ident, y: Ident, definition: tuple[Ident, GlobDef]) -> tuple[Ident, GlobDef]:
    _distinct(x, y)
    name, d = definition
    try:
        if name == x:
            if isinstance(d, Fun):
                raise RenameError(X_IS_FUNCTION)
            if any(appears_expr(x, e) for e in d.init):
                raise RenameError(X_IN_OWN_INIT)
            if any(appears_expr(y, e) for e in d.init) and not _active("skip_y_in_init"):
                raise RenameError(ALREADY_OCCURS)
            if d.volatile and not _active("skip_volatile"):
                raise RenameError(VOLATILE)
            return y, d
        if name == y:
            raise RenameError(DEFINES_Y)
        if isinstance(d, Fun):
            return name, Fun(propagate_change_ident(x, y, d.fn))
        return name, GlobVar(d.ty, tuple(rename_expr(x, y, e) for e in d.init), d.volatile)
    except RenameError as err:
        if err.location is None:
            err.location = name
        raise


def rename_globvar_hard(x: Ident, y: Ident, p: Program) -> Program:
    """Rename global variable ``x`` into ``y`` throughout ``p``."""
    _distinct(x, y)
    if x == p.main:
        raise RenameError(X_IS_MAIN)
    if y == p.main:
        raise RenameError(Y_IS_MAIN)
    if not defines_globvar(x, p):
        raise RenameError(X_NOT_GLOBAL)
    return Program(tuple(rename_definition(x, y, d) for d in p.defs), p.main)


# -- precondition ---------------------------------------------------------------

def covers(y: Ident, x: Ident, f: Function) -> bool:
    return binds(y, f) and not binds(x, f) and appears_statement(x, f.body)


def no_cover_in_prog(x: Ident, y: Ident, p: Program) -> bool:
    return not any(covers(y, x, f) for _, f in p.functions())


@dataclass(frozen=True)
class PreconditionReport:
    clauses: tuple[tuple[str, bool], ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.clauses)

    @property
    def violated(self) -> list[str]:
        return [name for name, ok in self.clauses if not ok]


def check_sufficient_precondition(x: Ident, y: Ident, p: Program) -> PreconditionReport:
    """Evaluate each clause of the sufficient precondition separately.

    When every clause holds, :func:`rename_globvar_hard` is guaranteed to
    succeed.  The clause on optimized global accesses is omitted: this
    AST has no constructors for them.
    """
    clauses = (
        ("x != y", x != y),
        ("x != main", x != p.main),
        ("y != main", y != p.main),
        ("defines_globvar x", defines_globvar(x, p)),
        ("not defines_globvar y", not defines_globvar(y, p)),
        ("not defines_volatile_globvar x", not defines_volatile_globvar(x, p)),
        ("not defines_func x", not defines_func(x, p)),
        ("not defines_func y", not defines_func(y, p)),
        ("not appears_free y", not appears_free(y, p)),
        ("not appears_free x", not appears_free(x, p)),
        ("no_cover_in_prog x y", no_cover_in_prog(x, y, p)),
    )
    return PreconditionReport(clauses)
