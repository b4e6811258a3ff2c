"""Abstract syntax for the mini-C subset and the syntactic predicates
that the renaming engine and precondition checker are built on.

Identifiers are interned: an :class:`Ident` is a positive integer, and a
process-wide table maps it back to its source text.  Every AST node is a
frozen dataclass, so programs can be shared freely and compared
structurally.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Union

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class InternTable:
    """Bijection between identifier text and positive integers."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, text: str) -> "Ident":
        if not isinstance(text, str) or not _IDENT_RE.match(text):
            raise ValueError(f"malformed identifier: {text!r}")
        with self._lock:
            num = self._ids.get(text)
            if num is None:
                self._names.append(text)
                num = len(self._names)
                self._ids[text] = num
        return Ident(num)

    def name_of(self, num: int) -> str:
        return self._names[num - 1]

    def __len__(self) -> int:
        return len(self._names)


TABLE = InternTable()


@dataclass(frozen=True, order=True)
class Ident:
    id: int

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError("identifier ids start at 1")

    @property
    def name(self) -> str:
        return TABLE.name_of(self.id)

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Ident({self.name!r})"


def intern(text: str) -> Ident:
    return TABLE.intern(text)


def name_of(ident: Ident) -> str:
    return TABLE.name_of(ident.id)


class CType(Enum):
    INT = "int"
    VOID = "void"


# -- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    ident: Ident
    ty: CType = CType.INT


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class StrConst:
    """String literal; only legal as an argument of an external call."""
    text: str


@dataclass(frozen=True)
class Unop:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binop:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Assign:
    target: Var
    value: "Expr"

    def __post_init__(self) -> None:
        if not isinstance(self.target, Var):
            raise TypeError("assignment target must be a variable")


@dataclass(frozen=True)
class Call:
    callee: Ident
    args: tuple["Expr", ...] = ()


Expr = Union[Var, IntConst, StrConst, Unop, Binop, Assign, Call]

UNARY_OPS = ("-", "!")
BINARY_OPS = ("+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||")


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Statement"
    second: "Statement"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Statement"
    orelse: "Statement" = Skip()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Statement"


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None


Statement = Union[Skip, ExprStmt, Seq, If, While, Return]


def seq(*stmts: Statement) -> Statement:
    """Right-nested sequence; the empty sequence is Skip."""
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


# -- definitions ------------------------------------------------------------

@dataclass(frozen=True)
class Function:
    ret: CType
    params: tuple[tuple[Ident, CType], ...]
    locals: tuple[tuple[Ident, CType], ...]
    body: Statement

    def binders(self) -> tuple[Ident, ...]:
        return tuple(i for i, _ in self.params) + tuple(i for i, _ in self.locals)


@dataclass(frozen=True)
class GlobVar:
    ty: CType = CType.INT
    init: tuple[Expr, ...] = ()
    volatile: bool = False


@dataclass(frozen=True)
class Fun:
    fn: Function


GlobDef = Union[GlobVar, Fun]


@dataclass(frozen=True)
class Program:
    defs: tuple[tuple[Ident, GlobDef], ...]
    main: Ident

    def lookup(self, name: Ident) -> Optional[GlobDef]:
        for i, d in self.defs:
            if i == name:
                return d
        return None

    def functions(self) -> Iterator[tuple[Ident, Function]]:
        for i, d in self.defs:
            if isinstance(d, Fun):
                yield i, d.fn


def program(defs, main: Optional[Ident] = None) -> Program:
    return Program(tuple(defs), main if main is not None else intern("main"))


# -- occurrences --------------------------------------------------------------

def expr_idents(e: Expr) -> Iterator[Ident]:
    """Every identifier leaf of ``e``: variables and call targets."""
    match e:
        case Var(ident=i):
            yield i
        case Unop(operand=a):
            yield from expr_idents(a)
        case Binop(left=a, right=b):
            yield from expr_idents(a)
            yield from expr_idents(b)
        case Assign(target=t, value=v):
            yield t.ident
            yield from expr_idents(v)
        case Call(callee=f, args=args):
            yield f
            for a in args:
                yield from expr_idents(a)
        case _:
            return


def statement_exprs(s: Statement) -> Iterator[Expr]:
    match s:
        case ExprStmt(expr=e):
            yield e
        case Seq(first=a, second=b):
            yield from statement_exprs(a)
            yield from statement_exprs(b)
        case If(cond=c, then=a, orelse=b):
            yield c
            yield from statement_exprs(a)
            yield from statement_exprs(b)
        case While(cond=c, body=b):
            yield c
            yield from statement_exprs(b)
        case Return(value=v) if v is not None:
            yield v
        case _:
            return


def statement_idents(s: Statement) -> Iterator[Ident]:
    for e in statement_exprs(s):
        yield from expr_idents(e)


def appears_expr(x: Ident, e: Expr) -> bool:
    return any(i == x for i in expr_idents(e))


def appears_statement(x: Ident, s: Statement) -> bool:
    return any(i == x for i in statement_idents(s))


def binds(x: Ident, f: Function) -> bool:
    return x in f.binders()


# -- program-level predicates -------------------------------------------------

def defines_globvar(x: Ident, p: Program) -> bool:
    return any(i == x and isinstance(d, GlobVar) for i, d in p.defs)


def defines_volatile_globvar(x: Ident, p: Program) -> bool:
    return any(i == x and isinstance(d, GlobVar) and d.volatile for i, d in p.defs)


def defines_func(x: Ident, p: Program) -> bool:
    return any(i == x and isinstance(d, Fun) for i, d in p.defs)


def appears_free(x: Ident, p: Program) -> bool:
    """True when ``x`` occurs in an initializer, or in the body of a
    function that does not bind it."""
    for _, d in p.defs:
        if isinstance(d, GlobVar):
            if any(appears_expr(x, e) for e in d.init):
                return True
        elif not binds(x, d.fn) and appears_statement(x, d.fn.body):
            return True
    return False


def wellformedness_errors(p: Program) -> list[str]:
    errors = []
    seen: set[Ident] = set()
    for i, d in p.defs:
        if i in seen:
            errors.append(f"duplicate definition of {i}")
        seen.add(i)
        if isinstance(d, Fun):
            names = d.fn.binders()
            if len(set(names)) != len(names):
                errors.append(f"duplicate parameter or local in {i}")
        else:
            if len(d.init) > 1:
                errors.append(f"scalar {i} has more than one initializer")
            for e in d.init:
                if any(isinstance(n, (Assign, Call)) for n in subexprs(e)):
                    errors.append(f"non-constant initializer for {i}")
    return errors


def subexprs(e: Expr) -> Iterator[Expr]:
    yield e
    match e:
        case Unop(operand=a):
            yield from subexprs(a)
        case Binop(left=a, right=b):
            yield from subexprs(a)
            yield from subexprs(b)
        case Assign(target=t, value=v):
            yield t
            yield from subexprs(v)
        case Call(args=args):
            for a in args:
                yield from subexprs(a)


def count_leaves(p: Program) -> int:
    """Number of identifier leaves in all bodies and initializers."""
    n = 0
    for _, d in p.defs:
        if isinstance(d, GlobVar):
            n += sum(1 for e in d.init for _ in expr_idents(e))
        else:
            n += sum(1 for _ in statement_idents(d.fn.body))
    return n
