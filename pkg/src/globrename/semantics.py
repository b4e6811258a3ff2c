"""Small-step semantics with continuations for the mini-C subset.

Every access to a global variable is observable: ordinary globals emit
``GlobRead``/``GlobWrite`` events, volatile ones ``VolLoad``/``VolStore``.
Calls to functions that the program does not define go through an
:class:`ExtCallModel` and emit ``ExtCall`` events.

An expression state holds the whole expression under evaluation; each
step picks a redex and its first-order context (a path of child indices
with a :class:`Hole`).  In ``"deterministic"`` mode the leftmost redex
is reduced.  In ``"exhaustive"`` mode every unsequenced redex is a
possible successor, except that silent redexes (constant folding and
reads of locals that no nested assignment writes) commute with
everything and are reduced first, leftmost.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .core import (
    Assign, Binop, Call, CType, Expr, ExprStmt, Fun, Function, GlobVar, Ident,
    If, IntConst, Program, Return, Seq, Skip, Statement, StrConst, Unop, Var,
    While, expr_idents, intern, statement_idents, subexprs,
)
from .events import (
    Behavior, ExtCall, GlobRead, GlobWrite, GoesWrong, Terminates, Unknown,
    VolLoad, VolStore,
)
from .rename import (
    DEFINES_Y, SHADOWING, VOLATILE, X_IS_FUNCTION, X_IS_MAIN, X_NOT_GLOBAL,
    Y_IN_FUNCTION, Y_IS_MAIN, RenameError, change_ident_untyped,
    propagate_change_ident, rename_expr, rename_globvar_hard, rename_statement,
)

DETERMINISTIC = "deterministic"
EXHAUSTIVE = "exhaustive"
MODES = (DETERMINISTIC, EXHAUSTIVE)


class RunError(ValueError):
    """The program cannot be started at all (e.g. no main function)."""


class ExplorationLimit(RuntimeError):
    """Exhaustive exploration produced more paths than allowed."""


def wrap32(v: int) -> int:
    return (v + 2**31) % 2**32 - 2**31


# -- runtime environments -------------------------------------------------------

@dataclass(frozen=True)
class GlobSlot:
    value: int
    volatile: bool = False


GlobEntry = Union[GlobSlot, Function]


@dataclass(frozen=True)
class GlobalEnv:
    entries: tuple[tuple[Ident, GlobEntry], ...]
    main: Ident
    _index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", dict(self.entries))

    def get(self, name: Ident) -> Optional[GlobEntry]:
        return self._index.get(name)

    def __contains__(self, name: Ident) -> bool:
        return name in self._index

    def store(self, name: Ident, value: int) -> "GlobalEnv":
        entries = tuple(
            (i, GlobSlot(value, e.volatile)) if i == name else (i, e)
            for i, e in self.entries
        )
        return GlobalEnv(entries, self.main)


LocalEnv = tuple  # tuple[tuple[Ident, Optional[int]], ...]; None is uninitialized


def env_lookup(env: LocalEnv, name: Ident):
    for i, v in env:
        if i == name:
            return True, v
    return False, None


def env_store(env: LocalEnv, name: Ident, value: int) -> LocalEnv:
    return tuple((i, value if i == name else v) for i, v in env)


def env_names(env: LocalEnv) -> frozenset:
    return frozenset(i for i, _ in env)


# -- evaluation contexts ------------------------------------------------------

@dataclass(frozen=True)
class Hole:
    pass


HOLE = Hole()


def _children(e: Expr) -> tuple:
    match e:
        case Unop(operand=a):
            return (a,)
        case Binop(left=a, right=b):
            return (a, b)
        case Assign(value=v):
            return (v,)
        case Call(args=args):
            return args
    return ()


def _with_child(e: Expr, index: int, new: Expr) -> Expr:
    match e:
        case Unop(op=op):
            return Unop(op, new)
        case Binop(op=op, left=a, right=b):
            return Binop(op, new, b) if index == 0 else Binop(op, a, new)
        case Assign(target=t):
            return Assign(t, new)
        case Call(callee=f, args=args):
            return Call(f, args[:index] + (new,) + args[index + 1:])
    raise ValueError(f"{e!r} has no child {index}")


def replace_at(e: Expr, path: Sequence[int], new: Expr) -> Expr:
    if not path:
        return new
    head, rest = path[0], path[1:]
    return _with_child(e, head, replace_at(_children(e)[head], rest, new))


@dataclass(frozen=True)
class EvalCtx:
    """An expression with exactly one :class:`Hole`, found at ``path``."""
    expr: Expr
    path: tuple[int, ...]

    @classmethod
    def around(cls, e: Expr, path: tuple[int, ...]) -> "EvalCtx":
        return cls(replace_at(e, path, HOLE), path)

    def plug(self, e: Expr) -> Expr:
        return replace_at(self.expr, self.path, e)


# -- continuations and states ---------------------------------------------------

@dataclass(frozen=True)
class Kstop:
    pass


@dataclass(frozen=True)
class Kseq:
    stmt: Statement
    k: "Cont"


@dataclass(frozen=True)
class Kwhile:
    cond: Expr
    body: Statement
    k: "Cont"


@dataclass(frozen=True)
class Kdo:
    k: "Cont"


@dataclass(frozen=True)
class Kif:
    then: Statement
    orelse: Statement
    k: "Cont"


@dataclass(frozen=True)
class Kreturn:
    k: "Cont"


@dataclass(frozen=True)
class Kcall:
    caller: Function
    env: LocalEnv
    resume: EvalCtx
    k: "Cont"


Cont = Union[Kstop, Kseq, Kwhile, Kdo, Kif, Kreturn, Kcall]


def call_cont(k: Cont) -> Cont:
    while not isinstance(k, (Kcall, Kstop)):
        k = k.k
    return k


@dataclass(frozen=True)
class RunStmt:
    stmt: Statement
    k: Cont
    env: LocalEnv
    fn: Function
    ge: GlobalEnv
    ncalls: int = 0


@dataclass(frozen=True)
class RunExpr:
    expr: Expr
    k: Cont
    env: LocalEnv
    fn: Function
    ge: GlobalEnv
    ncalls: int = 0


@dataclass(frozen=True)
class Returned:
    value: Optional[int]
    k: Cont
    ge: GlobalEnv
    ncalls: int = 0


@dataclass(frozen=True)
class Stuck:
    # all stuck states are equivalent; the reason is diagnostics only
    reason: str = field(default="", compare=False)


ExecState = Union[RunStmt, RunExpr, Returned, Stuck]


def is_final(st: ExecState) -> bool:
    return isinstance(st, Returned) and isinstance(st.k, Kstop)


def exit_code(st: Returned) -> int:
    return 0 if st.value is None else st.value


# -- external calls -------------------------------------------------------------

def _printf_text(args) -> Optional[str]:
    if not args or not isinstance(args[0], str):
        return None
    fmt, rest = args[0], list(args[1:])
    out, i = [], 0
    while i < len(fmt):
        ch = fmt[i]
        if ch == "%" and i + 1 < len(fmt):
            conv = fmt[i + 1]
            i += 2
            if conv == "%":
                out.append("%")
            elif conv in "dic" and rest and isinstance(rest[0], int):
                v = rest.pop(0)
                out.append(chr(v % 0x110000) if conv == "c" else str(v))
            elif conv == "s" and rest and isinstance(rest[0], str):
                out.append(rest.pop(0))
            else:
                return None
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def printf_oracle(args, index, read_values) -> Optional[int]:
    text = _printf_text(args)
    return None if text is None else len(text)


def pure_oracle(args, index, read_values) -> int:
    return wrap32(sum(a for a in args if isinstance(a, int)))


def reads_global_oracle(args, index, read_values) -> int:
    return read_values[0]


@dataclass(frozen=True)
class ExternalFunction:
    """``compute(args, call_index, read_values)`` returns the result, or
    None when the call is ill-formed (the caller then goes wrong)."""
    name: Ident
    compute: Callable
    reads: tuple[Ident, ...] = ()
    kind: str = "pure"


@dataclass(frozen=True)
class ExtCallModel:
    functions: tuple[ExternalFunction, ...] = ()

    @classmethod
    def default(cls) -> "ExtCallModel":
        return cls((ExternalFunction(intern("printf"), printf_oracle, (), "printf"),))

    @classmethod
    def from_specs(cls, specs: Iterable[tuple[str, str, Optional[str]]]) -> "ExtCallModel":
        """Build from ``(name, behavior, global)`` triples on top of printf.

        ``behavior`` is ``"pure"`` or ``"reads_global"``; the latter returns
        the current value of ``global``.
        """
        funcs = {f.name: f for f in cls.default().functions}
        for name, behavior, glob in specs:
            ident = intern(name)
            if behavior == "pure":
                funcs[ident] = ExternalFunction(ident, pure_oracle, (), "pure")
            elif behavior == "reads_global":
                funcs[ident] = ExternalFunction(
                    ident, reads_global_oracle, (intern(glob),), f"reads_global({glob})")
            else:
                raise ValueError(f"unknown external behavior {behavior!r}")
        return cls(tuple(funcs.values()))

    def lookup(self, name: Ident) -> Optional[ExternalFunction]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def compliance_violations(self, x: Ident, y: Ident) -> list[str]:
        """Reasons the model breaks the external-function hypothesis for
        renaming ``x`` into ``y`` (empty when compliant)."""
        out = []
        for f in self.functions:
            if f.name in (x, y):
                out.append(f"external function named {f.name}")
            for g in f.reads:
                if g in (x, y):
                    out.append(f"external function {f.name} reads global {g}")
        return out


# -- reduction ----------------------------------------------------------------

def _is_value(e: Expr) -> bool:
    return isinstance(e, (IntConst, StrConst))


def _redexes(e: Expr, path: tuple[int, ...] = ()):
    match e:
        case Var():
            yield path, e
        case Unop(operand=a):
            if _is_value(a):
                yield path, e
            else:
                yield from _redexes(a, path + (0,))
        case Binop(op="&&" | "||", left=a):
            if _is_value(a):
                yield path, e
            else:
                yield from _redexes(a, path + (0,))
        case Binop(left=a, right=b):
            if _is_value(a) and _is_value(b):
                yield path, e
            else:
                if not _is_value(a):
                    yield from _redexes(a, path + (0,))
                if not _is_value(b):
                    yield from _redexes(b, path + (1,))
        case Assign(value=v):
            if _is_value(v):
                yield path, e
            else:
                yield from _redexes(v, path + (0,))
        case Call(args=args):
            if all(_is_value(a) for a in args):
                yield path, e
            else:
                for i, a in enumerate(args):
                    if not _is_value(a):
                        yield from _redexes(a, path + (i,))


def _arith(op: str, a: int, b: int) -> Optional[int]:
    if op == "+":
        return wrap32(a + b)
    if op == "-":
        return wrap32(a - b)
    if op == "*":
        return wrap32(a * b)
    if op in ("/", "%"):
        if b == 0 or (a == -2**31 and b == -1):
            return None
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return q if op == "/" else a - b * q
    return int({
        "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b,
    }[op])


def _fold(e: Expr) -> Optional[Expr]:
    """Reduce a pure redex, or None if it goes wrong."""
    match e:
        case Unop(op=op, operand=IntConst(value=v)):
            return IntConst(wrap32(-v) if op == "-" else int(v == 0))
        case Binop(op="&&", left=IntConst(value=v), right=b):
            return IntConst(0) if v == 0 else Binop("!=", b, IntConst(0))
        case Binop(op="||", left=IntConst(value=v), right=b):
            return IntConst(1) if v != 0 else Binop("!=", b, IntConst(0))
        case Binop(op=op, left=IntConst(value=a), right=IntConst(value=b)):
            r = _arith(op, a, b)
            return None if r is None else IntConst(r)
    return None


def _is_silent(redex: Expr, env: LocalEnv, assigned: frozenset) -> bool:
    if isinstance(redex, (Unop, Binop)):
        return _fold(redex) is not None
    if isinstance(redex, Var):
        found, v = env_lookup(env, redex.ident)
        return found and v is not None and redex.ident not in assigned
    return False


def _stuck(reason: str):
    return [((), Stuck(reason))]


def _reduce(st: RunExpr, path, redex: Expr, model: ExtCallModel):
    """All (events, successor) pairs for reducing ``redex`` at ``path``."""
    env, ge = st.env, st.ge

    def done(new: Expr, events=(), env=env, ge=ge, ncalls=st.ncalls):
        expr = replace_at(st.expr, path, new)
        return [(events, RunExpr(expr, st.k, env, st.fn, ge, ncalls))]

    if isinstance(redex, Var):
        name = redex.ident
        found, v = env_lookup(env, name)
        if found:
            return _stuck(f"read of uninitialized local {name}") if v is None else done(IntConst(v))
        entry = ge.get(name)
        if isinstance(entry, GlobSlot):
            ev = (VolLoad if entry.volatile else GlobRead)(name, entry.value)
            return done(IntConst(entry.value), (ev,))
        if entry is None:
            return _stuck(f"undefined variable {name}")
        return _stuck(f"function {name} used as a value")

    if isinstance(redex, (Unop, Binop)):
        new = _fold(redex)
        return _stuck(f"invalid operation {redex.op}") if new is None else done(new)

    if isinstance(redex, Assign):
        name, value = redex.target.ident, redex.value
        if not isinstance(value, IntConst):
            return _stuck("string used as a value")
        found, _ = env_lookup(env, name)
        if found:
            return done(value, env=env_store(env, name, value.value))
        entry = ge.get(name)
        if isinstance(entry, GlobSlot):
            ev = (VolStore if entry.volatile else GlobWrite)(name, value.value)
            return done(value, (ev,), ge=ge.store(name, value.value))
        return _stuck(f"assignment to {name}, which is not a variable")

    if isinstance(redex, Call):
        name = redex.callee
        args = tuple(a.value if isinstance(a, IntConst) else a.text for a in redex.args)
        if env_lookup(env, name)[0]:
            return _stuck(f"called object {name} is not a function")
        entry = ge.get(name)
        if isinstance(entry, Function):
            if len(args) != len(entry.params) or any(isinstance(a, str) for a in args):
                return _stuck(f"bad arguments in call to {name}")
            callee_env = tuple((i, a) for (i, _), a in zip(entry.params, args))
            callee_env += tuple((i, None) for i, _ in entry.locals)
            k = Kcall(st.fn, env, EvalCtx.around(st.expr, path), st.k)
            return [((), RunStmt(entry.body, k, callee_env, entry, ge, st.ncalls))]
        if entry is not None:
            return _stuck(f"called object {name} is not a function")
        ext = model.lookup(name)
        if ext is None:
            return _stuck(f"call of undefined function {name}")
        read_values = []
        for g in ext.reads:
            slot = ge.get(g)
            if not isinstance(slot, GlobSlot):
                return _stuck(f"external function {name} references missing global {g}")
            read_values.append(slot.value)
        result = ext.compute(args, st.ncalls, tuple(read_values))
        if result is None:
            return _stuck(f"ill-formed call to {name}")
        result = wrap32(result)
        return done(IntConst(result), (ExtCall(name, args, result),), ncalls=st.ncalls + 1)

    raise TypeError(f"not a redex: {redex!r}")


def _expr_value_step(st: RunExpr):
    v, k = st.expr, st.k
    common = (st.env, st.fn, st.ge, st.ncalls)
    if isinstance(k, Kdo):
        return [((), RunStmt(Skip(), k.k, *common))]
    if not isinstance(v, IntConst):
        return _stuck("string used as a value")
    if isinstance(k, Kif):
        return [((), RunStmt(k.then if v.value else k.orelse, k.k, *common))]
    if isinstance(k, Kwhile):
        if v.value:
            return [((), RunStmt(k.body, k, *common))]
        return [((), RunStmt(Skip(), k.k, *common))]
    if isinstance(k, Kreturn):
        return [((), Returned(v.value, call_cont(k.k), st.ge, st.ncalls))]
    return _stuck("malformed continuation")


def _stmt_step(st: RunStmt):
    s, k = st.stmt, st.k
    common = (st.env, st.fn, st.ge, st.ncalls)
    match s:
        case Skip():
            if isinstance(k, Kseq):
                return [((), RunStmt(k.stmt, k.k, *common))]
            if isinstance(k, Kwhile):
                return [((), RunStmt(While(k.cond, k.body), k.k, *common))]
            if isinstance(k, (Kcall, Kstop)):
                return [((), Returned(None, k, st.ge, st.ncalls))]
            return _stuck("malformed continuation")
        case ExprStmt(expr=e):
            return [((), RunExpr(e, Kdo(k), *common))]
        case Seq(first=a, second=b):
            return [((), RunStmt(a, Kseq(b, k), *common))]
        case If(cond=c, then=a, orelse=b):
            return [((), RunExpr(c, Kif(a, b, k), *common))]
        case While(cond=c, body=b):
            return [((), RunExpr(c, Kwhile(c, b, k), *common))]
        case Return(value=None):
            return [((), Returned(None, call_cont(k), st.ge, st.ncalls))]
        case Return(value=e):
            return [((), RunExpr(e, Kreturn(k), *common))]
    raise TypeError(f"unknown statement {s!r}")


def _returned_step(st: Returned):
    k = st.k
    if isinstance(k, Kstop):
        return []
    if not isinstance(k, Kcall):
        return _stuck("malformed continuation")
    if st.value is None:
        if k.resume.path == () and isinstance(k.k, Kdo):
            return [((), RunExpr(IntConst(0), k.k, k.env, k.caller, st.ge, st.ncalls))]
        return _stuck("use of a missing return value")
    expr = k.resume.plug(IntConst(st.value))
    return [((), RunExpr(expr, k.k, k.env, k.caller, st.ge, st.ncalls))]


def successors(st: ExecState, model: ExtCallModel, mode: Optional[str] = EXHAUSTIVE):
    """Transitions out of ``st`` as a list of ``(events, state)`` pairs.

    ``mode=None`` gives the unpruned relation: one successor per redex.
    """
    if isinstance(st, Stuck):
        return []
    if isinstance(st, Returned):
        return _returned_step(st)
    if isinstance(st, RunStmt):
        return _stmt_step(st)
    if _is_value(st.expr):
        return _expr_value_step(st)
    redexes = list(_redexes(st.expr))
    if mode == DETERMINISTIC:
        redexes = redexes[:1]
    elif mode == EXHAUSTIVE:
        # the root assignment fires last, so reads of its target cannot race with it
        nested = [n for n in subexprs(st.expr) if isinstance(n, Assign) and n is not st.expr]
        assigned = frozenset(n.target.ident for n in nested)
        silent = [r for r in redexes if _is_silent(r[1], st.env, assigned)]
        if silent:
            redexes = silent[:1]
    out = []
    for path, redex in redexes:
        out.extend(_reduce(st, path, redex, model))
    return out


def step(st: ExecState, model: Optional[ExtCallModel] = None, mode: str = EXHAUSTIVE):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    return successors(st, model or ExtCallModel.default(), mode)


# -- program start and runs -------------------------------------------------------

def _const_eval(e: Expr, slots: dict) -> Optional[int]:
    match e:
        case IntConst(value=v):
            return v
        case Var(ident=i):
            slot = slots.get(i)
            return slot.value if isinstance(slot, GlobSlot) else None
        case Unop(op=op, operand=a):
            v = _const_eval(a, slots)
            return None if v is None else (wrap32(-v) if op == "-" else int(v == 0))
        case Binop(op=op, left=a, right=b):
            va = _const_eval(a, slots)
            if va is None:
                return None
            if op == "&&" and va == 0:
                return 0
            if op == "||" and va != 0:
                return 1
            vb = _const_eval(b, slots)
            if vb is None:
                return None
            if op in ("&&", "||"):
                return int(vb != 0)
            return _arith(op, va, vb)
    return None


def main_function(p: Program) -> Function:
    d = p.lookup(p.main)
    if not isinstance(d, Fun) or d.fn.params:
        raise RunError("no main function")
    return d.fn


def initial_state(p: Program) -> ExecState:
    """Entry into ``main``, or a stuck state if a global initializer
    cannot be evaluated."""
    fn = main_function(p)
    entries, slots = [], {}
    for name, d in p.defs:
        if isinstance(d, Fun):
            entries.append((name, d.fn))
            continue
        value = 0
        if d.init:
            value = _const_eval(d.init[0], slots)
            if value is None:
                return Stuck(f"cannot evaluate initializer of {name}")
        slots[name] = GlobSlot(wrap32(value), d.volatile)
        entries.append((name, slots[name]))
    ge = GlobalEnv(tuple(entries), p.main)
    env = tuple((i, None) for i, _ in fn.locals)
    return RunStmt(fn.body, Kstop(), env, fn, ge, 0)


def _terminal(st: ExecState, trace: tuple) -> Optional[Behavior]:
    if isinstance(st, Stuck):
        return GoesWrong(trace)
    if is_final(st):
        return Terminates(trace, exit_code(st))
    return None


def run(p: Program, model: Optional[ExtCallModel] = None, mode: str = DETERMINISTIC,
        budget: int = 10_000, max_paths: int = 200_000) -> frozenset:
    """Set of behaviors of ``p``; runs longer than ``budget`` steps end
    as :class:`Unknown` with the prefix observed so far."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    model = model or ExtCallModel.default()
    behaviors = set()
    stack = [(initial_state(p), (), 0)]
    seen = set()  # interleavings that reconverge are explored once
    paths = 1
    while stack:
        st, prefix, steps = stack.pop()
        trace = list(prefix)
        while True:
            b = _terminal(st, tuple(trace))
            if b is not None:
                behaviors.add(b)
                break
            if steps >= budget:
                behaviors.add(Unknown(tuple(trace)))
                break
            succ = successors(st, model, mode)
            steps += 1
            if len(succ) == 1:
                events, st = succ[0]
                trace.extend(events)
                continue
            paths += len(succ) - 1
            if paths > max_paths:
                raise ExplorationLimit(f"more than {max_paths} execution paths")
            for events, nxt in reversed(succ):
                key = (nxt, tuple(trace) + events, steps)
                if key not in seen:
                    seen.add(key)
                    stack.append(key)
            break
    return frozenset(behaviors)


# -- renaming of runtime structures ---------------------------------------------

def rename_globalenv(x: Ident, y: Ident, ge: GlobalEnv) -> GlobalEnv:
    if x == y:
        raise ValueError("old and new names must differ")
    if ge.main == x:
        raise RenameError(X_IS_MAIN)
    if ge.main == y:
        raise RenameError(Y_IS_MAIN)
    entry = ge.get(x)
    if entry is None:
        raise RenameError(X_NOT_GLOBAL)
    if isinstance(entry, Function):
        raise RenameError(X_IS_FUNCTION)
    if entry.volatile:
        raise RenameError(VOLATILE)
    if y in ge:
        raise RenameError(DEFINES_Y)
    out = []
    for name, e in ge.entries:
        if name == x:
            out.append((y, e))
        elif isinstance(e, Function):
            out.append((name, propagate_change_ident(x, y, e)))
        else:
            out.append((name, e))
    return GlobalEnv(tuple(out), ge.main)


def _idents(node) -> Iterable[Ident]:
    if isinstance(node, (Skip, ExprStmt, Seq, If, While, Return)):
        return statement_idents(node)
    return expr_idents(node)


class _Segment:
    """Renaming of the code fragments in one continuation segment, given
    the binders of the function that owns the segment."""

    def __init__(self, x: Ident, y: Ident, bound: frozenset) -> None:
        self.x, self.y = x, y
        self.bx, self.by = x in bound, y in bound

    def __call__(self, node):
        x, y = self.x, self.y
        if self.bx and self.by:
            return node
        if self.bx:
            if any(i == y for i in _idents(node)):
                raise RenameError(Y_IN_FUNCTION)
            return node
        if self.by:
            if any(i == x for i in _idents(node)):
                raise RenameError(SHADOWING)
            return node
        if isinstance(node, (Skip, ExprStmt, Seq, If, While, Return)):
            return rename_statement(x, y, node)
        return rename_expr(x, y, node)


def rename_cont(x: Ident, y: Ident, k: Cont, bound: frozenset) -> Cont:
    seg = _Segment(x, y, bound)
    frames = []
    while not isinstance(k, Kstop):
        frames.append(k)
        if isinstance(k, Kcall):
            break
        k = k.k
    if isinstance(k, Kcall):
        tail = rename_cont(x, y, k.k, env_names(k.env))
        inner = _Segment(x, y, env_names(k.env))
        out: Cont = Kcall(propagate_change_ident(x, y, k.caller), k.env,
                          EvalCtx(inner(k.resume.expr), k.resume.path), tail)
        frames.pop()
    else:
        out = Kstop()
    for f in reversed(frames):
        match f:
            case Kseq(stmt=s):
                out = Kseq(seg(s), out)
            case Kwhile(cond=c, body=b):
                out = Kwhile(seg(c), seg(b), out)
            case Kdo():
                out = Kdo(out)
            case Kif(then=a, orelse=b):
                out = Kif(seg(a), seg(b), out)
            case Kreturn():
                out = Kreturn(out)
    return out


def rename_state(x: Ident, y: Ident, st: ExecState) -> ExecState:
    """Image of ``st`` in the renamed program.

    Code in the first continuation segment takes its binders from the
    state's own environment; each later segment takes them from the
    environment saved in the call frame that opens it.
    """
    if x == y:
        raise ValueError("old and new names must differ")
    if isinstance(st, Stuck):
        return st
    ge = rename_globalenv(x, y, st.ge)
    if isinstance(st, Returned):
        return Returned(st.value, rename_cont(x, y, st.k, frozenset()), ge, st.ncalls)
    bound = env_names(st.env)
    seg = _Segment(x, y, bound)
    k = rename_cont(x, y, st.k, bound)
    fn = propagate_change_ident(x, y, st.fn)
    if isinstance(st, RunStmt):
        return RunStmt(seg(st.stmt), k, st.env, fn, ge, st.ncalls)
    return RunExpr(seg(st.expr), k, st.env, fn, ge, st.ncalls)


# -- lockstep check -------------------------------------------------------------

@dataclass
class StepCommutResult:
    transitions: int = 0
    states: int = 0
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def check_step_commut(x: Ident, y: Ident, p: Program, model: Optional[ExtCallModel] = None,
                      budget: int = 2_000) -> StepCommutResult:
    """Explore reachable transitions of ``p`` (every redex choice) and check
    that each one, renamed, is a transition of the renamed program.

    The first transition that does not commute is returned as the
    counterexample.  Raises :class:`RenameError` if ``p`` cannot be renamed.
    """
    from .traces import rename_in_trace

    model = model or ExtCallModel.default()
    target = rename_globvar_hard(x, y, p)
    result = StepCommutResult()
    start = initial_state(p)
    try:
        image = rename_state(x, y, start)
    except RenameError as err:
        result.counterexample = {"state": start, "reason": f"initial state: {err}"}
        return result
    if image != initial_state(target):
        result.counterexample = {"state": start, "reason": "initial states do not correspond"}
        return result

    seen = {start}
    queue = deque([start])
    while queue and result.transitions < budget:
        st1 = queue.popleft()
        result.states += 1
        try:
            tst1 = rename_state(x, y, st1)
            renamed_moves = successors(tst1, model, None)
        except RenameError as err:
            result.counterexample = {"state": st1, "reason": f"state not renameable: {err}"}
            return result
        for events, st2 in successors(st1, model, None):
            result.transitions += 1
            try:
                expected = (rename_in_trace(x, y, events), rename_state(x, y, st2))
            except RenameError as err:
                result.counterexample = {"state": st1, "events": events, "next": st2,
                                         "reason": f"successor not renameable: {err}"}
                return result
            if expected not in renamed_moves:
                result.counterexample = {"state": st1, "events": events, "next": st2,
                                         "reason": "renamed transition is not a step of the renamed program"}
                return result
            if st2 not in seen:
                seen.add(st2)
                queue.append(st2)
            if result.transitions >= budget:
                break
    return result
