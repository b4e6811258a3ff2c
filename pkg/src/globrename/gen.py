"""Bounded random generator of (program, old name, new name) cases.

Programs are small but exercise shadowing on purpose: one function per
case is forced into one of the four binding situations for the chosen
pair, cycling through them so every branch of the function-level case
analysis is hit on every run.  Loops are counter-bounded and helpers
only call helpers defined earlier, so every program terminates unless it
goes wrong.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .core import (
    Assign, Binop, Call, CType, Expr, ExprStmt, Fun, Function, GlobVar, Ident,
    If, IntConst, Program, Return, Statement, StrConst, Unop, Var, While,
    intern, seq,
)

GLOBAL_POOL = ("g0", "g1", "g2", "g3")
LOCAL_POOL = ("a", "b", "c")
NEW_POOL = ("h0", "h1")
CASES = ("binds_both", "binds_x", "binds_y", "binds_neither")
MAX_GLOBALS, MAX_FUNCTIONS, MAX_DEPTH = 3, 3, 2

_PRINTF = intern("printf")
_COUNTER = intern("i")
_ARITH = ("+", "-", "*", "+", "-", "+", "<", "==", "<", "&&", "||", "/", "%", "+")


@dataclass(frozen=True)
class GenCase:
    program: Program
    x: Ident
    y: Ident
    forced_case: str
    hygienic: bool


@dataclass
class _Scope:
    """What a function body may mention, and how many effectful leaves
    (global accesses, calls) an expression may still contain."""
    locals: list
    globals: list
    extra: list        # names that may occur free (possibly undefined)
    helpers: list      # (name, arity) of callable earlier helpers
    writable: list


class Generator:
    def __init__(self, seed: int) -> None:
        self.seed = seed

    def case(self, index: int) -> GenCase:
        rng = random.Random(self.seed * 1_000_003 + index)
        return _build(rng, CASES[index % len(CASES)])


def _build(rng: random.Random, forced: str) -> GenCase:
    n_globals = rng.randint(1, MAX_GLOBALS)
    gnames = [intern(n) for n in rng.sample(GLOBAL_POOL, n_globals)]
    helper_names = [intern(f"f{i}") for i in range(rng.randint(1, MAX_FUNCTIONS))]
    main = intern("main")

    # choice of x: usually a defined global, sometimes something else
    roll = rng.random()
    if roll < 0.90:
        x = rng.choice(gnames)
    elif roll < 0.93:
        x = rng.choice(helper_names)
    elif roll < 0.95:
        x = main
    else:
        x = intern(rng.choice([n for n in GLOBAL_POOL if intern(n) not in gnames] or ["g9"]))
    # choice of y: usually fresh, sometimes colliding
    roll = rng.random()
    if roll < 0.75:
        y = intern(rng.choice(NEW_POOL))
    elif roll < 0.85:
        y = rng.choice([g for g in gnames if g != x] or [intern("h0")])
    elif roll < 0.92:
        y = rng.choice(helper_names)
    elif roll < 0.95:
        y = main
    else:
        y = intern(rng.choice(LOCAL_POOL))
    if y == x:
        y = intern("h1") if x != intern("h1") else intern("h0")
    hygienic = rng.random() < 0.35

    defs: list = []
    for g in gnames:
        volatile = rng.random() < 0.08
        init: tuple = ()
        r = rng.random()
        earlier = [d for d, _ in defs if isinstance(_, GlobVar)]
        if g == x and rng.random() < 0.06:
            init = (Binop("+", Var(y), IntConst(1)),)
        elif r < 0.5:
            init = (IntConst(rng.randint(0, 5)),)
        elif r < 0.6 and earlier:
            other = rng.choice(earlier)
            if not (hygienic and other in (x, y)):
                init = (Binop("+", Var(other), IntConst(rng.randint(0, 3))),)
        defs.append((g, GlobVar(CType.INT, init, volatile)))

    forced_fn = rng.randrange(len(helper_names) + 1)
    helpers: list = []
    for idx, name in enumerate(helper_names):
        case = forced if idx == forced_fn else None
        fn = _function(rng, x, y, gnames, helpers, case, hygienic, is_main=False)
        defs.append((name, Fun(fn)))
        helpers.append((name, len(fn.params)))
    case = forced if forced_fn == len(helper_names) else None
    defs.append((main, Fun(_function(rng, x, y, gnames, helpers, case, hygienic, is_main=True))))
    return GenCase(Program(tuple(defs), main), x, y, forced, hygienic)


def _binders(rng, x, y, case, is_main):
    names = [intern(n) for n in LOCAL_POOL]
    params = [] if is_main else rng.sample(names, rng.randint(0, 2))
    local_pool = [n for n in names if n not in params]
    locs = rng.sample(local_pool, rng.randint(0, min(2, len(local_pool))))
    wanted = {"binds_both": (x, y), "binds_x": (x,), "binds_y": (y,)}.get(case)
    if case is None:
        # occasional incidental shadowing
        wanted = tuple(n for n in (x, y) if rng.random() < 0.12)
    for n in wanted or ():
        if n in params or n in locs or n == intern("main"):
            continue
        if not is_main and rng.random() < 0.5:
            params.append(n)
        else:
            locs.append(n)
    if case == "binds_x":
        params = [n for n in params if n != y]
        locs = [n for n in locs if n != y]
    elif case == "binds_y":
        params = [n for n in params if n != x]
        locs = [n for n in locs if n != x]
    elif case == "binds_neither":
        params = [n for n in params if n not in (x, y)]
        locs = [n for n in locs if n not in (x, y)]
    return params, locs


def _function(rng, x, y, gnames, helpers, case, hygienic, is_main) -> Function:
    params, locs = _binders(rng, x, y, case, is_main)
    bound = set(params) | set(locs)
    use_loop = rng.random() < 0.4
    if use_loop:
        locs.append(_COUNTER)
    extra = []
    for n in (x, y):
        if n in bound or n in gnames:
            continue
        if hygienic:
            continue
        if rng.random() < 0.15:
            extra.append(n)
    globals_visible = [g for g in gnames if g not in bound]
    if hygienic:
        globals_visible = [g for g in globals_visible if g not in (x, y)]
    scope = _Scope(
        locals=list(params) + [n for n in locs if n != _COUNTER],
        globals=globals_visible,
        extra=extra,
        helpers=list(helpers),
        writable=[n for n in list(params) + locs if n != _COUNTER] + globals_visible,
    )
    if case in ("binds_x", "binds_y") and not hygienic and rng.random() < 0.6:
        # provoke the refusal branches: mention the other name in the body
        other = y if case == "binds_x" else x
        if other not in scope.extra and other not in scope.globals:
            scope.extra.append(other)

    stmts: list[Statement] = []
    for n in locs:
        if n != _COUNTER and rng.random() < 0.95:
            stmts.append(ExprStmt(Assign(Var(n), IntConst(rng.randint(0, 4)))))
    for _ in range(rng.randint(1, 3)):
        stmts.append(_statement(rng, scope, depth=0, racy=is_main))
    if use_loop:
        body = seq(_statement(rng, scope, depth=1, racy=False),
                   ExprStmt(Assign(Var(_COUNTER), Binop("+", Var(_COUNTER), IntConst(1)))))
        stmts.append(ExprStmt(Assign(Var(_COUNTER), IntConst(0))))
        stmts.append(While(Binop("<", Var(_COUNTER), IntConst(rng.randint(1, 3))), body))
    stmts.append(Return(_expr(rng, scope, rng.randint(0, MAX_DEPTH), 2 if is_main else 1)))
    return Function(
        CType.INT,
        tuple((p, CType.INT) for p in params),
        tuple((n, CType.INT) for n in locs),
        seq(*stmts),
    )


def _statement(rng, scope: _Scope, depth: int, racy: bool) -> Statement:
    effects = 2 if racy else 1
    r = rng.random()
    if r < 0.35 and scope.writable:
        target = rng.choice(scope.writable + scope.globals + scope.extra)
        return ExprStmt(Assign(Var(target), _expr(rng, scope, rng.randint(0, MAX_DEPTH), effects)))
    if r < 0.55:
        return ExprStmt(Call(_PRINTF, (StrConst("%d\n"), _expr(rng, scope, 1, effects - 1 if effects > 1 else 0))))
    if r < 0.7 and scope.helpers:
        name, arity = rng.choice(scope.helpers)
        return ExprStmt(Call(name, tuple(_expr(rng, scope, 0, 0) for _ in range(arity))))
    if r < 0.9 and depth < 2:
        cond = _expr(rng, scope, 1, 1)
        then = _statement(rng, scope, depth + 1, False)
        orelse = _statement(rng, scope, depth + 1, False) if rng.random() < 0.5 else seq()
        return If(cond, then, orelse)
    target = rng.choice(scope.writable + scope.extra) if scope.writable or scope.extra else None
    if target is None:
        return seq()
    return ExprStmt(Assign(Var(target), IntConst(rng.randint(0, 9))))


def _expr(rng, scope: _Scope, depth: int, effects: int) -> Expr:
    """Random expression with at most ``effects`` global accesses or calls."""
    if depth == 0:
        return _leaf(rng, scope, effects)
    r = rng.random()
    if r < 0.15:
        return Unop(rng.choice(("-", "!")), _expr(rng, scope, depth - 1, effects))
    op = rng.choice(_ARITH)
    left_effects = rng.randint(0, effects)
    left = _expr(rng, scope, depth - 1, left_effects)
    if op in ("/", "%") and rng.random() < 0.9:
        return Binop(op, left, IntConst(rng.randint(1, 4)))
    return Binop(op, left, _expr(rng, scope, depth - 1, effects - left_effects))


def _leaf(rng, scope: _Scope, effects: int) -> Expr:
    r = rng.random()
    if r < 0.25:
        return IntConst(rng.randint(0, 5))
    if r < 0.45 and scope.locals:
        return Var(rng.choice(scope.locals))
    if effects <= 0:
        return Var(rng.choice(scope.locals)) if scope.locals else IntConst(rng.randint(0, 5))
    if r < 0.85 and (scope.globals or scope.extra):
        pool = scope.globals * 3 + scope.extra
        return Var(rng.choice(pool))
    if scope.helpers:
        name, arity = rng.choice(scope.helpers)
        return Call(name, tuple(_leaf(rng, scope, 0) for _ in range(arity)))
    return IntConst(rng.randint(0, 5))
