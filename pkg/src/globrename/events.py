"""Observable events, traces and program behaviors."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .core import Ident

Value = Union[int, str]


@dataclass(frozen=True)
class ExtCall:
    name: Ident
    args: tuple[Value, ...]
    result: int


@dataclass(frozen=True)
class VolLoad:
    var: Ident
    value: int


@dataclass(frozen=True)
class VolStore:
    var: Ident
    value: int


@dataclass(frozen=True)
class GlobRead:
    var: Ident
    value: int


@dataclass(frozen=True)
class GlobWrite:
    var: Ident
    value: int


Event = Union[ExtCall, VolLoad, VolStore, GlobRead, GlobWrite]
Trace = tuple  # tuple[Event, ...]


@dataclass(frozen=True)
class Terminates:
    trace: Trace
    code: int


@dataclass(frozen=True)
class GoesWrong:
    trace: Trace


@dataclass(frozen=True)
class Unknown:
    """Step budget ran out; ``trace`` is the prefix observed so far."""
    trace: Trace


Behavior = Union[Terminates, GoesWrong, Unknown]

_KIND = {
    ExtCall: "EXTCALL",
    VolLoad: "VOLLOAD",
    VolStore: "VOLSTORE",
    GlobRead: "GLOBREAD",
    GlobWrite: "GLOBWRITE",
}


def format_event(ev: Event) -> str:
    """``KIND ident value``; external calls append their arguments as JSON."""
    kind = _KIND[type(ev)]
    if isinstance(ev, ExtCall):
        return f"{kind} {ev.name.name} {ev.result} {json.dumps(list(ev.args))}"
    return f"{kind} {ev.var.name} {ev.value}"


def format_trace(trace: Trace) -> str:
    return "".join(format_event(ev) + "\n" for ev in trace)


def format_behavior(b: Behavior) -> str:
    if isinstance(b, Terminates):
        head = f"terminates {b.code}"
    elif isinstance(b, GoesWrong):
        head = "goes-wrong"
    else:
        head = "unknown"
    return head + "\n" + "".join("  " + format_event(ev) + "\n" for ev in b.trace)


def canonical(behaviors) -> list[Behavior]:
    """Behaviors in a stable order for printing and comparison."""
    return sorted(set(behaviors), key=format_behavior)
