"""Renaming of global identifiers inside traces and behaviors, and
comparison of behavior sets up to that renaming."""
from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from .core import Ident
from .events import (
    Behavior, Event, ExtCall, GoesWrong, Terminates, Trace, Unknown, canonical,
    format_behavior, format_event, format_trace,
)
from .rename import ALREADY_OCCURS, RenameError

__all__ = [
    "rename_event", "rename_in_trace", "rename_behavior", "rename_behaviors",
    "behaviors_equal_up_to_renaming", "canonical", "format_behavior",
    "format_event", "format_trace",
]


def rename_event(x: Ident, y: Ident, ev: Event) -> Event:
    field = "name" if isinstance(ev, ExtCall) else "var"
    ident = getattr(ev, field)
    if ident == x:
        return replace(ev, **{field: y})
    if ident == y:
        raise RenameError(ALREADY_OCCURS)
    return ev


def rename_in_trace(x: Ident, y: Ident, t: Trace) -> Trace:
    if x == y:
        raise ValueError("old and new names must differ")
    return tuple(rename_event(x, y, ev) for ev in t)


def rename_behavior(x: Ident, y: Ident, b: Behavior) -> Behavior:
    if isinstance(b, Terminates):
        return Terminates(rename_in_trace(x, y, b.trace), b.code)
    if isinstance(b, GoesWrong):
        return GoesWrong(rename_in_trace(x, y, b.trace))
    return Unknown(rename_in_trace(x, y, b.trace))


def rename_behaviors(x: Ident, y: Ident, bs: Iterable[Behavior]) -> frozenset:
    return frozenset(rename_behavior(x, y, b) for b in bs)


def behaviors_equal_up_to_renaming(x: Ident, y: Ident, original, renamed) -> bool:
    """Forward: renaming every original behavior lands in ``renamed``, and
    backward: renaming every ``renamed`` behavior back lands in
    ``original``.  Both inclusions together give set equality."""
    original, renamed = frozenset(original), frozenset(renamed)
    forward = rename_behaviors(x, y, original) <= renamed
    backward = rename_behaviors(y, x, renamed) <= original
    return forward and backward
