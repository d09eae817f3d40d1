"""Syntactic ordinal notations: zero, successor, and limit with a sequence.

Limits always carry their CNF value and use its canonical fundamental
sequence (:meth:`Ordinal.fundamental`), so ``|b|`` is computable in closed
form.  Kleene-style integer codes (``1``, ``2^c``) are available for finite
notations only, as a display convention.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ordinal import ONE, ZERO, Ordinal, parse

__all__ = [
    "Notation",
    "Zero",
    "Succ",
    "Lim",
    "notation_from_ordinal",
    "notation_value",
    "fundamental_seq",
    "kleene_code",
    "notation_to_json",
    "notation_from_json",
]


class Notation:
    """Base class for the three notation forms."""

    __slots__ = ()
    form = ""


@dataclass(frozen=True)
class Zero(Notation):
    form = "zero"

    def __str__(self):
        return "Zero"


@dataclass(frozen=True)
class Succ(Notation):
    child: Notation
    form = "succ"

    def __str__(self):
        return f"Succ({self.child})"


@dataclass(frozen=True)
class Lim(Notation):
    ordinal: Ordinal
    form = "lim"

    def __post_init__(self):
        if not self.ordinal.is_limit():
            raise ValueError(f"Lim needs a limit ordinal, got {self.ordinal}")

    def __str__(self):
        return f"Lim({self.ordinal})"


def notation_from_ordinal(alpha: Ordinal | int) -> Notation:
    alpha = Ordinal.of(alpha)
    base: Notation
    if alpha.is_zero():
        return Zero()
    lim = alpha.limit_part
    base = Zero() if lim.is_zero() else Lim(lim)
    for _ in range(alpha.finite_part):
        base = Succ(base)
    return base


def notation_value(b: Notation) -> Ordinal:
    steps = 0
    while isinstance(b, Succ):
        steps += 1
        b = b.child
    if isinstance(b, Zero):
        return Ordinal.of(steps)
    if isinstance(b, Lim):
        return b.ordinal.plus_finite(steps)
    raise TypeError(f"not a notation: {b!r}")


def fundamental_seq(b: Notation, n: int) -> Notation:
    if not isinstance(b, Lim):
        raise ValueError(f"{b} is not a limit notation")
    return notation_from_ordinal(b.ordinal.fundamental(n))


def kleene_code(b: Notation) -> int:
    """``1`` for zero and ``2^c`` for successors; limits have no small code."""
    if isinstance(b, Zero):
        return 1
    if isinstance(b, Succ):
        inner = kleene_code(b.child)
        if inner > 64:
            raise OverflowError("Kleene code too large to display")
        return 2 ** inner
    raise ValueError("limit notations are indexed by programs; no integer code")


def notation_to_json(b: Notation) -> dict:
    if isinstance(b, Zero):
        return {"form": "zero"}
    if isinstance(b, Succ):
        return {"form": "succ", "child": notation_to_json(b.child)}
    return {"form": "lim", "ordinal": str(b.ordinal)}


def notation_from_json(obj: dict) -> Notation:
    form = obj.get("form")
    if form == "zero":
        return Zero()
    if form == "succ":
        return Succ(notation_from_json(obj["child"]))
    if form == "lim":
        return Lim(parse(obj["ordinal"]))
    raise ValueError(f"unknown notation form {form!r}")


# keep the module-level constants importable for callers that want them
_ = (ONE, ZERO)
