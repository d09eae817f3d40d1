"""Ordinals below epsilon_0 in Cantor normal form.

An :class:`Ordinal` is an immutable, always-canonical sum
``w^e1*c1 + w^e2*c2 + ...`` with strictly decreasing exponents (themselves
ordinals) and positive integer coefficients.  Equality is structural.

The text syntax is ``0``, ``5``, ``w``, ``w*3``, ``w^2*3+w+4``,
``w^(w+1)``.  :func:`parse` also accepts general sum/product expressions
such as ``(w+1)*(w+1)`` and normalises them.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Sequence, Union

__all__ = [
    "Ordinal",
    "INF",
    "ZERO",
    "ONE",
    "OMEGA",
    "cnf_cmp",
    "cnf_add",
    "cnf_mul",
    "omega_pow",
    "parse",
    "rank_ge",
    "Tail",
    "RankSetDescription",
    "MalformedDescription",
    "order_type_of_finite_described_set",
]


@total_ordering
class Ordinal:
    """An ordinal below epsilon_0, kept in Cantor normal form."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[tuple["Ordinal", int]] = ()):
        terms = tuple(terms)
        prev = None
        for exp, coef in terms:
            if not isinstance(exp, Ordinal):
                raise TypeError(f"exponent must be an Ordinal, got {exp!r}")
            if not isinstance(coef, int) or coef < 1:
                raise ValueError(f"coefficient must be a positive int, got {coef!r}")
            if prev is not None and not exp < prev:
                raise ValueError("exponents must be strictly decreasing")
            prev = exp
        self.terms: tuple[tuple[Ordinal, int], ...] = terms
        self._hash = hash(terms)

    # construction -------------------------------------------------------

    @classmethod
    def of(cls, value: "int | Ordinal") -> "Ordinal":
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot make an ordinal from {value!r}")
        if value < 0:
            raise ValueError("ordinals are non-negative")
        if value == 0:
            return ZERO
        return cls(((ZERO, value),))

    # predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero())

    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero()

    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero()

    # decomposition ------------------------------------------------------

    @property
    def finite_part(self) -> int:
        if self.terms and self.terms[-1][0].is_zero():
            return self.terms[-1][1]
        return 0

    @property
    def limit_part(self) -> "Ordinal":
        """The largest limit ordinal (or 0) below or equal to self."""
        if self.is_successor():
            return Ordinal(self.terms[:-1])
        return self

    def __int__(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is infinite")
        return self.finite_part

    def predecessor(self) -> "Ordinal":
        if not self.is_successor():
            raise ValueError(f"{self} is not a successor ordinal")
        *head, (exp, coef) = self.terms
        if coef > 1:
            head.append((exp, coef - 1))
        return Ordinal(head)

    def plus_finite(self, k: int) -> "Ordinal":
        return cnf_add(self, Ordinal.of(k)) if k else self

    def minus_finite(self, k: int) -> "Ordinal":
        """Undo ``plus_finite(k)``; only defined when the finite part is >= k."""
        if k > self.finite_part:
            raise ValueError(f"cannot subtract {k} from {self}")
        return self.limit_part.plus_finite(self.finite_part - k)

    def fundamental(self, n: int) -> "Ordinal":
        """n-th member of the canonical fundamental sequence of a limit.

        For ``xi + w^d`` (the last term split off): if ``d = e+1`` the
        sequence is ``xi + w^e * n``; if ``d`` is a limit it is
        ``xi + w^(d[n])``.
        """
        if not self.is_limit():
            raise ValueError(f"{self} is not a limit ordinal")
        if n < 0:
            raise ValueError("sequence index must be >= 0")
        *head, (exp, coef) = self.terms
        if coef > 1:
            head.append((exp, coef - 1))
        xi = Ordinal(head)
        if exp.is_successor():
            return cnf_add(xi, cnf_mul(omega_pow(exp.predecessor()), Ordinal.of(n)))
        return cnf_add(xi, omega_pow(exp.fundamental(n)))

    # operators ----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Ordinal):
            return self.terms == other.terms
        if isinstance(other, int) and not isinstance(other, bool):
            return other >= 0 and self.terms == Ordinal.of(other).terms
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if isinstance(other, Ordinal):
            return cnf_cmp(self, other) < 0
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return cnf_add(self, other)

    def __radd__(self, other):
        if isinstance(other, int):
            return cnf_add(Ordinal.of(other), self)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return cnf_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return cnf_mul(Ordinal.of(other), self)
        return NotImplemented

    def __str__(self):
        if not self.terms:
            return "0"
        return "+".join(_term_text(e, c) for e, c in self.terms)

    def __repr__(self):
        return f"Ordinal({str(self)!r})"


def _term_text(exp: Ordinal, coef: int) -> str:
    if exp.is_zero():
        return str(coef)
    if exp == ONE:
        base = "w"
    else:
        inner = str(exp)
        simple = exp.is_finite() or inner == "w"
        base = f"w^{inner}" if simple else f"w^({inner})"
    return base if coef == 1 else f"{base}*{coef}"


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


class _Infinity:
    """Rank of a node lying on an infinite path; above every ordinal."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inf-rank")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __str__(self):
        return "inf"

    __repr__ = __str__


INF = _Infinity()

RankValue = Union[Ordinal, _Infinity]


def rank_ge(r: RankValue | int, bound: Ordinal) -> bool:
    """``r >= bound`` where ``r`` may be :data:`INF` or a plain int."""
    if r is INF:
        return True
    return not cnf_cmp(Ordinal.of(r) if isinstance(r, int) else r, bound) < 0


def cnf_cmp(a: Ordinal, b: Ordinal) -> int:
    """Three-way comparison: -1, 0 or 1."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = cnf_cmp(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


def cnf_add(a: Ordinal, b: Ordinal) -> Ordinal:
    if b.is_zero():
        return a
    lead, lead_coef = b.terms[0]
    kept = []
    for exp, coef in a.terms:
        c = cnf_cmp(exp, lead)
        if c > 0:
            kept.append((exp, coef))
        elif c == 0:
            kept.append((exp, coef + lead_coef))
            kept.extend(b.terms[1:])
            return Ordinal(kept)
        else:
            break
    kept.extend(b.terms)
    return Ordinal(kept)


def cnf_mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if a.is_zero() or b.is_zero():
        return ZERO
    lead = a.terms[0][0]
    out = ZERO
    for exp, coef in b.terms:
        if exp.is_zero():
            # a * n only scales the leading coefficient
            (e0, c0), *rest = a.terms
            piece = Ordinal(((e0, c0 * coef), *rest))
        else:
            piece = Ordinal(((cnf_add(lead, exp), coef),))
        out = cnf_add(out, piece)
    return out


def omega_pow(a: Ordinal) -> Ordinal:
    return Ordinal(((a, 1),))


# parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(w|ω)|(\^|\*|\+|\(|\)))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad ordinal syntax at {text[pos:]!r}")
        out.append(m.group(1) or ("w" if m.group(2) else m.group(3)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: Sequence[str]):
        self.toks = list(tokens)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def expr(self) -> Ordinal:
        val = self.product()
        while self.peek() == "+":
            self.take()
            val = cnf_add(val, self.product())
        return val

    def product(self) -> Ordinal:
        val = self.power()
        while self.peek() == "*":
            self.take()
            val = cnf_mul(val, self.power())
        return val

    def power(self) -> Ordinal:
        if self.peek() == "w":
            self.take()
            if self.peek() == "^":
                self.take()
                return omega_pow(self.atom())
            return OMEGA
        return self.atom()

    def atom(self) -> Ordinal:
        tok = self.take()
        if tok == "(":
            val = self.expr()
            self.take(")")
            return val
        if tok == "w":
            return OMEGA
        if tok.isdigit():
            return Ordinal.of(int(tok))
        raise ValueError(f"unexpected token {tok!r}")


def parse(text: str) -> Ordinal:
    """Parse CNF text or a general ``+``/``*``/``w^`` expression."""
    p = _Parser(_tokenize(text))
    val = p.expr()
    if p.peek() is not None:
        raise ValueError(f"trailing input in {text!r}")
    return val


def parse_rank(text: str) -> RankValue:
    return INF if text.strip() in ("inf", "∞") else parse(text)


# described rank sets ------------------------------------------------------


class MalformedDescription(ValueError):
    pass


@dataclass(frozen=True)
class Tail:
    """An omega-sequence of ranks cofinal in the limit ``anchor``.

    ``members`` is the known prefix as ``(n, value)`` pairs.  Each value
    lies in ``[anchor[n] - drop, anchor[n] + w)``: it differs only finitely
    from the canonical sequence and never falls more than ``drop`` below
    it.  The sequence need not be monotone, but the lower bound leaves
    only finitely many members below any given member, so the set of
    values has order type omega.
    """

    anchor: Ordinal
    members: tuple[tuple[int, Ordinal], ...] = ()
    drop: int = 0

    def validate(self) -> None:
        if not self.anchor.is_limit():
            raise MalformedDescription(f"tail anchor {self.anchor} is not a limit")
        prev_n = -1
        for n, v in self.members:
            if n <= prev_n:
                raise MalformedDescription(f"tail indices not increasing at {n}")
            prev_n = n
            if not v < self.anchor:
                raise MalformedDescription(f"member {v} not below anchor {self.anchor}")
            base = self.anchor.fundamental(n)
            if v.limit_part != base.limit_part:
                raise MalformedDescription(
                    f"member {n}={v} is not finitely close to {base}")
            if v.plus_finite(self.drop) < base:
                raise MalformedDescription(
                    f"tail toward {self.anchor} falls below its sequence at {n}: {v} < {base}")


@dataclass(frozen=True)
class RankSetDescription:
    explicit: frozenset = field(default_factory=frozenset)
    tails: tuple[Tail, ...] = ()

    def validate(self) -> None:
        for tail in self.tails:
            tail.validate()

    def supremum(self) -> Ordinal | None:
        vals = list(self.explicit) + [t.anchor for t in self.tails]
        return max(vals) if vals else None

    def to_json(self) -> dict:
        return {
            "explicit": sorted((str(x) for x in self.explicit)),
            "tails": [
                {"anchor": str(t.anchor), "drop": t.drop,
                 "members": [[n, str(v)] for n, v in t.members]}
                for t in self.tails
            ],
        }


def order_type_of_finite_described_set(desc: RankSetDescription) -> Ordinal:
    """Exact order type of ``explicit`` united with all tails.

    Each tail contributes one copy of omega per distinct anchor (finitely
    many points of other tails and the explicit set fall below any point of
    a tail, so they are absorbed); explicit points at or above the largest
    anchor are appended at the end.
    """
    desc.validate()
    anchors = {t.anchor for t in desc.tails}
    if not anchors:
        return Ordinal.of(len(desc.explicit))
    top = max(anchors)
    above = sum(1 for x in desc.explicit if not x < top)
    return cnf_add(cnf_mul(OMEGA, Ordinal.of(len(anchors))), Ordinal.of(above))
