"""Structured sign descriptions: data model, text form and validation.

A description reads as a subject followed by comma-separated clauses::

    this lane allows driving [turn left], heading to [Xi'an].
    this road with speed limited from 90 to 120 km/h, with height limited to 4.5 m.

Grammar (``", "`` separates clauses and list items, ``"."`` ends the text)::

    description := subject " " clause (", " clause)* "."
    subject     := "this lane" | "this road"
    clause      := "allows driving " list
                 | "heading to " list
                 | ("restricted to " | "prohibited for ") list
                 | "with speed limited " ["from " num " "] "to " num " km/h"
                 | "with " ("height" | "width") " limited to " num " m"
                 | "with weight limited to " num " t"
                 | "keeping distance over " num " m"
                 | free-text
    list        := "[" keyword (", " keyword)* "]"
    num         := digits ["." digits]

Free text may not contain any of ``,.[]`` and may not begin with one of the
clause heads above, which keeps every text down to at most one parse.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, replace
from decimal import Decimal

from .errors import InvalidDescription, ParseError, ValidationError

GRAMMAR_VERSION = "1.0"


class ClauseKind(str, enum.Enum):
    DIRECTION = "DIRECTION"
    DESTINATION = "DESTINATION"
    VEHICLE_CLASS = "VEHICLE_CLASS"
    SPEED_RANGE = "SPEED_RANGE"
    DIMENSION_LIMIT = "DIMENSION_LIMIT"
    DISTANCE_KEEP = "DISTANCE_KEEP"
    FREE_TEXT = "FREE_TEXT"


KIND_ORDER = {kind: i for i, kind in enumerate(ClauseKind)}
LIST_KINDS = frozenset({ClauseKind.DIRECTION, ClauseKind.DESTINATION, ClauseKind.VEHICLE_CLASS})
DIRECTIONS = ("straight", "turn left", "turn right", "u-turn", "exit")
DIMENSION_UNITS = {"height": "m", "width": "m", "weight": "t"}
SUBJECTS = ("lane", "road")
ALLOWED, PROHIBITED = "allowed", "prohibited"

_HEADS = {
    "allows driving ": ClauseKind.DIRECTION,
    "heading to ": ClauseKind.DESTINATION,
    "restricted to ": ClauseKind.VEHICLE_CLASS,
    "prohibited for ": ClauseKind.VEHICLE_CLASS,
    "with speed limited ": ClauseKind.SPEED_RANGE,
    "with height limited to ": ClauseKind.DIMENSION_LIMIT,
    "with width limited to ": ClauseKind.DIMENSION_LIMIT,
    "with weight limited to ": ClauseKind.DIMENSION_LIMIT,
    "keeping distance over ": ClauseKind.DISTANCE_KEEP,
}
_RESERVED = frozenset(",.[]")
_NUMBER = re.compile(r"[0-9]+(?:\.[0-9]+)?")


@dataclass(frozen=True)
class Clause:
    kind: ClauseKind
    keywords: tuple[str, ...] = ()
    lo: float | None = None
    hi: float | None = None
    dimension: str | None = None
    value: float | None = None
    polarity: str | None = None
    text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ClauseKind(self.kind))
        object.__setattr__(self, "keywords", tuple(self.keywords))
        for name in ("lo", "hi", "value"):
            v = getattr(self, name)
            if _finite_number(v):
                object.__setattr__(self, name, _num(v))

    @property
    def keyword_count(self) -> int:
        """Number of freely permutable items; scalar and free-text clauses count as one."""
        return len(self.keywords) if self.kind in LIST_KINDS else 1

    def params(self) -> dict:
        k = self.kind
        if k is ClauseKind.SPEED_RANGE:
            return {"hi": self.hi} if self.lo is None else {"lo": self.lo, "hi": self.hi}
        if k is ClauseKind.DIMENSION_LIMIT:
            return {"dimension": self.dimension, "value": self.value}
        if k is ClauseKind.DISTANCE_KEEP:
            return {"value": self.value}
        if k is ClauseKind.VEHICLE_CLASS:
            return {"polarity": self.polarity}
        if k is ClauseKind.FREE_TEXT:
            return {"text": self.text}
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "keywords": list(self.keywords), "params": self.params()}

    @classmethod
    def from_json(cls, data: dict) -> "Clause":
        try:
            params = dict(data.get("params") or {})
            kind = ClauseKind(data["kind"])
            return cls(
                kind=kind,
                keywords=tuple(str(k) for k in data.get("keywords", ())),
                lo=_num(params["lo"]) if params.get("lo") is not None else None,
                hi=_num(params["hi"]) if params.get("hi") is not None else None,
                dimension=params.get("dimension"),
                value=_num(params["value"]) if params.get("value") is not None else None,
                polarity=params.get("polarity"),
                text=params.get("text"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed clause: {exc}") from exc


@dataclass(frozen=True)
class StructuredDescription:
    id: str
    subject: str
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))

    def to_json(self) -> dict:
        return {"id": self.id, "subject": self.subject, "clauses": [c.to_json() for c in self.clauses]}

    @classmethod
    def from_json(cls, data: dict) -> "StructuredDescription":
        try:
            return cls(
                id=str(data.get("id", "")),
                subject=data["subject"],
                clauses=tuple(Clause.from_json(c) for c in data["clauses"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed description: {exc}") from exc


@dataclass(frozen=True)
class Violation:
    code: str
    clause: int | None
    message: str


def _num(v):
    v = float(v)
    return int(v) if v.is_integer() else v


def format_number(v) -> str:
    """Plain decimal form without trailing zeros (``120``, ``4.5``)."""
    s = format(Decimal(repr(float(v))), "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


# -- validation ---------------------------------------------------------------


def _bad_token(s) -> bool:
    return (
        not isinstance(s, str)
        or not s
        or s != s.strip()
        or any(c in ",[]" for c in s)
        or any(c in "\r\n\t" for c in s)
    )


def _finite_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _validate_clause(i: int, c: Clause) -> list[Violation]:
    out = []

    def bad(code, msg):
        out.append(Violation(code, i, msg))

    k = c.kind
    if k in LIST_KINDS:
        if not c.keywords:
            bad("EMPTY_KEYWORDS", f"{k.value} clause needs at least one keyword")
        for kw in c.keywords:
            if _bad_token(kw):
                bad("BAD_KEYWORD", f"keyword {kw!r} is empty, padded or contains , [ ]")
        if k is ClauseKind.DIRECTION:
            for kw in c.keywords:
                if kw not in DIRECTIONS:
                    bad("BAD_DIRECTION", f"{kw!r} is not one of {', '.join(DIRECTIONS)}")
        if k is ClauseKind.VEHICLE_CLASS and c.polarity not in (ALLOWED, PROHIBITED):
            bad("BAD_POLARITY", f"polarity must be {ALLOWED!r} or {PROHIBITED!r}")
    elif c.keywords:
        bad("UNEXPECTED_KEYWORDS", f"{k.value} clause takes no keyword list")

    if k is ClauseKind.SPEED_RANGE:
        if not _finite_number(c.hi) or c.hi <= 0:
            bad("SPEED_HI_NONPOSITIVE", "upper speed limit must be a positive number")
        if c.lo is not None:
            if not _finite_number(c.lo) or c.lo < 0:
                bad("SPEED_LO_NEGATIVE", "lower speed limit must be a non-negative number")
            elif _finite_number(c.hi) and c.lo >= c.hi:
                bad("SPEED_LO_GE_HI", f"lower limit {c.lo} is not below upper limit {c.hi}")
    elif k is ClauseKind.DIMENSION_LIMIT:
        if c.dimension not in DIMENSION_UNITS:
            bad("BAD_DIMENSION", f"dimension must be one of {', '.join(DIMENSION_UNITS)}")
        if not _finite_number(c.value) or c.value <= 0:
            bad("DIMENSION_NONPOSITIVE", "dimension limit must be a positive number")
    elif k is ClauseKind.DISTANCE_KEEP:
        if not _finite_number(c.value) or c.value <= 0:
            bad("DISTANCE_NONPOSITIVE", "distance must be a positive number")
    elif k is ClauseKind.FREE_TEXT:
        t = c.text
        if not isinstance(t, str) or not t:
            bad("EMPTY_FREE_TEXT", "free text must be non-empty")
        elif t != t.strip() or any(ch in _RESERVED or ch in "\r\n\t" for ch in t):
            bad("BAD_FREE_TEXT", "free text may not be padded or contain , . [ ]")
        elif any(t.startswith(h) for h in _HEADS):
            bad("BAD_FREE_TEXT", "free text may not start with a clause head")
    return out


def validate(desc: StructuredDescription) -> list[Violation]:
    """Every invariant violation in ``desc``; an empty list means valid."""
    out = []
    if desc.subject not in SUBJECTS:
        out.append(Violation("BAD_SUBJECT", None, f"subject must be 'lane' or 'road', got {desc.subject!r}"))
    if not desc.clauses:
        out.append(Violation("EMPTY_CLAUSES", None, "a description needs at least one clause"))
    speeds = 0
    dims = {}
    for i, c in enumerate(desc.clauses):
        if not isinstance(c, Clause):
            out.append(Violation("BAD_CLAUSE", i, "not a clause"))
            continue
        out.extend(_validate_clause(i, c))
        if c.kind is ClauseKind.SPEED_RANGE:
            speeds += 1
            if speeds == 2:
                out.append(Violation("DUPLICATE_SPEED", i, "at most one speed clause is allowed"))
        elif c.kind is ClauseKind.DIMENSION_LIMIT and c.dimension in DIMENSION_UNITS:
            dims[c.dimension] = dims.get(c.dimension, 0) + 1
            if dims[c.dimension] == 2:
                out.append(Violation("DUPLICATE_DIMENSION", i, f"more than one {c.dimension} limit"))
    return out


def ensure_valid(desc: StructuredDescription) -> StructuredDescription:
    problems = validate(desc)
    if problems:
        raise InvalidDescription(problems)
    return desc


# -- serialization ------------------------------------------------------------


def _render_list(items) -> str:
    return "[" + ", ".join(items) + "]"


def render_clause(c: Clause, keywords=None) -> str:
    """Text of one clause; ``keywords`` overrides the clause's keyword order."""
    kws = c.keywords if keywords is None else keywords
    k = c.kind
    if k is ClauseKind.DIRECTION:
        return "allows driving " + _render_list(kws)
    if k is ClauseKind.DESTINATION:
        return "heading to " + _render_list(kws)
    if k is ClauseKind.VEHICLE_CLASS:
        head = "restricted to " if c.polarity == ALLOWED else "prohibited for "
        return head + _render_list(kws)
    if k is ClauseKind.SPEED_RANGE:
        if c.lo is None:
            return f"with speed limited to {format_number(c.hi)} km/h"
        return f"with speed limited from {format_number(c.lo)} to {format_number(c.hi)} km/h"
    if k is ClauseKind.DIMENSION_LIMIT:
        return f"with {c.dimension} limited to {format_number(c.value)} {DIMENSION_UNITS[c.dimension]}"
    if k is ClauseKind.DISTANCE_KEEP:
        return f"keeping distance over {format_number(c.value)} m"
    return c.text


def join_clauses(subject: str, rendered) -> str:
    return f"this {subject} " + ", ".join(rendered) + "."


def serialize(desc: StructuredDescription) -> str:
    ensure_valid(desc)
    return join_clauses(desc.subject, [render_clause(c) for c in desc.clauses])


# -- parsing ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message, expected=(), pos=None):
        pos = self.pos if pos is None else pos
        raise ParseError(message, len(self.text[:pos].encode("utf-8")), expected)

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            self.fail("unexpected input", [s])
        self.pos += len(s)

    def number(self):
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.fail("expected a number", ["<number>"])
        self.pos = m.end()
        return _num(m.group())

    def keyword_list(self) -> tuple[str, ...]:
        return tuple(kw for kw, _ in self.located_keywords())

    def located_keywords(self) -> list[tuple[str, int]]:
        self.expect("[")
        items = []
        while True:
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] not in ",[]":
                self.pos += 1
            kw = self.text[start:self.pos]
            if _bad_token(kw):
                self.fail("malformed keyword", ["<keyword>"], pos=start)
            items.append((kw, start))
            if self.peek(", "):
                self.pos += 2
            elif self.peek("]"):
                self.pos += 1
                return items
            else:
                self.fail("unterminated keyword list", [", ", "]"])

    def clause(self) -> Clause:
        start = self.pos
        for head, kind in _HEADS.items():
            if self.peek(head):
                self.pos += len(head)
                return self.clause_body(head, kind)
        # free text: everything up to the clause terminator
        while self.pos < len(self.text) and self.text[self.pos] not in _RESERVED:
            self.pos += 1
        raw = self.text[start:self.pos]
        if not raw or (self.pos < len(self.text) and self.text[self.pos] in "[]"):
            self.fail("unknown clause head", list(_HEADS) + ["<free text>"], pos=start)
        if raw != raw.strip() or any(c in "\r\n\t" for c in raw):
            self.fail("free text may not be padded", ["<free text>"], pos=start)
        return Clause(ClauseKind.FREE_TEXT, text=raw)

    def clause_body(self, head: str, kind: ClauseKind) -> Clause:
        if kind is ClauseKind.DIRECTION:
            located = self.located_keywords()
            for kw, at in located:
                if kw not in DIRECTIONS:
                    self.fail(f"unknown direction {kw!r}", DIRECTIONS, pos=at)
            return Clause(kind, tuple(kw for kw, _ in located))
        if kind is ClauseKind.DESTINATION:
            return Clause(kind, self.keyword_list())
        if kind is ClauseKind.VEHICLE_CLASS:
            polarity = ALLOWED if head.startswith("restricted") else PROHIBITED
            return Clause(kind, self.keyword_list(), polarity=polarity)
        if kind is ClauseKind.SPEED_RANGE:
            lo = None
            if self.peek("from "):
                self.pos += 5
                lo = self.number()
                self.expect(" ")
            elif not self.peek("to "):
                self.fail("unexpected input", ["from ", "to "])
            self.expect("to ")
            hi = self.number()
            self.expect(" km/h")
            return Clause(kind, lo=lo, hi=hi)
        if kind is ClauseKind.DIMENSION_LIMIT:
            dimension = head.split()[1]
            value = self.number()
            self.expect(" " + DIMENSION_UNITS[dimension])
            return Clause(kind, dimension=dimension, value=value)
        value = self.number()
        self.expect(" m")
        return Clause(kind, value=value)

    def description(self, desc_id: str) -> StructuredDescription:
        if self.peek("this lane "):
            subject = "lane"
        elif self.peek("this road "):
            subject = "road"
        else:
            self.fail("expected a subject", ["this lane ", "this road "])
        self.pos += len("this lane ")
        clauses = [self.clause()]
        while self.peek(", "):
            self.pos += 2
            clauses.append(self.clause())
        self.expect(".")
        if self.pos != len(self.text):
            self.fail("trailing input after the final period", ["<end of text>"])
        desc = StructuredDescription(desc_id, subject, tuple(clauses))
        problems = validate(desc)
        if problems:
            self.fail("invalid description: " + ", ".join(p.code for p in problems), pos=0)
        return desc


def parse_description(text: str, desc_id: str = "") -> StructuredDescription:
    if not isinstance(text, str):
        raise ParseError("input is not text", 0)
    if not text:
        raise ParseError("empty input", 0, ["this lane ", "this road "])
    return _Parser(text).description(desc_id)


# -- canonical form -----------------------------------------------------------


def canonicalize(desc: StructuredDescription) -> StructuredDescription:
    """Clauses in fixed kind order then by text; keywords sorted within clauses."""
    clauses = [replace(c, keywords=tuple(sorted(c.keywords))) for c in desc.clauses]
    clauses.sort(key=lambda c: (KIND_ORDER[c.kind], render_clause(c)))
    return replace(desc, clauses=tuple(clauses))


def scope_of(desc: StructuredDescription) -> str:
    return desc.subject
