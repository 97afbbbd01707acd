"""Histories over intervals: sections, restriction, stalks, and gluing.

A section assigns every (tick, fluent) in its domain a boolean. Restriction
projects a section onto a subinterval; a stalk is the valuation at a single
tick. Compatible sections over a gap-free family of intervals glue into the
unique section on the hull that restricts back to each part.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import (
    IncompatibleSections,
    InvalidCover,
    NotACover,
    NotSubinterval,
    OutOfDomain,
    VocabularyMismatch,
)
from .intervals import Cover, Interval, TimePoint, hull, is_subinterval, overlap, validate_cover


class SheafRole(enum.Enum):
    WORLD = "World"
    MEM = "Mem"
    GOAL = "Goal"
    KNOW = "Know"


@dataclass(frozen=True, eq=True)
class Section:
    """Total fluent valuation over an interval.

    valuation maps each fluent name to one boolean per tick, index 0 at
    domain.start.
    """

    domain: Interval
    valuation: dict[str, tuple[bool, ...]]

    def __post_init__(self):
        n = len(self.domain)
        for fluent, values in self.valuation.items():
            if not fluent:
                raise ValueError("empty fluent name")
            if len(values) != n:
                raise ValueError(
                    f"valuation for {fluent!r} has {len(values)} entries, domain needs {n}"
                )

    def fluents(self) -> tuple[str, ...]:
        return tuple(self.valuation)

    def value_at(self, fluent: str, t: TimePoint) -> bool:
        if t not in self.domain:
            raise OutOfDomain(f"t={t} outside domain {self.domain.to_json()}")
        return self.valuation[fluent][t - self.domain.start]

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "valuation": {f: list(v) for f, v in self.valuation.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Section":
        domain = Interval.from_json(data["domain"])
        valuation = {f: tuple(bool(x) for x in v) for f, v in data["valuation"].items()}
        return cls(domain, valuation)

    @classmethod
    def constant(cls, domain: Interval, state: dict[str, bool]) -> "Section":
        n = len(domain)
        return cls(domain, {f: (bool(v),) * n for f, v in state.items()})


def restrict(s: Section, sub: Interval) -> Section:
    if not is_subinterval(sub, s.domain):
        raise NotSubinterval(
            f"{sub.to_json()} escapes section domain {s.domain.to_json()}"
        )
    lo = sub.start - s.domain.start
    hi = sub.end - s.domain.start + 1
    return Section(sub, {f: v[lo:hi] for f, v in s.valuation.items()})


def stalk_at(s: Section, t: TimePoint) -> dict[str, bool]:
    if t not in s.domain:
        raise OutOfDomain(f"t={t} outside domain {s.domain.to_json()}")
    i = t - s.domain.start
    return {f: v[i] for f, v in s.valuation.items()}


def check_locality(sections: tuple[Section, Section], cover: Cover) -> bool:
    """Verify the locality axiom on one candidate counterexample.

    Returns whether 'agrees on every part implies equal' holds for the pair;
    a False return would exhibit two distinct sections indistinguishable on
    the cover.
    """
    a, b = sections
    if a.domain != cover.target or b.domain != cover.target:
        raise InvalidCover("sections must share the cover target as domain")
    if not validate_cover(cover):
        raise InvalidCover(f"parts do not cover {cover.target.to_json()}")
    agree = all(restrict(a, p) == restrict(b, p) for p in cover.parts)
    return (not agree) or a == b


def _first_conflict(a: Section, b: Section) -> tuple[int, str, bool, bool] | None:
    common = overlap(a.domain, b.domain)
    if common is None:
        return None
    for t in common.ticks():
        for fluent in a.valuation:
            va = a.value_at(fluent, t)
            vb = b.value_at(fluent, t)
            if va != vb:
                return (t, fluent, va, vb)
    return None


def conflicts_between(a: Section, b: Section) -> list[tuple[int, str, bool, bool]]:
    """All (tick, fluent, value_a, value_b) disagreements on the overlap."""
    common = overlap(a.domain, b.domain)
    if common is None:
        return []
    out = []
    for t in common.ticks():
        for fluent in sorted(a.valuation):
            va = a.value_at(fluent, t)
            vb = b.value_at(fluent, t)
            if va != vb:
                out.append((t, fluent, va, vb))
    return out


def glue(parts) -> Section:
    """Merge pairwise-compatible sections into the unique section on the hull.

    The part domains must cover the hull with no gaps.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("glue of an empty family")
    fluent_set = set(parts[0].valuation)
    for p in parts[1:]:
        if set(p.valuation) != fluent_set:
            raise VocabularyMismatch("sections declare different fluent sets")
    target = hull([p.domain for p in parts])
    if not validate_cover(Cover(target, tuple(p.domain for p in parts))):
        raise NotACover(f"part domains leave gaps in {target.to_json()}")
    ordered = sorted(parts, key=lambda p: (p.domain.start, p.domain.end))
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            conflict = _first_conflict(a, b)
            if conflict is not None:
                raise IncompatibleSections(*conflict)
    fluents = tuple(parts[0].valuation)
    columns: dict[str, list[bool]] = {f: [False] * len(target) for f in fluents}
    for p in ordered:
        base = p.domain.start - target.start
        for f in fluents:
            values = p.valuation[f]
            for k in range(len(p.domain)):
                columns[f][base + k] = values[k]
    return Section(target, {f: tuple(v) for f, v in columns.items()})
