"""Discrete time intervals, inclusions, and covering families.

Time is a non-negative integer tick. Intervals are closed, may be a single
point, and are ordered by inclusion. A cover of an interval is a finite
family of subintervals whose union hits every tick of the target; overlaps
between parts are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass

# A tick. Kept as a plain int everywhere; named for signatures.
TimePoint = int


@dataclass(frozen=True, order=True)
class Interval:
    start: TimePoint
    end: TimePoint

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"interval start must be >= 0, got {self.start}")
        if self.start > self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end}]")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, t: TimePoint) -> bool:
        return self.start <= t <= self.end

    def ticks(self) -> range:
        return range(self.start, self.end + 1)

    def to_json(self) -> list[int]:
        return [self.start, self.end]

    @classmethod
    def from_json(cls, data) -> "Interval":
        if not (isinstance(data, (list, tuple)) and len(data) == 2):
            raise ValueError(f"interval must be a [start, end] pair, got {data!r}")
        return cls(int(data[0]), int(data[1]))


@dataclass(frozen=True)
class Cover:
    target: Interval
    parts: tuple[Interval, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("cover needs at least one part")


def is_subinterval(inner: Interval, outer: Interval) -> bool:
    return outer.start <= inner.start and inner.end <= outer.end


def validate_cover(c: Cover) -> bool:
    """True iff every part sits inside the target and no target tick is missed."""
    if not all(is_subinterval(p, c.target) for p in c.parts):
        return False
    covered = set()
    for p in c.parts:
        covered.update(p.ticks())
    return covered == set(c.target.ticks())


def overlap(a: Interval, b: Interval) -> Interval | None:
    start = max(a.start, b.start)
    end = min(a.end, b.end)
    if start > end:
        return None
    return Interval(start, end)


def hull(intervals: list[Interval] | tuple[Interval, ...]) -> Interval:
    if not intervals:
        raise ValueError("hull of an empty family")
    return Interval(min(i.start for i in intervals), max(i.end for i in intervals))


def connected_components(intervals) -> list[list[Interval]]:
    """Group intervals whose union has no gaps; adjacency ([0,1],[2,3]) counts."""
    ordered = sorted(intervals, key=lambda i: (i.start, i.end))
    groups: list[list[Interval]] = []
    reach = None
    for iv in ordered:
        if reach is not None and iv.start <= reach + 1:
            groups[-1].append(iv)
            reach = max(reach, iv.end)
        else:
            groups.append([iv])
            reach = iv.end
    return groups


def normalize(intervals) -> tuple[Interval, ...]:
    """Merge overlapping/adjacent intervals into disjoint sorted hulls."""
    return tuple(hull(group) for group in connected_components(intervals))
