"""Per-agent knowledge bases and peer-to-peer merging.

A knowledge base holds a family of mutually compatible sections over whatever
intervals the agent has data for, plus a record of which ticks were directly
observed (as opposed to carried forward or adopted from peers). Merging is
transactional: families combine and connected runs glue eagerly when every
cross-pair agrees on its overlap; a single disagreement obstructs the merge,
leaves both bases untouched, and yields the conflict list that seeds an
abductive query.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .abduction import DEFAULT_MAX_LEN, DiscrepancyQuery
from .errors import NotObstructed, VocabularyMismatch
from .intervals import Interval, connected_components, hull, normalize
from .sections import Section, SheafRole, conflicts_between, glue, stalk_at

OUTCOME_MERGED = "Merged"
OUTCOME_ALREADY_CONSISTENT = "AlreadyConsistent"
OUTCOME_OBSTRUCTED = "Obstructed"


@dataclass(frozen=True)
class KnowledgeBase:
    agent_id: str
    family: tuple[Section, ...] = ()
    version: int = 0
    observed: tuple[Interval, ...] = ()
    role: SheafRole = SheafRole.KNOW

    def __post_init__(self):
        for i, a in enumerate(self.family):
            for b in self.family[i + 1:]:
                bad = conflicts_between(a, b)
                if bad:
                    t, f, va, vb = bad[0]
                    raise ValueError(
                        f"family self-conflict at t={t} on {f!r}: {va} vs {vb}"
                    )

    def fluents(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for s in self.family:
            out = out | frozenset(s.valuation)
        return out

    def section_at(self, t: int) -> Section | None:
        for s in self.family:
            if t in s.domain:
                return s
        return None


@dataclass(frozen=True)
class MergeReport:
    outcome: str
    conflicts: tuple[tuple[int, str, bool, bool], ...]
    result_version: int

    def to_record(self, agent_a: str, agent_b: str) -> dict:
        return {
            "event": "merge",
            "agents": [agent_a, agent_b],
            "outcome": self.outcome,
            "conflicts": [list(c) for c in self.conflicts],
        }


def _glue_components(family) -> tuple[Section, ...]:
    """Glue each gap-free run of sections into one; keep runs apart otherwise."""
    sections = list(family)
    if not sections:
        return ()
    groups = connected_components([s.domain for s in sections])
    glued = []
    for group in groups:
        members = []
        starts = {(iv.start, iv.end) for iv in group}
        for s in sections:
            if (s.domain.start, s.domain.end) in starts:
                members.append(s)
        glued.append(glue(members) if len(members) > 1 else members[0])
    return tuple(sorted(glued, key=lambda s: (s.domain.start, s.domain.end)))


def merge(a: KnowledgeBase, b: KnowledgeBase) -> tuple[KnowledgeBase, MergeReport]:
    """Fold b's knowledge into a.

    Returns the updated base and a report. Outcomes: Merged when the combined
    family differs from either input, AlreadyConsistent when both sides
    already knew everything, Obstructed (input returned unchanged) when any
    cross-pair disagrees on an overlap.
    """
    if a.family and b.family and a.fluents() != b.fluents():
        raise VocabularyMismatch(
            f"bases {a.agent_id!r} and {b.agent_id!r} use different fluent sets"
        )
    conflicts: list[tuple[int, str, bool, bool]] = []
    for sa in a.family:
        for sb in b.family:
            conflicts.extend(conflicts_between(sa, sb))
    if conflicts:
        conflicts = sorted(set(conflicts))
        return a, MergeReport(OUTCOME_OBSTRUCTED, tuple(conflicts), a.version)

    combined = _glue_components(tuple(a.family) + tuple(b.family))
    unchanged = combined == _glue_components(a.family) == _glue_components(b.family)
    outcome = OUTCOME_ALREADY_CONSISTENT if unchanged else OUTCOME_MERGED
    merged = replace(
        a,
        family=combined,
        version=a.version + 1,
        observed=normalize(a.observed + b.observed) if (a.observed or b.observed) else (),
    )
    return merged, MergeReport(outcome, (), merged.version)


def coverage(kb: KnowledgeBase) -> tuple[Interval, ...]:
    """Maximal gap-free hulls of the family's domains."""
    if not kb.family:
        return ()
    return tuple(hull(g) for g in connected_components([s.domain for s in kb.family]))


def obstruction_to_query(
    report: MergeReport,
    a: KnowledgeBase,
    b: KnowledgeBase,
    max_len: int = DEFAULT_MAX_LEN,
) -> DiscrepancyQuery:
    """Turn a merge obstruction into an abductive query.

    The remembered state is a's stalk at the earliest conflict tick, the
    observed state is b's, and the blind window is the largest stretch a has
    data for that was not observed by both agents (zero-width at the conflict
    tick when no such stretch exists).
    """
    if report.outcome != OUTCOME_OBSTRUCTED:
        raise NotObstructed(f"merge outcome was {report.outcome}")
    t_star = report.conflicts[0][0]
    sec_a = a.section_at(t_star)
    sec_b = b.section_at(t_star)
    if sec_a is None or sec_b is None:
        raise NotObstructed(f"no section covers conflict tick {t_star}")

    covered = set()
    for s in a.family:
        covered.update(s.domain.ticks())
    jointly = set()
    for ia in a.observed:
        for ib in b.observed:
            lo, hi = max(ia.start, ib.start), min(ia.end, ib.end)
            jointly.update(range(lo, hi + 1))
    blind = sorted(covered - jointly)
    window = Interval(t_star, t_star)
    if blind:
        runs = connected_components([Interval(t, t) for t in blind])
        candidates = [hull(r) for r in runs]
        candidates.sort(key=lambda iv: (-len(iv), iv.start))
        window = candidates[0]
    return DiscrepancyQuery(
        mem_state=stalk_at(sec_a, t_star),
        obs_state=stalk_at(sec_b, t_star),
        window=window,
        max_len=max_len,
    )
