"""Bounded search for action sequences explaining a state discrepancy.

Given a remembered state, an observed state, and a blind window, enumerate
ground-action sequences (breadth-first, by length) whose execution maps the
remembered state onto the observed one. Sequences are timed canonically at
consecutive ticks strictly inside the window, so the result is quotiented by
time-shift. Output order is fully deterministic: length first, then
lexicographic position of each step in the ground-action universe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .actions import GroundAction, Occurrence, Plan, Vocabulary, apply, progress
from .errors import NoExplanationWithinBound, NotSubinterval
from .intervals import Interval
from .sections import Section, stalk_at

MODES = ("first-minimal", "all-minimal", "all-up-to-bound")

DEFAULT_MAX_LEN = 10


@dataclass(frozen=True)
class DiscrepancyQuery:
    mem_state: dict[str, bool]
    obs_state: dict[str, bool]
    window: Interval
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if set(self.mem_state) != set(self.obs_state):
            raise ValueError("remembered and observed states declare different fluents")

    def interior_ticks(self) -> int:
        return max(0, len(self.window) - 2)


@dataclass(frozen=True)
class Explanation:
    steps: Plan
    length: int

    def to_json(self) -> dict:
        return {"steps": [o.to_json() for o in self.steps], "length": self.length}


@dataclass(frozen=True)
class ExplanationSet:
    explanations: tuple[Explanation, ...]
    exhaustive_up_to: int

    def to_json(self) -> dict:
        return {
            "explanations": [e.to_json() for e in self.explanations],
            "exhaustiveUpTo": self.exhaustive_up_to,
        }


def _state_key(state: dict[str, bool], fluents: tuple[str, ...]) -> tuple[bool, ...]:
    return tuple(state[f] for f in fluents)


def _step(
    key: tuple[bool, ...],
    g: GroundAction,
    fluents: tuple[str, ...],
    index: dict[str, int],
    check_preconditions: bool,
) -> tuple[bool, ...] | None:
    if check_preconditions:
        for f, expected in g.preconditions:
            if key[index[f]] != expected:
                return None
    out = list(key)
    for f in g.initiates:
        out[index[f]] = True
    for f in g.terminates:
        out[index[f]] = False
    return tuple(out)


def _timed_plan(word: tuple[int, ...], universe, window: Interval) -> Plan:
    steps = []
    for i, gi in enumerate(word):
        g = universe[gi]
        steps.append(Occurrence(g.schema, g.args, window.start + 1 + i))
    return Plan(tuple(steps))


def abduce(
    q: DiscrepancyQuery,
    vocab: Vocabulary,
    mode: str = "first-minimal",
    check_preconditions: bool = True,
) -> ExplanationSet:
    """Enumerate explanations of the discrepancy, shortest first.

    first-minimal returns the single lexicographically-first shortest
    explanation, all-minimal every shortest one, all-up-to-bound every
    explanation up to the length bound (capped by the window's interior).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    universe = vocab.ground_actions()
    fluents = tuple(sorted(q.mem_state))
    index = {f: i for i, f in enumerate(fluents)}
    start = _state_key(q.mem_state, fluents)
    goal = _state_key(q.obs_state, fluents)
    bound = min(q.max_len, q.interior_ticks())

    # Layered reachability DAG: layer[k] maps state -> parent edges
    # (prev_state, universe_index). Layer 0 has the start state, no parents.
    layers: list[dict[tuple[bool, ...], list[tuple[tuple[bool, ...], int]]]] = [
        {start: []}
    ]
    hits: list[int] = [0] if start == goal else []

    for depth in range(1, bound + 1):
        if hits and mode in ("first-minimal", "all-minimal"):
            break
        previous = layers[-1]
        current: dict[tuple[bool, ...], list[tuple[tuple[bool, ...], int]]] = {}
        for state in previous:
            for gi, g in enumerate(universe):
                nxt = _step(state, g, fluents, index, check_preconditions)
                if nxt is None:
                    continue
                current.setdefault(nxt, []).append((state, gi))
        layers.append(current)
        if goal in current:
            hits.append(depth)

    exhaustive_up_to = len(layers) - 1
    if not hits:
        raise NoExplanationWithinBound(bound)

    def words_ending_at(state: tuple[bool, ...], depth: int) -> list[tuple[int, ...]]:
        if depth == 0:
            return [()] if state == start else []
        out = []
        for prev, gi in layers[depth].get(state, []):
            out.extend(w + (gi,) for w in words_ending_at(prev, depth - 1))
        return out

    if mode == "all-up-to-bound":
        depths = hits
    else:
        depths = hits[:1]
    words: list[tuple[int, ...]] = []
    for d in depths:
        words.extend(sorted(words_ending_at(goal, d)))
    if mode == "first-minimal":
        words = words[:1]

    explanations = tuple(
        Explanation(steps=_timed_plan(w, universe, q.window), length=len(w))
        for w in words
    )
    return ExplanationSet(explanations, exhaustive_up_to)


def verify_explanation(
    e: Explanation,
    q: DiscrepancyQuery,
    vocab: Vocabulary,
    check_preconditions: bool = True,
) -> bool:
    """Replay the steps and confirm they land on the observed state in-window."""
    if any(not (q.window.start < s.at < q.window.end) for s in e.steps):
        return False
    try:
        result = progress(q.mem_state, e.steps, vocab, check_preconditions)
    except Exception:
        return False
    return result == q.obs_state


def reconcile(mem: Section, explanation: Explanation, q: DiscrepancyQuery, vocab: Vocabulary) -> Section:
    """Replay a verified explanation across the blind window of a memory section.

    Ticks up to the window start keep their remembered values; later ticks are
    recomputed from the window-start stalk under the explanation, so the stalk
    at the window end matches the observed state.
    """
    window = q.window
    if window.start not in mem.domain:
        raise NotSubinterval(
            f"window start {window.start} outside memory domain {mem.domain.to_json()}"
        )
    end = max(mem.domain.end, window.end)
    domain = Interval(mem.domain.start, end)
    state = stalk_at(mem, window.start)
    steps = {s.at: s for s in explanation.steps}
    columns: dict[str, list[bool]] = {
        f: list(mem.valuation[f][: window.start - mem.domain.start + 1])
        for f in mem.valuation
    }
    for t in range(window.start, end):
        if t in steps:
            occ = steps[t]
            point = Section.constant(Interval(t, t + 1), state)
            point = apply(occ, point, vocab, check_preconditions=False)
            state = stalk_at(point, t + 1)
        for f in columns:
            columns[f].append(state[f])
    return Section(domain, {f: tuple(v) for f, v in columns.items()})
