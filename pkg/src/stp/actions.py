"""Event-calculus actions over histories.

An action schema declares preconditions plus initiates/terminates effects as
fluent-name templates; grounding substitutes argument identifiers into the
templates ("at_{x}" with x=A gives "at_A"). Applying an occurrence to a
section rewrites the strict future of the occurrence tick and leaves the past
untouched, so application commutes with restriction to any subinterval that
contains the tick.

Narrative evaluation follows the inertia reading: a fluent holds at t if it
was initiated strictly before t (or held initially) and no occurrence strictly
in between terminates it. Effects become visible at t+1. Per-narrative query
results are tabled so repeated sweeps never recompute.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass, field

from .errors import (
    PreconditionFailed,
    TemporalOverlap,
    TimeOutsideDomain,
    UnknownAction,
    UnknownFluent,
)
from .intervals import Interval, TimePoint, is_subinterval
from .sections import Section, restrict, stalk_at


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[str, ...]
    preconditions: tuple[tuple[str, bool], ...]
    initiates: tuple[str, ...]
    terminates: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.parameters)) != len(self.parameters):
            raise ValueError(f"duplicate parameters in schema {self.name!r}")
        if set(self.initiates) & set(self.terminates):
            raise ValueError(f"schema {self.name!r} initiates and terminates the same fluent")

    def bind(self, args: tuple[str, ...]) -> "GroundAction":
        if len(args) != len(self.parameters):
            raise UnknownAction(
                f"{self.name} expects {len(self.parameters)} args, got {len(args)}"
            )
        env = dict(zip(self.parameters, args))

        def inst(template: str) -> str:
            try:
                return template.format_map(env)
            except KeyError as exc:
                raise UnknownFluent(
                    f"template {template!r} in {self.name!r} references unknown parameter {exc}"
                ) from exc

        return GroundAction(
            schema=self.name,
            args=tuple(args),
            preconditions=tuple((inst(f), v) for f, v in self.preconditions),
            initiates=tuple(inst(f) for f in self.initiates),
            terminates=tuple(inst(f) for f in self.terminates),
        )


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple[str, ...]
    preconditions: tuple[tuple[str, bool], ...]
    initiates: tuple[str, ...]
    terminates: tuple[str, ...]

    def label(self) -> str:
        return f"{self.schema}({', '.join(self.args)})"


@dataclass(frozen=True)
class Vocabulary:
    """Fixed signature: fluent names, action schemas, and ground constants."""

    fluents: tuple[str, ...]
    actions: tuple[ActionSchema, ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.fluents)) != len(self.fluents):
            raise ValueError("duplicate fluent names")
        names = [a.name for a in self.actions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate action names")

    def schema(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise UnknownAction(f"no action schema named {name!r}")

    def ground(self, name: str, args) -> GroundAction:
        g = self.schema(name).bind(tuple(args))
        for f in itertools.chain(
            (f for f, _ in g.preconditions), g.initiates, g.terminates
        ):
            if f not in self.fluents:
                raise UnknownFluent(f"{g.label()} references unknown fluent {f!r}")
        return g

    def ground_actions(self) -> tuple[GroundAction, ...]:
        """Every well-formed grounding, in schema order then argument order.

        Groundings whose instantiated fluents fall outside the vocabulary, or
        whose effects collapse (initiate and terminate the same fluent), are
        skipped.
        """
        out = []
        known = set(self.fluents)
        for schema in self.actions:
            for args in itertools.product(self.constants, repeat=len(schema.parameters)):
                try:
                    g = schema.bind(args)
                except UnknownFluent:
                    continue
                mentioned = {f for f, _ in g.preconditions} | set(g.initiates) | set(g.terminates)
                if not mentioned <= known:
                    continue
                if set(g.initiates) & set(g.terminates):
                    continue
                out.append(g)
        return tuple(out)


@dataclass(frozen=True)
class Occurrence:
    action: str
    args: tuple[str, ...]
    at: TimePoint

    def __post_init__(self):
        if self.at < 0:
            raise ValueError("occurrence time must be >= 0")

    def to_json(self) -> dict:
        return {"action": self.action, "args": list(self.args), "at": self.at}

    @classmethod
    def from_json(cls, data: dict) -> "Occurrence":
        return cls(data["action"], tuple(str(a) for a in data["args"]), int(data["at"]))


@dataclass(frozen=True)
class Plan:
    steps: tuple[Occurrence, ...] = ()

    def __post_init__(self):
        times = [s.at for s in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("plan steps must have strictly increasing times")

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def compose(p: Plan, q: Plan) -> Plan:
    if p.steps and q.steps and q.steps[0].at <= p.steps[-1].at:
        raise TemporalOverlap(
            f"second plan starts at {q.steps[0].at}, first ends at {p.steps[-1].at}"
        )
    return Plan(p.steps + q.steps)


@dataclass
class Narrative:
    """Timed occurrences plus an initial valuation; queries are memoized."""

    occurrences: tuple[Occurrence, ...]
    initial: dict[str, bool]
    vocabulary: Vocabulary
    _effects: dict[str, list[tuple[int, int, bool]]] | None = field(
        default=None, repr=False, compare=False
    )
    _cache: dict[tuple[str, int], bool] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        # stable sort: same-tick occurrences keep their listed order
        self.occurrences = tuple(sorted(self.occurrences, key=lambda o: o.at))

    def _index(self) -> dict[str, list[tuple[int, int, bool]]]:
        # Per fluent: (time, sequence, initiated?) sorted; last entry before a
        # query tick decides the value, falling back to the initial valuation.
        if self._effects is None:
            effects: dict[str, list[tuple[int, int, bool]]] = {f: [] for f in self.initial}
            for seq, occ in enumerate(self.occurrences):
                g = self.vocabulary.ground(occ.action, occ.args)
                for f in g.initiates:
                    effects[f].append((occ.at, seq, True))
                for f in g.terminates:
                    effects[f].append((occ.at, seq, False))
            for rows in effects.values():
                rows.sort()
            self._effects = effects
        return self._effects

    def extended(self, extra: tuple[Occurrence, ...]) -> "Narrative":
        # New object, fresh caches: extending invalidates wholesale.
        return Narrative(self.occurrences + tuple(extra), dict(self.initial), self.vocabulary)


def holds_at(n: Narrative, fluent: str, t: TimePoint) -> bool:
    if fluent not in n.initial:
        raise UnknownFluent(f"fluent {fluent!r} not in narrative vocabulary")
    key = (fluent, t)
    cached = n._cache.get(key)
    if cached is not None:
        return cached
    rows = n._index()[fluent]
    # latest effect strictly before t; ties at one tick resolve by sequence
    i = bisect_left(rows, (t, -1, False)) - 1
    value = rows[i][2] if i >= 0 else n.initial[fluent]
    n._cache[key] = value
    return value


def clipped(n: Narrative, t1: TimePoint, fluent: str, t2: TimePoint) -> bool:
    """True iff some occurrence strictly between t1 and t2 terminates the fluent."""
    if fluent not in n.initial:
        raise UnknownFluent(f"fluent {fluent!r} not in narrative vocabulary")
    if t1 > t2:
        raise ValueError(f"window ({t1}, {t2}) is reversed")
    return any(
        not initiated and t1 < at < t2 for at, _, initiated in n._index()[fluent]
    )


def apply(
    action: Occurrence,
    s: Section,
    vocab: Vocabulary,
    check_preconditions: bool = True,
) -> Section:
    """Rewrite the strict future of the occurrence tick by its effects."""
    if action.at not in s.domain:
        raise TimeOutsideDomain(
            f"occurrence at t={action.at} outside domain {s.domain.to_json()}"
        )
    g = vocab.ground(action.action, action.args)
    now = stalk_at(s, action.at)
    if check_preconditions:
        for f, expected in g.preconditions:
            if f not in now:
                raise UnknownFluent(f"precondition fluent {f!r} not in section")
            if now[f] != expected:
                raise PreconditionFailed(f, expected, now[f])
    cut = action.at - s.domain.start + 1
    tail = len(s.domain) - cut
    if tail <= 0:
        return s
    valuation = dict(s.valuation)
    for f in g.initiates:
        valuation[f] = valuation[f][:cut] + (True,) * tail
    for f in g.terminates:
        valuation[f] = valuation[f][:cut] + (False,) * tail
    return Section(s.domain, valuation)


def check_naturality(
    action: Occurrence, s: Section, sub: Interval, vocab: Vocabulary
) -> bool:
    """Apply-then-restrict must equal restrict-then-apply."""
    if not is_subinterval(sub, s.domain):
        raise TimeOutsideDomain(f"{sub.to_json()} escapes {s.domain.to_json()}")
    if action.at not in sub:
        raise TimeOutsideDomain(f"occurrence tick {action.at} outside {sub.to_json()}")
    whole = restrict(apply(action, s, vocab), sub)
    piecewise = apply(action, restrict(s, sub), vocab)
    return whole == piecewise


def progress(
    initial: dict[str, bool],
    plan: Plan,
    vocab: Vocabulary,
    check_preconditions: bool = True,
) -> dict[str, bool]:
    """Fold plan steps over a state; each step sees all earlier effects."""
    state = dict(initial)
    for i, step in enumerate(plan):
        g = vocab.ground(step.action, step.args)
        if check_preconditions:
            for f, expected in g.preconditions:
                if f not in state:
                    raise UnknownFluent(f"precondition fluent {f!r} not in state")
                if state[f] != expected:
                    raise PreconditionFailed(f, expected, state[f], step=i)
        for f in g.initiates:
            state[f] = True
        for f in g.terminates:
            state[f] = False
    return state
