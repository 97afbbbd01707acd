"""Deterministic multi-agent runs over a scenario.

Ticks advance from 0 to the horizon. Per tick: the world narrative (plus any
agent-injected steps) evolves the ground-truth history, agents inside their
observation windows copy the world stalk into their memories, interrupted
agents go blind and on resume reconcile any discrepancy through bounded
abduction, and scheduled meetings merge the participants' knowledge bases,
turning obstructions into further abductive queries. Everything an observer
needs lands in the trace: one event per line, canonically ordered by
(tick, phase, agent index), so identical scenarios yield byte-identical
traces regardless of worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .abduction import DiscrepancyQuery, abduce, reconcile
from .actions import Narrative, Occurrence, holds_at
from .errors import (
    NoExplanationWithinBound,
    PreconditionFailed,
    ScenarioInvalid,
    UnknownAgent,
)
from .intervals import Interval, normalize
from .knowledge import (
    OUTCOME_OBSTRUCTED,
    KnowledgeBase,
    merge,
    obstruction_to_query,
)
from .scenario import AgentSpec, Scenario, validate_scenario
from .sections import Section, stalk_at
from .spectral import diffuse

KINDS = ("Observe", "Act", "Interrupt", "Resume", "Abduce", "Merge", "Consensus")


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    seq: int
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"tick": self.tick, "seq": self.seq, "kind": self.kind, "payload": self.payload}


def serialize_trace(trace) -> str:
    return "".join(
        json.dumps(e.to_json(), sort_keys=True, separators=(",", ":")) + "\n"
        for e in trace
    )


class _Agent:
    """Mutable per-agent simulation state."""

    def __init__(self, spec: AgentSpec, fluents: tuple[str, ...]):
        self.spec = spec
        self.fluents = fluents
        self.belief: dict[str, bool] | None = None
        self.mem_start: int | None = None
        self.mem_rows: list[dict[str, bool]] = []
        self.pending: dict[str, bool] = {}  # own-action effects, visible next tick
        self.extra_sections: list[Section] = []  # adopted past chunks off the mem timeline
        self.observed: list[Interval] = []
        self.kb_version = 0

    def blind_at(self, t: int) -> bool:
        if self.spec.interruption is None:
            return False
        tick, resume = self.spec.interruption
        return tick < t < resume

    def observing_at(self, t: int) -> bool:
        return not self.blind_at(t) and any(t in w for w in self.spec.observation_windows)

    def advance_belief(self, t: int) -> None:
        if self.belief is None:
            return
        if self.pending:
            self.belief = {**self.belief, **self.pending}
            self.pending = {}
        else:
            self.belief = dict(self.belief)

    def record(self, t: int, stalk: dict[str, bool]) -> None:
        if self.mem_start is None:
            self.mem_start = t
        self.mem_rows.append(dict(stalk))

    def note_observed(self, t: int) -> None:
        self.observed = list(normalize(self.observed + [Interval(t, t)]))

    def mem_section(self) -> Section | None:
        if self.mem_start is None:
            return None
        return Section(
            Interval(self.mem_start, self.mem_start + len(self.mem_rows) - 1),
            {
                f: tuple(row[f] for row in self.mem_rows)
                for f in self.fluents
            },
        )

    def overwrite_mem(self, section: Section) -> None:
        self.mem_start = section.domain.start
        self.mem_rows = [stalk_at(section, t) for t in section.domain.ticks()]

    def knowledge_base(self) -> KnowledgeBase:
        family = list(self.extra_sections)
        mem = self.mem_section()
        if mem is not None:
            family.append(mem)
        return KnowledgeBase(
            agent_id=self.spec.id,
            family=tuple(sorted(family, key=lambda s: (s.domain.start, s.domain.end))),
            version=self.kb_version,
            observed=tuple(self.observed),
        )

    def adopt_family(self, family: tuple[Section, ...], observed, now: int) -> None:
        self.kb_version += 1
        self.observed = list(normalize(list(observed)))
        current = [s for s in family if now in s.domain]
        if current:
            self.overwrite_mem(current[0])
            self.belief = stalk_at(current[0], now)
            self.extra_sections = [s for s in family if now not in s.domain]
        else:
            self.extra_sections = list(family)


@dataclass
class RunResult:
    trace: list[TraceEvent]
    world_section: Section
    mem_sections: dict[str, Section | None]
    knowledge: dict[str, KnowledgeBase]


def _explanations_payload(result) -> dict:
    return {
        "found": True,
        "explanations": [e.to_json() for e in result.explanations],
        "exhaustiveUpTo": result.exhaustive_up_to,
    }


def simulate(sc: Scenario, workers: int = 1) -> RunResult:
    problems = validate_scenario(sc)
    if problems:
        raise ScenarioInvalid(problems)
    vocab = sc.vocabulary
    fluents = vocab.fluents
    agents = [_Agent(a, fluents) for a in sc.agents]
    world_current = {f: sc.world.initial[f] for f in fluents}
    world_rows: list[dict[str, bool]] = []
    injected: list[Occurrence] = []
    trace: list[TraceEvent] = []

    def emit(tick: int, kind: str, payload: dict) -> None:
        trace.append(TraceEvent(tick, len(trace), kind, payload))

    world_by_tick: dict[int, list[Occurrence]] = {}
    for occ in sc.world.occurrences:
        world_by_tick.setdefault(occ.at, []).append(occ)

    def agent_phase(agent: _Agent, t: int) -> list[tuple[str, dict]]:
        """Observation, interruption, and abductive repair for one agent.

        Reads only frozen world rows and the agent's own state, so agents can
        run concurrently within a tick.
        """
        events: list[tuple[str, dict]] = []
        spec = agent.spec
        agent.advance_belief(t)
        stalk = world_rows[t]
        resuming = spec.interruption is not None and t == spec.interruption[1]
        if agent.observing_at(t) or resuming:
            events.append(("Observe", {"agent": spec.id, "stalk": dict(stalk)}))
        if resuming and agent.belief is not None and agent.belief != stalk:
            window = Interval(spec.interruption[0], spec.interruption[1])
            query = DiscrepancyQuery(
                mem_state=dict(agent.belief),
                obs_state=dict(stalk),
                window=window,
                max_len=sc.abduction.max_len,
            )
            payload = {
                "agent": spec.id,
                "window": window.to_json(),
                "memState": dict(agent.belief),
                "obsState": dict(stalk),
                "mode": sc.abduction.mode,
            }
            try:
                result = abduce(
                    query, vocab, sc.abduction.mode, sc.abduction.check_preconditions
                )
                payload.update(_explanations_payload(result))
                mem = agent.mem_section()
                if mem is not None and result.explanations:
                    repaired = reconcile(mem, result.explanations[0], query, vocab)
                    agent.overwrite_mem(repaired)
            except NoExplanationWithinBound as exc:
                payload.update(
                    {"found": False, "explanations": [], "exhaustiveUpTo": exc.bound}
                )
            events.append(("Abduce", payload))
        if resuming:
            events.append(("Resume", {"agent": spec.id}))
        observed_now = agent.observing_at(t) or resuming
        if observed_now:
            agent.belief = dict(stalk)
            agent.note_observed(t)
        if agent.belief is not None and (agent.mem_start is None or len(agent.mem_rows) <= t - agent.mem_start):
            agent.record(t, agent.belief)
        if spec.interruption is not None and t == spec.interruption[0]:
            events.append(("Interrupt", {"agent": spec.id, "until": spec.interruption[1]}))
        return events

    for t in range(sc.horizon + 1):
        world_rows.append(dict(world_current))
        for occ in world_by_tick.get(t, []):
            emit(t, "Act", {"actor": "world", "occurrence": occ.to_json(), "ok": True})
            g = vocab.ground(occ.action, occ.args)
            for f in g.initiates:
                world_current[f] = True
            for f in g.terminates:
                world_current[f] = False
            injected.append(occ)

        if workers > 1 and len(agents) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_agent = list(pool.map(lambda a: agent_phase(a, t), agents))
        else:
            per_agent = [agent_phase(a, t) for a in agents]
        for events in per_agent:
            for kind, payload in events:
                emit(t, kind, payload)

        for agent in agents:
            spec = agent.spec
            away = spec.interruption is not None and spec.interruption[0] <= t < spec.interruption[1]
            for step in spec.plan:
                if step.at != t:
                    continue
                if away:
                    continue
                g = vocab.ground(step.action, step.args)
                failed = None
                for f, expected in g.preconditions:
                    if world_rows[t][f] != expected:
                        failed = PreconditionFailed(f, expected, world_rows[t][f])
                        break
                if failed is not None:
                    emit(t, "Act", {
                        "actor": spec.id,
                        "occurrence": step.to_json(),
                        "ok": False,
                        "error": str(failed),
                    })
                    continue
                emit(t, "Act", {"actor": spec.id, "occurrence": step.to_json(), "ok": True})
                injected.append(step)
                for f in g.initiates:
                    world_current[f] = True
                    agent.pending[f] = True
                for f in g.terminates:
                    world_current[f] = False
                    agent.pending[f] = False

        for tick, id_a, id_b in sc.meetings:
            if tick != t:
                continue
            agent_a = next(a for a in agents if a.spec.id == id_a)
            agent_b = next(a for a in agents if a.spec.id == id_b)
            kb_a = agent_a.knowledge_base()
            kb_b = agent_b.knowledge_base()
            merged, report = merge(kb_a, kb_b)
            emit(t, "Merge", report.to_record(id_a, id_b))
            if report.outcome == OUTCOME_OBSTRUCTED:
                # orient the abductive query at the base configured for repair
                if sc.abduction.reconcile_agent == id_b:
                    mirrored = merge(kb_b, kb_a)[1]
                    _handle_obstruction(sc, vocab, t, agent_b, agent_a, kb_b, kb_a, mirrored, emit)
                else:
                    _handle_obstruction(sc, vocab, t, agent_a, agent_b, kb_a, kb_b, report, emit)
            else:
                agent_a.adopt_family(merged.family, merged.observed, t)
                agent_b.adopt_family(merged.family, merged.observed, t)

    final = None
    if sc.consensus is not None:
        task = sc.consensus
        state, report = diffuse(task.sheaf, task.x0, task.config, allow_unstable=True)
        emit(sc.horizon, "Consensus", {
            "converged": report.converged,
            "iterations": report.iterations,
            "residual": report.residual,
            "finalBlocks": state.to_mapping(task.sheaf),
            "dirichletTrace": list(report.dirichlet_trace),
        })
        final = state

    world_section = Section(
        Interval(0, sc.horizon),
        {f: tuple(row[f] for row in world_rows) for f in fluents},
    )
    return RunResult(
        trace=trace,
        world_section=world_section,
        mem_sections={a.spec.id: a.mem_section() for a in agents},
        knowledge={a.spec.id: a.knowledge_base() for a in agents},
    )


def _handle_obstruction(sc, vocab, t, agent_a, agent_b, kb_a, kb_b, report, emit) -> None:
    query = obstruction_to_query(report, kb_a, kb_b, max_len=sc.abduction.max_len)
    payload = {
        "agents": [agent_a.spec.id, agent_b.spec.id],
        "window": query.window.to_json(),
        "memState": dict(query.mem_state),
        "obsState": dict(query.obs_state),
        "mode": sc.abduction.mode,
    }
    try:
        result = abduce(query, vocab, sc.abduction.mode, sc.abduction.check_preconditions)
        payload.update(_explanations_payload(result))
        if (
            sc.abduction.reconcile_agent == agent_a.spec.id
            and result.explanations
            and agent_a.mem_section() is not None
        ):
            repaired = reconcile(
                agent_a.mem_section(), result.explanations[0], query, vocab
            )
            agent_a.overwrite_mem(repaired)
    except NoExplanationWithinBound as exc:
        payload.update({"found": False, "explanations": [], "exhaustiveUpTo": exc.bound})
    emit(t, "Abduce", payload)


def run(sc: Scenario, workers: int = 1) -> list[TraceEvent]:
    return simulate(sc, workers=workers).trace


def goal_satisfied(sc: Scenario, trace, agent_id: str) -> bool:
    """Did the world at the horizon match the agent's goal valuation?"""
    spec = sc.agent(agent_id)
    if spec is None:
        raise UnknownAgent(f"no agent {agent_id!r} in scenario")
    if not spec.goal:
        return True
    occurrences = tuple(
        Occurrence.from_json(e.payload["occurrence"])
        for e in trace
        if e.kind == "Act" and e.payload.get("ok")
    )
    narrative = Narrative(occurrences, dict(sc.world.initial), sc.vocabulary)
    return all(
        holds_at(narrative, f, sc.horizon) == v for f, v in spec.goal.items()
    )
