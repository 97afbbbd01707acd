"""Scenario files: the declarative input of the simulator.

A scenario is a JSON object with top-level keys seed, horizon, fluents,
actions, world, agents, meetings, consensus (plus optional constants and
abduction blocks). Intervals appear as [start, end] pairs, occurrences as
{"action", "args", "at"} records. validate_scenario returns diagnostics as
data; run() refuses scenarios that produce any.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .abduction import DEFAULT_MAX_LEN, MODES
from .actions import ActionSchema, Narrative, Occurrence, Plan, Vocabulary
from .errors import ScenarioInvalid, StpError
from .intervals import Interval
from .spectral import CellularSheaf, Cochain0, DiffusionConfig, sheaf_from_json

TOP_LEVEL_KEYS = (
    "seed", "horizon", "fluents", "actions", "world", "agents", "meetings", "consensus",
)
OPTIONAL_KEYS = ("constants", "abduction")


@dataclass(frozen=True)
class AgentSpec:
    id: str
    goal: dict[str, bool]
    plan: Plan
    observation_windows: tuple[Interval, ...]
    interruption: tuple[int, int] | None = None


@dataclass(frozen=True)
class ConsensusTask:
    sheaf: CellularSheaf
    x0: Cochain0
    config: DiffusionConfig


@dataclass(frozen=True)
class AbductionOptions:
    max_len: int = DEFAULT_MAX_LEN
    mode: str = "first-minimal"
    check_preconditions: bool = True
    reconcile_agent: str | None = None


@dataclass(frozen=True)
class Scenario:
    seed: int
    horizon: int
    vocabulary: Vocabulary
    world: Narrative
    agents: tuple[AgentSpec, ...]
    meetings: tuple[tuple[int, str, str], ...] = ()
    consensus: ConsensusTask | None = None
    abduction: AbductionOptions = field(default_factory=AbductionOptions)

    def agent(self, agent_id: str) -> AgentSpec | None:
        for a in self.agents:
            if a.id == agent_id:
                return a
        return None


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ScenarioInvalid([f"{path}.{key}: missing"])
    return data[key]


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return scenario_from_json(data)


def scenario_from_json(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioInvalid(["scenario: must be a JSON object"])
    problems = [
        f"{k}: unknown top-level key"
        for k in data
        if k not in TOP_LEVEL_KEYS + OPTIONAL_KEYS
    ]
    if problems:
        raise ScenarioInvalid(problems)
    try:
        fluents = tuple(str(f) for f in _require(data, "fluents", "scenario"))
        schemas = tuple(
            ActionSchema(
                name=str(a["name"]),
                parameters=tuple(str(p) for p in a.get("parameters", [])),
                preconditions=tuple(
                    (str(f), bool(v)) for f, v in a.get("preconditions", [])
                ),
                initiates=tuple(str(f) for f in a.get("initiates", [])),
                terminates=tuple(str(f) for f in a.get("terminates", [])),
            )
            for a in _require(data, "actions", "scenario")
        )
        constants = tuple(str(c) for c in data.get("constants", []))
        vocab = Vocabulary(fluents, schemas, constants)

        world_data = _require(data, "world", "scenario")
        world = Narrative(
            occurrences=tuple(
                Occurrence.from_json(o) for o in world_data.get("occurrences", [])
            ),
            initial={str(f): bool(v) for f, v in _require(world_data, "initial", "world").items()},
            vocabulary=vocab,
        )

        agents = []
        for i, a in enumerate(_require(data, "agents", "scenario")):
            interruption = None
            if a.get("interruption") is not None:
                pair = a["interruption"]
                interruption = (int(pair[0]), int(pair[1]))
            agents.append(
                AgentSpec(
                    id=str(_require(a, "id", f"agents[{i}]")),
                    goal={str(f): bool(v) for f, v in a.get("goal", {}).items()},
                    plan=Plan(tuple(Occurrence.from_json(o) for o in a.get("plan", []))),
                    observation_windows=tuple(
                        Interval.from_json(w) for w in a.get("observationWindows", [])
                    ),
                    interruption=interruption,
                )
            )

        meetings = tuple(
            (int(m[0]), str(m[1]), str(m[2])) for m in data.get("meetings", [])
        )

        consensus = None
        if data.get("consensus") is not None:
            c = data["consensus"]
            sheaf = sheaf_from_json(_require(c, "sheaf", "consensus"))
            x0 = Cochain0.from_mapping(sheaf, _require(c, "x0", "consensus"))
            cc = c.get("config", {})
            config = DiffusionConfig(
                alpha=float(cc.get("alpha", 0.1)),
                max_iters=int(cc.get("maxIters", 10_000)),
                tol=float(cc.get("tol", 1e-8)),
                delay_bound=int(cc.get("delayBound", 0)),
                seed=int(data.get("seed", 0)),
            )
            consensus = ConsensusTask(sheaf, x0, config)

        ab = data.get("abduction", {})
        abduction = AbductionOptions(
            max_len=int(ab.get("maxLen", DEFAULT_MAX_LEN)),
            mode=str(ab.get("mode", "first-minimal")),
            check_preconditions=bool(ab.get("checkPreconditions", True)),
            reconcile_agent=ab.get("reconcileAgent"),
        )

        return Scenario(
            seed=int(_require(data, "seed", "scenario")),
            horizon=int(_require(data, "horizon", "scenario")),
            vocabulary=vocab,
            world=world,
            agents=tuple(agents),
            meetings=meetings,
            consensus=consensus,
            abduction=abduction,
        )
    except ScenarioInvalid:
        raise
    except (KeyError, TypeError, ValueError, IndexError, StpError) as exc:
        raise ScenarioInvalid([f"scenario: malformed ({exc})"]) from exc


def _check_occurrence(
    occ: Occurrence, vocab: Vocabulary, horizon: int, path: str
) -> list[str]:
    out = []
    try:
        vocab.ground(occ.action, occ.args)
    except Exception as exc:
        out.append(f"{path}: {exc}")
    if occ.at > horizon:
        out.append(f"{path}.at: {occ.at} exceeds horizon {horizon}")
    return out


def _same_tick_conflicts(occurrences, vocab: Vocabulary, path: str) -> list[str]:
    # one occurrence initiating and another terminating a fluent at one tick
    out = []
    by_tick: dict[int, list[Occurrence]] = {}
    for occ in occurrences:
        by_tick.setdefault(occ.at, []).append(occ)
    for t, group in sorted(by_tick.items()):
        if len(group) < 2:
            continue
        initiated, terminated = set(), set()
        for occ in group:
            try:
                g = vocab.ground(occ.action, occ.args)
            except Exception:
                continue
            initiated.update(g.initiates)
            terminated.update(g.terminates)
        for f in sorted(initiated & terminated):
            out.append(f"{path}: conflicting effects on {f!r} at tick {t}")
    return out


def validate_scenario(sc: Scenario) -> list[str]:
    """Every invariant violation as one 'field.path: message' diagnostic."""
    out: list[str] = []
    if sc.horizon < 0:
        out.append("horizon: must be >= 0")
    missing = [f for f in sc.vocabulary.fluents if f not in sc.world.initial]
    for f in missing:
        out.append(f"world.initial.{f}: missing valuation")
    for f in sc.world.initial:
        if f not in sc.vocabulary.fluents:
            out.append(f"world.initial.{f}: unknown fluent")
    for i, occ in enumerate(sc.world.occurrences):
        out.extend(_check_occurrence(occ, sc.vocabulary, sc.horizon, f"world.occurrences[{i}]"))
    out.extend(_same_tick_conflicts(sc.world.occurrences, sc.vocabulary, "world.occurrences"))

    seen_ids = set()
    for i, agent in enumerate(sc.agents):
        path = f"agents[{i}]"
        if agent.id in seen_ids:
            out.append(f"{path}.id: duplicate agent id {agent.id!r}")
        seen_ids.add(agent.id)
        for f in agent.goal:
            if f not in sc.vocabulary.fluents:
                out.append(f"{path}.goal.{f}: unknown fluent")
        for j, w in enumerate(agent.observation_windows):
            if w.end > sc.horizon:
                out.append(f"{path}.observationWindows[{j}]: exceeds horizon")
        for j, occ in enumerate(agent.plan):
            out.extend(_check_occurrence(occ, sc.vocabulary, sc.horizon, f"{path}.plan[{j}]"))
        out.extend(_same_tick_conflicts(agent.plan, sc.vocabulary, f"{path}.plan"))
        if agent.interruption is not None:
            tick, resume = agent.interruption
            if not (0 <= tick < resume):
                out.append(f"{path}.interruption: needs 0 <= tick < resumeTick")
            if resume > sc.horizon:
                out.append(f"{path}.interruption: resume tick exceeds horizon")
            for j, occ in enumerate(agent.plan):
                if tick <= occ.at < resume:
                    out.append(
                        f"{path}.plan[{j}]: step at tick {occ.at} falls inside the interruption"
                    )

    for i, (tick, a, b) in enumerate(sc.meetings):
        path = f"meetings[{i}]"
        if tick > sc.horizon:
            out.append(f"{path}: tick {tick} exceeds horizon")
        if a == b:
            out.append(f"{path}: agent meets itself")
        for who in (a, b):
            if who not in seen_ids:
                out.append(f"{path}: unknown agent {who!r}")

    if sc.abduction.mode not in MODES:
        out.append(f"abduction.mode: must be one of {MODES}")
    if sc.abduction.max_len < 1:
        out.append("abduction.maxLen: must be >= 1")
    if (
        sc.abduction.reconcile_agent is not None
        and sc.abduction.reconcile_agent not in seen_ids
    ):
        out.append(f"abduction.reconcileAgent: unknown agent {sc.abduction.reconcile_agent!r}")

    if sc.consensus is not None:
        n = sc.consensus.sheaf.total_vertex_dim()
        got = sc.consensus.x0.stack().shape[0]
        if got != n:
            out.append(f"consensus.x0: total dim {got}, sheaf needs {n}")
    return out
