"""Interval-history planning toolkit.

Histories live over closed integer intervals and restrict, glue, and compare
like sections of a sheaf; actions rewrite their strict future; discrepancies
between memory and observation resolve through bounded abductive search;
agent graphs reach agreement by Laplacian diffusion. A deterministic
simulator plus the `stp` CLI tie the pieces together.
"""

from .abduction import (
    DiscrepancyQuery,
    Explanation,
    ExplanationSet,
    abduce,
    reconcile,
    verify_explanation,
)
from .actions import (
    ActionSchema,
    GroundAction,
    Narrative,
    Occurrence,
    Plan,
    Vocabulary,
    apply,
    check_naturality,
    clipped,
    compose,
    holds_at,
    progress,
)
from .intervals import Cover, Interval, TimePoint, is_subinterval, overlap, validate_cover
from .knowledge import KnowledgeBase, MergeReport, coverage, merge, obstruction_to_query
from .scenario import AgentSpec, Scenario, load_scenario, scenario_from_json, validate_scenario
from .sections import Section, SheafRole, check_locality, glue, restrict, stalk_at
from .simulator import RunResult, TraceEvent, goal_satisfied, run, serialize_trace, simulate
from .spectral import (
    CellularSheaf,
    Cochain0,
    DiffusionConfig,
    SpectralReport,
    coboundary,
    cohomology_dims,
    diffuse,
    harmonic_basis,
    laplacian,
    spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSchema", "AgentSpec", "CellularSheaf", "Cochain0", "Cover",
    "DiffusionConfig", "DiscrepancyQuery", "Explanation", "ExplanationSet",
    "GroundAction", "Interval", "KnowledgeBase", "MergeReport", "Narrative",
    "Occurrence", "Plan", "RunResult", "Scenario", "Section", "SheafRole",
    "SpectralReport", "TimePoint", "TraceEvent", "Vocabulary", "abduce",
    "apply", "check_locality", "check_naturality", "clipped", "coboundary",
    "cohomology_dims", "compose", "coverage", "diffuse", "glue",
    "goal_satisfied", "harmonic_basis", "holds_at", "is_subinterval",
    "laplacian", "load_scenario", "merge", "obstruction_to_query", "overlap",
    "progress", "reconcile", "restrict", "run", "scenario_from_json",
    "serialize_trace", "simulate", "spectrum", "stalk_at", "validate_cover",
    "validate_scenario", "verify_explanation",
]
