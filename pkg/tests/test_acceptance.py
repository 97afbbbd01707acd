"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines and the
measured numbers.
"""

import itertools
import random
import time

import numpy as np
import pytest

from stp.abduction import DiscrepancyQuery, abduce
from stp.actions import (
    ActionSchema,
    Narrative,
    Occurrence,
    Vocabulary,
    check_naturality,
    holds_at,
)
from stp.errors import NoExplanationWithinBound
from stp.intervals import Interval
from stp.scenario import load_scenario
from stp.sections import Section, glue, restrict
from stp.simulator import goal_satisfied, run, serialize_trace, simulate
from stp.spectral import (
    CellularSheaf,
    Cochain0,
    DiffusionConfig,
    cohomology_dims,
    diffuse,
    harmonic_basis,
    laplacian,
    spectrum,
)

from test_abduction import COLORS, brute_force, as_words
from test_actions import random_case, toggle_vocab
from test_sections import all_covers, all_sections
from test_spectral import graph_laplacian, random_connected_graph, random_sheaf


def _passed(n, detail):
    print(f"\nACCEPTANCE CRITERION {n}: PASS ({detail})")


def test_criterion_1_holds_at_sweep_under_two_seconds():
    rng = random.Random(2024)
    vocab = toggle_vocab(50)
    occurrences = tuple(
        Occurrence(
            rng.choice(("switch_on", "switch_off")),
            (rng.choice(vocab.fluents),),
            rng.randint(0, 999),
        )
        for _ in range(2000)
    )
    initial = {f: rng.random() < 0.5 for f in vocab.fluents}
    narrative = Narrative(occurrences, initial, vocab)

    start = time.perf_counter()
    total_true = 0
    for f in vocab.fluents:
        for t in range(1000):
            if holds_at(narrative, f, t):
                total_true += 1
    elapsed = time.perf_counter() - start

    assert 0 < total_true < 50 * 1000
    assert elapsed < 2.0, f"sweep took {elapsed:.3f}s, hard limit 2s"
    if elapsed >= 0.5:
        print(f"\nwarning: sweep took {elapsed:.3f}s, target is < 0.5s")
    _passed(1, f"50 fluents x 1000 ticks swept in {elapsed * 1000:.0f} ms")


def test_criterion_2_abduction_matches_brute_force_everywhere():
    move = ActionSchema("move", ("x", "y"), (("at_{x}", True),), ("at_{y}",), ("at_{x}",))
    flip_on = ActionSchema("flip_on", (), (("p", False),), ("p",), ())
    flip_off = ActionSchema("flip_off", (), (("p", True),), (), ("p",))
    copy_pq = ActionSchema("copy", (), (("p", True),), ("q",), ())
    vocabularies = [
        Vocabulary(("at_A", "at_B"), (move,), ("A", "B")),
        COLORS,
        Vocabulary(("p", "q"), (flip_on, flip_off, copy_pq), ()),
    ]
    start = time.perf_counter()
    checked = 0
    for vocab in vocabularies:
        assert len(vocab.ground_actions()) <= 3
        fluents = vocab.fluents
        states = [
            dict(zip(fluents, bits))
            for bits in itertools.product([False, True], repeat=len(fluents))
        ]
        for max_len in (1, 2, 3, 4):
            for interior in (0, 1, 2, 3, 4, 5):
                window = Interval(3, 3 + interior + 1)
                for mem in states:
                    for obs in states:
                        q = DiscrepancyQuery(dict(mem), dict(obs), window, max_len=max_len)
                        expected = sorted(brute_force(q, vocab))
                        try:
                            got = sorted(as_words(abduce(q, vocab, "all-up-to-bound"), vocab))
                        except NoExplanationWithinBound:
                            got = []
                        assert got == expected, (fluents, mem, obs, max_len, interior)
                        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"sweep took {elapsed:.1f}s, limit 10s"
    _passed(2, f"{checked} queries matched the exhaustive oracle in {elapsed:.2f}s")


def test_criterion_3_table_of_gluing_outcomes(fixture_path):
    outcomes = {}
    for name in ("two_explorers", "shared_history", "color_conflict"):
        trace = run(load_scenario(fixture_path(name + ".json")))
        merges = [e for e in trace if e.kind == "Merge"]
        assert len(merges) == 1, name
        outcomes[name] = merges[0].payload["outcome"]
        if name == "color_conflict":
            abduces = [e for e in trace if e.kind == "Abduce"]
            assert len(abduces) == 1
            payload = abduces[0].payload
            assert payload["found"]
            assert len(payload["explanations"]) == 1
            step = payload["explanations"][0]["steps"][0]
            assert step["action"] == "paint"
    assert outcomes == {
        "two_explorers": "Merged",
        "shared_history": "AlreadyConsistent",
        "color_conflict": "Obstructed",
    }
    _passed(3, "Merged / AlreadyConsistent / Obstructed + single minimal paint explanation")


def test_criterion_4_sheaf_axiom_property_suite():
    rng = random.Random(4242)
    violations = 0

    # restriction functoriality on randomized sections
    for _ in range(300):
        hi = rng.randint(2, 9)
        s = Section(
            Interval(0, hi),
            {f: tuple(rng.random() < 0.5 for _ in range(hi + 1)) for f in ("p", "q")},
        )
        a = rng.randint(0, hi)
        b = rng.randint(a, hi)
        c = rng.randint(a, b)
        d = rng.randint(c, b)
        if restrict(restrict(s, Interval(a, b)), Interval(c, d)) != restrict(s, Interval(c, d)):
            violations += 1

    # glue-of-restrictions identity and glue uniqueness, exhaustive at
    # 3 ticks x 2 fluents over every valid cover
    target = Interval(0, 2)
    sections = list(all_sections(target, ("p", "q")))
    covers = list(all_covers(target))
    glue_checks = 0
    for s in sections:
        for cover in covers:
            pieces = [restrict(s, part) for part in cover.parts]
            if glue(pieces) != s:
                violations += 1
            glue_checks += 1
    for cover in covers:
        for s in sections:
            pieces = [restrict(s, part) for part in cover.parts]
            matches = [
                other
                for other in sections
                if all(
                    restrict(other, part) == piece
                    for part, piece in zip(cover.parts, pieces)
                )
            ]
            if matches != [s]:
                violations += 1

    # naturality of application on 1000 randomized cases
    naturality_checks = 0
    for _ in range(1000):
        s, occ, sub, vocab = random_case(rng)
        if not check_naturality(occ, s, sub, vocab):
            violations += 1
        naturality_checks += 1

    assert violations == 0
    _passed(
        4,
        f"functoriality x300, glue identity/uniqueness x{glue_checks}, "
        f"naturality x{naturality_checks}: 0 violations",
    )


def test_criterion_5_spectral_correctness():
    rng = random.Random(5050)

    # (a) constant sheaf reduces to the graph Laplacian
    for _ in range(10):
        n = rng.randint(3, 12)
        edges = random_connected_graph(rng, n)
        s = CellularSheaf.constant(
            [f"v{i}" for i in range(n)], [(f"v{u}", f"v{v}") for u, v in edges]
        )
        assert np.array_equal(laplacian(s), graph_laplacian(n, edges))

    # (b) zero-eigenvalue multiplicity equals h0 on 20 random sheaves
    for _ in range(20):
        s = random_sheaf(rng)
        rep = spectrum(s, tol=1e-9)
        assert rep.zero_multiplicity == cohomology_dims(s, tol=1e-9)[0]

    # (c) synchronous diffusion lands on the kernel projection, including
    # the weighted single-edge case with limit (6/5, 3/5)
    edge = CellularSheaf(
        vertices=(("u", 1), ("v", 1)),
        edges=(("u", "v", 1),),
        restrictions=((np.array([[1.0]]), np.array([[2.0]])),),
    )
    out, rep = diffuse(
        edge,
        Cochain0((np.array([1.0]), np.array([1.0]))),
        DiffusionConfig(alpha=0.25, tol=1e-12, max_iters=10_000),
    )
    assert rep.converged
    assert np.allclose(out.stack(), [6.0 / 5.0, 3.0 / 5.0], atol=1e-6)
    projection_cases = 0
    rate_checked = 0
    for _ in range(8):
        s = random_sheaf(rng, max_vertices=7, max_dim=2)
        L = laplacian(s)
        lam = float(np.linalg.eigvalsh(L).max())
        alpha = 1.0 / lam if lam > 0 else 0.5
        x0 = Cochain0.from_vector(
            s, np.random.default_rng(projection_cases).standard_normal(L.shape[0])
        )
        out, rep = diffuse(s, x0, DiffusionConfig(alpha=alpha, tol=1e-12, max_iters=200_000))
        assert rep.converged
        basis = harmonic_basis(s)
        V = (
            np.stack([b.stack() for b in basis], axis=1)
            if basis
            else np.zeros((L.shape[0], 0))
        )
        assert np.allclose(out.stack(), V @ (V.T @ x0.stack()), atol=1e-6)

        # (d) energy is non-increasing with a sub-unit tail ratio down to
        # the float noise floor (some runs converge in <=2 steps and leave
        # no tail to measure)
        trace = rep.dirichlet_trace
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
        floor = trace[0] * 1e-12
        ratios = [b / a for a, b in zip(trace[2:], trace[3:]) if a > floor]
        if ratios:
            assert all(r < 1.0 for r in ratios)
            rate_checked += 1

        # (e) bounded-delay diffusion still reaches a harmonic cochain
        delayed, drep = diffuse(
            s,
            x0,
            DiffusionConfig(
                alpha=alpha / 2.0,
                tol=1e-9,
                max_iters=400_000,
                delay_bound=1 + projection_cases % 3,
                seed=99,
            ),
        )
        assert drep.converged
        assert np.max(np.abs(L @ delayed.stack())) < 1e-8
        projection_cases += 1

    assert rate_checked >= 4  # the linear-rate claim was actually exercised
    _passed(5, f"graph reduction, h0 cross-check, projections x{projection_cases}, "
               f"monotone energy (rate on {rate_checked}), delayed convergence")


def test_criterion_6_cohomology_on_trees_and_cycles():
    rng = random.Random(66)
    for n in range(3, 11):
        tree_edges = [(rng.randrange(i), i) for i in range(1, n)]
        tree = CellularSheaf.constant(
            [f"v{i}" for i in range(n)], [(f"v{u}", f"v{v}") for u, v in tree_edges]
        )
        assert cohomology_dims(tree) == (1, 0), f"tree size {n}"
        cycle = CellularSheaf.constant(
            [f"v{i}" for i in range(n)],
            [(f"v{i}", f"v{(i + 1) % n}") for i in range(n)],
        )
        assert cohomology_dims(cycle) == (1, 1), f"cycle size {n}"
    _passed(6, "(h0,h1) = (1,0) on trees and (1,1) on cycles, sizes 3-10")


def test_criterion_7_recharge_end_to_end(fixture_path):
    sc = load_scenario(fixture_path("recharge_resume.json"))
    result = simulate(sc)
    trace = result.trace

    ordered = [e.kind for e in trace if e.kind in ("Interrupt", "Abduce", "Resume")]
    assert ordered == ["Interrupt", "Abduce", "Resume"]
    abduce_event = next(e for e in trace if e.kind == "Abduce")
    assert abduce_event.payload["found"]
    assert abduce_event.payload["explanations"][0]["length"] == 1
    assert goal_satisfied(sc, trace, "R")

    blob = serialize_trace(trace)
    assert serialize_trace(run(sc)) == blob
    assert serialize_trace(run(sc, workers=4)) == blob
    assert serialize_trace(run(sc, workers=8)) == blob
    _passed(7, "Interrupt -> Abduce(found, length 1) -> Resume; goal met; "
               "byte-identical across runs and 1 vs N workers")
