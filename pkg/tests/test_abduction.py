import itertools

import pytest

from stp.abduction import (
    DiscrepancyQuery,
    Explanation,
    ExplanationSet,
    abduce,
    reconcile,
    verify_explanation,
)
from stp.actions import ActionSchema, Occurrence, Plan, Vocabulary
from stp.errors import NoExplanationWithinBound
from stp.intervals import Interval
from stp.sections import Section, glue, stalk_at

MOVE = ActionSchema("move", ("x", "y"), (("at_{x}", True),), ("at_{y}",), ("at_{x}",))
BLOCKS = Vocabulary(("at_A", "at_B"), (MOVE,), ("A", "B"))

PAINT = ActionSchema(
    "paint", ("x", "old", "new"), (("{old}_{x}", True),), ("{new}_{x}",), ("{old}_{x}",)
)
COLORS = Vocabulary(("red_c1", "blue_c1"), (PAINT,), ("c1", "red", "blue"))


def brute_force(query, vocab, check_preconditions=True):
    """Independent oracle: try every ground-action word up to the bound."""
    universe = vocab.ground_actions()
    bound = min(query.max_len, max(0, len(query.window) - 2))
    found = []
    for length in range(bound + 1):
        for word in itertools.product(range(len(universe)), repeat=length):
            state = dict(query.mem_state)
            ok = True
            for gi in word:
                g = universe[gi]
                if check_preconditions and any(
                    state[f] != v for f, v in g.preconditions
                ):
                    ok = False
                    break
                for f in g.initiates:
                    state[f] = True
                for f in g.terminates:
                    state[f] = False
            if ok and state == query.obs_state:
                found.append(word)
    return found


def as_words(result, vocab):
    universe = vocab.ground_actions()
    key = {(g.schema, g.args): i for i, g in enumerate(universe)}
    return [tuple(key[(o.action, o.args)] for o in e.steps) for e in result.explanations]


def test_identity_explanation():
    state = {"at_A": True, "at_B": False}
    q = DiscrepancyQuery(state, dict(state), Interval(0, 5))
    result = abduce(q, BLOCKS, "first-minimal")
    assert len(result.explanations) == 1
    assert result.explanations[0].length == 0
    assert result.explanations[0].steps == Plan()


def test_blocks_world_intervention():
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(2, 5)
    )
    result = abduce(q, BLOCKS, "all-minimal")
    assert len(result.explanations) == 1
    step = result.explanations[0].steps.steps[0]
    assert (step.action, step.args) == ("move", ("A", "B"))
    # uniqueness at length 1 confirmed by the oracle through length 2
    words = brute_force(DiscrepancyQuery(q.mem_state, q.obs_state, q.window, max_len=2), BLOCKS)
    assert [w for w in words if len(w) <= 1] == [words[0]]


def test_unreachable_target():
    vocab = Vocabulary(("f", "g"), (ActionSchema("set_f", (), (), ("f",), ()),), ())
    q = DiscrepancyQuery(
        {"f": False, "g": False}, {"f": False, "g": True}, Interval(0, 9), max_len=4
    )
    with pytest.raises(NoExplanationWithinBound):
        abduce(q, vocab, "all-up-to-bound")


def test_zero_width_window_has_no_room():
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(4, 4)
    )
    with pytest.raises(NoExplanationWithinBound):
        abduce(q, BLOCKS, "first-minimal")


def test_step_times_are_canonical_and_inside_window():
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(3, 8)
    )
    result = abduce(q, BLOCKS, "first-minimal")
    times = [s.at for s in result.explanations[0].steps]
    assert times == [4]
    assert all(3 < t < 8 for t in times)


def all_queries(vocab, window, max_len):
    fluents = vocab.fluents
    states = [
        dict(zip(fluents, bits))
        for bits in itertools.product([False, True], repeat=len(fluents))
    ]
    for mem in states:
        for obs in states:
            yield DiscrepancyQuery(dict(mem), dict(obs), window, max_len=max_len)


def test_all_up_to_bound_matches_oracle():
    vocabularies = [
        BLOCKS,  # 2 ground actions: move(A,B), move(B,A)
        COLORS,  # 2 ground actions: paint both directions
        Vocabulary(
            ("p", "q"),
            (
                ActionSchema("flip_on", (), (("p", False),), ("p",), ()),
                ActionSchema("flip_off", (), (("p", True),), (), ("p",)),
                ActionSchema("copy", (), (("p", True),), ("q",), ()),
            ),
            (),
        ),  # 3 ground actions with interacting preconditions
    ]
    for vocab in vocabularies:
        assert len(vocab.ground_actions()) <= 3
        for max_len in (1, 2, 3, 4):
            window = Interval(0, max_len + 1)
            for q in all_queries(vocab, window, max_len):
                expected = sorted(brute_force(q, vocab))
                try:
                    result = abduce(q, vocab, "all-up-to-bound")
                    got = sorted(as_words(result, vocab))
                except NoExplanationWithinBound:
                    got = []
                assert got == expected, (vocab.fluents, q.mem_state, q.obs_state, max_len)


def test_minimal_modes_agree_with_oracle_minimum():
    for q in all_queries(BLOCKS, Interval(0, 5), 4):
        words = brute_force(q, BLOCKS)
        if not words:
            with pytest.raises(NoExplanationWithinBound):
                abduce(q, BLOCKS, "first-minimal")
            continue
        shortest = min(len(w) for w in words)
        first = abduce(q, BLOCKS, "first-minimal")
        assert [len(e.steps) for e in first.explanations] == [shortest]
        all_min = abduce(q, BLOCKS, "all-minimal")
        assert sorted(as_words(all_min, BLOCKS)) == sorted(
            w for w in words if len(w) == shortest
        )


def test_determinism():
    q = DiscrepancyQuery(
        {"red_c1": True, "blue_c1": False},
        {"red_c1": False, "blue_c1": True},
        Interval(0, 6),
        max_len=4,
    )
    runs = [abduce(q, COLORS, "all-up-to-bound") for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
    assert isinstance(runs[0], ExplanationSet)


def test_every_returned_explanation_verifies():
    for q in all_queries(BLOCKS, Interval(0, 5), 3):
        try:
            result = abduce(q, BLOCKS, "all-up-to-bound")
        except NoExplanationWithinBound:
            continue
        for e in result.explanations:
            assert verify_explanation(e, q, BLOCKS)


def test_verify_rejects_wrong_plan():
    vocab = Vocabulary(("at_A", "at_B", "at_C"), (MOVE,), ("A", "B", "C"))
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False, "at_C": False},
        {"at_A": False, "at_B": True, "at_C": False},
        Interval(0, 4),
    )
    wrong = Explanation(Plan((Occurrence("move", ("A", "C"), 1),)), 1)
    assert not verify_explanation(wrong, q, vocab)


def test_verify_rejects_step_outside_window():
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(2, 4)
    )
    outside = Explanation(Plan((Occurrence("move", ("A", "B"), 7),)), 1)
    assert not verify_explanation(outside, q, BLOCKS)
    boundary = Explanation(Plan((Occurrence("move", ("A", "B"), 4),)), 1)
    assert not verify_explanation(boundary, q, BLOCKS)


def test_pullback_universality_bounded():
    # any externally verified word of length <= exhaustive bound shows up
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": True, "at_B": False}, Interval(0, 5), max_len=4
    )
    result = abduce(q, BLOCKS, "all-up-to-bound")
    assert result.exhaustive_up_to == 4
    member_words = set(as_words(result, BLOCKS))
    for word in brute_force(q, BLOCKS):
        assert word in member_words


def test_reconcile_empty_explanation():
    mem = Section.constant(Interval(0, 6), {"at_A": True, "at_B": False})
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": True, "at_B": False}, Interval(2, 5)
    )
    out = reconcile(mem, Explanation(Plan(), 0), q, BLOCKS)
    assert stalk_at(out, 5) == stalk_at(mem, 5)


def test_reconcile_replays_move():
    mem = Section.constant(Interval(0, 3), {"at_A": True, "at_B": False})
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(3, 6)
    )
    result = abduce(q, BLOCKS, "first-minimal")
    out = reconcile(mem, result.explanations[0], q, BLOCKS)
    assert out.domain == Interval(0, 6)
    assert stalk_at(out, 6) == q.obs_state
    assert stalk_at(out, 3) == q.mem_state
    # effect lands one tick after the canonical step time
    assert out.value_at("at_B", 5) and not out.value_at("at_B", 4)


def test_reconciled_memory_glues_with_fresh_observation():
    mem = Section.constant(Interval(0, 3), {"at_A": True, "at_B": False})
    q = DiscrepancyQuery(
        {"at_A": True, "at_B": False}, {"at_A": False, "at_B": True}, Interval(3, 6)
    )
    result = abduce(q, BLOCKS, "first-minimal")
    repaired = reconcile(mem, result.explanations[0], q, BLOCKS)
    observation = Section.constant(Interval(6, 6), q.obs_state)
    merged = glue([repaired, observation])
    assert merged.domain == Interval(0, 6)
