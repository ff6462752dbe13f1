"""Transcript constraints, exhaustive verification, refutations, and search."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmtoy import pauli
from pmtoy.extension import extended_machine, four_state_machine
from pmtoy.machine import MealyMachine, Transcript, enumerate_transcripts
from pmtoy.toy import spekkens_machine
from pmtoy.verify import (
    CONTEXT_PRODUCT,
    REPEATABILITY,
    CandidateFamily,
    check_transcript,
    compatible,
    family_all32_bit2,
    family_cplus16,
    family_paper4,
    refute_variant,
    search_machines,
    verify_machine,
)

COL3 = set(pauli.CONTEXT_NAMES["col3"])


def _t(inputs, outputs):
    return Transcript(tuple(inputs), tuple(outputs), Fraction(1), "end")


def test_check_transcript_context_violation():
    vs = check_transcript(_t(["Z1Z2", "X1X2", "Y1Y2"], [+1, +1, +1]))
    assert len(vs) == 1
    v = vs[0]
    assert v.kind == CONTEXT_PRODUCT
    assert v.positions == (0, 1, 2)
    assert (v.expected, v.observed) == (-1, +1)


def test_check_transcript_repeatability_satisfied():
    assert check_transcript(_t(["Z1", "Z1"], [+1, +1])) == []


def test_check_transcript_repeatability_violation_across_compatible():
    vs = check_transcript(_t(["X1X2", "Y1Y2", "X1X2"], [-1, +1, +1]))
    assert compatible("X1X2", "Y1Y2")
    assert len(vs) == 1
    v = vs[0]
    assert v.kind == REPEATABILITY
    assert v.positions == (0, 2)
    assert (v.expected, v.observed) == (-1, +1)


def test_check_transcript_incompatible_interleaving_breaks_the_chain():
    # Z1 does not commute with X1X2, so the pair is not constrained.
    assert not compatible("X1X2", "Z1")
    assert check_transcript(_t(["X1X2", "Z1", "X1X2"], [-1, +1, +1])) == []


def test_check_transcript_strict_reading_detects_interleaved_context():
    # Context completed across a compatible interleave: Z1 commutes with
    # Z1Z2, so the Z1Z2 outcome is still in force at the end.
    t = _t(["Z1Z2", "Z1", "X1X2", "Y1Y2"], [+1, +1, +1, +1])
    assert check_transcript(t) == []  # gate reading sees no consecutive triple
    strict = check_transcript(t, strict_contexts=True)
    assert len(strict) == 1
    assert strict[0].positions == (0, 2, 3)
    assert strict[0].expected == -1


def test_verify_spekkens_finds_column3_violation():
    report = verify_machine(spekkens_machine(), 3)
    assert not report.passed
    assert report.sequences_checked == 16 * (9 + 81 + 729)
    v = report.violations[0]
    assert v.kind == CONTEXT_PRODUCT
    assert set(v.sequence) == COL3 and len(v.sequence) == 3
    assert v.observed == +1 and v.expected == -1


def test_verify_extended_passes_through_depth_four():
    m = extended_machine(False)
    for depth in (1, 2, 3, 4):
        assert verify_machine(m, depth).passed


def test_verify_is_monotone_in_depth():
    m = spekkens_machine()
    shallow = verify_machine(m, 2)
    assert shallow.passed  # no violation exists below depth 3
    deep = verify_machine(m, 4)
    assert not deep.passed
    assert min(len(v.sequence) for v in deep.violations) == 3


def test_violations_are_replayable():
    m = spekkens_machine()
    report = verify_machine(m, 3)
    for v in report.violations[:4]:
        transcripts = enumerate_transcripts(m, v.start, v.sequence)
        reproduced = [
            t
            for t in transcripts
            if t.outputs == v.outputs
            and any(
                w.kind == v.kind and w.positions == v.positions
                for w in check_transcript(t, v.start)
            )
        ]
        assert reproduced, v


def test_verify_rejects_bad_arguments():
    m = spekkens_machine()
    with pytest.raises(ValueError):
        verify_machine(m, 0)
    bad = MealyMachine(
        name="bad-alphabet",
        states=("s",),
        inputs=("Q1",) + pauli.OBSERVABLE_NAMES[1:],
        outputs=(tuple([+1] * 9),),
        transitions=(tuple(((0, Fraction(1)),) for _ in range(9)),),
    )
    with pytest.raises(ValueError, match="not a PM observable"):
        verify_machine(bad, 2)


def test_verify_partial_machine_skips_undefined_continuations():
    report = verify_machine(four_state_machine(), 2)
    assert report.passed
    assert any("label discrepancy" in n for n in report.notes)


def test_verify_randomized_extension_at_depth_three():
    assert verify_machine(extended_machine(True), 3).passed


@settings(max_examples=60, deadline=None)
@given(
    start=st.integers(min_value=0, max_value=31),
    seq=st.lists(st.sampled_from(pauli.OBSERVABLE_NAMES), min_size=1, max_size=4),
)
def test_bfs_agrees_with_literal_branch_checks(start, seq):
    # Dual route: the monitor-based verifier says the extension is clean,
    # so literal checks over every enumerated branch must agree.
    m = extended_machine(False)
    for t in enumerate_transcripts(m, start, seq):
        assert check_transcript(t, m.states[start]) == []


def test_refute_single_trigger():
    v = refute_variant("single_trigger")
    assert v.kind == CONTEXT_PRODUCT
    assert len(v.sequence) <= 4
    assert {v.sequence[p] for p in v.positions} == COL3
    assert v.observed == +1
    assert v.sequence == ("Y1Y2", "X1X2", "Z1Z2")


def test_refute_same_destination():
    v = refute_variant("same_destination")
    assert v.kind == CONTEXT_PRODUCT
    assert len(v.sequence) <= 4
    assert v.observed == +1
    assert v.sequence == ("Y1Y2", "X1X2", "Z1Z2")


def test_extended_machine_survives_the_refutation_search():
    assert verify_machine(extended_machine(False), 4).passed


def test_search_rediscovers_the_diagram():
    outcome = search_machines(family_paper4(), 4, budget=500_000)
    assert outcome.exhausted
    assert outcome.completions >= 1
    agreeing = [
        m
        for m in outcome.machines
        if all(
            m.successors(src, obs) == (m.state_index(dst),)
            for src, obs, _, dst in (
                ("a", "Z1Z2", +1, "b"),
                ("a", "X1X2", +1, "c"),
                ("b", "Z1X2", -1, "d"),
                ("b", "X1Z2", -1, "a"),
                ("c", "Z1X2", +1, "a"),
                ("c", "X1Z2", -1, "d"),
                ("d", "Z1Z2", -1, "c"),
                ("d", "X1X2", -1, "b"),
            )
        )
    ]
    assert agreeing


def test_search_certifies_cplus_only_nonexistence():
    outcome = search_machines(family_cplus16(), 3, budget=500_000)
    assert outcome.exhausted
    assert outcome.completions == 0


def test_search_finds_the_skeleton_in_the_bit2_family():
    outcome = search_machines(family_all32_bit2(), 4, budget=500_000)
    assert outcome.exhausted
    skeleton = extended_machine(False)
    assert any(
        m.transitions == skeleton.transitions and m.outputs == skeleton.outputs
        for m in outcome.machines
    )


def test_search_budget_exhaustion_is_reported():
    outcome = search_machines(family_all32_bit2(), 4, budget=5)
    assert not outcome.exhausted
    assert outcome.nodes >= 5


def _two_state_family():
    # Two original tables differing in x1; the four observables whose value
    # involves x1 (X1, X1X2, X1Z2, Y1Y2) disagree between the states.
    from pmtoy.extension import ExtOnticState, ext_value
    from pmtoy.toy import OnticState

    states = (
        ExtOnticState(OnticState(+1, +1, +1, +1), +1),
        ExtOnticState(OnticState(+1, +1, -1, +1), +1),
    )
    return CandidateFamily(
        name="two-state",
        labels=tuple(s.label for s in states),
        outputs=tuple(
            tuple(ext_value(s, o) for o in pauli.OBSERVABLE_NAMES) for s in states
        ),
        base_domains=(
            tuple((0, 1) for _ in range(9)),
            tuple((0, 1) for _ in range(9)),
        ),
    )


def test_value_preservation_prunes_the_search_space():
    # At depth 1 nothing behavioral constrains the table, so disabling the
    # value-preservation filter must strictly enlarge the completion set.
    # (At depth >= 2 the [A, A] sequences enforce it behaviorally and the
    # two sets coincide.)
    family = _two_state_family()
    budget = 2_000_000
    with_vp = search_machines(family, 1, budget=budget, max_machines=1)
    without_vp = search_machines(
        family, 1, budget=budget, value_preservation=False, max_machines=1
    )
    assert with_vp.exhausted and without_vp.exhausted
    assert with_vp.completions == 2**10
    assert without_vp.completions == 2**18
    assert without_vp.completions > with_vp.completions


def test_value_preservation_sets_coincide_at_depth_two():
    family = _two_state_family()
    with_vp = search_machines(family, 2, budget=2_000_000, max_machines=1)
    without_vp = search_machines(
        family, 2, budget=2_000_000, value_preservation=False, max_machines=1
    )
    assert with_vp.exhausted and without_vp.exhausted
    assert with_vp.completions == without_vp.completions


def _random_value_preserving_machine(seed, stochastic=False):
    import random

    from pmtoy.extension import ALL_EXT, ext_value
    from pmtoy.machine import deterministic_row, uniform_row

    rng = random.Random(seed)
    outputs = tuple(
        tuple(ext_value(s, o) for o in pauli.OBSERVABLE_NAMES) for s in ALL_EXT
    )
    n = len(ALL_EXT)
    transitions = []
    for s in range(n):
        row = []
        for i in range(9):
            domain = [t for t in range(n) if outputs[t][i] == outputs[s][i]]
            if stochastic:
                row.append(uniform_row(rng.sample(domain, 2)))
            else:
                row.append(deterministic_row(rng.choice(domain)))
        transitions.append(tuple(row))
    return MealyMachine(
        name=f"random-{seed}",
        states=tuple(s.label for s in ALL_EXT),
        inputs=pauli.OBSERVABLE_NAMES,
        outputs=outputs,
        transitions=tuple(transitions),
    )


def _literal_violation_keys(m, depth):
    # Independent oracle: enumerate every full-depth sequence from every
    # start and apply the literal transcript checks to every branch.  On a
    # total machine this also covers all shorter sequences, since their
    # violations recur inside every extension.
    keys = set()
    lengths = []
    for start in range(len(m.states)):
        label = m.states[start]
        for seq in itertools.product(m.inputs, repeat=depth):
            for t in enumerate_transcripts(m, start, seq):
                for v in check_transcript(t, label):
                    keys.add(
                        (
                            v.kind,
                            tuple(v.sequence[p] for p in v.positions),
                            v.expected,
                            v.observed,
                        )
                    )
                    lengths.append(max(v.positions) + 1)
    return keys, (min(lengths) if lengths else None)


@pytest.mark.parametrize(
    "seed,stochastic",
    [(11, False), (22, False), (33, False), (44, False), (55, True)],
)
def test_verifier_agrees_with_brute_force_on_random_machines(seed, stochastic):
    # Cross-validation of the monitor-based verifier against literal
    # enumeration, on machines that are mostly broken in random ways.
    m = _random_value_preserving_machine(seed, stochastic)
    depth = 3
    report = verify_machine(m, depth, max_violations=10_000)
    literal_keys, literal_min = _literal_violation_keys(m, depth)
    assert report.passed == (not literal_keys)
    bfs_keys = {
        (v.kind, tuple(v.sequence[p] for p in v.positions), v.expected, v.observed)
        for v in report.violations
    }
    # The BFS prunes behind a breach, so it may see fewer distinct keys,
    # never spurious ones; shortest-witness depth must agree exactly.
    assert bfs_keys <= literal_keys
    if literal_keys:
        assert min(len(v.sequence) for v in report.violations) == literal_min


def test_cplus16_nonexistence_has_an_independent_argument():
    # Independent oracle for the search certificate: within the original 16
    # tables, any value-preserving chain s0 -Z1Z2-> t1 -X1X2-> t2 fails
    # either [Z1Z2, X1X2, Z1Z2] (repeatability) or [Z1Z2, X1X2, Y1Y2]
    # (context product), because Y1Y2's value on these tables is exactly
    # the product of the Z1Z2 and X1X2 values.
    from pmtoy.toy import ALL_ONTIC, observable_value

    for s0 in ALL_ONTIC:
        z0 = observable_value(s0, "Z1Z2")
        for t1 in ALL_ONTIC:
            if observable_value(t1, "Z1Z2") != z0:
                continue
            x1 = observable_value(t1, "X1X2")
            for t2 in ALL_ONTIC:
                if observable_value(t2, "X1X2") != x1:
                    continue
                repeat_ok = observable_value(t2, "Z1Z2") == z0
                context_ok = z0 * x1 * observable_value(t2, "Y1Y2") == -1
                assert not (repeat_ok and context_ok)


def test_extended_machine_also_passes_the_strict_reading_at_depth_three():
    # Informational: the gate uses the consecutive-triple reading, but the
    # skeleton happens to satisfy interleaved context completions as well.
    m = extended_machine(False)
    for start in range(len(m.states)):
        for seq in itertools.product(pauli.OBSERVABLE_NAMES, repeat=3):
            for t in enumerate_transcripts(m, start, seq):
                assert check_transcript(t, m.states[start], strict_contexts=True) == []


def test_oracle_soundness_sample_of_length_four_sequences():
    # Full 9^4 coverage runs in the acceptance suite; spot-check both
    # readings on a deterministic sample here.
    from pmtoy.pauli import qm_outcome_tree, tree_transcripts

    sample = list(itertools.islice(
        itertools.product(pauli.OBSERVABLE_NAMES, repeat=4), 0, 6561, 37
    ))
    for seq in sample:
        for outcomes, _ in tree_transcripts(qm_outcome_tree(seq)):
            t = Transcript(tuple(seq), outcomes, Fraction(1), "qm")
            assert check_transcript(t, strict_contexts=True) == []
