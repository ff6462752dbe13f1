"""Operator algebra, PM square structure, outcome trees, and the parity scan."""

import itertools

import numpy as np
import pytest

from pmtoy import pauli
from pmtoy.pauli import (
    ALL_WORDS,
    CONTEXT_NAMES,
    OBSERVABLE_NAMES,
    OBSERVABLES,
    PRESCRIBED_SIGN,
    PauliWord,
    commutes,
    context_product_sign,
    count_noncontextual_assignments,
    is_density_operator,
    ks_parity_scan,
    ks_scan_summary,
    maximally_mixed,
    pauli_matrix,
    qm_outcome_tree,
    tree_transcripts,
)


def test_sixteen_distinct_words():
    assert len(set(ALL_WORDS)) == 16
    assert PauliWord("I", "I") not in OBSERVABLES.values()
    assert len(OBSERVABLES) == 9


def test_identity_word_gives_identity_matrix():
    assert np.array_equal(pauli_matrix(PauliWord("I", "I")), np.eye(4))


def test_z1_matrix_is_diagonal_with_balanced_spectrum():
    m = pauli_matrix(PauliWord("Z", "I"))
    assert np.array_equal(m, np.diag([1, 1, -1, -1]))
    assert sorted(np.linalg.eigvalsh(m)) == [-1, -1, 1, 1]


def test_all_words_square_to_identity():
    for w in ALL_WORDS:
        m = pauli_matrix(w)
        assert np.allclose(m @ m, np.eye(4), atol=1e-12)
        assert np.allclose(m, m.conj().T, atol=1e-12)


def test_last_column_operator_identity():
    zz = pauli_matrix(PauliWord("Z", "Z"))
    xx = pauli_matrix(PauliWord("X", "X"))
    yy = pauli_matrix(PauliWord("Y", "Y"))
    assert np.allclose(zz @ xx @ yy, -np.eye(4), atol=1e-12)


def test_commutes_examples():
    assert commutes(PauliWord("Z", "Z"), PauliWord("X", "X"))
    assert not commutes(PauliWord("Z", "I"), PauliWord("X", "I"))
    for w in ALL_WORDS:
        assert commutes(w, w)


def test_commutes_agrees_with_matrix_commutator():
    for a, b in itertools.product(ALL_WORDS, repeat=2):
        ma, mb = pauli_matrix(a), pauli_matrix(b)
        matrix_commute = np.allclose(ma @ mb, mb @ ma, atol=1e-12)
        assert commutes(a, b) == matrix_commute, (a, b)


def test_grid_layout():
    assert pauli.GRID_NAMES == (
        ("Z1", "Z2", "Z1Z2"),
        ("X2", "X1", "X1X2"),
        ("Z1X2", "X1Z2", "Y1Y2"),
    )
    assert OBSERVABLES["Z1"] == PauliWord("Z", "I")
    assert OBSERVABLES["X2"] == PauliWord("I", "X")
    assert OBSERVABLES["Z1X2"] == PauliWord("Z", "X")
    assert OBSERVABLES["Y1Y2"] == PauliWord("Y", "Y")


def test_contexts_pairwise_commute():
    for ctx, names in CONTEXT_NAMES.items():
        for a, b in itertools.combinations(names, 2):
            assert commutes(OBSERVABLES[a], OBSERVABLES[b]), (ctx, a, b)


def test_compatibility_graph_maximal_cliques_are_the_contexts():
    # Brute force over all subsets of the nine observables.
    names = list(OBSERVABLE_NAMES)
    cliques = []
    for r in range(2, 10):
        for subset in itertools.combinations(names, r):
            if all(
                commutes(OBSERVABLES[a], OBSERVABLES[b])
                for a, b in itertools.combinations(subset, 2)
            ):
                cliques.append(frozenset(subset))
    maximal = {c for c in cliques if not any(c < other for other in cliques)}
    assert maximal == {frozenset(v) for v in CONTEXT_NAMES.values()}


def test_context_product_signs():
    signs = {ctx: context_product_sign(ctx) for ctx in PRESCRIBED_SIGN}
    assert signs == dict(PRESCRIBED_SIGN)
    total = 1
    for s in signs.values():
        total *= s
    assert total == -1


def test_outcome_tree_single_measurement_on_mixed_state():
    root = qm_outcome_tree(["Z1"])
    assert len(root.branches) == 2
    for br in root.branches:
        assert br.probability == pytest.approx(0.5, abs=1e-12)


def test_outcome_tree_branch_probabilities_sum_to_one():
    root = qm_outcome_tree(["Z1Z2", "X1X2", "Z1", "Y1Y2"])

    def walk(node):
        if not node.branches:
            return
        assert sum(b.probability for b in node.branches) == pytest.approx(
            1.0, abs=1e-12
        )
        for b in node.branches:
            walk(b.node)

    walk(root)
    total = sum(p for _, p in tree_transcripts(root))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_outcome_tree_last_column_product_is_minus_one():
    root = qm_outcome_tree(["Z1Z2", "X1X2", "Y1Y2"])
    for outcomes, prob in tree_transcripts(root):
        assert outcomes[0] * outcomes[1] * outcomes[2] == -1
        assert prob > 0


def test_outcome_tree_repeated_measurement_is_deterministic():
    root = qm_outcome_tree(["Z1", "Z1"])
    for outcomes, _ in tree_transcripts(root):
        assert outcomes[0] == outcomes[1]


def test_outcome_tree_accepts_pauli_words_directly():
    root = qm_outcome_tree([PauliWord("Z", "Z"), PauliWord("X", "X"), PauliWord("Y", "Y")])
    for outcomes, _ in tree_transcripts(root):
        assert outcomes[0] * outcomes[1] * outcomes[2] == -1


def test_outcome_tree_rejects_bad_initial_state():
    with pytest.raises(ValueError):
        qm_outcome_tree(["Z1"], initial=np.eye(4))  # trace 4, not a state
    with pytest.raises(ValueError):
        qm_outcome_tree([])


def test_outcome_tree_accepts_pure_initial_state():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    root = qm_outcome_tree(["Z1"], initial=rho)
    # |00> is a +1 eigenstate of Z1: a single certain branch.
    assert len(root.branches) == 1
    assert root.branches[0].outcome == +1
    assert root.branches[0].probability == pytest.approx(1.0, abs=1e-12)


def test_is_density_operator():
    assert is_density_operator(maximally_mixed())
    assert not is_density_operator(np.eye(4))
    skew = np.zeros((4, 4), dtype=complex)
    skew[0, 1] = 1.0
    assert not is_density_operator(skew)


def test_ks_parity_scan_counts():
    # Independent recount with a local loop, then the library value.
    satisfying = 0
    for bits in itertools.product((+1, -1), repeat=9):
        t = (bits[0:3], bits[3:6], bits[6:9])
        rows_ok = all(t[r][0] * t[r][1] * t[r][2] == +1 for r in range(3))
        cols = [t[0][c] * t[1][c] * t[2][c] for c in range(3)]
        if rows_ok and cols[0] == +1 and cols[1] == +1 and cols[2] == -1:
            satisfying += 1
    assert satisfying == 0
    assert ks_parity_scan() == 0
    all_plus = {ctx: +1 for ctx in PRESCRIBED_SIGN}
    assert count_noncontextual_assignments(all_plus) == 16


def test_ks_scan_summary_parity():
    summary = ks_scan_summary()
    assert summary["qm_satisfying"] == 0
    assert summary["all_plus_satisfying"] == 16
    assert sum(summary["minus_product_histogram"].values()) == 512
    assert all(int(k) % 2 == 0 for k in summary["minus_product_histogram"])
    assert summary["six_product_values"] == [1]
