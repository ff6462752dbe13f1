"""Constraint checking, exhaustive verification, and machine-family search.

A machine reproduces the quantum predictions for the PM square iff every
positive-probability run satisfies two constraints:

  (R) repeatability: two measurements of the same observable separated
      only by compatible measurements give equal outcomes;
  (C) context products: three consecutive measurements of the three
      distinct members of a context multiply to the prescribed sign
      (+1 everywhere except the last column's -1).

`check_transcript` applies the constraints literally to one run.
`verify_machine` certifies all input sequences up to a depth bound from
every start state by a breadth-first search over (machine state,
constraint monitor) product states: the monitor carries exactly the
pending repeatable values and the last two steps, which is all the
constraints can ever look at, so memoizing product states is equivalent
to enumerating all 9^L sequences while staying tractable at depth 6.

`search_machines` does a pruned depth-first search over deterministic
transition tables for a fixed candidate state set, branching lazily on
the transition a blocked test sequence needs next and pruning as soon as
any determined sequence violates (R) or (C).
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from . import pauli
from .extension import (
    ALIASES,
    ALL_EXT,
    ExtOnticState,
    ext_value,
    variant_machine,
)
from .machine import MealyMachine, Transcript, deterministic_row
from .toy import ALL_ONTIC, apply_flips

REPEATABILITY = "repeatability"
CONTEXT_PRODUCT = "context_product"

_COMPAT: Mapping[tuple[str, str], bool] = {
    (a, b): pauli.commutes(pauli.OBSERVABLES[a], pauli.OBSERVABLES[b])
    for a in pauli.OBSERVABLE_NAMES
    for b in pauli.OBSERVABLE_NAMES
}


def compatible(a: str, b: str) -> bool:
    """True iff the two named PM observables commute."""
    return _COMPAT[a, b]


@dataclass(frozen=True)
class Violation:
    """One witnessed breach of (R) or (C), replayable from its start state."""

    kind: str
    start: str | None
    sequence: tuple[str, ...]
    outputs: tuple[int, ...]
    positions: tuple[int, ...]
    expected: int
    observed: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "start": self.start,
            "sequence": list(self.sequence),
            "outputs": list(self.outputs),
            "positions": list(self.positions),
            "expected": self.expected,
            "observed": self.observed,
        }


def _check_run(
    inputs: Sequence[str],
    outputs: Sequence[int],
    start: str | None = None,
    strict_contexts: bool = False,
) -> list[Violation]:
    ins, outs = tuple(inputs), tuple(outputs)
    n = len(ins)
    violations: list[Violation] = []
    for p in range(n):
        for q in range(p + 1, n):
            if ins[q] != ins[p]:
                continue
            if all(compatible(ins[m], ins[p]) for m in range(p + 1, q)):
                if outs[q] != outs[p]:
                    violations.append(
                        Violation(
                            REPEATABILITY, start, ins, outs, (p, q), outs[p], outs[q]
                        )
                    )
    for k in range(n - 2):
        triple = (ins[k], ins[k + 1], ins[k + 2])
        if len(set(triple)) != 3:
            continue
        sign = pauli.CONTEXT_SETS.get(frozenset(triple))
        if sign is None:
            continue
        prod = outs[k] * outs[k + 1] * outs[k + 2]
        if prod != sign:
            violations.append(
                Violation(
                    CONTEXT_PRODUCT, start, ins, outs, (k, k + 1, k + 2), sign, prod
                )
            )
    if strict_contexts:
        # Stronger reading: a context completed across compatible
        # interleavings, each earlier outcome still in force at the last
        # position.  Reported informationally, never part of the gate.
        for p, q, r in itertools.combinations(range(n), 3):
            if q - p == 1 and r - q == 1:
                continue
            triple = (ins[p], ins[q], ins[r])
            if len(set(triple)) != 3:
                continue
            sign = pauli.CONTEXT_SETS.get(frozenset(triple))
            if sign is None:
                continue
            in_force = all(
                compatible(ins[m], ins[p]) for m in range(p + 1, r) if m != q
            ) and all(compatible(ins[m], ins[q]) for m in range(q + 1, r))
            if in_force and outs[p] * outs[q] * outs[r] != sign:
                violations.append(
                    Violation(
                        CONTEXT_PRODUCT,
                        start,
                        ins,
                        outs,
                        (p, q, r),
                        sign,
                        outs[p] * outs[q] * outs[r],
                    )
                )
    return violations


def check_transcript(
    t: Transcript, start: str | None = None, strict_contexts: bool = False
) -> list[Violation]:
    """All (R) and (C) breaches in one transcript."""
    return _check_run(t.inputs, t.outputs, start, strict_contexts)


@dataclass(frozen=True)
class VerificationReport:
    machine: str
    depth: int
    sequences_checked: int
    violations: tuple[Violation, ...]
    elapsed_ms: float
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "machine": self.machine,
            "depth": self.depth,
            "sequences_checked": self.sequences_checked,
            "violations": [v.to_dict() for v in self.violations],
            "elapsed_ms": self.elapsed_ms,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def verify_machine(
    m: MealyMachine,
    depth: int,
    starts: Sequence[int | str] | None = None,
    max_violations: int = 64,
) -> VerificationReport:
    """Certify every input sequence of length <= depth from every start.

    Walks the product of the machine with the constraint monitor
    breadth-first, so witnesses are depth-minimal; violations are
    deduplicated by (kind, inputs at the breach positions, expected,
    observed).  Undefined transitions of partial machines end the branch.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    names = m.inputs
    for nm in names:
        if nm not in pauli.OBSERVABLES:
            raise ValueError(f"machine input is not a PM observable: {nm!r}")
    t0 = time.perf_counter()
    k = len(names)
    compat_idx = [[compatible(a, b) for b in names] for a in names]
    clear_lists = [
        tuple(j for j in range(k) if not compat_idx[i][j]) for i in range(k)
    ]
    ctx_signs: dict[frozenset[int], int] = {}
    for names3, sign in pauli.CONTEXT_SETS.items():
        if all(nm in names for nm in names3):
            ctx_signs[frozenset(names.index(nm) for nm in names3)] = sign

    out = m.outputs
    succ = [[tuple(t for t, _ in row) for row in srow] for srow in m.transitions]
    if starts is None:
        start_indices = list(range(len(m.states)))
    else:
        start_indices = [m.state_index(s) for s in starts]

    nodes: list[tuple[int, tuple[int, ...], tuple]] = []
    parents: list[tuple[int, int, int]] = []
    seen: dict[tuple, int] = {}

    def new_node(key: tuple, parent: tuple[int, int, int]) -> int:
        nid = len(nodes)
        seen[key] = nid
        nodes.append(key)
        parents.append(parent)
        return nid

    init_pending = (0,) * k
    level: list[int] = []
    for s in start_indices:
        key = (s, init_pending, ())
        if key not in seen:
            level.append(new_node(key, (-1, -1, 0)))

    found: dict[tuple, Violation] = {}
    truncated = False

    def witness(nid: int, i: int, v: int) -> tuple[str, tuple[str, ...], tuple[int, ...]]:
        seq: list[str] = []
        outs: list[int] = []
        cur = nid
        while True:
            p, pi, pv = parents[cur]
            if p == -1:
                break
            seq.append(names[pi])
            outs.append(pv)
            cur = p
        seq.reverse()
        outs.reverse()
        seq.append(names[i])
        outs.append(v)
        return m.states[nodes[cur][0]], tuple(seq), tuple(outs)

    for d in range(depth):
        expand = d + 1 < depth
        nxt: list[int] = []
        for nid in level:
            s, pending, last2 = nodes[nid]
            for i in range(k):
                v = out[s][i]
                bad = False
                if pending[i] != 0 and pending[i] != v:
                    bad = True
                elif len(last2) == 2:
                    (i2, v2), (i1, v1) = last2
                    if i != i1 and i != i2 and i1 != i2:
                        sign = ctx_signs.get(frozenset((i, i1, i2)))
                        if sign is not None and v * v1 * v2 != sign:
                            bad = True
                if bad:
                    if len(found) < max_violations:
                        start_label, seq, outs = witness(nid, i, v)
                        for vio in _check_run(seq, outs, start_label):
                            key = (
                                vio.kind,
                                tuple(seq[p] for p in vio.positions),
                                vio.expected,
                                vio.observed,
                            )
                            found.setdefault(key, vio)
                    else:
                        truncated = True
                    continue
                if expand and succ[s][i]:
                    new_pending = list(pending)
                    for j in clear_lists[i]:
                        new_pending[j] = 0
                    new_pending[i] = v
                    npend = tuple(new_pending)
                    nlast = (last2 + ((i, v),))[-2:]
                    for t in succ[s][i]:
                        key = (t, npend, nlast)
                        if key not in seen:
                            nxt.append(new_node(key, (nid, i, v)))
        level = nxt
        if not level:
            break

    elapsed = (time.perf_counter() - t0) * 1000
    violations = tuple(
        sorted(
            found.values(),
            key=lambda v: (len(v.sequence), v.kind, v.sequence, v.positions),
        )
    )
    notes = tuple(m.notes)
    if truncated:
        notes = notes + (f"violation list truncated at {max_violations} entries",)
    total = len(start_indices) * sum(k**d for d in range(1, depth + 1))
    return VerificationReport(
        machine=m.name,
        depth=depth,
        sequences_checked=total,
        violations=violations,
        elapsed_ms=elapsed,
        notes=notes,
    )


_BOTTOM_TO_TOP = ("Y1Y2", "X1X2", "Z1Z2")


def refute_variant(kind: str, depth: int = 4) -> Violation:
    """Concrete refutation of one of the two rejected constructions.

    Verifies the variant from the all-plus contradiction-in-column state
    and returns a column-3 context violation with product +1, preferring
    the literal bottom-to-top witness.  Raises if none exists within the
    depth bound, which would mean the variant construction regressed.
    """
    m = variant_machine(kind)
    report = verify_machine(m, depth, starts=[ALIASES["a"].label])
    col3 = set(pauli.CONTEXT_NAMES["col3"])
    fallback: Violation | None = None
    for v in report.violations:
        if (
            v.kind == CONTEXT_PRODUCT
            and {v.sequence[p] for p in v.positions} == col3
            and v.observed == +1
        ):
            if v.sequence == _BOTTOM_TO_TOP:
                return v
            if fallback is None:
                fallback = v
    if fallback is None:
        raise RuntimeError(
            f"variant {kind!r} produced no column-3 refutation within depth {depth}"
        )
    return fallback


# ---------------------------------------------------------------------------
# Bounded search over deterministic transition tables.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateFamily:
    """A fixed candidate state set with output tables and successor domains.

    base_domains lists, per (state, input), the successors allowed by the
    family's structural restriction before the optional value-preservation
    filter is applied.
    """

    name: str
    labels: tuple[str, ...]
    outputs: tuple[tuple[int, ...], ...]
    base_domains: tuple[tuple[tuple[int, ...], ...], ...]


@dataclass
class SearchOutcome:
    family: str
    depth: int
    machines: tuple[MealyMachine, ...]
    completions: int
    exhausted: bool
    nodes: int
    budget: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "depth": self.depth,
            "completions": self.completions,
            "machines": [m.to_json_dict() for m in self.machines],
            "exhausted": self.exhausted,
            "nodes": self.nodes,
            "budget": self.budget,
        }


def _all_successors(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    full = tuple(range(n))
    return tuple(tuple(full for _ in pauli.OBSERVABLE_NAMES) for _ in range(n))


def family_paper4() -> CandidateFamily:
    states = tuple(ALIASES.values())
    return CandidateFamily(
        name="paper4",
        labels=tuple(ALIASES),
        outputs=tuple(
            tuple(ext_value(s, o) for o in pauli.OBSERVABLE_NAMES) for s in states
        ),
        base_domains=_all_successors(len(states)),
    )


def family_cplus16() -> CandidateFamily:
    """The 16 original tables only (contradiction in the last column)."""
    states = tuple(ExtOnticState(s, +1) for s in ALL_ONTIC)
    return CandidateFamily(
        name="cplus16",
        labels=tuple(s.label for s in states),
        outputs=tuple(
            tuple(ext_value(s, o) for o in pauli.OBSERVABLE_NAMES) for s in states
        ),
        base_domains=_all_successors(len(states)),
    )


def family_all32_bit2() -> CandidateFamily:
    """All 32 extended states; moves restricted to the skeleton shape.

    A successor either equals the current state or differs by flipping c
    together with exactly one bit-2 generator (z2 or x2).
    """
    index = {s: i for i, s in enumerate(ALL_EXT)}
    domains = []
    for s in ALL_EXT:
        moves = (
            s,
            ExtOnticState(apply_flips(s.base, (1,)), -s.c),
            ExtOnticState(apply_flips(s.base, (3,)), -s.c),
        )
        row = tuple(tuple(index[t] for t in moves) for _ in pauli.OBSERVABLE_NAMES)
        domains.append(row)
    return CandidateFamily(
        name="all32-bit2",
        labels=tuple(s.label for s in ALL_EXT),
        outputs=tuple(
            tuple(ext_value(s, o) for o in pauli.OBSERVABLE_NAMES) for s in ALL_EXT
        ),
        base_domains=tuple(domains),
    )


FAMILIES: Mapping[str, Callable[[], CandidateFamily]] = {
    "paper4": family_paper4,
    "cplus16": family_cplus16,
    "all32-bit2": family_all32_bit2,
}

_CTX_SEARCH_ORDER = ("col3", "row3", "row1", "row2", "col1", "col2")


def _reduced_sequences(depth: int) -> list[tuple[tuple[int, ...], tuple]]:
    """Test sequences equivalent to full verification at the given depth.

    Within depth L every minimal repeatability breach has the shape
    [A, B1..Bk, A] with each Bi compatible with A, and every context
    breach is a consecutive triple; both are run from every state, and
    every state is a start, so checking just these shapes is equivalent
    to checking all sequences of length <= L.  Sequences are ordered most
    constraining first so the search prunes early, with the [A, A]
    coverage shapes last.
    """
    names = pauli.OBSERVABLE_NAMES
    k = len(names)
    seqs: list[tuple[tuple[int, ...], tuple]] = []
    if depth >= 3:
        for ctx in _CTX_SEARCH_ORDER:
            idxs = tuple(names.index(nm) for nm in pauli.CONTEXT_NAMES[ctx])
            sign = pauli.PRESCRIBED_SIGN[ctx]
            for perm in itertools.permutations(idxs):
                seqs.append((perm, ("ctx", sign)))
    if depth >= 3:
        for a in range(k):
            comp = [b for b in range(k) if b != a and compatible(names[a], names[b])]
            for mid_len in range(1, depth - 1):
                for mids in itertools.product(comp, repeat=mid_len):
                    seqs.append(((a, *mids, a), ("rep",)))
    if depth >= 2:
        for a in range(k):
            seqs.append(((a, a), ("rep",)))
    return seqs


class _Budget(Exception):
    pass


def search_machines(
    family: CandidateFamily,
    depth: int,
    budget: int = 200_000,
    value_preservation: bool = True,
    max_machines: int = 64,
) -> SearchOutcome:
    """All deterministic completions of the family passing depth-L checks.

    Depth-first with incremental pruning: sequences blocked on an
    unassigned transition wait on it; assigning a transition re-runs its
    waiters and the branch dies on the first breach.  `budget` caps the
    number of search nodes; if it runs out the outcome reports
    exhausted=False.  With value preservation disabled the successor
    domains are not pre-filtered (breaches then surface through the
    [A, A] sequences at depth >= 2).
    """
    n = len(family.labels)
    k = len(pauli.OBSERVABLE_NAMES)
    outputs = family.outputs
    if value_preservation:
        domains = [
            [
                tuple(t for t in family.base_domains[s][i] if outputs[t][i] == outputs[s][i])
                for i in range(k)
            ]
            for s in range(n)
        ]
    else:
        domains = [list(row) for row in family.base_domains]

    shapes = _reduced_sequences(depth)
    seq_defs: list[tuple[int, tuple[int, ...], tuple]] = [
        (start, seq, check) for start in range(n) for seq, check in shapes
    ]

    assign: dict[tuple[int, int], int] = {}
    blocked_at: dict[int, tuple[int, int]] = {}
    waiters: dict[tuple[int, int], set[int]] = {}

    def replay(sid: int):
        start, seq, check = seq_defs[sid]
        st = start
        outs = []
        last = len(seq) - 1
        for pos, i in enumerate(seq):
            outs.append(outputs[st][i])
            if pos == last:
                break
            t = assign.get((st, i))
            if t is None:
                return (st, i)
            st = t
        if check[0] == "ctx":
            prod = outs[0] * outs[1] * outs[2]
            if prod != check[1]:
                return "violated"
        else:
            if outs[0] != outs[-1]:
                return "violated"
        return None

    for sid in range(len(seq_defs)):
        res = replay(sid)
        if res == "violated":
            # No assignments yet, so the family's own outputs are already
            # inconsistent; nothing can complete.
            return SearchOutcome(family.name, depth, (), 0, True, 1, budget)
        if res is not None:
            blocked_at[sid] = res
            waiters.setdefault(res, set()).add(sid)

    def apply(pair: tuple[int, int], t: int):
        assign[pair] = t
        woken = sorted(waiters.pop(pair, set()))
        processed: list[tuple[int, tuple[int, int] | None]] = []
        for sid in woken:
            res = replay(sid)
            if res == "violated":
                for psid, npair in reversed(processed):
                    if npair is not None:
                        waiters[npair].discard(psid)
                    blocked_at[psid] = pair
                for sid2 in woken:
                    blocked_at[sid2] = pair
                waiters[pair] = set(woken)
                del assign[pair]
                return None
            if res is not None:
                waiters.setdefault(res, set()).add(sid)
                blocked_at[sid] = res
                processed.append((sid, res))
            else:
                del blocked_at[sid]
                processed.append((sid, None))
        return (pair, woken, processed)

    def undo(token) -> None:
        pair, woken, processed = token
        for sid, npair in reversed(processed):
            if npair is not None:
                waiters[npair].discard(sid)
        for sid in woken:
            blocked_at[sid] = pair
        if woken:
            waiters[pair] = set(woken)
        del assign[pair]

    machines: list[MealyMachine] = []
    completions = 0
    nodes = 0
    pair_order = [(s, i) for s in range(n) for i in range(k)]

    def realize() -> None:
        nonlocal completions
        completions += 1
        if len(machines) >= max_machines:
            return
        if any(outputs[t][i] != outputs[s][i] for (s, i), t in assign.items()):
            # Only reachable with value preservation disabled at depth 1,
            # where nothing constrains the table; count it, keep no machine.
            return
        m = MealyMachine(
            name=f"{family.name}-completion-{completions}",
            states=family.labels,
            inputs=pauli.OBSERVABLE_NAMES,
            outputs=outputs,
            transitions=tuple(
                tuple(deterministic_row(assign[s, i]) for i in range(k))
                for s in range(n)
            ),
        )
        report = verify_machine(m, depth)
        if not report.passed:
            raise AssertionError(
                "search produced a completion that fails full verification"
            )
        machines.append(m)

    def dfs() -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _Budget
        if blocked_at:
            pair = blocked_at[min(blocked_at)]
        else:
            pair = next((p for p in pair_order if p not in assign), None)
            if pair is None:
                realize()
                return
        for t in domains[pair[0]][pair[1]]:
            token = apply(pair, t)
            if token is None:
                continue
            dfs()
            undo(token)

    exhausted = True
    try:
        dfs()
    except _Budget:
        exhausted = False
    return SearchOutcome(
        family.name, depth, tuple(machines), completions, exhausted, nodes, budget
    )
