"""Stochastic Mealy machines with exact dyadic transition weights.

A machine has a finite set of labelled states, the nine PM observables as
its input alphabet, a +/-1 output per (state, input), and per (state,
input) a probability distribution over successor states.  Distributions
are exact `Fraction`s (everything occurring here is uniform over one, two
or four states).  Machines are immutable after construction and safe to
share.

Two structural invariants are enforced at build time: every distribution
sums to exactly 1, and every positive-probability successor assigns the
measured input the same output as the current state (value preservation).
A transition row may also be empty, marking a deliberately partial
machine such as the four-state diagram fixture.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

TransitionRow = tuple[tuple[int, Fraction], ...]


def uniform_row(successors: Iterable[int]) -> TransitionRow:
    succ = tuple(successors)
    if not succ:
        return ()
    p = Fraction(1, len(succ))
    return tuple((t, p) for t in succ)


def deterministic_row(successor: int) -> TransitionRow:
    return ((successor, Fraction(1)),)


@dataclass(frozen=True)
class MealyMachine:
    name: str
    states: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[tuple[int, ...], ...]
    transitions: tuple[tuple[TransitionRow, ...], ...]
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        n, k = len(self.states), len(self.inputs)
        if len(set(self.states)) != n:
            raise ValueError("duplicate state labels")
        if len(self.outputs) != n or any(len(row) != k for row in self.outputs):
            raise ValueError("output table shape mismatch")
        if len(self.transitions) != n or any(
            len(row) != k for row in self.transitions
        ):
            raise ValueError("transition table shape mismatch")
        for s in range(n):
            for i in range(k):
                if self.outputs[s][i] not in (+1, -1):
                    raise ValueError(f"output at ({s},{i}) is not +/-1")
                row = self.transitions[s][i]
                if not row:
                    continue
                total = sum(p for _, p in row)
                if total != 1:
                    raise ValueError(
                        f"distribution at ({self.states[s]},{self.inputs[i]}) "
                        f"sums to {total}"
                    )
                for t, p in row:
                    if p <= 0:
                        raise ValueError("non-positive transition weight")
                    if not 0 <= t < n:
                        raise ValueError("successor index out of range")
                    if self.outputs[t][i] != self.outputs[s][i]:
                        raise ValueError(
                            "value preservation violated at "
                            f"({self.states[s]},{self.inputs[i]})->{self.states[t]}"
                        )

    def state_index(self, state: int | str) -> int:
        if isinstance(state, int):
            if not 0 <= state < len(self.states):
                raise ValueError(f"state index out of range: {state}")
            return state
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown state label: {state!r}") from None

    def input_index(self, inp: int | str) -> int:
        if isinstance(inp, int):
            if not 0 <= inp < len(self.inputs):
                raise ValueError(f"input index out of range: {inp}")
            return inp
        try:
            return self.inputs.index(inp)
        except ValueError:
            raise ValueError(f"unknown input: {inp!r}") from None

    @property
    def is_total(self) -> bool:
        return all(row for srow in self.transitions for row in srow)

    @property
    def is_deterministic(self) -> bool:
        return all(
            len(row) <= 1 for srow in self.transitions for row in srow
        )

    def successors(self, state: int | str, inp: int | str) -> tuple[int, ...]:
        s, i = self.state_index(state), self.input_index(inp)
        return tuple(t for t, _ in self.transitions[s][i])

    def output(self, state: int | str, inp: int | str) -> int:
        return self.outputs[self.state_index(state)][self.input_index(inp)]

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": list(self.inputs),
            "states": list(self.states),
            "outputs": {
                label: {
                    inp: self.outputs[s][i] for i, inp in enumerate(self.inputs)
                }
                for s, label in enumerate(self.states)
            },
            "transitions": {
                label: {
                    inp: [
                        {"to": self.states[t], "prob": str(p)}
                        for t, p in self.transitions[s][i]
                    ]
                    for i, inp in enumerate(self.inputs)
                }
                for s, label in enumerate(self.states)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, data: dict) -> "MealyMachine":
        states = tuple(data["states"])
        inputs = tuple(data["inputs"])
        index = {label: i for i, label in enumerate(states)}
        outputs = tuple(
            tuple(int(data["outputs"][label][inp]) for inp in inputs)
            for label in states
        )
        transitions = tuple(
            tuple(
                tuple(
                    (index[entry["to"]], Fraction(entry["prob"]))
                    for entry in data["transitions"][label][inp]
                )
                for inp in inputs
            )
            for label in states
        )
        return cls(
            name=str(data.get("name", "machine")),
            states=states,
            inputs=inputs,
            outputs=outputs,
            transitions=transitions,
        )

    @classmethod
    def from_json(cls, text: str) -> "MealyMachine":
        return cls.from_json_dict(json.loads(text))


def step(
    m: MealyMachine, state: int | str, inp: int | str, rng: random.Random
) -> tuple[int, int]:
    """One machine step: emit the output and sample the successor.

    Returns (output, next state index).  With a seeded rng, runs replay
    identically.
    """
    s, i = m.state_index(state), m.input_index(inp)
    row = m.transitions[s][i]
    if not row:
        raise ValueError(
            f"no transition defined at ({m.states[s]}, {m.inputs[i]})"
        )
    out = m.outputs[s][i]
    r = rng.random()
    acc = Fraction(0)
    for t, p in row:
        acc += p
        if r < acc:
            return out, t
    return out, row[-1][0]


@dataclass(frozen=True)
class Transcript:
    """One positive-probability run: inputs, outputs, weight, final state."""

    inputs: tuple[str, ...]
    outputs: tuple[int, ...]
    probability: Fraction
    end_state: str

    def __post_init__(self) -> None:
        if len(self.inputs) != len(self.outputs):
            raise ValueError("inputs/outputs length mismatch")
        if self.probability <= 0:
            raise ValueError("transcript probability must be positive")


def enumerate_transcripts(
    m: MealyMachine, start: int | str, seq: Sequence[str]
) -> tuple[Transcript, ...]:
    """All positive-probability output/state paths for an input sequence.

    Transcripts with identical outputs and end state are merged by summing
    probabilities.  On a partial machine, branches that hit an undefined
    transition before the sequence ends are dropped, so the probabilities
    may sum to less than 1; on total machines they sum to exactly 1.
    """
    s0 = m.state_index(start)
    idx_seq = [m.input_index(o) for o in seq]
    merged: dict[tuple[tuple[int, ...], int], Fraction] = {}

    def walk(s: int, pos: int, outputs: tuple[int, ...], prob: Fraction) -> None:
        if pos == len(idx_seq):
            key = (outputs, s)
            merged[key] = merged.get(key, Fraction(0)) + prob
            return
        i = idx_seq[pos]
        out = m.outputs[s][i]
        row = m.transitions[s][i]
        if pos == len(idx_seq) - 1:
            # Last output needs no outgoing transition; on partial machines
            # the row may be empty, the run still ends in state s.
            if not row:
                key = (outputs + (out,), s)
                merged[key] = merged.get(key, Fraction(0)) + prob
                return
        for t, p in row:
            walk(t, pos + 1, outputs + (out,), prob * p)

    walk(s0, 0, (), Fraction(1))
    return tuple(
        Transcript(tuple(seq), outputs, prob, m.states[s])
        for (outputs, s), prob in sorted(
            merged.items(), key=lambda kv: (kv[0][0], kv[0][1])
        )
    )
