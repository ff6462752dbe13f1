"""Spekkens-style toy bits: ontic states, sign tables, and measurement updates.

A single toy bit has four ontic states (z, x) with the derived y = z*x.
Two toy bits give the 16-point ontic space indexed by generator signs
(z1, z2, x1, x2).  Each ontic state induces a 3x3 sign table over the PM
square whose six context products are all +1, which is exactly why the
noncontextual model cannot match the quantum -1 in the last column.

Measurement keeps the values of every PM observable compatible with the
measured one and randomizes the rest: the successor is drawn uniformly
from a two-element coset of generator-flip patterns.  The whole model is
also exposed as a 16-state stochastic Mealy machine.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

from . import pauli
from .machine import MealyMachine, uniform_row

Sign = int

_SIGN_CHARS = {+1: "+", -1: "-"}
_CHAR_SIGNS = {"+": +1, "-": -1}


def sign_char(v: Sign) -> str:
    return _SIGN_CHARS[v]


def parse_signs(text: str) -> tuple[Sign, ...]:
    try:
        return tuple(_CHAR_SIGNS[ch] for ch in text)
    except KeyError:
        raise ValueError(f"not a sign string: {text!r}") from None


class ToyBitOntic(NamedTuple):
    """One toy bit's hidden state; the derived y value is z*x."""

    z: Sign
    x: Sign

    @property
    def y(self) -> Sign:
        return self.z * self.x


# The four cells of the one-bit state space, in drawing order.  The cell
# numbering makes the three 2+2 partitions come out as X+ = {1,2},
# Y+ = {1,3}, Z+ = {1,4}.
TOYBIT_CELLS: tuple[ToyBitOntic, ...] = (
    ToyBitOntic(+1, +1),
    ToyBitOntic(-1, +1),
    ToyBitOntic(-1, -1),
    ToyBitOntic(+1, -1),
)

_AXIS_VALUE = {
    "X": lambda s: s.x,
    "Y": lambda s: s.y,
    "Z": lambda s: s.z,
}


def toybit_measure(
    s: ToyBitOntic, axis: str, rng: random.Random
) -> tuple[Sign, ToyBitOntic]:
    """Measure one toy bit along X, Y or Z.

    The outcome is the partition containing s; the next state is uniform
    over the two cells of that partition.
    """
    if axis not in _AXIS_VALUE:
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    value = _AXIS_VALUE[axis]
    outcome = value(s)
    members = [c for c in TOYBIT_CELLS if value(c) == outcome]
    return outcome, rng.choice(members)


class OnticState(NamedTuple):
    """Two-toy-bit hidden state, as generator signs."""

    z1: Sign
    z2: Sign
    x1: Sign
    x2: Sign

    @property
    def label(self) -> str:
        return "".join(sign_char(v) for v in self)

    @classmethod
    def from_label(cls, text: str) -> "OnticState":
        signs = parse_signs(text)
        if len(signs) != 4:
            raise ValueError(f"ontic state label needs 4 signs: {text!r}")
        return cls(*signs)


# All 16 states in the 4x4 drawing order: rows are bit-1 cells top to
# bottom, columns are bit-2 cells left to right.
ALL_ONTIC: tuple[OnticState, ...] = tuple(
    OnticState(z1=c1.z, z2=c2.z, x1=c1.x, x2=c2.x)
    for c1 in TOYBIT_CELLS
    for c2 in TOYBIT_CELLS
)

# Each PM observable's value on an ontic state is the product of a subset
# of the four generators (indices into OnticState).
VALUE_SUPPORT: Mapping[str, tuple[int, ...]] = {
    "Z1": (0,),
    "Z2": (1,),
    "Z1Z2": (0, 1),
    "X2": (3,),
    "X1": (2,),
    "X1X2": (2, 3),
    "Z1X2": (0, 3),
    "X1Z2": (2, 1),
    "Y1Y2": (0, 1, 2, 3),
}


def observable_value(s: OnticState, name: str) -> Sign:
    if name not in VALUE_SUPPORT:
        raise ValueError(f"not a PM observable: {name!r}")
    v = 1
    for idx in VALUE_SUPPORT[name]:
        v *= s[idx]
    return v


@dataclass(frozen=True)
class SignTable:
    """A 3x3 grid of +/-1 outcome values, positions matching the PM square."""

    values: tuple[tuple[Sign, ...], ...]

    def value_at(self, name: str) -> Sign:
        r, c = _GRID_POSITION[name]
        return self.values[r][c]

    def context_products(self) -> dict[str, Sign]:
        products = {}
        for ctx, positions in pauli.CONTEXT_POSITIONS.items():
            p = 1
            for r, c in positions:
                p *= self.values[r][c]
            products[ctx] = p
        return products

    def compact(self) -> str:
        return "/".join("".join(sign_char(v) for v in row) for row in self.values)

    @classmethod
    def from_compact(cls, text: str) -> "SignTable":
        rows = text.split("/")
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError(f"not a 3x3 sign table: {text!r}")
        return cls(tuple(parse_signs(r) for r in rows))


_GRID_POSITION: Mapping[str, tuple[int, int]] = {
    name: (r, c)
    for r, row in enumerate(pauli.GRID_NAMES)
    for c, name in enumerate(row)
}


def table_of(s: OnticState) -> SignTable:
    """The PM-square sign table induced by an ontic state.

    Row 1 is (z1, z2, z1*z2), row 2 is (x2, x1, x1*x2), row 3 the mixed
    products; all six context products are +1 by construction.
    """
    return SignTable(
        tuple(
            tuple(observable_value(s, name) for name in row)
            for row in pauli.GRID_NAMES
        )
    )


# PM observables compatible with each observable (including itself),
# straight from the operator algebra.
COMMUTING: Mapping[str, frozenset[str]] = {
    a: frozenset(
        b
        for b in pauli.OBSERVABLE_NAMES
        if pauli.commutes(pauli.OBSERVABLES[a], pauli.OBSERVABLES[b])
    )
    for a in pauli.OBSERVABLE_NAMES
}


def _flip_masks(name: str) -> tuple[tuple[int, ...], ...]:
    # Generator-flip patterns that preserve the value of every observable
    # compatible with `name`.  A flip pattern changes an observable's value
    # iff it hits an odd number of that observable's support generators.
    masks = []
    for bits in itertools.product((0, 1), repeat=4):
        flips = tuple(i for i in range(4) if bits[i])
        if all(
            len(set(flips) & set(VALUE_SUPPORT[other])) % 2 == 0
            for other in COMMUTING[name]
        ):
            masks.append(flips)
    return tuple(masks)


COSET_FLIPS: Mapping[str, tuple[tuple[int, ...], ...]] = {
    name: _flip_masks(name) for name in pauli.OBSERVABLE_NAMES
}


def apply_flips(s: OnticState, flips: Iterable[int]) -> OnticState:
    signs = list(s)
    for idx in flips:
        signs[idx] = -signs[idx]
    return OnticState(*signs)


def coset(s: OnticState, name: str) -> tuple[OnticState, ...]:
    """States reachable after measuring `name` on s (always contains s)."""
    if name not in VALUE_SUPPORT:
        raise ValueError(f"not a PM observable: {name!r}")
    return tuple(apply_flips(s, flips) for flips in COSET_FLIPS[name])


def toy_measure(
    s: OnticState, name: str, rng: random.Random
) -> tuple[Sign, OnticState]:
    """Measure a PM observable on the two-toy-bit model.

    Returns the table value and a successor drawn uniformly from the coset
    that preserves every compatible observable's value.
    """
    outcome = observable_value(s, name)
    return outcome, rng.choice(coset(s, name))


@dataclass(frozen=True)
class EpistemicState:
    """A state of knowledge: the set of ontic states compatible with it."""

    members: frozenset[OnticState]

    @classmethod
    def ignorance(cls) -> "EpistemicState":
        return cls(frozenset(ALL_ONTIC))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, s: OnticState) -> bool:
        return s in self.members


def epistemic_update(e: EpistemicState, name: str, v: Sign) -> EpistemicState:
    """Condition on measuring `name` with outcome v.

    The result is every state reachable by the measurement update from a
    member that would have produced v; an empty result means the outcome
    has probability zero.
    """
    reachable: set[OnticState] = set()
    for s in e.members:
        if observable_value(s, name) == v:
            reachable.update(coset(s, name))
    return EpistemicState(frozenset(reachable))


def spekkens_machine() -> MealyMachine:
    """The toy model as a 16-state stochastic Mealy machine.

    States are the ontic states, outputs come from the sign tables, and
    each transition is uniform over the value-preserving coset.
    """
    labels = tuple(s.label for s in ALL_ONTIC)
    index = {s: i for i, s in enumerate(ALL_ONTIC)}
    outputs = tuple(
        tuple(observable_value(s, name) for name in pauli.OBSERVABLE_NAMES)
        for s in ALL_ONTIC
    )
    transitions = tuple(
        tuple(
            uniform_row(index[t] for t in coset(s, name))
            for name in pauli.OBSERVABLE_NAMES
        )
        for s in ALL_ONTIC
    )
    return MealyMachine(
        name="spekkens16",
        states=labels,
        inputs=pauli.OBSERVABLE_NAMES,
        outputs=outputs,
        transitions=transitions,
    )
