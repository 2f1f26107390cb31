"""Search space and candidate representation shared by both optimizers.

A candidate is one value choice per variable; the wire encoding is a
concatenation of one-hot vectors, one segment per variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SearchSpace:
    """Per-variable value counts defining the combinatorial design space."""

    cardinalities: tuple[int, ...]

    def __init__(self, cardinalities):
        cards = tuple(int(k) for k in cardinalities)
        if len(cards) < 1:
            raise ValueError("search space needs at least one variable")
        if any(k < 2 for k in cards):
            raise ValueError(f"every variable needs >= 2 values, got {cards}")
        object.__setattr__(self, "cardinalities", cards)

    def __len__(self) -> int:
        return len(self.cardinalities)

    @property
    def total_combinations(self) -> int:
        return math.prod(self.cardinalities)

    @property
    def one_hot_length(self) -> int:
        return sum(self.cardinalities)


@dataclass(frozen=True)
class Candidate:
    """One 0-based value index per variable."""

    choices: tuple[int, ...]

    def __init__(self, choices):
        object.__setattr__(self, "choices", tuple(int(v) for v in choices))

    def __len__(self) -> int:
        return len(self.choices)

    def validate(self, space: SearchSpace) -> None:
        if len(self.choices) != len(space):
            raise ValueError(
                f"candidate has {len(self.choices)} choices for a "
                f"{len(space)}-variable space"
            )
        for i, (v, k) in enumerate(zip(self.choices, space.cardinalities)):
            if not 0 <= v < k:
                raise ValueError(f"choice {v} out of range [0, {k}) at variable {i}")


def control(space: SearchSpace) -> Candidate:
    """The default configuration: first value of every variable."""
    return Candidate((0,) * len(space))


def to_one_hot(c: Candidate, space: SearchSpace) -> tuple[int, ...]:
    """Concatenated one-hot encoding, one segment per variable."""
    c.validate(space)
    bits = []
    for v, k in zip(c.choices, space.cardinalities):
        seg = [0] * k
        seg[v] = 1
        bits.extend(seg)
    return tuple(bits)


def from_one_hot(bits, space: SearchSpace) -> Candidate:
    """Inverse of to_one_hot; rejects segments without exactly one 1."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != space.one_hot_length:
        raise ValueError(
            f"encoding length {len(bits)} != {space.one_hot_length} for this space"
        )
    choices = []
    offset = 0
    for i, k in enumerate(space.cardinalities):
        seg = bits[offset : offset + k]
        ones = [j for j, b in enumerate(seg) if b == 1]
        if len(ones) != 1 or any(b not in (0, 1) for b in seg):
            raise ValueError(f"segment for variable {i} is not one-hot: {seg}")
        choices.append(ones[0])
        offset += k
    return Candidate(choices)


def one_gene_variants(space: SearchSpace) -> list[Candidate]:
    """All candidates differing from control in exactly one variable.

    Order is fixed (variable-major, then value index ascending) so seeded
    runs are reproducible.
    """
    variants = []
    base = [0] * len(space)
    for i, k in enumerate(space.cardinalities):
        for v in range(1, k):
            choices = list(base)
            choices[i] = v
            variants.append(Candidate(choices))
    return variants
