"""Permutations and the swap diagrams that realise them.

A permutation is stored in one-line notation with 1-based images. The
permutation of a twisting diagram sends input wire ``i`` to the output
position ``sigma(i)``; with that reading, sequential composition of diagrams
is composition of functions (upper after lower).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import permutations as _all_tuples
from typing import Iterator, Sequence

from .diagrams import (
    ControlLabelError, Diagram, DiagramError, Label, Step, is_twisting,
    label_str, swap,
)

__all__ = [
    "Permutation", "NonTwistingGate", "transposition_diagram", "ladder_left",
    "ladder_right", "er", "canonical_perm_diagram", "diagram_to_permutation",
    "all_permutations",
]

_PERM_RE = re.compile(r"\s*perm\s*\(([\d\s]*)\)\s*$")


class NonTwistingGate(DiagramError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, k: int) -> "Permutation":
        """The adjacent transposition ``(k, k+1)`` in ``S_n``."""
        images = list(range(1, n + 1))
        images[k - 1], images[k] = images[k], images[k - 1]
        return cls(tuple(images))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        m = _PERM_RE.match(text)
        if m is None:
            raise ValueError(f"expected 'perm(i j ...)', got {text!r}")
        return cls(tuple(int(x) for x in m.group(1).split()))

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __str__(self) -> str:
        return "perm(" + " ".join(str(x) for x in self.images) + ")"

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        if len(self) != len(other):
            raise ValueError("cannot compose permutations of different sizes")
        return Permutation(tuple(self(other(i)) for i in range(1, len(self) + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self)
        for i, x in enumerate(self.images, start=1):
            inv[x - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, start=1))

    def apply(self, items: Sequence) -> tuple:
        """Rearrange ``items`` so that item ``i`` lands at position ``sigma(i)``."""
        out = [None] * len(items)
        for i, x in enumerate(items, start=1):
            out[self(i) - 1] = x
        return tuple(out)


def all_permutations(n: int) -> Iterator[Permutation]:
    for t in _all_tuples(range(1, n + 1)):
        yield Permutation(t)


def _check_twisting(word: Sequence[Label]) -> None:
    for x in word:
        if not is_twisting(x):
            raise ControlLabelError(f"control label {label_str(x)} cannot be permuted")


def _swaps(word: Sequence[Label], offsets: Sequence[int]) -> list:
    w = list(word)
    steps = []
    for o in offsets:
        steps.append(Step(swap(w[o], w[o + 1]), o))
        w[o], w[o + 1] = w[o + 1], w[o]
    return steps


def transposition_diagram(word: Sequence[Label], k: int) -> Diagram:
    """Swap wires ``k`` and ``k+1`` (1-based) of ``word``."""
    if not 1 <= k < len(word):
        raise DiagramError(f"transposition index {k} outside 1..{len(word) - 1}")
    _check_twisting(word[k - 1:k + 1])
    return Diagram(word, _swaps(word, [k - 1]))


def ladder_left(word: Sequence[Label]) -> Diagram:
    """Carry the first wire across all the others to the last position."""
    _check_twisting(word)
    return Diagram(word, _swaps(word, range(len(word) - 1)))


def ladder_right(word: Sequence[Label]) -> Diagram:
    """Carry the last wire across all the others to the first position."""
    _check_twisting(word)
    return Diagram(word, _swaps(word, range(len(word) - 2, -1, -1)))


def er(sigma: Permutation) -> Permutation:
    """Drop the first wire of ``sigma`` and renumber the remaining images."""
    first = sigma(1)
    return Permutation(tuple(
        x if x < first else x - 1 for x in sigma.images[1:]))


def _canonical_offsets(sigma: Permutation) -> list:
    # bottom-up: first the diagram for er(sigma) on wires 2..n, then a left
    # ladder taking wire 1 to position sigma(1)
    if len(sigma) <= 1:
        return []
    inner = [o + 1 for o in _canonical_offsets(er(sigma))]
    return inner + list(range(sigma(1) - 1))


def canonical_perm_diagram(sigma: Permutation, word: Sequence[Label]) -> Diagram:
    """The swap-normal diagram realising ``sigma`` on ``word``."""
    if len(word) != len(sigma):
        raise DiagramError(f"permutation of size {len(sigma)} on a word of length {len(word)}")
    _check_twisting(word)
    return Diagram(word, _swaps(word, _canonical_offsets(sigma)))


def diagram_to_permutation(d: Diagram) -> Permutation:
    wires = list(range(1, len(d.input) + 1))
    for g, o in d.steps:
        if not g.twisting:
            raise NonTwistingGate(f"gate {g} is not a swap")
        wires[o], wires[o + 1] = wires[o + 1], wires[o]
    images = [0] * len(wires)
    for pos, w in enumerate(wires, start=1):
        images[w - 1] = pos
    return Permutation(tuple(images))
