"""Hypothesis strategies and deterministic generators shared by the tests."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from proofdiagrams.diagrams import BOT, Diagram, Step, ax, bot, cut, one, swap
from proofdiagrams.formulas import ONE, Atom, DualAtom, Par, Tensor, dual

ATOMS = ("a", "b", "c")

literals = st.builds(lambda n, neg: DualAtom(n) if neg else Atom(n),
                     st.sampled_from(ATOMS), st.booleans())


def formulas(max_leaves: int = 20):
    return st.recursive(
        st.one_of(literals, st.just(ONE), st.just(BOT)),
        lambda sub: st.one_of(st.builds(Tensor, sub, sub), st.builds(Par, sub, sub)),
        max_leaves=max_leaves,
    )


@st.composite
def swap_diagrams(draw, max_wires: int = 5, max_swaps: int = 10, labels=None):
    n = draw(st.integers(2, max_wires))
    offsets = draw(st.lists(st.integers(0, n - 2), max_size=max_swaps))
    word = labels or [Atom("x")] * n
    word = list(word[:n])
    frontier = list(word)
    steps = []
    for o in offsets:
        steps.append(Step(swap(frontier[o], frontier[o + 1]), o))
        frontier[o], frontier[o + 1] = frontier[o + 1], frontier[o]
    return Diagram(word, steps)


def random_plain_diagram(rng: random.Random, n: int) -> Diagram:
    """Axioms, swaps and cuts over one atom, placed at random."""
    a = Atom("a")
    frontier, steps = [], []
    for _ in range(n):
        ch = rng.random()
        if ch < 0.3 or len(frontier) < 2:
            g, o = ax(a), rng.randint(0, len(frontier))
        elif ch < 0.6:
            o = rng.randint(0, len(frontier) - 2)
            g = swap(frontier[o], frontier[o + 1])
        else:
            spots = [i for i in range(len(frontier) - 1) if frontier[i + 1] == dual(frontier[i])]
            if not spots:
                continue
            o = rng.choice(spots)
            g = cut(frontier[o])
        steps.append(Step(g, o))
        frontier[o:o + len(g.dom)] = g.cod
    return Diagram((), steps)


def chain_diagram(n_gates: int) -> Diagram:
    """A correct control diagram of about ``n_gates`` gates and bounded width.

    Cycles through a swap, an axiom cut against the last formula and a
    bot/one cut, so the cost per gate does not drift with size.
    """
    a = Atom("a")
    steps = [Step(ax(a, True), 0)]
    x, y = a, dual(a)
    k = 0
    while len(steps) < n_gates:
        move = k % 3
        k += 1
        if move == 0:
            steps.append(Step(swap(x, y), 1))
            x, y = y, x
        elif move == 1:
            steps += [Step(ax(dual(y), True), 4), Step(cut(y, True), 2)]
        else:
            steps += [Step(bot(True), 3), Step(one(True), 5), Step(cut(BOT, True), 3)]
    return Diagram((), steps)
