import json
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from proofdiagrams.diagrams import (
    L, R, BoundaryMismatch, ControlLabelError, Diagram, Gate, NotDecomposable, Step,
    TypingError, Wire, ax, canonical_form, commute, compose_par, compose_seq,
    cut, decompose_parallel, dumps, equal_mod_interchange, from_gate, from_json,
    gate_count, identity, last_gates, loads, one, par, swap, tensor, to_json,
)
from proofdiagrams.formulas import ONE, Atom, DualAtom, Tensor

from oracles import interchange_orderings, simulate
from strategies import random_plain_diagram, swap_diagrams

a, b, c, d_ = Atom("a"), Atom("b"), Atom("c"), Atom("d")
A_ = DualAtom("a")
AX_A = from_gate(ax(a, True))
AX_B = from_gate(ax(b, True))


@pytest.mark.published
def test_identity_on_empty_word_is_empty_diagram():
    e = identity()
    assert e.input == e.output == () and gate_count(e) == 0 and e.layers == ()


@pytest.mark.trivial
@pytest.mark.parametrize("word", [[a], [L, a, R]])
def test_identity_wires(word):
    d = identity(word)
    assert d.input == d.output == tuple(word)
    assert gate_count(d) == 0


@pytest.mark.published
def test_from_gate_boundaries():
    assert (AX_A.input, AX_A.output) == ((), (L, a, A_, R))
    t = from_gate(tensor(a, b, True))
    assert (t.input, t.output) == ((a, R, L, b), (Tensor(a, b),))
    s = from_gate(swap(a, b))
    assert (s.input, s.output) == ((a, b), (b, a))


@pytest.mark.trivial
def test_control_gate_shapes():
    assert from_gate(cut(a, True)).input == (a, R, L, A_)
    assert from_gate(one(True)).output == (L, ONE, R)
    assert from_gate(par(a, b, True)).input == (a, b)


@pytest.mark.trivial
def test_swap_rejects_control_labels():
    with pytest.raises(ControlLabelError):
        swap(L, a)


@pytest.mark.published
def test_identity_is_unit_for_sequential_composition():
    phi = compose_seq(from_gate(ax(a)), from_gate(swap(a, A_)))
    assert compose_seq(phi, identity(phi.output)) == phi
    assert compose_seq(identity(phi.input), phi) == phi
    assert compose_seq(AX_A, identity([L, a, A_, R])) == AX_A


@pytest.mark.trivial
def test_sequential_mismatch_reports_words_and_position():
    s = from_gate(swap(a, b))
    with pytest.raises(BoundaryMismatch) as info:
        compose_seq(s, s)
    assert info.value.position == 0
    assert "b, a" in str(info.value) and "a, b" in str(info.value)


@pytest.mark.published
def test_empty_diagram_is_unit_for_parallel_composition():
    assert compose_par(AX_A, identity()) == AX_A
    assert compose_par(identity(), AX_A) == AX_A


@pytest.mark.trivial
def test_parallel_composition_concatenates():
    both = compose_par(AX_A, AX_B)
    assert both.output == (L, a, A_, R, L, b, DualAtom("b"), R)
    assert compose_par(identity([a]), identity([b])) == identity([a, b])
    assert gate_count(both) == 2


@pytest.mark.published
def test_interchange_pair_is_equal():
    phi, psi = from_gate(swap(a, b)), from_gate(swap(c, d_))
    lower_first = compose_seq(compose_par(phi, identity([c, d_])), compose_par(identity([b, a]), psi))
    upper_first = compose_seq(compose_par(identity([a, b]), psi), compose_par(phi, identity([d_, c])))
    assert equal_mod_interchange(lower_first, upper_first)
    assert canonical_form(lower_first).steps == canonical_form(upper_first).steps
    assert equal_mod_interchange(lower_first, compose_par(phi, psi))


@pytest.mark.trivial
def test_equality_distinguishes_labels():
    assert equal_mod_interchange(AX_A, AX_A)
    assert not equal_mod_interchange(AX_A, AX_B)
    assert canonical_form(identity([a, b])) == identity([a, b])


@pytest.mark.trivial
def test_gate_count_filter():
    d = compose_seq(from_gate(ax(a)), from_gate(swap(a, A_)))
    assert gate_count(d, {"swap"}) == 1
    assert gate_count(d, {"ax", "swap"}) == 2


@pytest.mark.trivial
def test_decompose_parallel_examples():
    left, right = decompose_parallel(compose_par(AX_A, AX_B), 4)
    assert left == AX_A and right == AX_B
    with pytest.raises(NotDecomposable):
        decompose_parallel(AX_A, 2)


@pytest.mark.published
def test_decompose_under_tensor_peel():
    # L, a, a^, R, L, b, b^, R with a tensor on a^, R, L, b above: remove the
    # tensor and split at the interior R/L
    phi = compose_par(AX_A, AX_B)
    left, right = decompose_parallel(phi, 4)
    assert left.output == (L, a, A_, R) and right.output == (L, b, DualAtom("b"), R)


@pytest.mark.trivial
def test_last_gates_examples():
    g = ax(a, True)
    assert [(gate, off) for _, gate, off in last_gates(from_gate(g))] == [(g, 0)]
    assert last_gates(identity([a, b])) == []


@pytest.mark.derived
def test_last_gates_finds_top_par():
    phi = compose_seq(compose_par(AX_A, AX_B), from_gate(tensor(A_, b, True)).__class__(
        [L, a, A_, R, L, b, DualAtom("b"), R], [Step(tensor(A_, b, True), 2)]))
    top = compose_seq(phi, Diagram(phi.output, [Step(par(a, Tensor(A_, b)), 1)]))
    found = [(g.name, off) for _, g, off in last_gates(top)]
    assert ("par", 1) in found
    # the oracle: the gate is last iff moving it to the end leaves the output alone
    assert simulate((), top.steps) == list(top.output)


@pytest.mark.trivial
def test_layers_and_json_shape():
    d = compose_seq(from_gate(ax(a)), from_gate(swap(a, A_)))
    assert d.layers == ((Gate(ax(a)),), (Gate(swap(a, A_)),))
    obj = to_json(compose_par(identity([a]), from_gate(swap(a, b))))
    assert obj["inputs"] == ["a", "a", "b"]
    assert obj["layers"] == [[{"id": "a"}, {"gate": "swap", "params": ["a", "b"]}]]


@pytest.mark.trivial
def test_from_layers_checks_typing():
    with pytest.raises(TypingError):
        Diagram.from_layers([a], [[Wire(b)]])
    assert Diagram.from_layers([a, b], [[Gate(swap(a, b))]]) == from_gate(swap(a, b))


@pytest.mark.trivial
def test_typing_error_on_bad_step():
    with pytest.raises(TypingError):
        Diagram([a], [Step(cut(a), 0)])


@pytest.mark.trivial
def test_control_json_round_trip():
    d = compose_seq(compose_par(AX_A, AX_B), Diagram(
        [L, a, A_, R, L, b, DualAtom("b"), R], [Step(tensor(A_, b, True), 2)]))
    text = dumps(d)
    assert json.loads(text)["mode"] == "control"
    assert loads(text) == d
    assert dumps(loads(text)) == text


# properties -------------------------------------------------------------------

seeds = st.integers(0, 10 ** 6)


@given(seeds, st.integers(1, 12))
def test_typing_chain_holds(seed, n):
    d = random_plain_diagram(random.Random(seed), n)
    assert d.validate()
    assert simulate((), d.steps) == list(d.output)
    assert canonical_form(d).validate()


@given(seeds, seeds)
def test_gate_count_is_additive(s1, s2):
    x = random_plain_diagram(random.Random(s1), 6)
    y = random_plain_diagram(random.Random(s2), 6)
    assert gate_count(compose_par(x, y)) == gate_count(x) + gate_count(y)
    z = compose_seq(x, identity(x.output))
    assert gate_count(z) == gate_count(x)
    w = Diagram(x.output, [Step(swap(x.output[0], x.output[1]), 0)]) if len(x.output) > 1 else identity(x.output)
    assert gate_count(compose_seq(x, w)) == gate_count(x) + gate_count(w)


@given(seeds, seeds)
def test_decompose_recovers_parallel_parts(s1, s2):
    x = random_plain_diagram(random.Random(s1), 6)
    y = random_plain_diagram(random.Random(s2), 6)
    left, right = decompose_parallel(compose_par(x, y), len(x.output))
    assert compose_par(left, right) == compose_par(x, y)
    assert left.output == x.output and right.output == y.output


@given(seeds, st.integers(1, 10))
def test_canonical_form_preserves_structure(seed, n):
    d = random_plain_diagram(random.Random(seed), n)
    c = canonical_form(d)
    assert (c.input, c.output) == (d.input, d.output)
    assert Counter(g for g, _ in c.steps) == Counter(g for g, _ in d.steps)
    assert c == d
    assert canonical_form(c).steps == c.steps


@pytest.mark.derived
@given(seeds, st.integers(1, 7))
def test_every_interchange_ordering_is_equal(seed, n):
    d = random_plain_diagram(random.Random(seed), n)
    for order in interchange_orderings(d.steps, limit=200):
        assert Diagram(d.input, [s for s, _ in order]) == d


@given(swap_diagrams(max_wires=3, max_swaps=3), swap_diagrams(max_wires=3, max_swaps=3))
def test_three_interchange_arrangements(phi, psi):
    both = compose_par(phi, psi)
    lower = compose_seq(compose_par(phi, identity(psi.input)), compose_par(identity(phi.output), psi))
    upper = compose_seq(compose_par(identity(phi.input), psi), compose_par(phi, identity(psi.output)))
    assert both == lower == upper


@given(seeds, st.integers(1, 10))
def test_json_round_trip(seed, n):
    d = random_plain_diagram(random.Random(seed), n)
    assert from_json(to_json(d)) == d
    assert dumps(loads(dumps(d))) == dumps(d)


@given(seeds, st.integers(2, 8))
def test_commute_is_reversible(seed, n):
    d = random_plain_diagram(random.Random(seed), n)
    s = list(d.steps)
    for i in range(len(s) - 1):
        out = commute(s[i], s[i + 1], tunnel="none")
        if out is not None:
            # a source moved past a sink lands on the ambiguous tunnelling
            # position, so one of the two tunnel directions undoes the move
            backs = {commute(out[0], out[1], tunnel=t) for t in ("left", "right")}
            assert (s[i], s[i + 1]) in backs
