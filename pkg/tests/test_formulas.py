import pytest
from hypothesis import given

from proofdiagrams.formulas import (
    BOT, ONE, Atom, DualAtom, FormulaSyntaxError, Par, Tensor, closure, dual,
    format_sequent, parse_formula, parse_sequent, print_formula, subformulas,
)

from oracles import tneg, tparse, tshow
from strategies import formulas

a, b = Atom("a"), Atom("b")


@pytest.mark.trivial
def test_parse_atom():
    assert parse_formula("a") == Atom("a")


@pytest.mark.published
def test_parse_negated_tensor_swaps_operands():
    assert parse_formula("(a*b)^") == Par(DualAtom("b"), DualAtom("a"))


@pytest.mark.published
def test_parse_negated_one_is_bot():
    assert parse_formula("1^") == BOT


@pytest.mark.trivial
@pytest.mark.parametrize("text, expected", [
    ("bot", BOT), ("a^", DualAtom("a")), ("a^^", Atom("a")), ("((a))", Atom("a")),
    ("( a @ b )", Par(a, b)), ("x_1", Atom("x_1")),
])
def test_parse_misc(text, expected):
    assert parse_formula(text) == expected


@pytest.mark.trivial
@pytest.mark.parametrize("text, pos", [("(a*b", 4), ("a b", 2), ("(a+b)", 2), ("", 0), ("A", 0)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.pos == pos


@pytest.mark.trivial
def test_dual_examples():
    assert dual(a) == DualAtom("a")
    assert dual(BOT) == ONE
    assert dual(ONE) == BOT


@pytest.mark.published
def test_dual_tensor_swaps_operands():
    assert dual(Tensor(a, b)) == Par(dual(b), dual(a))


@pytest.mark.trivial
@pytest.mark.parametrize("f, text", [(a, "a"), (Par(DualAtom("b"), DualAtom("a")), "(b^@a^)"), (ONE, "1")])
def test_print_examples(f, text):
    assert print_formula(f) == text


@pytest.mark.trivial
def test_sequents():
    assert parse_sequent("|- a, a^") == (a, DualAtom("a"))
    assert parse_sequent("") == ()
    assert format_sequent((a, Tensor(a, b))) == "a, (a*b)"


@pytest.mark.derived
def test_closure_is_closed():
    u = closure([Tensor(a, Par(b, ONE))])
    assert all(dual(f) in u for f in u)
    assert all(g in u for f in u for g in subformulas(f))
    assert Par(Tensor(BOT, DualAtom("b")), DualAtom("a")) in u


@given(formulas())
def test_dual_is_involutive(f):
    assert dual(dual(f)) == f


@given(formulas())
def test_parse_print_round_trip(f):
    assert parse_formula(print_formula(f)) == f


@given(formulas())
def test_print_parse_is_canonical(f):
    text = print_formula(f)
    assert print_formula(parse_formula(text)) == text


@given(formulas(), formulas())
def test_de_morgan_left_operand(x, y):
    assert dual(Tensor(x, y)).left == dual(y)
    assert dual(Par(x, y)).left == dual(y)


@pytest.mark.derived
@given(formulas())
def test_dual_matches_oracle(f):
    assert print_formula(dual(f)) == tshow(tneg(tparse(print_formula(f))))


@pytest.mark.derived
@given(formulas())
def test_negated_text_matches_oracle(f):
    text = "(" + print_formula(f) + ")^"
    assert print_formula(parse_formula(text)) == tshow(tparse(text))
