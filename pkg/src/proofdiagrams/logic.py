"""Sequent calculus for MLL with units, and its translation to diagrams.

Sequents are ordered; exchange is an explicit rule. ``ExchRule(sigma, d)``
turns the premise ``A_1, ..., A_k`` into ``A_sigma(1), ..., A_sigma(k)``.
Compilation has two targets: *plain* diagrams ``ε => Γ`` and *control*
diagrams ``ε => L, Γ, R`` whose boundary alone decides correctness.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence, Union

from .diagrams import (
    Diagram, DiagramError, L, R, Step, ax, bot, cut, decompose_parallel,
    last_gates, move_to_end, one, par, tensor,
)
from .formulas import (
    BOT, ONE, Atom, Formula, Par, Tensor, dual, format_sequent, parse_formula_at, print_formula,
)
from .permutations import Permutation, canonical_perm_diagram

__all__ = [
    "AxRule", "OneRule", "BotRule", "ParRule", "TensorRule", "CutRule", "ExchRule",
    "Derivation", "EndSequentReport", "RuleViolation", "DerivationSyntaxError",
    "SequentializationError", "check_derivation", "compile", "check_correct",
    "end_sequent", "sequentialize", "parse_derivation", "print_derivation",
    "identity_derivation", "random_derivation", "conclusion_derivations",
    "rule_count", "exchange_count",
]


@dataclass(frozen=True)
class AxRule:
    a: Formula


@dataclass(frozen=True)
class OneRule:
    pass


@dataclass(frozen=True)
class BotRule:
    premise: "Derivation"


@dataclass(frozen=True)
class ParRule:
    premise: "Derivation"


@dataclass(frozen=True)
class TensorRule:
    left: "Derivation"
    right: "Derivation"


@dataclass(frozen=True)
class CutRule:
    cut_formula: Formula
    left: "Derivation"
    right: "Derivation"


@dataclass(frozen=True)
class ExchRule:
    sigma: Permutation
    premise: "Derivation"


Derivation = Union[AxRule, OneRule, BotRule, ParRule, TensorRule, CutRule, ExchRule]


@dataclass(frozen=True)
class EndSequentReport:
    sequent: tuple
    rule_count: int


class RuleViolation(ValueError):
    def __init__(self, path: str, rule: str, condition: str):
        super().__init__(f"{rule} at {path or 'root'}: {condition}")
        self.path = path
        self.rule = rule
        self.condition = condition


class DerivationSyntaxError(ValueError):
    pass


class SequentializationError(DiagramError):
    pass


# checking --------------------------------------------------------------------

def _check(d: Derivation, path: str) -> tuple:
    if isinstance(d, AxRule):
        return (d.a, dual(d.a)), 1
    if isinstance(d, OneRule):
        return (ONE,), 1
    if isinstance(d, BotRule):
        seq, n = _check(d.premise, path + "0")
        return seq + (BOT,), n + 1
    if isinstance(d, ParRule):
        seq, n = _check(d.premise, path + "0")
        if len(seq) < 2:
            raise RuleViolation(path, "par", f"premise ⊢ {format_sequent(seq)} has fewer than two formulas")
        return seq[:-2] + (Par(seq[-2], seq[-1]),), n + 1
    if isinstance(d, TensorRule):
        left, n = _check(d.left, path + "0")
        right, m = _check(d.right, path + "1")
        if not left or not right:
            raise RuleViolation(path, "tensor", "a premise has an empty sequent")
        return left[:-1] + (Tensor(left[-1], right[0]),) + right[1:], n + m + 1
    if isinstance(d, CutRule):
        left, n = _check(d.left, path + "0")
        right, m = _check(d.right, path + "1")
        a = d.cut_formula
        if not left or left[-1] != a:
            raise RuleViolation(path, "cut", f"left premise must end with {print_formula(a)}")
        if not right or right[0] != dual(a):
            raise RuleViolation(path, "cut", f"right premise must start with {print_formula(dual(a))}")
        return left[:-1] + right[1:], n + m + 1
    if isinstance(d, ExchRule):
        seq, n = _check(d.premise, path + "0")
        if len(d.sigma) != len(seq):
            raise RuleViolation(path, "exch", f"permutation of size {len(d.sigma)} on a sequent of length {len(seq)}")
        return tuple(seq[d.sigma(j) - 1] for j in range(1, len(seq) + 1)), n
    raise TypeError(f"not a derivation: {d!r}")


def check_derivation(d: Derivation) -> EndSequentReport:
    """Check every rule's side condition; ``rule_count`` leaves out exchanges.

    Errors name the node by its path of premise indices from the root
    (``"01"``: right premise of the left premise).
    """
    seq, n = _check(d, "")
    return EndSequentReport(seq, n)


def rule_count(d: Derivation) -> int:
    return check_derivation(d).rule_count


def exchange_count(d: Derivation) -> int:
    if isinstance(d, ExchRule):
        return 1 + exchange_count(d.premise)
    if isinstance(d, (BotRule, ParRule)):
        return exchange_count(d.premise)
    if isinstance(d, (TensorRule, CutRule)):
        return exchange_count(d.left) + exchange_count(d.right)
    return 0


# compilation -----------------------------------------------------------------

def _shift(steps: Sequence[Step], k: int) -> list:
    return [Step(g, o + k) for g, o in steps]


def _build(d: Derivation, control: bool) -> tuple:
    """Return ``(steps, sequent)``; the diagram output is ``[L] Γ [R]`` in control mode."""
    c = 1 if control else 0
    if isinstance(d, AxRule):
        return [Step(ax(d.a, control), 0)], (d.a, dual(d.a))
    if isinstance(d, OneRule):
        return [Step(one(control), 0)], (ONE,)
    if isinstance(d, BotRule):
        steps, seq = _build(d.premise, control)
        return steps + [Step(bot(control), c + len(seq))], seq + (BOT,)
    if isinstance(d, ParRule):
        steps, seq = _build(d.premise, control)
        n = len(seq)
        return (steps + [Step(par(seq[-2], seq[-1], control), c + n - 2)],
                seq[:-2] + (Par(seq[-2], seq[-1]),))
    if isinstance(d, (TensorRule, CutRule)):
        lsteps, left = _build(d.left, control)
        rsteps, right = _build(d.right, control)
        steps = lsteps + _shift(rsteps, len(left) + 2 * c)
        at = c + len(left) - 1
        if isinstance(d, TensorRule):
            g = tensor(left[-1], right[0], control)
            return steps + [Step(g, at)], left[:-1] + (Tensor(left[-1], right[0]),) + right[1:]
        return steps + [Step(cut(d.cut_formula, control), at)], left[:-1] + right[1:]
    if isinstance(d, ExchRule):
        steps, seq = _build(d.premise, control)
        phi = canonical_perm_diagram(d.sigma.inverse(), seq)
        out = phi.output
        return steps + _shift(phi.steps, c), out
    raise TypeError(f"not a derivation: {d!r}")


def compile(d: Derivation, mode: str = "control") -> Diagram:
    """Translate a derivation into a diagram ``ε => Γ`` (plain) or ``ε => L, Γ, R`` (control)."""
    if mode not in ("plain", "control"):
        raise ValueError(f"mode must be 'plain' or 'control', got {mode!r}")
    check_derivation(d)
    steps, _ = _build(d, mode == "control")
    return Diagram((), steps)


# correctness -----------------------------------------------------------------

def check_correct(d: Diagram) -> bool:
    """Typing chain plus one scan of the boundary: ``ε => L, Γ, R`` with no control inside Γ."""
    try:
        d.validate()
    except DiagramError:
        return False
    if d.input:
        return False
    out = d.output
    if len(out) < 2 or out[0] != L or out[-1] != R:
        return False
    for x in out[1:-1]:
        if x == L or x == R:
            return False
    return True


def end_sequent(d: Diagram) -> tuple:
    if not check_correct(d):
        raise SequentializationError("diagram is not a correct control diagram")
    return d.output[1:-1]


# sequentialization -------------------------------------------------------------

def _exch(order: Sequence[int], premise: Derivation) -> Derivation:
    """Conclusion position ``j`` takes premise formula ``order[j]`` (0-based)."""
    if all(i == j for j, i in enumerate(order)):
        return premise
    return ExchRule(Permutation(tuple(i + 1 for i in order)), premise)


def _peel(d: Diagram) -> tuple:
    """Pick the next gate to remove: ``(gate, offset, rest)``."""
    steps = d.canonical_steps
    single = len(steps) == 1
    for i, g, offset in last_gates(d):
        if g.name in ("ax", "one") and not single:
            continue
        return g, offset, Diagram((), move_to_end(steps, i)[:-1])
    raise SequentializationError("no removable gate: diagram is not sequentializable")


def _seq(d: Diagram) -> Derivation:
    # unary peels are collected in a loop so long exchange chains do not recurse
    wrappers = []
    while True:
        if len(d.steps) == 1:
            g = d.steps[0].gate
            if g.name == "ax":
                base = AxRule(g.params[0])
            elif g.name == "one":
                base = OneRule()
            else:
                raise SequentializationError(f"a lone {g.name} gate is not a derivation")
            break
        if not d.steps:
            raise SequentializationError("empty diagram")
        g, o, rest = _peel(d)
        n = len(rest.output) - 2
        i = o - 1
        if g.name == "swap":
            order = list(range(n))
            order[i], order[i + 1] = order[i + 1], order[i]
            wrappers.append(("exch", order))
        elif g.name == "par":
            wrappers.append(("exch", list(range(i)) + [n - 2] + list(range(i, n - 2))))
            wrappers.append(("par", None))
            wrappers.append(("exch", [j for j in range(n) if j not in (i, i + 1)] + [i, i + 1]))
        elif g.name == "bot":
            wrappers.append(("exch", list(range(i)) + [n] + list(range(i, n))))
            wrappers.append(("bot", None))
        elif g.name in ("tensor", "cut"):
            try:
                left, right = decompose_parallel(rest, o + 2)
            except DiagramError as e:
                raise SequentializationError(f"cannot split at the {g.name} gate: {e}") from e
            lder, rder = _seq(left), _seq(right)
            if g.name == "tensor":
                base = TensorRule(lder, rder)
            else:
                base = CutRule(g.params[0], lder, rder)
            break
        else:
            raise SequentializationError(f"gate {g.name} cannot be peeled")
        d = rest
    for kind, order in reversed(wrappers):
        if kind == "exch":
            base = _exch(order, base)
        elif kind == "par":
            base = ParRule(base)
        else:
            base = BotRule(base)
    return base


def sequentialize(d: Diagram) -> Derivation:
    """Recover a derivation of ``end_sequent(d)`` by peeling gates off the top."""
    if not check_correct(d):
        raise SequentializationError("diagram is not a correct control diagram")
    return _seq(d)


# text format -------------------------------------------------------------------

class _SexpReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> DerivationSyntaxError:
        return DerivationSyntaxError(f"{message} at position {self.pos} in {self.text!r}")

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        self.skip()
        if not self.text.startswith(ch, self.pos):
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if start == self.pos:
            raise self.error("expected a keyword")
        return self.text[start:self.pos]

    def formula(self) -> Formula:
        self.skip()
        try:
            f, self.pos = parse_formula_at(self.text, self.pos)
        except ValueError as e:
            raise self.error(f"bad formula ({e})") from e
        return f

    def derivation(self) -> Derivation:
        self.expect("(")
        kw = self.word()
        if kw == "ax":
            d = AxRule(self.formula())
        elif kw == "one":
            d = OneRule()
        elif kw == "bot":
            d = BotRule(self.derivation())
        elif kw == "par":
            d = ParRule(self.derivation())
        elif kw == "tensor":
            d = TensorRule(self.derivation(), self.derivation())
        elif kw == "cut":
            f = self.formula()
            d = CutRule(f, self.derivation(), self.derivation())
        elif kw == "exch":
            self.expect("(")
            if self.word() != "perm":
                raise self.error("expected (perm ...)")
            images = []
            while True:
                self.skip()
                if self.text.startswith(")", self.pos):
                    self.pos += 1
                    break
                images.append(self.word())
            try:
                sigma = Permutation(tuple(int(x) for x in images))
            except ValueError as e:
                raise self.error(str(e)) from e
            d = ExchRule(sigma, self.derivation())
        else:
            raise self.error(f"unknown rule {kw!r}")
        self.expect(")")
        return d


def parse_derivation(text: str) -> Derivation:
    r = _SexpReader(text)
    d = r.derivation()
    r.skip()
    if r.pos != len(text):
        raise r.error("trailing input")
    return d


def print_derivation(d: Derivation) -> str:
    if isinstance(d, AxRule):
        return f"(ax {print_formula(d.a)})"
    if isinstance(d, OneRule):
        return "(one)"
    if isinstance(d, BotRule):
        return f"(bot {print_derivation(d.premise)})"
    if isinstance(d, ParRule):
        return f"(par {print_derivation(d.premise)})"
    if isinstance(d, TensorRule):
        return f"(tensor {print_derivation(d.left)} {print_derivation(d.right)})"
    if isinstance(d, CutRule):
        return f"(cut {print_formula(d.cut_formula)} {print_derivation(d.left)} {print_derivation(d.right)})"
    if isinstance(d, ExchRule):
        images = " ".join(str(x) for x in d.sigma.images)
        return f"(exch (perm {images}) {print_derivation(d.premise)})"
    raise TypeError(f"not a derivation: {d!r}")


# generators and fixtures ---------------------------------------------------------

def _swap12(d: Derivation) -> Derivation:
    return ExchRule(Permutation((2, 1)), d)


def identity_derivation(f: Formula) -> Derivation:
    """An eta-expanded derivation of ``⊢ f^, f`` (axioms on atoms only)."""
    if isinstance(f, Tensor):
        a, b = f.left, f.right
        # ⊢ a^, a⊗b, b^ -> ⊢ a⊗b, b^, a^ -> ⊢ a⊗b, b^⅋a^ -> ⊢ b^⅋a^, a⊗b
        t = TensorRule(identity_derivation(a), _swap12(identity_derivation(b)))
        return _swap12(ParRule(ExchRule(Permutation((2, 3, 1)), t)))
    if isinstance(f, Par):
        a, b = f.left, f.right
        # ⊢ b, b^⊗a^, a -> ⊢ b^⊗a^, a, b -> ⊢ b^⊗a^, a⅋b
        t = TensorRule(_swap12(identity_derivation(b)), identity_derivation(a))
        return ParRule(ExchRule(Permutation((2, 3, 1)), t))
    if f == ONE:
        return _swap12(BotRule(OneRule()))
    if f == BOT:
        return BotRule(OneRule())
    return AxRule(dual(f))


def _random_formula(rng: random.Random, atoms: Sequence[str], depth: int, units: bool) -> Formula:
    if depth <= 0 or rng.random() < 0.5:
        if units and rng.random() < 0.15:
            return rng.choice([ONE, BOT])
        f = Atom(rng.choice(atoms))
        return dual(f) if rng.random() < 0.5 else f
    a = _random_formula(rng, atoms, depth - 1, units)
    b = _random_formula(rng, atoms, depth - 1, units)
    return Tensor(a, b) if rng.random() < 0.5 else Par(a, b)


def random_derivation(rng: random.Random, depth: int = 6, atoms: Sequence[str] = ("a", "b", "c"),
                      units: bool = True, max_cuts: int = 3, max_width: int = 6) -> Derivation:
    """A random valid derivation of height at most ``depth``.

    Cuts are made against eta-expanded identities, so cut elimination has
    real work to do; at most ``max_cuts`` are used.
    """
    cuts = [max_cuts]

    def leaf() -> Derivation:
        if units and rng.random() < 0.2:
            return OneRule()
        return AxRule(_random_formula(rng, atoms, 1, units))

    def gen(h: int) -> tuple:
        if h <= 1:
            d = leaf()
            return d, check_derivation(d).sequent
        choices = ["tensor", "exch", "par", "leaf"]
        if units:
            choices.append("bot")
        if cuts[0] > 0:
            choices.append("cut")
        kind = rng.choice(choices)
        if kind == "leaf":
            return gen(1)
        if kind in ("tensor", "cut"):
            left, ls = gen(rng.randint(1, h - 1))
            if kind == "cut":
                cuts[0] -= 1
                f = ls[-1]
                if rng.random() < 0.5:
                    # ⊢ Σ, f and ⊢ f^, f
                    return CutRule(f, left, identity_derivation(f)), ls
                # ⊢ f, f^^ and ⊢ f^, Σ' with the left premise turned around
                turned = _exch([len(ls) - 1] + list(range(len(ls) - 1)), left)
                return CutRule(dual(f), identity_derivation(dual(f)), turned), (f,) + ls[:-1]
            right, rs = gen(rng.randint(1, h - 1))
            if len(ls) + len(rs) - 1 > max_width:
                return (left, ls) if rng.random() < 0.5 else (right, rs)
            d = TensorRule(left, right)
            return d, check_derivation(d).sequent
        prem, ps = gen(h - 1)
        if kind == "par":
            if len(ps) < 2:
                return prem, ps
            d = ParRule(prem)
        elif kind == "bot":
            if len(ps) + 1 > max_width:
                return prem, ps
            d = BotRule(prem)
        else:
            images = list(range(1, len(ps) + 1))
            rng.shuffle(images)
            d = ExchRule(Permutation(tuple(images)), prem)
        return d, check_derivation(d).sequent

    return gen(depth)[0]


def conclusion_derivations(a: Formula = Atom("a"), b: Formula = Atom("b"),
                           c: Formula = Atom("c")) -> tuple:
    """Two derivations of ``⊢ B⊗C, A⊗D`` with the same proof net.

    The leaves are ``⊢ A, B`` (an axiom on ``a``), ``⊢ C`` and ``⊢ D``
    (axioms on ``b`` and ``c`` closed by a par). The first derivation
    tensors the axiom with ``C`` first, the second with ``D`` first.
    """
    d1 = AxRule(a)
    d2 = ParRule(AxRule(b))
    d3 = ParRule(AxRule(c))
    swap = Permutation((2, 1))
    first = TensorRule(ExchRule(swap, TensorRule(d1, d2)), d3)
    second = ExchRule(swap, TensorRule(ExchRule(swap, TensorRule(ExchRule(swap, d1), d3)), d2))
    return first, second
