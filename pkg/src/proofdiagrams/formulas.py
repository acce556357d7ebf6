"""Multiplicative linear logic formulas.

Formulas are kept in negation normal form: negation only ever wraps an atom,
and ``dual`` pushes it through the connectives with De Morgan's laws. Note the
operand swap, ``dual(A * B) == dual(B) @ dual(A)``, which keeps duality
compatible with the planar (non-symmetric) diagrams built on top of it.

Text syntax::

    F ::= atom | "1" | "bot" | "(" F ")" | "(" F "*" F ")" | "(" F "@" F ")"
        | F "^"
    atom ::= [a-z][a-z0-9_]*

``*`` is tensor, ``@`` is par and the postfix ``^`` is linear negation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Atom", "DualAtom", "Tensor", "Par", "One", "Bot", "ONE", "BOT",
    "Formula", "Sequent", "FormulaSyntaxError",
    "dual", "parse_formula", "print_formula", "subformulas", "closure",
    "format_sequent", "parse_sequent", "parse_formula_at",
]

ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class DualAtom:
    name: str

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class One:
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "bot"


ONE = One()
BOT = Bot()

Formula = Union[Atom, DualAtom, Tensor, Par, One, Bot]
Sequent = tuple  # tuple[Formula, ...]; order matters, exchange is explicit


def dual(f: Formula) -> Formula:
    """Linear negation, with the De Morgan operand swap."""
    if isinstance(f, Atom):
        return DualAtom(f.name)
    if isinstance(f, DualAtom):
        return Atom(f.name)
    if isinstance(f, Tensor):
        return Par(dual(f.right), dual(f.left))
    if isinstance(f, Par):
        return Tensor(dual(f.right), dual(f.left))
    if isinstance(f, One):
        return BOT
    if isinstance(f, Bot):
        return ONE
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, DualAtom):
        return f.name + "^"
    if isinstance(f, Tensor):
        return f"({print_formula(f.left)}*{print_formula(f.right)})"
    if isinstance(f, Par):
        return f"({print_formula(f.left)}@{print_formula(f.right)})"
    if isinstance(f, One):
        return "1"
    if isinstance(f, Bot):
        return "bot"
    raise TypeError(f"not a formula: {f!r}")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.text, self.pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def formula(self) -> Formula:
        f = self.primary()
        while self.peek() == "^":
            self.pos += 1
            f = dual(f)
        return f

    def primary(self) -> Formula:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            left = self.formula()
            op = self.peek()
            if op == ")":
                self.pos += 1
                return left
            if op not in ("*", "@"):
                raise self.error(f"expected '*', '@' or ')', found {op or 'end of input'!r}")
            self.pos += 1
            right = self.formula()
            self.expect(")")
            return Tensor(left, right) if op == "*" else Par(left, right)
        if ch == "1":
            self.pos += 1
            return ONE
        m = ATOM_RE.match(self.text, self.pos)
        if m is None:
            raise self.error(f"unknown token {ch or 'end of input'!r}")
        self.pos = m.end()
        name = m.group()
        return BOT if name == "bot" else Atom(name)


def parse_formula(text: str) -> Formula:
    """Parse a formula; negations of compounds are expanded by De Morgan."""
    p = _Parser(text)
    f = p.formula()
    if p.peek():
        raise p.error(f"unexpected {p.peek()!r}")
    return f


def parse_formula_at(text: str, pos: int) -> tuple:
    """Parse one formula starting at ``pos``; returns ``(formula, end)``."""
    p = _Parser(text)
    p.pos = pos
    return p.formula(), p.pos


def parse_sequent(text: str) -> tuple:
    """Parse a comma separated list of formulas, e.g. ``"a, a^"``."""
    text = text.strip()
    if text.startswith("|-"):
        text = text[2:]
    if not text.strip():
        return ()
    return tuple(parse_formula(part) for part in text.split(","))


def format_sequent(formulas) -> str:
    return ", ".join(print_formula(f) for f in formulas)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Tensor, Par)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def closure(formulas) -> frozenset:
    """Smallest set containing ``formulas`` closed under subformulas and dual."""
    out = set()
    for f in formulas:
        for g in subformulas(f):
            out.add(g)
            out.update(subformulas(dual(g)))
    return frozenset(out)
