"""Proof diagrams: string diagrams over 3-polygraphs for MLL and MLL with units."""
from .formulas import (
    Atom, DualAtom, Tensor, Par, ONE, BOT, dual, parse_formula, print_formula, closure,
)
from .diagrams import Diagram, L, R, compose_seq, compose_par, identity, from_gate
from .permutations import Permutation, canonical_perm_diagram, diagram_to_permutation
from .polygraphs import instantiate, normalize, cut_eliminate, twist_equivalent
from .logic import check_derivation, compile, check_correct, sequentialize, parse_derivation

__version__ = "0.1.0"

__all__ = [
    "Atom", "DualAtom", "Tensor", "Par", "ONE", "BOT", "dual", "parse_formula",
    "print_formula", "closure", "Diagram", "L", "R", "compose_seq", "compose_par",
    "identity", "from_gate", "Permutation", "canonical_perm_diagram",
    "diagram_to_permutation", "instantiate", "normalize", "cut_eliminate",
    "twist_equivalent", "check_derivation", "compile", "check_correct", "sequentialize",
    "parse_derivation",
]
