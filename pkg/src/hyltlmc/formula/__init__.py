"""Formula syntax, parsing, normal forms, closure and consistent sets."""

from .closure import MCS, ClosureSet, closure, maximally_consistent_sets
from .nnf import to_nnf
from .parser import Declarations, parse_formula
from .syntax import (
    ActionAtom,
    And,
    Bot,
    FlowAtom,
    Formula,
    Next,
    Not,
    Or,
    Release,
    Top,
    Until,
    neg,
    size,
    subformulas,
    to_str,
)

__all__ = [
    "MCS",
    "ClosureSet",
    "closure",
    "maximally_consistent_sets",
    "to_nnf",
    "Declarations",
    "parse_formula",
    "ActionAtom",
    "And",
    "Bot",
    "FlowAtom",
    "Formula",
    "Next",
    "Not",
    "Or",
    "Release",
    "Top",
    "Until",
    "neg",
    "size",
    "subformulas",
    "to_str",
]
