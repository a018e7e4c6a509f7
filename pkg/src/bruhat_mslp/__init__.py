"""Straight-line programs with memory, and Bruhat decomposition in SL(d, q).

The package builds memory-bounded straight-line programs (MSLPs) over the
standard generators of SL(d, q) that compute the decomposition g = u1 w u2
with u1, u2 lower unitriangular and w monomial.
"""

from .gf import GF, field_of_order, make_field
from .matgroup import Matrix, Permutation, standard_generators, transvection
from .mslp import Copy, Inv, Mul, Program, Show, SlotBuilder, evaluate, parse, serialize
from .wordgen import diag_word, monomial_word, perm_word
from .bruhat import BruhatResult, bruhat_full, bruhat_step2, verify

__all__ = [
    "GF",
    "field_of_order",
    "make_field",
    "Matrix",
    "Permutation",
    "standard_generators",
    "transvection",
    "Copy",
    "Inv",
    "Mul",
    "Program",
    "Show",
    "SlotBuilder",
    "evaluate",
    "parse",
    "serialize",
    "perm_word",
    "diag_word",
    "monomial_word",
    "BruhatResult",
    "bruhat_full",
    "bruhat_step2",
    "verify",
]

__version__ = "0.1.0"
