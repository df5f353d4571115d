"""invgen: loop invariant generation and verification for MiniImp."""

__version__ = "0.1.0"

from .parser import parse_formula, parse_program, parse_term
from .printer import render_formula, render_program, render_term
from .syntax import Formula, Program

__all__ = [
    "Formula",
    "Program",
    "parse_formula",
    "parse_program",
    "parse_term",
    "render_formula",
    "render_program",
    "render_term",
    "__version__",
]
