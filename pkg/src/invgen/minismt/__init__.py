"""A small SMT-LIB solver for linear integer arithmetic with arrays-as-
functions and bounded quantifiers.

This is the default backend behind the implication checker when no external
solver is configured.  It decides the fragment the toolkit emits:

* quantifier-free Presburger arithmetic exactly (Cooper's algorithm);
* bounded quantifiers by guarded instantiation, refined against candidate
  models (sound for both verdicts: unsat is justified by instances, sat
  models are validated by direct evaluation before being reported);
* array reads via Ackermann reduction;
* nonlinear monomials by abstraction (unsat remains sound; sat models are
  validated, with blocking-clause refinement otherwise);
* ``unknown`` whenever validation or refinement budgets run out.

It speaks SMT-LIB v2 over stdin/stdout: ``declare-const``, ``declare-fun``
(unary Int->Int), ``assert``, ``check-sat``, ``get-model``.
"""

from .core import solve_script

__all__ = ["solve_script"]
