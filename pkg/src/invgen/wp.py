"""Exact symbolic weakest preconditions for loop-free MiniImp code.

Rules: assignment substitutes; array stores substitute a functional update;
sequences fold right to left; conditionals split on the guard; a
nondeterministic conditional requires both branches.  Definedness side
conditions (nonzero divisors, in-bounds array accesses) are conjoined in
evaluation order so that the computed WP is false exactly on states where
execution would fault, keeping the WP/interpreter equivalence exact.
"""

from __future__ import annotations

from .logic import simplify, substitute, substitute_array
from .segment import LoopFree
from .syntax import (
    And,
    Arr,
    ArrLen,
    ArrRead,
    Assign,
    BinOp,
    BoolLit,
    Cmp,
    Exists,
    Expr,
    ForAll,
    Formula,
    GhostDecl,
    GhostSet,
    If,
    Implies,
    IntLit,
    InvgenError,
    Ite,
    Nondet,
    Not,
    Or,
    Seq,
    Skip,
    Stmt,
    StoreStmt,
    TRUE,
    Var,
    While,
    conj,
)


class LoopEncounteredError(InvgenError):
    def __init__(self, loop_id: int):
        super().__init__(
            f"loop {loop_id} has no invariant-free WP; "
            "route loops through the invariant pipeline")
        self.loop_id = loop_id


def term_definedness(e: Expr) -> Formula:
    """Conditions under which evaluating ``e`` cannot fault."""
    if isinstance(e, (IntLit, Var)):
        return TRUE
    if isinstance(e, BinOp):
        parts = [term_definedness(e.left), term_definedness(e.right)]
        if e.op in ("/", "%"):
            parts.append(Cmp("!=", e.right, IntLit(0)))
        return conj(parts)
    if isinstance(e, ArrRead):
        base = e.arr
        idx = e.index
        return conj([
            term_definedness(idx),
            Cmp("<=", IntLit(0), idx),
            Cmp("<", idx, ArrLen(base)),
        ])
    if isinstance(e, ArrLen):
        return TRUE
    if isinstance(e, Ite):
        return conj([
            formula_definedness(e.cond),
            Implies(e.cond, term_definedness(e.then)),
            Implies(Not(e.cond), term_definedness(e.els)),
        ])
    raise InvgenError(f"cannot compute definedness of {e!r}")


def formula_definedness(f: Formula) -> Formula:
    """Conditions under which (short-circuit) evaluating ``f`` cannot fault."""
    if isinstance(f, BoolLit):
        return TRUE
    if isinstance(f, Cmp):
        return conj([term_definedness(f.left), term_definedness(f.right)])
    if isinstance(f, And):
        parts: list[Formula] = []
        so_far: list[Formula] = []
        for g in f.args:
            d = formula_definedness(g)
            if d != TRUE:
                parts.append(d if not so_far else Implies(conj(so_far), d))
            so_far.append(g)
        return conj(parts)
    if isinstance(f, Or):
        parts = []
        so_far = []
        for g in f.args:
            d = formula_definedness(g)
            if d != TRUE:
                # g is only evaluated once every earlier disjunct was false.
                parts.append(d if not so_far
                             else Implies(conj([Not(x) for x in so_far]), d))
            so_far.append(g)
        return conj(parts)
    if isinstance(f, Not):
        return formula_definedness(f.arg)
    if isinstance(f, Implies):
        d1 = formula_definedness(f.lhs)
        d2 = formula_definedness(f.rhs)
        parts = []
        if d1 != TRUE:
            parts.append(d1)
        if d2 != TRUE:
            parts.append(Implies(f.lhs, d2))
        return conj(parts)
    if isinstance(f, (ForAll, Exists)):
        dbody = formula_definedness(f.body)
        parts = [term_definedness(f.lo), term_definedness(f.hi)]
        if dbody != TRUE:
            parts.append(ForAll(f.var, f.lo, f.hi, dbody))
        return conj(parts)
    raise InvgenError(f"cannot compute definedness of {f!r}")


def _wp(s: Stmt, q: Formula) -> Formula:
    if isinstance(s, Skip):
        return q
    if isinstance(s, Assign):
        return conj([term_definedness(s.value), substitute(q, s.target, s.value)])
    if isinstance(s, GhostDecl):
        return conj([term_definedness(s.init), substitute(q, s.name, s.init)])
    if isinstance(s, GhostSet):
        return conj([term_definedness(s.value), substitute(q, s.name, s.value)])
    if isinstance(s, StoreStmt):
        bounds = conj([
            term_definedness(s.index),
            term_definedness(s.value),
            Cmp("<=", IntLit(0), s.index),
            Cmp("<", s.index, ArrLen(Arr(s.array))),
        ])
        return conj([bounds, substitute_array(q, s.array, s.index, s.value)])
    if isinstance(s, Seq):
        acc = q
        for t in reversed(s.stmts):
            acc = _wp(t, acc)
        return acc
    if isinstance(s, If):
        if isinstance(s.guard, Nondet):
            return conj([_wp(s.then, q), _wp(s.els, q)])
        return conj([
            formula_definedness(s.guard),
            Implies(s.guard, _wp(s.then, q)),
            Implies(Not(s.guard), _wp(s.els, q)),
        ])
    if isinstance(s, While):
        raise LoopEncounteredError(s.loop_id)
    raise InvgenError(f"cannot compute WP of {s!r}")


def wp_stmt(s: Stmt, q: Formula) -> Formula:
    """WP(s, q) for loop-free ``s``; raises LoopEncounteredError on loops."""
    return simplify(_wp(s, q))


def wp_segment(seg: LoopFree, q: Formula) -> Formula:
    """WP of a loop-free segment; the empty segment is the identity."""
    acc = q
    for t in reversed(seg.stmts):
        acc = _wp(t, acc)
    return simplify(acc)
