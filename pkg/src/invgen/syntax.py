"""AST node definitions for MiniImp programs and the assertion language.

Everything here is an immutable value: nodes are frozen dataclasses and
compare structurally.  Source positions are carried on statements for error
reporting but are excluded from equality so that parse/render round-trips
compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class InvgenError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Integer- and array-sorted terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class IntLit:
    value: int


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Arr:
    """Reference to a named integer array."""

    name: str


@dataclass(frozen=True, slots=True)
class Store:
    """Functional array update ``store(arr, index, value)``.

    Internal term form produced by WP over array assignments; it never
    appears in surface syntax and is eliminated by read-over-store
    normalization.
    """

    arr: "ArrTerm"
    index: "Expr"
    value: "Expr"


ArrTerm = Union[Arr, Store]


@dataclass(frozen=True, slots=True)
class ArrRead:
    arr: ArrTerm
    index: "Expr"


@dataclass(frozen=True, slots=True)
class ArrLen:
    arr: ArrTerm


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of ARITH_OPS
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Ite:
    """Conditional term; internal form only (read-over-store residue)."""

    cond: "Formula"
    then: "Expr"
    els: "Expr"


Expr = Union[IntLit, Var, ArrRead, ArrLen, BinOp, Ite]


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str  # one of CMP_OPS
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True, slots=True)
class ForAll:
    """Bounded universal: for all var with lo <= var < hi, body holds."""

    var: str
    lo: Expr
    hi: Expr
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    """Bounded existential: some var with lo <= var < hi satisfies body."""

    var: str
    lo: Expr
    hi: Expr
    body: "Formula"


Formula = Union[BoolLit, Cmp, And, Or, Not, Implies, ForAll, Exists]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def conj(parts: list[Formula] | tuple[Formula, ...]) -> Formula:
    """Conjunction of ``parts`` without nesting; [] becomes true."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif p == TRUE:
            continue
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts: list[Formula] | tuple[Formula, ...]) -> Formula:
    """Disjunction of ``parts`` without nesting; [] becomes false."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.args)
        elif p == FALSE:
            continue
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def conjuncts_of(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, And):
        return f.args
    if f == TRUE:
        return ()
    return (f,)


# ---------------------------------------------------------------------------
# Statements and programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Nondet:
    """Marker guard for nondeterministic branching: ``if (nondet()) ...``."""


Guard = Union[Formula, Nondet]


@dataclass(frozen=True, slots=True)
class Skip:
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Assign:
    target: str
    value: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class StoreStmt:
    array: str
    index: Expr
    value: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Seq:
    stmts: tuple["Stmt", ...]


@dataclass(frozen=True, slots=True)
class If:
    guard: Guard
    then: "Stmt"
    els: "Stmt"
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class While:
    guard: Formula
    body: "Stmt"
    loop_id: int
    invariants: tuple[Formula, ...] = ()
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class GhostDecl:
    name: str
    init: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class GhostSet:
    name: str
    value: Expr
    line: Optional[int] = field(default=None, compare=False)


Stmt = Union[Skip, Assign, StoreStmt, Seq, If, While, GhostDecl, GhostSet]


def seq_of(stmts: list[Stmt] | tuple[Stmt, ...]) -> Stmt:
    flat: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        else:
            flat.append(s)
    return Seq(tuple(flat))


def stmts_of(s: Stmt) -> tuple[Stmt, ...]:
    if isinstance(s, Seq):
        return s.stmts
    return (s,)


@dataclass(frozen=True, slots=True)
class Program:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, "int" | "int[]")
    pre: Formula
    post: Formula
    body: Stmt

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)

    @property
    def array_params(self) -> tuple[str, ...]:
        return tuple(n for n, t in self.params if t == "int[]")

    @property
    def int_params(self) -> tuple[str, ...]:
        return tuple(n for n, t in self.params if t == "int")

    @property
    def ghost_decls(self) -> tuple[tuple[str, Expr], ...]:
        out: list[tuple[str, Expr]] = []

        def walk(s: Stmt) -> None:
            if isinstance(s, GhostDecl):
                out.append((s.name, s.init))
            elif isinstance(s, Seq):
                for t in s.stmts:
                    walk(t)
            elif isinstance(s, If):
                walk(s.then)
                walk(s.els)
            elif isinstance(s, While):
                walk(s.body)

        walk(self.body)
        return tuple(out)

    @property
    def ghost_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.ghost_decls)

    @property
    def local_names(self) -> tuple[str, ...]:
        """Scalar locals, i.e. assignment targets that are not params/ghosts."""
        declared = set(self.param_names) | set(self.ghost_names)
        seen: list[str] = []

        def walk(s: Stmt) -> None:
            if isinstance(s, Assign):
                if s.target not in declared and s.target not in seen:
                    seen.append(s.target)
            elif isinstance(s, Seq):
                for t in s.stmts:
                    walk(t)
            elif isinstance(s, If):
                walk(s.then)
                walk(s.els)
            elif isinstance(s, While):
                walk(s.body)

        walk(self.body)
        return tuple(seen)

    def loops(self) -> tuple[While, ...]:
        out: list[While] = []

        def walk(s: Stmt) -> None:
            if isinstance(s, While):
                out.append(s)
                walk(s.body)
            elif isinstance(s, Seq):
                for t in s.stmts:
                    walk(t)
            elif isinstance(s, If):
                walk(s.then)
                walk(s.els)

        walk(self.body)
        return tuple(sorted(out, key=lambda w: w.loop_id))

    def sort_env(self) -> dict[str, str]:
        env = {n: t for n, t in self.params}
        for g in self.ghost_names:
            env[g] = "int"
        for v in self.local_names:
            env[v] = "int"
        return env
