"""Assertion-language operations: evaluation, free variables, substitution,
and best-effort simplification.

Evaluation is strict about definedness (unbound identifiers, out-of-bounds
reads, zero divisors raise EvalFault) but connectives short-circuit left to
right, so definedness guards placed before a use protect it.  Division and
modulo are Euclidean, matching the interpreter and SMT-LIB.
"""

from __future__ import annotations

from math import gcd
from typing import Mapping, Optional, Union

from .syntax import (
    And,
    Arr,
    ArrLen,
    ArrRead,
    BinOp,
    BoolLit,
    Cmp,
    Exists,
    Expr,
    FALSE,
    ForAll,
    Formula,
    Implies,
    IntLit,
    InvgenError,
    Ite,
    Not,
    Or,
    Store,
    TRUE,
    Var,
    conj,
    disj,
)

QUANTIFIER_RANGE_CAP = 10 ** 6


class EvalFault(InvgenError):
    """Evaluation error: unbound identifier, bad index, zero divisor."""

    def __init__(self, kind: str, line: Optional[int] = None):
        loc = f" at line {line}" if line is not None else ""
        super().__init__(f"{kind}{loc}")
        self.kind = kind
        self.line = line


def ediv(a: int, b: int) -> int:
    """Euclidean quotient: a == b * ediv(a, b) + emod(a, b), 0 <= emod < |b|."""
    q = a // b
    if a % b != 0 and b < 0:
        q += 1
    return q


def emod(a: int, b: int) -> int:
    r = a % b
    if r != 0 and b < 0:
        r -= b
    return r


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_term_env(e: Expr, env: Mapping[str, object],
                  line: Optional[int] = None) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise EvalFault(f"unbound variable {e.name!r}", line)
        v = env[e.name]
        if isinstance(v, list):
            raise EvalFault(f"{e.name!r} is an array, not a scalar", line)
        return v  # type: ignore[return-value]
    if isinstance(e, BinOp):
        a = eval_term_env(e.left, env, line)
        b = eval_term_env(e.right, env, line)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op in ("/", "%"):
            if b == 0:
                raise EvalFault("division by zero", line)
            return ediv(a, b) if e.op == "/" else emod(a, b)
        raise InvgenError(f"unknown operator {e.op!r}")
    if isinstance(e, ArrRead):
        arr = eval_array_env(e.arr, env, line)
        idx = eval_term_env(e.index, env, line)
        if idx < 0 or idx >= len(arr):
            raise EvalFault(
                f"array index {idx} out of bounds (length {len(arr)})", line)
        return arr[idx]
    if isinstance(e, ArrLen):
        return len(eval_array_env(e.arr, env, line))
    if isinstance(e, Ite):
        if eval_formula_env(e.cond, env, line):
            return eval_term_env(e.then, env, line)
        return eval_term_env(e.els, env, line)
    raise InvgenError(f"cannot evaluate term {e!r}")


def eval_array_env(a, env: Mapping[str, object],
                   line: Optional[int] = None) -> list:
    if isinstance(a, Arr):
        if a.name not in env:
            raise EvalFault(f"unbound array {a.name!r}", line)
        v = env[a.name]
        if not isinstance(v, list):
            raise EvalFault(f"{a.name!r} is not an array", line)
        return v
    if isinstance(a, Store):
        base = list(eval_array_env(a.arr, env, line))
        idx = eval_term_env(a.index, env, line)
        if idx < 0 or idx >= len(base):
            raise EvalFault(
                f"array index {idx} out of bounds (length {len(base)})", line)
        base[idx] = eval_term_env(a.value, env, line)
        return base
    raise InvgenError(f"cannot evaluate array term {a!r}")


def eval_formula_env(f: Formula, env: Mapping[str, object],
                     line: Optional[int] = None) -> bool:
    if isinstance(f, BoolLit):
        return f.value
    if isinstance(f, Cmp):
        a = eval_term_env(f.left, env, line)
        b = eval_term_env(f.right, env, line)
        return _CMP_FUNCS[f.op](a, b)
    if isinstance(f, And):
        return all(eval_formula_env(g, env, line) for g in f.args)
    if isinstance(f, Or):
        return any(eval_formula_env(g, env, line) for g in f.args)
    if isinstance(f, Not):
        return not eval_formula_env(f.arg, env, line)
    if isinstance(f, Implies):
        if not eval_formula_env(f.lhs, env, line):
            return True
        return eval_formula_env(f.rhs, env, line)
    if isinstance(f, (ForAll, Exists)):
        lo = eval_term_env(f.lo, env, line)
        hi = eval_term_env(f.hi, env, line)
        if hi - lo > QUANTIFIER_RANGE_CAP:
            raise EvalFault(f"quantifier range too large ({hi - lo})", line)
        inner = dict(env)
        if isinstance(f, ForAll):
            for k in range(lo, hi):
                inner[f.var] = k
                if not eval_formula_env(f.body, inner, line):
                    return False
            return True
        for k in range(lo, hi):
            inner[f.var] = k
            if eval_formula_env(f.body, inner, line):
                return True
        return False
    raise InvgenError(f"cannot evaluate formula {f!r}")


_CMP_FUNCS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_formula(f: Formula, state) -> bool:
    """Evaluate ``f`` against a State (or any object with ``.values``)."""
    env = state.values if hasattr(state, "values") else state
    return eval_formula_env(f, env)


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------

def free_vars(f: Union[Formula, Expr]) -> set[str]:
    """Free identifiers (scalars and array names) of a formula or term."""
    if isinstance(f, (BoolLit, IntLit)):
        return set()
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, Arr):
        return {f.name}
    if isinstance(f, Store):
        return free_vars(f.arr) | free_vars(f.index) | free_vars(f.value)
    if isinstance(f, ArrRead):
        return free_vars(f.arr) | free_vars(f.index)
    if isinstance(f, ArrLen):
        return free_vars(f.arr)
    if isinstance(f, BinOp):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Ite):
        return free_vars(f.cond) | free_vars(f.then) | free_vars(f.els)
    if isinstance(f, Cmp):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for g in f.args:
            out |= free_vars(g)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, Implies):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, (ForAll, Exists)):
        return (free_vars(f.lo) | free_vars(f.hi)
                | (free_vars(f.body) - {f.var}))
    raise InvgenError(f"cannot compute free variables of {f!r}")


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substitute(f: Formula, x: str, e: Expr) -> Formula:
    """Capture-avoiding substitution of ``e`` for free scalar ``x`` in ``f``."""
    return _subst_formula(f, x, e, free_vars(e))


def subst_term(t: Expr, x: str, e: Expr) -> Expr:
    return _subst_term(t, x, e, free_vars(e))


def _subst_term(t: Expr, x: str, e: Expr, evars: set[str]) -> Expr:
    if isinstance(t, IntLit):
        return t
    if isinstance(t, Var):
        return e if t.name == x else t
    if isinstance(t, BinOp):
        return BinOp(t.op, _subst_term(t.left, x, e, evars),
                     _subst_term(t.right, x, e, evars))
    if isinstance(t, ArrRead):
        return ArrRead(_subst_arr(t.arr, x, e, evars),
                       _subst_term(t.index, x, e, evars))
    if isinstance(t, ArrLen):
        return ArrLen(_subst_arr(t.arr, x, e, evars))
    if isinstance(t, Ite):
        return Ite(_subst_formula(t.cond, x, e, evars),
                   _subst_term(t.then, x, e, evars),
                   _subst_term(t.els, x, e, evars))
    raise InvgenError(f"cannot substitute in term {t!r}")


def _subst_arr(a, x: str, e: Expr, evars: set[str]):
    if isinstance(a, Arr):
        return a
    if isinstance(a, Store):
        return Store(_subst_arr(a.arr, x, e, evars),
                     _subst_term(a.index, x, e, evars),
                     _subst_term(a.value, x, e, evars))
    raise InvgenError(f"cannot substitute in array term {a!r}")


def _subst_formula(f: Formula, x: str, e: Expr, evars: set[str]) -> Formula:
    if isinstance(f, BoolLit):
        return f
    if isinstance(f, Cmp):
        return Cmp(f.op, _subst_term(f.left, x, e, evars),
                   _subst_term(f.right, x, e, evars))
    if isinstance(f, And):
        return And(tuple(_subst_formula(g, x, e, evars) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(_subst_formula(g, x, e, evars) for g in f.args))
    if isinstance(f, Not):
        return Not(_subst_formula(f.arg, x, e, evars))
    if isinstance(f, Implies):
        return Implies(_subst_formula(f.lhs, x, e, evars),
                       _subst_formula(f.rhs, x, e, evars))
    if isinstance(f, (ForAll, Exists)):
        ctor = ForAll if isinstance(f, ForAll) else Exists
        lo = _subst_term(f.lo, x, e, evars)
        hi = _subst_term(f.hi, x, e, evars)
        if f.var == x:
            # x is bound here; only the bounds (which cannot mention the
            # bound variable) see the substitution.
            return ctor(f.var, lo, hi, f.body)
        if f.var in evars:
            new_var = fresh_name(f.var, evars | free_vars(f.body) | {x})
            body = _subst_formula(f.body, f.var, Var(new_var), set())
            body = _subst_formula(body, x, e, evars)
            return ctor(new_var, lo, hi, body)
        return ctor(f.var, lo, hi, _subst_formula(f.body, x, e, evars))
    raise InvgenError(f"cannot substitute in formula {f!r}")


def substitute_array(f: Formula, a: str, i: Expr, v: Expr) -> Formula:
    """Substitute the functional update ``store(a, i, v)`` for array ``a``.

    Every read ``a[j]`` becomes ``ite(j == i, v, a[j])`` after read-over-store
    normalization; ``a.length`` is unchanged (stores preserve length).
    """
    iv_vars = free_vars(i) | free_vars(v)

    def term(t: Expr) -> Expr:
        if isinstance(t, (IntLit, Var)):
            return t
        if isinstance(t, BinOp):
            return BinOp(t.op, term(t.left), term(t.right))
        if isinstance(t, ArrRead):
            base = arr(t.arr)
            return normalize_read(base, term(t.index))
        if isinstance(t, ArrLen):
            return ArrLen(strip_stores(arr(t.arr)))
        if isinstance(t, Ite):
            return Ite(form(t.cond), term(t.then), term(t.els))
        raise InvgenError(f"cannot substitute in term {t!r}")

    def arr(at):
        if isinstance(at, Arr):
            if at.name == a:
                return Store(at, i, v)
            return at
        if isinstance(at, Store):
            return Store(arr(at.arr), term(at.index), term(at.value))
        raise InvgenError(f"cannot substitute in array term {at!r}")

    def form(g: Formula) -> Formula:
        if isinstance(g, BoolLit):
            return g
        if isinstance(g, Cmp):
            return Cmp(g.op, term(g.left), term(g.right))
        if isinstance(g, And):
            return And(tuple(form(x) for x in g.args))
        if isinstance(g, Or):
            return Or(tuple(form(x) for x in g.args))
        if isinstance(g, Not):
            return Not(form(g.arg))
        if isinstance(g, Implies):
            return Implies(form(g.lhs), form(g.rhs))
        if isinstance(g, (ForAll, Exists)):
            ctor = ForAll if isinstance(g, ForAll) else Exists
            if g.var in iv_vars:
                new_var = fresh_name(g.var, iv_vars | free_vars(g.body))
                body = _subst_formula(g.body, g.var, Var(new_var), set())
                return ctor(new_var, term(g.lo), term(g.hi), form(body))
            return ctor(g.var, term(g.lo), term(g.hi), form(g.body))
        raise InvgenError(f"cannot substitute in formula {g!r}")

    return form(f)


def normalize_read(base, index: Expr) -> Expr:
    """Rewrite a read over stores into nested ite terms."""
    if isinstance(base, Store):
        return Ite(Cmp("==", index, base.index), base.value,
                   normalize_read(base.arr, index))
    return ArrRead(base, index)


def strip_stores(at):
    while isinstance(at, Store):
        at = at.arr
    return at


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------
#
# Terms are normalized into a linear combination over "opaque atoms":
# variables, array reads, lengths, ites, and nonlinear products.  The
# simplifier is best-effort rewriting; its contract is logical equivalence
# and idempotence, not syntactic minimality.

class _Lin:
    """const + sum(coeff * atom); atoms keyed by a canonical string."""

    __slots__ = ("const", "atoms")

    def __init__(self, const: int = 0,
                 atoms: Optional[dict[str, tuple[int, Expr]]] = None):
        self.const = const
        self.atoms = atoms or {}

    @staticmethod
    def of_const(c: int) -> "_Lin":
        return _Lin(c, {})

    @staticmethod
    def of_atom(e: Expr) -> "_Lin":
        return _Lin(0, {_atom_key(e): (1, e)})

    def add(self, other: "_Lin", sign: int = 1) -> "_Lin":
        atoms = dict(self.atoms)
        for k, (c, e) in other.atoms.items():
            c0 = atoms.get(k, (0, e))[0]
            c1 = c0 + sign * c
            if c1 == 0:
                atoms.pop(k, None)
            else:
                atoms[k] = (c1, e)
        return _Lin(self.const + sign * other.const, atoms)

    def scale(self, k: int) -> "_Lin":
        if k == 0:
            return _Lin(0, {})
        return _Lin(self.const * k,
                    {key: (c * k, e) for key, (c, e) in self.atoms.items()})

    def is_const(self) -> bool:
        return not self.atoms

    def to_expr(self) -> Expr:
        parts = sorted(self.atoms.items())
        expr: Optional[Expr] = None
        for _, (coeff, atom) in parts:
            if coeff == 1:
                piece: Expr = atom
            elif coeff == -1:
                piece = None  # handled via subtraction below
            else:
                piece = BinOp("*", atom, IntLit(abs(coeff)))
            if expr is None:
                if coeff == -1:
                    expr = BinOp("-", IntLit(0), atom)
                elif coeff < 0:
                    expr = BinOp("-", IntLit(0), piece)  # type: ignore[arg-type]
                else:
                    expr = piece  # type: ignore[assignment]
            else:
                if coeff == -1:
                    expr = BinOp("-", expr, atom)
                elif coeff < 0:
                    expr = BinOp("-", expr, piece)  # type: ignore[arg-type]
                else:
                    expr = BinOp("+", expr, piece)  # type: ignore[arg-type]
        if expr is None:
            return IntLit(self.const)
        if self.const > 0:
            expr = BinOp("+", expr, IntLit(self.const))
        elif self.const < 0:
            expr = BinOp("-", expr, IntLit(-self.const))
        return expr


def _atom_key(e: Expr) -> str:
    from .printer import render_term
    return render_term(e)


def _linearize(e: Expr) -> _Lin:
    """Collect ``e`` (already child-simplified) into linear normal form."""
    if isinstance(e, IntLit):
        return _Lin.of_const(e.value)
    if isinstance(e, BinOp):
        if e.op == "+":
            return _linearize(e.left).add(_linearize(e.right))
        if e.op == "-":
            return _linearize(e.left).add(_linearize(e.right), -1)
        if e.op == "*":
            left = _linearize(e.left)
            right = _linearize(e.right)
            if left.is_const():
                return right.scale(left.const)
            if right.is_const():
                return left.scale(right.const)
            # Nonlinear: the product is a single opaque atom built from the
            # normalized factors, ordered canonically for determinism.
            lf, rf = left.to_expr(), right.to_expr()
            if _atom_key(lf) > _atom_key(rf):
                lf, rf = rf, lf
            return _Lin.of_atom(BinOp("*", lf, rf))
    return _Lin.of_atom(e)


def simplify_term(e: Expr) -> Expr:
    if isinstance(e, IntLit):
        return e
    if isinstance(e, Var):
        return e
    if isinstance(e, BinOp):
        left = simplify_term(e.left)
        right = simplify_term(e.right)
        if e.op in ("+", "-", "*"):
            return _linearize(BinOp(e.op, left, right)).to_expr()
        # Division / modulo: fold constants, apply unit laws.
        if isinstance(left, IntLit) and isinstance(right, IntLit) \
                and right.value != 0:
            if e.op == "/":
                return IntLit(ediv(left.value, right.value))
            return IntLit(emod(left.value, right.value))
        if isinstance(right, IntLit) and right.value == 1:
            return left if e.op == "/" else IntLit(0)
        return BinOp(e.op, left, right)
    if isinstance(e, ArrRead):
        base = _simplify_arr(e.arr)
        idx = simplify_term(e.index)
        read = normalize_read(base, idx)
        if isinstance(read, Ite):
            return _simplify_ite(read)
        return ArrRead(read.arr, read.index)
    if isinstance(e, ArrLen):
        return ArrLen(strip_stores(_simplify_arr(e.arr)))
    if isinstance(e, Ite):
        return _simplify_ite(
            Ite(simplify(e.cond), simplify_term(e.then), simplify_term(e.els)))
    raise InvgenError(f"cannot simplify term {e!r}")


def _simplify_ite(e: Ite) -> Expr:
    cond = simplify(e.cond) if not isinstance(e.cond, BoolLit) else e.cond
    then = simplify_term(e.then) if not isinstance(e.then, (IntLit, Var)) else e.then
    els = simplify_term(e.els) if not isinstance(e.els, (IntLit, Var)) else e.els
    if isinstance(cond, BoolLit):
        return then if cond.value else els
    if then == els:
        return then
    return Ite(cond, then, els)


def _simplify_arr(a):
    if isinstance(a, Arr):
        return a
    if isinstance(a, Store):
        return Store(_simplify_arr(a.arr), simplify_term(a.index),
                     simplify_term(a.value))
    raise InvgenError(f"cannot simplify array term {a!r}")


_FLIP_CMP = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_MIRROR_CMP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def _simplify_cmp(op: str, left: Expr, right: Expr) -> Formula:
    diff = _linearize(simplify_term(BinOp("-", left, right)))
    if diff.is_const():
        return BoolLit(_CMP_FUNCS[op](diff.const, 0))
    # Scale down by the gcd of the coefficients, rounding the constant in
    # whichever direction the comparison preserves over the integers.
    g = 0
    for c, _e in diff.atoms.values():
        g = gcd(g, abs(c))
    if g > 1:
        c = diff.const
        atoms = {k: (cc // g, e) for k, (cc, e) in diff.atoms.items()}
        if op in ("==", "!="):
            if c % g != 0:
                return FALSE if op == "==" else TRUE
            diff = _Lin(c // g, atoms)
        elif op in ("<", ">="):
            diff = _Lin(c // g, atoms)  # floor(c/g)
        else:  # "<=", ">"
            diff = _Lin(-((-c) // g), atoms)  # ceil(c/g)
    # If every coefficient is negative, negate and mirror the comparison.
    if all(c < 0 for c, _e in diff.atoms.values()):
        diff = diff.scale(-1)
        op = _MIRROR_CMP[op]
    # Emit positive-coefficient atoms on the left, the rest (negated) plus
    # the constant on the right:  x + 1 > 5  becomes  x > 4.
    pos = {k: ce for k, ce in diff.atoms.items() if ce[0] > 0}
    neg = {k: (-c, e) for k, (c, e) in diff.atoms.items() if c < 0}
    lhs = _Lin(0, pos).to_expr()
    rhs = _Lin(-diff.const, neg).to_expr()
    return Cmp(op, lhs, rhs)


def _cmp_norm(c: Cmp) -> Optional[tuple[tuple, str, int]]:
    """Normalize to (coefficient-vector, op in {<=,>=,==,!=}, const)."""
    lin = _linearize(BinOp("-", c.left, c.right))
    if lin.is_const():
        return None
    op, k = {
        "<": ("<=", -lin.const - 1),
        "<=": ("<=", -lin.const),
        ">": (">=", -lin.const + 1),
        ">=": (">=", -lin.const),
        "==": ("==", -lin.const),
        "!=": ("!=", -lin.const),
    }[c.op]
    vec = tuple(sorted((key, coeff) for key, (coeff, _e) in lin.atoms.items()))
    if vec[0][1] < 0:  # canonical sign: first coefficient positive
        vec = tuple((key, -coeff) for key, coeff in vec)
        k = -k
        op = {"<=": ">=", ">=": "<=", "==": "==", "!=": "!="}[op]
    return vec, op, k


def cmp_entails(a: Formula, b: Formula) -> bool:
    """True when ``a`` syntactically entails ``b`` (same linear atom vector)."""
    if not isinstance(a, Cmp) or not isinstance(b, Cmp):
        return False
    na, nb = _cmp_norm(a), _cmp_norm(b)
    if na is None or nb is None or na[0] != nb[0]:
        return False
    op1, c1 = na[1], na[2]
    op2, c2 = nb[1], nb[2]
    if op1 == "==":
        return _CMP_FUNCS[op2](c1, c2)
    if op1 == "<=":
        return (op2 == "<=" and c1 <= c2) or (op2 == "!=" and c2 > c1)
    if op1 == ">=":
        return (op2 == ">=" and c1 >= c2) or (op2 == "!=" and c2 < c1)
    if op1 == "!=":
        return op2 == "!=" and c1 == c2
    return False


def cmp_contradicts(a: Formula, b: Formula) -> bool:
    """True when ``a && b`` is unsatisfiable (same linear atom vector)."""
    if not isinstance(a, Cmp) or not isinstance(b, Cmp):
        return False
    na, nb = _cmp_norm(a), _cmp_norm(b)
    if na is None or nb is None or na[0] != nb[0]:
        return False
    op1, c1 = na[1], na[2]
    op2, c2 = nb[1], nb[2]
    pairs = {(op1, op2): (c1, c2), (op2, op1): (c2, c1)}
    for (o1, o2), (k1, k2) in pairs.items():
        if o1 == "<=" and o2 == ">=" and k1 < k2:
            return True
        if o1 == "==" and o2 == "==" and k1 != k2:
            return True
        if o1 == "==" and o2 == "!=" and k1 == k2:
            return True
        if o1 == "==" and o2 == "<=" and k1 > k2:
            return True
        if o1 == "==" and o2 == ">=" and k1 < k2:
            return True
    return False


def simplify(f: Formula) -> Formula:
    """Logically equivalent, idempotent best-effort simplification."""
    if isinstance(f, BoolLit):
        return f
    if isinstance(f, Cmp):
        return _simplify_cmp(f.op, f.left, f.right)
    if isinstance(f, And):
        parts: list[Formula] = []
        for g in f.args:
            sg = simplify(g)
            for piece in (sg.args if isinstance(sg, And) else (sg,)):
                if piece == FALSE:
                    return FALSE
                if piece == TRUE or piece in parts:
                    continue
                # Entailed by an earlier conjunct: redundant and safe to
                # drop (lazy-evaluation order is preserved).
                if any(cmp_entails(p, piece) for p in parts):
                    continue
                if any(cmp_contradicts(p, piece) for p in parts):
                    return FALSE
                parts.append(piece)
        for p in parts:
            if Not(p) in parts or (isinstance(p, Not) and p.arg in parts):
                return FALSE
        return conj(parts)
    if isinstance(f, Or):
        parts = []
        for g in f.args:
            sg = simplify(g)
            for piece in (sg.args if isinstance(sg, Or) else (sg,)):
                if piece == TRUE:
                    return TRUE
                if piece == FALSE or piece in parts:
                    continue
                if any(cmp_entails(piece, p) for p in parts):
                    continue
                parts.append(piece)
        for p in parts:
            if Not(p) in parts or (isinstance(p, Not) and p.arg in parts):
                return TRUE
        return disj(parts)
    if isinstance(f, Not):
        inner = simplify(f.arg)
        if isinstance(inner, BoolLit):
            return BoolLit(not inner.value)
        if isinstance(inner, Not):
            return inner.arg
        if isinstance(inner, Cmp):
            return _simplify_cmp(_FLIP_CMP[inner.op], inner.left, inner.right)
        return Not(inner)
    if isinstance(f, Implies):
        lhs = simplify(f.lhs)
        rhs = simplify(f.rhs)
        if lhs == TRUE:
            return rhs
        if lhs == FALSE or rhs == TRUE:
            return TRUE
        if rhs == FALSE:
            return simplify(Not(lhs))
        if lhs == rhs:
            return TRUE
        lhs_parts = lhs.args if isinstance(lhs, And) else (lhs,)
        rhs_parts = list(rhs.args if isinstance(rhs, And) else (rhs,))
        kept = [r for r in rhs_parts
                if r not in lhs_parts
                and not any(cmp_entails(l, r) for l in lhs_parts)]
        if not kept:
            return TRUE
        if len(kept) < len(rhs_parts):
            return Implies(lhs, conj(kept))
        return Implies(lhs, rhs)
    if isinstance(f, (ForAll, Exists)):
        ctor = ForAll if isinstance(f, ForAll) else Exists
        lo = simplify_term(f.lo)
        hi = simplify_term(f.hi)
        body = simplify(f.body)
        if isinstance(lo, IntLit) and isinstance(hi, IntLit) \
                and hi.value <= lo.value:
            return TRUE if isinstance(f, ForAll) else FALSE
        if body == TRUE:
            if isinstance(f, ForAll):
                return TRUE
            return _simplify_cmp("<", lo, hi)
        if body == FALSE:
            if isinstance(f, Exists):
                return FALSE
            return _simplify_cmp("<=", hi, lo)
        return ctor(f.var, lo, hi, body)
    raise InvgenError(f"cannot simplify formula {f!r}")
