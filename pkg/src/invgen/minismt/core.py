"""SMT-LIB front end: parse a script, reduce to Presburger, decide.

The reduction is a refinement loop.  Universals are replaced by finite
instantiations (sound for unsat), existentials are skolemized, array reads
are Ackermannized, nonlinear monomials become fresh variables, and the
ground residue goes to Cooper's procedure.  A candidate model is validated
by directly evaluating the assertions; validation failures feed new
instances or blocking clauses back into the loop.  ``sat`` answers are
therefore always backed by a checked model and ``unsat`` answers by a
weakening argument; everything else is ``unknown``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import cooper
from .cooper import (
    CooperBudget,
    lin_add,
    lin_const,
    lin_scale,
    lin_var,
    mk_and,
    mk_eq,
    mk_lt,
    mk_ne,
    mk_or,
)
from .sexpr import SExpr, SExprError, parse_all, render

MAX_ROUNDS = 25
MAX_INST_TERMS = 24
VALIDATION_RANGE_CAP = 100_000


class Unsupported(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _Inconclusive(Exception):
    pass


@dataclass
class Script:
    consts: list[str] = field(default_factory=list)
    funs: list[str] = field(default_factory=list)  # unary Int -> Int
    asserts: list[SExpr] = field(default_factory=list)
    check_sat: bool = False
    get_model: bool = False


def _parse_script(text: str) -> Script:
    script = Script()
    for cmd in parse_all(text):
        if not isinstance(cmd, list) or not cmd:
            raise Unsupported(f"bad command {cmd!r}")
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info", "exit", "push",
                    "pop", "reset"):
            continue
        if head == "declare-const":
            if len(cmd) != 3 or cmd[2] != "Int":
                raise Unsupported(f"only Int constants: {render(cmd)}")
            script.consts.append(cmd[1])
        elif head == "declare-fun":
            if len(cmd) != 4 or cmd[3] != "Int":
                raise Unsupported(f"only Int codomains: {render(cmd)}")
            args = cmd[2]
            if args == []:
                script.consts.append(cmd[1])
            elif args == ["Int"]:
                script.funs.append(cmd[1])
            else:
                raise Unsupported(f"only unary Int functions: {render(cmd)}")
        elif head == "assert":
            if len(cmd) != 2:
                raise Unsupported(f"bad assert: {render(cmd)}")
            script.asserts.append(cmd[1])
        elif head == "check-sat":
            script.check_sat = True
        elif head == "get-model":
            script.get_model = True
        else:
            raise Unsupported(f"unsupported command {head!r}")
    return script


# ---------------------------------------------------------------------------
# Negation normal form over sexpr-level atoms
# ---------------------------------------------------------------------------
# Nodes: True | False | ('and', [..]) | ('or', [..])
#      | ('cmp', op, lhs, rhs)            op in {<, <=, >, >=, =, !=}
#      | ('forall', var, body, rng)       rng = (lo, hi) sexprs or None
# Quantifier binders are alpha-renamed apart; after skolemization only
# universals remain.

_CMP_NEG = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}


class _Names:
    def __init__(self) -> None:
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}!{self.counter}"


def _subst_sym(t: SExpr, name: str, repl: SExpr) -> SExpr:
    if isinstance(t, str):
        return repl if t == name else t
    if isinstance(t, list):
        return [_subst_sym(x, name, repl) for x in t]
    return t


def _range_of_guard(body: SExpr, var: str) -> Optional[tuple[SExpr, SExpr]]:
    """Extract (lo, hi) from the bounded-quantifier guard shapes
    (=> (and (<= lo v) (< v hi)) _) and (and (<= lo v) (< v hi) _)."""
    if not isinstance(body, list) or not body:
        return None
    if body[0] == "=>" and len(body) == 3 and isinstance(body[1], list) \
            and body[1] and body[1][0] == "and" and len(body[1]) >= 3:
        lo_c, hi_c = body[1][1], body[1][2]
    elif body[0] == "and" and len(body) >= 3:
        lo_c, hi_c = body[1], body[2]
    else:
        return None
    if (isinstance(lo_c, list) and len(lo_c) == 3 and lo_c[0] == "<="
            and lo_c[2] == var and isinstance(hi_c, list) and len(hi_c) == 3
            and hi_c[0] == "<" and hi_c[1] == var):
        return lo_c[1], hi_c[2]
    return None


def _nnf(t: SExpr, pos: bool, names: _Names):
    if t == "true":
        return pos
    if t == "false":
        return not pos
    if isinstance(t, str):
        raise Unsupported(f"boolean symbol {t!r} not supported")
    if not isinstance(t, list) or not t:
        raise Unsupported(f"bad boolean term {t!r}")
    head = t[0]
    if head == "not":
        return _nnf(t[1], not pos, names)
    if head == "and":
        return ("and" if pos else "or", [_nnf(x, pos, names) for x in t[1:]])
    if head == "or":
        return ("or" if pos else "and", [_nnf(x, pos, names) for x in t[1:]])
    if head == "=>":
        if len(t) != 3:
            raise Unsupported("n-ary => not supported")
        return ("or" if pos else "and",
                [_nnf(t[1], not pos, names), _nnf(t[2], pos, names)])
    if head in ("forall", "exists"):
        bindings = t[1]
        if len(bindings) != 1 or bindings[0][1] != "Int":
            raise Unsupported("only single Int binders supported")
        var = bindings[0][0]
        rng = _range_of_guard(t[2], var)
        fresh = names.fresh("q")
        body_t = _subst_sym(t[2], var, fresh)
        body = _nnf(body_t, pos, names)
        kind = head if pos else ("exists" if head == "forall" else "forall")
        return (kind, fresh, body, rng)
    if head in ("<", "<=", ">", ">=", "="):
        if len(t) != 3:
            raise Unsupported(f"n-ary {head} not supported")
        return ("cmp", head if pos else _CMP_NEG[head], t[1], t[2])
    if head == "distinct":
        if len(t) != 3:
            raise Unsupported("n-ary distinct not supported")
        return ("cmp", "!=" if pos else "=", t[1], t[2])
    if head == "ite":
        c, a, b = t[1], t[2], t[3]
        return _nnf(["and", ["=>", c, a], ["=>", ["not", c], b]], pos, names)
    raise Unsupported(f"unsupported boolean operator {head!r}")


def _nnf_subst(f, name: str, repl: SExpr):
    if f is True or f is False:
        return f
    if f[0] in ("and", "or"):
        return (f[0], [_nnf_subst(p, name, repl) for p in f[1]])
    if f[0] in ("forall", "exists"):
        rng = f[3]
        if rng is not None:
            rng = (_subst_sym(rng[0], name, repl), _subst_sym(rng[1], name, repl))
        return (f[0], f[1], _nnf_subst(f[2], name, repl), rng)
    return ("cmp", f[1], _subst_sym(f[2], name, repl),
            _subst_sym(f[3], name, repl))


def _skolemize(f, names: _Names, under_forall: bool, consts: list[str]):
    if f is True or f is False:
        return f
    if f[0] in ("and", "or"):
        return (f[0], [_skolemize(p, names, under_forall, consts) for p in f[1]])
    if f[0] == "exists":
        if under_forall:
            raise Unsupported("existential under universal quantifier")
        sk = names.fresh("sk")
        consts.append(sk)
        return _skolemize(_nnf_subst(f[2], f[1], sk), names, under_forall,
                          consts)
    if f[0] == "forall":
        return ("forall", f[1], _skolemize(f[2], names, True, consts), f[3])
    return f


def _instantiate(f, terms: list[SExpr]):
    """Replace each universal by instances at ``terms`` plus its own range
    endpoints.  This weakens the formula, so an unsat answer stays sound;
    interior witnesses are recovered by model-guided refinement."""
    if f is True or f is False:
        return f
    if f[0] in ("and", "or"):
        return (f[0], [_instantiate(p, terms) for p in f[1]])
    if f[0] == "forall":
        local = list(terms)
        seen = {render(t) for t in local}
        if f[3] is not None:
            for t in (f[3][0], ["-", f[3][1], 1]):
                if render(t) not in seen:
                    seen.add(render(t))
                    local.append(t)
        instances = [_instantiate(_nnf_subst(f[2], f[1], t), terms)
                     for t in local]
        return ("and", instances) if instances else True
    return f


def _collect_terms(trees, funs: list[str],
                   skolems: list[str]) -> list[SExpr]:
    """Base instantiation candidates: ground function arguments and skolem
    constants (the would-be counterexample indices)."""
    found: dict[str, SExpr] = {}
    bound: set[str] = set()

    def ground(t: SExpr) -> bool:
        if isinstance(t, int):
            return True
        if isinstance(t, str):
            return t not in bound
        return bool(t) and all(ground(x) for x in t[1:])

    def walk_term(t: SExpr) -> None:
        if isinstance(t, (int, str)) or not t:
            return
        if isinstance(t[0], str) and t[0] in funs and len(t) == 2 \
                and ground(t[1]):
            found.setdefault(render(t[1]), t[1])
        for x in t[1:]:
            walk_term(x)

    def walk(f) -> None:
        if f is True or f is False:
            return
        if f[0] in ("and", "or"):
            for p in f[1]:
                walk(p)
            return
        if f[0] == "forall":
            bound.add(f[1])
            walk(f[2])
            bound.discard(f[1])
            return
        walk_term(f[2])
        walk_term(f[3])

    for tree in trees:
        walk(tree)
    for sk in skolems:
        found.setdefault(sk, sk)
    return [found[k] for k in sorted(found)][:MAX_INST_TERMS]


# ---------------------------------------------------------------------------
# Ground compilation: NNF atoms -> Cooper formulas
# ---------------------------------------------------------------------------
# Polynomials are {monomial: coeff}; a monomial is a sorted tuple of
# variable names (with repetition) and () is the constant term.

Poly = dict


def _poly_const(c: int) -> Poly:
    return {(): c} if c else {}


def _poly_var(v: str) -> Poly:
    return {(v,): 1}


def _poly_add(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for m, c in b.items():
        nc = out.get(m, 0) + sign * c
        if nc == 0:
            out.pop(m, None)
        else:
            out[m] = nc
    return out


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(sorted(m1 + m2))
            nc = out.get(m, 0) + c1 * c2
            if nc == 0:
                out.pop(m, None)
            else:
                out[m] = nc
    return out


class _IteFound(Exception):
    def __init__(self, term: SExpr):
        super().__init__("ite in arithmetic position")
        self.term = term


class _Compiler:
    """Ackermann, div/mod, and monomial registries plus side constraints.

    One compiler persists across refinement rounds so registry names stay
    stable and side constraints accumulate monotonically.
    """

    def __init__(self, funs: list[str], names: _Names):
        self.funs = set(funs)
        self.names = names
        self.reads: dict[str, dict[str, tuple[SExpr, str]]] = \
            {f: {} for f in funs}
        self.divs: dict[str, tuple[SExpr, SExpr, str, str]] = {}
        self.monomials: dict[tuple, str] = {}
        self.side: list = []

    def poly(self, t: SExpr) -> Poly:
        if isinstance(t, int):
            return _poly_const(t)
        if isinstance(t, str):
            return _poly_var(t)
        if not isinstance(t, list) or not t:
            raise Unsupported(f"bad term {t!r}")
        head = t[0]
        if head == "+":
            out: Poly = {}
            for x in t[1:]:
                out = _poly_add(out, self.poly(x))
            return out
        if head == "-":
            if len(t) == 2:
                return _poly_add({}, self.poly(t[1]), -1)
            out = self.poly(t[1])
            for x in t[2:]:
                out = _poly_add(out, self.poly(x), -1)
            return out
        if head == "*":
            out = _poly_const(1)
            for x in t[1:]:
                out = _poly_mul(out, self.poly(x))
            return out
        if head in ("div", "mod"):
            if len(t) != 3:
                raise Unsupported("div/mod arity")
            return _poly_var(self.div_var(t[1], t[2], head))
        if head in self.funs:
            if len(t) != 2:
                raise Unsupported(f"function {head!r} arity")
            return _poly_var(self.read_var(head, t[1]))
        if head == "ite":
            raise _IteFound(t)
        raise Unsupported(f"unsupported term operator {head!r}")

    def read_var(self, fn: str, arg: SExpr) -> str:
        key = render(arg)
        table = self.reads[fn]
        if key not in table:
            var = self.names.fresh(f"rd.{fn}")
            arg_poly = self.poly(arg)  # before inserting, for nested reads
            table[key] = (arg, var)
            for other_key, (other_arg, other_var) in list(table.items()):
                if other_key == key:
                    continue
                diff_args = _poly_add(arg_poly, self.poly(other_arg), -1)
                diff_vals = _poly_add(_poly_var(var), _poly_var(other_var), -1)
                self.side.append(mk_or([
                    mk_ne(self.lin_of_poly(diff_args)),
                    mk_eq(self.lin_of_poly(diff_vals)),
                ]))
        return table[key][1]

    def div_var(self, a: SExpr, b: SExpr, which: str) -> str:
        key = f"{render(a)}|{render(b)}"
        if key not in self.divs:
            q = self.names.fresh("dq")
            r = self.names.fresh("dr")
            self.divs[key] = (a, b, q, r)
            pa = self.poly(a)
            pb = self.poly(b)
            eqn = mk_eq(self.lin_of_poly(_poly_add(
                pa, _poly_add(_poly_mul(pb, _poly_var(q)), _poly_var(r)), -1)))
            r_lo = mk_lt(self.lin_of_poly(
                _poly_add(_poly_const(-1), _poly_var(r), -1)))  # r >= 0
            b_pos = mk_lt(self.lin_of_poly(_poly_add({}, pb, -1)))  # b > 0
            b_neg = mk_lt(self.lin_of_poly(pb))  # b < 0
            r_hi_pos = mk_lt(self.lin_of_poly(_poly_add(_poly_var(r), pb, -1)))
            r_hi_neg = mk_lt(self.lin_of_poly(_poly_add(_poly_var(r), pb)))
            # b = 0 leaves q and r unconstrained (SMT-LIB underspecifies).
            self.side.append(mk_or([
                mk_and([b_pos, eqn, r_lo, r_hi_pos]),
                mk_and([b_neg, eqn, r_lo, r_hi_neg]),
                mk_eq(self.lin_of_poly(pb)),
            ]))
        q, r = self.divs[key][2], self.divs[key][3]
        return q if which == "div" else r

    def monomial_var(self, m: tuple) -> str:
        if m not in self.monomials:
            self.monomials[m] = self.names.fresh("nl")
        return self.monomials[m]

    def lin_of_poly(self, p: Poly):
        lin = lin_const(p.get((), 0))
        for m, c in sorted(p.items()):
            if m == ():
                continue
            if len(m) == 1:
                lin = lin_add(lin, lin_scale(lin_var(m[0]), c))
            else:
                lin = lin_add(lin, lin_scale(lin_var(self.monomial_var(m)), c))
        return lin

    def compile(self, f):
        if f is True:
            return cooper.TRUE
        if f is False:
            return cooper.FALSE
        if f[0] == "and":
            return mk_and([self.compile(p) for p in f[1]])
        if f[0] == "or":
            return mk_or([self.compile(p) for p in f[1]])
        if f[0] in ("forall", "exists"):
            raise Unsupported("quantifier survived instantiation")
        _, op, l, r = f
        try:
            diff = _poly_add(self.poly(l), self.poly(r), -1)
        except _IteFound as found:
            return self.compile(_split_ite(f, found.term, self.names))
        lin = self.lin_of_poly(diff)  # lin encodes l - r
        if op == "<":
            return mk_lt(lin)
        if op == "<=":
            return mk_lt(lin_add(lin, lin_const(-1)))  # t <= 0 <=> t - 1 < 0
        if op == ">":
            return mk_lt(lin_scale(lin, -1))
        if op == ">=":
            return mk_lt(lin_add(lin_scale(lin, -1), lin_const(-1)))
        if op == "=":
            return mk_eq(lin)
        if op == "!=":
            return mk_ne(lin)
        raise Unsupported(f"comparison {op!r}")


def _split_ite(atom, ite_term: SExpr, names: _Names):
    """Case-split an atom on one arithmetic ite occurring inside it."""
    cond, then, els = ite_term[1], ite_term[2], ite_term[3]

    def replace(t: SExpr, repl: SExpr) -> SExpr:
        if t is ite_term:
            return repl
        if isinstance(t, list):
            return [replace(x, repl) for x in t]
        return t

    then_atom = ("cmp", atom[1], replace(atom[2], then), replace(atom[3], then))
    els_atom = ("cmp", atom[1], replace(atom[2], els), replace(atom[3], els))
    return ("or", [("and", [_nnf(cond, True, names), then_atom]),
                   ("and", [_nnf(cond, False, names), els_atom])])


# ---------------------------------------------------------------------------
# Model construction and validation
# ---------------------------------------------------------------------------

class _Model:
    def __init__(self, assignment: dict[str, int], compiler: _Compiler,
                 consts: list[str], funs: list[str]):
        self.raw = assignment
        self.consts = {c: assignment.get(c, 0) for c in consts}
        self.tables: dict[str, dict[int, int]] = {}
        self.compiler = compiler
        for fn in funs:
            table: dict[int, int] = {}
            for _key, (arg, var) in compiler.reads[fn].items():
                try:
                    val = self.eval_term(arg, {})
                except _Inconclusive:
                    continue
                table[val] = assignment.get(var, 0)
            self.tables[fn] = table

    def eval_term(self, t: SExpr, env: dict[str, int]) -> int:
        if isinstance(t, int):
            return t
        if isinstance(t, str):
            if t in env:
                return env[t]
            if t in self.consts:
                return self.consts[t]
            return self.raw.get(t, 0)
        head = t[0]
        if head == "+":
            return sum(self.eval_term(x, env) for x in t[1:])
        if head == "-":
            if len(t) == 2:
                return -self.eval_term(t[1], env)
            acc = self.eval_term(t[1], env)
            for x in t[2:]:
                acc -= self.eval_term(x, env)
            return acc
        if head == "*":
            acc = 1
            for x in t[1:]:
                acc *= self.eval_term(x, env)
            return acc
        if head in ("div", "mod"):
            a = self.eval_term(t[1], env)
            b = self.eval_term(t[2], env)
            if b == 0:
                # Uninterpreted at zero: use the registry assignment when
                # this exact occurrence was compiled, else give up.
                key = f"{render(t[1])}|{render(t[2])}"
                entry = self.compiler.divs.get(key)
                if entry is None or env:
                    raise _Inconclusive()
                var = entry[2] if head == "div" else entry[3]
                return self.raw.get(var, 0)
            q = a // b
            if a % b != 0 and b < 0:
                q += 1
            return q if head == "div" else a - b * q
        if head == "ite":
            return self.eval_term(t[2] if self.eval_formula_sexpr(t[1], env)
                                  else t[3], env)
        if head in self.tables:
            arg = self.eval_term(t[1], env)
            return self.tables[head].get(arg, 0)
        raise _Inconclusive()

    def eval_formula_sexpr(self, t: SExpr, env: dict[str, int]) -> bool:
        if t == "true":
            return True
        if t == "false":
            return False
        head = t[0]
        if head == "not":
            return not self.eval_formula_sexpr(t[1], env)
        if head == "and":
            return all(self.eval_formula_sexpr(x, env) for x in t[1:])
        if head == "or":
            return any(self.eval_formula_sexpr(x, env) for x in t[1:])
        if head == "=>":
            return (not self.eval_formula_sexpr(t[1], env)
                    or self.eval_formula_sexpr(t[2], env))
        if head in ("<", "<=", ">", ">=", "=", "distinct"):
            a = self.eval_term(t[1], env)
            b = self.eval_term(t[2], env)
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
                    "=": a == b, "distinct": a != b}[head]
        raise _Inconclusive()

    def eval_nnf(self, f, env: dict[str, int]) -> bool:
        if f is True or f is False:
            return bool(f)
        if f[0] == "and":
            return all(self.eval_nnf(p, env) for p in f[1])
        if f[0] == "or":
            return any(self.eval_nnf(p, env) for p in f[1])
        if f[0] == "forall":
            lo, hi = self._range_values(f, env)
            child = dict(env)
            for k in range(lo, hi):
                child[f[1]] = k
                if not self.eval_nnf(f[2], child):
                    return False
            return True
        _, op, l, r = f
        a = self.eval_term(l, env)
        b = self.eval_term(r, env)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
                "=": a == b, "!=": a != b}[op]

    def _range_values(self, f, env: dict[str, int]) -> tuple[int, int]:
        if f[3] is None:
            raise _Inconclusive()
        lo = self.eval_term(f[3][0], env)
        hi = self.eval_term(f[3][1], env)
        if hi - lo > VALIDATION_RANGE_CAP:
            raise _Inconclusive()
        return lo, hi

    def failing_instances(self, f, env: dict[str, int]) -> list[int]:
        """Witness values of universals that evaluate false under the model."""
        out: list[int] = []
        if f is True or f is False:
            return out
        if f[0] in ("and", "or"):
            for p in f[1]:
                out.extend(self.failing_instances(p, env))
            return out
        if f[0] == "forall":
            lo, hi = self._range_values(f, env)
            child = dict(env)
            for k in range(lo, hi):
                child[f[1]] = k
                if not self.eval_nnf(f[2], child):
                    out.append(k)
                    break
            # also descend for nested universals under the first values
            return out
        return out


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------

@dataclass
class SolveOutcome:
    status: str  # "sat" | "unsat" | "unknown"
    reason: str = ""
    model_lines: Optional[list[str]] = None


def solve(script: Script, max_nodes: int = 300_000) -> SolveOutcome:
    names = _Names()
    consts = list(script.consts)
    try:
        trees = [_nnf(a, True, names) for a in script.asserts]
        trees = [_skolemize(t, names, False, consts) for t in trees]
    except Unsupported as exc:
        return SolveOutcome("unknown", reason=str(exc))

    compiler = _Compiler(script.funs, names)
    skolems = consts[len(script.consts):]
    terms = _collect_terms(trees, script.funs, skolems)
    known_terms = {render(t) for t in terms}
    blocking: list = []

    for _round in range(MAX_ROUNDS):
        try:
            ground = [_instantiate(t, terms) for t in trees]
            compiled = [compiler.compile(g) for g in ground]
            phi = mk_and(compiled + compiler.side + blocking)
            assignment = cooper.sat_model(phi, max_nodes=max_nodes)
        except Unsupported as exc:
            return SolveOutcome("unknown", reason=str(exc))
        except CooperBudget as exc:
            return SolveOutcome("unknown", reason=str(exc))
        if assignment is None:
            return SolveOutcome("unsat")
        model = _Model(assignment, compiler, consts, script.funs)
        try:
            failing = [t for t in trees if not model.eval_nnf(t, {})]
        except _Inconclusive:
            return SolveOutcome("unknown", reason="model validation failed")
        if not failing:
            return SolveOutcome(
                "sat", model_lines=_model_lines(script, model))
        progress = False
        try:
            for tree in failing:
                for k in model.failing_instances(tree, {}):
                    if str(k) not in known_terms:
                        known_terms.add(str(k))
                        terms.append(k)
                        progress = True
        except _Inconclusive:
            return SolveOutcome("unknown", reason="model validation failed")
        if not progress:
            clause = _tighten_or_block(compiler, assignment)
            if clause is None:
                return SolveOutcome("unknown", reason="refinement stalled")
            blocking.append(clause)
    return SolveOutcome("unknown", reason="refinement budget exhausted")


def _tighten_or_block(compiler: _Compiler, assignment: dict[str, int]):
    """Lazy linearization: pin one variable of a mismatched monomial to its
    model value; fall back to blocking the whole assignment."""
    for m, var in sorted(compiler.monomials.items()):
        want = 1
        for v in m:
            want *= assignment.get(v, 0)
        if assignment.get(var, 0) != want:
            v0 = m[0]
            c = assignment.get(v0, 0)
            rest = m[1:]
            rest_poly = (_poly_var(rest[0]) if len(rest) == 1
                         else _poly_var(compiler.monomial_var(rest)))
            # (v0 != c) or (m_var == c * rest)
            lhs = lin_add(lin_var(var),
                          lin_scale(compiler.lin_of_poly(rest_poly), -c))
            return mk_or([
                mk_ne(lin_add(lin_var(v0), lin_const(-c))),
                mk_eq(lhs),
            ])
    scalars = sorted(assignment)
    if not scalars:
        return None
    return mk_or([mk_ne(lin_add(lin_var(v), lin_const(-assignment[v])))
                  for v in scalars])


def _model_lines(script: Script, model: _Model) -> list[str]:
    lines = []
    for c in script.consts:
        val = model.consts.get(c, 0)
        lines.append(f"(define-fun {c} () Int {render(val)})")
    for fn in script.funs:
        table = model.tables.get(fn, {})
        body = "0"
        for arg in sorted(table, reverse=True):
            body = f"(ite (= x!0 {render(arg)}) {render(table[arg])} {body})"
        lines.append(f"(define-fun {fn} ((x!0 Int)) Int {body})")
    return lines


def solve_script(text: str) -> str:
    """Run a full SMT-LIB script; returns the solver's textual reply."""
    try:
        script = _parse_script(text)
    except (Unsupported, SExprError) as exc:
        return f"(error \"{exc}\")\nunknown"
    if not script.check_sat:
        return ""
    outcome = solve(script)
    reply = [outcome.status]
    if script.get_model:
        if outcome.status == "sat" and outcome.model_lines is not None:
            reply.append("(")
            reply.extend("  " + line for line in outcome.model_lines)
            reply.append(")")
        elif outcome.status != "sat":
            reply.append(f"(error \"model unavailable: {outcome.status}\")")
    return "\n".join(reply)
