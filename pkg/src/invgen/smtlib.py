"""Translation of formulas to SMT-LIB v2 queries and parsing of solver
replies (status + model).

Arrays are modeled as total functions Int -> Int plus a nonnegative length
constant ``<name>.len``; bounds side conditions come from the WP engine,
not from the theory.
"""

from __future__ import annotations

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
    ForAll,
    Formula,
    Implies,
    IntLit,
    InvgenError,
    Ite,
    Not,
    Or,
    Store,
    Var,
)


class TranslationUnsupported(InvgenError):
    pass


def infer_sorts(formulas: list[Formula]) -> tuple[list[str], list[str]]:
    """(scalar names, array names) free in ``formulas``, sorted.

    A name used both as a scalar and as an array is a translation error.
    """
    scalars: set[str] = set()
    arrays: set[str] = set()
    bound: list[set[str]] = [set()]

    def term(e: Expr) -> None:
        if isinstance(e, IntLit):
            return
        if isinstance(e, Var):
            if e.name not in bound[0]:
                scalars.add(e.name)
            return
        if isinstance(e, BinOp):
            term(e.left)
            term(e.right)
            return
        if isinstance(e, ArrRead):
            arr(e.arr)
            term(e.index)
            return
        if isinstance(e, ArrLen):
            arr(e.arr)
            return
        if isinstance(e, Ite):
            form(e.cond)
            term(e.then)
            term(e.els)
            return
        raise TranslationUnsupported(f"cannot translate term {e!r}")

    def arr(a) -> None:
        if isinstance(a, Arr):
            arrays.add(a.name)
            return
        if isinstance(a, Store):
            raise TranslationUnsupported(
                "array store terms must be normalized before translation")
        raise TranslationUnsupported(f"cannot translate array term {a!r}")

    def form(f: Formula) -> None:
        if isinstance(f, BoolLit):
            return
        if isinstance(f, Cmp):
            term(f.left)
            term(f.right)
            return
        if isinstance(f, (And, Or)):
            for g in f.args:
                form(g)
            return
        if isinstance(f, Not):
            form(f.arg)
            return
        if isinstance(f, Implies):
            form(f.lhs)
            form(f.rhs)
            return
        if isinstance(f, (ForAll, Exists)):
            term(f.lo)
            term(f.hi)
            bound[0] = bound[0] | {f.var}
            form(f.body)
            bound[0] = bound[0] - {f.var}
            return
        raise TranslationUnsupported(f"cannot translate formula {f!r}")

    for f in formulas:
        form(f)
    both = scalars & arrays
    if both:
        raise TranslationUnsupported(
            f"identifiers used as both scalar and array: {sorted(both)}")
    return sorted(scalars), sorted(arrays)


_OPS = {"+": "+", "-": "-", "*": "*", "/": "div", "%": "mod"}


def term_to_smt(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        return f"({_OPS[e.op]} {term_to_smt(e.left)} {term_to_smt(e.right)})"
    if isinstance(e, ArrRead):
        if not isinstance(e.arr, Arr):
            raise TranslationUnsupported("unnormalized array read")
        return f"({e.arr.name} {term_to_smt(e.index)})"
    if isinstance(e, ArrLen):
        if not isinstance(e.arr, Arr):
            raise TranslationUnsupported("unnormalized array length")
        return f"{e.arr.name}.len"
    if isinstance(e, Ite):
        return (f"(ite {formula_to_smt(e.cond)} {term_to_smt(e.then)} "
                f"{term_to_smt(e.els)})")
    raise TranslationUnsupported(f"cannot translate term {e!r}")


def formula_to_smt(f: Formula) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        a, b = term_to_smt(f.left), term_to_smt(f.right)
        if f.op == "==":
            return f"(= {a} {b})"
        if f.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({f.op} {a} {b})"
    if isinstance(f, And):
        return "(and " + " ".join(formula_to_smt(g) for g in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula_to_smt(g) for g in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {formula_to_smt(f.arg)})"
    if isinstance(f, Implies):
        return f"(=> {formula_to_smt(f.lhs)} {formula_to_smt(f.rhs)})"
    if isinstance(f, ForAll):
        return (f"(forall (({f.var} Int)) "
                f"(=> (and (<= {term_to_smt(f.lo)} {f.var}) "
                f"(< {f.var} {term_to_smt(f.hi)})) "
                f"{formula_to_smt(f.body)}))")
    if isinstance(f, Exists):
        return (f"(exists (({f.var} Int)) "
                f"(and (<= {term_to_smt(f.lo)} {f.var}) "
                f"(< {f.var} {term_to_smt(f.hi)}) "
                f"{formula_to_smt(f.body)}))")
    raise TranslationUnsupported(f"cannot translate formula {f!r}")


def to_smtlib(antecedent: Formula, consequent: Formula,
              logic: str = "ALL") -> str:
    """The full validity query: sat means the implication is refutable."""
    scalars, arrays = infer_sorts([antecedent, consequent])
    lines = [f"(set-logic {logic})"]
    for s in scalars:
        lines.append(f"(declare-const {s} Int)")
    for a in arrays:
        lines.append(f"(declare-fun {a} (Int) Int)")
        lines.append(f"(declare-const {a}.len Int)")
        lines.append(f"(assert (>= {a}.len 0))")
    lines.append(f"(assert {formula_to_smt(antecedent)})")
    lines.append(f"(assert (not {formula_to_smt(consequent)}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reply parsing
# ---------------------------------------------------------------------------

class ProtocolError(InvgenError):
    """Malformed solver reply."""


MODEL_LEN_CAP = 10_000


def parse_reply(reply: str) -> tuple[str, dict]:
    """Parse solver output into (status, raw model assignment).

    The model maps scalar names to ints and function names to
    (pairs, default) with pairs a dict {arg: value}.
    """
    from .minismt.sexpr import SExprError, parse_all

    lines = [ln.strip() for ln in reply.strip().splitlines() if ln.strip()]
    if not lines:
        raise ProtocolError("empty solver reply")
    status = lines[0]
    if status not in ("sat", "unsat", "unknown"):
        raise ProtocolError(f"unrecognized status line {status!r}")
    model: dict = {}
    if status != "sat":
        return status, model
    rest = "\n".join(lines[1:])
    if not rest.strip():
        return status, model
    try:
        exprs = parse_all(rest)
    except SExprError as exc:
        raise ProtocolError(f"unparsable model: {exc}") from None
    defs: list = []
    for e in exprs:
        if isinstance(e, list) and e and e[0] == "model":
            defs.extend(e[1:])
        elif isinstance(e, list) and e and isinstance(e[0], list):
            defs.extend(e)
        elif isinstance(e, list) and e and e[0] == "define-fun":
            defs.append(e)
    for d in defs:
        if not (isinstance(d, list) and len(d) == 5 and d[0] == "define-fun"):
            if isinstance(d, list) and d and d[0] == "error":
                continue
            raise ProtocolError(f"unrecognized model entry {d!r}")
        _, name, args, _sort, body = d
        if args == []:
            model[name] = _int_of(body)
        elif len(args) == 1:
            model[name] = _fun_of(body, args[0][0])
        else:
            raise ProtocolError(f"unsupported model function {name!r}")
    return status, model


def _int_of(body) -> int:
    if isinstance(body, int):
        return body
    if isinstance(body, list) and len(body) == 2 and body[0] == "-":
        return -_int_of(body[1])
    raise ProtocolError(f"unsupported model value {body!r}")


def _fun_of(body, argname) -> tuple[dict[int, int], int]:
    pairs: dict[int, int] = {}
    while isinstance(body, list) and body and body[0] == "ite":
        cond, then, els = body[1], body[2], body[3]
        if not (isinstance(cond, list) and len(cond) == 3 and cond[0] == "="):
            raise ProtocolError(f"unsupported model guard {cond!r}")
        lhs, rhs = cond[1], cond[2]
        if lhs == argname:
            key = _int_of(rhs)
        elif rhs == argname:
            key = _int_of(lhs)
        else:
            raise ProtocolError(f"unsupported model guard {cond!r}")
        pairs.setdefault(key, _int_of(then))
        body = els
    return pairs, _int_of(body)


def model_to_state(model: dict, scalars: list[str], arrays: list[str]):
    """Materialize a raw model into a State: arrays cover their declared
    length plus every mentioned nonnegative index (capped)."""
    from .interp import State

    values: dict = {}
    for s in scalars:
        v = model.get(s, 0)
        if not isinstance(v, int):
            raise ProtocolError(f"scalar {s!r} bound to non-integer")
        values[s] = v
    for a in arrays:
        raw_len = model.get(f"{a}.len", 0)
        if not isinstance(raw_len, int):
            raise ProtocolError(f"length of {a!r} bound to non-integer")
        pairs, default = model.get(a, ({}, 0))
        if isinstance(pairs, int):  # array name bound as scalar: malformed
            raise ProtocolError(f"array {a!r} bound to scalar")
        mentioned = [k for k in pairs if k >= 0]
        length = max([max(0, raw_len)] + [k + 1 for k in mentioned])
        length = min(length, MODEL_LEN_CAP)
        arr = [default] * length
        for k, v in pairs.items():
            if 0 <= k < length:
                arr[k] = v
        values[a] = arr
    return State(values=values)
