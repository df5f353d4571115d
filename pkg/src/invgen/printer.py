"""Rendering of programs, statements, terms, and formulas back to source.

``parse_program(render_program(p))`` reproduces ``p`` structurally; the
renderer is also what feeds program text into prompts and annotated output
files.
"""

from __future__ import annotations

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
    Or,
    Not,
    Program,
    Seq,
    Skip,
    Stmt,
    Store,
    StoreStmt,
    Var,
    While,
    conjuncts_of,
)

_ADD, _MUL, _UNARY = 1, 2, 3


def render_term(e: Expr) -> str:
    return _term(e, 0)


def _term(e: Expr, parent_prec: int) -> str:
    if isinstance(e, IntLit):
        if e.value < 0:
            s = f"-{-e.value}"
            return f"({s})" if parent_prec >= _MUL else s
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrRead):
        return f"{_arr(e.arr)}[{_term(e.index, 0)}]"
    if isinstance(e, ArrLen):
        return f"{_arr(e.arr)}.length"
    if isinstance(e, BinOp):
        prec = _ADD if e.op in ("+", "-") else _MUL
        # - and / and % are left-associative; force parens on the right
        # when the child has equal precedence.
        left = _term(e.left, prec - 1)
        right = _term(e.right, prec)
        s = f"{left} {e.op} {right}"
        return f"({s})" if parent_prec >= prec else s
    if isinstance(e, Ite):
        # Internal form; no surface syntax, rendered functionally.
        return f"ite({render_formula(e.cond)}, {_term(e.then, 0)}, {_term(e.els, 0)})"
    raise InvgenError(f"cannot render term {e!r}")


def _arr(a) -> str:
    if isinstance(a, Arr):
        return a.name
    if isinstance(a, Store):
        return (f"store({_arr(a.arr)}, {_term(a.index, 0)}, "
                f"{_term(a.value, 0)})")
    raise InvgenError(f"cannot render array term {a!r}")


# Formula precedence levels, loosest first.
_IMP, _OR, _AND, _NOT = 1, 2, 3, 4


def render_formula(f: Formula) -> str:
    return _formula(f, 0)


def _formula(f: Formula, parent_prec: int) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"{_term(f.left, 0)} {f.op} {_term(f.right, 0)}"
    if isinstance(f, And):
        s = " && ".join(_formula(g, _AND) for g in f.args)
        return f"({s})" if parent_prec >= _AND else s
    if isinstance(f, Or):
        s = " || ".join(_formula(g, _OR) for g in f.args)
        return f"({s})" if parent_prec >= _OR else s
    if isinstance(f, Not):
        return f"!{_formula(f.arg, _NOT)}"
    if isinstance(f, Implies):
        s = f"{_formula(f.lhs, _IMP)} ==> {_formula(f.rhs, _IMP - 1)}"
        return f"({s})" if parent_prec >= _IMP else s
    if isinstance(f, ForAll):
        return (f"(\\forall int {f.var}; "
                f"{_term(f.lo, 0)} <= {f.var} && {f.var} < {_term(f.hi, 0)}; "
                f"{_formula(f.body, 0)})")
    if isinstance(f, Exists):
        return (f"(\\exists int {f.var}; "
                f"{_term(f.lo, 0)} <= {f.var} && {f.var} < {_term(f.hi, 0)}; "
                f"{_formula(f.body, 0)})")
    raise InvgenError(f"cannot render formula {f!r}")


def render_guard(g) -> str:
    if isinstance(g, Nondet):
        return "nondet()"
    return render_formula(g)


def render_stmt(s: Stmt, indent: int = 0,
                annotations: dict[int, tuple[Formula, ...]] | None = None) -> list[str]:
    pad = "    " * indent
    if isinstance(s, Skip):
        return [f"{pad}skip;"]
    if isinstance(s, Assign):
        return [f"{pad}{s.target} = {render_term(s.value)};"]
    if isinstance(s, StoreStmt):
        return [f"{pad}{s.array}[{render_term(s.index)}] = "
                f"{render_term(s.value)};"]
    if isinstance(s, GhostDecl):
        return [f"{pad}//@ ghost int {s.name} = {render_term(s.init)};"]
    if isinstance(s, GhostSet):
        return [f"{pad}//@ set {s.name} = {render_term(s.value)};"]
    if isinstance(s, Seq):
        lines: list[str] = []
        for t in s.stmts:
            lines.extend(render_stmt(t, indent, annotations))
        return lines
    if isinstance(s, If):
        lines = [f"{pad}if ({render_guard(s.guard)}) {{"]
        lines.extend(render_stmt(s.then, indent + 1, annotations))
        if s.els == Seq(()):
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            lines.extend(render_stmt(s.els, indent + 1, annotations))
            lines.append(f"{pad}}}")
        return lines
    if isinstance(s, While):
        invs = s.invariants
        if annotations is not None and s.loop_id in annotations:
            invs = annotations[s.loop_id]
        lines = []
        for inv in invs:
            lines.append(f"{pad}//@ loop_invariant {render_formula(inv)};")
        lines.append(f"{pad}while ({render_formula(s.guard)}) {{")
        lines.extend(render_stmt(s.body, indent + 1, annotations))
        lines.append(f"{pad}}}")
        return lines
    raise InvgenError(f"cannot render statement {s!r}")


def render_program(p: Program,
                   annotations: dict[int, Formula] | None = None) -> str:
    """Render ``p`` to MiniImp source.

    ``annotations`` maps loop_id to an invariant; each conjunct is emitted
    as one ``//@ loop_invariant ...;`` line directly above its loop.
    """
    note_map: dict[int, tuple[Formula, ...]] | None = None
    if annotations is not None:
        known = {w.loop_id for w in p.loops()}
        for loop_id in annotations:
            if loop_id not in known:
                raise InvgenError(f"annotation references unknown loop {loop_id}")
        note_map = {lid: conjuncts_of(f) for lid, f in annotations.items()}
    params = ", ".join(f"{ty} {name}" for name, ty in p.params)
    lines = [f"method {p.name}({params})"]
    for c in conjuncts_of(p.pre) or (p.pre,):
        lines.append(f"  requires {render_formula(c)};")
    for c in conjuncts_of(p.post) or (p.post,):
        lines.append(f"  ensures {render_formula(c)};")
    lines.append("{")
    lines.extend(render_stmt(p.body, 1, note_map))
    lines.append("}")
    return "\n".join(lines) + "\n"
