"""Candidate invariant generation and revision.

Two interchangeable generators:

* ``TemplateGenerator`` enumerates a finite grammar of candidate conjuncts
  (variable bounds, small linear relations, postcondition atoms with
  progress substitutions, quantified prefix forms, precondition facts) and
  prunes them against concrete execution traces before ranking.
* ``LLMGenerator`` drives a chat model with the prompt templates and parses
  invariants out of its replies.

Both refine failed candidates under diagnostic guidance: exit failures pull
in bound and precondition facts first, preservation failures prefer facts
about variables the loop modifies.  Existential postconditions are handled
through the ghost-witness protocol: a ghost variable records a witness
index, updated at the end of the loop body, and the invariant speaks about
the ghost.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

from .interp import DIVERGED, State, interpret
from .logic import EvalFault, eval_formula_env, free_vars, simplify, substitute
from .parser import TypeError_, check_formula
from .printer import render_formula
from .segment import SegmentedProgram, segment_program, render_marked_program
from .syntax import (
    And,
    Arr,
    ArrLen,
    ArrRead,
    Assign,
    BinOp,
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
    Program,
    Seq,
    Skip,
    Stmt,
    StoreStmt,
    TRUE,
    Var,
    While,
    conj,
    conjuncts_of,
    seq_of,
    stmts_of,
)

TRACE_FUEL = 300
TRACE_STATE_LIMIT = 10
TRACE_SCALAR_BOUND = 4
TRACE_ARRAY_LEN = 3
TRACE_ELEMENT_BOUND = 2


class GeneratorExhausted(InvgenError):
    pass


class RefinementStuck(InvgenError):
    pass


@dataclass(frozen=True)
class GhostAugmentation:
    """Ghost statements attached to a candidate: declarations inserted
    before the loop, updates appended to the loop body."""

    decls: tuple[GhostDecl, ...]
    sets: tuple[Stmt, ...]


@dataclass(frozen=True)
class CandidateInvariant:
    loop_id: int
    conjuncts: tuple[Formula, ...]
    ghost_augmentation: Optional[GhostAugmentation] = None
    provenance: str = "template"  # template | llm | repair
    attempt_index: int = 0

    @property
    def formula(self) -> Formula:
        return conj(list(self.conjuncts))

    def rendered(self) -> str:
        return render_formula(self.formula)


@dataclass(frozen=True)
class FailureDiagnostic:
    obligation: str  # Implication1 | Implication2 | Initialisation
    explanation: str = ""
    model: Optional[State] = None
    wp_formula: Optional[Formula] = None


@dataclass
class GenerationContext:
    program: Program
    segmented: SegmentedProgram
    loop_index: int
    guard: Formula
    loop_post: Formula
    pre: Formula
    failures: list[tuple[CandidateInvariant, FailureDiagnostic]] = \
        field(default_factory=list)

    @property
    def marker_view(self) -> str:
        return render_marked_program(self.program)

    @property
    def loop(self):
        return self.segmented.loops[self.loop_index - 1]


# ---------------------------------------------------------------------------
# Program analysis helpers
# ---------------------------------------------------------------------------

def assigned_scalars(s: Stmt) -> set[str]:
    out: set[str] = set()
    if isinstance(s, Assign):
        out.add(s.target)
    elif isinstance(s, (GhostDecl, GhostSet)):
        out.add(s.name)
    elif isinstance(s, Seq):
        for t in s.stmts:
            out |= assigned_scalars(t)
    elif isinstance(s, If):
        out |= assigned_scalars(s.then) | assigned_scalars(s.els)
    elif isinstance(s, While):
        out |= assigned_scalars(s.body)
    return out


def stored_arrays(s: Stmt) -> set[str]:
    out: set[str] = set()
    if isinstance(s, StoreStmt):
        out.add(s.array)
    elif isinstance(s, Seq):
        for t in s.stmts:
            out |= stored_arrays(t)
    elif isinstance(s, If):
        out |= stored_arrays(s.then) | stored_arrays(s.els)
    elif isinstance(s, While):
        out |= stored_arrays(s.body)
    return out


def splice_ghosts(program: Program, loop_id: int,
                  aug: GhostAugmentation) -> Program:
    """Insert ghost declarations right before the loop and ghost updates at
    the end of its body."""

    def walk(s: Stmt) -> Stmt:
        if isinstance(s, Seq):
            out: list[Stmt] = []
            for t in s.stmts:
                if isinstance(t, While) and t.loop_id == loop_id:
                    out.extend(aug.decls)
                    new_body = seq_of(list(stmts_of(t.body)) + list(aug.sets))
                    out.append(While(t.guard, new_body, t.loop_id,
                                     t.invariants, t.line))
                else:
                    out.append(walk(t))
            return Seq(tuple(out))
        if isinstance(s, If):
            return If(s.guard, walk(s.then), walk(s.els), s.line)
        if isinstance(s, While) and s.loop_id == loop_id:
            # loop at the top level without a wrapping Seq
            new_body = seq_of(list(stmts_of(s.body)) + list(aug.sets))
            return seq_of(list(aug.decls)
                          + [While(s.guard, new_body, s.loop_id,
                                   s.invariants, s.line)])
        return s

    body = walk(program.body if isinstance(program.body, Seq)
                else Seq((program.body,)))
    return Program(program.name, program.params, program.pre, program.post,
                   body)


def apply_candidates(program: Program,
                     invs: dict[int, CandidateInvariant]) -> Program:
    """Program with every candidate's ghost augmentation spliced in."""
    out = program
    for loop_id in sorted(invs):
        aug = invs[loop_id].ghost_augmentation
        if aug is not None:
            out = splice_ghosts(out, loop_id, aug)
    return out


# ---------------------------------------------------------------------------
# Trace collection
# ---------------------------------------------------------------------------

def _initial_states(program: Program) -> list[dict]:
    """Deterministic small-domain states satisfying the precondition:
    ascending enumeration first, then a seeded random top-up."""
    names = program.param_names
    found: list[dict] = []

    def candidates():
        scalars = [n for n, t in program.params if t == "int"]
        arrays = [n for n, t in program.params if t == "int[]"]
        b = TRACE_SCALAR_BOUND
        import itertools
        scalar_space = list(range(-b, b + 1))
        array_space = []
        for length in range(0, TRACE_ARRAY_LEN + 1):
            for els in itertools.product(
                    range(-TRACE_ELEMENT_BOUND, TRACE_ELEMENT_BOUND + 1),
                    repeat=length):
                array_space.append(list(els))
        spaces = [scalar_space] * len(scalars) + [array_space] * len(arrays)
        for combo in itertools.product(*spaces):
            values = {}
            for n, v in zip(scalars + arrays, combo):
                values[n] = list(v) if isinstance(v, list) else v
            yield values

    budget = 200_000
    for values in candidates():
        budget -= 1
        if budget <= 0:
            break
        try:
            if eval_formula_env(program.pre, values):
                found.append(values)
        except EvalFault:
            continue
        if len(found) >= TRACE_STATE_LIMIT:
            break
    rng = random.Random(0xC0FFEE)
    attempts = 0
    while len(found) < TRACE_STATE_LIMIT and attempts < 4000:
        attempts += 1
        values = {}
        for n, t in program.params:
            if t == "int":
                values[n] = rng.randint(-TRACE_SCALAR_BOUND,
                                        TRACE_SCALAR_BOUND)
            else:
                length = rng.randint(0, TRACE_ARRAY_LEN + 1)
                values[n] = [rng.randint(-TRACE_ELEMENT_BOUND,
                                         TRACE_ELEMENT_BOUND)
                             for _ in range(length)]
        try:
            if eval_formula_env(program.pre, values) and values not in found:
                found.append(values)
        except EvalFault:
            continue
    _ = names
    return found


@lru_cache(maxsize=128)
def _loop_head_states(program: Program) -> dict[int, list[dict]]:
    """Observed loop-head states per loop, excluding each trace's first
    visit; falls back to all visits for loops never re-visited."""
    all_visits: dict[int, list[dict]] = {w.loop_id: [] for w in program.loops()}
    later_visits: dict[int, list[dict]] = {w.loop_id: [] for w in program.loops()}
    for values in _initial_states(program):
        for seed in (0, 1):
            seen: dict[int, int] = {}

            def observe(loop_id: int, snapshot: dict) -> None:
                count = seen.get(loop_id, 0)
                seen[loop_id] = count + 1
                all_visits[loop_id].append(snapshot)
                if count >= 1:
                    later_visits[loop_id].append(snapshot)

            state = State(values={k: (list(v) if isinstance(v, list) else v)
                                  for k, v in values.items()},
                          nondet_seed=seed)
            try:
                interpret(program, state, TRACE_FUEL, on_loop_head=observe)
            except EvalFault:
                continue
    out: dict[int, list[dict]] = {}
    for loop_id in all_visits:
        out[loop_id] = later_visits[loop_id] or all_visits[loop_id]
    return out


def _holds_on_states(f: Formula, states: Sequence[dict]) -> bool:
    for env in states:
        try:
            if not eval_formula_env(f, env):
                return False
        except EvalFault:
            return False
    return True


# ---------------------------------------------------------------------------
# Template enumeration
# ---------------------------------------------------------------------------

def _program_int_literals(program: Program) -> list[int]:
    out: set[int] = set()

    def term(e) -> None:
        if isinstance(e, IntLit):
            out.add(e.value)
        elif isinstance(e, BinOp):
            term(e.left)
            term(e.right)
        elif isinstance(e, ArrRead):
            term(e.index)

    def form(f) -> None:
        if isinstance(f, Cmp):
            term(f.left)
            term(f.right)
        elif isinstance(f, (And,)):
            for g in f.args:
                form(g)
        elif isinstance(f, Implies):
            form(f.lhs)
            form(f.rhs)
        elif isinstance(f, (ForAll, Exists)):
            term(f.lo)
            term(f.hi)
            form(f.body)

    form(program.pre)
    form(program.post)
    return sorted(out)


class TemplateGenerator:
    """Deterministic enumerator: identical contexts yield identical lists."""

    name = "template"

    def generate(self, ctx: GenerationContext) -> list[CandidateInvariant]:
        program = ctx.program
        loop = ctx.loop
        env = program.sort_env()
        modified = sorted(assigned_scalars(loop.body))
        mod_arrays = sorted(stored_arrays(loop.body))
        scalars = sorted(n for n, t in env.items() if t == "int")
        heads = _loop_head_states(program).get(loop.loop_id, [])

        atoms, pre_set = self._atom_pool(ctx, modified, mod_arrays, scalars)
        surviving = []
        seen = set()
        for a in atoms:
            sa = simplify(a)
            if isinstance(sa, BoolLit):
                continue
            key = render_formula(sa)
            if key in seen:
                continue
            seen.add(key)
            if not self._well_typed(sa, env):
                continue
            if heads and not _holds_on_states(sa, heads):
                continue
            surviving.append(sa)

        candidates: list[tuple[Formula, ...]] = []
        q_conjuncts = tuple(simplify(c) for c in conjuncts_of(ctx.loop_post)
                            if simplify(c) != TRUE)
        q_first = bool(q_conjuncts) and all(
            _holds_on_states(c, heads) if heads else True
            for c in q_conjuncts)
        for a in surviving:
            candidates.append((a,))
        bounds_pack = tuple(a for a in surviving
                            if self._is_bound_atom(a, modified))
        pre_facts = tuple(a for a in surviving if a in pre_set)
        others = [a for a in surviving
                  if a not in bounds_pack and a not in pre_facts]
        for a in others:
            candidates.append(_dedup(bounds_pack + (a,)))
            candidates.append(_dedup(bounds_pack + pre_facts + (a,)))
        if bounds_pack:
            candidates.append(bounds_pack)
            candidates.append(_dedup(bounds_pack + pre_facts + tuple(others)))

        ranked = _rank(candidates)
        if q_first:
            ranked = [q_conjuncts] + [c for c in ranked if c != q_conjuncts]

        out = [CandidateInvariant(loop.loop_id, c, None, "template", i)
               for i, c in enumerate(ranked)]
        out.extend(self._ghost_candidates(ctx, modified, len(out)))
        if not out:
            raise GeneratorExhausted(
                f"no template candidates for loop {loop.loop_id}")
        return out

    # -- pools ---------------------------------------------------------------

    def _atom_pool(self, ctx: GenerationContext, modified: list[str],
                   mod_arrays: list[str], scalars: list[str]
                   ) -> tuple[list[Formula], set[Formula]]:
        program = ctx.program
        pool: list[Formula] = []
        # Postcondition atoms and their progress substitutions.
        q_atoms = list(conjuncts_of(ctx.loop_post)) or [ctx.loop_post]
        for a in q_atoms:
            pool.append(a)
            for w in sorted(free_vars(a)):
                if program.sort_env().get(w) != "int":
                    continue
                for v in modified:
                    if v != w:
                        pool.append(substitute(a, w, Var(v)))
        # Guard complement relaxations.
        for g in conjuncts_of(ctx.guard) or (ctx.guard,):
            if isinstance(g, Cmp) and g.op in ("<", ">"):
                pool.append(Cmp("<=" if g.op == "<" else ">=",
                                g.left, g.right))
            elif isinstance(g, Cmp) and g.op in ("<=", ">=", "!="):
                pool.append(g)
        # Bounds over modified scalars.
        lows: list[Expr] = [IntLit(0)]
        highs: list[Expr] = []
        for n, t in program.params:
            if t == "int":
                lows.append(Var(n))
                highs.append(Var(n))
            else:
                highs.append(ArrLen(Arr(n)))
        for v in modified:
            for lo in lows:
                pool.append(Cmp("<=", lo, Var(v)))
            for hi in highs:
                pool.append(Cmp("<=", Var(v), hi))
        # Precondition facts over symbols the loop leaves alone.
        pre_set: set[Formula] = set()
        touched = set(modified) | set(mod_arrays)
        for c in conjuncts_of(ctx.pre) or (ctx.pre,):
            if c == TRUE:
                continue
            if not (free_vars(c) & touched):
                sc = simplify(c)
                pool.append(sc)
                pre_set.add(sc)
        # Small linear relations among modified and in-scope scalars.
        consts = [c for c in _program_int_literals(program) if -2 <= c <= 2]
        consts = sorted(set(consts) | {0})
        for v in modified:
            for w in scalars:
                if w == v:
                    continue
                for k in consts:
                    rhs: Expr = Var(w) if k == 0 else \
                        BinOp("+", Var(w), IntLit(k))
                    pool.append(Cmp("==", Var(v), rhs))
            for w in scalars:
                for u in scalars:
                    if len({v, w, u}) != 3:
                        continue
                    pool.append(Cmp("==", Var(v), BinOp("+", Var(w), Var(u))))
                    pool.append(Cmp("==", Var(v), BinOp("-", Var(w), Var(u))))
        return pool, pre_set

    def _is_bound_atom(self, a: Formula, modified: list[str]) -> bool:
        if not isinstance(a, Cmp) or a.op not in ("<", "<=", ">", ">="):
            return False
        fv = free_vars(a)
        return bool(fv & set(modified))

    def _well_typed(self, f: Formula, env: dict[str, str]) -> bool:
        try:
            check_formula(f, env)
            return True
        except TypeError_:
            return False

    # -- existential route ----------------------------------------------------

    def _ghost_candidates(self, ctx: GenerationContext, modified: list[str],
                          base_index: int) -> list[CandidateInvariant]:
        program = ctx.program
        loop = ctx.loop
        out: list[CandidateInvariant] = []
        for q in conjuncts_of(ctx.loop_post) or (ctx.loop_post,):
            if not isinstance(q, Exists):
                continue
            plan = self._witness_plan(ctx, q)
            if plan is None:
                continue
            ghost, aug, trigger = plan
            bounds = []
            counter = self._loop_counter(ctx, modified)
            if counter is None:
                continue
            bounds.append(Cmp("<=", IntLit(0), Var(counter)))
            for n, t in program.params:
                if t == "int" and n != counter:
                    bounds.append(Cmp("<=", Var(counter), Var(n)))
            witness_ok = Implies(
                Cmp("!=", Var(ghost), IntLit(-1)),
                conj([Cmp("<=", IntLit(0), Var(ghost)),
                      Cmp("<", Var(ghost), Var(counter)),
                      substitute(q.body, q.var, Var(ghost))]))
            conjuncts = _dedup(tuple(bounds) + (witness_ok, trigger))
            cand = CandidateInvariant(loop.loop_id, conjuncts, aug,
                                      "template", base_index + len(out))
            spliced = splice_ghosts(program, loop.loop_id, aug)
            heads = _loop_head_states(spliced).get(loop.loop_id, [])
            if heads and not all(_holds_on_states(c, heads)
                                 for c in conjuncts):
                continue
            out.append(cand)
        return out

    def _loop_counter(self, ctx: GenerationContext,
                      modified: list[str]) -> Optional[str]:
        """The scalar updated as v = v + 1 at the end of the body."""
        stmts = stmts_of(ctx.loop.body)
        for s in reversed(stmts):
            if isinstance(s, Assign) and s.target in modified:
                if s.value == BinOp("+", Var(s.target), IntLit(1)):
                    return s.target
        return None

    def _witness_plan(self, ctx: GenerationContext, q: Exists):
        """Ghost witness for an existential postcondition: find a store
        whose written value matches the quantified predicate, record its
        index (expressed in end-of-body terms) in a ghost variable."""
        program = ctx.program
        body_stmts = list(stmts_of(ctx.loop.body))
        pred = q.body
        if not (isinstance(pred, Cmp) and pred.op == "=="):
            return None
        # predicate must be a read of one array at the bound variable
        read_side, value_side = pred.left, pred.right
        if not (isinstance(read_side, ArrRead)
                and isinstance(read_side.arr, Arr)
                and read_side.index == Var(q.var)):
            read_side, value_side = pred.right, pred.left
        if not (isinstance(read_side, ArrRead)
                and isinstance(read_side.arr, Arr)
                and read_side.index == Var(q.var)):
            return None
        array = read_side.arr.name
        if q.var in free_vars(value_side):
            return None
        for pos, s in enumerate(body_stmts):
            store, guard = None, None
            if isinstance(s, StoreStmt):
                store = s
            elif isinstance(s, If) and _els_is_empty(s.els) \
                    and not isinstance(s.guard, type(None)):
                inner = [t for t in stmts_of(s.then)
                         if not isinstance(t, Skip)]
                if len(inner) == 1 and isinstance(inner[0], StoreStmt):
                    store, guard = inner[0], s.guard
            if store is None or store.array != array:
                continue
            if render_formula(simplify(Cmp("==", store.value, value_side))) \
                    != "true":
                continue
            index_end = _invert_through(body_stmts[pos + 1:], store.index)
            if index_end is None:
                continue
            ghost = _fresh_ghost(program)
            set_stmt: Stmt
            if guard is None:
                set_stmt = GhostSet(ghost, index_end)
                trigger: Formula = Implies(
                    Cmp(">", _counter_expr(ctx, body_stmts), IntLit(0)),
                    Cmp("!=", Var(ghost), IntLit(-1)))
            else:
                guard_end = _invert_formula_through(body_stmts[pos + 1:],
                                                    guard)
                if guard_end is None:
                    continue
                set_stmt = If(guard_end, Seq((GhostSet(ghost, index_end),)),
                              Seq(()))
                trigger = _guarded_trigger(ctx, guard, ghost)
                if trigger is None:
                    continue
            aug = GhostAugmentation(
                decls=(GhostDecl(ghost, IntLit(-1)),),
                sets=(set_stmt,))
            return ghost, aug, trigger
        return None


def _els_is_empty(els: Stmt) -> bool:
    if isinstance(els, Skip):
        return True
    return isinstance(els, Seq) and all(isinstance(t, Skip)
                                        for t in els.stmts)


def _counter_expr(ctx: GenerationContext, body_stmts: list[Stmt]) -> Expr:
    for s in reversed(body_stmts):
        if isinstance(s, Assign) and \
                s.value == BinOp("+", Var(s.target), IntLit(1)):
            return Var(s.target)
    return IntLit(1)


def _guarded_trigger(ctx: GenerationContext, guard: Formula,
                     ghost: str) -> Optional[Formula]:
    """For a store guarded by (counter == p): once the counter has passed
    p, the witness must have been recorded."""
    if not (isinstance(guard, Cmp) and guard.op == "=="):
        return None
    if isinstance(guard.left, Var):
        counter, point = guard.left, guard.right
    elif isinstance(guard.right, Var):
        counter, point = guard.right, guard.left
    else:
        return None
    return Implies(Cmp(">", counter, point),
                   Cmp("!=", Var(ghost), IntLit(-1)))


def _invert_through(stmts: list[Stmt], e: Expr) -> Optional[Expr]:
    """Rewrite ``e`` (valued before ``stmts`` run) into end-of-body terms.
    Only invertible updates x = x +- c are supported."""
    out = e
    for s in stmts:
        if isinstance(s, Skip):
            continue
        if isinstance(s, Assign):
            if s.target not in free_vars(out):
                continue
            v = s.target
            if isinstance(s.value, BinOp) and s.value.left == Var(v) \
                    and isinstance(s.value.right, IntLit):
                delta = s.value.right.value
                if s.value.op == "+":
                    out = _subst_expr(out, v, BinOp("-", Var(v),
                                                    IntLit(delta)))
                    continue
                if s.value.op == "-":
                    out = _subst_expr(out, v, BinOp("+", Var(v),
                                                    IntLit(delta)))
                    continue
            return None
        if free_vars_stmt_targets(s) & free_vars(out):
            return None
    from .logic import simplify_term
    return simplify_term(out)


def _invert_formula_through(stmts: list[Stmt],
                            f: Formula) -> Optional[Formula]:
    if not isinstance(f, Cmp):
        return None
    left = _invert_through(stmts, f.left)
    right = _invert_through(stmts, f.right)
    if left is None or right is None:
        return None
    return Cmp(f.op, left, right)


def free_vars_stmt_targets(s: Stmt) -> set[str]:
    return assigned_scalars(s) | stored_arrays(s)


def _subst_expr(e: Expr, x: str, repl: Expr) -> Expr:
    from .logic import subst_term
    return subst_term(e, x, repl)


def _fresh_ghost(program: Program) -> str:
    from .logic import fresh_name
    taken = set(program.param_names) | set(program.local_names) \
        | set(program.ghost_names)
    return fresh_name("wit", taken)


def _dedup(parts: tuple[Formula, ...]) -> tuple[Formula, ...]:
    out: list[Formula] = []
    seen: set[str] = set()
    for p in parts:
        key = render_formula(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return tuple(out)


def _rank(candidates: list[tuple[Formula, ...]]) -> list[tuple[Formula, ...]]:
    uniq: dict[str, tuple[Formula, ...]] = {}
    for c in candidates:
        if not c:
            continue
        key = render_formula(conj(list(c)))
        uniq.setdefault(key, c)
    return sorted(uniq.values(),
                  key=lambda c: (len(c), render_formula(conj(list(c)))))


# ---------------------------------------------------------------------------
# Refinement (template mode)
# ---------------------------------------------------------------------------

def _refine_template(self_gen: "TemplateGenerator", ctx: GenerationContext,
                     failed: CandidateInvariant,
                     diag: FailureDiagnostic) -> CandidateInvariant:
    program = ctx.program
    loop = ctx.loop
    env = program.sort_env()
    modified = sorted(assigned_scalars(loop.body))
    mod_arrays = sorted(stored_arrays(loop.body))
    scalars = sorted(n for n, t in env.items() if t == "int")
    if failed.ghost_augmentation is not None:
        spliced = splice_ghosts(program, loop.loop_id,
                                failed.ghost_augmentation)
        heads = _loop_head_states(spliced).get(loop.loop_id, [])
        ghost_env = dict(env)
        for d in failed.ghost_augmentation.decls:
            ghost_env[d.name] = "int"
        env = ghost_env
    else:
        heads = _loop_head_states(program).get(loop.loop_id, [])

    pool, pre_set = self_gen._atom_pool(ctx, modified, mod_arrays, scalars)
    surviving: list[Formula] = []
    seen: set[str] = set()
    for a in pool:
        sa = simplify(a)
        if isinstance(sa, BoolLit):
            continue
        key = render_formula(sa)
        if key in seen:
            continue
        seen.add(key)
        try:
            check_formula(sa, env)
        except TypeError_:
            continue
        if heads and not _holds_on_states(sa, heads):
            continue
        surviving.append(sa)

    bounds = [a for a in surviving if self_gen._is_bound_atom(a, modified)
              or self_gen._is_bound_atom(a, scalars)]
    pre_facts = [a for a in surviving if a in pre_set]
    others = [a for a in surviving if a not in bounds and a not in pre_facts]

    if diag.obligation == "Implication2":
        ladder = [bounds + pre_facts, others]
    else:
        ladder = [pre_facts + bounds, others]

    current = _dedup(failed.conjuncts)
    current_key = render_formula(conj(list(current)))
    tried: list[tuple[Formula, ...]] = []
    for upto in range(1, len(ladder) + 1):
        additions: list[Formula] = []
        for group in ladder[:upto]:
            additions.extend(group)
        if diag.model is not None:
            model_false = [a for a in additions
                           if not _model_satisfies(a, diag.model)]
            if model_false:
                strengthened = _dedup(current + tuple(model_false))
                if render_formula(conj(list(strengthened))) != current_key:
                    tried.append(strengthened)
        strengthened = _dedup(current + tuple(additions))
        if render_formula(conj(list(strengthened))) != current_key:
            tried.append(strengthened)
    for conjuncts in tried:
        return CandidateInvariant(loop.loop_id, conjuncts,
                                  failed.ghost_augmentation, "template",
                                  failed.attempt_index + 1)
    raise RefinementStuck(
        f"no distinct strengthening for loop {loop.loop_id}")


def _model_satisfies(f: Formula, model: State) -> bool:
    try:
        return eval_formula_env(f, model.values)
    except EvalFault:
        return True


TemplateGenerator.refine = _refine_template


# ---------------------------------------------------------------------------
# LLM-backed generator
# ---------------------------------------------------------------------------

class LLMGenerator:
    """Generates and refines invariants via chat completions; replies must
    carry the invariant in a fenced block (a bare trailing formula line is
    accepted as a fallback)."""

    name = "llm"

    def __init__(self, config) -> None:
        from .llm import LLMConfig

        self.config: LLMConfig = config

    def generate(self, ctx: GenerationContext) -> list[CandidateInvariant]:
        from .llm import MalformedReply, extract_formula_text, llm_complete
        from .parser import ParseError, parse_formula
        from .prompts import render_prompt

        loop = ctx.loop
        prompt = render_prompt("gen", {
            "segmented_program": ctx.marker_view,
            "loop_index": str(loop.index),
            "loop_postcondition": render_formula(ctx.loop_post),
        })
        reply = llm_complete(prompt, self.config)
        text = extract_formula_text(reply)
        try:
            formula = parse_formula(text)
        except ParseError as exc:
            raise MalformedReply(f"unparsable invariant {text!r}: {exc}") \
                from None
        conjuncts = _dedup(tuple(simplify(c)
                                 for c in conjuncts_of(formula)) or
                           (simplify(formula),))
        return [CandidateInvariant(loop.loop_id, conjuncts, None, "llm", 0)]

    def refine(self, ctx: GenerationContext, failed: CandidateInvariant,
               diag: FailureDiagnostic) -> CandidateInvariant:
        from .llm import MalformedReply, extract_formula_text, llm_complete
        from .parser import ParseError, parse_formula
        from .prompts import GUIDANCE, render_prompt

        loop = ctx.loop
        names = {"Implication1": "Implication One (Loop Preservation)",
                 "Implication2":
                     "Implication Two (Loop Termination Correctness)",
                 "Initialisation": "Initialisation"}
        guidance = GUIDANCE.get(diag.obligation, GUIDANCE["Implication1"])
        prompt = render_prompt("refine", {
            "segmented_program": ctx.marker_view,
            "loop_index": str(loop.index),
            "current_invariant": failed.rendered(),
            "implication_name": names.get(diag.obligation, diag.obligation),
            "failure_reason": diag.explanation or "unspecified",
            "refinement_guidance": guidance,
        })
        reply = llm_complete(prompt, self.config)
        text = extract_formula_text(reply)
        try:
            formula = parse_formula(text)
        except ParseError as exc:
            raise MalformedReply(f"unparsable invariant {text!r}: {exc}") \
                from None
        conjuncts = _dedup(tuple(simplify(c)
                                 for c in conjuncts_of(formula)) or
                           (simplify(formula),))
        out = CandidateInvariant(loop.loop_id, conjuncts,
                                 failed.ghost_augmentation, "llm",
                                 failed.attempt_index + 1)
        if out.rendered() == failed.rendered():
            raise RefinementStuck("reply repeats the failed invariant")
        return out
