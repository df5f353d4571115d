"""Concrete big-step interpreter for MiniImp; the ground-truth semantics
oracle used by tests and trace-based checks.

Arithmetic is over unbounded integers with Euclidean division/modulo,
matching the SMT-LIB ``div``/``mod`` semantics used by the verification
backend.  Runtime errors (out-of-bounds access, zero divisors) surface as
EvalFault with a source line.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .logic import EvalFault, eval_formula_env, eval_term_env
from .syntax import (
    Assign,
    GhostDecl,
    GhostSet,
    If,
    InvgenError,
    Nondet,
    Program,
    Seq,
    Skip,
    Stmt,
    StoreStmt,
    While,
)

Value = Union[int, list]

RuntimeFault = EvalFault


class Diverged:
    """Sentinel returned when the fuel budget is exhausted."""

    def __repr__(self) -> str:  # pragma: no cover
        return "Diverged"


DIVERGED = Diverged()


@dataclass
class State:
    """Variable environment plus the nondet-resolution stream.

    ``nondet_choices`` (when set) forces branch resolutions explicitly;
    otherwise ``nondet_seed`` seeds a reproducible pseudorandom stream.
    """

    values: dict[str, Value] = field(default_factory=dict)
    nondet_seed: int = 0
    nondet_choices: Optional[tuple[bool, ...]] = None

    def copy_values(self) -> dict[str, Value]:
        return {k: (list(v) if isinstance(v, list) else v)
                for k, v in self.values.items()}


class _NondetStream:
    def __init__(self, state: State):
        self.choices = state.nondet_choices
        self.index = 0
        self.rng = random.Random(state.nondet_seed)

    def draw(self, line: Optional[int]) -> bool:
        if self.choices is not None:
            if self.index >= len(self.choices):
                raise EvalFault("nondet choice stream exhausted", line)
            v = self.choices[self.index]
            self.index += 1
            return v
        return bool(self.rng.getrandbits(1))


LoopHeadObserver = Callable[[int, dict[str, Value]], None]


def _snapshot(env: dict[str, Value]) -> dict[str, Value]:
    return {k: (list(v) if isinstance(v, list) else v) for k, v in env.items()}


def interpret(p: Program, s0: State, fuel: int,
              on_loop_head: Optional[LoopHeadObserver] = None
              ) -> Union[State, Diverged]:
    """Big-step evaluation of ``p`` from ``s0``.

    Each loop iteration consumes one fuel unit; returns DIVERGED when the
    budget runs out.  ``on_loop_head`` (if given) is invoked with
    (loop_id, snapshot) every time a loop guard is about to be evaluated.
    """
    for name, ty in p.params:
        if name not in s0.values:
            raise EvalFault(f"parameter {name!r} unbound in initial state")
        if ty == "int[]" and not isinstance(s0.values[name], list):
            raise EvalFault(f"parameter {name!r} must be an array")
        if ty == "int" and isinstance(s0.values[name], list):
            raise EvalFault(f"parameter {name!r} must be a scalar")

    env = s0.copy_values()
    stream = _NondetStream(s0)
    fuel_box = [fuel]

    def run(s: Stmt) -> bool:
        """Returns False when fuel ran out."""
        if isinstance(s, Skip):
            return True
        if isinstance(s, Assign):
            env[s.target] = eval_term_env(s.value, env, s.line)
            return True
        if isinstance(s, GhostDecl):
            env[s.name] = eval_term_env(s.init, env, s.line)
            return True
        if isinstance(s, GhostSet):
            if s.name not in env:
                raise EvalFault(f"set of undeclared ghost {s.name!r}", s.line)
            env[s.name] = eval_term_env(s.value, env, s.line)
            return True
        if isinstance(s, StoreStmt):
            arr = env.get(s.array)
            if not isinstance(arr, list):
                raise EvalFault(f"{s.array!r} is not an array", s.line)
            idx = eval_term_env(s.index, env, s.line)
            if idx < 0 or idx >= len(arr):
                raise EvalFault(
                    f"array index {idx} out of bounds (length {len(arr)})",
                    s.line)
            arr[idx] = eval_term_env(s.value, env, s.line)
            return True
        if isinstance(s, Seq):
            for t in s.stmts:
                if not run(t):
                    return False
            return True
        if isinstance(s, If):
            if isinstance(s.guard, Nondet):
                taken = stream.draw(s.line)
            else:
                taken = eval_formula_env(s.guard, env, s.line)
            return run(s.then if taken else s.els)
        if isinstance(s, While):
            while True:
                if on_loop_head is not None:
                    on_loop_head(s.loop_id, _snapshot(env))
                if not eval_formula_env(s.guard, env, s.line):
                    return True
                if fuel_box[0] <= 0:
                    return False
                fuel_box[0] -= 1
                if not run(s.body):
                    return False
        raise InvgenError(f"cannot interpret {s!r}")

    if not run(p.body):
        return DIVERGED
    return State(values=env, nondet_seed=s0.nondet_seed,
                 nondet_choices=s0.nondet_choices)
