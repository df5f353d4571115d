"""Implication validity checking: an external SMT solver over SMT-LIB text
plus an independent bounded brute-force oracle.

``check_implication`` asks whether ``antecedent ==> consequent`` is valid by
testing ``antecedent && !consequent`` for unsatisfiability.  Every Invalid
verdict carries a model that has been replayed through eval_formula, so no
solver is trusted blindly.  The default backend is the bundled ``invgen-smt``
subprocess; any SMT-LIB v2 solver can be substituted via configuration
(``--solver`` / INVGEN_SOLVER), e.g. ``z3 -in``.
"""

from __future__ import annotations

import itertools
import os
import shlex
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from typing import Optional

from .interp import State
from .logic import EvalFault, eval_formula
from .smtlib import (
    ProtocolError,
    TranslationUnsupported,
    infer_sorts,
    model_to_state,
    parse_reply,
    to_smtlib,
)
from .syntax import Formula, InvgenError

STATE_SPACE_LIMIT = 10 ** 7


class SolverLaunchError(InvgenError):
    pass


class StateSpaceOverflow(InvgenError):
    pass


@dataclass(frozen=True)
class Valid:
    bounded: bool = False

    @property
    def kind(self) -> str:
        return "valid"


@dataclass(frozen=True)
class Invalid:
    model: State

    @property
    def kind(self) -> str:
        return "invalid"


@dataclass(frozen=True)
class Unknown:
    reason: str  # timeout | solver-said-unknown | translation-unsupported
    #             | model-replay-failed

    @property
    def kind(self) -> str:
        return "unknown"


CheckVerdict = Valid | Invalid | Unknown


def default_solver_command() -> tuple[str, ...]:
    env = os.environ.get("INVGEN_SOLVER")
    if env:
        return tuple(shlex.split(env))
    return (sys.executable, "-m", "invgen.minismt")


@dataclass
class SolverConfig:
    command: Optional[tuple[str, ...]] = None
    timeout_ms: int = 10_000
    logic: str = "ALL"
    random_seed: Optional[int] = None
    max_parallel: int = 4
    log_path: Optional[str] = None
    cache: bool = True

    _sem: threading.Semaphore = field(init=False, repr=False, compare=False)
    _lock: threading.Lock = field(init=False, repr=False, compare=False)
    _memo: dict = field(init=False, repr=False, compare=False)
    _query_count: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise InvgenError("solver timeout must be positive")
        self._sem = threading.Semaphore(self.max_parallel)
        self._lock = threading.Lock()
        self._memo = {}
        self._query_count = 0

    def resolved_command(self) -> tuple[str, ...]:
        return self.command if self.command else default_solver_command()


def _log_query(cfg: SolverConfig, query: str, reply: str) -> None:
    if cfg.log_path is None:
        return
    with cfg._lock:
        cfg._query_count += 1
        n = cfg._query_count
        with open(cfg.log_path, "a", encoding="utf-8") as fh:
            fh.write(f"; --- query {n} ---\n{query}")
            if not query.endswith("\n"):
                fh.write("\n")
            reply_text = "\n".join("; reply: " + ln
                                   for ln in reply.splitlines()) or "; reply:"
            fh.write(reply_text + "\n")


def _run_solver(cfg: SolverConfig, query: str) -> str:
    cmd = list(cfg.resolved_command())
    if cfg.random_seed is not None and cmd and "z3" in os.path.basename(cmd[0]):
        cmd.append(f"smt.random_seed={cfg.random_seed}")
    with cfg._sem:
        try:
            proc = subprocess.Popen(
                cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.PIPE, text=True)
        except OSError as exc:
            raise SolverLaunchError(
                f"cannot launch solver {cmd!r}: {exc}") from None
        try:
            out, err = proc.communicate(query, timeout=cfg.timeout_ms / 1000.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return ""
    if proc.returncode not in (0, 1) and not out.strip():
        raise SolverLaunchError(
            f"solver {cmd!r} exited with {proc.returncode}: {err.strip()}")
    return out


def check_implication(antecedent: Formula, consequent: Formula,
                      cfg: SolverConfig) -> CheckVerdict:
    """Valid iff ``antecedent && !consequent`` is unsatisfiable.

    Invalid verdicts carry a concrete model that falsifies the implication
    under eval_formula (replay-checked here); replies that fail the replay
    check degrade to Unknown rather than being trusted.
    """
    try:
        query = to_smtlib(antecedent, consequent, logic=cfg.logic)
    except TranslationUnsupported:
        return Unknown("translation-unsupported")
    cache_key = (cfg.resolved_command(), query)
    if cfg.cache:
        with cfg._lock:
            if cache_key in cfg._memo:
                verdict = cfg._memo[cache_key]
                _log_query_cached(cfg, query, verdict)
                return verdict
    raw = _run_solver(cfg, query)
    _log_query(cfg, query, raw if raw else "(timeout)")
    if not raw.strip():
        return Unknown("timeout")
    status, model = parse_reply(raw)
    if status == "unknown":
        verdict: CheckVerdict = Unknown("solver-said-unknown")
    elif status == "unsat":
        verdict = Valid()
    else:
        scalars, arrays = infer_sorts([antecedent, consequent])
        state = model_to_state(model, scalars, arrays)
        try:
            falsifies = (eval_formula(antecedent, state)
                         and not eval_formula(consequent, state))
        except EvalFault:
            falsifies = False
        verdict = Invalid(state) if falsifies else Unknown("model-replay-failed")
    if cfg.cache:
        with cfg._lock:
            cfg._memo[cache_key] = verdict
    return verdict


def _log_query_cached(cfg: SolverConfig, query: str, verdict) -> None:
    if cfg.log_path is None:
        return
    with open(cfg.log_path, "a", encoding="utf-8") as fh:
        fh.write(f"; --- cached query ({verdict.kind}) ---\n")


# ---------------------------------------------------------------------------
# Bounded brute-force oracle
# ---------------------------------------------------------------------------

def _array_values(bound: int):
    for length in range(0, bound + 1):
        for els in itertools.product(range(-bound, bound + 1), repeat=length):
            yield list(els)


def bounded_check(antecedent: Formula, consequent: Formula,
                  bound: int) -> CheckVerdict:
    """Exhaustive check over scalars in [-bound, bound] and arrays of
    length <= bound with elements in [-bound, bound].

    Valid verdicts are bounded-only (``Valid(bounded=True)``); Invalid
    returns the first falsifying state in ascending enumeration order.
    States whose evaluation faults (e.g. unguarded reads) are skipped.
    """
    scalars, arrays = infer_sorts([antecedent, consequent])
    scalar_count = (2 * bound + 1) ** len(scalars)
    arr_count = sum((2 * bound + 1) ** n for n in range(bound + 1))
    total = scalar_count * (arr_count ** len(arrays))
    if total > STATE_SPACE_LIMIT:
        raise StateSpaceOverflow(
            f"bounded check would enumerate {total} states "
            f"(limit {STATE_SPACE_LIMIT})")
    names = scalars + arrays
    spaces = [list(range(-bound, bound + 1)) for _ in scalars] + \
             [list(_array_values(bound)) for _ in arrays]
    for combo in itertools.product(*spaces):
        values = {n: (list(v) if isinstance(v, list) else v)
                  for n, v in zip(names, combo)}
        state = State(values=values)
        try:
            if eval_formula(antecedent, state) and \
                    not eval_formula(consequent, state):
                return Invalid(state)
        except EvalFault:
            continue
    return Valid(bounded=True)
