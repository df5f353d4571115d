"""Cooper's quantifier-elimination procedure, used as a model-producing
satisfiability check for quantifier-free Presburger formulas.

Formulas are trees over four atom kinds on linear terms ``t``:

    ('lt', t)      t < 0
    ('eq', t)      t = 0
    ('ne', t)      t != 0
    ('dvd', d, t)  d divides t

with ('and', parts) / ('or', parts) structure and ('true',) / ('false',)
constants.  Linear terms are ``(const, ((var, coeff), ...))`` with the
variable list sorted.  Satisfiability is decided by eliminating one
variable at a time through Cooper's test-point construction; the test
points that succeed are evaluated back into a concrete model, so a ``sat``
answer always comes with witness values.
"""

from __future__ import annotations

from math import gcd
from typing import Iterator, Optional

TRUE = ("true",)
FALSE = ("false",)

Lin = tuple  # (const, ((var, coeff), ...))


class CooperBudget(Exception):
    """Raised when the search exceeds its node budget."""


# ---------------------------------------------------------------------------
# Linear terms
# ---------------------------------------------------------------------------

def lin_const(c: int) -> Lin:
    return (c, ())


def lin_var(v: str, coeff: int = 1) -> Lin:
    return (0, ((v, coeff),))


def lin_add(a: Lin, b: Lin) -> Lin:
    terms = dict(a[1])
    for v, c in b[1]:
        nc = terms.get(v, 0) + c
        if nc == 0:
            terms.pop(v, None)
        else:
            terms[v] = nc
    return (a[0] + b[0], tuple(sorted(terms.items())))


def lin_scale(a: Lin, k: int) -> Lin:
    if k == 0:
        return (0, ())
    return (a[0] * k, tuple((v, c * k) for v, c in a[1]))


def lin_coeff(a: Lin, x: str) -> int:
    for v, c in a[1]:
        if v == x:
            return c
    return 0


def lin_drop(a: Lin, x: str) -> Lin:
    return (a[0], tuple((v, c) for v, c in a[1] if v != x))


def lin_eval(a: Lin, env: dict[str, int]) -> int:
    return a[0] + sum(c * env[v] for v, c in a[1])


def lin_vars(a: Lin) -> tuple[str, ...]:
    return tuple(v for v, _ in a[1])


# ---------------------------------------------------------------------------
# Formula constructors (ground atoms collapse immediately)
# ---------------------------------------------------------------------------

def mk_lt(t: Lin):
    if not t[1]:
        return TRUE if t[0] < 0 else FALSE
    g = 0
    for _v, c in t[1]:
        g = gcd(g, abs(c))
    if g > 1:
        # g*t' + c < 0  <=>  t' < -c/g  <=>  t' + floor(c/g) < 0
        # (floor rounding is exact for strict < over the integers).
        return ("lt", (t[0] // g, tuple((v, c // g) for v, c in t[1])))
    return ("lt", t)


def mk_eq(t: Lin):
    if not t[1]:
        return TRUE if t[0] == 0 else FALSE
    g = 0
    for _v, c in t[1]:
        g = gcd(g, abs(c))
    if g > 1:
        if t[0] % g != 0:
            return FALSE
        t = (t[0] // g, tuple((v, c // g) for v, c in t[1]))
    return ("eq", t)


def mk_ne(t: Lin):
    e = mk_eq(t)
    if e == TRUE:
        return FALSE
    if e == FALSE:
        return TRUE
    return ("ne", e[1])


def mk_dvd(d: int, t: Lin):
    d = abs(d)
    if d == 1:
        return TRUE
    terms = tuple((v, c % d) for v, c in t[1] if c % d != 0)
    const = t[0] % d
    if not terms:
        return TRUE if const == 0 else FALSE
    return ("dvd", d, (const, terms))


def mk_and(parts) -> tuple:
    out = []
    seen = set()
    for p in parts:
        if p == FALSE:
            return FALSE
        if p == TRUE:
            continue
        if p[0] == "and":
            for q in p[1]:
                if q not in seen:
                    seen.add(q)
                    out.append(q)
        elif p not in seen:
            seen.add(p)
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def mk_or(parts) -> tuple:
    out = []
    seen = set()
    for p in parts:
        if p == TRUE:
            return TRUE
        if p == FALSE:
            continue
        if p[0] == "or":
            for q in p[1]:
                if q not in seen:
                    seen.add(q)
                    out.append(q)
        elif p not in seen:
            seen.add(p)
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def formula_vars(phi, acc: Optional[set] = None) -> set:
    if acc is None:
        acc = set()
    kind = phi[0]
    if kind in ("true", "false"):
        return acc
    if kind in ("and", "or"):
        for p in phi[1]:
            formula_vars(p, acc)
        return acc
    t = phi[2] if kind == "dvd" else phi[1]
    for v, _c in t[1]:
        acc.add(v)
    return acc


def subst(phi, x: str, repl: Lin):
    """phi[x := repl] with immediate ground collapsing."""
    kind = phi[0]
    if kind in ("true", "false"):
        return phi
    if kind == "and":
        return mk_and(subst(p, x, repl) for p in phi[1])
    if kind == "or":
        return mk_or(subst(p, x, repl) for p in phi[1])
    t = phi[2] if kind == "dvd" else phi[1]
    c = lin_coeff(t, x)
    if c == 0:
        return phi
    t2 = lin_add(lin_drop(t, x), lin_scale(repl, c))
    if kind == "lt":
        return mk_lt(t2)
    if kind == "eq":
        return mk_eq(t2)
    if kind == "ne":
        return mk_ne(t2)
    return mk_dvd(phi[1], t2)


def eval_formula(phi, env: dict[str, int]) -> bool:
    kind = phi[0]
    if kind == "true":
        return True
    if kind == "false":
        return False
    if kind == "and":
        return all(eval_formula(p, env) for p in phi[1])
    if kind == "or":
        return any(eval_formula(p, env) for p in phi[1])
    if kind == "lt":
        return lin_eval(phi[1], env) < 0
    if kind == "eq":
        return lin_eval(phi[1], env) == 0
    if kind == "ne":
        return lin_eval(phi[1], env) != 0
    return lin_eval(phi[2], env) % phi[1] == 0


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------

def _atoms(phi) -> Iterator[tuple]:
    kind = phi[0]
    if kind in ("and", "or"):
        for p in phi[1]:
            yield from _atoms(p)
    elif kind not in ("true", "false"):
        yield phi


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _unity(phi, x: str, delta: int):
    """Scale atoms so x's coefficient is +-delta, then rename delta*x -> x."""
    kind = phi[0]
    if kind in ("true", "false"):
        return phi
    if kind == "and":
        return mk_and(_unity(p, x, delta) for p in phi[1])
    if kind == "or":
        return mk_or(_unity(p, x, delta) for p in phi[1])
    t = phi[2] if kind == "dvd" else phi[1]
    c = lin_coeff(t, x)
    if c == 0:
        return phi
    m = delta // abs(c)
    t = lin_scale(t, m)  # coefficient of x is now +-delta
    sign = 1 if c > 0 else -1
    # Replace the delta*x term with a unit-coefficient occurrence of x.
    rest = lin_drop(t, x)
    t = lin_add(rest, lin_var(x, sign))
    if kind == "lt":
        return ("lt", t)
    d = phi[1] * m if kind == "dvd" else None
    if kind in ("eq", "ne", "dvd") and sign < 0:
        # Normalize to +x for eq/ne/dvd (all are negation-stable).
        t = lin_scale(t, -1)
    if kind == "eq":
        return ("eq", t)
    if kind == "ne":
        return ("ne", t)
    return ("dvd", d, t)


def _infinity(phi, x: str, sign: int):
    """Limit formula for x -> -inf (sign=-1) or x -> +inf (sign=+1)."""
    kind = phi[0]
    if kind in ("true", "false"):
        return phi
    if kind == "and":
        return mk_and(_infinity(p, x, sign) for p in phi[1])
    if kind == "or":
        return mk_or(_infinity(p, x, sign) for p in phi[1])
    t = phi[2] if kind == "dvd" else phi[1]
    c = lin_coeff(t, x)
    if c == 0:
        return phi
    if kind == "lt":
        # c*x + rest < 0 as x -> sign*inf
        return TRUE if c * sign < 0 else FALSE
    if kind == "eq":
        return FALSE
    if kind == "ne":
        return TRUE
    return phi  # dvd atoms survive; x substituted by the residue later


class _Search:
    def __init__(self, max_nodes: int):
        self.max_nodes = max_nodes
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise CooperBudget(f"search exceeded {self.max_nodes} nodes")


def _pick_var(phi) -> str:
    counts: dict[str, int] = {}
    for atom in _atoms(phi):
        t = atom[2] if atom[0] == "dvd" else atom[1]
        for v, _c in t[1]:
            counts[v] = counts.get(v, 0) + 1
    return min(counts, key=lambda v: (counts[v], v))


def _bounded_presearch(phi, bound: int = 3,
                       max_evals: int = 20_000) -> Optional[dict[str, int]]:
    """Cheap direct search over a small cube; catches most SAT instances."""
    from itertools import product

    vs = sorted(formula_vars(phi))
    if not vs:
        return {} if eval_formula(phi, {}) else None
    if (2 * bound + 1) ** len(vs) > max_evals:
        return None
    for vals in product(range(-bound, bound + 1), repeat=len(vs)):
        env = dict(zip(vs, vals))
        if eval_formula(phi, env):
            return env
    return None


def sat_model(phi, max_nodes: int = 300_000) -> Optional[dict[str, int]]:
    """A satisfying assignment for ``phi``, or None when unsatisfiable.

    Raises CooperBudget if the search exceeds ``max_nodes`` recursion steps.
    """
    if phi == TRUE:
        return {}
    if phi == FALSE:
        return None
    model = _bounded_presearch(phi)
    if model is None:
        search = _Search(max_nodes)
        model = _solve(phi, search, {})
    if model is not None:
        for v in formula_vars(phi):
            model.setdefault(v, 0)
        assert eval_formula(phi, model), "internal error: model check failed"
    return model


def _unit_equality(phi) -> Optional[tuple[str, Lin]]:
    """A top-level conjunct x = t with unit coefficient, if any."""
    if phi[0] == "eq":
        atoms = [phi]
    elif phi[0] == "and":
        atoms = [p for p in phi[1] if p[0] == "eq"]
    else:
        return None
    for atom in atoms:
        for v, c in atom[1][1]:
            if c in (1, -1):
                # v = -c * rest
                rest = lin_scale(lin_drop(atom[1], v), -c)
                return v, rest
    return None


def _solve(phi, search: _Search, memo: dict) -> Optional[dict[str, int]]:
    if phi == TRUE:
        return {}
    if phi == FALSE:
        return None
    hit = memo.get(phi, False)
    if hit is not False:
        return dict(hit) if hit is not None else None
    search.tick()

    # Propagate unit equalities: x = t eliminates x without branching.
    unit = _unit_equality(phi)
    if unit is not None:
        x, repl = unit
        m = _solve(subst(phi, x, repl), search, memo)
        if m is not None:
            m = _total(m, repl)
            m[x] = lin_eval(repl, m)
        memo[phi] = dict(m) if m is not None else None
        return m

    x = _pick_var(phi)

    delta = 1
    for atom in _atoms(phi):
        t = atom[2] if atom[0] == "dvd" else atom[1]
        c = lin_coeff(t, x)
        if c:
            delta = _lcm(delta, abs(c))
    unified = _unity(phi, x, delta)
    if delta > 1:
        unified = mk_and([unified, ("dvd", delta, lin_var(x))])

    big_d = 1
    lowers = uppers = 0
    for atom in _atoms(unified):
        if atom[0] == "dvd":
            if lin_coeff(atom[2], x):
                big_d = _lcm(big_d, atom[1])
        elif atom[0] == "lt":
            c = lin_coeff(atom[1], x)
            if c < 0:
                lowers += 1
            elif c > 0:
                uppers += 1
    # Work from whichever side has fewer boundary points.
    sign = 1 if lowers <= uppers else -1  # +1: B-set (below), -1: A-set
    points: list[Lin] = []
    for atom in _atoms(unified):
        if atom[0] == "dvd":
            continue
        t = atom[1]
        c = lin_coeff(t, x)
        if c == 0:
            continue
        rest = lin_drop(t, x)
        if sign > 0:
            if atom[0] == "lt" and c < 0:
                points.append(rest)  # -x + r < 0: lower bound r
            elif atom[0] == "eq":
                points.append(lin_add(lin_scale(rest, -1), lin_const(-1)))
            elif atom[0] == "ne":
                points.append(lin_scale(rest, -1))
        else:
            if atom[0] == "lt" and c > 0:
                points.append(lin_scale(rest, -1))  # x + r < 0: upper -r
            elif atom[0] == "eq":
                points.append(lin_add(lin_scale(rest, -1), lin_const(1)))
            elif atom[0] == "ne":
                points.append(lin_scale(rest, -1))
    points = sorted(set(points))

    result: Optional[dict[str, int]] = None
    for j in range(1, big_d + 1):
        for p in points:
            cand = lin_add(p, lin_const(sign * j))
            psi = subst(unified, x, cand)
            m = _solve(psi, search, memo)
            if m is not None:
                m = _total(m, cand)
                result = _finish(m, x, lin_eval(cand, m), delta)
                break
        if result is not None:
            break
        psi = subst(_infinity(unified, x, -sign), x, lin_const(j))
        m = _solve(psi, search, memo)
        if m is not None:
            y = _infinity_witness(unified, x, m, j, big_d, -sign)
            result = _finish(m, x, y, delta)
            break
    memo[phi] = dict(result) if result is not None else None
    return result


def _total(m: dict[str, int], t: Lin) -> dict[str, int]:
    """Extend ``m`` with zeros for variables of ``t`` it does not bind."""
    out = dict(m)
    for v, _c in t[1]:
        out.setdefault(v, 0)
    return out


def _finish(m: dict[str, int], x: str, y: int, delta: int) -> dict[str, int]:
    assert y % delta == 0, "internal error: divisibility of test point"
    m[x] = y // delta
    return m


def _infinity_witness(unified, x: str, m: dict[str, int], j: int,
                      big_d: int, direction: int) -> int:
    """A concrete extreme value realizing the +-infinity branch."""
    for v in formula_vars(unified):
        if v != x:
            m.setdefault(v, 0)
    mags: list[int] = []
    for atom in _atoms(unified):
        t = atom[2] if atom[0] == "dvd" else atom[1]
        c = lin_coeff(t, x)
        if c == 0:
            continue
        val = lin_eval(lin_drop(t, x), m)
        # atom is (+-x + rest <op> 0): behavior stabilizes beyond |val|.
        mags.append(abs(val))
    extreme = (max(mags) if mags else 0) + 1
    if direction < 0:
        t0 = -extreme
        return t0 - ((t0 - j) % big_d)
    t0 = extreme
    return t0 + ((j - t0) % big_d)
