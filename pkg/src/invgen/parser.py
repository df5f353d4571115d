"""Parser for MiniImp source (``.imp``) and its assertion language.

Surface syntax is JML-flavored::

    method sum(int n)
      requires n >= 0;
      ensures s * 2 == n * (n - 1);
    {
        i = 0;
        s = 0;
        //@ loop_invariant 0 <= i && i <= n;
        while (i < n) {
            s = s + i;
            i = i + 1;
        }
    }

Annotation comments start with ``//@`` and cover one line; plain ``//``
comments are ignored.  Quantifiers are bounded:
``(\\forall int k; 0 <= k && k < n; a[k] > 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    Guard,
    If,
    Implies,
    IntLit,
    InvgenError,
    Ite,
    Nondet,
    Not,
    Or,
    Program,
    Seq,
    Skip,
    Stmt,
    Store,
    StoreStmt,
    TRUE,
    Var,
    While,
    conj,
    disj,
    seq_of,
)

KEYWORDS = {
    "method", "requires", "ensures", "if", "else", "while", "skip",
    "int", "true", "false", "nondet", "length",
}

_PUNCT = [
    "==>", "==", "!=", "<=", ">=", "&&", "||",
    "(", ")", "{", "}", "[", "]", ";", ",", "=", "<", ">",
    "+", "-", "*", "/", "%", "!", ".",
]


class ParseError(InvgenError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class TypeError_(InvgenError):
    """Sort error; named with a trailing underscore to avoid the builtin."""


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "number", "punct", "annot", "eof"
    value: str
    line: int
    col: int


def tokenize(text: str, line_offset: int = 0, col_offset: int = 0) -> list[Token]:
    tokens: list[Token] = []
    line = 1 + line_offset
    col = 1 + col_offset
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//@", i):
            end = text.find("\n", i)
            if end == -1:
                end = n
            tokens.append(Token("annot", text[i + 3:end], line, col))
            i = end
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            if end == -1:
                end = n
            i = end
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c == "\\":
            j = i + 1
            while j < n and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word not in ("\\forall", "\\exists"):
                raise ParseError(f"unknown quantifier {word!r}", line, col)
            tokens.append(Token("punct", word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    def expect(self, kind: str, value: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            got = t.value if t.value else t.kind
            raise self.fail(f"expected {want!r}, found {got!r}")
        return self.next()

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        t = self.peek()
        if t.kind == kind and (value is None or t.value == value):
            return self.next()
        return None

    def at_punct(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.value == value

    def at_ident(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.value == value

    # -- expressions -------------------------------------------------------

    def parse_term(self) -> Expr:
        return self._additive()

    def _additive(self) -> Expr:
        left = self._multiplicative()
        while self.peek().kind == "punct" and self.peek().value in ("+", "-"):
            op = self.next().value
            right = self._multiplicative()
            left = BinOp(op, left, right)
        return left

    def _multiplicative(self) -> Expr:
        left = self._unary_term()
        while self.peek().kind == "punct" and self.peek().value in ("*", "/", "%"):
            op = self.next().value
            right = self._unary_term()
            left = BinOp(op, left, right)
        return left

    def _unary_term(self) -> Expr:
        if self.at_punct("-"):
            self.next()
            inner = self._unary_term()
            if isinstance(inner, IntLit):
                return IntLit(-inner.value)
            return BinOp("-", IntLit(0), inner)
        return self._atom_term()

    def _atom_term(self) -> Expr:
        t = self.peek()
        if t.kind == "number":
            self.next()
            return IntLit(int(t.value))
        if t.kind == "punct" and t.value == "(":
            self.next()
            e = self.parse_term()
            self.expect("punct", ")")
            return e
        if t.kind == "ident":
            if t.value in KEYWORDS and t.value not in ("length",):
                raise self.fail(f"unexpected keyword {t.value!r} in expression")
            self.next()
            name = t.value
            if self.at_punct("["):
                self.next()
                idx = self.parse_term()
                self.expect("punct", "]")
                return ArrRead(Arr(name), idx)
            if self.at_punct("."):
                self.next()
                self.expect("ident", "length")
                return ArrLen(Arr(name))
            return Var(name)
        raise self.fail("expected expression")

    # -- formulas ----------------------------------------------------------

    def parse_formula(self) -> Formula:
        return self._implication()

    def _implication(self) -> Formula:
        left = self._disjunction()
        if self.at_punct("==>"):
            self.next()
            right = self._implication()  # right-associative
            return Implies(left, right)
        return left

    def _disjunction(self) -> Formula:
        parts = [self._conjunction()]
        while self.at_punct("||"):
            self.next()
            parts.append(self._conjunction())
        if len(parts) == 1:
            return parts[0]
        return disj(parts)

    def _conjunction(self) -> Formula:
        parts = [self._negation()]
        while self.at_punct("&&"):
            self.next()
            parts.append(self._negation())
        if len(parts) == 1:
            return parts[0]
        return conj(parts)

    def _negation(self) -> Formula:
        if self.at_punct("!"):
            self.next()
            return Not(self._negation())
        return self._atom_formula()

    def _atom_formula(self) -> Formula:
        t = self.peek()
        if t.kind == "ident" and t.value in ("true", "false"):
            self.next()
            return BoolLit(t.value == "true")
        if t.kind == "punct" and t.value == "(":
            # Could be a quantifier, a parenthesized formula, or a
            # parenthesized term starting a comparison.
            if self.tokens[self.pos + 1].kind == "punct" and \
                    self.tokens[self.pos + 1].value in ("\\forall", "\\exists"):
                return self._quantifier()
            snapshot = self.pos
            try:
                self.next()
                f = self.parse_formula()
                self.expect("punct", ")")
                return f
            except ParseError:
                self.pos = snapshot
            return self._comparison()
        return self._comparison()

    def _comparison(self) -> Formula:
        left = self.parse_term()
        t = self.peek()
        if t.kind != "punct" or t.value not in ("==", "!=", "<", "<=", ">", ">="):
            raise self.fail("expected comparison operator")
        self.next()
        right = self.parse_term()
        return Cmp(t.value, left, right)

    def _quantifier(self) -> Formula:
        self.expect("punct", "(")
        q = self.next().value  # \forall or \exists
        self.expect("ident", "int")
        var = self.expect("ident").value
        self.expect("punct", ";")
        lo, hi = self._quantifier_range(var)
        self.expect("punct", ";")
        body = self.parse_formula()
        self.expect("punct", ")")
        for bound in (lo, hi):
            if var in _term_vars(bound):
                raise self.fail(
                    f"quantifier bound mentions bound variable {var!r}")
        if q == "\\forall":
            return ForAll(var, lo, hi, body)
        return Exists(var, lo, hi, body)

    def _quantifier_range(self, var: str) -> tuple[Expr, Expr]:
        """Parse ``lo <= var && var < hi`` (or ``<= hi``, normalized)."""
        lo_term = self.parse_term()
        self.expect("punct", "<=")
        v = self.expect("ident")
        if v.value != var:
            raise ParseError(
                f"quantifier range must constrain {var!r}", v.line, v.col)
        self.expect("punct", "&&")
        v2 = self.expect("ident")
        if v2.value != var:
            raise ParseError(
                f"quantifier range must constrain {var!r}", v2.line, v2.col)
        op = self.expect("punct")
        if op.value == "<":
            hi_term = self.parse_term()
        elif op.value == "<=":
            hi_term = BinOp("+", self.parse_term(), IntLit(1))
        else:
            raise ParseError("expected '<' or '<=' in quantifier range",
                             op.line, op.col)
        return lo_term, hi_term

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> Stmt:
        self.expect("punct", "{")
        stmts: list[Stmt] = []
        pending_invariants: list[Formula] = []
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "annot":
                self.next()
                kind, payload = _parse_annotation(t)
                if kind == "loop_invariant":
                    pending_invariants.append(payload)
                else:
                    if pending_invariants:
                        raise ParseError(
                            "loop_invariant annotation must precede a while loop",
                            t.line, t.col)
                    stmts.append(payload)
                continue
            if t.kind == "ident" and t.value == "while":
                stmts.append(self._while(tuple(pending_invariants)))
                pending_invariants = []
                continue
            if pending_invariants:
                raise ParseError(
                    "loop_invariant annotation must precede a while loop",
                    t.line, t.col)
            stmts.append(self._statement())
        if pending_invariants:
            t = self.peek()
            raise ParseError(
                "loop_invariant annotation must precede a while loop",
                t.line, t.col)
        self.expect("punct", "}")
        return seq_of(stmts)

    def _while(self, invariants: tuple[Formula, ...]) -> Stmt:
        t = self.expect("ident", "while")
        self.expect("punct", "(")
        guard = self._guard(allow_nondet=False)
        self.expect("punct", ")")
        body = self.parse_block()
        # loop_id is assigned after parsing, in source order.
        return While(guard, body, loop_id=0, invariants=invariants, line=t.line)

    def _guard(self, allow_nondet: bool) -> Guard:
        if self.at_ident("nondet"):
            t = self.next()
            self.expect("punct", "(")
            self.expect("punct", ")")
            if not allow_nondet:
                raise ParseError(
                    "nondet() is only legal as an if-guard", t.line, t.col)
            return Nondet()
        return self.parse_formula()

    def _statement(self) -> Stmt:
        t = self.peek()
        if t.kind == "ident" and t.value == "skip":
            self.next()
            self.expect("punct", ";")
            return Skip(line=t.line)
        if t.kind == "ident" and t.value == "if":
            self.next()
            self.expect("punct", "(")
            guard = self._guard(allow_nondet=True)
            self.expect("punct", ")")
            then = self.parse_block()
            els: Stmt = Seq(())
            if self.at_ident("else"):
                self.next()
                els = self.parse_block()
            return If(guard, then, els, line=t.line)
        if t.kind == "ident":
            if t.value in KEYWORDS:
                raise self.fail(f"unexpected keyword {t.value!r}")
            name = self.next().value
            if self.at_punct("["):
                self.next()
                idx = self.parse_term()
                self.expect("punct", "]")
                self.expect("punct", "=")
                val = self.parse_term()
                self.expect("punct", ";")
                return StoreStmt(name, idx, val, line=t.line)
            self.expect("punct", "=")
            val = self.parse_term()
            self.expect("punct", ";")
            return Assign(name, val, line=t.line)
        raise self.fail("expected statement")

    # -- program -------------------------------------------------------------

    def parse_program(self) -> Program:
        self.expect("ident", "method")
        name = self.expect("ident").value
        self.expect("punct", "(")
        params: list[tuple[str, str]] = []
        if not self.at_punct(")"):
            while True:
                self.expect("ident", "int")
                ty = "int"
                if self.at_punct("["):
                    self.next()
                    self.expect("punct", "]")
                    ty = "int[]"
                pname_tok = self.expect("ident")
                if pname_tok.value in KEYWORDS:
                    raise ParseError(
                        f"parameter name {pname_tok.value!r} is a keyword",
                        pname_tok.line, pname_tok.col)
                if any(pname_tok.value == n for n, _ in params):
                    raise ParseError(
                        f"duplicate parameter {pname_tok.value!r}",
                        pname_tok.line, pname_tok.col)
                params.append((pname_tok.value, ty))
                if not self.accept("punct", ","):
                    break
        self.expect("punct", ")")
        pres: list[Formula] = []
        posts: list[Formula] = []
        while True:
            if self.at_ident("requires"):
                self.next()
                pres.append(self.parse_formula())
                self.accept("punct", ";")
            elif self.at_ident("ensures"):
                self.next()
                posts.append(self.parse_formula())
                self.accept("punct", ";")
            else:
                break
        body = self.parse_block()
        self.expect("eof")
        program = Program(
            name=name,
            params=tuple(params),
            pre=conj(pres),
            post=conj(posts),
            body=body,
        )
        return _number_loops(program)


def _parse_annotation(tok: Token) -> tuple[str, object]:
    """Parse the payload of a ``//@ ...`` annotation token."""
    sub = _Parser(tokenize(tok.value, line_offset=tok.line - 1,
                           col_offset=tok.col + 2))
    t = sub.peek()
    if t.kind == "ident" and t.value == "loop_invariant":
        sub.next()
        f = sub.parse_formula()
        sub.expect("punct", ";")
        sub.expect("eof")
        return "loop_invariant", f
    if t.kind == "ident" and t.value == "ghost":
        sub.next()
        sub.expect("ident", "int")
        name = sub.expect("ident").value
        sub.expect("punct", "=")
        init = sub.parse_term()
        sub.expect("punct", ";")
        sub.expect("eof")
        return "ghost", GhostDecl(name, init, line=tok.line)
    if t.kind == "ident" and t.value == "set":
        sub.next()
        name = sub.expect("ident").value
        sub.expect("punct", "=")
        value = sub.parse_term()
        sub.expect("punct", ";")
        sub.expect("eof")
        return "set", GhostSet(name, value, line=tok.line)
    raise ParseError(f"unknown annotation {t.value!r}", t.line, t.col)


def _number_loops(program: Program) -> Program:
    """Assign loop_ids 1..L in source order."""
    counter = [0]

    def walk(s: Stmt) -> Stmt:
        if isinstance(s, While):
            counter[0] += 1
            my_id = counter[0]
            return While(s.guard, walk(s.body), loop_id=my_id,
                         invariants=s.invariants, line=s.line)
        if isinstance(s, Seq):
            return Seq(tuple(walk(t) for t in s.stmts))
        if isinstance(s, If):
            return If(s.guard, walk(s.then), walk(s.els), line=s.line)
        return s

    return Program(program.name, program.params, program.pre, program.post,
                   walk(program.body))


def _term_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, IntLit):
        return set()
    if isinstance(e, BinOp):
        return _term_vars(e.left) | _term_vars(e.right)
    if isinstance(e, ArrRead):
        return _term_vars(e.index)
    if isinstance(e, ArrLen):
        return set()
    if isinstance(e, Ite):  # pragma: no cover - internal form
        return _term_vars(e.then) | _term_vars(e.els)
    raise TypeError_(f"unexpected term {e!r}")


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def parse_program(text: str) -> Program:
    """Parse a full MiniImp method and typecheck it."""
    program = _Parser(tokenize(text)).parse_program()
    typecheck_program(program)
    return program


def parse_formula(text: str) -> Formula:
    p = _Parser(tokenize(text))
    f = p.parse_formula()
    p.expect("eof")
    return f


def parse_term(text: str) -> Expr:
    p = _Parser(tokenize(text))
    e = p.parse_term()
    p.expect("eof")
    return e


def parse_stmts(text: str) -> Stmt:
    """Parse a brace-wrapped statement block (test convenience)."""
    p = _Parser(tokenize(text))
    s = p.parse_block()
    p.expect("eof")
    return _number_loops(Program("_", (), TRUE, TRUE, s)).body


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------

def typecheck_program(program: Program) -> None:
    """Check declarations, sorts, and MiniImp structural invariants."""
    env = {n: t for n, t in program.params}
    ghosts: set[str] = set()

    def check_stmt(s: Stmt) -> None:
        if isinstance(s, Skip):
            return
        if isinstance(s, Assign):
            if env.get(s.target) == "int[]":
                raise TypeError_(
                    f"cannot assign scalar to array {s.target!r}")
            check_term(s.value, env)
            env.setdefault(s.target, "int")
            return
        if isinstance(s, StoreStmt):
            if env.get(s.array) != "int[]":
                raise TypeError_(f"{s.array!r} is not a declared array")
            check_term(s.index, env)
            check_term(s.value, env)
            return
        if isinstance(s, GhostDecl):
            if s.name in env:
                raise TypeError_(
                    f"ghost {s.name!r} collides with a program variable")
            if s.name in ghosts:
                raise TypeError_(f"duplicate ghost declaration {s.name!r}")
            check_term(s.init, env)
            ghosts.add(s.name)
            env[s.name] = "int"
            return
        if isinstance(s, GhostSet):
            if s.name not in ghosts:
                raise TypeError_(f"set of undeclared ghost {s.name!r}")
            check_term(s.value, env)
            return
        if isinstance(s, Seq):
            for t in s.stmts:
                check_stmt(t)
            return
        if isinstance(s, If):
            if not isinstance(s.guard, Nondet):
                check_formula(s.guard, env)
            check_stmt(s.then)
            check_stmt(s.els)
            return
        if isinstance(s, While):
            check_formula(s.guard, env)
            check_stmt(s.body)
            return
        raise TypeError_(f"unexpected statement {s!r}")

    check_stmt(program.body)
    check_formula(program.pre, env)
    check_formula(program.post, env)
    ids = [w.loop_id for w in program.loops()]
    if ids != list(range(1, len(ids) + 1)):
        raise TypeError_(f"loop ids must be 1..L in source order, got {ids}")


def check_term(e: Expr, env: dict[str, str]) -> None:
    if isinstance(e, IntLit):
        return
    if isinstance(e, Var):
        ty = env.get(e.name)
        if ty is None:
            raise TypeError_(f"undeclared identifier {e.name!r}")
        if ty != "int":
            raise TypeError_(f"{e.name!r} is not integer-sorted")
        return
    if isinstance(e, BinOp):
        check_term(e.left, env)
        check_term(e.right, env)
        return
    if isinstance(e, (ArrRead, ArrLen)):
        _check_arr(e.arr, env)
        if isinstance(e, ArrRead):
            check_term(e.index, env)
        return
    if isinstance(e, Ite):
        check_formula(e.cond, env)
        check_term(e.then, env)
        check_term(e.els, env)
        return
    raise TypeError_(f"unexpected term {e!r}")


def _check_arr(a, env: dict[str, str]) -> None:
    if isinstance(a, Arr):
        if env.get(a.name) != "int[]":
            raise TypeError_(f"{a.name!r} is not a declared array")
        return
    if isinstance(a, Store):
        _check_arr(a.arr, env)
        check_term(a.index, env)
        check_term(a.value, env)
        return
    raise TypeError_(f"unexpected array term {a!r}")


def check_formula(f: Formula, env: dict[str, str]) -> None:
    if isinstance(f, BoolLit):
        return
    if isinstance(f, Cmp):
        check_term(f.left, env)
        check_term(f.right, env)
        return
    if isinstance(f, (And, Or)):
        for g in f.args:
            check_formula(g, env)
        return
    if isinstance(f, Not):
        check_formula(f.arg, env)
        return
    if isinstance(f, Implies):
        check_formula(f.lhs, env)
        check_formula(f.rhs, env)
        return
    if isinstance(f, (ForAll, Exists)):
        check_term(f.lo, env)
        check_term(f.hi, env)
        inner = dict(env)
        inner[f.var] = "int"
        check_formula(f.body, inner)
        return
    raise TypeError_(f"unexpected formula {f!r}")
