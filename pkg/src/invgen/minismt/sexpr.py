"""S-expression reading/printing for the SMT-LIB subset we speak."""

from __future__ import annotations

from typing import Union

SExpr = Union[str, int, list]


class SExprError(Exception):
    pass


def tokenize(text: str):
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == ";":
            j = text.find("\n", i)
            i = n if j == -1 else j
            continue
        if c in "()":
            yield c
            i += 1
            continue
        if c == "|":
            j = text.find("|", i + 1)
            if j == -1:
                raise SExprError("unterminated quoted symbol")
            yield text[i + 1:j]
            i = j + 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SExprError("unterminated string literal")
            yield text[i:j + 1]
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in " \t\r\n();":
            j += 1
        yield text[i:j]
        i = j


def parse_all(text: str) -> list[SExpr]:
    """Parse every top-level s-expression in ``text``."""
    stack: list[list] = []
    top: list[SExpr] = []
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise SExprError("unbalanced ')'")
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                top.append(done)
        else:
            atom: SExpr = int(tok) if tok.lstrip("-").isdigit() and \
                tok not in ("-",) else tok
            if stack:
                stack[-1].append(atom)
            else:
                top.append(atom)
    if stack:
        raise SExprError("unbalanced '('")
    return top


def render(e: SExpr) -> str:
    if isinstance(e, int):
        return str(e) if e >= 0 else f"(- {-e})"
    if isinstance(e, str):
        return e
    return "(" + " ".join(render(x) for x in e) + ")"
