"""Splitting a program body into alternating loop-free / loop segments and
rendering the marker-comment view used in prompts.

The marker view wraps each segment in ``// code N open`` / ``// code N
close`` and ``// while N open`` / ``// while N close`` comment pairs.  Empty
loop-free segments between adjacent loops are kept explicit so the
"segment before loop k" lookup is total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .printer import render_formula, render_stmt
from .syntax import (
    Formula,
    If,
    InvgenError,
    Program,
    Seq,
    Stmt,
    While,
    seq_of,
    stmts_of,
)


class NestedLoopError(InvgenError):
    def __init__(self, loop_id: int):
        super().__init__(
            f"loop {loop_id} is nested inside another statement; "
            "only top-level sequential loops are supported")
        self.loop_id = loop_id


@dataclass(frozen=True)
class LoopFree:
    index: int
    stmts: tuple[Stmt, ...]


@dataclass(frozen=True)
class Loop:
    index: int
    node: While

    @property
    def guard(self) -> Formula:
        return self.node.guard

    @property
    def body(self) -> Stmt:
        return self.node.body

    @property
    def loop_id(self) -> int:
        return self.node.loop_id


Segment = Union[LoopFree, Loop]


@dataclass(frozen=True)
class SegmentedProgram:
    segments: tuple[Segment, ...]

    @property
    def loops(self) -> tuple[Loop, ...]:
        return tuple(s for s in self.segments if isinstance(s, Loop))

    @property
    def loop_free(self) -> tuple[LoopFree, ...]:
        return tuple(s for s in self.segments if isinstance(s, LoopFree))

    def segment_before(self, loop_index: int) -> LoopFree:
        """The loop-free segment immediately preceding loop ``loop_index``."""
        return self.loop_free[loop_index - 1]

    def segment_after_last(self) -> LoopFree:
        return self.loop_free[-1]

    def flatten(self) -> Stmt:
        out: list[Stmt] = []
        for seg in self.segments:
            if isinstance(seg, LoopFree):
                out.extend(seg.stmts)
            else:
                out.append(seg.node)
        return seq_of(out)


def _reject_nested(s: Stmt) -> None:
    """Reject while loops anywhere below the top level."""
    if isinstance(s, While):
        raise NestedLoopError(s.loop_id)
    if isinstance(s, Seq):
        for t in s.stmts:
            _reject_nested(t)
    elif isinstance(s, If):
        _reject_nested(s.then)
        _reject_nested(s.els)


def segment_program(p: Program) -> SegmentedProgram:
    """Split the body into [LoopFree 1, Loop 1, LoopFree 2, ..., LoopFree L+1].

    Loop-free and loop indices each count consecutively from 1; empty
    loop-free segments are materialized explicitly.  Raises NestedLoopError
    if any while sits below the top level of the body.
    """
    segments: list[Segment] = []
    pending: list[Stmt] = []
    code_index = 0
    loop_index = 0
    for s in stmts_of(p.body):
        if isinstance(s, While):
            _reject_nested(s.body)
            code_index += 1
            segments.append(LoopFree(code_index, tuple(pending)))
            pending = []
            loop_index += 1
            segments.append(Loop(loop_index, s))
        else:
            _reject_nested(s)
            pending.append(s)
    code_index += 1
    segments.append(LoopFree(code_index, tuple(pending)))
    return SegmentedProgram(tuple(segments))


def render_markers(sp: SegmentedProgram, indent: int = 0) -> str:
    """Render the body with open/close marker comments around each segment."""
    pad = "    " * indent
    lines: list[str] = []
    for seg in sp.segments:
        if isinstance(seg, LoopFree):
            lines.append(f"{pad}// code {seg.index} open")
            for s in seg.stmts:
                lines.extend(render_stmt(s, indent))
            lines.append(f"{pad}// code {seg.index} close")
        else:
            lines.append(f"{pad}// while {seg.index} open")
            lines.append(f"{pad}while ({render_formula(seg.guard)}) {{")
            lines.extend(render_stmt(seg.body, indent + 1))
            lines.append(f"{pad}}}")
            lines.append(f"{pad}// while {seg.index} close")
    return "\n".join(lines) + "\n"


def render_marked_program(p: Program) -> str:
    """Full method rendering with the marker view as the body.

    This is the "Segmented Program" payload used in prompts; stripping the
    marker comments (which the parser does automatically) reparses to the
    original program.
    """
    from .syntax import conjuncts_of

    params = ", ".join(f"{ty} {name}" for name, ty in p.params)
    lines = [f"method {p.name}({params})"]
    for c in conjuncts_of(p.pre) or (p.pre,):
        lines.append(f"  requires {render_formula(c)};")
    for c in conjuncts_of(p.post) or (p.post,):
        lines.append(f"  ensures {render_formula(c)};")
    lines.append("{")
    lines.append(render_markers(segment_program(p), indent=1).rstrip("\n"))
    lines.append("}")
    return "\n".join(lines) + "\n"
