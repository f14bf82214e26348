"""Pseudo-code scheme: one call-arrow line per step.

Canonical form::

    task_parsing_agent(task_description) -> parsed_task

Blank lines and full-line ``#`` comments are ignored. Whitespace around
the argument separators and the arrow is insignificant; everything else
must match the ``name(arg, arg) -> output`` shape exactly.
"""

from __future__ import annotations

import re

from ..ir import StepSpec, WorkflowIR

_LINE_RE = re.compile(r"\s*([^()\s][^()]*?)\s*\((.*)\)\s*->\s*(\S+)\s*")


def _fail(line: int, reason: str, category: str = "lexical"):
    from . import ParseFailure, Scheme

    raise ParseFailure(Scheme.PSEUDO, line, 1, reason, category)


def parse_text(text: str) -> WorkflowIR:
    steps: list[StepSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE_RE.fullmatch(raw)
        if not m:
            _fail(lineno, f"expected 'name(args) -> output', found {stripped!r}")
        name, arg_text, output = m.group(1), m.group(2), m.group(3)
        if arg_text.strip():
            args = tuple(piece.strip() for piece in arg_text.split(","))
            if any(not a for a in args):
                _fail(lineno, "empty argument in the call list", "structural")
        else:
            args = ()
        steps.append(StepSpec(name=name, args=args, output=output))
    if not steps:
        _fail(1, "no step lines found", "structural")
    return WorkflowIR(steps=tuple(steps))


def serialize_ir(w: WorkflowIR) -> str:
    lines = [f"{step.name}({', '.join(step.args)}) -> {step.output}" for step in w.steps]
    return "\n".join(lines) + "\n"
