"""CoRE-style scheme: numbered instruction lines with explicit flow pointers.

Canonical form::

    1:: process:: task_parsing_agent :: args=[task_description] :: output=parsed_task :: next::2
    2:: process:: code_generation_agent :: args=[parsed_task] :: output=generated_code :: next::END

Each line carries the four components instruction-number / type /
content / next-pointer. Step numbers must run 1..n in order and every
``next`` pointer must reference the following line (``END`` on the last).
Blank lines are ignored; there is no comment syntax.
"""

from __future__ import annotations

import re

from ..ir import StepSpec, WorkflowIR

_LINE_RE = re.compile(
    r"(\d+):: process:: (.+?) :: args=\[(.*?)\] :: output=(.+?) :: next::(\d+|END)"
)


def _fail(line: int, reason: str, category: str = "lexical"):
    from . import ParseFailure, Scheme

    raise ParseFailure(Scheme.CORE, line, 1, reason, category)


def parse_text(text: str) -> WorkflowIR:
    rows: list[tuple[int, int, str, tuple[str, ...], str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _LINE_RE.fullmatch(raw)
        if not m:
            _fail(lineno, f"line does not match the instruction shape: {raw.strip()!r}")
        number = int(m.group(1))
        args = tuple(m.group(3).split(",")) if m.group(3) else ()
        rows.append((lineno, number, m.group(2), args, m.group(4), m.group(5)))

    if not rows:
        _fail(1, "no instruction lines found", "structural")

    steps: list[StepSpec] = []
    for position, (lineno, number, name, args, output, nxt) in enumerate(rows, start=1):
        if number != position:
            _fail(lineno, f"instruction number {number} out of sequence (expected {position})", "structural")
        expected_next = "END" if position == len(rows) else str(position + 1)
        if nxt != expected_next:
            _fail(lineno, f"next pointer {nxt!r} must be {expected_next!r}", "structural")
        steps.append(StepSpec(name=name, args=args, output=output))
    return WorkflowIR(steps=tuple(steps))


def serialize_ir(w: WorkflowIR) -> str:
    total = len(w.steps)
    lines = []
    for i, step in enumerate(w.steps, start=1):
        nxt = "END" if i == total else str(i + 1)
        args = ",".join(step.args)
        lines.append(
            f"{i}:: process:: {step.name} :: args=[{args}] :: output={step.output} :: next::{nxt}"
        )
    return "\n".join(lines) + "\n"
