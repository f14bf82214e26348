"""YAML-style scheme, restricted to a fixed step-mapping subset.

Canonical form::

    - name: task_parsing_agent
      args:
        - task_description
      output: parsed_task

One mapping per step with the keys ``name``, ``args`` (a sequence of
scalars), ``output`` in that order; entries separated by a blank line.
No anchors, tags, or flow style: the subset is parsed with its own
line-oriented grammar rather than a general YAML engine, so scalars are
always plain strings. Blank lines and full-line ``#`` comments are
ignored anywhere.
"""

from __future__ import annotations

import re

from ..ir import StepSpec, WorkflowIR

_NAME_RE = re.compile(r"- name: (.+)")
_ARGS_RE = re.compile(r"  args:")
_ITEM_RE = re.compile(r"    - (.+)")
_OUTPUT_RE = re.compile(r"  output: (.+)")


def _fail(line: int, reason: str, category: str = "lexical"):
    from . import ParseFailure, Scheme

    raise ParseFailure(Scheme.YAML, line, 1, reason, category)


def _significant_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((lineno, raw))
    return out


def parse_text(text: str) -> WorkflowIR:
    lines = _significant_lines(text)
    steps: list[StepSpec] = []
    i = 0
    while i < len(lines):
        lineno, raw = lines[i]
        m = _NAME_RE.fullmatch(raw)
        if not m:
            _fail(lineno, f"expected '- name: <agent>', found {raw!r}")
        name = m.group(1)
        i += 1

        if i >= len(lines) or not _ARGS_RE.fullmatch(lines[i][1]):
            at = lines[i][0] if i < len(lines) else lineno
            _fail(at, "expected an 'args:' line after 'name:'", "structural")
        i += 1

        args: list[str] = []
        while i < len(lines):
            m = _ITEM_RE.fullmatch(lines[i][1])
            if not m:
                break
            args.append(m.group(1))
            i += 1

        if i >= len(lines):
            _fail(lines[-1][0], "expected an 'output:' line", "structural")
        lineno_out, raw_out = lines[i]
        m = _OUTPUT_RE.fullmatch(raw_out)
        if not m:
            _fail(lineno_out, f"expected '  output: <name>', found {raw_out!r}", "structural")
        output = m.group(1)
        i += 1

        steps.append(StepSpec(name=name, args=tuple(args), output=output))

    if not steps:
        _fail(1, "no step entries found", "structural")
    return WorkflowIR(steps=tuple(steps))


def serialize_ir(w: WorkflowIR) -> str:
    blocks = []
    for step in w.steps:
        lines = [f"- name: {step.name}", "  args:"]
        lines.extend(f"    - {arg}" for arg in step.args)
        lines.append(f"  output: {step.output}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
