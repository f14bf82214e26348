"""Python-style step-list scheme.

Canonical form::

    steps = [
        {'name': 'task_parsing_agent', 'args': ['task_description'], 'output': 'parsed_task'},
    ]

One map literal per step with the keys ``name``, ``args``, ``output`` in
that order, single-quoted strings, trailing commas permitted. Full-line
``#`` comments and blank lines are ignored. The text is parsed with a
purpose-built grammar and is never evaluated as a program.
"""

from __future__ import annotations

from ..ir import StepSpec, WorkflowIR


def _fail(line: int, column: int, reason: str, category: str = "lexical"):
    from . import ParseFailure, Scheme

    raise ParseFailure(Scheme.PYSTEPS, line, column, reason, category)


class _Scanner:
    """Character cursor with 1-based line/column tracking."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_layout(self) -> None:
        """Skip whitespace and full-line comments."""
        while not self.eof():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#" and self._only_ws_since_newline():
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def _only_ws_since_newline(self) -> bool:
        i = self.pos - 1
        while i >= 0 and self.text[i] != "\n":
            if self.text[i] not in " \t\r":
                return False
            i -= 1
        return True

    def expect(self, literal: str) -> None:
        self.skip_layout()
        for ch in literal:
            if self.eof() or self.peek() != ch:
                found = self.peek() if not self.eof() else "end of input"
                _fail(self.line, self.col, f"expected {literal!r}, found {found!r}")
            self.advance()

    def try_consume(self, literal: str) -> bool:
        self.skip_layout()
        end = self.pos + len(literal)
        if self.text[self.pos : end] == literal:
            for _ in literal:
                self.advance()
            return True
        return False

    def string(self) -> str:
        """A single-quoted string with no escapes."""
        self.skip_layout()
        if self.eof() or self.peek() != "'":
            found = self.peek() if not self.eof() else "end of input"
            _fail(self.line, self.col, f"expected a single-quoted string, found {found!r}")
        self.advance()
        chars: list[str] = []
        while True:
            if self.eof() or self.peek() == "\n":
                _fail(self.line, self.col, "unterminated string")
            ch = self.advance()
            if ch == "'":
                return "".join(chars)
            chars.append(ch)

    def keyword_string(self, keyword: str) -> None:
        self.skip_layout()
        line, col = self.line, self.col
        value = self.string()
        if value != keyword:
            _fail(line, col, f"expected key {keyword!r}, found {value!r}", "structural")


def parse_text(text: str) -> WorkflowIR:
    sc = _Scanner(text)
    sc.expect("steps")
    sc.expect("=")
    sc.expect("[")

    steps: list[StepSpec] = []
    while True:
        sc.skip_layout()
        if sc.try_consume("]"):
            break
        if steps and not sc.try_consume(","):
            _fail(sc.line, sc.col, "expected ',' between step entries", "structural")
        sc.skip_layout()
        if sc.try_consume("]"):  # trailing comma before the closing bracket
            break
        steps.append(_parse_entry(sc))

    sc.skip_layout()
    if not sc.eof():
        _fail(sc.line, sc.col, "content after the step list", "structural")
    if not steps:
        _fail(1, 1, "step list is empty", "structural")
    return WorkflowIR(steps=tuple(steps))


def _parse_entry(sc: _Scanner) -> StepSpec:
    sc.expect("{")
    sc.keyword_string("name")
    sc.expect(":")
    name = sc.string()
    sc.expect(",")
    sc.keyword_string("args")
    sc.expect(":")
    sc.expect("[")
    args: list[str] = []
    while True:
        sc.skip_layout()
        if sc.try_consume("]"):
            break
        if args and not sc.try_consume(","):
            _fail(sc.line, sc.col, "expected ',' between arguments", "structural")
        sc.skip_layout()
        if sc.try_consume("]"):  # trailing comma inside args
            break
        args.append(sc.string())
    sc.expect(",")
    sc.keyword_string("output")
    sc.expect(":")
    output = sc.string()
    sc.try_consume(",")
    sc.expect("}")
    return StepSpec(name=name, args=tuple(args), output=output)


def serialize_ir(w: WorkflowIR) -> str:
    lines = ["steps = ["]
    for step in w.steps:
        args = ", ".join(f"'{a}'" for a in step.args)
        lines.append(
            f"    {{'name': '{step.name}', 'args': [{args}], 'output': '{step.output}'}},"
        )
    lines.append("]")
    return "\n".join(lines) + "\n"
