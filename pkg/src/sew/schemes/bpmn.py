"""BPMN-style scheme: a minimal XML subset for linear pipelines.

Canonical form::

    <?xml version="1.0" encoding="UTF-8"?>
    <process id="workflow">
      <task id="step_1" name="task_parsing_agent">
        <documentation>args=task_description;output=parsed_task</documentation>
      </task>
      <sequenceFlow sourceRef="step_1" targetRef="step_2"/>
    </process>

A ``process`` root holds ``task`` elements (id, name, one
``documentation`` child carrying ``args=a,b;output=o``) and
``sequenceFlow`` edges. The edges must form one linear chain that visits
every task in document order; anything else, and any element or
attribute outside this subset, is rejected. The XML is tokenized with
expat; no general BPMN semantics are applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from xml.parsers import expat
from xml.sax.saxutils import quoteattr

from ..ir import StepSpec, WorkflowIR

_DOC_RE = re.compile(r"args=(.*);output=(.+)", re.DOTALL)


def _fail(line: int, column: int, reason: str, category: str = "structural"):
    from . import ParseFailure, Scheme

    raise ParseFailure(Scheme.BPMN, max(line, 1), max(column, 1), reason, category)


@dataclass
class _Task:
    id: str
    name: str
    line: int
    column: int
    doc_text: str | None = None
    doc_parts: list[str] = field(default_factory=list)


class _Builder:
    """Expat target that accepts only the minimal element set."""

    def __init__(self, parser: "expat.XMLParserType"):
        self.parser = parser
        self.stack: list[str] = []
        self.tasks: list[_Task] = []
        self.flows: list[tuple[str, str]] = []
        self.in_documentation = False

    def _pos(self) -> tuple[int, int]:
        return self.parser.CurrentLineNumber, self.parser.CurrentColumnNumber + 1

    def start(self, name: str, attrs: dict[str, str]) -> None:
        line, col = self._pos()
        depth = len(self.stack)
        if depth == 0:
            if name != "process":
                _fail(line, col, f"root element must be <process>, found <{name}>")
            if set(attrs) != {"id"}:
                _fail(line, col, "<process> carries exactly one attribute: id")
        elif depth == 1:
            if name == "task":
                if set(attrs) != {"id", "name"}:
                    _fail(line, col, "<task> carries exactly the attributes id and name")
                self.tasks.append(_Task(attrs["id"], attrs["name"], line, col))
            elif name == "sequenceFlow":
                if set(attrs) != {"sourceRef", "targetRef"}:
                    _fail(line, col, "<sequenceFlow> carries exactly sourceRef and targetRef")
                self.flows.append((attrs["sourceRef"], attrs["targetRef"]))
            else:
                _fail(line, col, f"unexpected element <{name}> inside <process>")
        elif depth == 2 and self.stack[-1] == "task":
            if name != "documentation":
                _fail(line, col, f"unexpected element <{name}> inside <task>")
            if attrs:
                _fail(line, col, "<documentation> carries no attributes")
            if self.tasks[-1].doc_text is not None:
                _fail(line, col, "a <task> holds exactly one <documentation>")
            self.in_documentation = True
        else:
            _fail(line, col, f"unexpected element <{name}>")
        self.stack.append(name)

    def end(self, name: str) -> None:
        self.stack.pop()
        if name == "documentation":
            self.tasks[-1].doc_text = "".join(self.tasks[-1].doc_parts)
            self.tasks[-1].doc_parts = []
            self.in_documentation = False

    def chardata(self, data: str) -> None:
        if self.in_documentation:
            self.tasks[-1].doc_parts.append(data)
        elif data.strip():
            line, col = self._pos()
            _fail(line, col, f"stray text {data.strip()!r} between elements", "lexical")


def parse_text(text: str) -> WorkflowIR:
    parser = expat.ParserCreate()
    builder = _Builder(parser)
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.chardata
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        _fail(exc.lineno, exc.offset + 1, expat.errors.messages[exc.code], "lexical")

    if not builder.tasks:
        _fail(1, 1, "process contains no tasks")

    steps: list[StepSpec] = []
    ids: list[str] = []
    for task in builder.tasks:
        if task.id in ids:
            _fail(task.line, task.column, f"duplicate task id {task.id!r}")
        ids.append(task.id)
        if task.doc_text is None:
            _fail(task.line, task.column, f"task {task.id!r} is missing its <documentation>")
        m = _DOC_RE.fullmatch(task.doc_text)
        if not m:
            _fail(task.line, task.column,
                  "documentation must read 'args=<a,b>;output=<name>'")
        args = tuple(m.group(1).split(",")) if m.group(1) else ()
        steps.append(StepSpec(name=task.name, args=args, output=m.group(2)))

    expected = [(ids[i], ids[i + 1]) for i in range(len(ids) - 1)]
    if sorted(builder.flows) != sorted(expected):
        _fail(1, 1, "sequence flows must chain the tasks in document order")
    return WorkflowIR(steps=tuple(steps))


def serialize_ir(w: WorkflowIR) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<process id="workflow">']
    for i, step in enumerate(w.steps, start=1):
        lines.append(f"  <task id=\"step_{i}\" name={quoteattr(step.name)}>")
        lines.append(f"    <documentation>args={','.join(step.args)};output={step.output}</documentation>")
        lines.append("  </task>")
    for i in range(1, len(w.steps)):
        lines.append(f"  <sequenceFlow sourceRef=\"step_{i}\" targetRef=\"step_{i + 1}\"/>")
    lines.append("</process>")
    return "\n".join(lines) + "\n"
