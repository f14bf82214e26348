"""Canonical in-memory workflow representation and its validity rules.

A workflow is a linear pipeline of agent steps. Each step names an agent,
lists the value references it consumes (the external ``task_description``
or the output of an earlier step), and binds its completion to an output
name. All five textual schemes parse into this one type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .errors import WorkflowOrderError

if TYPE_CHECKING:
    from .schemes import Scheme

# The single external input binding available to any step.
TASK_DESCRIPTION = "task_description"

# Identifier shape shared by agent names, output names, and argument tokens.
TOKEN_RE = re.compile(r"[a-z][a-z0-9_]*")

# Substring markers that make an agent count as code-producing. Agent naming
# is free-form LLM output, so matching is by stem rather than exact name.
DEFAULT_CODE_PRODUCER_MARKERS = frozenset(
    {"code_generation", "code_refinement", "code_rewriting"}
)


def is_token(value: str) -> bool:
    return TOKEN_RE.fullmatch(value) is not None


def is_code_producer(name: str, markers: Iterable[str] = DEFAULT_CODE_PRODUCER_MARKERS) -> bool:
    return any(marker in name for marker in markers)


@dataclass(frozen=True)
class StepSpec:
    """One pipeline step: agent name, consumed references, output binding."""

    name: str
    args: tuple[str, ...]
    output: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class WorkflowIR:
    """Ordered step pipeline. ``scheme_hint`` records the source scheme and
    is excluded from equality so round-trips compare on structure only."""

    steps: tuple[StepSpec, ...]
    scheme_hint: Optional["Scheme"] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def agent_names(self) -> tuple[str, ...]:
        """Distinct agent names in first-appearance order."""
        seen: dict[str, None] = {}
        for step in self.steps:
            seen.setdefault(step.name, None)
        return tuple(seen)


@dataclass(frozen=True)
class AgentSpec:
    """A named agent and the full prompt text it runs with."""

    name: str
    prompt: str


class Rule(str, Enum):
    EMPTY = "EMPTY"
    DUPLICATE_OUTPUT = "DUPLICATE_OUTPUT"
    UNBOUND_ARG = "UNBOUND_ARG"
    NONTERMINAL_CODER = "NONTERMINAL_CODER"
    BAD_TOKEN = "BAD_TOKEN"


@dataclass(frozen=True)
class Violation:
    rule: Rule
    step_index: int  # -1 for workflow-level violations
    detail: str


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[Violation, ...]

    def rules(self) -> tuple[Rule, ...]:
        return tuple(v.rule for v in self.violations)


def validate(
    w: WorkflowIR,
    code_producer_markers: Iterable[str] = DEFAULT_CODE_PRODUCER_MARKERS,
) -> ValidityReport:
    """Check every structural rule and report all violations.

    Rules:
      EMPTY             - the workflow has no steps.
      BAD_TOKEN         - a step name or output is not a lowercase token,
                          or an output shadows the reserved name
                          ``task_description``.
      DUPLICATE_OUTPUT  - an output name repeats an earlier step's output.
      UNBOUND_ARG       - an argument is neither ``task_description`` nor
                          the output of a strictly earlier step.
      NONTERMINAL_CODER - the final step's agent is not code-producing.

    Pure and deterministic; violations are data, never exceptions.
    """
    markers = tuple(code_producer_markers)
    violations: list[Violation] = []

    if not w.steps:
        violations.append(Violation(Rule.EMPTY, -1, "workflow has no steps"))
        return ValidityReport(valid=False, violations=tuple(violations))

    bound: set[str] = set()
    for i, step in enumerate(w.steps):
        if not is_token(step.name):
            violations.append(
                Violation(Rule.BAD_TOKEN, i, f"agent name {step.name!r} is not a valid token")
            )
        if not is_token(step.output):
            violations.append(
                Violation(Rule.BAD_TOKEN, i, f"output {step.output!r} is not a valid token")
            )
        elif step.output == TASK_DESCRIPTION:
            violations.append(
                Violation(Rule.BAD_TOKEN, i, f"output shadows the reserved name {TASK_DESCRIPTION!r}")
            )
        if step.output in bound:
            violations.append(
                Violation(Rule.DUPLICATE_OUTPUT, i, f"output {step.output!r} already bound")
            )
        for arg in step.args:
            if arg != TASK_DESCRIPTION and arg not in bound:
                violations.append(
                    Violation(Rule.UNBOUND_ARG, i, f"argument {arg!r} has no earlier binding")
                )
        bound.add(step.output)

    last = w.steps[-1]
    if not is_code_producer(last.name, markers):
        violations.append(
            Violation(
                Rule.NONTERMINAL_CODER,
                len(w.steps) - 1,
                f"terminal agent {last.name!r} is not code-producing",
            )
        )

    return ValidityReport(valid=not violations, violations=tuple(violations))


def topo_order(w: WorkflowIR) -> list[int]:
    """Return the execution order of step indices.

    The IR is already a linear pipeline, so the listed order is returned
    after asserting it is executable (non-empty, unique outputs,
    def-before-use). Raises :class:`WorkflowOrderError` otherwise.
    """
    if not w.steps:
        raise WorkflowOrderError("cannot order an empty workflow")
    bound: set[str] = set()
    for i, step in enumerate(w.steps):
        if step.output in bound:
            raise WorkflowOrderError(
                f"step {i}: output {step.output!r} duplicates an earlier binding"
            )
        for arg in step.args:
            if arg != TASK_DESCRIPTION and arg not in bound:
                raise WorkflowOrderError(
                    f"step {i}: argument {arg!r} is unbound at this point"
                )
        bound.add(step.output)
    return list(range(len(w.steps)))


def make_workflow(
    steps: Sequence[tuple[str, Sequence[str], str]],
    scheme_hint: Optional["Scheme"] = None,
) -> WorkflowIR:
    """Build a WorkflowIR from (name, args, output) triples."""
    return WorkflowIR(
        steps=tuple(StepSpec(name, tuple(args), output) for name, args, output in steps),
        scheme_hint=scheme_hint,
    )
