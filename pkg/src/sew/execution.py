"""Workflow execution against coding tasks.

Runs a validated workflow step by step: each step's prompt is the
agent's prompt followed by one labeled section per argument, each step
makes one backend call, and the terminal completion is the workflow's
final output. A reviewer/rewriter pair re-runs while the reviewer keeps
answering "0", bounded by the loop policy.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional

from .backend import CompletionBackend, CompletionRequest
from .errors import MissingAgentError, NoCodeFoundError, UnboundArgumentError
from .evolution import PROMPT_JOIN
from .ir import TASK_DESCRIPTION, AgentSpec, StepSpec, WorkflowIR, topo_order
from .sandbox import CandidateResult, SandboxPolicy, run_candidate
from .tasks import TaskInstance

# Name stems of the execution-time review loop: a step matching the first
# stem immediately followed by a step matching one of the second stems.
_REVIEWER_PREFIX = "code_review"
_REWRITER_PREFIXES = ("code_rewrit", "code_refine")


@dataclass(frozen=True)
class LoopPolicy:
    """Bound for the reviewer/rewriter cycle: total entries into the pair
    (the linear pass counts as the first) never exceed max_iterations."""

    max_iterations: int = 3


@dataclass(frozen=True)
class StepTrace:
    step_index: int
    agent_name: str
    assembled_prompt: str
    completion_text: str
    bindings_after: dict[str, str]


@dataclass(frozen=True)
class ExecutionResult:
    final_output: str
    traces: tuple[StepTrace, ...]


def assemble_prompt(
    agent: AgentSpec,
    step: StepSpec,
    bindings: Mapping[str, str],
    sep: str = PROMPT_JOIN,
) -> str:
    """Agent prompt plus one ``== <arg> ==`` section per argument, in arg
    order. Pure and deterministic."""
    parts = [agent.prompt]
    for arg in step.args:
        if arg not in bindings:
            raise UnboundArgumentError(f"argument {arg!r} has no binding")
        parts.append(f"== {arg} ==\n{bindings[arg]}")
    return sep.join(parts)


def _find_review_pair(w: WorkflowIR) -> Optional[tuple[int, int]]:
    for i in range(len(w.steps) - 1):
        if w.steps[i].name.startswith(_REVIEWER_PREFIX) and w.steps[i + 1].name.startswith(
            _REWRITER_PREFIXES
        ):
            return i, i + 1
    return None


def execute_workflow(
    w: WorkflowIR,
    agents: Mapping[str, AgentSpec],
    task: TaskInstance,
    backend: CompletionBackend,
    loop_policy: LoopPolicy = LoopPolicy(),
    sep: str = PROMPT_JOIN,
    seed: Optional[int] = None,
) -> ExecutionResult:
    """Run the workflow once and return the terminal completion.

    ``task_description`` is bound to the task statement; every step call
    is tagged ``agent:<name>``. When a reviewer/rewriter pair exists, the
    pair is re-entered while the reviewer's stripped completion equals
    "0" (re-entries assemble prompts from the current bindings and
    overwrite the pair's output bindings), then execution proceeds with
    the last rewrite.
    """
    order = topo_order(w)
    for step in w.steps:
        if step.name not in agents:
            raise MissingAgentError(f"no agent prompt for step {step.name!r}")

    bindings: dict[str, str] = {TASK_DESCRIPTION: task.description}
    traces: list[StepTrace] = []

    def run_step(index: int) -> str:
        step = w.steps[index]
        prompt = assemble_prompt(agents[step.name], step, bindings, sep=sep)
        request = CompletionRequest(
            prompt=prompt,
            model=backend.defaults.model,
            temperature=backend.defaults.sampling_temperature,
            max_tokens=backend.defaults.max_tokens,
            seed=seed,
        )
        text = backend.complete(request, role_tag=f"agent:{step.name}").text
        bindings[step.output] = text
        traces.append(
            StepTrace(
                step_index=index,
                agent_name=step.name,
                assembled_prompt=prompt,
                completion_text=text,
                bindings_after=dict(bindings),
            )
        )
        return text

    pair = _find_review_pair(w)
    for index in order:
        run_step(index)
        if pair and index == pair[1]:
            reviewer_idx, rewriter_idx = pair
            entries = 1
            review = next(
                t.completion_text for t in reversed(traces) if t.step_index == reviewer_idx
            )
            while entries < loop_policy.max_iterations and review.strip() == "0":
                entries += 1
                review = run_step(reviewer_idx)
                if review.strip() != "0":
                    break
                run_step(rewriter_idx)

    final_output = bindings[w.steps[-1].output]
    return ExecutionResult(final_output=final_output, traces=tuple(traces))


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)

# A bare completion counts as a program when, after skipping blank and
# full-line-comment lines, the first line starts like code: an import,
# definition, decorator, common statement keyword, print call, shebang,
# or a simple assignment target.
_CODE_START_RE = re.compile(
    r"^\s*(?:import\s|from\s+\w|def\s|class\s|async\s+def\s|@\w|print\s*\(|"
    r"if\s|for\s|while\s|try\s*:|with\s|#!|"
    r"[A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*\s*=[^=])"
)


def extract_code(completion: str) -> str:
    """Pull the candidate program out of a completion.

    The contents of the last fenced code block win; otherwise the whole
    text is returned when it scans as a bare program (see
    ``_CODE_START_RE``). Raises :class:`NoCodeFoundError` otherwise.
    """
    blocks = _FENCE_RE.findall(completion)
    if blocks:
        return blocks[-1].rstrip("\n")
    for line in completion.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#") and not stripped.startswith("#!"):
            continue
        if _CODE_START_RE.match(line):
            return completion
        break
    raise NoCodeFoundError("completion contains neither a fenced block nor a bare program")


def sample_candidates(
    w: WorkflowIR,
    agents: Mapping[str, AgentSpec],
    task: TaskInstance,
    backend: CompletionBackend,
    n: int,
    policy: SandboxPolicy = SandboxPolicy(),
    loop_policy: LoopPolicy = LoopPolicy(),
    sep: str = PROMPT_JOIN,
) -> list[CandidateResult]:
    """Execute the workflow n times and judge each final output.

    Each execution carries a distinct seed (fresh sampling live, distinct
    replay keys when replaying). A completion with no extractable code
    becomes a failed candidate rather than being resampled. Workflow
    executions are sequential; sandbox runs use up to
    ``policy.parallelism`` workers.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    outputs = [
        execute_workflow(w, agents, task, backend, loop_policy, sep=sep, seed=i).final_output
        for i in range(n)
    ]

    def judge(output: str) -> CandidateResult:
        try:
            code = extract_code(output)
        except NoCodeFoundError:
            return CandidateResult.no_code(task)
        return run_candidate(code, task, policy)

    if policy.parallelism > 1:
        with ThreadPoolExecutor(max_workers=policy.parallelism) as pool:
            return list(pool.map(judge, outputs))
    return [judge(output) for output in outputs]
