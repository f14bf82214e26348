"""Metrics and the exhaustive search driver.

Covers the unbiased pass@k estimator, the two validity rates (fraction
of evolved workflow documents that parse and validate, and the fraction
whose end-to-end run yields extractable syntax-valid code), task-set
evaluation, the single-agent baseline, and the scheme x mutation-prompt
x method grid search with validation-set selection.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Optional, Sequence, Union

from .backend import CompletionBackend, TokenTotals, transcript_totals
from .errors import BackendError, EmptyInputError, InvalidWorkflowError
from .evolution import (
    CorpusSelection,
    EvolutionMethod,
    SewResult,
    WorkflowTemplate,
    run_sew,
)
from .execution import LoopPolicy, sample_candidates
from .ir import AgentSpec, ValidityReport, WorkflowIR, make_workflow
from .prompts import BASELINE_AGENT_PROMPT
from .corpus import PromptCorpus
from .sandbox import CandidateResult, SandboxPolicy
from .schemes import ParseFailure, Scheme, WorkflowDoc
from .tasks import TaskInstance


def pass_at_k(n: int, c: int, k: int) -> float:
    """Unbiased estimator: 1 - C(n-c, k) / C(n, k).

    Probability that at least one of k candidates drawn without
    replacement from n samples (c of them correct) is correct. Exact
    integer combinatorics, one final rounding; returns 1.0 exactly when
    c > n - k.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= c <= n:
        raise ValueError(f"c must lie in [0, {n}], got {c}")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if c > n - k:
        return 1.0
    return float(1 - Fraction(comb(n - c, k), comb(n, k)))


@dataclass(frozen=True)
class VariantOutcome:
    """One evolved-workflow variant as seen by the rate computation."""

    doc: WorkflowDoc
    validity: Union[ValidityReport, ParseFailure]
    executed_ok: bool

    @property
    def is_valid(self) -> bool:
        return isinstance(self.validity, ValidityReport) and self.validity.valid


@dataclass(frozen=True)
class RateReport:
    scheme: Scheme
    total_variants: int
    valid_count: int
    executable_count: int

    @property
    def lsr(self) -> float:
        return self.valid_count / self.total_variants

    @property
    def gsr(self) -> float:
        return self.executable_count / self.total_variants


def compute_rates(variants: Sequence[VariantOutcome]) -> RateReport:
    """Validity rates over a batch of variants of one scheme.

    A variant counts as valid when it parses and passes validation, and
    as executable only when it is also flagged ``executed_ok``, so the
    executable rate can never exceed the valid rate.
    """
    if not variants:
        raise EmptyInputError("compute_rates needs at least one variant")
    schemes = {v.doc.scheme for v in variants}
    if len(schemes) != 1:
        raise ValueError(f"variants mix schemes: {sorted(s.value for s in schemes)}")
    valid = sum(1 for v in variants if v.is_valid)
    executable = sum(1 for v in variants if v.is_valid and v.executed_ok)
    return RateReport(
        scheme=next(iter(schemes)),
        total_variants=len(variants),
        valid_count=valid,
        executable_count=executable,
    )


@dataclass(frozen=True)
class EvalReport:
    task_set_id: str
    per_task: dict[str, dict[str, int]]  # task id -> {"n": ..., "c": ...}
    pass_at: dict[int, float]
    token_totals: TokenTotals
    config_fingerprint: str = ""
    warnings: int = 0


def _task_set_id(tasks: Sequence[TaskInstance]) -> str:
    digest = hashlib.sha256("\n".join(t.id for t in tasks).encode("utf-8")).hexdigest()
    return f"tasks:{digest[:16]}"


def _evaluate_collecting(
    w: WorkflowIR,
    agents: Mapping[str, AgentSpec] | Sequence[AgentSpec],
    tasks: Sequence[TaskInstance],
    backend: CompletionBackend,
    n: int,
    ks: Sequence[int],
    policy: SandboxPolicy,
    loop_policy: LoopPolicy,
    task_set_id: Optional[str],
    config_fingerprint: str,
) -> tuple[EvalReport, dict[str, list[CandidateResult]]]:
    if not tasks:
        raise EmptyInputError("evaluate needs at least one task")
    if n < max(ks):
        raise ValueError(f"n={n} must be >= max(ks)={max(ks)}")
    agent_map = agents if isinstance(agents, Mapping) else {a.name: a for a in agents}

    start = len(backend.transcript.records)
    per_task: dict[str, dict[str, int]] = {}
    results: dict[str, list[CandidateResult]] = {}
    warnings = 0
    for task in tasks:
        try:
            candidates = sample_candidates(
                w, agent_map, task, backend, n, policy=policy, loop_policy=loop_policy
            )
        except BackendError:
            warnings += 1
            per_task[task.id] = {"n": 0, "c": 0}
            continue
        results[task.id] = candidates
        per_task[task.id] = {"n": n, "c": sum(1 for r in candidates if r.passed_all)}

    scored = [counts for counts in per_task.values() if counts["n"] > 0]
    pass_at = {
        k: (sum(pass_at_k(c["n"], c["c"], k) for c in scored) / len(scored) if scored else 0.0)
        for k in ks
    }
    report = EvalReport(
        task_set_id=task_set_id or _task_set_id(tasks),
        per_task=per_task,
        pass_at=pass_at,
        token_totals=transcript_totals(backend.transcript.records[start:]),
        config_fingerprint=config_fingerprint,
        warnings=warnings,
    )
    return report, results


def evaluate(
    w: WorkflowIR,
    agents: Mapping[str, AgentSpec] | Sequence[AgentSpec],
    tasks: Sequence[TaskInstance],
    backend: CompletionBackend,
    n: int = 10,
    ks: Sequence[int] = (1, 5, 10),
    policy: SandboxPolicy = SandboxPolicy(),
    loop_policy: LoopPolicy = LoopPolicy(),
    task_set_id: Optional[str] = None,
    config_fingerprint: str = "",
) -> EvalReport:
    """Sample n candidates per task and aggregate pass@k over tasks.

    Backend failures on a task downgrade it to a warning (excluded from
    the means); sandbox-environment failures abort.
    """
    report, _ = _evaluate_collecting(
        w, agents, tasks, backend, n, ks, policy, loop_policy, task_set_id, config_fingerprint
    )
    return report


def baseline_single_agent(
    tasks: Sequence[TaskInstance],
    backend: CompletionBackend,
    n: int = 10,
    ks: Sequence[int] = (1, 5, 10),
    policy: SandboxPolicy = SandboxPolicy(),
    task_set_id: Optional[str] = None,
    config_fingerprint: str = "",
    prompt: str = BASELINE_AGENT_PROMPT,
) -> EvalReport:
    """Evaluate the degenerate one-step workflow: a single code generator
    fed the raw task description, under the same protocol."""
    w = baseline_workflow()
    agent = AgentSpec(name="code_generation_agent", prompt=prompt)
    return evaluate(
        w,
        {agent.name: agent},
        tasks,
        backend,
        n=n,
        ks=ks,
        policy=policy,
        task_set_id=task_set_id,
        config_fingerprint=config_fingerprint,
    )


def baseline_workflow() -> WorkflowIR:
    return make_workflow([("code_generation_agent", ["task_description"], "generated_code")])


def merge_reports(**reports: EvalReport) -> dict[str, EvalReport]:
    """Bundle named reports for side-by-side comparison, refusing to mix
    different task sets."""
    ids = {r.task_set_id for r in reports.values()}
    if len(ids) > 1:
        raise ValueError(f"reports cover different task sets: {sorted(ids)}")
    return dict(reports)


@dataclass(frozen=True)
class SearchConfig:
    schemes: tuple[Scheme, ...]
    mutation_prompt_ids: tuple[int, ...]
    methods: tuple[EvolutionMethod, ...]
    corpus: PromptCorpus
    task_desc: str
    template: Optional[WorkflowTemplate] = None  # None: bundled default per scheme
    thinking_style_id: int = 0
    hyper_mutation_prompt_id: int = 0
    n: int = 10
    ks: tuple[int, ...] = (1, 5, 10)
    policy: SandboxPolicy = field(default_factory=SandboxPolicy)
    loop_policy: LoopPolicy = field(default_factory=LoopPolicy)

    def __post_init__(self) -> None:
        if not (self.schemes and self.mutation_prompt_ids and self.methods):
            raise ValueError("search grid must have at least one point per dimension")


@dataclass(frozen=True)
class SearchRecord:
    scheme: Scheme
    mutation_prompt_id: int
    method: EvolutionMethod
    valid: bool
    validity: Union[ValidityReport, ParseFailure, None]  # None: backend failure
    validation_score: Optional[float]  # pass@1; present iff valid and completed
    pass_at: dict[int, float]
    tokens: int
    executed_ok: bool
    error: Optional[str] = None
    artifact_path: Optional[str] = None
    evolved_text: Optional[str] = None
    agents: tuple[AgentSpec, ...] = ()


@dataclass(frozen=True)
class SearchResult:
    records: tuple[SearchRecord, ...]
    best: Optional[SearchRecord]
    rate_reports: dict[Scheme, RateReport]


def search(
    config: SearchConfig,
    validation_tasks: Sequence[TaskInstance],
    backend: CompletionBackend,
) -> SearchResult:
    """Exhaustive sweep over schemes x mutation prompts x methods.

    Every grid point runs one full evolution pass; valid results are
    scored on the validation split by pass@1. Individual failures are
    recorded, never fatal. The best record is the validation-score
    argmax, ties broken by fewer tokens, then by grid coordinates.
    """
    if not validation_tasks:
        raise EmptyInputError("search needs a non-empty validation set")

    records: list[SearchRecord] = []
    for scheme in config.schemes:
        template = config.template or WorkflowTemplate.default(scheme)
        for mutation_prompt_id in config.mutation_prompt_ids:
            for method in config.methods:
                records.append(
                    _run_grid_point(
                        config, scheme, template, mutation_prompt_id, method,
                        validation_tasks, backend,
                    )
                )

    # Backend-failed points never produced a variant and are excluded
    # from the rate denominators (they still appear in the records).
    rate_reports: dict[Scheme, RateReport] = {}
    for scheme in config.schemes:
        outcomes = [
            VariantOutcome(
                doc=WorkflowDoc(text=r.evolved_text or "", scheme=scheme),
                validity=r.validity,
                executed_ok=r.executed_ok,
            )
            for r in records
            if r.scheme is scheme and r.validity is not None
        ]
        if outcomes:
            rate_reports[scheme] = compute_rates(outcomes)

    scored = [r for r in records if r.validation_score is not None]
    best = min(
        scored,
        key=lambda r: (-r.validation_score, r.tokens, r.scheme.value, r.mutation_prompt_id, r.method.value),
        default=None,
    )
    return SearchResult(records=tuple(records), best=best, rate_reports=rate_reports)


def _run_grid_point(
    config: SearchConfig,
    scheme: Scheme,
    template: WorkflowTemplate,
    mutation_prompt_id: int,
    method: EvolutionMethod,
    validation_tasks: Sequence[TaskInstance],
    backend: CompletionBackend,
) -> SearchRecord:
    selection = CorpusSelection(
        mutation_prompt_id=mutation_prompt_id,
        thinking_style_id=config.thinking_style_id,
        hyper_mutation_prompt_id=config.hyper_mutation_prompt_id,
    )
    start = len(backend.transcript.records)

    def tokens_so_far() -> int:
        return transcript_totals(backend.transcript.records[start:]).total

    try:
        result: SewResult = run_sew(
            config.task_desc, template, scheme, method, config.corpus, selection, backend
        )
    except InvalidWorkflowError as exc:
        return SearchRecord(
            scheme=scheme,
            mutation_prompt_id=mutation_prompt_id,
            method=method,
            valid=False,
            validity=exc.parse_failure if exc.parse_failure is not None else exc.report,
            validation_score=None,
            pass_at={},
            tokens=tokens_so_far(),
            executed_ok=False,
            error=str(exc),
            evolved_text=exc.doc.text if exc.doc is not None else None,
        )
    except BackendError as exc:
        return SearchRecord(
            scheme=scheme,
            mutation_prompt_id=mutation_prompt_id,
            method=method,
            valid=False,
            validity=None,
            validation_score=None,
            pass_at={},
            tokens=tokens_so_far(),
            executed_ok=False,
            error=str(exc),
        )

    try:
        report, candidate_map = _evaluate_collecting(
            result.workflow,
            {a.name: a for a in result.agents},
            validation_tasks,
            backend,
            config.n,
            config.ks,
            config.policy,
            config.loop_policy,
            None,
            "",
        )
    except BackendError as exc:
        return SearchRecord(
            scheme=scheme,
            mutation_prompt_id=mutation_prompt_id,
            method=method,
            valid=True,
            validity=result.validity,
            validation_score=None,
            pass_at={},
            tokens=tokens_so_far(),
            executed_ok=False,
            error=str(exc),
            evolved_text=result.evolved_doc.text,
            agents=result.agents,
        )

    executed_ok = any(
        candidate.has_syntax_valid_code
        for candidates in candidate_map.values()
        for candidate in candidates
    )
    return SearchRecord(
        scheme=scheme,
        mutation_prompt_id=mutation_prompt_id,
        method=method,
        valid=True,
        validity=result.validity,
        validation_score=report.pass_at.get(1),
        pass_at=dict(report.pass_at),
        tokens=tokens_so_far(),
        executed_ok=executed_ok,
        evolved_text=result.evolved_doc.text,
        agents=result.agents,
    )


def rates_to_csv(rate_reports: Mapping[Scheme, RateReport]) -> str:
    """Scheme-by-scheme rate table: scheme,total,valid,executable,lsr,gsr."""
    lines = ["scheme,total,valid,executable,lsr,gsr"]
    for scheme in sorted(rate_reports, key=lambda s: s.value):
        r = rate_reports[scheme]
        lines.append(
            f"{scheme.value},{r.total_variants},{r.valid_count},{r.executable_count},"
            f"{r.lsr:.4f},{r.gsr:.4f}"
        )
    return "\n".join(lines) + "\n"


def method_distribution_csv(records: Sequence[SearchRecord], ks: Sequence[int] = (1, 5, 10)) -> str:
    """Per-variant scores keyed by workflow variant and method, one row
    per scored grid point (box-plot friendly)."""
    header = "workflow,method," + ",".join(f"pass@{k}" for k in ks)
    lines = [header]
    for r in records:
        if r.validation_score is None:
            continue
        scores = ",".join(f"{r.pass_at.get(k, float('nan')):.4f}" for k in ks)
        lines.append(f"{r.scheme.value}:mut{r.mutation_prompt_id},{r.method.value},{scores}")
    return "\n".join(lines) + "\n"
