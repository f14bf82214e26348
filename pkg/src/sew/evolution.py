"""Workflow generation and the evolution operators.

All operators share one assembly convention: the evolutionary prompt is
joined to its payload with :data:`PROMPT_JOIN` (two newlines), so under
an echo backend every operator's output is the literal concatenation its
contract states. Call counts per agent are fixed: first-order direct
evolution makes 1 call, the other three methods make 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .backend import CompletionBackend, CompletionRequest
from .corpus import PromptCorpus
from .errors import EmptyCompletionError, InvalidWorkflowError, MissingAgentError
from .ir import AgentSpec, WorkflowIR, ValidityReport, validate
from .prompts import AGENT_GENERATION_PROMPT, WORKFLOW_GENERATION_PROMPT
from .schemes import ParseFailure, Scheme, WorkflowDoc, parse, serialize

# Separator realizing the prompt-joining operator; configurable per call.
PROMPT_JOIN = "\n\n"

# Lineage label for the workflow-level mutation (agent methods use the
# EvolutionMethod values).
WORKFLOW_MUT = "workflow_mut"


class EvolutionMethod(str, Enum):
    """The four agent-evolution strategies."""

    DE1 = "de1"  # first-order direct: one mutation-prompt application
    DE2 = "de2"  # second-order direct: the same mutation prompt, twice
    HE0 = "he0"  # zero-order hyper: synthesize a mutation prompt from a
    #              thinking style and the task description, then apply it
    HE1 = "he1"  # first-order hyper: mutate the mutation prompt, then apply

    @property
    def calls_per_agent(self) -> int:
        return 1 if self is EvolutionMethod.DE1 else 2


@dataclass(frozen=True)
class WorkflowTemplate:
    """A parsed-and-validated workflow document used to seed generation."""

    doc: WorkflowDoc

    @classmethod
    def from_doc(cls, doc: WorkflowDoc) -> "WorkflowTemplate":
        ir = parse(doc)
        report = validate(ir)
        if not report.valid:
            raise InvalidWorkflowError("template workflow is invalid", doc=doc, report=report)
        return cls(doc=doc)

    @classmethod
    def default(cls, scheme: Scheme) -> "WorkflowTemplate":
        from .prompts import TEMPLATE_WORKFLOW

        return cls(doc=serialize(TEMPLATE_WORKFLOW, scheme))


@dataclass(frozen=True)
class EvolvedArtifact:
    """Lineage record tying one evolution event to its transcript calls."""

    kind: str  # "WORKFLOW" or "AGENT"
    name: str  # agent name, or "" for the workflow itself
    before: str
    after: str
    method: str  # an EvolutionMethod value or WORKFLOW_MUT
    mutation_prompt_id: Optional[int]
    call_ids: tuple[int, ...]
    thinking_style_id: Optional[int] = None
    hyper_mutation_prompt_id: Optional[int] = None


@dataclass(frozen=True)
class CorpusSelection:
    """Which corpus entries a run uses. The mutation prompt drives the
    workflow evolution and the direct methods; the other two ids are only
    consulted by the hyper methods."""

    mutation_prompt_id: int
    thinking_style_id: int = 0
    hyper_mutation_prompt_id: int = 0

    def check(self, corpus: PromptCorpus, method: EvolutionMethod) -> None:
        if not 0 <= self.mutation_prompt_id < len(corpus.mutation_prompts):
            raise IndexError(f"mutation_prompt_id {self.mutation_prompt_id} out of range")
        if method is EvolutionMethod.HE0 and not (
            0 <= self.thinking_style_id < len(corpus.thinking_styles)
        ):
            raise IndexError(f"thinking_style_id {self.thinking_style_id} out of range")
        if method is EvolutionMethod.HE1 and not (
            0 <= self.hyper_mutation_prompt_id < len(corpus.hyper_mutation_prompts)
        ):
            raise IndexError(
                f"hyper_mutation_prompt_id {self.hyper_mutation_prompt_id} out of range"
            )


@dataclass(frozen=True)
class SewResult:
    workflow: WorkflowIR
    agents: tuple[AgentSpec, ...]
    lineage: tuple[EvolvedArtifact, ...]
    default_doc: WorkflowDoc
    evolved_doc: WorkflowDoc
    validity: ValidityReport


def _evolution_request(backend: CompletionBackend, prompt: str, seed: Optional[int] = None) -> CompletionRequest:
    d = backend.defaults
    return CompletionRequest(
        prompt=prompt,
        model=d.model,
        temperature=d.evolution_temperature,
        max_tokens=d.max_tokens,
        seed=seed,
    )


def _complete_nonempty(backend: CompletionBackend, prompt: str, role_tag: str) -> str:
    text = backend.complete(_evolution_request(backend, prompt), role_tag=role_tag).text
    if not text.strip():
        raise EmptyCompletionError(f"backend returned a whitespace-only completion for {role_tag}")
    return text


def generate_default_workflow(
    task_desc: str,
    template: WorkflowTemplate,
    scheme: Scheme,
    backend: CompletionBackend,
) -> WorkflowDoc:
    """Ask the backend for a default workflow in the given scheme.

    The raw completion is returned untouched; parsing and validation
    happen downstream so that validity rates reflect what the model
    actually produced. Exactly one backend call.
    """
    template_text = serialize(parse(template.doc), scheme).text
    prompt = WORKFLOW_GENERATION_PROMPT.format(
        workflow_template=template_text,
        dataset_description=task_desc,
    )
    response = backend.complete(
        _evolution_request(backend, prompt), role_tag="workflow_generation"
    )
    return WorkflowDoc(text=response.text, scheme=scheme)


def evolve_workflow(
    w_def: WorkflowDoc,
    t_mut: str,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
) -> WorkflowDoc:
    """Apply a mutation prompt to a workflow document. One backend call.

    The result may be invalid by design: the validity rates measure
    exactly how often this step goes wrong.
    """
    prompt = t_mut + sep + w_def.text
    response = backend.complete(
        _evolution_request(backend, prompt), role_tag="workflow_evolution"
    )
    return WorkflowDoc(text=response.text, scheme=w_def.scheme)


def agent_de_first(
    a: AgentSpec,
    t_mut: str,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
    role_tag: str = "de1:apply",
) -> AgentSpec:
    """First-order direct evolution: one mutation-prompt application."""
    prompt = t_mut + sep + a.prompt
    text = _complete_nonempty(backend, prompt, role_tag)
    return AgentSpec(name=a.name, prompt=text)


def agent_de_second(
    a: AgentSpec,
    t_mut: str,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
) -> AgentSpec:
    """Second-order direct evolution: the same mutation prompt applied to
    the result of the first application. Exactly two calls."""
    once = agent_de_first(a, t_mut, backend, sep=sep, role_tag="de2:apply")
    return agent_de_first(once, t_mut, backend, sep=sep, role_tag="de2:apply")


def agent_he_zero(
    a: AgentSpec,
    t_des: str,
    t_think: str,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
) -> AgentSpec:
    """Zero-order hyper evolution: synthesize a fresh mutation prompt from
    a thinking style and the task description, then apply it. Two calls."""
    generated = _complete_nonempty(backend, t_think + sep + t_des, "he0:gen")
    text = _complete_nonempty(backend, generated + sep + a.prompt, "he0:apply")
    return AgentSpec(name=a.name, prompt=text)


def agent_he_first(
    a: AgentSpec,
    t_mut: str,
    t_hmut: str,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
) -> AgentSpec:
    """First-order hyper evolution: mutate the mutation prompt with the
    hyper-mutation prompt, then apply the result. Two calls."""
    mutated = _complete_nonempty(backend, t_hmut + sep + t_mut, "he1:gen")
    text = _complete_nonempty(backend, mutated + sep + a.prompt, "he1:apply")
    return AgentSpec(name=a.name, prompt=text)


def generate_agent_prompts(
    w: WorkflowIR,
    backend: CompletionBackend,
    scheme: Optional[Scheme] = None,
) -> list[AgentSpec]:
    """Generate one default prompt per distinct agent, in step order.

    The workflow is shown to the prompt engineer in its own scheme (or
    pseudo-code when it has none). One backend call per agent.
    """
    report = validate(w)
    if not report.valid:
        raise InvalidWorkflowError("cannot generate prompts for an invalid workflow", report=report)
    doc_scheme = scheme or w.scheme_hint or Scheme.PSEUDO
    workflow_text = serialize(w, doc_scheme).text

    agents: list[AgentSpec] = []
    for name in w.agent_names:
        if not name:
            raise MissingAgentError("workflow references an unnamed agent")
        prompt = AGENT_GENERATION_PROMPT.format(workflow=workflow_text, agent_name=name)
        text = _complete_nonempty(backend, prompt, f"agent_prompt:{name}")
        agents.append(AgentSpec(name=name, prompt=text))
    return agents


def _apply_method(
    agent: AgentSpec,
    method: EvolutionMethod,
    corpus: PromptCorpus,
    selection: CorpusSelection,
    task_desc: str,
    backend: CompletionBackend,
    sep: str,
) -> AgentSpec:
    t_mut = corpus.mutation_prompts[selection.mutation_prompt_id]
    if method is EvolutionMethod.DE1:
        return agent_de_first(agent, t_mut, backend, sep=sep)
    if method is EvolutionMethod.DE2:
        return agent_de_second(agent, t_mut, backend, sep=sep)
    if method is EvolutionMethod.HE0:
        t_think = corpus.thinking_styles[selection.thinking_style_id]
        return agent_he_zero(agent, task_desc, t_think, backend, sep=sep)
    t_hmut = corpus.hyper_mutation_prompts[selection.hyper_mutation_prompt_id]
    return agent_he_first(agent, t_mut, t_hmut, backend, sep=sep)


def run_sew(
    task_desc: str,
    template: WorkflowTemplate,
    scheme: Scheme,
    method: EvolutionMethod,
    corpus: PromptCorpus,
    selection: CorpusSelection,
    backend: CompletionBackend,
    sep: str = PROMPT_JOIN,
) -> SewResult:
    """Full single pass: generate, evolve, validate, equip agents.

    Backend calls total 2 + |agents| + |agents| * calls(method). If the
    evolved workflow fails to parse or validate, the pass aborts with
    :class:`InvalidWorkflowError` so validity statistics stay honest;
    sweeping many mutation prompts is the search driver's job.
    """
    selection.check(corpus, method)
    t_mut = corpus.mutation_prompts[selection.mutation_prompt_id]

    def call_ids_since(start: int) -> tuple[int, ...]:
        return tuple(r.call_id for r in backend.transcript.records[start:])

    w_def = generate_default_workflow(task_desc, template, scheme, backend)

    mark = len(backend.transcript.records)
    w_raw = evolve_workflow(w_def, t_mut, backend, sep=sep)
    workflow_lineage = EvolvedArtifact(
        kind="WORKFLOW",
        name="",
        before=w_def.text,
        after=w_raw.text,
        method=WORKFLOW_MUT,
        mutation_prompt_id=selection.mutation_prompt_id,
        call_ids=call_ids_since(mark),
    )

    try:
        ir = parse(w_raw)
    except ParseFailure as exc:
        raise InvalidWorkflowError(
            f"evolved workflow does not parse: {exc}", doc=w_raw, parse_failure=exc
        ) from exc
    report = validate(ir)
    if not report.valid:
        raise InvalidWorkflowError(
            "evolved workflow fails validation: "
            + "; ".join(f"{v.rule.value}@{v.step_index}" for v in report.violations),
            doc=w_raw,
            report=report,
        )

    defaults = generate_agent_prompts(ir, backend, scheme=scheme)

    evolved: list[AgentSpec] = []
    lineage: list[EvolvedArtifact] = [workflow_lineage]
    for agent in defaults:
        mark = len(backend.transcript.records)
        after = _apply_method(agent, method, corpus, selection, task_desc, backend, sep)
        evolved.append(after)
        lineage.append(
            EvolvedArtifact(
                kind="AGENT",
                name=agent.name,
                before=agent.prompt,
                after=after.prompt,
                method=method.value,
                mutation_prompt_id=(
                    selection.mutation_prompt_id if method is not EvolutionMethod.HE0 else None
                ),
                call_ids=call_ids_since(mark),
                thinking_style_id=(
                    selection.thinking_style_id if method is EvolutionMethod.HE0 else None
                ),
                hyper_mutation_prompt_id=(
                    selection.hyper_mutation_prompt_id if method is EvolutionMethod.HE1 else None
                ),
            )
        )

    return SewResult(
        workflow=ir,
        agents=tuple(evolved),
        lineage=tuple(lineage),
        default_doc=w_def,
        evolved_doc=w_raw,
        validity=report,
    )
