"""Self-evolving multi-agent workflows for code generation.

The package splits into: the workflow IR and its validity rules
(:mod:`sew.ir`), five textual representation schemes
(:mod:`sew.schemes`), completion backends with transcript recording
(:mod:`sew.backend`), the evolution operators (:mod:`sew.evolution`),
workflow execution and the candidate sandbox (:mod:`sew.execution`,
:mod:`sew.sandbox`), metrics and the grid search (:mod:`sew.evaluation`),
and the CLI (:mod:`sew.cli`).
"""

from .backend import (
    CompletionDefaults,
    CompletionRequest,
    CompletionResponse,
    LiveBackend,
    ReplayBackend,
    ScriptedBackend,
    TranscriptRecord,
    echo_backend,
    role_subtotals,
    transcript_totals,
)
from .corpus import PromptCorpus, load_corpus
from .evaluation import (
    EvalReport,
    RateReport,
    SearchConfig,
    SearchRecord,
    VariantOutcome,
    baseline_single_agent,
    compute_rates,
    evaluate,
    merge_reports,
    pass_at_k,
    search,
)
from .evolution import (
    CorpusSelection,
    EvolutionMethod,
    EvolvedArtifact,
    SewResult,
    WorkflowTemplate,
    agent_de_first,
    agent_de_second,
    agent_he_first,
    agent_he_zero,
    evolve_workflow,
    generate_agent_prompts,
    generate_default_workflow,
    run_sew,
)
from .execution import (
    ExecutionResult,
    LoopPolicy,
    StepTrace,
    assemble_prompt,
    execute_workflow,
    extract_code,
    sample_candidates,
)
from .ir import (
    AgentSpec,
    Rule,
    StepSpec,
    ValidityReport,
    Violation,
    WorkflowIR,
    make_workflow,
    topo_order,
    validate,
)
from .sandbox import CandidateResult, SandboxPolicy, Verdict, run_candidate
from .schemes import ParseFailure, Scheme, WorkflowDoc, parse, serialize, transcode
from .tasks import TaskInstance, TestCase, TestKind, load_dataset, load_desk_tasks

__version__ = "0.1.0"
