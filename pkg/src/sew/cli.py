"""Command-line interface: generate, evolve, eval, search.

Every command reads one JSON config (see README.md), writes its
artifacts plus the resolved config and the full call transcript into the
output directory, and uses stable exit codes: 0 ok, 2 config error,
3 backend error, 4 invalid workflow, 5 sandbox setup failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .backend import CompletionBackend, role_subtotals, transcript_totals
from .config import RunConfig, load_run_config
from .corpus import PromptCorpus
from .errors import (
    BackendError,
    ConfigError,
    InvalidWorkflowError,
    SandboxSetupError,
)
from .evaluation import (
    EvalReport,
    SearchConfig,
    SearchRecord,
    baseline_single_agent,
    evaluate,
    method_distribution_csv,
    rates_to_csv,
    search,
)
from .evolution import (
    CorpusSelection,
    WorkflowTemplate,
    generate_default_workflow,
    run_sew,
)
from .ir import AgentSpec, ValidityReport, validate
from .schemes import ParseFailure, Scheme, WorkflowDoc, parse
from .tasks import TaskInstance, load_dataset, select_tasks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_INVALID_WORKFLOW = 4
EXIT_SANDBOX = 5


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="sew", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate", "generate a default workflow per configured scheme"),
        ("evolve", "run one full evolution pass (workflow + agents)"),
        ("eval", "evaluate a workflow on the configured task set"),
        ("search", "exhaustive sweep over schemes x mutation prompts x methods"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", help="override the output directory")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        if name == "eval":
            cmd.add_argument(
                "--baseline",
                action="store_true",
                help="evaluate the single-agent baseline instead of a stored workflow",
            )
    args = parser.parse_args(argv)

    try:
        cfg = load_run_config(args.config, out_dir=args.out, seed=args.seed)
        handler = {
            "generate": cmd_generate,
            "evolve": cmd_evolve,
            "eval": lambda c: cmd_eval(c, baseline=args.baseline),
            "search": cmd_search,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidWorkflowError as exc:
        print(f"invalid workflow: {exc}", file=sys.stderr)
        _print_validity(exc)
        return EXIT_INVALID_WORKFLOW
    except SandboxSetupError as exc:
        print(f"sandbox setup failure: {exc}", file=sys.stderr)
        return EXIT_SANDBOX
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


def _print_validity(exc: InvalidWorkflowError) -> None:
    if exc.report is not None:
        for violation in exc.report.violations:
            print(
                f"  {violation.rule.value} at step {violation.step_index}: {violation.detail}",
                file=sys.stderr,
            )
    if exc.parse_failure is not None:
        pf = exc.parse_failure
        print(f"  parse failure at {pf.line}:{pf.column}: {pf.reason}", file=sys.stderr)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, payload: Any) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _finalize(cfg: RunConfig, backend: CompletionBackend) -> None:
    """Artifacts every command leaves behind: resolved config + transcript."""
    out = cfg.out_dir
    _write_json(out / "config.resolved.json", {"fingerprint": cfg.fingerprint, "config": cfg.resolved})
    out.mkdir(parents=True, exist_ok=True)
    backend.transcript.save(out / "transcript.jsonl")


def _template_for(cfg: RunConfig, scheme: Scheme) -> WorkflowTemplate:
    ref = cfg.template_ref
    if ref.get("path"):
        path = Path(ref["path"])
        if not path.exists():
            raise ConfigError(f"template file not found: {path}")
        template_scheme = Scheme(ref["scheme"]) if ref.get("scheme") else scheme
        return WorkflowTemplate.from_doc(
            WorkflowDoc(text=path.read_text(encoding="utf-8"), scheme=template_scheme)
        )
    return WorkflowTemplate.default(scheme)


def _load_tasks(cfg: RunConfig, split: str) -> list[TaskInstance]:
    dataset = cfg.dataset
    if not dataset.get("path"):
        raise ConfigError("dataset.path is required for this command")
    tasks = load_dataset(dataset["path"], dataset.get("format", "native"))
    ids = dataset.get(f"{split}_ids")
    return select_tasks(tasks, ids)


def _selection(cfg: RunConfig) -> CorpusSelection:
    corpus_cfg = cfg.corpus_settings
    return CorpusSelection(
        mutation_prompt_id=int(corpus_cfg["mutation_prompt_ids"][0]),
        thinking_style_id=int(corpus_cfg["thinking_style_id"]),
        hyper_mutation_prompt_id=int(corpus_cfg["hyper_mutation_prompt_id"]),
    )


def cmd_generate(cfg: RunConfig) -> int:
    corpus = cfg.load_corpus()
    task_desc = cfg.task_description(corpus)
    backend = cfg.build_backend()
    try:
        for scheme in cfg.schemes:
            template = _template_for(cfg, scheme)
            doc = generate_default_workflow(task_desc, template, scheme, backend)
            _write_text(cfg.out_dir / "workflows" / f"default.{scheme.value}", doc.text)
    finally:
        _finalize(cfg, backend)
    print(f"generated {len(cfg.schemes)} workflow document(s) under {cfg.out_dir}")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    if len(cfg.schemes) != 1 or len(cfg.methods) != 1:
        raise ConfigError("evolve runs one scheme and one method; configure exactly one of each")
    scheme, method = cfg.schemes[0], cfg.methods[0]
    corpus = cfg.load_corpus()
    task_desc = cfg.task_description(corpus)
    backend = cfg.build_backend()
    template = _template_for(cfg, scheme)
    try:
        result = run_sew(task_desc, template, scheme, method, corpus, _selection(cfg), backend)
    finally:
        _finalize(cfg, backend)

    out = cfg.out_dir
    _write_text(out / "workflows" / f"evolved.{scheme.value}", result.evolved_doc.text)
    for agent in result.agents:
        _write_text(out / "agents" / f"{agent.name}.prompt.txt", agent.prompt)
    lineage_lines = [
        json.dumps(
            {
                "kind": a.kind,
                "name": a.name,
                "method": a.method,
                "mutation_prompt_id": a.mutation_prompt_id,
                "thinking_style_id": a.thinking_style_id,
                "hyper_mutation_prompt_id": a.hyper_mutation_prompt_id,
                "call_ids": list(a.call_ids),
                "before": a.before,
                "after": a.after,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        for a in result.lineage
    ]
    _write_text(out / "lineage.jsonl", "\n".join(lineage_lines) + "\n")
    print(f"evolved workflow ({method.value} over {scheme.value}) written under {out}")
    return EXIT_OK


def _report_to_dict(report: EvalReport) -> dict[str, Any]:
    return {
        "task_set_id": report.task_set_id,
        "per_task": report.per_task,
        "pass_at": {str(k): v for k, v in report.pass_at.items()},
        "token_totals": {
            "input_tokens": report.token_totals.input_tokens,
            "output_tokens": report.token_totals.output_tokens,
            "total": report.token_totals.total,
        },
        "config_fingerprint": report.config_fingerprint,
        "warnings": report.warnings,
    }


def _report_to_csv(report: EvalReport) -> str:
    ks = sorted(report.pass_at)
    lines = ["task_id,n,c"]
    for task_id, counts in report.per_task.items():
        lines.append(f"{task_id},{counts['n']},{counts['c']}")
    lines.append("")
    lines.append("k,pass_at_k")
    for k in ks:
        lines.append(f"{k},{report.pass_at[k]:.6f}")
    return "\n".join(lines) + "\n"


def _write_tokens(cfg: RunConfig, backend: CompletionBackend) -> None:
    records = backend.transcript.records
    totals = transcript_totals(records)
    _write_json(
        cfg.out_dir / "tokens.json",
        {
            "input_tokens": totals.input_tokens,
            "output_tokens": totals.output_tokens,
            "total": totals.total,
            "by_role": {
                tag: {"input_tokens": t.input_tokens, "output_tokens": t.output_tokens, "total": t.total}
                for tag, t in role_subtotals(records).items()
            },
        },
    )


def _load_eval_workflow(cfg: RunConfig) -> tuple:
    ref = cfg.workflow_ref
    if not ref.get("path"):
        raise ConfigError("workflow.path is required for eval (or pass --baseline)")
    path = Path(ref["path"])
    if not path.exists():
        raise ConfigError(f"workflow file not found: {path}")
    if not ref.get("scheme"):
        raise ConfigError("workflow.scheme is required for eval")
    doc = WorkflowDoc(text=path.read_text(encoding="utf-8"), scheme=Scheme(ref["scheme"]))
    try:
        w = parse(doc)
    except ParseFailure as exc:
        raise InvalidWorkflowError(f"eval workflow does not parse: {exc}", doc=doc, parse_failure=exc) from exc
    report: ValidityReport = validate(w)
    if not report.valid:
        raise InvalidWorkflowError("eval workflow fails validation", doc=doc, report=report)

    agents_dir = ref.get("agents_dir")
    if not agents_dir:
        raise ConfigError("workflow.agents_dir is required for eval")
    agents: dict[str, AgentSpec] = {}
    for name in w.agent_names:
        prompt_path = Path(agents_dir) / f"{name}.prompt.txt"
        if not prompt_path.exists():
            raise ConfigError(f"agent prompt file not found: {prompt_path}")
        agents[name] = AgentSpec(name=name, prompt=prompt_path.read_text(encoding="utf-8"))
    return w, agents


def cmd_eval(cfg: RunConfig, baseline: bool = False) -> int:
    tasks = _load_tasks(cfg, "test")
    backend = cfg.build_backend()
    policy = cfg.sandbox_policy()
    try:
        if baseline:
            report = baseline_single_agent(
                tasks,
                backend,
                n=cfg.n,
                ks=cfg.ks,
                policy=policy,
                config_fingerprint=cfg.fingerprint,
            )
        else:
            w, agents = _load_eval_workflow(cfg)
            report = evaluate(
                w,
                agents,
                tasks,
                backend,
                n=cfg.n,
                ks=cfg.ks,
                policy=policy,
                loop_policy=cfg.loop_policy(),
                config_fingerprint=cfg.fingerprint,
            )
    finally:
        _finalize(cfg, backend)

    _write_json(cfg.out_dir / "report.json", _report_to_dict(report))
    _write_text(cfg.out_dir / "report.csv", _report_to_csv(report))
    _write_tokens(cfg, backend)
    scores = ", ".join(f"pass@{k}={v:.4f}" for k, v in sorted(report.pass_at.items()))
    print(f"evaluated {len(tasks)} task(s): {scores}")
    return EXIT_OK


def _record_to_dict(record: SearchRecord) -> dict[str, Any]:
    if isinstance(record.validity, ValidityReport):
        validity: Any = {
            "valid": record.validity.valid,
            "violations": [
                {"rule": v.rule.value, "step_index": v.step_index, "detail": v.detail}
                for v in record.validity.violations
            ],
        }
    elif isinstance(record.validity, ParseFailure):
        validity = {
            "parse_failure": {
                "line": record.validity.line,
                "column": record.validity.column,
                "reason": record.validity.reason,
                "category": record.validity.category,
            }
        }
    else:
        validity = None
    return {
        "scheme": record.scheme.value,
        "mutation_prompt_id": record.mutation_prompt_id,
        "method": record.method.value,
        "valid": record.valid,
        "validity": validity,
        "validation_score": record.validation_score,
        "pass_at": {str(k): v for k, v in record.pass_at.items()},
        "tokens": record.tokens,
        "executed_ok": record.executed_ok,
        "error": record.error,
        "artifact_path": record.artifact_path,
    }


def cmd_search(cfg: RunConfig) -> int:
    validation_tasks = _load_tasks(cfg, "validation")
    corpus = cfg.load_corpus()
    task_desc = cfg.task_description(corpus)
    backend = cfg.build_backend()
    corpus_cfg = cfg.corpus_settings

    template = None
    if cfg.template_ref.get("path"):
        template = _template_for(cfg, cfg.schemes[0])

    search_config = SearchConfig(
        schemes=cfg.schemes,
        mutation_prompt_ids=tuple(int(i) for i in corpus_cfg["mutation_prompt_ids"]),
        methods=cfg.methods,
        corpus=corpus,
        task_desc=task_desc,
        template=template,
        thinking_style_id=int(corpus_cfg["thinking_style_id"]),
        hyper_mutation_prompt_id=int(corpus_cfg["hyper_mutation_prompt_id"]),
        n=cfg.n,
        ks=cfg.ks,
        policy=cfg.sandbox_policy(),
        loop_policy=cfg.loop_policy(),
    )
    try:
        result = search(search_config, validation_tasks, backend)
    finally:
        _finalize(cfg, backend)

    out = cfg.out_dir / "search"
    best = result.best
    rows = []
    for record in result.records:
        payload = _record_to_dict(record)
        if best is not None and record is best:
            payload["artifact_path"] = "search/best"
        rows.append(json.dumps(payload, sort_keys=True, ensure_ascii=False))
    _write_text(out / "records.jsonl", "\n".join(rows) + "\n")
    _write_text(out / "rates.csv", rates_to_csv(result.rate_reports))
    _write_text(out / "methods.csv", method_distribution_csv(result.records, ks=cfg.ks))

    if best is not None and best.evolved_text is not None:
        _write_text(out / "best" / f"workflow.{best.scheme.value}", best.evolved_text)
        for agent in best.agents:
            _write_text(out / "best" / "agents" / f"{agent.name}.prompt.txt", agent.prompt)
        _write_json(
            out / "best" / "summary.json",
            {
                "scheme": best.scheme.value,
                "mutation_prompt_id": best.mutation_prompt_id,
                "method": best.method.value,
                "validation_score": best.validation_score,
                "pass_at": {str(k): v for k, v in best.pass_at.items()},
                "tokens": best.tokens,
                "config_fingerprint": cfg.fingerprint,
            },
        )

    failures = sum(1 for r in result.records if r.error is not None)
    valid = sum(1 for r in result.records if r.valid)
    print(
        f"search finished: {len(result.records)} grid point(s), {valid} valid, "
        f"{failures} failure(s); best={'none' if best is None else best.scheme.value + ':mut' + str(best.mutation_prompt_id) + ':' + best.method.value}"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
