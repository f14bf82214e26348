"""Run configuration: one JSON file drives every command.

See README.md for the full field reference. Unknown top-level keys are
rejected so typos fail fast. The resolved configuration (defaults filled
in) is written into every run's artifact directory together with its
fingerprint, which reports reference.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from .backend import (
    CompletionBackend,
    CompletionDefaults,
    LiveBackend,
    ReplayBackend,
    ScriptedBackend,
    echo_backend,
)
from .corpus import PromptCorpus, load_corpus
from .errors import ConfigError
from .evolution import EvolutionMethod
from .execution import LoopPolicy
from .sandbox import SandboxPolicy
from .schemes import Scheme

API_KEY_ENV = "SEW_API_KEY"

_TOP_LEVEL_KEYS = {
    "seed",
    "out_dir",
    "n",
    "ks",
    "schemes",
    "methods",
    "task_description",
    "task_description_id",
    "dataset",
    "corpus",
    "template",
    "workflow",
    "backend",
    "sandbox",
}

_DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "n": 10,
    "ks": [1, 5, 10],
    "schemes": ["pysteps"],
    "methods": ["de1"],
    "task_description": None,
    "task_description_id": "livecodebench",
    "dataset": {"path": None, "format": "native", "validation_ids": None, "test_ids": None},
    "corpus": {"path": None, "mutation_prompt_ids": [0], "thinking_style_id": 0, "hyper_mutation_prompt_id": 0},
    "template": {"path": None, "scheme": None},
    "workflow": {"path": None, "scheme": None, "agents_dir": None},
    "backend": {
        "mode": "scripted",
        "behavior": "echo",
        "endpoint": None,
        "model": "default",
        "evolution_temperature": 0.7,
        "sampling_temperature": 1.0,
        "max_tokens": 2048,
        "retries": 3,
        "transcript": None,
    },
    "sandbox": {
        "interpreter_command": None,
        "wall_timeout_ms": 10_000,
        "max_output_bytes": 1 << 20,
        "workdir_isolation": True,
        "parallelism": 1,
        "loop_max_iterations": 3,
    },
}


@dataclass(frozen=True)
class RunConfig:
    path: Path
    resolved: dict[str, Any]

    @property
    def out_dir(self) -> Path:
        return Path(self.resolved["out_dir"])

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def n(self) -> int:
        return int(self.resolved["n"])

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(int(k) for k in self.resolved["ks"])

    @property
    def schemes(self) -> tuple[Scheme, ...]:
        return tuple(Scheme(s) for s in self.resolved["schemes"])

    @property
    def methods(self) -> tuple[EvolutionMethod, ...]:
        return tuple(EvolutionMethod(m) for m in self.resolved["methods"])

    @property
    def dataset(self) -> dict[str, Any]:
        return self.resolved["dataset"]

    @property
    def corpus_settings(self) -> dict[str, Any]:
        return self.resolved["corpus"]

    @property
    def workflow_ref(self) -> dict[str, Any]:
        return self.resolved["workflow"]

    @property
    def template_ref(self) -> dict[str, Any]:
        return self.resolved["template"]

    @property
    def fingerprint(self) -> str:
        return config_fingerprint(self.resolved)

    def sandbox_policy(self) -> SandboxPolicy:
        block = self.resolved["sandbox"]
        interpreter = block.get("interpreter_command")
        kwargs: dict[str, Any] = dict(
            wall_timeout_ms=int(block["wall_timeout_ms"]),
            max_output_bytes=int(block["max_output_bytes"]),
            workdir_isolation=bool(block["workdir_isolation"]),
            parallelism=int(block["parallelism"]),
        )
        if interpreter:
            kwargs["interpreter_command"] = tuple(interpreter)
        try:
            return SandboxPolicy(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"sandbox block: {exc}") from exc

    def loop_policy(self) -> LoopPolicy:
        return LoopPolicy(max_iterations=int(self.resolved["sandbox"]["loop_max_iterations"]))

    def load_corpus(self) -> PromptCorpus:
        return load_corpus(self.corpus_settings.get("path"))

    def task_description(self, corpus: PromptCorpus) -> str:
        literal = self.resolved.get("task_description")
        if literal:
            return literal
        desc_id = self.resolved["task_description_id"]
        try:
            return corpus.task_descriptions[desc_id]
        except KeyError:
            raise ConfigError(
                f"unknown task_description_id {desc_id!r}; "
                f"known: {sorted(corpus.task_descriptions)}"
            ) from None

    def build_backend(self) -> CompletionBackend:
        block = self.resolved["backend"]
        defaults = CompletionDefaults(
            model=block["model"],
            evolution_temperature=float(block["evolution_temperature"]),
            sampling_temperature=float(block["sampling_temperature"]),
            max_tokens=int(block["max_tokens"]),
        )
        mode = block["mode"]
        if mode == "scripted":
            behavior = block.get("behavior", "echo")
            if behavior != "echo":
                raise ConfigError(f"unknown scripted behavior {behavior!r} (only 'echo' is built in)")
            return echo_backend(defaults)
        if mode == "replay":
            transcript = block.get("transcript")
            if not transcript:
                raise ConfigError("backend.mode=replay requires backend.transcript")
            if not Path(transcript).exists():
                raise ConfigError(f"replay transcript not found: {transcript}")
            return ReplayBackend.from_file(transcript, defaults)
        if mode == "live":
            endpoint = block.get("endpoint")
            if not endpoint:
                raise ConfigError("backend.mode=live requires backend.endpoint")
            api_key = os.environ.get(API_KEY_ENV)
            if not api_key:
                raise ConfigError(f"backend.mode=live requires the {API_KEY_ENV} environment variable")
            return LiveBackend(
                endpoint=endpoint,
                api_key=api_key,
                defaults=defaults,
                retry_budget=int(block["retries"]),
            )
        raise ConfigError(f"unknown backend.mode {mode!r}; expected scripted, replay, or live")


def _merge(defaults: Any, override: Any, path: str) -> Any:
    if isinstance(defaults, dict):
        if not isinstance(override, dict):
            raise ConfigError(f"config field {path!r} must be an object")
        unknown = set(override) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys under {path!r}: {sorted(unknown)}")
        return {
            key: _merge(value, override[key], f"{path}.{key}") if key in override else value
            for key, value in defaults.items()
        }
    return override


def load_run_config(
    path: str | Path,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: config must be a JSON object")
    unknown = set(data) - _TOP_LEVEL_KEYS - {"out_dir"}
    if unknown:
        raise ConfigError(f"{p}: unknown config keys: {sorted(unknown)}")

    resolved = _merge(_DEFAULTS, {k: v for k, v in data.items() if k != "out_dir"}, "config")
    resolved["out_dir"] = out_dir or data.get("out_dir")
    if not resolved["out_dir"]:
        raise ConfigError(f"{p}: out_dir required (in the file or via --out)")
    if seed is not None:
        resolved["seed"] = seed

    for field_name, enum_cls in (("schemes", Scheme), ("methods", EvolutionMethod)):
        values = resolved[field_name]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{field_name} must be a non-empty list")
        for value in values:
            try:
                enum_cls(value)
            except ValueError:
                raise ConfigError(
                    f"unknown {field_name[:-1]} {value!r}; expected one of "
                    f"{[e.value for e in enum_cls]}"
                ) from None
    if not resolved["corpus"]["mutation_prompt_ids"]:
        raise ConfigError("corpus.mutation_prompt_ids must be non-empty")
    return RunConfig(path=p, resolved=resolved)


def config_fingerprint(resolved: Mapping[str, Any]) -> str:
    payload = json.dumps(resolved, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
