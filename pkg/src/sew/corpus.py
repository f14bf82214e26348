"""Evolutionary prompt corpus: mutation prompts, hyper-mutation prompts,
thinking styles, and per-dataset task descriptions.

Corpus file format (see ``docs/corpus-format.md``): three bracketed
sections ``[mutation]``, ``[hyper-mutation]``, ``[thinking-style]``,
entries inside a section separated by a line containing exactly ``---``.
Entries get stable zero-based ids by position. Lines before the first
section header may be blank or ``#`` comments.

The bundled corpus under ``sew/data/corpus.txt`` is a small substitute
collection written for this repository; swap in your own file for real
experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .errors import ConfigError

_SECTION_NAMES = ("mutation", "hyper-mutation", "thinking-style")

# Shipped descriptions of the three target benchmarks, used as the
# corpus's default task-description map.
DEFAULT_TASK_DESCRIPTIONS: dict[str, str] = {
    "livecodebench": (
        "The code generation task in LiveCodeBench involves generating correct "
        "and functional code from a natural language problem description, where "
        "the model is evaluated based on its ability to pass a set of unseen "
        "test cases."
    ),
    "humaneval": (
        "The HumanEval dataset, developed by OpenAI, comprises 164 handcrafted "
        "programming problems, each including a function signature, docstring, "
        "body, and multiple unit tests, designed to evaluate the code generation "
        "capabilities of large language models by assessing their ability to "
        "generate functionally correct code from docstrings."
    ),
    "mbpp": (
        "The MBPP (Mostly Basic Python Problems) dataset comprises approximately "
        "1,000 crowd-sourced Python programming problems, each including a task "
        "description, code solution, and three automated test cases, designed to "
        "be solvable by entry-level programmers and covering programming "
        "fundamentals and standard library functionality."
    ),
}


@dataclass(frozen=True)
class PromptCorpus:
    mutation_prompts: tuple[str, ...]
    hyper_mutation_prompts: tuple[str, ...]
    thinking_styles: tuple[str, ...]
    task_descriptions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for label, entries in (
            ("mutation_prompts", self.mutation_prompts),
            ("hyper_mutation_prompts", self.hyper_mutation_prompts),
            ("thinking_styles", self.thinking_styles),
        ):
            if not entries:
                raise ConfigError(f"corpus section {label} is empty")
            if any(not e.strip() for e in entries):
                raise ConfigError(f"corpus section {label} contains a blank entry")
        if any(not v.strip() for v in self.task_descriptions.values()):
            raise ConfigError("corpus has a blank task description")


def parse_corpus_text(
    text: str,
    task_descriptions: Optional[Mapping[str, str]] = None,
) -> PromptCorpus:
    sections: dict[str, list[str]] = {name: [] for name in _SECTION_NAMES}
    current: Optional[str] = None
    buffer: list[str] = []

    def flush() -> None:
        if current is None:
            return
        entry = "\n".join(buffer).strip("\n").strip()
        if entry:
            sections[current].append(entry)
        buffer.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        header = line.strip()
        if header.startswith("[") and header.endswith("]"):
            name = header[1:-1]
            if name not in _SECTION_NAMES:
                raise ConfigError(f"corpus line {lineno}: unknown section {name!r}")
            flush()
            current = name
            continue
        if current is None:
            if header and not header.startswith("#"):
                raise ConfigError(
                    f"corpus line {lineno}: content before the first section header"
                )
            continue
        if header == "---":
            flush()
            continue
        buffer.append(line)
    flush()

    return PromptCorpus(
        mutation_prompts=tuple(sections["mutation"]),
        hyper_mutation_prompts=tuple(sections["hyper-mutation"]),
        thinking_styles=tuple(sections["thinking-style"]),
        task_descriptions=dict(task_descriptions or DEFAULT_TASK_DESCRIPTIONS),
    )


def load_corpus(
    path: Optional[str | Path] = None,
    task_descriptions: Optional[Mapping[str, str]] = None,
) -> PromptCorpus:
    """Load a corpus file, or the bundled substitute corpus when no path
    is given."""
    if path is None:
        text = resources.files("sew").joinpath("data/corpus.txt").read_text(encoding="utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"corpus file not found: {p}")
        text = p.read_text(encoding="utf-8")
    return parse_corpus_text(text, task_descriptions)
