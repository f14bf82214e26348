"""Coding-task datasets.

The native dataset file is JSON Lines, one task per line::

    {"id": "...", "description": "...", "entry_point": null,
     "tests": [{"kind": "stdio", "input": "3\\n", "expected": "9"}]}

``kind`` is ``stdio`` (input fed on stdin, expected compared against
normalized stdout) or ``functional`` (``input`` is a JSON array of
arguments, ``expected`` a JSON value the named ``entry_point`` must
return; results are compared after a JSON round-trip). Loaders map the
public HumanEval, MBPP, and LiveCodeBench formats into this schema on a
best-effort basis documented per loader.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigError


class TestKind(str, Enum):
    STDIO = "stdio"
    FUNCTIONAL = "functional"


@dataclass(frozen=True)
class TestCase:
    kind: TestKind
    input: str
    expected: str


@dataclass(frozen=True)
class TaskInstance:
    id: str
    description: str
    tests: tuple[TestCase, ...]
    entry_point: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.tests:
            raise ConfigError(f"task {self.id!r} has no tests")
        kinds = {t.kind for t in self.tests}
        if TestKind.FUNCTIONAL in kinds and not self.entry_point:
            raise ConfigError(f"task {self.id!r} has functional tests but no entry_point")
        if kinds == {TestKind.STDIO} and self.entry_point:
            raise ConfigError(f"task {self.id!r} is stdio-only and must not set entry_point")


def _read_jsonl(path: str | Path) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"dataset file not found: {p}")
    records = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{lineno}: invalid JSON: {exc}") from exc
    return records


def load_tasks_jsonl(path: str | Path) -> list[TaskInstance]:
    """Load tasks in the native schema."""
    tasks = []
    for record in _read_jsonl(path):
        tests = tuple(
            TestCase(kind=TestKind(t["kind"]), input=t["input"], expected=t["expected"])
            for t in record["tests"]
        )
        tasks.append(
            TaskInstance(
                id=str(record["id"]),
                description=record["description"],
                tests=tests,
                entry_point=record.get("entry_point"),
            )
        )
    return tasks


def load_desk_tasks() -> list[TaskInstance]:
    """The five small bundled tasks used for smoke tests and demos."""
    text = resources.files("sew").joinpath("data/desk_tasks.jsonl").read_text(encoding="utf-8")
    tasks = []
    for line in text.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        tests = tuple(
            TestCase(kind=TestKind(t["kind"]), input=t["input"], expected=t["expected"])
            for t in record["tests"]
        )
        tasks.append(
            TaskInstance(
                id=record["id"],
                description=record["description"],
                tests=tests,
                entry_point=record.get("entry_point"),
            )
        )
    return tasks


def _calls_to_cases(tree: ast.AST, callee: str) -> list[TestCase]:
    """Extract ``assert callee(args) == literal`` checks as functional
    cases. Asserts in any other shape are skipped."""
    cases = []
    for node in ast.walk(tree):
        if not isinstance(node, ast.Assert):
            continue
        test = node.test
        if not (isinstance(test, ast.Compare) and len(test.ops) == 1 and isinstance(test.ops[0], ast.Eq)):
            continue
        call = test.left
        if not (isinstance(call, ast.Call) and isinstance(call.func, ast.Name) and call.func.id == callee):
            continue
        try:
            args = [ast.literal_eval(a) for a in call.args]
            expected = ast.literal_eval(test.comparators[0])
        except (ValueError, SyntaxError):
            continue
        cases.append(
            TestCase(
                kind=TestKind.FUNCTIONAL,
                input=json.dumps(args, ensure_ascii=False),
                expected=json.dumps(expected, sort_keys=True, ensure_ascii=False),
            )
        )
    return cases


def load_humaneval(path: str | Path) -> list[TaskInstance]:
    """Map HumanEval records (task_id, prompt, entry_point, test).

    Test cases are recovered from ``assert candidate(...) == literal``
    statements inside the check function; records whose checks cannot be
    expressed that way are rejected so nothing is silently dropped.
    """
    tasks = []
    for record in _read_jsonl(path):
        try:
            tree = ast.parse(record["test"])
        except SyntaxError as exc:
            raise ConfigError(f"task {record.get('task_id')!r}: unparsable test code: {exc}") from exc
        cases = _calls_to_cases(tree, "candidate")
        if not cases:
            raise ConfigError(
                f"task {record.get('task_id')!r}: no 'assert candidate(...) == literal' checks found"
            )
        tasks.append(
            TaskInstance(
                id=str(record["task_id"]),
                description=record["prompt"],
                tests=tuple(cases),
                entry_point=record["entry_point"],
            )
        )
    return tasks


def load_mbpp(path: str | Path) -> list[TaskInstance]:
    """Map MBPP records (task_id, text, test_list).

    The entry point and cases come from ``assert f(args) == literal``
    lines in test_list; other assertion shapes are skipped, and a record
    with no usable assertion is rejected.
    """
    tasks = []
    for record in _read_jsonl(path):
        entry_point = None
        cases: list[TestCase] = []
        for stmt in record.get("test_list", []):
            try:
                tree = ast.parse(stmt)
            except SyntaxError:
                continue
            for node in ast.walk(tree):
                if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
                    entry_point = entry_point or node.func.id
                    break
            if entry_point:
                cases.extend(_calls_to_cases(tree, entry_point))
        if not entry_point or not cases:
            raise ConfigError(
                f"task {record.get('task_id')!r}: no usable 'assert f(...) == literal' tests"
            )
        tasks.append(
            TaskInstance(
                id=str(record["task_id"]),
                description=record["text"],
                tests=tuple(cases),
                entry_point=entry_point,
            )
        )
    return tasks


def load_livecodebench(path: str | Path, include_private: bool = True) -> list[TaskInstance]:
    """Map LiveCodeBench code-generation records.

    Uses ``question_content`` as the description and the stdin-type
    entries of ``public_test_cases`` (plus ``private_test_cases`` when
    they are plain JSON; encrypted private cases are skipped).
    """
    tasks = []
    for record in _read_jsonl(path):
        cases: list[TestCase] = []
        for field_name in ("public_test_cases", "private_test_cases") if include_private else ("public_test_cases",):
            raw = record.get(field_name)
            if raw is None:
                continue
            if isinstance(raw, str):
                try:
                    raw = json.loads(raw)
                except json.JSONDecodeError:
                    continue  # non-JSON (e.g. compressed) payloads are skipped
            for case in raw:
                if case.get("testtype", "stdin") != "stdin":
                    continue
                cases.append(
                    TestCase(kind=TestKind.STDIO, input=case["input"], expected=case["output"])
                )
        if not cases:
            raise ConfigError(
                f"task {record.get('question_id')!r}: no stdin test cases available"
            )
        tasks.append(
            TaskInstance(
                id=str(record.get("question_id") or record.get("question_title")),
                description=record["question_content"],
                tests=tuple(cases),
            )
        )
    return tasks


_LOADERS = {
    "native": load_tasks_jsonl,
    "humaneval": load_humaneval,
    "mbpp": load_mbpp,
    "livecodebench": load_livecodebench,
}


def load_dataset(path: str | Path, format: str = "native") -> list[TaskInstance]:
    try:
        loader = _LOADERS[format]
    except KeyError:
        raise ConfigError(
            f"unknown dataset format {format!r}; expected one of {sorted(_LOADERS)}"
        ) from None
    return loader(path)


def select_tasks(tasks: Iterable[TaskInstance], ids: Optional[Iterable[str]]) -> list[TaskInstance]:
    """Pick tasks by id, preserving the requested order; None selects all."""
    tasks = list(tasks)
    if ids is None:
        return tasks
    by_id = {t.id: t for t in tasks}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ConfigError(f"dataset is missing task ids: {missing}")
    return [by_id[i] for i in ids]
