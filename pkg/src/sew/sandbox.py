"""Process-level sandbox for candidate programs.

Each test case runs the candidate in a fresh private working directory
under a hard wall-clock timeout, with no network and writes confined to
that directory. Isolation is process-level only (interpreter guard +
private workdir + kill-on-timeout); it is not a container or VM and is
documented as such. The guard is Python-specific: for other interpreter
commands only the workdir, environment, and timeout apply.
"""

from __future__ import annotations

import json
import os
import shutil
import signal
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import SandboxSetupError
from .tasks import TaskInstance, TestCase, TestKind

# Documented kill grace: a timed-out candidate is reaped at most this long
# after the wall timeout fires.
KILL_GRACE_MS = 500

# Interpreter startup guard: blocks sockets and writes outside the workdir.
_GUARD_SOURCE = """\
import builtins
import os
import socket

_ROOT = os.path.realpath(os.environ.get("SEW_SANDBOX_ROOT", os.getcwd()))


def _no_network(*args, **kwargs):
    raise OSError("network access is disabled in this sandbox")


socket.socket = _no_network
socket.create_connection = _no_network
socket.socketpair = _no_network

_open = builtins.open


def _guarded_open(file, mode="r", *args, **kwargs):
    if not isinstance(file, int) and any(flag in mode for flag in "wax+"):
        path = os.path.realpath(os.fspath(file))
        if not (path == _ROOT or path.startswith(_ROOT + os.sep)):
            raise PermissionError(
                "write outside the sandbox working directory: %r" % (path,)
            )
    return _open(file, mode, *args, **kwargs)


builtins.open = _guarded_open
"""

_RESULT_FILENAME = "_sew_result.json"

# Appended to functional candidates: calls the entry point and writes the
# JSON-encoded result to a file so candidate prints cannot corrupt it.
_FUNCTIONAL_HARNESS = """\


def _sew_harness():
    import json as _sew_json

    _args = _sew_json.loads({args_json!r})
    _result = {entry_point}(*_args)
    with open({result_filename!r}, "w") as _f:
        _f.write(_sew_json.dumps(_result, sort_keys=True))


_sew_harness()
"""


class Verdict(str, Enum):
    PASS = "PASS"
    WRONG_OUTPUT = "WRONG_OUTPUT"
    RUNTIME_ERROR = "RUNTIME_ERROR"
    TIMEOUT = "TIMEOUT"
    SYNTAX_ERROR = "SYNTAX_ERROR"
    OUTPUT_OVERFLOW = "OUTPUT_OVERFLOW"


@dataclass(frozen=True)
class SandboxPolicy:
    interpreter_command: tuple[str, ...] = field(default_factory=lambda: (sys.executable,))
    wall_timeout_ms: int = 10_000
    max_output_bytes: int = 1 << 20
    workdir_isolation: bool = True
    parallelism: int = 1
    # Candidates are Python by default; the pre-pass maps compile-stage
    # failures to SYNTAX_ERROR. Disable for non-Python interpreters.
    python_syntax_check: bool = True

    def __post_init__(self) -> None:
        if self.wall_timeout_ms <= 0:
            raise ValueError("wall_timeout_ms must be positive")
        if self.max_output_bytes <= 0:
            raise ValueError("max_output_bytes must be positive")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")


@dataclass(frozen=True)
class CandidateResult:
    code: str
    verdicts: tuple[Verdict, ...]

    @property
    def passed_all(self) -> bool:
        return bool(self.verdicts) and all(v is Verdict.PASS for v in self.verdicts)

    @classmethod
    def no_code(cls, task: TaskInstance) -> "CandidateResult":
        """Marker for candidates with no extractable program."""
        return cls(code="", verdicts=tuple(Verdict.RUNTIME_ERROR for _ in task.tests))

    @property
    def has_syntax_valid_code(self) -> bool:
        return bool(self.code) and Verdict.SYNTAX_ERROR not in self.verdicts


def normalize_stdout(text: str) -> str:
    """Strip trailing whitespace per line and trailing newlines."""
    return "\n".join(line.rstrip() for line in text.splitlines()).rstrip("\n")


def python_syntax_ok(code: str) -> bool:
    try:
        compile(code, "<candidate>", "exec")
    except (SyntaxError, ValueError):
        return False
    return True


def run_candidate(code: str, task: TaskInstance, policy: SandboxPolicy) -> CandidateResult:
    """Run one candidate against every test of the task.

    Only environment failures raise (:class:`SandboxSetupError`); every
    candidate failure is a verdict. With ``workdir_isolation`` each test
    gets a fresh private directory; without it the candidate's tests
    share one directory (state files persist between tests).
    """
    if policy.python_syntax_check and not python_syntax_ok(code):
        return CandidateResult(code=code, verdicts=tuple(Verdict.SYNTAX_ERROR for _ in task.tests))
    if policy.workdir_isolation:
        verdicts = tuple(_run_test(code, task, test, policy) for test in task.tests)
        return CandidateResult(code=code, verdicts=verdicts)
    shared = _make_workdir()
    try:
        verdicts = tuple(_run_test(code, task, test, policy, shared) for test in task.tests)
    finally:
        shutil.rmtree(shared, ignore_errors=True)
    return CandidateResult(code=code, verdicts=verdicts)


def _make_workdir() -> Path:
    try:
        return Path(tempfile.mkdtemp(prefix="sew-sandbox-"))
    except OSError as exc:
        raise SandboxSetupError(f"cannot create sandbox directory: {exc}") from exc


def _run_test(
    code: str,
    task: TaskInstance,
    test: TestCase,
    policy: SandboxPolicy,
    shared_workdir: Path | None = None,
) -> Verdict:
    workdir = shared_workdir if shared_workdir is not None else _make_workdir()
    try:
        program = code
        if test.kind is TestKind.FUNCTIONAL:
            if not task.entry_point or not task.entry_point.isidentifier():
                raise SandboxSetupError(f"task {task.id!r} has an unusable entry_point")
            program = code + _FUNCTIONAL_HARNESS.format(
                args_json=test.input,
                entry_point=task.entry_point,
                result_filename=_RESULT_FILENAME,
            )
        (workdir / "main.py").write_text(program, encoding="utf-8")
        (workdir / "sitecustomize.py").write_text(_GUARD_SOURCE, encoding="utf-8")
        (workdir / _RESULT_FILENAME).unlink(missing_ok=True)  # no stale results

        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": str(workdir),
            "PYTHONPATH": str(workdir),
            "PYTHONDONTWRITEBYTECODE": "1",
            "PYTHONIOENCODING": "utf-8",
            "SEW_SANDBOX_ROOT": str(workdir),
        }
        stdin_payload = test.input if test.kind is TestKind.STDIO else ""

        try:
            proc = subprocess.Popen(
                [*policy.interpreter_command, "main.py"],
                cwd=str(workdir),
                env=env,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                errors="replace",
                start_new_session=True,
            )
        except OSError as exc:
            raise SandboxSetupError(f"cannot start interpreter {policy.interpreter_command}: {exc}") from exc

        try:
            stdout, _ = proc.communicate(stdin_payload, timeout=policy.wall_timeout_ms / 1000.0)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            return Verdict.TIMEOUT

        if len(stdout.encode("utf-8", "replace")) > policy.max_output_bytes:
            return Verdict.OUTPUT_OVERFLOW
        if proc.returncode != 0:
            return Verdict.RUNTIME_ERROR

        if test.kind is TestKind.STDIO:
            if normalize_stdout(stdout) == normalize_stdout(test.expected):
                return Verdict.PASS
            return Verdict.WRONG_OUTPUT

        result_path = workdir / _RESULT_FILENAME
        if not result_path.exists():
            return Verdict.RUNTIME_ERROR
        try:
            produced = json.loads(result_path.read_text(encoding="utf-8"))
            expected = json.loads(test.expected)
        except (json.JSONDecodeError, OSError):
            return Verdict.RUNTIME_ERROR
        return Verdict.PASS if produced == expected else Verdict.WRONG_OUTPUT
    finally:
        if shared_workdir is None:
            shutil.rmtree(workdir, ignore_errors=True)


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        proc.kill()
    try:
        proc.communicate(timeout=KILL_GRACE_MS / 1000.0)
    except subprocess.TimeoutExpired:  # pragma: no cover - defensive
        pass
