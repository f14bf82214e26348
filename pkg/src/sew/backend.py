"""Text-completion backends with full transcript recording.

Every completion call appends one :class:`TranscriptRecord`, which makes
any pipeline replayable and gives token accounting for free. Three
implementations are provided:

* :class:`LiveBackend` posts to an OpenAI-compatible HTTP endpoint with
  bounded retries.
* :class:`ReplayBackend` answers from a recorded transcript, matched by
  request content (not call order), so replayed pipelines are
  deterministic and network-free.
* :class:`ScriptedBackend` applies a user-supplied deterministic function
  of the prompt; ``echo_backend()`` is the identity special case.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional

from .errors import (
    MalformedResponseError,
    NetworkError,
    QuotaError,
    ReplayMissError,
)

# Timestamp used by scripted backends so their transcripts are byte-stable.
_FIXED_TIMESTAMP = datetime(2000, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    model: str
    temperature: float
    max_tokens: int
    seed: Optional[int] = None


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    input_tokens: int
    output_tokens: int
    latency_ms: int


@dataclass(frozen=True)
class TranscriptRecord:
    call_id: int
    role_tag: str
    request: CompletionRequest
    response: CompletionResponse
    timestamp: datetime
    retries: int = 0


@dataclass(frozen=True)
class TokenTotals:
    input_tokens: int
    output_tokens: int

    @property
    def total(self) -> int:
        return self.input_tokens + self.output_tokens


@dataclass(frozen=True)
class CompletionDefaults:
    """Decoding defaults a backend applies when callers build requests."""

    model: str = "default"
    evolution_temperature: float = 0.7
    sampling_temperature: float = 1.0
    max_tokens: int = 2048


def estimate_tokens(text: str) -> int:
    """Local token estimate used when a provider reports no usage:
    one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


def request_fingerprint(req: CompletionRequest) -> str:
    payload = json.dumps(
        {
            "prompt": req.prompt,
            "model": req.model,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "seed": req.seed,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Transcript:
    """Append-only, thread-safe record list with monotonically increasing
    call ids. Appends are globally ordered even under concurrent calls."""

    def __init__(self) -> None:
        self._records: list[TranscriptRecord] = []
        self._lock = threading.Lock()

    def append(
        self,
        role_tag: str,
        request: CompletionRequest,
        response: CompletionResponse,
        timestamp: datetime,
        retries: int = 0,
    ) -> TranscriptRecord:
        with self._lock:
            record = TranscriptRecord(
                call_id=len(self._records) + 1,
                role_tag=role_tag,
                request=request,
                response=response,
                timestamp=timestamp,
                retries=retries,
            )
            self._records.append(record)
            return record

    @property
    def records(self) -> tuple[TranscriptRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def __len__(self) -> int:
        return len(self.records)

    def save(self, path: str | Path) -> None:
        lines = [json.dumps(record_to_dict(r), sort_keys=True, ensure_ascii=False) for r in self.records]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> tuple[TranscriptRecord, ...]:
        records = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(record_from_dict(json.loads(line)))
        return tuple(records)


def record_to_dict(r: TranscriptRecord) -> dict:
    return {
        "call_id": r.call_id,
        "role_tag": r.role_tag,
        "request": {
            "prompt": r.request.prompt,
            "model": r.request.model,
            "temperature": r.request.temperature,
            "max_tokens": r.request.max_tokens,
            "seed": r.request.seed,
        },
        "response": {
            "text": r.response.text,
            "input_tokens": r.response.input_tokens,
            "output_tokens": r.response.output_tokens,
            "latency_ms": r.response.latency_ms,
        },
        "timestamp": r.timestamp.isoformat(),
        "retries": r.retries,
    }


def record_from_dict(data: Mapping) -> TranscriptRecord:
    req = data["request"]
    res = data["response"]
    return TranscriptRecord(
        call_id=int(data["call_id"]),
        role_tag=data["role_tag"],
        request=CompletionRequest(
            prompt=req["prompt"],
            model=req["model"],
            temperature=float(req["temperature"]),
            max_tokens=int(req["max_tokens"]),
            seed=req.get("seed"),
        ),
        response=CompletionResponse(
            text=res["text"],
            input_tokens=int(res["input_tokens"]),
            output_tokens=int(res["output_tokens"]),
            latency_ms=int(res["latency_ms"]),
        ),
        timestamp=datetime.fromisoformat(data["timestamp"]),
        retries=int(data.get("retries", 0)),
    )


class CompletionBackend:
    """Base class: subclasses implement ``_perform``; ``complete`` records."""

    def __init__(self, defaults: Optional[CompletionDefaults] = None):
        self.defaults = defaults or CompletionDefaults()
        self.transcript = Transcript()

    def complete(self, request: CompletionRequest, role_tag: str = "") -> CompletionResponse:
        """Run one completion and append exactly one transcript record."""
        response, timestamp, retries = self._perform(request)
        self.transcript.append(role_tag, request, response, timestamp, retries)
        return response

    def _perform(self, request: CompletionRequest) -> tuple[CompletionResponse, datetime, int]:
        raise NotImplementedError


class ScriptedBackend(CompletionBackend):
    """Deterministic backend driven by a function of the prompt text.

    Timestamps are fixed and latency is zero so that artifacts produced
    under a scripted backend are byte-stable across runs.
    """

    def __init__(self, script: Callable[[str], str], defaults: Optional[CompletionDefaults] = None):
        super().__init__(defaults)
        self._script = script

    def _perform(self, request: CompletionRequest) -> tuple[CompletionResponse, datetime, int]:
        text = self._script(request.prompt)
        response = CompletionResponse(
            text=text,
            input_tokens=estimate_tokens(request.prompt),
            output_tokens=estimate_tokens(text),
            latency_ms=0,
        )
        return response, _FIXED_TIMESTAMP, 0

    @classmethod
    def from_table(
        cls,
        table: Mapping[str, str],
        default: Optional[str] = None,
        defaults: Optional[CompletionDefaults] = None,
    ) -> "ScriptedBackend":
        """Look completions up by exact prompt; ``default`` (or an echo of
        the prompt when None is given) covers unlisted prompts."""

        def script(prompt: str) -> str:
            if prompt in table:
                return table[prompt]
            return default if default is not None else prompt

        return cls(script, defaults)


def echo_backend(defaults: Optional[CompletionDefaults] = None) -> ScriptedBackend:
    """Backend whose completion is exactly the prompt it was given."""
    return ScriptedBackend(lambda prompt: prompt, defaults)


class ReplayBackend(CompletionBackend):
    """Answers from a recorded transcript, matched by request content.

    Responses recorded for the same request are served in recorded order;
    once exhausted, the last one repeats (so a replayed pipeline may make
    a call more often than the recording did without becoming
    nondeterministic). Recorded timestamps and latencies are reproduced,
    which keeps re-recorded transcripts byte-identical across replays.
    """

    def __init__(
        self,
        records: Iterable[TranscriptRecord],
        defaults: Optional[CompletionDefaults] = None,
    ):
        super().__init__(defaults)
        self._lock = threading.Lock()
        self._queues: dict[str, list[tuple[CompletionResponse, datetime]]] = {}
        for record in records:
            key = request_fingerprint(record.request)
            self._queues.setdefault(key, []).append((record.response, record.timestamp))

    @classmethod
    def from_file(cls, path: str | Path, defaults: Optional[CompletionDefaults] = None) -> "ReplayBackend":
        return cls(Transcript.load(path), defaults)

    def _perform(self, request: CompletionRequest) -> tuple[CompletionResponse, datetime, int]:
        key = request_fingerprint(request)
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                raise ReplayMissError(
                    f"no recorded call matches this request (fingerprint {key[:12]})"
                )
            if len(queue) > 1:
                response, timestamp = queue.pop(0)
            else:
                response, timestamp = queue[0]
        return response, timestamp, 0


class LiveBackend(CompletionBackend):
    """One OpenAI-compatible HTTP completions endpoint with bounded retries.

    Transient failures (connection errors, 429, 5xx) are retried with
    exponential backoff up to ``retry_budget`` additional attempts; only
    the final attempt is recorded, with the retry count noted. Token
    counts come from the provider's usage block when present, otherwise
    from :func:`estimate_tokens`.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str,
        defaults: Optional[CompletionDefaults] = None,
        retry_budget: int = 3,
        timeout_s: float = 120.0,
        session=None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(defaults)
        self.endpoint = endpoint
        self.api_key = api_key
        self.retry_budget = retry_budget
        self.timeout_s = timeout_s
        if session is None:
            import requests

            session = requests.Session()
        self._session = session
        self._sleep = sleep

    def _perform(self, request: CompletionRequest) -> tuple[CompletionResponse, datetime, int]:
        import requests

        payload = {
            "model": request.model,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        headers = {"Authorization": f"Bearer {self.api_key}"}

        last_error: Exception | None = None
        for attempt in range(self.retry_budget + 1):
            if attempt:
                self._sleep(min(0.5 * 2 ** (attempt - 1), 8.0))
            started = time.monotonic()
            try:
                http = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout_s
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            latency_ms = int((time.monotonic() - started) * 1000)
            if http.status_code == 429:
                last_error = QuotaError(f"HTTP 429 from {self.endpoint}")
                continue
            if http.status_code >= 500:
                last_error = NetworkError(f"HTTP {http.status_code} from {self.endpoint}")
                continue
            if http.status_code != 200:
                raise MalformedResponseError(
                    f"HTTP {http.status_code} from {self.endpoint}: {http.text[:200]}"
                )
            response = self._parse_body(http, request, latency_ms)
            return response, datetime.now(timezone.utc), attempt

        if isinstance(last_error, (QuotaError, NetworkError)):
            raise last_error
        raise NetworkError(f"giving up after {self.retry_budget + 1} attempts: {last_error}")

    def _parse_body(self, http, request: CompletionRequest, latency_ms: int) -> CompletionResponse:
        try:
            body = http.json()
        except ValueError as exc:
            raise MalformedResponseError(f"response is not JSON: {exc}") from exc
        try:
            choice = body["choices"][0]
            if "text" in choice:
                text = choice["text"]
            else:
                text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected response shape: {exc!r}") from exc
        usage = body.get("usage") or {}
        return CompletionResponse(
            text=text,
            input_tokens=int(usage.get("prompt_tokens", estimate_tokens(request.prompt))),
            output_tokens=int(usage.get("completion_tokens", estimate_tokens(text))),
            latency_ms=latency_ms,
        )


def transcript_totals(records: Iterable[TranscriptRecord]) -> TokenTotals:
    """Exact input/output token sums over a set of records."""
    input_tokens = 0
    output_tokens = 0
    for record in records:
        input_tokens += record.response.input_tokens
        output_tokens += record.response.output_tokens
    return TokenTotals(input_tokens=input_tokens, output_tokens=output_tokens)


def role_subtotals(records: Iterable[TranscriptRecord]) -> dict[str, TokenTotals]:
    """Token totals grouped by role tag, in first-appearance order."""
    grouped: dict[str, list[TranscriptRecord]] = {}
    for record in records:
        grouped.setdefault(record.role_tag, []).append(record)
    return {tag: transcript_totals(rs) for tag, rs in grouped.items()}
