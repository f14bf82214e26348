"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SewError(Exception):
    """Base class for all package-specific errors."""


class WorkflowOrderError(SewError):
    """A workflow cannot be linearized (empty, duplicate outputs, or unbound args)."""


class UnserializableError(SewError):
    """An identifier in the workflow cannot be written in the target scheme."""


class BackendError(SewError):
    """Base class for completion-backend failures."""


class NetworkError(BackendError):
    """The live endpoint was unreachable after the retry budget was spent."""


class QuotaError(BackendError):
    """The live endpoint rejected the call for quota/rate reasons."""


class MalformedResponseError(BackendError):
    """The provider answered, but not in the expected shape."""


class ReplayMissError(BackendError):
    """No recorded call matches the request being replayed."""


class EmptyCompletionError(SewError):
    """An evolution operator received a whitespace-only completion."""


class MissingAgentError(SewError):
    """A workflow step names an agent with no known prompt."""


class InvalidWorkflowError(SewError):
    """An evolved workflow failed to parse or failed structural validation.

    Carries the raw document plus whichever diagnosis applies: a parse
    failure or a validity report.
    """

    def __init__(self, message, doc=None, parse_failure=None, report=None):
        super().__init__(message)
        self.doc = doc
        self.parse_failure = parse_failure
        self.report = report


class NoCodeFoundError(SewError):
    """A completion contained neither a fenced code block nor a bare program."""


class SandboxSetupError(SewError):
    """The sandbox environment itself failed (not the candidate program)."""


class UnboundArgumentError(SewError):
    """A step argument has no binding at prompt-assembly time."""


class EmptyInputError(SewError):
    """An aggregate operation received an empty input list."""


class ConfigError(SewError):
    """A run configuration is missing, malformed, or references absent files."""
