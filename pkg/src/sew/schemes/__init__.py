"""Bidirectional text <-> WorkflowIR conversion for the five schemes.

Every scheme has a published canonical grammar (see ``docs/formats/``).
Parsing is strict by design: malformed or trailing content fails instead
of being repaired, because the validity-rate metrics depend on malformed
LLM output counting as a failure. Serialization always emits the canonical
form, and ``parse(serialize(w, s)) == w`` holds for every structurally
valid workflow and every scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import SewError, UnserializableError
from ..ir import WorkflowIR, is_token, topo_order


class Scheme(str, Enum):
    """Closed set of the five supported representation schemes."""

    BPMN = "bpmn"
    CORE = "core"
    PYSTEPS = "pysteps"
    YAML = "yaml"
    PSEUDO = "pseudo"


@dataclass(frozen=True)
class WorkflowDoc:
    """A raw workflow document tagged with the scheme it claims to be in."""

    text: str
    scheme: Scheme


class ParseFailure(SewError):
    """A document does not conform to its scheme's grammar.

    ``category`` distinguishes lexical failures (bad characters, malformed
    lines or tokens) from structural ones (well-formed pieces arranged
    illegally). ``line``/``column`` are 1-based and point into the source.
    """

    def __init__(self, scheme: Scheme, line: int, column: int, reason: str, category: str = "lexical"):
        super().__init__(f"{scheme.value} parse failure at {line}:{column}: {reason}")
        self.scheme = scheme
        self.line = line
        self.column = column
        self.reason = reason
        self.category = category


from . import bpmn, corelang, pseudo, pysteps, yamlflow  # noqa: E402

_PARSERS = {
    Scheme.BPMN: bpmn.parse_text,
    Scheme.CORE: corelang.parse_text,
    Scheme.PYSTEPS: pysteps.parse_text,
    Scheme.YAML: yamlflow.parse_text,
    Scheme.PSEUDO: pseudo.parse_text,
}

_SERIALIZERS = {
    Scheme.BPMN: bpmn.serialize_ir,
    Scheme.CORE: corelang.serialize_ir,
    Scheme.PYSTEPS: pysteps.serialize_ir,
    Scheme.YAML: yamlflow.serialize_ir,
    Scheme.PSEUDO: pseudo.serialize_ir,
}


def parse(doc: WorkflowDoc) -> WorkflowIR:
    """Parse a document into the IR, tagging it with the source scheme.

    Raises :class:`ParseFailure` on any grammar violation, including an
    empty document and content after the workflow body.
    """
    if not doc.text.strip():
        raise ParseFailure(doc.scheme, 1, 1, "document is empty")
    ir = _PARSERS[doc.scheme](doc.text)
    return WorkflowIR(steps=ir.steps, scheme_hint=doc.scheme)


def serialize(w: WorkflowIR, scheme: Scheme) -> WorkflowDoc:
    """Emit the canonical text of ``w`` in the given scheme.

    Requires the structural rules to hold (non-empty, unique outputs,
    def-before-use); the terminal-coder rule is not needed to serialize.
    Raises :class:`UnserializableError` if any identifier cannot be
    written in the target grammar.
    """
    topo_order(w)  # raises WorkflowOrderError on structural problems
    _check_identifiers(w, scheme)
    return WorkflowDoc(text=_SERIALIZERS[scheme](w), scheme=scheme)


def transcode(doc: WorkflowDoc, target: Scheme) -> WorkflowDoc:
    """Re-express a document in another scheme via the IR."""
    return serialize(parse(doc), target)


def _check_identifiers(w: WorkflowIR, scheme: Scheme) -> None:
    # All five canonical grammars carry identifiers of the same token
    # shape; anything else cannot be round-tripped and is refused.
    for i, step in enumerate(w.steps):
        for kind, value in (("name", step.name), ("output", step.output)):
            if not is_token(value):
                raise UnserializableError(
                    f"step {i}: {kind} {value!r} cannot be written in {scheme.value}"
                )
        for arg in step.args:
            if not is_token(arg):
                raise UnserializableError(
                    f"step {i}: argument {arg!r} cannot be written in {scheme.value}"
                )
