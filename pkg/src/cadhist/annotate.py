"""Two-stage natural-language annotation of canonical programs.

An annotator model drafts a description of a design history; a reviewer
model refines the draft against the same context.  Prompt assembly is
deterministic: the system text and per-operation documentation ship as
package data, and only documentation for operations actually present in
the program is attached.

Completion backends plug in through a small client interface.  The mock
client is fully deterministic for tests, the recording/replay pair
captures and replays real sessions, and the HTTP client talks to any
chat-completions endpoint configured through environment variables
(CADHIST_LLM_ENDPOINT, CADHIST_LLM_API_KEY, CADHIST_LLM_MODEL); no
credentials ever live in files.
"""

from __future__ import annotations

import hashlib
import json
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .emitter import emit_program
from .model import (
    IMPLICIT_ENTITY_TYPES,
    OpKind,
    Program,
    RawExpr,
    Scalar,
    Unit,
    is_canonical_identifier,
    iter_values,
    sketch_entities,
    validate_structure,
)
from .normalize import rename_map
from .parser import parse_program


class Role(Enum):
    ANNOTATOR = "annotator"
    REVIEWER = "reviewer"


class CompletionError(Exception):
    """A completion attempt failed; the pipeline may retry."""


class AnnotateError(Exception):
    """The pipeline gave up or its input was unusable."""


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    documentation_excerpts: tuple[str, ...]
    fewshot_examples: tuple[tuple[str, str], ...]
    payload_code: str
    role: Role
    draft: str | None = None

    def key(self) -> str:
        """Stable digest identifying this request for record/replay."""
        blob = json.dumps(
            {"role": self.role.value, "code": self.payload_code, "draft": self.draft},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def user_message(self) -> str:
        parts = ["# Operation reference", *self.documentation_excerpts]
        if self.fewshot_examples:
            parts.append("# Examples")
            for code, text in self.fewshot_examples:
                parts.append(f"Program:\n{code}Description:\n{text}")
        parts.append(f"# Program to describe\n{self.payload_code}")
        if self.role is Role.REVIEWER:
            parts.append(f"# Draft to review\n{self.draft}")
        return "\n\n".join(parts)


# Small worked examples shared by both stages.
FEWSHOT_EXAMPLES: tuple[tuple[str, str], ...] = (
    (
        "F0 = Sketch(entities = [\n"
        "    S0: Circle(center = (0.00, 0.00), radius = 20.00)\n"
        "]);\n"
        "F1 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 8.00);\n",
        "A flat disc: a 40 mm circle extruded 8 mm.",
    ),
    (
        "F0 = Sketch(entities = [\n"
        "    S0: Line(start = (0.00, 0.00), end = (30.00, 0.00)),\n"
        "    S1: Line(start = (30.00, 0.00), end = (30.00, 15.00)),\n"
        "    S2: Line(start = (30.00, 15.00), end = (0.00, 15.00)),\n"
        "    S3: Line(start = (0.00, 15.00), end = (0.00, 0.00))\n"
        "]);\n"
        "F1 = Extrude(profile = [query(F0, SKETCH_REGION, FACE, originals = ["
        "query(S0, SKETCH_ENTITY, EDGE), query(S1, SKETCH_ENTITY, EDGE), "
        "query(S2, SKETCH_ENTITY, EDGE), query(S3, SKETCH_ENTITY, EDGE)])], "
        "depth = 5.00);\n",
        "A rectangular plate, 30 by 15 mm, 5 mm thick.",
    ),
)


def is_canonical_program(program: Program) -> bool:
    """True when the program is already in fully normalized form."""
    diags = validate_structure(program)
    if any(d.severity == "error" for d in diags):
        return False
    for feat in program.features:
        if not is_canonical_identifier(feat.id):
            return False
        for entity in sketch_entities(feat):
            if not is_canonical_identifier(entity.id):
                return False
            if isinstance(entity, IMPLICIT_ENTITY_TYPES):
                return False
        for value in feat.params.values():
            for v in iter_values(value):
                if isinstance(v, RawExpr):
                    return False
                if isinstance(v, Scalar) and v.unit not in (Unit.MM, Unit.DEG, Unit.NONE):
                    return False
    # Identifier numbering must match declaration order.
    return all(old == new for old, new in rename_map(program).items())


def _data_text(relative: str) -> str:
    return resources.files("cadhist").joinpath("data", relative).read_text("utf-8")


def _system_text(role: Role) -> str:
    name = "annotator_system.txt" if role is Role.ANNOTATOR else "reviewer_system.txt"
    return _data_text(name)


def _docs_for(program: Program) -> tuple[str, ...]:
    present = {feat.kind for feat in program.features}
    return tuple(
        _data_text(f"op_docs/{kind.value}.md")
        for kind in OpKind
        if kind in present
    )


def build_bundle(program: Program, role: Role, draft: str | None = None) -> PromptBundle:
    if not is_canonical_program(program):
        raise AnnotateError("only canonical programs can be annotated")
    if role is Role.REVIEWER and draft is None:
        raise AnnotateError("reviewer bundles need a draft")
    return PromptBundle(
        system_text=_system_text(role),
        documentation_excerpts=_docs_for(program),
        fewshot_examples=FEWSHOT_EXAMPLES,
        payload_code=emit_program(program),
        role=role,
        draft=draft,
    )


# ---------------------------------------------------------------------------
# Clients
# ---------------------------------------------------------------------------


class CompletionClient(ABC):
    @abstractmethod
    def complete(self, bundle: PromptBundle) -> str:
        """Return the model text for one prompt, or raise CompletionError."""


class MockClient(CompletionClient):
    """Deterministic offline stand-in.

    With failures_before_success > 0 each distinct request fails that
    many times first, which exercises the retry path.
    """

    def __init__(self, failures_before_success: int = 0):
        self.failures_before_success = failures_before_success
        self._attempts: dict[str, int] = {}
        self.calls = 0

    def complete(self, bundle: PromptBundle) -> str:
        self.calls += 1
        key = bundle.key()
        seen = self._attempts.get(key, 0)
        self._attempts[key] = seen + 1
        if seen < self.failures_before_success:
            raise CompletionError(f"simulated failure {seen + 1}")
        digest = key[:8]
        kinds = _kinds_in_code(bundle.payload_code)
        if bundle.role is Role.ANNOTATOR:
            return f"A part built with {kinds}. [{digest}]"
        return f"{bundle.draft} Checked against the program. [{digest}]"


def _kinds_in_code(code: str) -> str:
    present = [kind.value for kind in OpKind if f"= {kind.value}(" in code]
    return ", ".join(present) if present else "no operations"


class RecordingClient(CompletionClient):
    """Pass-through wrapper that captures request/response pairs."""

    def __init__(self, inner: CompletionClient):
        self.inner = inner
        self.records: dict[str, str] = {}

    def complete(self, bundle: PromptBundle) -> str:
        text = self.inner.complete(bundle)
        self.records[bundle.key()] = text
        return text

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.records, fh, indent=2, sort_keys=True)


class ReplayClient(CompletionClient):
    """Serves previously recorded responses; unseen requests fail."""

    def __init__(self, records: dict[str, str]):
        self.records = dict(records)

    @classmethod
    def load(cls, path) -> "ReplayClient":
        with open(path) as fh:
            return cls(json.load(fh))

    def complete(self, bundle: PromptBundle) -> str:
        try:
            return self.records[bundle.key()]
        except KeyError as exc:
            raise CompletionError(f"no recorded response for {bundle.key()}") from exc


class HttpClient(CompletionClient):
    """Chat-completions endpoint configured entirely from the environment."""

    ENDPOINT_VAR = "CADHIST_LLM_ENDPOINT"
    API_KEY_VAR = "CADHIST_LLM_API_KEY"
    MODEL_VAR = "CADHIST_LLM_MODEL"

    def __init__(self, timeout: float = 120.0):
        endpoint = os.environ.get(self.ENDPOINT_VAR)
        if not endpoint:
            raise AnnotateError(f"{self.ENDPOINT_VAR} is not set")
        self.endpoint = endpoint
        self.model = os.environ.get(self.MODEL_VAR, "default")
        self.timeout = timeout

    def complete(self, bundle: PromptBundle) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.API_KEY_VAR)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_message()},
            ],
        }
        try:
            response = requests.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            raise CompletionError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnotationConfig:
    retries: int = 3
    parallelism: int = 4


@dataclass(frozen=True)
class Annotation:
    id: str
    code: str
    draft: str
    reviewed: str
    attempts: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "code": self.code,
            "draft": self.draft,
            "reviewed": self.reviewed,
        }


def _complete_with_retry(
    client: CompletionClient, bundle: PromptBundle, config: AnnotationConfig, stage: str
) -> tuple[str, int]:
    last: CompletionError | None = None
    for attempt in range(1, config.retries + 1):
        try:
            return client.complete(bundle), attempt
        except CompletionError as exc:
            last = exc
    raise AnnotateError(
        f"{stage} stage failed after {config.retries} attempts: {last}"
    )


def annotate_program(
    item_id: str,
    code: str,
    client: CompletionClient,
    config: AnnotationConfig = AnnotationConfig(),
) -> Annotation:
    """Draft and review one program."""
    try:
        program = parse_program(code, "canonical", source_name=item_id)
    except Exception as exc:
        raise AnnotateError(f"{item_id}: cannot parse program: {exc}") from exc
    draft_bundle = build_bundle(program, Role.ANNOTATOR)
    draft, draft_attempts = _complete_with_retry(client, draft_bundle, config, "annotator")
    review_bundle = build_bundle(program, Role.REVIEWER, draft=draft)
    reviewed, review_attempts = _complete_with_retry(client, review_bundle, config, "reviewer")
    return Annotation(
        id=item_id,
        code=code,
        draft=draft,
        reviewed=reviewed,
        attempts={"annotator": draft_attempts, "reviewer": review_attempts},
    )


def run_batch(
    items: list[tuple[str, str]],
    client: CompletionClient,
    config: AnnotationConfig = AnnotationConfig(),
) -> list[Annotation]:
    """Annotate (id, code) items concurrently, preserving input order."""
    if not items:
        return []
    results: list[Annotation | None] = [None] * len(items)
    workers = max(1, min(config.parallelism, len(items)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        future_to_idx = {
            pool.submit(annotate_program, item_id, code, client, config): idx
            for idx, (item_id, code) in enumerate(items)
        }
        errors: list[tuple[int, Exception]] = []
        for future, idx in future_to_idx.items():
            try:
                results[idx] = future.result()
            except Exception as exc:
                errors.append((idx, exc))
    if errors:
        errors.sort(key=lambda pair: pair[0])
        raise errors[0][1]
    return [r for r in results if r is not None]


def read_batch_jsonl(path) -> list[tuple[str, str]]:
    items = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            try:
                items.append((str(record["id"]), record["code"]))
            except KeyError as exc:
                raise AnnotateError(f"line {line_no}: missing field {exc}") from exc
    return items


def write_batch_jsonl(path, annotations: list[Annotation]) -> None:
    with open(path, "w") as fh:
        for annotation in annotations:
            fh.write(json.dumps(annotation.as_dict()) + "\n")
