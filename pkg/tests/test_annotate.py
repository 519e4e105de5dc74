import json

import pytest

from cadhist.annotate import (
    AnnotateError,
    AnnotationConfig,
    CompletionError,
    MockClient,
    PromptBundle,
    RecordingClient,
    ReplayClient,
    Role,
    annotate_program,
    build_bundle,
    is_canonical_program,
    read_batch_jsonl,
    run_batch,
    write_batch_jsonl,
)
from cadhist.parser import parse_program

DISC = """F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 20.00)
]);
F1 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 8.00);
"""


def test_canonical_corpus_recognized(corpus_canonical):
    for path in sorted(corpus_canonical.glob("*.fs")):
        program = parse_program(path.read_text(), "canonical")
        assert is_canonical_program(program), path.stem


def test_raw_programs_not_canonical(corpus_raw):
    flagged = 0
    for path in sorted(corpus_raw.glob("*.fs")):
        program = parse_program(path.read_text(), "raw")
        if not is_canonical_program(program):
            flagged += 1
    assert flagged == len(list(corpus_raw.glob("*.fs")))


def test_bundle_documentation_filtered_to_present_operations():
    bundle = build_bundle(parse_program(DISC, "canonical"), Role.ANNOTATOR)
    docs = "\n".join(bundle.documentation_excerpts)
    assert "Sketch" in docs
    assert "Extrude" in docs
    assert "Revolve" not in docs
    assert len(bundle.fewshot_examples) == 2


def test_bundle_user_message_sections():
    program = parse_program(DISC, "canonical")
    message = build_bundle(program, Role.ANNOTATOR).user_message()
    assert "# Operation reference" in message
    assert "# Examples" in message
    assert "# Program to describe" in message
    assert "# Draft to review" not in message
    review = build_bundle(program, Role.REVIEWER, draft="Initial text.").user_message()
    assert "# Draft to review\nInitial text." in review


def test_bundle_rejects_non_canonical_program():
    raw = parse_program(
        "b = Extrude(profile = [query(b, SKETCH_REGION, FACE)], depth = 4);", "raw"
    )
    with pytest.raises(AnnotateError, match="canonical"):
        build_bundle(raw, Role.ANNOTATOR)


def test_reviewer_bundle_requires_draft():
    program = parse_program(DISC, "canonical")
    with pytest.raises(AnnotateError, match="draft"):
        build_bundle(program, Role.REVIEWER)


def test_bundle_key_distinguishes_role_and_draft():
    program = parse_program(DISC, "canonical")
    annotate = build_bundle(program, Role.ANNOTATOR)
    review_a = build_bundle(program, Role.REVIEWER, draft="a")
    review_b = build_bundle(program, Role.REVIEWER, draft="b")
    keys = {annotate.key(), review_a.key(), review_b.key()}
    assert len(keys) == 3
    assert review_a.key() == build_bundle(program, Role.REVIEWER, draft="a").key()


def test_mock_client_is_deterministic():
    result_a = annotate_program("disc", DISC, MockClient())
    result_b = annotate_program("disc", DISC, MockClient())
    assert result_a.draft == result_b.draft
    assert result_a.reviewed == result_b.reviewed
    assert "Sketch, Extrude" in result_a.draft
    assert result_a.reviewed.startswith(result_a.draft)
    assert "Checked against the program." in result_a.reviewed


def test_retry_until_success():
    client = MockClient(failures_before_success=2)
    annotation = annotate_program(
        "disc", DISC, client, AnnotationConfig(retries=3)
    )
    assert annotation.attempts == {"annotator": 3, "reviewer": 3}


def test_retries_exhausted_raises():
    client = MockClient(failures_before_success=3)
    with pytest.raises(AnnotateError, match="annotator stage failed after 3 attempts"):
        annotate_program("disc", DISC, client, AnnotationConfig(retries=3))


def test_non_canonical_code_rejected_before_any_call():
    client = MockClient()
    with pytest.raises(AnnotateError, match="cannot parse"):
        annotate_program("bad", "b = Extrude(depth = 4 mm);", client)
    assert client.calls == 0


def test_record_then_replay_is_identical(tmp_path):
    recorder = RecordingClient(MockClient())
    live = annotate_program("disc", DISC, recorder)
    record_path = tmp_path / "responses.json"
    recorder.save(record_path)

    replayed = annotate_program("disc", DISC, ReplayClient.load(record_path))
    assert replayed.draft == live.draft
    assert replayed.reviewed == live.reviewed
    # two bundles were recorded, one per stage
    assert len(json.loads(record_path.read_text())) == 2


def test_replay_of_unseen_program_fails():
    client = ReplayClient({})
    with pytest.raises(AnnotateError, match="failed after"):
        annotate_program("disc", DISC, client, AnnotationConfig(retries=2))


def test_completion_error_is_retryable_error_type():
    with pytest.raises(CompletionError):
        ReplayClient({}).complete(
            PromptBundle("sys", (), (), DISC, Role.ANNOTATOR)
        )


def test_run_batch_preserves_order():
    items = [(f"item{i}", DISC) for i in range(6)]
    annotations = run_batch(items, MockClient(), AnnotationConfig(parallelism=3))
    assert [a.id for a in annotations] == [f"item{i}" for i in range(6)]


def test_run_batch_raises_first_error_by_input_position():
    items = [
        ("ok", DISC),
        ("bad1", "nonsense ("),
        ("bad2", "also nonsense ("),
    ]
    with pytest.raises(AnnotateError, match="bad1"):
        run_batch(items, MockClient())


def test_run_batch_empty():
    assert run_batch([], MockClient()) == []


def test_batch_jsonl_round_trip(tmp_path):
    annotations = run_batch([("a", DISC), ("b", DISC)], MockClient())
    path = tmp_path / "out.jsonl"
    write_batch_jsonl(path, annotations)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert set(first) == {"id", "code", "draft", "reviewed"}

    items = read_batch_jsonl(path)
    assert [i for i, _ in items] == ["a", "b"]
    assert items[0][1] == DISC


def test_read_batch_jsonl_missing_field(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"id": "x"}\n')
    with pytest.raises(AnnotateError, match="missing field"):
        read_batch_jsonl(path)
