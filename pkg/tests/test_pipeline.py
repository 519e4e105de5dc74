import pytest

from cadhist.emitter import emit_program
from cadhist.normalize import (
    DEFAULT_PASS_ORDER,
    PASSES,
    FAILED,
    VERIFIED_GEOMETRIC,
    VERIFIED_STRUCTURAL,
    NormalizeError,
    PassConfig,
    normalize,
    validate_equivalence,
)
from cadhist.parser import parse_program


def test_pass_registry_matches_declared_order():
    assert tuple(PASSES) == DEFAULT_PASS_ORDER


def test_normalize_is_a_fixed_point_on_corpus(corpus_canonical, corpus_raw):
    for path in sorted(corpus_canonical.glob("*.fs")) + sorted(corpus_raw.glob("*.fs")):
        dialect = "canonical" if path.parent.name == "canonical" else "raw"
        once = normalize(parse_program(path.read_text(), dialect)).program
        twice = normalize(once).program
        assert emit_program(twice) == emit_program(once), path.stem


def test_each_pass_is_idempotent_on_corpus(corpus_raw):
    config = PassConfig()
    for path in sorted(corpus_raw.glob("*.fs")):
        program = parse_program(path.read_text(), "raw")
        for name in DEFAULT_PASS_ORDER:
            program, _ = PASSES[name](program, config)
            again, _ = PASSES[name](program, config)
            assert again == program, f"{path.stem}: {name} not idempotent"


def test_enabled_passes_must_cover_the_pipeline():
    program = parse_program("F0 = Sketch(entities = [\n    S0: Circle(center = (0.00, 0.00), radius = 1.00)\n]);\n", "canonical")
    with pytest.raises(ValueError, match="permutation"):
        normalize(program, PassConfig(enabled_passes=("round_precision",)))
    with pytest.raises(ValueError, match="permutation"):
        normalize(
            program,
            PassConfig(enabled_passes=DEFAULT_PASS_ORDER + ("round_precision",)),
        )


def test_reordered_passes_accepted():
    program = parse_program(
        "F0 = Sketch(entities = [\n    S0: Circle(center = (0.00, 0.00), radius = 1.00)\n]);\n",
        "canonical",
    )
    order = tuple(reversed(DEFAULT_PASS_ORDER))
    normalize(program, PassConfig(enabled_passes=order))


def test_structurally_invalid_program_raises():
    program = parse_program(
        "b = Extrude(profile = [query(ghost, SKETCH_REGION, FACE)], depth = 4);",
        "raw",
    )
    with pytest.raises(NormalizeError, match="ghost"):
        normalize(program)


def test_pass_reports_cover_every_pass_in_order():
    result = normalize(
        parse_program(
            """junk = Sketch(entities = [
    z: Circle(center = (50, 50), radius = 1)
]);
s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5 + 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 1 in);
""",
            "raw",
        )
    )
    assert tuple(r.name for r in result.reports) == DEFAULT_PASS_ORDER
    by_name = {r.name: r for r in result.reports}
    assert by_name["eliminate_dead_code"].features_changed == 1
    assert "junk: removed" in by_name["eliminate_dead_code"].notes
    assert by_name["rename_identifiers"].identifiers_renamed == 3
    assert by_name["fold_numeric_expressions"].features_changed >= 1


def test_report_dicts_are_json_shaped():
    result = normalize(
        parse_program(
            """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
""",
            "raw",
        )
    )
    data = result.reports[0].as_dict()
    assert set(data) == {
        "name",
        "features_changed",
        "entities_removed",
        "identifiers_renamed",
        "notes",
    }


def test_validate_geometric_on_clean_normalization(corpus_raw, corpus_golden):
    raw = parse_program((corpus_raw / "r01_units.fs").read_text(), "raw")
    golden = parse_program((corpus_golden / "r01_units.fs").read_text(), "canonical")
    result = validate_equivalence(raw, golden)
    assert result.status == VERIFIED_GEOMETRIC
    assert result.verified
    assert result.chamfer == 0.0


def test_validate_structural_outside_geometric_subset(corpus_raw, corpus_golden):
    raw = parse_program((corpus_raw / "r12_loft_structural.fs").read_text(), "raw")
    golden = parse_program(
        (corpus_golden / "r12_loft_structural.fs").read_text(), "canonical"
    )
    result = validate_equivalence(raw, golden)
    assert result.status == VERIFIED_STRUCTURAL
    assert result.verified
    assert result.chamfer is None


def test_validate_fails_on_changed_geometry(corpus_raw):
    raw = parse_program((corpus_raw / "r01_units.fs").read_text(), "raw")
    tampered = normalize(raw).program
    text = emit_program(tampered).replace("depth = 25.40", "depth = 30.00")
    result = validate_equivalence(raw, parse_program(text, "canonical"))
    assert result.status == FAILED
    assert not result.verified
    assert result.chamfer is not None and result.chamfer > 1e-6
    assert "geometry moved" in result.detail


def test_validate_fails_on_invalid_raw_program():
    raw = parse_program(
        "b = Extrude(profile = [query(ghost, SKETCH_REGION, FACE)], depth = 4);",
        "raw",
    )
    result = validate_equivalence(raw, raw)
    assert result.status == FAILED
    assert "invalid" in result.detail


def test_validate_fails_on_structural_mismatch(corpus_raw):
    raw = parse_program((corpus_raw / "r12_loft_structural.fs").read_text(), "raw")
    normalized = normalize(raw).program
    # drop the last feature; the erased feature multisets no longer agree
    import dataclasses

    tampered = dataclasses.replace(normalized, features=normalized.features[:-1])
    result = validate_equivalence(raw, tampered)
    assert result.status == FAILED
    assert "feature lists differ" in result.detail
