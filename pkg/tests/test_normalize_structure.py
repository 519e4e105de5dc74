from cadhist.emitter import emit_program
from cadhist.model import OpKind, OriginalSet
from cadhist.normalize import (
    PassConfig,
    normalize,
    pass_canonicalize_queries,
    pass_eliminate_dead_code,
    pass_simplify_operations,
    rename_map,
)
from cadhist.parser import parse_program

CONFIG = PassConfig()


def _raw(text):
    return parse_program(text, "raw")


def _norm_text(text):
    return emit_program(normalize(_raw(text)).program)


BASE = """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4{extra});
"""


def test_default_parameters_elided():
    text = _norm_text(
        BASE.format(extra=", opposite_depth = 0, midplane = false, draft = 0")
    )
    assert "opposite_depth" not in text
    assert "midplane" not in text
    assert "draft" not in text


def test_near_default_elided_at_output_precision():
    # 0.004 rounds to 0.00 at two decimals, so it is already the default.
    text = _norm_text(BASE.format(extra=", draft = 0.004"))
    assert "draft" not in text


def test_non_default_values_survive():
    text = _norm_text(BASE.format(extra=", draft = 5"))
    assert "draft = 5.00" in text


def test_symmetric_extrude_merges_to_midplane():
    text = _norm_text(BASE.format(extra=", opposite_depth = 4"))
    assert "depth = 8.00" in text
    assert "midplane = true" in text
    assert "opposite_depth" not in text


def test_symmetric_merge_uses_output_precision_equality():
    text = _norm_text(BASE.format(extra=" + 0.001, opposite_depth = 4"))
    assert "depth = 8.00" in text
    assert "midplane = true" in text


def test_asymmetric_extrude_not_merged():
    text = _norm_text(BASE.format(extra=", opposite_depth = 10"))
    assert "opposite_depth = 10.00" in text
    assert "midplane" not in text


def test_single_target_union_dissolves():
    text = _norm_text(
        """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
u = Boolean(mode = union, targets = [query(e, CREATED, BODY)]);
f = Fillet(entities = [query(u, CREATED, EDGE)], radius = 1);
"""
    )
    assert "Boolean" not in text
    # the fillet now points at the extrude directly
    assert "Fillet(entities = [query(F1, CREATED, EDGE)]" in text


def test_chained_single_target_unions_dissolve():
    program, report = pass_simplify_operations(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
u1 = Boolean(mode = union, targets = [query(e, CREATED, BODY)]);
u2 = Boolean(mode = union, targets = [query(u1, CREATED, BODY)]);
f = Fillet(entities = [query(u2, CREATED, EDGE)], radius = 1);
"""
        ),
        CONFIG,
    )
    kinds = [f.kind for f in program.features]
    assert OpKind.BOOLEAN not in kinds
    fillet = program.features[-1]
    assert fillet.params["entities"].items[0].op_id == "e"
    assert len(report.notes) == 2


def test_two_target_union_kept():
    program, _ = pass_simplify_operations(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (-20, 0), radius = 5),
    b: Circle(center = (20, 0), radius = 5)
]);
e1 = Extrude(profile = [query(s, SKETCH_REGION, FACE, originals = [query(a, SKETCH_ENTITY, EDGE)])], depth = 4);
e2 = Extrude(profile = [query(s, SKETCH_REGION, FACE, originals = [query(b, SKETCH_ENTITY, EDGE)])], depth = 4);
u = Boolean(mode = union, targets = [query(e1, CREATED, BODY), query(e2, CREATED, BODY)]);
"""
        ),
        CONFIG,
    )
    assert any(f.kind is OpKind.BOOLEAN for f in program.features)


def test_subtract_single_target_kept():
    program, _ = pass_simplify_operations(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
u = Boolean(mode = subtract, targets = [query(e, CREATED, BODY)]);
"""
        ),
        CONFIG,
    )
    assert any(f.kind is OpKind.BOOLEAN for f in program.features)


def test_unconsumed_sketch_removed():
    text = _norm_text(
        """scrap = Sketch(entities = [
    x: Circle(center = (90, 90), radius = 1)
]);
s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
"""
    )
    assert "90.00" not in text
    assert text.count("Sketch") == 1


def test_unconsumed_plane_removed():
    program, report = pass_eliminate_dead_code(
        _raw(
            """p = ConstructionPlane(base = XY, offset = 30);
s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
"""
        ),
        CONFIG,
    )
    assert [f.kind for f in program.features] == [OpKind.SKETCH, OpKind.EXTRUDE]
    assert report.features_changed == 1


def test_consumed_plane_survives():
    program, _ = pass_eliminate_dead_code(
        _raw(
            """p = ConstructionPlane(base = XY, offset = 30);
s = Sketch(plane = query(p, CREATED, FACE), entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
"""
        ),
        CONFIG,
    )
    assert len(program.features) == 3


def test_delete_of_sole_body_erases_whole_chain():
    program, _ = pass_eliminate_dead_code(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
d = DeleteBody(targets = [query(e, CREATED, BODY)]);
"""
        ),
        CONFIG,
    )
    assert program.features == ()


def test_delete_body_survives_with_live_target(corpus_canonical):
    # A copy transform keeps the deleted body's producer alive, so the
    # deletion still has an effect and must be kept.
    text = (corpus_canonical / "c09_delete_live.fs").read_text()
    program, _ = pass_eliminate_dead_code(
        parse_program(text, "canonical"), CONFIG
    )
    assert [f.kind for f in program.features] == [
        OpKind.SKETCH,
        OpKind.EXTRUDE,
        OpKind.TRANSFORM,
        OpKind.DELETE_BODY,
    ]


def test_delete_body_targets_restricted_to_live():
    program, _ = pass_eliminate_dead_code(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (-20, 0), radius = 5),
    b: Circle(center = (20, 0), radius = 5)
]);
e1 = Extrude(profile = [query(s, SKETCH_REGION, FACE, originals = [query(a, SKETCH_ENTITY, EDGE)])], depth = 4);
e2 = Extrude(profile = [query(s, SKETCH_REGION, FACE, originals = [query(b, SKETCH_ENTITY, EDGE)])], depth = 4);
t = Transform(entities = [query(e1, CREATED, BODY)], translation = (0, 0, 20), copy = true);
d = DeleteBody(targets = [query(e1, CREATED, BODY), query(e2, CREATED, BODY)]);
"""
        ),
        CONFIG,
    )
    delete = program.features[-1]
    assert delete.kind is OpKind.DELETE_BODY
    targets = delete.params["targets"].items
    assert [q.op_id for q in targets] == ["e1"]


def test_stray_entity_removed_from_restricted_sketch(corpus_raw, corpus_golden):
    raw = (corpus_raw / "r07_dead_entity.fs").read_text()
    golden = (corpus_golden / "r07_dead_entity.fs").read_text()
    assert _norm_text(raw) == golden
    assert "stray" not in _norm_text(raw)


def test_whole_sketch_query_keeps_all_entities():
    text = _norm_text(
        """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 8),
    stray: Line(start = (20, 0), end = (30, 0))
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
"""
    )
    assert "Line" in text


def test_rename_assigns_declaration_order():
    program = _raw(
        """outer = Sketch(entities = [
    ring: Circle(center = (0, 0), radius = 9),
    bore: Circle(center = (0, 0), radius = 3)
]);
body = Extrude(profile = [query(outer, SKETCH_REGION, FACE)], depth = 4);
"""
    )
    assert rename_map(program) == {
        "outer": "F0",
        "ring": "S0",
        "bore": "S1",
        "body": "F1",
    }


def test_rename_is_identity_on_canonical_corpus(corpus_canonical):
    for path in sorted(corpus_canonical.glob("*.fs")):
        program = parse_program(path.read_text(), "canonical")
        mapping = rename_map(program)
        assert all(old == new for old, new in mapping.items()), path.stem


def test_entity_counter_spans_sketches():
    program = _raw(
        """s1 = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 5)
]);
s2 = Sketch(entities = [
    b: Circle(center = (9, 0), radius = 2)
]);
e = Extrude(profile = [query(s1, SKETCH_REGION, FACE)], depth = 4);
"""
    )
    mapping = rename_map(program)
    assert mapping["a"] == "S0"
    assert mapping["b"] == "S1"


def test_canonicalize_merges_and_sorts_originals():
    program, _ = pass_canonicalize_queries(
        _raw(
            "e = Extrude(profile = [query(F0, SKETCH_REGION, FACE, "
            "originals = [query(S10, SKETCH_ENTITY, EDGE)], "
            "originals = [query(S2, SKETCH_ENTITY, EDGE), query(S10, SKETCH_ENTITY, EDGE)])], "
            "depth = 4);"
        ),
        CONFIG,
    )
    query = program.features[0].params["profile"].items[0]
    assert len(query.disambiguation) == 1
    originals = query.disambiguation[0]
    assert isinstance(originals, OriginalSet)
    assert [q.op_id for q in originals.queries] == ["S2", "S10"]


def test_canonicalize_augments_ambiguous_region_query():
    text = _norm_text(
        """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 9),
    b: Circle(center = (0, 0), radius = 3)
]);
e = Extrude(profile = [query(s, SKETCH_REGION, FACE)], depth = 4);
"""
    )
    assert (
        "originals = [query(S0, SKETCH_ENTITY, EDGE), query(S1, SKETCH_ENTITY, EDGE)]"
        in text
    )


def test_single_entity_sketch_not_augmented():
    text = _norm_text(BASE.format(extra=""))
    assert "originals" not in text


def test_body_query_not_augmented():
    program, _ = pass_canonicalize_queries(
        _raw(
            """s = Sketch(entities = [
    a: Circle(center = (0, 0), radius = 9),
    b: Circle(center = (0, 0), radius = 3)
]);
d = DeleteBody(targets = [query(s, CREATED, BODY)]);
"""
        ),
        CONFIG,
    )
    target = program.features[1].params["targets"].items[0]
    assert target.disambiguation == ()
