from cadhist.model import (
    EdgeReason,
    dependency_graph,
    has_errors,
    identifier_sort_key,
    is_canonical_identifier,
    validate_structure,
)
from cadhist.parser import parse_program


def test_canonical_identifier_predicate():
    assert is_canonical_identifier("F0")
    assert is_canonical_identifier("S12")
    assert is_canonical_identifier("E3")
    assert is_canonical_identifier("V100")
    assert not is_canonical_identifier("F01")   # no leading zeros
    assert not is_canonical_identifier("f0")
    assert not is_canonical_identifier("F")
    assert not is_canonical_identifier("base")
    assert not is_canonical_identifier("FX2")


def test_identifier_sort_key_orders_families_then_indices():
    ids = ["S2", "F10", "V0", "E1", "F2", "custom", "S0"]
    ordered = sorted(ids, key=identifier_sort_key)
    assert ordered == ["F2", "F10", "S0", "S2", "E1", "V0", "custom"]


def test_duplicate_identifier_is_an_error():
    program = parse_program(
        """
F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 5.00)
]);
F0 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 2.00);
""",
        "canonical",
    )
    diags = validate_structure(program)
    assert has_errors(diags)
    assert any("duplicate" in d.message for d in diags)


def test_forward_reference_is_an_error():
    program = parse_program(
        """
F0 = Extrude(profile = [query(F1, SKETCH_REGION, FACE)], depth = 2.00);
F1 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 5.00)
]);
""",
        "canonical",
    )
    diags = validate_structure(program)
    assert has_errors(diags)
    assert any("F1" in d.message for d in diags)


def test_unresolved_reference_is_an_error():
    program = parse_program(
        "F0 = Extrude(profile = [query(F9, SKETCH_REGION, FACE)], depth = 2.00);",
        "canonical",
    )
    diags = validate_structure(program)
    assert has_errors(diags)


def test_plane_query_must_target_construction_plane():
    program = parse_program(
        """
F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 5.00)
]);
F1 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 2.00);
F2 = Sketch(plane = query(F1, CREATED, FACE), entities = [
    S1: Circle(center = (0.00, 0.00), radius = 2.00)
]);
F3 = Extrude(profile = [query(F2, SKETCH_REGION, FACE)], depth = 1.00);
""",
        "canonical",
    )
    diags = validate_structure(program)
    assert has_errors(diags)
    assert any("F2" == d.feature_id for d in diags if d.severity == "error")


def test_missing_required_parameter_is_an_error():
    program = parse_program("F0 = Extrude(depth = 2.00);", "canonical")
    diags = validate_structure(program)
    assert has_errors(diags)
    assert any("profile" in d.message for d in diags)


def test_unknown_parameter_is_an_error():
    program = parse_program(
        "F0 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 2.00, twist = 5.00);",
        "canonical",
    )
    # self-reference aside, the stray parameter must be flagged
    diags = validate_structure(program)
    assert any("unknown parameter twist" in d.message for d in diags)


def test_empty_sketch_is_an_error():
    program = parse_program("F0 = Sketch(entities = []);", "canonical")
    assert has_errors(validate_structure(program))


def test_degenerate_entities_are_errors():
    zero_line = parse_program(
        """
F0 = Sketch(entities = [
    S0: Line(start = (1.00, 1.00), end = (1.00, 1.00))
]);
""",
        "canonical",
    )
    assert has_errors(validate_structure(zero_line))

    collinear_arc = parse_program(
        """
F0 = Sketch(entities = [
    S0: Arc(start = (0.00, 0.00), mid = (5.00, 0.00), end = (10.00, 0.00))
]);
""",
        "canonical",
    )
    assert has_errors(validate_structure(collinear_arc))

    negative_radius = parse_program(
        """
F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = -4.00)
]);
""",
        "canonical",
    )
    assert has_errors(validate_structure(negative_radius))


def test_dependency_graph_reasons():
    program = parse_program(
        """
F0 = ConstructionPlane(base = XY, offset = 10.00);
F1 = Sketch(plane = query(F0, CREATED, FACE), entities = [
    S0: Circle(center = (0.00, 0.00), radius = 5.00)
]);
F2 = Extrude(profile = [query(F1, SKETCH_REGION, FACE)], depth = 2.00);
""",
        "canonical",
    )
    graph = dependency_graph(program)
    reasons = {(e.consumer, e.producer): e.reason for e in graph.edges}
    assert reasons[("F1", "F0")] == EdgeReason.PLANE_REFERENCE
    assert reasons[("F2", "F1")] == EdgeReason.QUERY_REFERENCE


def test_dependency_graph_is_acyclic_on_corpus(corpus_canonical):
    for path in sorted(corpus_canonical.glob("*.fs")):
        program = parse_program(path.read_text(), "canonical", source_name=path.stem)
        graph = dependency_graph(program)
        order = {f.id: i for i, f in enumerate(program.features)}
        for edge in graph.edges:
            assert order[edge.consumer] > order[edge.producer], path.stem
