from decimal import Decimal

import pytest

from cadhist.emitter import emit_program
from cadhist.lexer import ParseError
from cadhist.model import (
    Arc,
    ExprBinary,
    ExprNum,
    RawExpr,
    Scalar,
    SketchText,
    Unit,
    sketch_entities,
)
from cadhist.parser import parse_program

DISC = """F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 20.00)
]);
F1 = Extrude(profile = [query(F0, SKETCH_REGION, FACE)], depth = 8.00);
"""


def test_emit_parse_is_byte_identity():
    assert emit_program(parse_program(DISC)) == DISC


def test_emit_parse_identity_on_canonical_corpus(corpus_canonical):
    files = sorted(corpus_canonical.glob("*.fs"))
    assert len(files) >= 30
    for path in files:
        text = path.read_text()
        assert emit_program(parse_program(text, "canonical")) == text, path.stem


def test_raw_corpus_parses_and_reemits_stably(corpus_raw):
    # Raw programs are not canonical, but emit/parse must still agree
    # with itself: emitting a parsed raw program and reparsing it in the
    # raw dialect gives the same tree.
    for path in sorted(corpus_raw.glob("*.fs")):
        program = parse_program(path.read_text(), "raw")
        text = emit_program(program)
        assert parse_program(text, "raw") == program


def test_parse_error_reports_line_and_column():
    with pytest.raises(ParseError) as excinfo:
        parse_program("F0 = Extrude(depth = );", "canonical")
    assert excinfo.value.line == 1
    assert excinfo.value.column == 22
    assert "line 1, column 22" in str(excinfo.value)


def test_unknown_operation_rejected():
    with pytest.raises(ParseError, match="unknown operation"):
        parse_program("F0 = Extrusion(depth = 5.00);", "canonical")


def test_duplicate_parameter_rejected():
    with pytest.raises(ParseError, match="duplicate parameter"):
        parse_program("F0 = Extrude(depth = 5.00, depth = 6.00);", "canonical")


def test_canonical_rejects_unit_suffixes():
    with pytest.raises(ParseError, match="unit suffix"):
        parse_program("F0 = Extrude(depth = 5 mm);", "canonical")


def test_canonical_rejects_arithmetic():
    with pytest.raises(ParseError, match="arithmetic operator"):
        parse_program("F0 = Extrude(depth = 5 + 3);", "canonical")


def test_canonical_rejects_opaque_identifiers():
    with pytest.raises(ParseError, match="not allowed in canonical"):
        parse_program("body = Extrude(depth = 5.00);", "canonical")
    with pytest.raises(ParseError, match="not allowed in canonical"):
        parse_program(
            "F0 = Extrude(profile = [query(base, SKETCH_REGION, FACE)], depth = 5.00);",
            "canonical",
        )


def test_canonical_rejects_implicit_entities():
    text = """F0 = Sketch(entities = [
    S0: LineByDirection(origin = (0.00, 0.00), direction = (1.00, 0.00), length = 5.00)
]);
"""
    with pytest.raises(ParseError, match="raw programs"):
        parse_program(text, "canonical")
    parse_program(text, "raw")  # fine there


def test_raw_unit_suffix_parses_to_tagged_scalar():
    program = parse_program("b = Extrude(depth = 2.5 cm);", "raw")
    depth = program.features[0].params["depth"]
    assert depth == Scalar(Decimal("2.5"), Unit.CM)


def test_raw_expression_parses_to_tree():
    program = parse_program("b = Extrude(depth = 5 + 3 * 2);", "raw")
    depth = program.features[0].params["depth"]
    assert isinstance(depth, RawExpr)
    node = depth.root
    assert isinstance(node, ExprBinary) and node.op == "+"
    assert isinstance(node.right, ExprBinary) and node.right.op == "*"


def test_raw_parenthesized_unit_multiplies():
    program = parse_program("b = Extrude(depth = (5 + 3) mm);", "raw")
    node = program.features[0].params["depth"].root
    assert isinstance(node, ExprBinary) and node.op == "*"
    assert node.right == ExprNum(Decimal(1), Unit.MM)


def test_unitless_scalar_takes_slot_default_unit():
    program = parse_program("b = Extrude(depth = 7, draft = 3);", "raw")
    assert program.features[0].params["depth"].unit is Unit.MM
    assert program.features[0].params["draft"].unit is Unit.DEG


def test_negative_numbers_parse_in_both_dialects():
    canonical = parse_program(
        """F0 = Sketch(entities = [
    S0: Line(start = (-10.00, -5.00), end = (0.00, 0.00))
]);
""",
        "canonical",
    )
    line = sketch_entities(canonical.features[0])[0]
    assert line.start.components[0].value == Decimal("-10.00")


def test_text_entity_content_and_height_default():
    program = parse_program(
        's = Sketch(entities = [ t: Text(content = "A-1", anchor = (0, 0)) ]);', "raw"
    )
    text = sketch_entities(program.features[0])[0]
    assert isinstance(text, SketchText)
    assert text.content.value == "A-1"
    assert text.height == Scalar(Decimal("10"), Unit.MM)


def test_unknown_entity_field_rejected():
    with pytest.raises(ParseError, match="unknown field"):
        parse_program(
            "s = Sketch(entities = [ c: Circle(center = (0, 0), size = 4) ]);", "raw"
        )


def test_missing_entity_field_rejected():
    with pytest.raises(ParseError, match="missing field"):
        parse_program("s = Sketch(entities = [ c: Circle(center = (0, 0)) ]);", "raw")


def test_comments_are_skipped():
    program = parse_program(
        """// head comment
F0 = Sketch(entities = [
    S0: Circle(center = (0.00, 0.00), radius = 1.00) // trailing
]);
""",
        "canonical",
    )
    assert len(program.features) == 1


def test_arc_three_point_form():
    program = parse_program(
        """F0 = Sketch(entities = [
    S0: Arc(start = (10.00, 0.00), mid = (0.00, 10.00), end = (-10.00, 0.00))
]);
""",
        "canonical",
    )
    arc = sketch_entities(program.features[0])[0]
    assert isinstance(arc, Arc)
