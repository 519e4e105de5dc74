import re

import pytest

from cadhist.emitter import emit_program
from cadhist.model import Arc, Line, sketch_entities
from cadhist.normalize import NormalizeError, normalize
from cadhist.parser import parse_program


def _wrap_depth(depth_text, extra_params=""):
    return (
        "sk = Sketch(entities = [\n"
        "    a: Circle(center = (0, 0), radius = 5)\n"
        "]);\n"
        "b = Extrude(profile = [query(sk, SKETCH_REGION, FACE)], "
        f"depth = {depth_text}{extra_params});\n"
    )


def _wrap_entity(entity_text):
    # The extrude keeps the sketch alive through dead-code elimination.
    return (
        "sk = Sketch(entities = [\n"
        f"    a: {entity_text}\n"
        "]);\n"
        "b = Extrude(profile = [query(sk, SKETCH_REGION, FACE)], depth = 4);\n"
    )


def _normalized(raw_text):
    return normalize(parse_program(raw_text, "raw")).program


def _emitted_depth(depth_text, extra_params=""):
    text = emit_program(_normalized(_wrap_depth(depth_text, extra_params)))
    match = re.search(r"depth = ([-0-9.]+)\)", text)
    assert match, text
    return match.group(1)


def _entity(entity_text):
    program = _normalized(_wrap_entity(entity_text))
    return sketch_entities(program.features[0])[0], emit_program(program)


def test_unit_conversions_to_millimetres():
    assert _emitted_depth("2.5 cm") == "25.00"
    assert _emitted_depth("1 in") == "25.40"
    assert _emitted_depth("1 ft") == "304.80"
    assert _emitted_depth("0.05 m") == "50.00"
    assert _emitted_depth("7") == "7.00"


def test_radians_convert_to_degrees():
    text = emit_program(_normalized(_wrap_depth("5", ", draft = 1 rad")))
    assert "draft = 57.30" in text


def test_expression_folding():
    assert _emitted_depth("12 + 3") == "15.00"
    assert _emitted_depth("30 / 2") == "15.00"
    assert _emitted_depth("0.5 * in") == "12.70"
    assert _emitted_depth("(5 + 3) mm") == "8.00"
    assert _emitted_depth("2 * 2.5 cm") == "50.00"
    assert _emitted_depth("-(3 - 8)") == "5.00"


def test_dimensionless_ratio_takes_slot_unit():
    # mm/mm cancels; the bare number is then read in the slot's unit.
    assert _emitted_depth("10 mm / 2 mm") == "5.00"


def test_mixed_dimension_addition_rejected():
    with pytest.raises(NormalizeError, match="cannot add length and angle"):
        _normalized(_wrap_depth("5 mm + 30 deg"))


def test_length_times_length_rejected():
    with pytest.raises(NormalizeError, match="cannot multiply length by length"):
        _normalized(_wrap_depth("2 mm * 3 mm"))


def test_division_by_zero_rejected():
    with pytest.raises(NormalizeError, match="division by zero"):
        _normalized(_wrap_depth("10 / 0"))


def test_half_up_rounding_at_two_decimals():
    assert _emitted_depth("0.125") == "0.13"
    assert _emitted_depth("2.675") == "2.68"


def test_negative_zero_never_emitted():
    _, text = _entity("Circle(center = (-0.001, 0), radius = 5)")
    assert "center = (0.00, 0.00)" in text


def test_negative_halves_round_away_from_zero():
    _, text = _entity("Circle(center = (-0.125, 0), radius = 5)")
    assert "center = (-0.13, 0.00)" in text


def test_line_by_direction_becomes_explicit_line():
    line, text = _entity(
        "LineByDirection(origin = (1, 2), direction = (3, 4), length = 10)"
    )
    assert isinstance(line, Line)
    assert "Line(start = (1.00, 2.00), end = (7.00, 10.00))" in text


def test_zero_direction_rejected():
    with pytest.raises(NormalizeError, match="zero direction"):
        _normalized(
            _wrap_entity("LineByDirection(origin = (0, 0), direction = (0, 0), length = 10)")
        )


def test_arc_by_angles_becomes_three_point_arc():
    arc, text = _entity(
        "ArcByAngles(center = (0, 0), radius = 10, start_angle = 0, end_angle = 180)"
    )
    assert isinstance(arc, Arc)
    assert "Arc(start = (10.00, 0.00), mid = (0.00, 10.00), end = (-10.00, 0.00))" in text


def test_arc_by_angles_sweep_wraps_counterclockwise():
    # start 90, end 0 is a 270 degree counterclockwise sweep, not -90.
    _, text = _entity(
        "ArcByAngles(center = (0, 0), radius = 10, start_angle = 90, end_angle = 0)"
    )
    assert "mid = (-7.07, -7.07)" in text
    assert "end = (10.00, 0.00)" in text


def test_arc_by_angles_zero_sweep_rejected():
    with pytest.raises(NormalizeError, match="sweep is zero"):
        _normalized(
            _wrap_entity(
                "ArcByAngles(center = (0, 0), radius = 10, start_angle = 45, end_angle = 405)"
            )
        )


def test_implicit_entity_with_unit_arithmetic():
    _, text = _entity(
        "LineByDirection(origin = (0, 0), direction = (1, 0), length = 2 * 1 in)"
    )
    assert "end = (50.80, 0.00)" in text
