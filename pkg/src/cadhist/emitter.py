"""Deterministic text emission.

The emitter is the single place that decides formatting, so any program
has exactly one rendering: parameters in schema order, two-decimal
numerals whenever the value is representable at that precision, one
statement per line, sketch entities one per line at a four-space indent.
Emitting then reparsing reproduces the identical model.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation, localcontext

from . import schema
from .model import (
    BoolValue,
    ExprBinary,
    ExprNeg,
    ExprNode,
    ExprNum,
    Feature,
    OpKind,
    OriginalSet,
    ParamValue,
    Program,
    Query,
    RawExpr,
    Scalar,
    SketchBody,
    SketchEntity,
    SketchText,
    TextValue,
    Unit,
    ValueList,
    Vec,
)
from .schema import Dimension, ParamType

_TWO_PLACES = Decimal("0.01")
_IDENT_OK = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_")


def format_decimal(value: Decimal) -> str:
    """Render with exactly two decimals when that loses nothing.

    Values needing more precision (pre-rounding intermediates) print in
    full; negative zero prints as 0.00.
    """
    if value == 0:
        return "0.00"
    try:
        with localcontext() as ctx:
            ctx.prec = 60
            quantized = value.quantize(_TWO_PLACES)
    except InvalidOperation:
        return format(value, "f")
    if quantized == value:
        return f"{quantized:f}"
    return format(value, "f")


def _scalar_text(value: Scalar, slot_unit: Unit) -> str:
    text = format_decimal(value.value)
    if value.unit is not slot_unit and value.unit is not Unit.NONE:
        return f"{text} {value.unit.value}"
    return text


def _expr_text(node: ExprNode, min_prec: int = 1) -> str:
    if isinstance(node, ExprNum):
        text = format_decimal(node.value)
        if node.unit is not Unit.NONE:
            text = f"{text} {node.unit.value}"
        return text
    if isinstance(node, ExprNeg):
        return "-" + _expr_text(node.operand, 3)
    prec = 1 if node.op in "+-" else 2
    left = _expr_text(node.left, prec)
    right = _expr_text(node.right, prec + 1)
    text = f"{left} {node.op} {right}"
    if prec < min_prec:
        return f"({text})"
    return text


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def format_query(query: Query) -> str:
    parts = [query.op_id, query.query_type, query.entity_type.value]
    for dis in query.disambiguation:
        if isinstance(dis, OriginalSet):
            inner = ", ".join(format_query(q) for q in dis.queries)
            parts.append(f"originals = [{inner}]")
        else:
            inner = ", ".join(format_query(q) for q in dis.adjacent)
            parts.append(f"adjacent = [{inner}]")
    return f"query({', '.join(parts)})"


def _value_text(value: ParamValue, slot_unit: Unit, quoted: bool = False) -> str:
    if isinstance(value, Scalar):
        return _scalar_text(value, slot_unit)
    if isinstance(value, RawExpr):
        return _expr_text(value.root)
    if isinstance(value, Vec):
        comps = ", ".join(_value_text(c, slot_unit) for c in value.components)
        return f"({comps})"
    if isinstance(value, BoolValue):
        return "true" if value.value else "false"
    if isinstance(value, TextValue):
        if quoted or not value.value or any(c not in _IDENT_OK for c in value.value):
            return f'"{_escape(value.value)}"'
        return value.value
    if isinstance(value, Query):
        return format_query(value)
    if isinstance(value, ValueList):
        items = ", ".join(_value_text(item, slot_unit) for item in value.items)
        return f"[{items}]"
    raise TypeError(f"cannot emit value of type {type(value).__name__}")


def _entity_text(entity: SketchEntity) -> str:
    cls = type(entity)
    fields = []
    for spec in schema.ENTITY_SCHEMAS[cls]:
        value = getattr(entity, spec.name)
        quoted = cls is SketchText and spec.name == "content"
        text = _value_text(value, schema.default_unit(spec.dimension), quoted)
        fields.append(f"{spec.name} = {text}")
    return f"{entity.id}: {schema.ENTITY_NAMES[cls]}({', '.join(fields)})"


def _param_order(feature: Feature) -> list[str]:
    names = [s.name for s in schema.schema_for(feature.kind) if s.name in feature.params]
    names.extend(n for n in feature.params if n not in names)
    return names


def emit_feature(feature: Feature) -> str:
    rendered: list[str] = []
    body: SketchBody | None = None
    for name in _param_order(feature):
        value = feature.params[name]
        if isinstance(value, SketchBody):
            body = value
            continue
        spec = schema.spec_for(feature.kind, name)
        dim = spec.dimension if spec else Dimension.NONE
        rendered.append(f"{name} = {_value_text(value, schema.default_unit(dim))}")
    head = f"{feature.id} = {feature.kind.value}("
    if body is None:
        return f"{head}{', '.join(rendered)});"
    prefix = "".join(f"{p}, " for p in rendered)
    if not body.entities:
        return f"{head}{prefix}entities = []);"
    lines = [f"{head}{prefix}entities = ["]
    for i, entity in enumerate(body.entities):
        comma = "," if i + 1 < len(body.entities) else ""
        lines.append(f"    {_entity_text(entity)}{comma}")
    lines.append("]);")
    return "\n".join(lines)


def emit_program(program: Program) -> str:
    """Canonical text for a program, ending with a newline."""
    if not program.features:
        return ""
    return "\n".join(emit_feature(f) for f in program.features) + "\n"
