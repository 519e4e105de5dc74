"""JSON encoding of programs.

A tagged tree mirrors the model exactly: numerals are carried as strings
to keep decimal precision, so load(dump(p)) == p for any program,
including raw-dialect programs with unresolved expressions.
"""

from __future__ import annotations

import json
from decimal import Decimal
from typing import Any

from . import schema
from .model import (
    BoolValue,
    EntityType,
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
    TextValue,
    Topology,
    Unit,
    ValueList,
    Vec,
)


def value_to_json(value: ParamValue) -> dict[str, Any]:
    if isinstance(value, Scalar):
        return {"type": "scalar", "value": str(value.value), "unit": value.unit.value}
    if isinstance(value, Vec):
        return {"type": "vec", "components": [value_to_json(c) for c in value.components]}
    if isinstance(value, BoolValue):
        return {"type": "bool", "value": value.value}
    if isinstance(value, TextValue):
        return {"type": "text", "value": value.value}
    if isinstance(value, Query):
        out: dict[str, Any] = {
            "type": "query",
            "op_id": value.op_id,
            "query_type": value.query_type,
            "entity_type": value.entity_type.value,
        }
        if value.disambiguation:
            out["disambiguation"] = [_dis_to_json(d) for d in value.disambiguation]
        return out
    if isinstance(value, ValueList):
        return {"type": "list", "items": [value_to_json(i) for i in value.items]}
    if isinstance(value, SketchBody):
        return {"type": "sketch", "entities": [_entity_to_json(e) for e in value.entities]}
    if isinstance(value, RawExpr):
        return {"type": "expr", "root": _expr_to_json(value.root)}
    raise TypeError(f"cannot encode {type(value).__name__}")


def _dis_to_json(dis) -> dict[str, Any]:
    if isinstance(dis, OriginalSet):
        return {"originals": [value_to_json(q) for q in dis.queries]}
    return {"adjacent": [value_to_json(q) for q in dis.adjacent]}


def _entity_to_json(entity: SketchEntity) -> dict[str, Any]:
    out: dict[str, Any] = {"entity": schema.ENTITY_NAMES[type(entity)], "id": entity.id}
    for spec in schema.ENTITY_SCHEMAS[type(entity)]:
        out[spec.name] = value_to_json(getattr(entity, spec.name))
    return out


def _expr_to_json(node: ExprNode) -> dict[str, Any]:
    if isinstance(node, ExprNum):
        return {"num": str(node.value), "unit": node.unit.value}
    if isinstance(node, ExprNeg):
        return {"neg": _expr_to_json(node.operand)}
    return {
        "op": node.op,
        "left": _expr_to_json(node.left),
        "right": _expr_to_json(node.right),
    }


def program_to_json(program: Program) -> dict[str, Any]:
    return {
        "source_name": program.source_name,
        "features": [
            {
                "id": f.id,
                "op": f.kind.value,
                "params": {name: value_to_json(v) for name, v in f.params.items()},
            }
            for f in program.features
        ],
    }


def value_from_json(data: dict[str, Any]) -> ParamValue:
    tag = data["type"]
    if tag == "scalar":
        return Scalar(Decimal(data["value"]), Unit(data["unit"]))
    if tag == "vec":
        return Vec(tuple(value_from_json(c) for c in data["components"]))
    if tag == "bool":
        return BoolValue(bool(data["value"]))
    if tag == "text":
        return TextValue(data["value"])
    if tag == "query":
        return Query(
            data["op_id"],
            data["query_type"],
            EntityType(data["entity_type"]),
            tuple(_dis_from_json(d) for d in data.get("disambiguation", [])),
        )
    if tag == "list":
        return ValueList(tuple(value_from_json(i) for i in data["items"]))
    if tag == "sketch":
        return SketchBody(tuple(_entity_from_json(e) for e in data["entities"]))
    if tag == "expr":
        return RawExpr(_expr_from_json(data["root"]))
    raise ValueError(f"unknown value tag {tag!r}")


def _dis_from_json(data: dict[str, Any]):
    if "originals" in data:
        return OriginalSet(tuple(value_from_json(q) for q in data["originals"]))
    return Topology(tuple(value_from_json(q) for q in data["adjacent"]))


def _entity_from_json(data: dict[str, Any]) -> SketchEntity:
    cls = schema.ENTITY_KEYWORDS[data["entity"]]
    fields = {
        spec.name: value_from_json(data[spec.name])
        for spec in schema.ENTITY_SCHEMAS[cls]
    }
    return cls(id=data["id"], **fields)


def _expr_from_json(data: dict[str, Any]) -> ExprNode:
    if "num" in data:
        return ExprNum(Decimal(data["num"]), Unit(data["unit"]))
    if "neg" in data:
        return ExprNeg(_expr_from_json(data["neg"]))
    return ExprBinary(data["op"], _expr_from_json(data["left"]), _expr_from_json(data["right"]))


def program_from_json(data: dict[str, Any]) -> Program:
    features = tuple(
        Feature(
            f["id"],
            OpKind(f["op"]),
            {name: value_from_json(v) for name, v in f.get("params", {}).items()},
        )
        for f in data["features"]
    )
    return Program(features, data.get("source_name", ""))


def dumps(program: Program, indent: int | None = 2) -> str:
    return json.dumps(program_to_json(program), indent=indent)


def loads(text: str) -> Program:
    return program_from_json(json.loads(text))
