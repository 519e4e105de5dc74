"""Typed design-history model.

A design history is an ordered list of modeling operations (features), each
with a fixed parameter schema.  Features and every value inside them are
immutable after construction; all operations on them are pure functions, so
programs can be shared freely across threads.

Identifier conventions: canonical programs use ``F<n>`` for features and
``S<n>`` for sketch entities (``E<n>``/``V<n>`` are reserved for named
sub-entities).  Pre-normalization programs may carry arbitrary opaque tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Iterator, Union


class OpKind(Enum):
    """The closed set of supported modeling operations."""

    SKETCH = "Sketch"
    EXTRUDE = "Extrude"
    REVOLVE = "Revolve"
    SWEEP = "Sweep"
    LOFT = "Loft"
    CONSTRUCTION_PLANE = "ConstructionPlane"
    FILLET = "Fillet"
    CHAMFER = "Chamfer"
    SHELL = "Shell"
    HOLE = "Hole"
    BOOLEAN = "Boolean"
    DELETE_BODY = "DeleteBody"
    CIRCULAR_PATTERN = "CircularPattern"
    MIRROR = "Mirror"
    TRANSFORM = "Transform"


class EntityType(Enum):
    VERTEX = "VERTEX"
    EDGE = "EDGE"
    FACE = "FACE"
    BODY = "BODY"


class Unit(Enum):
    MM = "mm"
    CM = "cm"
    M = "m"
    IN = "in"
    FT = "ft"
    DEG = "deg"
    RAD = "rad"
    NONE = ""

    @property
    def dimension(self) -> "Dimension":
        if self in (Unit.MM, Unit.CM, Unit.M, Unit.IN, Unit.FT):
            return Dimension.LENGTH
        if self in (Unit.DEG, Unit.RAD):
            return Dimension.ANGLE
        return Dimension.NONE


class Dimension(Enum):
    LENGTH = "length"
    ANGLE = "angle"
    NONE = "none"


# Millimetre / degree conversion factors for every accepted unit.
LENGTH_TO_MM = {
    Unit.MM: Decimal("1"),
    Unit.CM: Decimal("10"),
    Unit.M: Decimal("1000"),
    Unit.IN: Decimal("25.4"),
    Unit.FT: Decimal("304.8"),
}


# ---------------------------------------------------------------------------
# Parameter values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scalar:
    """A decimal magnitude with a unit tag (NONE for bare counts/ratios)."""

    value: Decimal
    unit: Unit = Unit.NONE


@dataclass(frozen=True)
class Vec:
    """A 2- or 3-component vector.

    Components are scalars in canonical programs; the raw dialect may leave
    unresolved expressions in component slots until normalization.
    """

    components: tuple["Scalar | RawExpr", ...]

    def __post_init__(self):
        if len(self.components) not in (2, 3):
            raise ValueError("vectors have 2 or 3 components")


@dataclass(frozen=True)
class BoolValue:
    value: bool


@dataclass(frozen=True)
class TextValue:
    value: str


@dataclass(frozen=True)
class Query:
    """Reference to geometry produced by an earlier operation.

    Addressed by the producing operation's identifier, a free-form query
    type token (e.g. ``SWEPT_EDGE``), one of four entity classes, and
    optional disambiguation data.
    """

    op_id: str
    query_type: str
    entity_type: EntityType
    disambiguation: tuple["Disambiguation", ...] = ()


@dataclass(frozen=True)
class OriginalSet:
    """Disambiguate a query by the entities it originates from."""

    queries: tuple[Query, ...]


@dataclass(frozen=True)
class Topology:
    """Disambiguate a query by its adjacent entities."""

    adjacent: tuple[Query, ...]


Disambiguation = Union[OriginalSet, Topology]


@dataclass(frozen=True)
class ValueList:
    """Homogeneous list parameter (entity lists, point lists, ...)."""

    items: tuple["ParamValue", ...]


@dataclass(frozen=True)
class SketchBody:
    entities: tuple["SketchEntity", ...]


# Raw-dialect arithmetic, removed by normalization.  Canonical programs
# never contain expression nodes.


@dataclass(frozen=True)
class ExprNum:
    value: Decimal
    unit: Unit = Unit.NONE


@dataclass(frozen=True)
class ExprNeg:
    operand: "ExprNode"


@dataclass(frozen=True)
class ExprBinary:
    op: str  # one of + - * /
    left: "ExprNode"
    right: "ExprNode"


ExprNode = Union[ExprNum, ExprNeg, ExprBinary]


@dataclass(frozen=True)
class RawExpr:
    """Unresolved numeric expression in a scalar position (raw dialect only)."""

    root: ExprNode


ParamValue = Union[
    Scalar, Vec, BoolValue, TextValue, Query, ValueList, SketchBody, RawExpr
]


# ---------------------------------------------------------------------------
# Sketch entities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Line:
    id: str
    start: Vec
    end: Vec


@dataclass(frozen=True)
class Circle:
    id: str
    center: Vec
    radius: Scalar


@dataclass(frozen=True)
class Arc:
    """Circular arc through three points (start, mid, end)."""

    id: str
    start: Vec
    mid: Vec
    end: Vec


@dataclass(frozen=True)
class Ellipse:
    id: str
    center: Vec
    major_radius: Scalar
    minor_radius: Scalar
    rotation: Scalar


@dataclass(frozen=True)
class EllipticalArc:
    id: str
    center: Vec
    major_radius: Scalar
    minor_radius: Scalar
    rotation: Scalar
    start_angle: Scalar
    end_angle: Scalar


@dataclass(frozen=True)
class Bezier:
    id: str
    control_points: ValueList


@dataclass(frozen=True)
class Spline:
    """Interpolating spline through the given points."""

    id: str
    points: ValueList


@dataclass(frozen=True)
class SketchText:
    id: str
    content: TextValue
    anchor: Vec
    height: Scalar


# Raw-dialect implicit forms; rewritten to Line/Arc by normalization.


@dataclass(frozen=True)
class LineByDirection:
    id: str
    origin: Vec
    direction: Vec
    length: ParamValue  # Scalar or RawExpr


@dataclass(frozen=True)
class ArcByAngles:
    id: str
    center: Vec
    radius: ParamValue
    start_angle: ParamValue
    end_angle: ParamValue


SketchEntity = Union[
    Line,
    Circle,
    Arc,
    Ellipse,
    EllipticalArc,
    Bezier,
    Spline,
    SketchText,
    LineByDirection,
    ArcByAngles,
]

IMPLICIT_ENTITY_TYPES = (LineByDirection, ArcByAngles)


# ---------------------------------------------------------------------------
# Features and programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Feature:
    id: str
    kind: OpKind
    params: dict[str, ParamValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Program:
    features: tuple[Feature, ...] = ()
    source_name: str = ""

    def feature_by_id(self, fid: str) -> Feature | None:
        for f in self.features:
            if f.id == fid:
                return f
        return None


@dataclass(frozen=True)
class Diagnostic:
    feature_id: str | None
    severity: str  # "error" | "warning"
    message: str


class EdgeReason(Enum):
    QUERY_REFERENCE = "query-reference"
    BODY_CONSUMPTION = "implicit-body-consumption"
    PLANE_REFERENCE = "plane-reference"


@dataclass(frozen=True)
class DepEdge:
    consumer: str
    producer: str
    reason: EdgeReason


@dataclass(frozen=True)
class DepGraph:
    nodes: tuple[str, ...]
    edges: frozenset[DepEdge]

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(e.consumer, e.producer) for e in self.edges}


class AnalysisError(Exception):
    """Raised when program analysis hits an unresolvable reference."""


# ---------------------------------------------------------------------------
# Identifiers
# ---------------------------------------------------------------------------

CANONICAL_ID_RE = re.compile(r"^(F|S|E|V)(0|[1-9][0-9]*)$")


def is_canonical_identifier(identifier: str) -> bool:
    return CANONICAL_ID_RE.match(identifier) is not None


def identifier_family(identifier: str) -> str | None:
    m = CANONICAL_ID_RE.match(identifier)
    return m.group(1) if m else None


def identifier_index(identifier: str) -> int | None:
    m = CANONICAL_ID_RE.match(identifier)
    return int(m.group(2)) if m else None


_FAMILY_RANK = {"F": 0, "S": 1, "E": 2, "V": 3}


def identifier_sort_key(identifier: str) -> tuple:
    """Total order: canonical ids by (family, index), opaque ids last by text."""
    m = CANONICAL_ID_RE.match(identifier)
    if m:
        return (0, _FAMILY_RANK[m.group(1)], int(m.group(2)), identifier)
    return (1, 0, 0, identifier)


# ---------------------------------------------------------------------------
# Value tree traversal
# ---------------------------------------------------------------------------


def iter_values(value: ParamValue) -> Iterator[ParamValue]:
    """Depth-first walk over a parameter value and everything nested in it."""
    yield value
    if isinstance(value, ValueList):
        for item in value.items:
            yield from iter_values(item)
    elif isinstance(value, Vec):
        for comp in value.components:
            yield comp
    elif isinstance(value, Query):
        for dis in value.disambiguation:
            qs = dis.queries if isinstance(dis, OriginalSet) else dis.adjacent
            for q in qs:
                yield from iter_values(q)
    elif isinstance(value, SketchBody):
        for entity in value.entities:
            for sub in entity_values(entity):
                yield from iter_values(sub)


def entity_values(entity: SketchEntity) -> Iterator[ParamValue]:
    """The parameter values held by a sketch entity, in field order."""
    for name in entity.__dataclass_fields__:
        if name == "id":
            continue
        yield getattr(entity, name)


def iter_queries(value: ParamValue) -> Iterator[Query]:
    for v in iter_values(value):
        if isinstance(v, Query):
            yield v


def feature_queries(feature: Feature) -> Iterator[tuple[str, Query]]:
    """All queries in a feature's parameters as (param_name, query) pairs."""
    for name, value in feature.params.items():
        for q in iter_queries(value):
            yield name, q


def sketch_entities(feature: Feature) -> tuple[SketchEntity, ...]:
    body = feature.params.get("entities")
    if isinstance(body, SketchBody):
        return body.entities
    return ()


# ---------------------------------------------------------------------------
# Structure validation
# ---------------------------------------------------------------------------


def _owner_map(program: Program) -> dict[str, int]:
    """Map every feature and sketch-entity id to its feature index."""
    owners: dict[str, int] = {}
    for i, feat in enumerate(program.features):
        owners.setdefault(feat.id, i)
        for entity in sketch_entities(feat):
            owners.setdefault(entity.id, i)
    return owners


def validate_structure(program: Program) -> list[Diagnostic]:
    """Check the model invariants; an empty list means a well-formed program.

    Errors cover duplicate identifiers, parameter schema violations,
    degenerate sketch entities, and queries that do not resolve to a
    strictly earlier feature.  Raw-dialect leftovers (unresolved
    expressions, non-canonical units, implicit sketch forms) are reported
    as warnings since normalization removes them.
    """
    from . import schema

    diags: list[Diagnostic] = []
    seen: dict[str, str] = {}
    for feat in program.features:
        if feat.id in seen:
            diags.append(Diagnostic(feat.id, "error", f"duplicate identifier {feat.id}"))
        seen[feat.id] = feat.id
        for entity in sketch_entities(feat):
            if entity.id in seen:
                diags.append(
                    Diagnostic(feat.id, "error", f"duplicate identifier {entity.id}")
                )
            seen[entity.id] = feat.id

    for feat in program.features:
        diags.extend(schema.validate_feature(feat))

    owners = _owner_map(program)
    for i, feat in enumerate(program.features):
        for param_name, q in feature_queries(feat):
            owner = owners.get(q.op_id)
            if owner is None:
                diags.append(
                    Diagnostic(
                        feat.id,
                        "error",
                        f"unresolved identifier {q.op_id} in parameter {param_name}",
                    )
                )
            elif owner >= i:
                diags.append(
                    Diagnostic(
                        feat.id,
                        "error",
                        f"forward reference to {q.op_id} in parameter {param_name}",
                    )
                )
        plane = feat.params.get("plane")
        if isinstance(plane, Query):
            target = program.feature_by_id(plane.op_id)
            if target is not None and target.kind is not OpKind.CONSTRUCTION_PLANE:
                diags.append(
                    Diagnostic(
                        feat.id,
                        "error",
                        f"unsupported plane construction: {plane.op_id} is not a construction plane",
                    )
                )
    return diags


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)


# Kinds whose query parameters consume previously built bodies.
_BODY_CONSUMERS = {
    OpKind.BOOLEAN: ("targets", "tools"),
    OpKind.DELETE_BODY: ("targets",),
    OpKind.CIRCULAR_PATTERN: ("entities",),
    OpKind.MIRROR: ("entities",),
    OpKind.TRANSFORM: ("entities",),
}


def dependency_graph(program: Program) -> DepGraph:
    """Edges (consumer, producer) for every cross-feature reference.

    A feature depends on another when any of its queries (at any nesting
    depth) resolves to that feature or to one of its sketch entities.
    Edge reasons distinguish plane placement and body consumption from
    plain geometric references.
    """
    owners = _owner_map(program)
    features = program.features
    edges: set[DepEdge] = set()
    for i, feat in enumerate(features):
        consumption_params = _BODY_CONSUMERS.get(feat.kind, ())
        for param_name, q in feature_queries(feat):
            owner = owners.get(q.op_id)
            if owner is None:
                raise AnalysisError(f"unresolved identifier {q.op_id}")
            producer = features[owner].id
            if producer == feat.id:
                raise AnalysisError(f"self reference to {q.op_id} in {feat.id}")
            if param_name == "plane":
                reason = EdgeReason.PLANE_REFERENCE
            elif param_name in consumption_params:
                reason = EdgeReason.BODY_CONSUMPTION
            else:
                reason = EdgeReason.QUERY_REFERENCE
            edges.add(DepEdge(feat.id, producer, reason))
    return DepGraph(tuple(f.id for f in features), frozenset(edges))
