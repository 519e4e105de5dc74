"""Parameter schemas for the 15 operation kinds.

One table drives parsing, validation, default elision and emission, so
adding a parameter in one place keeps all of them in sync.  Parameter
order in the table is the canonical emission order.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

from .model import (
    Arc,
    ArcByAngles,
    Bezier,
    BoolValue,
    Circle,
    Diagnostic,
    Dimension,
    Ellipse,
    EllipticalArc,
    EntityType,
    Feature,
    Line,
    LineByDirection,
    OpKind,
    ParamValue,
    Query,
    RawExpr,
    Scalar,
    SketchBody,
    SketchEntity,
    SketchText,
    Spline,
    TextValue,
    Unit,
    ValueList,
    Vec,
)


class ParamType(Enum):
    SCALAR = "scalar"
    VEC2 = "vec2"
    VEC3 = "vec3"
    BOOL = "bool"
    ENUM = "enum"
    QUERY = "query"
    QUERY_LIST = "query-list"
    PLANE_REF = "plane-ref"  # XY/XZ/YZ name or query to a construction plane
    SKETCH_BODY = "sketch-body"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: ParamType
    required: bool = False
    default: ParamValue | None = None
    dimension: Dimension = Dimension.NONE
    integral: bool = False
    choices: tuple[str, ...] = ()


def _len(text: str) -> Scalar:
    return Scalar(Decimal(text), Unit.MM)


def _ang(text: str) -> Scalar:
    return Scalar(Decimal(text), Unit.DEG)


def _count(text: str) -> Scalar:
    return Scalar(Decimal(text), Unit.NONE)


def _vec3(x: str, y: str, z: str, unit: Unit = Unit.MM) -> Vec:
    return Vec((Scalar(Decimal(x), unit), Scalar(Decimal(y), unit), Scalar(Decimal(z), unit)))


ZERO_LEN = _len("0")
ZERO_ANG = _ang("0")

PLANE_NAMES = ("XY", "XZ", "YZ")


FEATURE_SCHEMAS: dict[OpKind, tuple[ParamSpec, ...]] = {
    OpKind.SKETCH: (
        ParamSpec("plane", ParamType.PLANE_REF, default=TextValue("XY")),
        ParamSpec("entities", ParamType.SKETCH_BODY, required=True),
    ),
    OpKind.EXTRUDE: (
        ParamSpec("profile", ParamType.QUERY_LIST, required=True),
        ParamSpec("depth", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
        ParamSpec("opposite_depth", ParamType.SCALAR, default=ZERO_LEN, dimension=Dimension.LENGTH),
        ParamSpec("midplane", ParamType.BOOL, default=BoolValue(False)),
        ParamSpec("draft", ParamType.SCALAR, default=ZERO_ANG, dimension=Dimension.ANGLE),
    ),
    OpKind.REVOLVE: (
        ParamSpec("profile", ParamType.QUERY_LIST, required=True),
        ParamSpec("axis", ParamType.QUERY, required=True),
        ParamSpec("angle", ParamType.SCALAR, default=_ang("360"), dimension=Dimension.ANGLE),
    ),
    OpKind.SWEEP: (
        ParamSpec("profile", ParamType.QUERY_LIST, required=True),
        ParamSpec("path", ParamType.QUERY_LIST, required=True),
    ),
    OpKind.LOFT: (
        ParamSpec("profiles", ParamType.QUERY_LIST, required=True),
    ),
    OpKind.CONSTRUCTION_PLANE: (
        ParamSpec("base", ParamType.ENUM, required=True, choices=PLANE_NAMES),
        ParamSpec("offset", ParamType.SCALAR, default=ZERO_LEN, dimension=Dimension.LENGTH),
        ParamSpec("angle", ParamType.SCALAR, default=ZERO_ANG, dimension=Dimension.ANGLE),
    ),
    OpKind.FILLET: (
        ParamSpec("entities", ParamType.QUERY_LIST, required=True),
        ParamSpec("radius", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
    ),
    OpKind.CHAMFER: (
        ParamSpec("entities", ParamType.QUERY_LIST, required=True),
        ParamSpec("distance", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
    ),
    OpKind.SHELL: (
        ParamSpec("faces", ParamType.QUERY_LIST, required=True),
        ParamSpec("thickness", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
    ),
    OpKind.HOLE: (
        ParamSpec("points", ParamType.QUERY_LIST, required=True, dimension=Dimension.LENGTH),
        ParamSpec("diameter", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
        ParamSpec("depth", ParamType.SCALAR, required=True, dimension=Dimension.LENGTH),
        ParamSpec("style", ParamType.ENUM, default=TextValue("simple"),
                  choices=("simple", "counterbore", "countersink")),
    ),
    OpKind.BOOLEAN: (
        ParamSpec("mode", ParamType.ENUM, required=True,
                  choices=("union", "subtract", "intersect")),
        ParamSpec("targets", ParamType.QUERY_LIST, required=True),
        ParamSpec("tools", ParamType.QUERY_LIST, default=ValueList(())),
    ),
    OpKind.DELETE_BODY: (
        ParamSpec("targets", ParamType.QUERY_LIST, required=True),
    ),
    OpKind.CIRCULAR_PATTERN: (
        ParamSpec("entities", ParamType.QUERY_LIST, required=True),
        ParamSpec("count", ParamType.SCALAR, required=True, integral=True),
        ParamSpec("axis_origin", ParamType.VEC3, default=_vec3("0", "0", "0")),
        ParamSpec("axis_direction", ParamType.VEC3,
                  default=_vec3("0", "0", "1", Unit.NONE)),
        ParamSpec("angle", ParamType.SCALAR, default=_ang("360"), dimension=Dimension.ANGLE),
    ),
    OpKind.MIRROR: (
        ParamSpec("entities", ParamType.QUERY_LIST, required=True),
        ParamSpec("plane", ParamType.PLANE_REF, required=True),
    ),
    OpKind.TRANSFORM: (
        ParamSpec("entities", ParamType.QUERY_LIST, required=True),
        ParamSpec("translation", ParamType.VEC3, default=_vec3("0", "0", "0")),
        ParamSpec("rotation", ParamType.VEC3, default=_vec3("0", "0", "0", Unit.DEG),
                  dimension=Dimension.ANGLE),
        ParamSpec("copy", ParamType.BOOL, default=BoolValue(False)),
    ),
}


@dataclass(frozen=True)
class EntityFieldSpec:
    name: str
    type: ParamType
    dimension: Dimension = Dimension.NONE


# Explicit (canonical) sketch entity constructors.
ENTITY_SCHEMAS: dict[type, tuple[EntityFieldSpec, ...]] = {
    Line: (
        EntityFieldSpec("start", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("end", ParamType.VEC2, Dimension.LENGTH),
    ),
    Circle: (
        EntityFieldSpec("center", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("radius", ParamType.SCALAR, Dimension.LENGTH),
    ),
    Arc: (
        EntityFieldSpec("start", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("mid", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("end", ParamType.VEC2, Dimension.LENGTH),
    ),
    Ellipse: (
        EntityFieldSpec("center", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("major_radius", ParamType.SCALAR, Dimension.LENGTH),
        EntityFieldSpec("minor_radius", ParamType.SCALAR, Dimension.LENGTH),
        EntityFieldSpec("rotation", ParamType.SCALAR, Dimension.ANGLE),
    ),
    EllipticalArc: (
        EntityFieldSpec("center", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("major_radius", ParamType.SCALAR, Dimension.LENGTH),
        EntityFieldSpec("minor_radius", ParamType.SCALAR, Dimension.LENGTH),
        EntityFieldSpec("rotation", ParamType.SCALAR, Dimension.ANGLE),
        EntityFieldSpec("start_angle", ParamType.SCALAR, Dimension.ANGLE),
        EntityFieldSpec("end_angle", ParamType.SCALAR, Dimension.ANGLE),
    ),
    Bezier: (
        EntityFieldSpec("control_points", ParamType.QUERY_LIST, Dimension.LENGTH),
    ),
    Spline: (
        EntityFieldSpec("points", ParamType.QUERY_LIST, Dimension.LENGTH),
    ),
    SketchText: (
        EntityFieldSpec("content", ParamType.ENUM),
        EntityFieldSpec("anchor", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("height", ParamType.SCALAR, Dimension.LENGTH),
    ),
    # Raw-dialect implicit forms.
    LineByDirection: (
        EntityFieldSpec("origin", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("direction", ParamType.VEC2),
        EntityFieldSpec("length", ParamType.SCALAR, Dimension.LENGTH),
    ),
    ArcByAngles: (
        EntityFieldSpec("center", ParamType.VEC2, Dimension.LENGTH),
        EntityFieldSpec("radius", ParamType.SCALAR, Dimension.LENGTH),
        EntityFieldSpec("start_angle", ParamType.SCALAR, Dimension.ANGLE),
        EntityFieldSpec("end_angle", ParamType.SCALAR, Dimension.ANGLE),
    ),
}

# Surface keyword for each entity class; SketchText is spelled Text in
# program sources.
ENTITY_NAMES: dict[type, str] = {
    cls: ("Text" if cls is SketchText else cls.__name__) for cls in ENTITY_SCHEMAS
}
ENTITY_KEYWORDS = {name: cls for cls, name in ENTITY_NAMES.items()}

# Default fallbacks applied at parse time when optional entity fields are
# omitted (only SketchText.height today).
ENTITY_FIELD_DEFAULTS: dict[tuple[type, str], ParamValue] = {
    (SketchText, "height"): _len("10"),
}


def schema_for(kind: OpKind) -> tuple[ParamSpec, ...]:
    return FEATURE_SCHEMAS[kind]


def spec_for(kind: OpKind, name: str) -> ParamSpec | None:
    for spec in FEATURE_SCHEMAS[kind]:
        if spec.name == name:
            return spec
    return None


def default_unit(dimension: Dimension) -> Unit:
    """Unit attached to a bare numeric literal in each schema slot."""
    if dimension is Dimension.LENGTH:
        return Unit.MM
    if dimension is Dimension.ANGLE:
        return Unit.DEG
    return Unit.NONE


# ---------------------------------------------------------------------------
# Feature validation
# ---------------------------------------------------------------------------


def _is_scalar_like(value: ParamValue) -> bool:
    return isinstance(value, (Scalar, RawExpr))


def _check_value(feat_id: str, name: str, spec: ParamSpec, value: ParamValue,
                 diags: list[Diagnostic]) -> None:
    def err(msg: str) -> None:
        diags.append(Diagnostic(feat_id, "error", f"parameter {name}: {msg}"))

    t = spec.type
    if t is ParamType.SCALAR:
        if not _is_scalar_like(value):
            err("expected a number")
            return
        if isinstance(value, Scalar):
            dim = value.unit.dimension
            if spec.dimension is not Dimension.NONE and dim not in (spec.dimension, Dimension.NONE):
                err(f"expected a {spec.dimension.value}, got {value.unit.value!r}")
            if spec.dimension is Dimension.NONE and dim is not Dimension.NONE:
                err(f"expected a dimensionless number, got {value.unit.value!r}")
            if spec.integral and value.value != value.value.to_integral_value():
                err("expected an integer")
    elif t in (ParamType.VEC2, ParamType.VEC3):
        want = 2 if t is ParamType.VEC2 else 3
        if not isinstance(value, Vec) or len(value.components) != want:
            err(f"expected a {want}-component vector")
    elif t is ParamType.BOOL:
        if not isinstance(value, BoolValue):
            err("expected true or false")
    elif t is ParamType.ENUM:
        if not isinstance(value, TextValue):
            err("expected a name")
        elif spec.choices and value.value not in spec.choices:
            err(f"expected one of {', '.join(spec.choices)}; got {value.value!r}")
    elif t is ParamType.QUERY:
        if not isinstance(value, Query):
            err("expected a query")
    elif t is ParamType.QUERY_LIST:
        if not isinstance(value, ValueList):
            err("expected a list")
        elif not all(isinstance(i, (Query, Vec)) for i in value.items):
            err("expected a list of queries")
    elif t is ParamType.PLANE_REF:
        if isinstance(value, TextValue):
            if value.value not in PLANE_NAMES:
                err(f"expected one of {', '.join(PLANE_NAMES)}; got {value.value!r}")
        elif not isinstance(value, Query):
            err("expected a plane name or a query")
    elif t is ParamType.SKETCH_BODY:
        if not isinstance(value, SketchBody):
            err("expected sketch entities")


def _check_entity(feat_id: str, entity: SketchEntity, diags: list[Diagnostic]) -> None:
    from .geomutil import arc_is_collinear

    def err(msg: str) -> None:
        diags.append(Diagnostic(feat_id, "error", f"entity {entity.id}: {msg}"))

    def scalar(v) -> Scalar | None:
        return v if isinstance(v, Scalar) else None

    if isinstance(entity, Line):
        if entity.start == entity.end:
            err("zero-length line")
    elif isinstance(entity, Circle):
        r = scalar(entity.radius)
        if r is not None and r.value <= 0:
            err("non-positive radius")
    elif isinstance(entity, Arc):
        if arc_is_collinear(entity):
            err("arc points are collinear")
    elif isinstance(entity, (Ellipse, EllipticalArc)):
        for attr in ("major_radius", "minor_radius"):
            r = scalar(getattr(entity, attr))
            if r is not None and r.value <= 0:
                err(f"non-positive {attr}")
    elif isinstance(entity, Bezier):
        if len(entity.control_points.items) < 2:
            err("needs at least 2 control points")
    elif isinstance(entity, Spline):
        if len(entity.points.items) < 2:
            err("needs at least 2 points")
    elif isinstance(entity, SketchText):
        h = scalar(entity.height)
        if h is not None and h.value <= 0:
            err("non-positive height")
    elif isinstance(entity, LineByDirection):
        d = entity.direction.components
        if all(c.value == 0 for c in d):
            err("zero direction")
        ln = scalar(entity.length)
        if ln is not None and ln.value <= 0:
            err("non-positive length")
    elif isinstance(entity, ArcByAngles):
        r = scalar(entity.radius)
        if r is not None and r.value <= 0:
            err("non-positive radius")


def validate_feature(feat: Feature) -> list[Diagnostic]:
    """Schema conformance diagnostics for one feature."""
    diags: list[Diagnostic] = []
    specs = FEATURE_SCHEMAS[feat.kind]
    known = {s.name for s in specs}
    for name in feat.params:
        if name not in known:
            diags.append(
                Diagnostic(feat.id, "error",
                           f"unknown parameter {name} for {feat.kind.value}")
            )
    for spec in specs:
        if spec.name not in feat.params:
            if spec.required:
                diags.append(
                    Diagnostic(feat.id, "error",
                               f"missing required parameter {spec.name}")
                )
            continue
        _check_value(feat.id, spec.name, spec, feat.params[spec.name], diags)

    body = feat.params.get("entities")
    if feat.kind is OpKind.SKETCH and isinstance(body, SketchBody):
        if not body.entities:
            diags.append(Diagnostic(feat.id, "error", "sketch has no entities"))
        for entity in body.entities:
            _check_entity(feat.id, entity, diags)
            if isinstance(entity, (LineByDirection, ArcByAngles)):
                diags.append(
                    Diagnostic(feat.id, "warning",
                               f"entity {entity.id}: implicit form, will be rewritten")
                )
    return diags
