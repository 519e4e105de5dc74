"""Normalization pipeline.

Eight passes rewrite a raw design history into the canonical dialect:

1. explicit_sketch_params: implicit sketch forms (direction+length lines,
   center+angle arcs) become explicit point geometry.
2. standardize_units: every magnitude in millimetres or degrees.
3. fold_numeric_expressions: arithmetic resolved to plain numerals with
   dimension checking.
4. simplify_operations: defaulted parameters elided, symmetric
   opposite-side extrudes merged into midplane form, single-target unions
   dissolved.
5. eliminate_dead_code: features and sketch entities that cannot affect
   any surviving body are removed.
6. rename_identifiers: features become F0.. in order, sketch entities
   S0.. in order of appearance.
7. canonicalize_queries: disambiguation sets merged, deduplicated and
   sorted; ambiguous whole-sketch queries gain explicit original sets.
8. round_precision: numerals quantized (default two decimals,
   half-away-from-zero).

Each pass is idempotent and the pipeline output is a fixed point of the
pipeline.  Passes may be reordered but not dropped; the single pipeline
entry point validates first and refuses structurally broken programs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext, ROUND_HALF_UP
from typing import Any, Callable

from . import emitter, schema
from .geomutil import UnitError, to_canonical
from .model import (
    Arc,
    ArcByAngles,
    BoolValue,
    Dimension,
    EntityType,
    ExprBinary,
    ExprNeg,
    ExprNode,
    ExprNum,
    Feature,
    Line,
    LineByDirection,
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
    identifier_sort_key,
    sketch_entities,
    validate_structure,
)

DEFAULT_PASS_ORDER = (
    "explicit_sketch_params",
    "standardize_units",
    "fold_numeric_expressions",
    "simplify_operations",
    "eliminate_dead_code",
    "rename_identifiers",
    "canonicalize_queries",
    "round_precision",
)

_FOLD_PRECISION = 34


class NormalizeError(Exception):
    """A pass could not produce a meaningful result for some value."""

    def __init__(self, stage: str, location: str | None, message: str):
        where = f" at {location}" if location else ""
        super().__init__(f"{stage}{where}: {message}")
        self.stage = stage
        self.location = location
        self.message = message


@dataclass(frozen=True)
class PassConfig:
    precision_decimals: int = 2
    enabled_passes: tuple[str, ...] = DEFAULT_PASS_ORDER

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PassConfig":
        kwargs: dict[str, Any] = {}
        if "precision_decimals" in data:
            kwargs["precision_decimals"] = int(data["precision_decimals"])
        if "enabled_passes" in data:
            kwargs["enabled_passes"] = tuple(data["enabled_passes"])
        return cls(**kwargs)


@dataclass(frozen=True)
class PassReport:
    name: str
    features_changed: int = 0
    entities_removed: int = 0
    identifiers_renamed: int = 0
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "features_changed": self.features_changed,
            "entities_removed": self.entities_removed,
            "identifiers_renamed": self.identifiers_renamed,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class NormalizeResult:
    program: Program
    reports: tuple[PassReport, ...]


# ---------------------------------------------------------------------------
# Value rewriting helpers
# ---------------------------------------------------------------------------


def _map_expr(node: ExprNode, num_fn) -> ExprNode:
    if isinstance(node, ExprNum):
        return num_fn(node)
    if isinstance(node, ExprNeg):
        return ExprNeg(_map_expr(node.operand, num_fn))
    return ExprBinary(node.op, _map_expr(node.left, num_fn), _map_expr(node.right, num_fn))


def _map_numbers(value: ParamValue, scalar_fn, num_fn=None) -> ParamValue:
    if isinstance(value, Scalar):
        return scalar_fn(value)
    if isinstance(value, RawExpr):
        if num_fn is None:
            return value
        return RawExpr(_map_expr(value.root, num_fn))
    if isinstance(value, Vec):
        return Vec(tuple(_map_numbers(c, scalar_fn, num_fn) for c in value.components))
    if isinstance(value, ValueList):
        return ValueList(tuple(_map_numbers(i, scalar_fn, num_fn) for i in value.items))
    if isinstance(value, SketchBody):
        return SketchBody(tuple(_map_entity_numbers(e, scalar_fn, num_fn) for e in value.entities))
    return value


def _map_entity_numbers(entity: SketchEntity, scalar_fn, num_fn) -> SketchEntity:
    changes = {}
    for spec in schema.ENTITY_SCHEMAS[type(entity)]:
        old = getattr(entity, spec.name)
        new = _map_numbers(old, scalar_fn, num_fn)
        if new != old:
            changes[spec.name] = new
    return dataclasses.replace(entity, **changes) if changes else entity


def _map_feature_numbers(feat: Feature, scalar_fn, num_fn=None) -> Feature:
    params = {n: _map_numbers(v, scalar_fn, num_fn) for n, v in feat.params.items()}
    if params == feat.params:
        return feat
    return dataclasses.replace(feat, params=params)


def _map_queries(value: ParamValue, qfn) -> ParamValue:
    if isinstance(value, Query):
        dis = []
        for d in value.disambiguation:
            if isinstance(d, OriginalSet):
                dis.append(OriginalSet(tuple(_map_queries(q, qfn) for q in d.queries)))
            else:
                dis.append(Topology(tuple(_map_queries(q, qfn) for q in d.adjacent)))
        return qfn(dataclasses.replace(value, disambiguation=tuple(dis)))
    if isinstance(value, ValueList):
        return ValueList(tuple(_map_queries(i, qfn) for i in value.items))
    return value


def _map_feature_queries(feat: Feature, qfn) -> Feature:
    params = {n: _map_queries(v, qfn) for n, v in feat.params.items()}
    if params == feat.params:
        return feat
    return dataclasses.replace(feat, params=params)


# ---------------------------------------------------------------------------
# Expression folding (shared by two passes)
# ---------------------------------------------------------------------------


def _fold_expr(node: ExprNode, stage: str, location: str) -> tuple[Decimal, Dimension]:
    """Evaluate an expression tree to (canonical magnitude, dimension)."""

    def err(message: str) -> NormalizeError:
        return NormalizeError(stage, location, message)

    def walk(n: ExprNode) -> tuple[Decimal, Dimension]:
        if isinstance(n, ExprNum):
            try:
                canonical = to_canonical(Scalar(n.value, n.unit))
            except UnitError as exc:
                raise err(str(exc)) from exc
            return canonical.value, n.unit.dimension
        if isinstance(n, ExprNeg):
            value, dim = walk(n.operand)
            return -value, dim
        lv, ld = walk(n.left)
        rv, rd = walk(n.right)
        op = n.op
        if op in "+-":
            if ld is not rd and Dimension.NONE not in (ld, rd):
                raise err(f"cannot {'add' if op == '+' else 'subtract'} {ld.value} and {rd.value}")
            dim = ld if ld is not Dimension.NONE else rd
            return (lv + rv if op == "+" else lv - rv), dim
        if op == "*":
            if ld is not Dimension.NONE and rd is not Dimension.NONE:
                raise err(f"cannot multiply {ld.value} by {rd.value}")
            return lv * rv, (ld if ld is not Dimension.NONE else rd)
        if rd is not Dimension.NONE and ld is not rd:
            raise err(f"cannot divide {ld.value} by {rd.value}")
        try:
            quotient = lv / rv
        except (ZeroDivisionError, InvalidOperation) as exc:
            raise err("division by zero") from exc
        return quotient, (Dimension.NONE if ld is rd else ld)

    with localcontext() as ctx:
        ctx.prec = _FOLD_PRECISION
        return walk(node)


def _canonical_unit(dim: Dimension) -> Unit:
    if dim is Dimension.LENGTH:
        return Unit.MM
    if dim is Dimension.ANGLE:
        return Unit.DEG
    return Unit.NONE


def _fold_to_scalar(expr: RawExpr, slot_dim: Dimension, stage: str, location: str) -> Scalar:
    value, dim = _fold_expr(expr.root, stage, location)
    unit = _canonical_unit(dim) if dim is not Dimension.NONE else schema.default_unit(slot_dim)
    return Scalar(value, unit)


# ---------------------------------------------------------------------------
# Pass 1: explicit sketch parameters
# ---------------------------------------------------------------------------


def _numeric(value: ParamValue, slot_dim: Dimension, location: str) -> float:
    """Resolve a scalar position to a canonical float for local evaluation."""
    stage = "explicit_sketch_params"
    if isinstance(value, RawExpr):
        value = _fold_to_scalar(value, slot_dim, stage, location)
    if not isinstance(value, Scalar):
        raise NormalizeError(stage, location, "expected a numeric value")
    try:
        result = float(to_canonical(value).value)
    except (UnitError, OverflowError) as exc:
        raise NormalizeError(stage, location, str(exc)) from exc
    if not math.isfinite(result):
        raise NormalizeError(stage, location, "value is not finite")
    return result


def _point(vec: Vec, location: str) -> tuple[float, float]:
    coords = tuple(
        _numeric(c, Dimension.LENGTH, location) for c in vec.components
    )
    if len(coords) != 2:
        raise NormalizeError("explicit_sketch_params", location, "expected a 2d point")
    return coords


def _mm_vec(x: float, y: float) -> Vec:
    return Vec((Scalar(Decimal(repr(x)), Unit.MM), Scalar(Decimal(repr(y)), Unit.MM)))


def _explicit_entity(entity: SketchEntity, feat_id: str) -> SketchEntity:
    location = f"{feat_id}.{entity.id}"
    if isinstance(entity, LineByDirection):
        ox, oy = _point(entity.origin, location)
        dx = _numeric(entity.direction.components[0], Dimension.NONE, location)
        dy = _numeric(entity.direction.components[1], Dimension.NONE, location)
        length = _numeric(entity.length, Dimension.LENGTH, location)
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            raise NormalizeError("explicit_sketch_params", location, "zero direction")
        ex = ox + dx / norm * length
        ey = oy + dy / norm * length
        return Line(entity.id, _mm_vec(ox, oy), _mm_vec(ex, ey))
    if isinstance(entity, ArcByAngles):
        cx, cy = _point(entity.center, location)
        radius = _numeric(entity.radius, Dimension.LENGTH, location)
        a0 = _numeric(entity.start_angle, Dimension.ANGLE, location)
        a1 = _numeric(entity.end_angle, Dimension.ANGLE, location)
        if radius <= 0.0:
            raise NormalizeError("explicit_sketch_params", location, "non-positive radius")
        sweep = (a1 - a0) % 360.0
        if sweep == 0.0:
            raise NormalizeError("explicit_sketch_params", location, "arc sweep is zero")

        def at(angle_deg: float) -> Vec:
            rad = math.radians(angle_deg)
            return _mm_vec(cx + radius * math.cos(rad), cy + radius * math.sin(rad))

        return Arc(entity.id, at(a0), at(a0 + sweep / 2.0), at(a0 + sweep))
    return entity


def pass_explicit_sketch_params(program: Program, config: PassConfig):
    changed = 0
    notes: list[str] = []
    features = []
    for feat in program.features:
        body = feat.params.get("entities")
        if feat.kind is OpKind.SKETCH and isinstance(body, SketchBody):
            entities = []
            touched = False
            for entity in body.entities:
                explicit = _explicit_entity(entity, feat.id)
                if explicit is not entity:
                    touched = True
                    notes.append(f"{feat.id}.{entity.id}: made explicit")
                entities.append(explicit)
            if touched:
                changed += 1
                params = dict(feat.params)
                params["entities"] = SketchBody(tuple(entities))
                feat = dataclasses.replace(feat, params=params)
        features.append(feat)
    report = PassReport("explicit_sketch_params", features_changed=changed, notes=tuple(notes))
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pass 2: unit standardization
# ---------------------------------------------------------------------------


def pass_standardize_units(program: Program, config: PassConfig):
    changed = 0
    features = []

    def convert_scalar(s: Scalar) -> Scalar:
        return to_canonical(s)

    def convert_num(n: ExprNum) -> ExprNum:
        canonical = to_canonical(Scalar(n.value, n.unit))
        if canonical.unit is n.unit and canonical.value == n.value:
            return n
        return ExprNum(canonical.value, canonical.unit)

    for feat in program.features:
        try:
            converted = _map_feature_numbers(feat, convert_scalar, convert_num)
        except UnitError as exc:
            raise NormalizeError("standardize_units", feat.id, str(exc)) from exc
        if converted is not feat:
            changed += 1
        features.append(converted)
    report = PassReport("standardize_units", features_changed=changed)
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pass 3: expression folding
# ---------------------------------------------------------------------------


def _fold_value(value: ParamValue, slot_dim: Dimension, location: str, folded: list[str]) -> ParamValue:
    if isinstance(value, RawExpr):
        folded.append(location)
        return _fold_to_scalar(value, slot_dim, "fold_numeric_expressions", location)
    if isinstance(value, Vec):
        return Vec(tuple(
            _fold_value(c, slot_dim, location, folded) for c in value.components
        ))
    if isinstance(value, ValueList):
        return ValueList(tuple(
            _fold_value(i, slot_dim, location, folded) for i in value.items
        ))
    if isinstance(value, SketchBody):
        return value  # entity fields are folded with their own slots
    return value


def _fold_entity(entity: SketchEntity, feat_id: str, folded: list[str]) -> SketchEntity:
    changes = {}
    for spec in schema.ENTITY_SCHEMAS[type(entity)]:
        old = getattr(entity, spec.name)
        location = f"{feat_id}.{entity.id}.{spec.name}"
        new = _fold_value(old, spec.dimension, location, folded)
        if new != old:
            changes[spec.name] = new
    return dataclasses.replace(entity, **changes) if changes else entity


def pass_fold_numeric_expressions(program: Program, config: PassConfig):
    features = []
    changed = 0
    folded: list[str] = []
    for feat in program.features:
        count_before = len(folded)
        params = {}
        for name, value in feat.params.items():
            spec = schema.spec_for(feat.kind, name)
            slot_dim = spec.dimension if spec else Dimension.NONE
            location = f"{feat.id}.{name}"
            if isinstance(value, SketchBody):
                params[name] = SketchBody(tuple(
                    _fold_entity(e, feat.id, folded) for e in value.entities
                ))
            else:
                params[name] = _fold_value(value, slot_dim, location, folded)
        if params != feat.params:
            feat = dataclasses.replace(feat, params=params)
        if len(folded) > count_before:
            changed += 1
        features.append(feat)
    report = PassReport(
        "fold_numeric_expressions",
        features_changed=changed,
        notes=tuple(f"{loc}: folded" for loc in folded),
    )
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pass 4: operation simplification
# ---------------------------------------------------------------------------


def _quantized(value: Decimal, config: PassConfig) -> Decimal:
    exp = Decimal(1).scaleb(-config.precision_decimals)
    with localcontext() as ctx:
        ctx.prec = 60
        return value.quantize(exp, rounding=ROUND_HALF_UP)


def _values_match(a: ParamValue, b: ParamValue, config: PassConfig) -> bool:
    """Equality at output precision, so elision agrees with final rounding."""
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        try:
            ca, cb = to_canonical(a), to_canonical(b)
        except UnitError:
            return False
        if ca.unit is not cb.unit:
            return False
        return _quantized(ca.value, config) == _quantized(cb.value, config)
    if isinstance(a, Vec) and isinstance(b, Vec):
        return len(a.components) == len(b.components) and all(
            _values_match(x, y, config) for x, y in zip(a.components, b.components)
        )
    return a == b


def _is_default(kind: OpKind, name: str, value: ParamValue, config: PassConfig) -> bool:
    spec = schema.spec_for(kind, name)
    if spec is None or spec.required or spec.default is None:
        return False
    return _values_match(value, spec.default, config)


def pass_simplify_operations(program: Program, config: PassConfig):
    id_map: dict[str, str] = {}
    features = []
    notes: list[str] = []
    changed = 0

    def remap(q: Query) -> Query:
        target = q.op_id
        while target in id_map:
            target = id_map[target]
        if target == q.op_id:
            return q
        return dataclasses.replace(q, op_id=target)

    for feat in program.features:
        original = feat
        feat = _map_feature_queries(feat, remap)
        params = {
            n: v for n, v in feat.params.items()
            if not _is_default(feat.kind, n, v, config)
        }
        if len(params) != len(feat.params):
            feat = dataclasses.replace(feat, params=params)

        if feat.kind is OpKind.EXTRUDE:
            feat = _merge_opposite_extrude(feat, config, notes)

        if feat.kind is OpKind.BOOLEAN:
            mode = feat.params.get("mode")
            targets = feat.params.get("targets")
            tools = feat.params.get("tools")
            single = (
                isinstance(mode, TextValue) and mode.value == "union"
                and isinstance(targets, ValueList) and len(targets.items) == 1
                and isinstance(targets.items[0], Query)
                and (tools is None or (isinstance(tools, ValueList) and not tools.items))
            )
            if single:
                id_map[feat.id] = targets.items[0].op_id
                notes.append(f"{feat.id}: single-target union dissolved")
                changed += 1
                continue

        if feat != original:
            changed += 1
        features.append(feat)

    report = PassReport("simplify_operations", features_changed=changed, notes=tuple(notes))
    return dataclasses.replace(program, features=tuple(features)), report


def _merge_opposite_extrude(feat: Feature, config: PassConfig, notes: list[str]) -> Feature:
    depth = feat.params.get("depth")
    opposite = feat.params.get("opposite_depth")
    midplane = feat.params.get("midplane")
    if not isinstance(depth, Scalar) or not isinstance(opposite, Scalar):
        return feat
    if isinstance(midplane, BoolValue) and midplane.value:
        return feat
    if not _values_match(depth, opposite, config):
        return feat
    try:
        total = to_canonical(depth).value + to_canonical(opposite).value
    except UnitError:
        return feat
    params = dict(feat.params)
    params["depth"] = Scalar(total, Unit.MM)
    params["midplane"] = BoolValue(True)
    del params["opposite_depth"]
    notes.append(f"{feat.id}: symmetric extrude merged to midplane form")
    return dataclasses.replace(feat, params=params)


# ---------------------------------------------------------------------------
# Pass 5: dead code elimination
# ---------------------------------------------------------------------------

BODY_AFFECTING = {
    OpKind.EXTRUDE,
    OpKind.REVOLVE,
    OpKind.SWEEP,
    OpKind.LOFT,
    OpKind.FILLET,
    OpKind.CHAMFER,
    OpKind.SHELL,
    OpKind.HOLE,
    OpKind.BOOLEAN,
    OpKind.CIRCULAR_PATTERN,
    OpKind.MIRROR,
    OpKind.TRANSFORM,
}


def _feature_query_list(feat: Feature):
    for value in feat.params.values():
        stack = [value]
        while stack:
            v = stack.pop()
            if isinstance(v, Query):
                yield v
                for d in v.disambiguation:
                    stack.extend(d.queries if isinstance(d, OriginalSet) else d.adjacent)
            elif isinstance(v, ValueList):
                stack.extend(v.items)


def pass_eliminate_dead_code(program: Program, config: PassConfig):
    features = program.features
    index_of: dict[str, int] = {}
    entity_owner: dict[str, int] = {}
    for i, feat in enumerate(features):
        index_of[feat.id] = i
        for entity in sketch_entities(feat):
            entity_owner[entity.id] = i

    def owner(op_id: str) -> int | None:
        if op_id in index_of:
            return index_of[op_id]
        return entity_owner.get(op_id)

    deps: list[set[int]] = []
    for feat in features:
        producer_set = set()
        for q in _feature_query_list(feat):
            idx = owner(q.op_id)
            if idx is not None:
                producer_set.add(idx)
        deps.append(producer_set)

    deleted: set[int] = set()
    for i, feat in enumerate(features):
        if feat.kind is OpKind.DELETE_BODY:
            targets = feat.params.get("targets")
            if isinstance(targets, ValueList):
                for q in targets.items:
                    if isinstance(q, Query):
                        idx = owner(q.op_id)
                        if idx is not None:
                            deleted.add(idx)

    roots = [
        i for i, feat in enumerate(features)
        if feat.kind in BODY_AFFECTING and i not in deleted
    ]
    live: set[int] = set()
    stack = list(roots)
    while stack:
        i = stack.pop()
        if i in live:
            continue
        live.add(i)
        stack.extend(deps[i] - live)

    # A deletion survives only when the body it removes is still built.
    kept_deletes: dict[int, Feature] = {}
    for i, feat in enumerate(features):
        if feat.kind is not OpKind.DELETE_BODY:
            continue
        targets = feat.params.get("targets")
        if not isinstance(targets, ValueList):
            continue
        live_targets = tuple(
            q for q in targets.items
            if isinstance(q, Query) and owner(q.op_id) in live
        )
        if live_targets:
            live.add(i)
            if len(live_targets) != len(targets.items):
                params = dict(feat.params)
                params["targets"] = ValueList(live_targets)
                kept_deletes[i] = dataclasses.replace(feat, params=params)

    # Entity-level liveness inside surviving sketches.
    live_entities: dict[int, set[str]] = {}
    whole_sketch: set[int] = set()
    for i in live:
        for q in _feature_query_list(features[i]):
            idx = index_of.get(q.op_id)
            if idx is not None and features[idx].kind is OpKind.SKETCH:
                if not any(isinstance(d, OriginalSet) for d in q.disambiguation):
                    whole_sketch.add(idx)
                continue
            eidx = entity_owner.get(q.op_id)
            if eidx is not None:
                live_entities.setdefault(eidx, set()).add(q.op_id)

    removed_features: list[str] = []
    entities_removed = 0
    result = []
    for i, feat in enumerate(features):
        if i not in live:
            removed_features.append(feat.id)
            continue
        feat = kept_deletes.get(i, feat)
        if feat.kind is OpKind.SKETCH and i not in whole_sketch:
            keep_ids = live_entities.get(i, set())
            body = feat.params.get("entities")
            if isinstance(body, SketchBody):
                kept = tuple(e for e in body.entities if e.id in keep_ids)
                if len(kept) != len(body.entities) and kept:
                    entities_removed += len(body.entities) - len(kept)
                    params = dict(feat.params)
                    params["entities"] = SketchBody(kept)
                    feat = dataclasses.replace(feat, params=params)
        result.append(feat)

    notes = tuple(f"{fid}: removed" for fid in removed_features)
    report = PassReport(
        "eliminate_dead_code",
        features_changed=len(removed_features),
        entities_removed=entities_removed,
        notes=notes,
    )
    return dataclasses.replace(program, features=tuple(result)), report


# ---------------------------------------------------------------------------
# Pass 6: identifier renaming
# ---------------------------------------------------------------------------


def rename_map(program: Program) -> dict[str, str]:
    """The injective old-to-new identifier map renaming would apply."""
    mapping: dict[str, str] = {}
    next_feature = 0
    next_entity = 0
    for feat in program.features:
        mapping[feat.id] = f"F{next_feature}"
        next_feature += 1
        for entity in sketch_entities(feat):
            mapping[entity.id] = f"S{next_entity}"
            next_entity += 1
    return mapping


def pass_rename_identifiers(program: Program, config: PassConfig):
    mapping = rename_map(program)

    def remap(q: Query) -> Query:
        new_id = mapping.get(q.op_id, q.op_id)
        if new_id == q.op_id:
            return q
        return dataclasses.replace(q, op_id=new_id)

    features = []
    for feat in program.features:
        feat = _map_feature_queries(feat, remap)
        body = feat.params.get("entities")
        if isinstance(body, SketchBody):
            entities = tuple(
                dataclasses.replace(e, id=mapping.get(e.id, e.id)) for e in body.entities
            )
            if entities != body.entities:
                params = dict(feat.params)
                params["entities"] = SketchBody(entities)
                feat = dataclasses.replace(feat, params=params)
        new_id = mapping.get(feat.id, feat.id)
        if new_id != feat.id:
            feat = dataclasses.replace(feat, id=new_id)
        features.append(feat)

    renamed = sorted(
        (old, new) for old, new in mapping.items() if old != new
    )
    report = PassReport(
        "rename_identifiers",
        features_changed=sum(1 for f, g in zip(program.features, features) if f != g),
        identifiers_renamed=len(renamed),
        notes=tuple(f"{old} -> {new}" for old, new in renamed),
    )
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pass 7: query canonicalization
# ---------------------------------------------------------------------------


def _query_sort_key(q: Query):
    return (
        identifier_sort_key(q.op_id),
        q.query_type,
        q.entity_type.value,
        emitter.format_query(q),
    )


def pass_canonicalize_queries(program: Program, config: PassConfig):
    sketches: dict[str, tuple[SketchEntity, ...]] = {
        feat.id: sketch_entities(feat)
        for feat in program.features
        if feat.kind is OpKind.SKETCH
    }
    augmented: list[str] = []

    def canon(q: Query) -> Query:
        originals: list[Query] = []
        adjacent: list[Query] = []
        for d in q.disambiguation:
            if isinstance(d, OriginalSet):
                originals.extend(d.queries)
            else:
                adjacent.extend(d.adjacent)
        if (
            not q.disambiguation
            and q.entity_type is not EntityType.BODY
            and q.op_id in sketches
            and len(sketches[q.op_id]) >= 2
        ):
            originals = [
                Query(e.id, "SKETCH_ENTITY", EntityType.EDGE)
                for e in sketches[q.op_id]
            ]
            augmented.append(q.op_id)
        dis: list = []
        if originals:
            ordered = sorted(set(originals), key=_query_sort_key)
            dis.append(OriginalSet(tuple(ordered)))
        if adjacent:
            ordered = sorted(set(adjacent), key=_query_sort_key)
            dis.append(Topology(tuple(ordered)))
        return dataclasses.replace(q, disambiguation=tuple(dis))

    features = []
    changed = 0
    for feat in program.features:
        mapped = _map_feature_queries(feat, canon)
        if mapped != feat:
            changed += 1
        features.append(mapped)
    report = PassReport(
        "canonicalize_queries",
        features_changed=changed,
        notes=tuple(f"{fid}: original set added" for fid in augmented),
    )
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pass 8: precision rounding
# ---------------------------------------------------------------------------


def pass_round_precision(program: Program, config: PassConfig):
    exp = Decimal(1).scaleb(-config.precision_decimals)

    def round_scalar(s: Scalar) -> Scalar:
        try:
            with localcontext() as ctx:
                ctx.prec = 60
                q = s.value.quantize(exp, rounding=ROUND_HALF_UP)
        except InvalidOperation:
            return s
        if q.is_zero():
            q = q.copy_abs()
        return Scalar(q, s.unit)

    features = []
    changed = 0
    for feat in program.features:
        rounded = _map_feature_numbers(feat, round_scalar)
        if rounded is not feat:
            changed += 1
        features.append(rounded)
    report = PassReport("round_precision", features_changed=changed)
    return dataclasses.replace(program, features=tuple(features)), report


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

PASSES: dict[str, Callable[[Program, PassConfig], tuple[Program, PassReport]]] = {
    "explicit_sketch_params": pass_explicit_sketch_params,
    "standardize_units": pass_standardize_units,
    "fold_numeric_expressions": pass_fold_numeric_expressions,
    "simplify_operations": pass_simplify_operations,
    "eliminate_dead_code": pass_eliminate_dead_code,
    "rename_identifiers": pass_rename_identifiers,
    "canonicalize_queries": pass_canonicalize_queries,
    "round_precision": pass_round_precision,
}


def normalize(program: Program, config: PassConfig | None = None) -> NormalizeResult:
    """Run the full pipeline, validating structure first.

    Raises NormalizeError when the program is structurally broken or a
    pass cannot resolve a value (bad units, division by zero, degenerate
    implicit geometry).
    """
    config = config or PassConfig()
    if sorted(config.enabled_passes) != sorted(DEFAULT_PASS_ORDER):
        raise ValueError("enabled_passes must be a permutation of the full pipeline")
    diags = validate_structure(program)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        first = errors[0]
        raise NormalizeError("validate", first.feature_id, first.message)
    reports = []
    for name in config.enabled_passes:
        program, report = PASSES[name](program, config)
        reports.append(report)
    return NormalizeResult(program, tuple(reports))


# ---------------------------------------------------------------------------
# Equivalence validation
# ---------------------------------------------------------------------------

VERIFIED_GEOMETRIC = "verified-geometric"
VERIFIED_STRUCTURAL = "verified-structural"
FAILED = "failed"

# Passes that only resolve values, leaving structure alone; used to put a
# raw program into numeric agreement with its normalized form without
# renaming or removing anything.
_VALUE_PASSES = (
    "explicit_sketch_params",
    "standardize_units",
    "fold_numeric_expressions",
    "round_precision",
)

_EQUIV_SAMPLES = 4096


@dataclass(frozen=True)
class ValidationResult:
    status: str
    detail: str = ""
    chamfer: float | None = None

    @property
    def verified(self) -> bool:
        return self.status != FAILED


def _erased_signature(program: Program) -> list[str]:
    """Feature texts with every identifier blanked, sorted."""

    def erase(q: Query) -> Query:
        return dataclasses.replace(q, op_id="_")

    texts = []
    for feat in program.features:
        feat = _map_feature_queries(feat, erase)
        body = feat.params.get("entities")
        if isinstance(body, SketchBody):
            params = dict(feat.params)
            params["entities"] = SketchBody(
                tuple(dataclasses.replace(e, id="_") for e in body.entities)
            )
            feat = dataclasses.replace(feat, params=params)
        feat = dataclasses.replace(feat, id="_")
        texts.append(emitter.emit_feature(feat))
    return sorted(texts)


def validate_equivalence(
    raw: Program,
    normalized: Program,
    tolerance: float = 1e-6,
    config: PassConfig | None = None,
) -> ValidationResult:
    """Check that normalization preserved the design.

    When both programs fall in the geometrically evaluable subset, both
    are constructed and surface-sampled with one fixed seed; the chamfer
    distance relative to the raw bounding-box diagonal must stay within
    tolerance.  Otherwise the raw program is fully normalized and the two
    feature lists must agree up to identifier names.
    """
    import math as _math

    from . import geometry, metrics, sampling

    config = config or PassConfig()
    diags = validate_structure(raw)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        return ValidationResult(FAILED, f"raw program invalid: {errors[0].message}")

    value_normalized = raw
    try:
        for name in _VALUE_PASSES:
            value_normalized, _ = PASSES[name](value_normalized, config)
    except NormalizeError as exc:
        return ValidationResult(FAILED, f"raw program does not normalize: {exc}")

    raw_reason = geometry.unsupported_reason(value_normalized)
    norm_reason = geometry.unsupported_reason(normalized)
    if raw_reason is None and norm_reason is None:
        try:
            raw_bodies = geometry.interpret(value_normalized)
        except geometry.InterpretError as exc:
            return ValidationResult(FAILED, f"raw program does not construct: {exc}")
        try:
            norm_bodies = geometry.interpret(normalized)
        except geometry.InterpretError as exc:
            return ValidationResult(
                FAILED, f"normalized program does not construct: {exc}"
            )
        raw_mesh = geometry.combine_meshes(list(raw_bodies.values()))
        norm_mesh = geometry.combine_meshes(list(norm_bodies.values()))
        raw_pts = sampling.sample_surface(raw_mesh, _EQUIV_SAMPLES, 0).points
        norm_pts = sampling.sample_surface(norm_mesh, _EQUIV_SAMPLES, 0).points
        cd = metrics.chamfer_distance(raw_pts, norm_pts)
        diagonal = geometry.bounding_box(raw_mesh).diagonal
        if diagonal <= 0.0:
            return ValidationResult(FAILED, "raw geometry is degenerate")
        relative = _math.sqrt(cd) / diagonal
        if relative <= tolerance:
            return ValidationResult(VERIFIED_GEOMETRIC, chamfer=relative)
        return ValidationResult(
            FAILED,
            f"geometry moved by {relative:.3e} of the bounding diagonal",
            chamfer=relative,
        )

    try:
        full = normalize(raw, config).program
    except NormalizeError as exc:
        return ValidationResult(FAILED, f"raw program does not normalize: {exc}")
    if _erased_signature(full) == _erased_signature(normalized):
        return ValidationResult(VERIFIED_STRUCTURAL)
    return ValidationResult(FAILED, "feature lists differ after normalization")
