"""Geometric evaluation of the sketch-and-extrude subset.

The interpreter executes programs whose features fall in the desk-scale
subset: sketches of lines, circles and arcs on base or offset/rotated
construction planes, extrusions without draft, unions of bodies with
strictly disjoint bounding boxes, and body deletion.  Output is one
watertight, outward-oriented triangle mesh per surviving body.

Anything outside that subset raises InterpretError with one of four
reasons, so callers can tell an unsupported modeling operation from a
profile that genuinely fails to bound a region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import schema
from .geomutil import scalar_float, vec_floats
from .model import (
    Arc,
    BoolValue,
    Circle,
    Feature,
    Line,
    OpKind,
    OriginalSet,
    Program,
    Query,
    RawExpr,
    Scalar,
    TextValue,
    ValueList,
    iter_values,
    sketch_entities,
)

# Points this close are considered coincident when chaining profile
# segments; normalized coordinates are quantized far coarser than this.
CHAIN_TOLERANCE = 1e-6

# Full circles discretize to this many chords; arcs take a proportional
# share so a quarter arc matches a quarter of a circle exactly.
CIRCLE_SEGMENTS = 64


class InterpretError(Exception):
    UNSUPPORTED = "unsupported-operation"
    OPEN_PROFILE = "open-profile"
    SELF_INTERSECTING = "self-intersecting-profile"
    EMPTY_RESULT = "empty-result"

    def __init__(self, feature_id: str | None, reason: str, message: str = ""):
        detail = f": {message}" if message else ""
        where = feature_id or "<program>"
        super().__init__(f"{where}: {reason}{detail}")
        self.feature_id = feature_id
        self.reason = reason
        self.detail = message


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must be (n, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must be (m, 3)")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)


@dataclass(frozen=True)
class BBox:
    minimum: tuple[float, float, float]
    maximum: tuple[float, float, float]

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.minimum, self.maximum))

    @property
    def extent(self) -> tuple[float, float, float]:
        return tuple(hi - lo for lo, hi in zip(self.minimum, self.maximum))

    @property
    def max_extent(self) -> float:
        return max(self.extent)

    @property
    def scale(self) -> float:
        """Half the largest extent."""
        return self.max_extent / 2.0

    @property
    def diagonal(self) -> float:
        return math.sqrt(sum(e * e for e in self.extent))


def bounding_box(mesh: Mesh) -> BBox:
    if len(mesh.vertices) == 0:
        raise ValueError("mesh has no vertices")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    return BBox(tuple(float(x) for x in lo), tuple(float(x) for x in hi))


def points_bounding_box(points: np.ndarray) -> BBox:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("no points")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return BBox(tuple(float(x) for x in lo), tuple(float(x) for x in hi))


def combine_meshes(meshes: list[Mesh]) -> Mesh:
    if not meshes:
        raise ValueError("no meshes to combine")
    if len(meshes) == 1:
        return meshes[0]
    verts = []
    tris = []
    offset = 0
    for mesh in meshes:
        verts.append(mesh.vertices)
        tris.append(mesh.triangles + offset)
        offset += len(mesh.vertices)
    return Mesh(np.vstack(verts), np.vstack(tris))


def mesh_volume(mesh: Mesh) -> float:
    """Signed volume via the divergence theorem (positive when outward)."""
    v = mesh.vertices
    t = mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def mesh_area(mesh: Mesh) -> float:
    v = mesh.vertices
    t = mesh.triangles
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    return float(np.linalg.norm(cross, axis=1).sum() / 2.0)


def _fmt_round(x: float) -> str:
    # Sizes describe geometry that travels through single-precision
    # interchange formats (binary STL stores float32), so quantize to
    # float32 before the two-decimal rounding.
    r = round(float(np.float32(x)), 2)
    if r == 0.0:
        r = 0.0
    return repr(r)


def bbox_prompt(bbox: BBox) -> str:
    """One-line size description of a bounding volume.

    Numbers are rounded to two decimals and printed in shortest float
    form, e.g. 50.8 rather than 50.80.
    """
    lo = ", ".join(_fmt_round(x) for x in bbox.minimum)
    hi = ", ".join(_fmt_round(x) for x in bbox.maximum)
    center = ", ".join(_fmt_round(x) for x in bbox.center)
    scale = _fmt_round(bbox.scale)
    return f"Bounds from ({lo}) to ({hi}), center = ({center}), scale = {scale}"


# ---------------------------------------------------------------------------
# Plane frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    origin: tuple[float, float, float]
    x_axis: tuple[float, float, float]
    y_axis: tuple[float, float, float]
    normal: tuple[float, float, float]

    def to_world(self, u: float, v: float, w: float) -> tuple[float, float, float]:
        return tuple(
            self.origin[i] + u * self.x_axis[i] + v * self.y_axis[i] + w * self.normal[i]
            for i in range(3)
        )


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _base_frame(name: str) -> Frame:
    if name == "XY":
        x, n = (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)
    elif name == "XZ":
        x, n = (1.0, 0.0, 0.0), (0.0, -1.0, 0.0)
    elif name == "YZ":
        x, n = (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)
    else:
        raise ValueError(f"unknown base plane {name!r}")
    return Frame((0.0, 0.0, 0.0), x, _cross(n, x), n)


def _rotate_about(v, axis, degrees: float):
    """Rodrigues rotation of v about a unit axis."""
    rad = math.radians(degrees)
    c, s = math.cos(rad), math.sin(rad)
    dot = sum(v[i] * axis[i] for i in range(3))
    cx = _cross(axis, v)
    return tuple(
        v[i] * c + cx[i] * s + axis[i] * dot * (1.0 - c) for i in range(3)
    )


def construction_frame(base: str, offset: float, angle: float) -> Frame:
    """Base plane rotated about its own x axis, then offset along its normal."""
    frame = _base_frame(base)
    normal = frame.normal
    y_axis = frame.y_axis
    if angle != 0.0:
        normal = _rotate_about(normal, frame.x_axis, angle)
        y_axis = _rotate_about(y_axis, frame.x_axis, angle)
    origin = tuple(frame.origin[i] + offset * normal[i] for i in range(3))
    return Frame(origin, frame.x_axis, y_axis, normal)


# ---------------------------------------------------------------------------
# Profile regions
# ---------------------------------------------------------------------------

Point2 = tuple[float, float]


@dataclass
class Region:
    outer: list[Point2]  # counter-clockwise
    holes: list[list[Point2]]  # clockwise


def _close(a: Point2, b: Point2) -> bool:
    return abs(a[0] - b[0]) <= CHAIN_TOLERANCE and abs(a[1] - b[1]) <= CHAIN_TOLERANCE


def _entity_polyline(entity, fid: str) -> list[Point2]:
    if isinstance(entity, Line):
        return [tuple(vec_floats(entity.start)), tuple(vec_floats(entity.end))]
    if isinstance(entity, Arc):
        return _arc_points(
            tuple(vec_floats(entity.start)),
            tuple(vec_floats(entity.mid)),
            tuple(vec_floats(entity.end)),
        )
    raise InterpretError(
        fid, InterpretError.UNSUPPORTED, f"sketch entity {type(entity).__name__}"
    )


def _arc_points(p0: Point2, p1: Point2, p2: Point2) -> list[Point2]:
    ax, ay = p0
    bx, by = p1
    cx, cy = p2
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return [p0, p2]
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    radius = math.hypot(ax - ux, ay - uy)
    a0 = math.atan2(ay - uy, ax - ux)
    am = math.atan2(by - uy, bx - ux)
    a1 = math.atan2(cy - uy, cx - ux)
    two_pi = 2.0 * math.pi
    ccw_sweep = (a1 - a0) % two_pi
    mid_offset = (am - a0) % two_pi
    if mid_offset <= ccw_sweep:
        sweep = ccw_sweep
    else:
        sweep = ccw_sweep - two_pi
    count = max(2, math.ceil(CIRCLE_SEGMENTS * abs(sweep) / two_pi))
    points = [p0]
    for k in range(1, count):
        t = a0 + sweep * k / count
        points.append((ux + radius * math.cos(t), uy + radius * math.sin(t)))
    points.append(p2)
    return points


def _circle_points(entity: Circle) -> list[Point2]:
    cx, cy = vec_floats(entity.center)
    radius = scalar_float(entity.radius)
    points = []
    for k in range(CIRCLE_SEGMENTS):
        t = 2.0 * math.pi * k / CIRCLE_SEGMENTS
        points.append((cx + radius * math.cos(t), cy + radius * math.sin(t)))
    return points


def _chain_loops(entities, fid: str) -> list[list[Point2]]:
    """Connect entity polylines end to end into closed loops."""
    loops: list[list[Point2]] = []
    open_chains: list[list[Point2]] = []
    for entity in entities:
        if isinstance(entity, Circle):
            loops.append(_circle_points(entity))
        else:
            open_chains.append(_entity_polyline(entity, fid))

    while open_chains:
        current = open_chains.pop(0)
        while True:
            if _close(current[0], current[-1]):
                current.pop()
                if len(current) < 3:
                    raise InterpretError(fid, InterpretError.OPEN_PROFILE, "degenerate loop")
                loops.append(current)
                break
            matches = []
            for idx, chain in enumerate(open_chains):
                if _close(chain[0], current[-1]):
                    matches.append((idx, False))
                if _close(chain[-1], current[-1]):
                    matches.append((idx, True))
            if not matches:
                raise InterpretError(
                    fid, InterpretError.OPEN_PROFILE, "profile does not close"
                )
            if len(matches) > 1:
                raise InterpretError(
                    fid,
                    InterpretError.SELF_INTERSECTING,
                    "more than two profile segments meet at one point",
                )
            idx, reverse = matches[0]
            chain = open_chains.pop(idx)
            if reverse:
                chain = chain[::-1]
            current.extend(chain[1:])
    return loops


def _signed_area(loop: list[Point2]) -> float:
    total = 0.0
    for i in range(len(loop)):
        x0, y0 = loop[i]
        x1, y1 = loop[(i + 1) % len(loop)]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def _point_in_loop(point: Point2, loop: list[Point2]) -> bool:
    """Even-odd ray cast along +x."""
    x, y = point
    inside = False
    n = len(loop)
    for i in range(n):
        x0, y0 = loop[i]
        x1, y1 = loop[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x0 + t * (x1 - x0) > x:
                inside = not inside
    return inside


def _segments_intersect(p, q, r, s) -> bool:
    """True when segments pq and rs share any point."""

    def orient(a, b, c) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c) -> bool:
        return (
            min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12
            and min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12
        )

    o1 = orient(p, q, r)
    o2 = orient(p, q, s)
    o3 = orient(r, s, p)
    o4 = orient(r, s, q)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and on_segment(p, q, r):
        return True
    if o2 == 0 and on_segment(p, q, s):
        return True
    if o3 == 0 and on_segment(r, s, p):
        return True
    if o4 == 0 and on_segment(r, s, q):
        return True
    return False


def _loop_segments(loop: list[Point2]):
    n = len(loop)
    for i in range(n):
        yield i, loop[i], loop[(i + 1) % n]


def _check_simple(loops: list[list[Point2]], fid: str) -> None:
    for loop in loops:
        if abs(_signed_area(loop)) == 0.0:
            raise InterpretError(fid, InterpretError.SELF_INTERSECTING, "zero-area loop")
        n = len(loop)
        for i, a0, a1 in _loop_segments(loop):
            for j, b0, b1 in _loop_segments(loop):
                if j <= i:
                    continue
                adjacent = (j == i + 1) or (i == 0 and j == n - 1)
                if adjacent:
                    continue
                if _segments_intersect(a0, a1, b0, b1):
                    raise InterpretError(
                        fid, InterpretError.SELF_INTERSECTING, "profile crosses itself"
                    )
    for i in range(len(loops)):
        for j in range(i + 1, len(loops)):
            for _, a0, a1 in _loop_segments(loops[i]):
                for _, b0, b1 in _loop_segments(loops[j]):
                    if _segments_intersect(a0, a1, b0, b1):
                        raise InterpretError(
                            fid, InterpretError.SELF_INTERSECTING, "profile loops touch"
                        )


def build_regions(entities, fid: str) -> list[Region]:
    """Closed, simple, nested regions from line/circle/arc entities."""
    loops = _chain_loops(entities, fid)
    _check_simple(loops, fid)
    depth = []
    for i, loop in enumerate(loops):
        d = sum(
            1 for j, other in enumerate(loops) if j != i and _point_in_loop(loop[0], other)
        )
        depth.append(d)
    regions: list[Region] = []
    region_of: dict[int, Region] = {}
    for i, loop in enumerate(loops):
        if depth[i] % 2 == 0:
            oriented = loop if _signed_area(loop) > 0 else loop[::-1]
            region = Region(outer=oriented, holes=[])
            regions.append(region)
            region_of[i] = region
    for i, loop in enumerate(loops):
        if depth[i] % 2 == 1:
            parent = None
            for j, other in enumerate(loops):
                if j != i and depth[j] == depth[i] - 1 and _point_in_loop(loop[0], other):
                    parent = j
            if parent is None or parent not in region_of:
                raise InterpretError(
                    fid, InterpretError.SELF_INTERSECTING, "hole without an outer loop"
                )
            oriented = loop if _signed_area(loop) < 0 else loop[::-1]
            region_of[parent].holes.append(oriented)
    return regions


# ---------------------------------------------------------------------------
# Triangulation (ear clipping with hole bridging)
# ---------------------------------------------------------------------------


def _bridge_holes(outer: list[Point2], holes: list[list[Point2]], fid: str) -> list[Point2]:
    """Merge holes into the outer loop with pairs of opposing bridge edges."""
    poly = list(outer)
    for hole in sorted(holes, key=lambda h: max(p[0] for p in h), reverse=True):
        m_idx = max(range(len(hole)), key=lambda k: (hole[k][0], hole[k][1]))
        m = hole[m_idx]
        best_t = None
        best_edge = None
        for i, a, b in _loop_segments(poly):
            # +x ray from m; semi-open in y so shared vertices count once
            if (a[1] <= m[1] < b[1]) or (b[1] <= m[1] < a[1]):
                t = a[0] + (m[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0])
                if t >= m[0] - 1e-12 and (best_t is None or t < best_t):
                    best_t = t
                    best_edge = i
        if best_edge is None:
            raise InterpretError(
                fid, InterpretError.SELF_INTERSECTING, "hole outside its outer loop"
            )
        a = poly[best_edge]
        b = poly[(best_edge + 1) % len(poly)]
        candidate_idx = best_edge if a[0] > b[0] else (best_edge + 1) % len(poly)
        intersection = (best_t, m[1])
        # The bridge target must be visible from m: among vertices inside
        # the m/intersection/candidate triangle, take the one with the
        # smallest angle off the +x ray, closest first on ties.
        tri = (m, intersection, poly[candidate_idx])
        best = candidate_idx
        best_key = None
        for k, p in enumerate(poly):
            if p == m or k == candidate_idx:
                continue
            if _point_in_triangle(p, tri):
                dx, dy = p[0] - m[0], p[1] - m[1]
                if dx <= 0.0:
                    continue
                key = (abs(dy) / dx, math.hypot(dx, dy))
                if best_key is None or key < best_key:
                    best_key = key
                    best = k
        rotated = hole[m_idx:] + hole[:m_idx]
        poly = (
            poly[: best + 1]
            + rotated
            + [rotated[0], poly[best]]
            + poly[best + 1 :]
        )
    return poly


def _point_in_triangle(p: Point2, tri) -> bool:
    (ax, ay), (bx, by), (cx, cy) = tri
    d1 = (p[0] - bx) * (ay - by) - (ax - bx) * (p[1] - by)
    d2 = (p[0] - cx) * (by - cy) - (bx - cx) * (p[1] - cy)
    d3 = (p[0] - ax) * (cy - ay) - (cx - ax) * (p[1] - ay)
    has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
    has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
    return not (has_neg and has_pos)


def triangulate_polygon(points: list[Point2], fid: str) -> list[tuple[int, int, int]]:
    """Ear-clip a counter-clockwise (weakly) simple polygon."""
    n = len(points)
    if n < 3:
        return []
    indices = list(range(n))
    triangles: list[tuple[int, int, int]] = []
    scale = max(
        max(p[0] for p in points) - min(p[0] for p in points),
        max(p[1] for p in points) - min(p[1] for p in points),
    )
    eps = 1e-12 * scale * scale

    def cross_at(i0: int, i1: int, i2: int) -> float:
        (x0, y0), (x1, y1), (x2, y2) = points[i0], points[i1], points[i2]
        return (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)

    def strictly_inside(p: Point2, tri) -> bool:
        (ax, ay), (bx, by), (cx, cy) = tri
        d1 = (p[0] - ax) * (by - ay) - (bx - ax) * (p[1] - ay)
        d2 = (p[0] - bx) * (cy - by) - (cx - bx) * (p[1] - by)
        d3 = (p[0] - cx) * (ay - cy) - (ax - cx) * (p[1] - cy)
        return d1 < -eps and d2 < -eps and d3 < -eps

    guard = 0
    while len(indices) > 3:
        guard += 1
        if guard > 4 * n * n:
            raise InterpretError(
                fid, InterpretError.SELF_INTERSECTING, "profile cannot be triangulated"
            )
        m = len(indices)
        clipped = False
        for k in range(m):
            i0, i1, i2 = indices[k - 1], indices[k], indices[(k + 1) % m]
            area2 = cross_at(i0, i1, i2)
            if abs(area2) <= eps:
                # collinear corner: drop the middle vertex, no triangle
                del indices[k]
                clipped = True
                break
            if area2 < 0:
                continue
            tri = (points[i0], points[i1], points[i2])
            corner_coords = set(tri)
            blocked = False
            for idx in indices:
                if idx in (i0, i1, i2) or points[idx] in corner_coords:
                    continue
                if strictly_inside(points[idx], tri):
                    blocked = True
                    break
            if not blocked:
                triangles.append((i0, i1, i2))
                del indices[k]
                clipped = True
                break
        if not clipped:
            raise InterpretError(
                fid, InterpretError.SELF_INTERSECTING, "no ear found while triangulating"
            )
    if len(indices) == 3:
        i0, i1, i2 = indices
        if abs(cross_at(i0, i1, i2)) > eps:
            triangles.append((i0, i1, i2))
    return triangles


# ---------------------------------------------------------------------------
# Extrusion
# ---------------------------------------------------------------------------


class _MeshBuilder:
    def __init__(self):
        self._index: dict[tuple[float, float, float], int] = {}
        self.vertices: list[tuple[float, float, float]] = []
        self.triangles: list[tuple[int, int, int]] = []

    def vertex(self, p: tuple[float, float, float]) -> int:
        idx = self._index.get(p)
        if idx is None:
            idx = len(self.vertices)
            self._index[p] = idx
            self.vertices.append(p)
        return idx

    def triangle(self, a, b, c) -> None:
        ia, ib, ic = self.vertex(a), self.vertex(b), self.vertex(c)
        if ia == ib or ib == ic or ia == ic:
            return
        self.triangles.append((ia, ib, ic))

    def build(self) -> Mesh:
        return Mesh(np.array(self.vertices, dtype=np.float64),
                    np.array(self.triangles, dtype=np.int64).reshape(-1, 3))


def extrude_regions(regions: list[Region], frame: Frame, w0: float, w1: float,
                    fid: str) -> Mesh:
    """Prism mesh between offsets w0 < w1 along the frame normal."""
    builder = _MeshBuilder()
    for region in regions:
        bridged = _bridge_holes(region.outer, region.holes, fid)
        tris = triangulate_polygon(bridged, fid)
        for i0, i1, i2 in tris:
            p0, p1, p2 = bridged[i0], bridged[i1], bridged[i2]
            # top cap keeps the counter-clockwise winding, bottom reverses
            builder.triangle(
                frame.to_world(p0[0], p0[1], w1),
                frame.to_world(p1[0], p1[1], w1),
                frame.to_world(p2[0], p2[1], w1),
            )
            builder.triangle(
                frame.to_world(p0[0], p0[1], w0),
                frame.to_world(p2[0], p2[1], w0),
                frame.to_world(p1[0], p1[1], w0),
            )
        for loop in [region.outer] + region.holes:
            for _, a, b in _loop_segments(loop):
                a0 = frame.to_world(a[0], a[1], w0)
                b0 = frame.to_world(b[0], b[1], w0)
                a1 = frame.to_world(a[0], a[1], w1)
                b1 = frame.to_world(b[0], b[1], w1)
                builder.triangle(a0, b0, b1)
                builder.triangle(a0, b1, a1)
    mesh = builder.build()
    if len(mesh.triangles) == 0:
        raise InterpretError(fid, InterpretError.EMPTY_RESULT, "no volume produced")
    return mesh


# ---------------------------------------------------------------------------
# Program interpretation
# ---------------------------------------------------------------------------

_SUPPORTED_KINDS = {
    OpKind.SKETCH,
    OpKind.CONSTRUCTION_PLANE,
    OpKind.EXTRUDE,
    OpKind.BOOLEAN,
    OpKind.DELETE_BODY,
}

_SUPPORTED_ENTITIES = (Line, Circle, Arc)


def unsupported_reason(program: Program) -> str | None:
    """Why interpretation would refuse this program, or None if it is in
    the supported subset.  Mirrors the checks interpret() applies."""
    for feat in program.features:
        if feat.kind not in _SUPPORTED_KINDS:
            return f"{feat.id}: operation {feat.kind.value}"
        for value in feat.params.values():
            for v in iter_values(value):
                if isinstance(v, RawExpr):
                    return f"{feat.id}: unresolved expression"
        if feat.kind is OpKind.SKETCH:
            for entity in sketch_entities(feat):
                if not isinstance(entity, _SUPPORTED_ENTITIES):
                    return f"{feat.id}: sketch entity {type(entity).__name__}"
        if feat.kind is OpKind.EXTRUDE:
            draft = feat.params.get("draft")
            if isinstance(draft, Scalar) and scalar_float(draft) != 0.0:
                return f"{feat.id}: drafted extrude"
        if feat.kind is OpKind.BOOLEAN:
            mode = feat.params.get("mode")
            if not isinstance(mode, TextValue) or mode.value != "union":
                return f"{feat.id}: boolean mode"
    return None


def _param(feat: Feature, name: str):
    value = feat.params.get(name)
    if value is not None:
        return value
    spec = schema.spec_for(feat.kind, name)
    return spec.default if spec else None


def _scalar_param(feat: Feature, name: str) -> float:
    value = _param(feat, name)
    if isinstance(value, Scalar):
        return scalar_float(value)
    raise InterpretError(
        feat.id, InterpretError.UNSUPPORTED, f"parameter {name} is not a plain number"
    )


def _profile_entities(feat: Feature, program: Program, fid: str):
    """Resolve profile queries to (sketch feature, selected entities)."""
    profile = feat.params.get("profile")
    if not isinstance(profile, ValueList) or not profile.items:
        raise InterpretError(fid, InterpretError.UNSUPPORTED, "missing profile")
    sketch_by_id = {
        f.id: f for f in program.features if f.kind is OpKind.SKETCH
    }
    entity_owner: dict[str, str] = {}
    for f in program.features:
        for e in sketch_entities(f):
            entity_owner[e.id] = f.id

    sketch_ids: set[str] = set()
    wanted: set[str] = set()
    whole = False
    for q in profile.items:
        if not isinstance(q, Query):
            raise InterpretError(fid, InterpretError.UNSUPPORTED, "profile must be queries")
        if q.op_id in sketch_by_id:
            sketch_ids.add(q.op_id)
            originals = [d for d in q.disambiguation if isinstance(d, OriginalSet)]
            if originals:
                for oset in originals:
                    for oq in oset.queries:
                        wanted.add(oq.op_id)
            else:
                whole = True
        elif q.op_id in entity_owner:
            sketch_ids.add(entity_owner[q.op_id])
            wanted.add(q.op_id)
        else:
            raise InterpretError(
                fid, InterpretError.UNSUPPORTED, f"profile target {q.op_id} is not a sketch"
            )
    if len(sketch_ids) != 1:
        raise InterpretError(
            fid, InterpretError.UNSUPPORTED, "profile must reference exactly one sketch"
        )
    sketch = sketch_by_id[sketch_ids.pop()]
    entities = sketch_entities(sketch)
    if not whole:
        entities = tuple(e for e in entities if e.id in wanted)
    if not entities:
        raise InterpretError(fid, InterpretError.EMPTY_RESULT, "profile selects nothing")
    return sketch, entities


def _bboxes_strictly_disjoint(a: BBox, b: BBox) -> bool:
    for axis in range(3):
        if a.maximum[axis] < b.minimum[axis] or b.maximum[axis] < a.minimum[axis]:
            return True
    return False


def interpret(program: Program) -> dict[str, Mesh]:
    """Execute a program, returning surviving bodies by feature identifier.

    Raises InterpretError for anything outside the supported subset, for
    profiles that fail to bound a region, and for programs that end with
    no bodies at all.
    """
    frames: dict[str, Frame] = {}
    bodies: dict[str, Mesh] = {}

    for feat in program.features:
        fid = feat.id
        if feat.kind is OpKind.SKETCH:
            continue
        if feat.kind is OpKind.CONSTRUCTION_PLANE:
            base = _param(feat, "base")
            if not isinstance(base, TextValue):
                raise InterpretError(fid, InterpretError.UNSUPPORTED, "missing base plane")
            frames[fid] = construction_frame(
                base.value,
                _scalar_param(feat, "offset"),
                _scalar_param(feat, "angle"),
            )
            continue
        if feat.kind is OpKind.EXTRUDE:
            if _scalar_param(feat, "draft") != 0.0:
                raise InterpretError(fid, InterpretError.UNSUPPORTED, "drafted extrude")
            sketch, entities = _profile_entities(feat, program, fid)
            frame = _sketch_frame(sketch, frames)
            regions = build_regions(entities, fid)
            depth = _scalar_param(feat, "depth")
            midplane = _param(feat, "midplane")
            if isinstance(midplane, BoolValue) and midplane.value:
                w0, w1 = -depth / 2.0, depth / 2.0
            else:
                w0, w1 = -_scalar_param(feat, "opposite_depth"), depth
            if not w1 > w0:
                raise InterpretError(fid, InterpretError.EMPTY_RESULT, "zero-thickness extrude")
            bodies[fid] = extrude_regions(regions, frame, w0, w1, fid)
            continue
        if feat.kind is OpKind.BOOLEAN:
            mode = _param(feat, "mode")
            if not isinstance(mode, TextValue) or mode.value != "union":
                raise InterpretError(fid, InterpretError.UNSUPPORTED, "boolean mode")
            merged: list[Mesh] = []
            for name in ("targets", "tools"):
                value = feat.params.get(name)
                if not isinstance(value, ValueList):
                    continue
                for q in value.items:
                    if not isinstance(q, Query) or q.op_id not in bodies:
                        raise InterpretError(
                            fid, InterpretError.UNSUPPORTED, f"{name} is not a live body"
                        )
                    merged.append(bodies.pop(q.op_id))
            if not merged:
                raise InterpretError(fid, InterpretError.EMPTY_RESULT, "union of nothing")
            boxes = [bounding_box(m) for m in merged]
            for i in range(len(boxes)):
                for j in range(i + 1, len(boxes)):
                    if not _bboxes_strictly_disjoint(boxes[i], boxes[j]):
                        raise InterpretError(
                            fid,
                            InterpretError.UNSUPPORTED,
                            "union requires strictly disjoint bodies",
                        )
            bodies[fid] = combine_meshes(merged)
            continue
        if feat.kind is OpKind.DELETE_BODY:
            targets = feat.params.get("targets")
            if not isinstance(targets, ValueList):
                raise InterpretError(fid, InterpretError.UNSUPPORTED, "missing targets")
            for q in targets.items:
                if not isinstance(q, Query) or q.op_id not in bodies:
                    raise InterpretError(
                        fid, InterpretError.UNSUPPORTED, "target is not a live body"
                    )
                del bodies[q.op_id]
            continue
        raise InterpretError(fid, InterpretError.UNSUPPORTED, f"operation {feat.kind.value}")

    if not bodies:
        raise InterpretError(None, InterpretError.EMPTY_RESULT, "no bodies survive")
    return bodies


def _sketch_frame(sketch: Feature, frames: dict[str, Frame]) -> Frame:
    plane = sketch.params.get("plane")
    if plane is None or (isinstance(plane, TextValue) and plane.value in ("XY", "XZ", "YZ")):
        name = plane.value if isinstance(plane, TextValue) else "XY"
        return _base_frame(name)
    if isinstance(plane, Query):
        frame = frames.get(plane.op_id)
        if frame is None:
            raise InterpretError(
                sketch.id, InterpretError.UNSUPPORTED, "sketch plane is not a construction plane"
            )
        return frame
    raise InterpretError(sketch.id, InterpretError.UNSUPPORTED, "unsupported sketch plane")


def interpret_combined(program: Program) -> Mesh:
    """All surviving bodies as one mesh, in creation order."""
    return combine_meshes(list(interpret(program).values()))
