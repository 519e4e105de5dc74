"""Regenerate corpus/canonical from the authored program list below.

Each program is written in the raw dialect for readability, pushed
through the full normalization pipeline, and committed in canonical
form.  The tool refuses to write anything that is not a byte-stable
fixed point of both normalize and emit/parse.

Run from the repository root:  python3 tools/make_corpus.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cadhist.emitter import emit_program
from cadhist.normalize import normalize
from cadhist.parser import parse_program

PROGRAMS: list[tuple[str, str]] = [
    (
        "c01_disc",
        """
sketch = Sketch(entities = [
    rim: Circle(center = (0, 0), radius = 20)
]);
body = Extrude(profile = [query(sketch, SKETCH_REGION, FACE)], depth = 8);
""",
    ),
    (
        "c02_plate",
        """
outline = Sketch(entities = [
    south: Line(start = (0, 0), end = (30, 0)),
    east: Line(start = (30, 0), end = (30, 15)),
    north: Line(start = (30, 15), end = (0, 15)),
    west: Line(start = (0, 15), end = (0, 0))
]);
plate = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 5);
""",
    ),
    (
        "c03_washer",
        """
rings = Sketch(entities = [
    outer: Circle(center = (0, 0), radius = 20),
    bore: Circle(center = (0, 0), radius = 8)
]);
washer = Extrude(profile = [query(rings, SKETCH_REGION, FACE)], depth = 6);
""",
    ),
    (
        "c04_slot",
        """
outline = Sketch(entities = [
    bottom: Line(start = (-10, -5), end = (10, -5)),
    right_cap: Arc(start = (10, -5), mid = (15, 0), end = (10, 5)),
    top: Line(start = (10, 5), end = (-10, 5)),
    left_cap: Arc(start = (-10, 5), mid = (-15, 0), end = (-10, -5))
]);
slot = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 4);
""",
    ),
    (
        "c05_offset_plane",
        """
shelf = ConstructionPlane(base = XZ, offset = 15);
section = Sketch(plane = query(shelf, CREATED, FACE), entities = [
    rim: Circle(center = (0, 0), radius = 10)
]);
boss = Extrude(profile = [query(section, SKETCH_REGION, FACE)], depth = 5);
""",
    ),
    (
        "c06_midplane",
        """
wedge = Sketch(entities = [
    base_edge: Line(start = (0, 0), end = (24, 0)),
    slope: Line(start = (24, 0), end = (0, 18)),
    upright: Line(start = (0, 18), end = (0, 0))
]);
prism = Extrude(profile = [query(wedge, SKETCH_REGION, FACE)], depth = 10, midplane = true);
""",
    ),
    (
        "c07_union",
        """
left_sketch = Sketch(entities = [
    left_rim: Circle(center = (-30, 0), radius = 10)
]);
left_body = Extrude(profile = [query(left_sketch, SKETCH_REGION, FACE)], depth = 6);
right_sketch = Sketch(entities = [
    right_rim: Circle(center = (30, 0), radius = 10)
]);
right_body = Extrude(profile = [query(right_sketch, SKETCH_REGION, FACE)], depth = 6);
pair = Boolean(mode = union, targets = [query(left_body, CREATED, BODY), query(right_body, CREATED, BODY)]);
""",
    ),
    (
        "c08_subtract",
        """
slab_profile = Sketch(entities = [
    s1: Line(start = (0, 0), end = (40, 0)),
    s2: Line(start = (40, 0), end = (40, 40)),
    s3: Line(start = (40, 40), end = (0, 40)),
    s4: Line(start = (0, 40), end = (0, 0))
]);
slab = Extrude(profile = [query(slab_profile, SKETCH_REGION, FACE)], depth = 10);
post_profile = Sketch(entities = [
    bore: Circle(center = (20, 20), radius = 5)
]);
post = Extrude(profile = [query(post_profile, SKETCH_REGION, FACE)], depth = 20);
pocketed = Boolean(mode = subtract, targets = [query(slab, CREATED, BODY)], tools = [query(post, CREATED, BODY)]);
""",
    ),
    (
        "c09_delete_live",
        """
base_sketch = Sketch(entities = [
    rim: Circle(center = (0, 0), radius = 12)
]);
base_body = Extrude(profile = [query(base_sketch, SKETCH_REGION, FACE)], depth = 6);
shifted = Transform(entities = [query(base_body, CREATED, BODY)], translation = (40, 0, 0), copy = true);
cleanup = DeleteBody(targets = [query(base_body, CREATED, BODY)]);
""",
    ),
    (
        "c10_revolve",
        """
half = Sketch(entities = [
    spine: Line(start = (0, -10), end = (0, 10)),
    bow: Arc(start = (0, 10), mid = (10, 0), end = (0, -10))
]);
bowl = Revolve(profile = [query(half, SKETCH_REGION, FACE)], axis = query(spine, SKETCH_ENTITY, EDGE), angle = 270);
""",
    ),
    (
        "c11_sweep",
        """
section = Sketch(entities = [
    rim: Circle(center = (0, 0), radius = 3)
]);
rail = Sketch(plane = XZ, entities = [
    guide: Line(start = (0, 0), end = (0, 40))
]);
tube = Sweep(profile = [query(section, SKETCH_REGION, FACE)], path = [query(guide, SKETCH_ENTITY, EDGE)]);
""",
    ),
    (
        "c12_loft",
        """
bottom = Sketch(entities = [
    wide: Circle(center = (0, 0), radius = 15)
]);
lifted = ConstructionPlane(base = XY, offset = 30);
top = Sketch(plane = query(lifted, CREATED, FACE), entities = [
    narrow: Circle(center = (0, 0), radius = 5)
]);
funnel = Loft(profiles = [query(bottom, SKETCH_REGION, FACE), query(top, SKETCH_REGION, FACE)]);
""",
    ),
    (
        "c13_fillet",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (20, 0)),
    b: Line(start = (20, 0), end = (20, 20)),
    c: Line(start = (20, 20), end = (0, 20)),
    d: Line(start = (0, 20), end = (0, 0))
]);
block = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 10);
soft = Fillet(entities = [query(block, CREATED, EDGE)], radius = 2);
""",
    ),
    (
        "c14_chamfer",
        """
section = Sketch(entities = [
    rim: Circle(center = (0, 0), radius = 14)
]);
puck = Extrude(profile = [query(section, SKETCH_REGION, FACE)], depth = 8);
beveled = Chamfer(entities = [query(puck, CREATED, EDGE, adjacent = [query(puck, CREATED, FACE)])], distance = 1.5);
""",
    ),
    (
        "c15_shell",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (30, 0)),
    b: Line(start = (30, 0), end = (30, 30)),
    c: Line(start = (30, 30), end = (0, 30)),
    d: Line(start = (0, 30), end = (0, 0))
]);
box = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 20);
open_box = Shell(faces = [query(box, CREATED, FACE)], thickness = 2);
""",
    ),
    (
        "c16_hole",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (50, 0)),
    b: Line(start = (50, 0), end = (50, 30)),
    c: Line(start = (50, 30), end = (0, 30)),
    d: Line(start = (0, 30), end = (0, 0))
]);
plate = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 8);
drilled = Hole(points = [(10, 15), (40, 15)], diameter = 6, depth = 8, style = counterbore);
""",
    ),
    (
        "c17_pattern",
        """
seed_sketch = Sketch(entities = [
    rim: Circle(center = (20, 0), radius = 6)
]);
seed = Extrude(profile = [query(seed_sketch, SKETCH_REGION, FACE)], depth = 5);
ring = CircularPattern(entities = [query(seed, CREATED, BODY)], count = 6);
""",
    ),
    (
        "c18_mirror",
        """
wedge = Sketch(entities = [
    base_edge: Line(start = (5, 0), end = (25, 0)),
    slope: Line(start = (25, 0), end = (5, 12)),
    upright: Line(start = (5, 12), end = (5, 0))
]);
ramp = Extrude(profile = [query(wedge, SKETCH_REGION, FACE)], depth = 6);
doubled = Mirror(entities = [query(ramp, CREATED, BODY)], plane = YZ);
""",
    ),
    (
        "c19_transform",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (12, 0)),
    b: Line(start = (12, 0), end = (12, 12)),
    c: Line(start = (12, 12), end = (0, 12)),
    d: Line(start = (0, 12), end = (0, 0))
]);
cube = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 12);
nudged = Transform(entities = [query(cube, CREATED, BODY)], translation = (10, 5, 0), rotation = (0, 0, 45));
""",
    ),
    (
        "c20_ellipse",
        """
oval = Sketch(entities = [
    ring: Ellipse(center = (0, 0), major_radius = 18, minor_radius = 9, rotation = 0)
]);
pad = Extrude(profile = [query(oval, SKETCH_REGION, FACE)], depth = 4);
""",
    ),
    (
        "c21_elliptical_arc",
        """
dome = Sketch(entities = [
    crown: EllipticalArc(center = (0, 0), major_radius = 12, minor_radius = 6, rotation = 0, start_angle = 0, end_angle = 180),
    floor_edge: Line(start = (-12, 0), end = (12, 0))
]);
hump = Extrude(profile = [query(dome, SKETCH_REGION, FACE)], depth = 5);
""",
    ),
    (
        "c22_bezier",
        """
wave = Sketch(entities = [
    crest: Bezier(control_points = [(0, 0), (5, 12), (15, 12), (20, 0)]),
    floor_edge: Line(start = (20, 0), end = (0, 0))
]);
hill = Extrude(profile = [query(wave, SKETCH_REGION, FACE)], depth = 6);
""",
    ),
    (
        "c23_spline",
        """
coast = Sketch(entities = [
    shore: Spline(points = [(0, 0), (8, 6), (16, 2), (24, 8)]),
    inland: Line(start = (24, 8), end = (24, 0)),
    return_edge: Line(start = (24, 0), end = (0, 0))
]);
terrain = Extrude(profile = [query(coast, SKETCH_REGION, FACE)], depth = 3);
""",
    ),
    (
        "c24_text",
        """
badge = Sketch(entities = [
    a: Line(start = (0, 0), end = (40, 0)),
    b: Line(start = (40, 0), end = (40, 14)),
    c: Line(start = (40, 14), end = (0, 14)),
    d: Line(start = (0, 14), end = (0, 0)),
    label: Text(content = "MK2", anchor = (4, 3), height = 8)
]);
tag = Extrude(profile = [query(badge, SKETCH_REGION, FACE)], depth = 2);
""",
    ),
    (
        "c25_two_bodies",
        """
pair = Sketch(entities = [
    left_rim: Circle(center = (-15, 0), radius = 8),
    right_rim: Circle(center = (15, 0), radius = 8)
]);
left_body = Extrude(profile = [query(pair, SKETCH_REGION, FACE, originals = [query(left_rim, SKETCH_ENTITY, EDGE)])], depth = 5);
right_body = Extrude(profile = [query(pair, SKETCH_REGION, FACE, originals = [query(right_rim, SKETCH_ENTITY, EDGE)])], depth = 9);
""",
    ),
    (
        "c26_angled_plane",
        """
tilted = ConstructionPlane(base = XY, offset = 10, angle = 30);
deck = Sketch(plane = query(tilted, CREATED, FACE), entities = [
    a: Line(start = (0, 0), end = (16, 0)),
    b: Line(start = (16, 0), end = (16, 10)),
    c: Line(start = (16, 10), end = (0, 10)),
    d: Line(start = (0, 10), end = (0, 0))
]);
ramp = Extrude(profile = [query(deck, SKETCH_REGION, FACE)], depth = 6);
""",
    ),
    (
        "c27_opposite_depth",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (18, 0)),
    b: Line(start = (18, 0), end = (18, 9)),
    c: Line(start = (18, 9), end = (0, 9)),
    d: Line(start = (0, 9), end = (0, 0))
]);
bar = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 10, opposite_depth = 4);
""",
    ),
    (
        "c28_draft",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (20, 0)),
    b: Line(start = (20, 0), end = (20, 20)),
    c: Line(start = (20, 20), end = (0, 20)),
    d: Line(start = (0, 20), end = (0, 0))
]);
tapered = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 8, draft = 5);
""",
    ),
    (
        "c29_chain",
        """
outline = Sketch(entities = [
    a: Line(start = (0, 0), end = (26, 0)),
    b: Line(start = (26, 0), end = (26, 14)),
    c: Line(start = (26, 14), end = (0, 14)),
    d: Line(start = (0, 14), end = (0, 0))
]);
core = Extrude(profile = [query(outline, SKETCH_REGION, FACE)], depth = 12);
soft = Fillet(entities = [query(core, CREATED, EDGE)], radius = 1.5);
eased = Chamfer(entities = [query(core, CREATED, EDGE)], distance = 1);
""",
    ),
    (
        "c30_yz_plane",
        """
side = Sketch(plane = YZ, entities = [
    rim: Circle(center = (0, 0), radius = 9)
]);
stub = Extrude(profile = [query(side, SKETCH_REGION, FACE)], depth = 7);
""",
    ),
    (
        "c31_xz_plane",
        """
front = Sketch(plane = XZ, entities = [
    a: Line(start = (0, 0), end = (22, 0)),
    b: Line(start = (22, 0), end = (22, 11)),
    c: Line(start = (22, 11), end = (0, 11)),
    d: Line(start = (0, 11), end = (0, 0))
]);
fin = Extrude(profile = [query(front, SKETCH_REGION, FACE)], depth = 4);
""",
    ),
    (
        "c32_hexagon",
        """
hex_outline = Sketch(entities = [
    e1: Line(start = (12, 0), end = (6, 10.39)),
    e2: Line(start = (6, 10.39), end = (-6, 10.39)),
    e3: Line(start = (-6, 10.39), end = (-12, 0)),
    e4: Line(start = (-12, 0), end = (-6, -10.39)),
    e5: Line(start = (-6, -10.39), end = (6, -10.39)),
    e6: Line(start = (6, -10.39), end = (12, 0))
]);
nut = Extrude(profile = [query(hex_outline, SKETCH_REGION, FACE)], depth = 10);
""",
    ),
    (
        "c33_intersect",
        """
low_profile = Sketch(entities = [
    a: Line(start = (0, 0), end = (30, 0)),
    b: Line(start = (30, 0), end = (30, 20)),
    c: Line(start = (30, 20), end = (0, 20)),
    d: Line(start = (0, 20), end = (0, 0))
]);
low = Extrude(profile = [query(low_profile, SKETCH_REGION, FACE)], depth = 15);
high_profile = Sketch(entities = [
    rim: Circle(center = (15, 10), radius = 12)
]);
high = Extrude(profile = [query(high_profile, SKETCH_REGION, FACE)], depth = 25);
common = Boolean(mode = intersect, targets = [query(low, CREATED, BODY)], tools = [query(high, CREATED, BODY)]);
""",
    ),
]


def main() -> int:
    root = Path(__file__).resolve().parent.parent
    out_dir = root / "corpus" / "canonical"
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for name, raw_text in PROGRAMS:
        raw = parse_program(raw_text, "raw", source_name=name)
        canonical = normalize(raw).program
        text = emit_program(canonical)

        again = normalize(parse_program(text, "canonical")).program
        if emit_program(again) != text:
            raise SystemExit(f"{name}: normalized output is not a fixed point")
        if emit_program(parse_program(text, "canonical")) != text:
            raise SystemExit(f"{name}: emit/parse round trip drifted")

        path = out_dir / f"{name}.fs"
        path.write_text(text)
        entries.append(
            {
                "id": name,
                "canonical_path": str(path.relative_to(root)),
                "split": "train",
                "flags": [],
            }
        )
        print(f"wrote {path.relative_to(root)}")

    manifest = root / "corpus" / "manifest.json"
    with open(manifest, "w") as fh:
        json.dump({"entries": entries}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {manifest.relative_to(root)} ({len(entries)} entries)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
