"""ASCII STL and Wavefront OBJ export, plus a minimal OBJ reader.

Output is byte-stable: floats are written with repr, so the same mesh
always produces the same file.
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh


def _fmt(x: float) -> str:
    return repr(float(x))


def write_stl(path, mesh: Mesh, name: str = "cadhist") -> None:
    """Write an ASCII STL file with computed facet normals."""
    v = mesh.vertices
    f = mesh.triangles
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    normals = np.cross(a, b)
    lengths = np.linalg.norm(normals, axis=1)
    safe = np.where(lengths > 0.0, lengths, 1.0)
    normals = normals / safe[:, None]
    lines = [f"solid {name}"]
    for i in range(len(f)):
        n = normals[i]
        lines.append(f"  facet normal {_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])}")
        lines.append("    outer loop")
        for j in range(3):
            p = v[f[i, j]]
            lines.append(f"      vertex {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_obj(path, mesh: Mesh) -> None:
    """Write a Wavefront OBJ file (vertices shared, indices 1-based)."""
    lines = []
    for p in mesh.vertices:
        lines.append(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    for tri in mesh.triangles:
        lines.append(f"f {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path) -> Mesh:
    """Read a triangle-only OBJ file written by write_obj.

    Only v and f records are honored; anything else is skipped.  Face
    vertices may carry /texture/normal suffixes, which are ignored.
    """
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ValueError("only triangular faces are supported")
                faces.append([int(tok.split("/")[0]) - 1 for tok in parts[1:]])
    return Mesh(
        vertices=np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        triangles=np.asarray(faces, dtype=np.int64).reshape(-1, 3),
    )
