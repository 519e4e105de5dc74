"""Surface sampling of triangle meshes into oriented point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BBox, Mesh


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray  # (n, 3) float64
    normals: np.ndarray  # (n, 3) float64, unit length

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        n = np.ascontiguousarray(np.asarray(self.normals, dtype=np.float64))
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValueError("points must be (n, 3)")
        if n.shape != p.shape:
            raise ValueError("normals must match points")
        p.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "normals", n)

    def __len__(self) -> int:
        return len(self.points)


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def triangle_geometry(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-triangle (area, unit normal)."""
    v = mesh.vertices
    t = mesh.triangles
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    norms = np.linalg.norm(cross, axis=1)
    areas = norms / 2.0
    safe = np.where(norms == 0.0, 1.0, norms)
    normals = cross / safe[:, None]
    return areas, normals


def sample_surface(mesh: Mesh, count: int, seed=0) -> PointCloud:
    """Area-weighted uniform surface samples with face normals.

    Uses the square-root barycentric construction so points are uniform
    within each triangle.  A fixed seed reproduces the exact cloud.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    rng = _as_generator(seed)
    areas, normals = triangle_geometry(mesh)
    total = areas.sum()
    if total <= 0.0:
        raise ValueError("mesh has no area")
    chosen = rng.choice(len(areas), size=count, p=areas / total)
    r1 = rng.random(count)
    r2 = rng.random(count)
    sqrt_r1 = np.sqrt(r1)
    u = 1.0 - sqrt_r1
    v = sqrt_r1 * (1.0 - r2)
    w = sqrt_r1 * r2
    tri = mesh.triangles[chosen]
    a = mesh.vertices[tri[:, 0]]
    b = mesh.vertices[tri[:, 1]]
    c = mesh.vertices[tri[:, 2]]
    points = u[:, None] * a + v[:, None] * b + w[:, None] * c
    return PointCloud(points, normals[chosen])


def unit_normalize(cloud: PointCloud, bbox: BBox) -> PointCloud:
    """Center on the box and scale its largest extent to one.

    All coordinates land in [-0.5, 0.5] when the box encloses the cloud.
    """
    extent = bbox.max_extent
    if extent <= 0.0:
        raise ValueError("degenerate bounding box")
    center = np.array(bbox.center, dtype=np.float64)
    return PointCloud((cloud.points - center) / extent, cloud.normals)


def save_xyz(cloud: PointCloud, path) -> None:
    """Six-column ASCII: x y z nx ny nz."""
    data = np.hstack([cloud.points, cloud.normals])
    with open(path, "w") as fh:
        for row in data:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_xyz(path) -> PointCloud:
    data = np.loadtxt(path, dtype=np.float64).reshape(-1, 6)
    return PointCloud(data[:, :3], data[:, 3:])
