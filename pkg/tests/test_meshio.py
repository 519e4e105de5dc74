import numpy as np
import pytest

from cadhist.geometry import Mesh, mesh_volume
from cadhist.meshio import read_obj, write_obj, write_stl

TETRA = Mesh(
    np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    ),
    np.array([[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]], dtype=np.int64),
)


def test_obj_round_trip(tmp_path):
    path = tmp_path / "tetra.obj"
    write_obj(path, TETRA)
    back = read_obj(path)
    assert np.array_equal(back.vertices, TETRA.vertices)
    assert np.array_equal(back.triangles, TETRA.triangles)


def test_obj_bytes_are_stable(tmp_path):
    first = tmp_path / "a.obj"
    second = tmp_path / "b.obj"
    write_obj(first, TETRA)
    write_obj(second, TETRA)
    assert first.read_bytes() == second.read_bytes()


def test_obj_faces_are_one_based(tmp_path):
    path = tmp_path / "tetra.obj"
    write_obj(path, TETRA)
    face_lines = [l for l in path.read_text().splitlines() if l.startswith("f ")]
    assert face_lines[0] == "f 1 3 2"


def test_obj_reader_skips_foreign_records(tmp_path):
    path = tmp_path / "annotated.obj"
    path.write_text(
        "# exported elsewhere\n"
        "o part\n"
        "v 0 0 0\n"
        "v 1 0 0\n"
        "v 0 1 0\n"
        "vn 0 0 1\n"
        "vt 0 0\n"
        "f 1/1/1 2/2/1 3/3/1\n"
    )
    mesh = read_obj(path)
    assert len(mesh.vertices) == 3
    assert mesh.triangles.tolist() == [[0, 1, 2]]


def test_obj_reader_rejects_quads(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ValueError, match="triangular"):
        read_obj(path)


def test_stl_is_ascii_with_normals(tmp_path):
    path = tmp_path / "tetra.stl"
    write_stl(path, TETRA, name="tetra")
    text = path.read_text()
    assert text.startswith("solid tetra\n")
    assert text.rstrip().endswith("endsolid tetra")
    assert text.count("facet normal") == 4
    assert text.count("vertex") == 12


def test_stl_bytes_are_stable(tmp_path):
    first = tmp_path / "a.stl"
    second = tmp_path / "b.stl"
    write_stl(first, TETRA)
    write_stl(second, TETRA)
    assert first.read_bytes() == second.read_bytes()


def test_round_trip_preserves_volume(tmp_path):
    path = tmp_path / "tetra.obj"
    write_obj(path, TETRA)
    assert mesh_volume(read_obj(path)) == pytest.approx(mesh_volume(TETRA))
