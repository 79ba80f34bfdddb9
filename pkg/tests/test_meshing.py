import numpy as np
import pytest
from conftest import observed_order

from torsilab.errors import UsageError
from torsilab.meshing import (
    build_box_mesh,
    build_disk_mesh,
    cell_volumes,
    disk_polygon_area,
    load_mesh,
    save_mesh,
)


def test_disk_boundary_on_circle():
    mesh = build_disk_mesh(1.0, 0)
    r = np.linalg.norm(mesh.vertices[mesh.boundary], axis=1)
    assert np.max(np.abs(r - 1.0)) <= 1e-12
    assert not mesh.boundary[0]  # center vertex


def test_disk_positive_volumes_and_coverage():
    for k in (0, 1, 2):
        mesh = build_disk_mesh(1.0, k)
        vols = cell_volumes(mesh)
        assert np.all(vols > 0)
        assert np.isclose(vols.sum(), disk_polygon_area(1.0, k), rtol=1e-10)


def test_disk_area_converges_to_pi():
    hs, errs = [], []
    for k in (0, 1, 2, 3):
        mesh = build_disk_mesh(1.0, k)
        hs.append(mesh.h)
        errs.append(abs(cell_volumes(mesh).sum() - np.pi))
    assert observed_order(hs, errs) >= 1.8


def test_disk_similarity_scaling():
    a1 = cell_volumes(build_disk_mesh(1.0, 1)).sum()
    a2 = cell_volumes(build_disk_mesh(2.0, 1)).sum()
    assert a2 == 4.0 * a1


def test_disk_h_halves_per_level():
    h = [build_disk_mesh(1.0, k).h for k in (0, 1, 2)]
    assert np.isclose(h[0] / h[1], 2.0, rtol=0.05)
    assert np.isclose(h[1] / h[2], 2.0, rtol=0.05)


def test_box_counts_and_volume():
    mesh = build_box_mesh([(0, 1), (0, 1), (0, 1)], 0)
    assert mesh.n_cells == 6
    mesh = build_box_mesh([(0, 1), (0, 1), (0, 1)], 1)
    assert mesh.n_cells == 48 and mesh.n_vertices == 27
    assert np.isclose(cell_volumes(mesh).sum(), 1.0, rtol=1e-14)
    sq = build_box_mesh([(0, 1), (0, 1)], 0)
    assert sq.n_cells == 2 and cell_volumes(sq).sum() == 1.0


def test_box_positive_volumes_and_boundary():
    mesh = build_box_mesh([(0, 2), (-1, 1), (0, 1)], 1)
    assert np.all(cell_volumes(mesh) > 0)
    v = mesh.vertices
    on_bdry = (
        (v[:, 0] == 0) | (v[:, 0] == 2) | (v[:, 1] == -1) | (v[:, 1] == 1) | (v[:, 2] == 0) | (v[:, 2] == 1)
    )
    assert np.array_equal(mesh.boundary, on_bdry)
    assert np.isclose(cell_volumes(mesh).sum(), 4.0, rtol=1e-12)


def test_interval_mesh():
    mesh = build_box_mesh([(0.0, 2.0)], 2)
    assert mesh.dim == 1 and mesh.n_cells == 4
    assert mesh.boundary.sum() == 2
    assert cell_volumes(mesh).sum() == 2.0


def test_invalid_inputs():
    with pytest.raises(UsageError):
        build_disk_mesh(-1.0, 0)
    with pytest.raises(UsageError):
        build_box_mesh([], 0)
    with pytest.raises(UsageError):
        build_box_mesh([(0, 0)], 0)


def test_mesh_io_roundtrip(tmp_path):
    for mesh in (build_disk_mesh(1.0, 1), build_box_mesh([(0, 1)] * 3, 1)):
        path = tmp_path / "m.mesh"
        save_mesh(mesh, path)
        back = load_mesh(path)
        assert back.dim == mesh.dim
        assert np.array_equal(back.vertices, mesh.vertices)
        assert np.array_equal(back.cells, mesh.cells)
        assert np.array_equal(back.boundary, mesh.boundary)
        assert back.h == mesh.h


def test_mesh_format_header(tmp_path):
    mesh = build_box_mesh([(0, 1), (0, 1)], 0)
    path = tmp_path / "m.mesh"
    save_mesh(mesh, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "2 4 2"
    assert lines[1].split()[-1] in ("0", "1")
    assert len(lines) == 1 + mesh.n_vertices + mesh.n_cells
