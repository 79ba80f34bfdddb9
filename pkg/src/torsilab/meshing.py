"""Simplicial meshes of disks, boxes and intervals, plus plain-text IO.

Mesh format (one file per mesh):

    dim nv nc
    x [y [z]] flag        # nv vertex lines, flag 1 marks boundary vertices
    i0 i1 ... i_dim       # nc cell lines, vertex indices

Disks are meshed by concentric rings (boundary vertices snapped to the
circle), boxes by a uniform lattice with a diagonal / Kuhn split.  Cells are
oriented so their chart volume is positive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError


@dataclass
class SimplicialMesh:
    dim: int
    vertices: np.ndarray  # (nv, dim) float
    cells: np.ndarray  # (nc, dim+1) int
    boundary: np.ndarray  # (nv,) bool
    h: float = field(default=0.0)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        self.boundary = np.asarray(self.boundary, dtype=bool)
        if self.dim not in (1, 2, 3):
            raise UsageError("mesh dimension must be 1, 2 or 3")
        if self.vertices.shape[1] != self.dim or self.cells.shape[1] != self.dim + 1:
            raise UsageError("vertex/cell array shapes inconsistent with dim")
        if self.h == 0.0:
            self.h = float(cell_diameters(self).max())

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior))


def _edge_matrices(mesh: SimplicialMesh) -> np.ndarray:
    """Per-cell edge matrices with columns v_i - v_0, shape (nc, dim, dim)."""
    v = mesh.vertices[mesh.cells]
    return np.swapaxes(v[:, 1:, :] - v[:, :1, :], 1, 2)


def _det_many(e: np.ndarray) -> np.ndarray:
    d = e.shape[1]
    if d == 1:
        return e[:, 0, 0]
    if d == 2:
        return e[:, 0, 0] * e[:, 1, 1] - e[:, 0, 1] * e[:, 1, 0]
    return (
        e[:, 0, 0] * (e[:, 1, 1] * e[:, 2, 2] - e[:, 1, 2] * e[:, 2, 1])
        - e[:, 0, 1] * (e[:, 1, 0] * e[:, 2, 2] - e[:, 1, 2] * e[:, 2, 0])
        + e[:, 0, 2] * (e[:, 1, 0] * e[:, 2, 1] - e[:, 1, 1] * e[:, 2, 0])
    )


_FACTORIAL = {1: 1.0, 2: 2.0, 3: 6.0}


def cell_volumes(mesh: SimplicialMesh) -> np.ndarray:
    """Signed chart volumes; positive on correctly oriented meshes."""
    return _det_many(_edge_matrices(mesh)) / _FACTORIAL[mesh.dim]


def cell_diameters(mesh: SimplicialMesh) -> np.ndarray:
    v = mesh.vertices[mesh.cells]
    out = np.zeros(mesh.n_cells)
    for i, j in itertools.combinations(range(mesh.dim + 1), 2):
        np.maximum(out, np.linalg.norm(v[:, i] - v[:, j], axis=1), out=out)
    return out


def _fix_orientation(vertices: np.ndarray, cells: np.ndarray, dim: int) -> np.ndarray:
    cells = np.asarray(cells, dtype=np.int64)
    v = vertices[cells]
    e = np.swapaxes(v[:, 1:, :] - v[:, :1, :], 1, 2)
    flip = _det_many(e) < 0
    cells[flip, -1], cells[flip, -2] = cells[flip, -2].copy(), cells[flip, -1].copy()
    return cells


def build_disk_mesh(R: float, k: int) -> SimplicialMesh:
    """Concentric-ring triangulation of the disk of radius R.

    Refinement level k halves the mesh size: the mesh has 4 * 2**k rings,
    6 * m**2 triangles, and all boundary vertices lie exactly on the circle.
    """
    if not R > 0:
        raise UsageError("disk radius must be positive")
    if k < 0:
        raise UsageError("refinement level must be >= 0")
    m = 4 * 2**k
    verts = [(0.0, 0.0)]
    ring_start = [0, 1]
    for i in range(1, m + 1):
        r = R * i / m
        ang = 2.0 * np.pi * np.arange(6 * i) / (6 * i)
        verts.extend(zip(r * np.cos(ang), r * np.sin(ang)))
        ring_start.append(ring_start[-1] + 6 * i)
    vertices = np.array(verts)

    def ring_idx(i, j):
        if i == 0:
            return 0
        return ring_start[i] + j % (6 * i)

    cells = []
    for i in range(m):
        for s in range(6):
            for t in range(i + 1):
                cells.append(
                    (ring_idx(i + 1, s * (i + 1) + t), ring_idx(i + 1, s * (i + 1) + t + 1), ring_idx(i, s * i + t))
                )
            for t in range(i):
                cells.append(
                    (ring_idx(i, s * i + t), ring_idx(i, s * i + t + 1), ring_idx(i + 1, s * (i + 1) + t + 1))
                )
    cells = _fix_orientation(vertices, np.array(cells), 2)
    boundary = np.zeros(len(vertices), dtype=bool)
    boundary[ring_start[m] :] = True
    return SimplicialMesh(dim=2, vertices=vertices, cells=cells, boundary=boundary)


def disk_polygon_area(R: float, k: int) -> float:
    """Exact chart area of the meshed polygon (regular inscribed 6m-gon)."""
    m = 4 * 2**k
    return 0.5 * 6 * m * R * R * np.sin(2.0 * np.pi / (6 * m))


# Kuhn split: the six tetrahedra visiting the cube corners along axis
# permutations, all sharing the main diagonal.
_KUHN_PATHS = list(itertools.permutations(range(3)))


def build_box_mesh(bounds, k: int) -> SimplicialMesh:
    """Lattice mesh of a box with 2**k divisions per axis.

    2D squares split into two triangles, 3D cubes into six tetrahedra; the
    chart volume of the mesh equals the box volume exactly.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if not bounds:
        raise UsageError("bounds must be non-empty")
    for lo, hi in bounds:
        if not hi > lo:
            raise UsageError("each bound interval must be non-degenerate")
    dim = len(bounds)
    if dim not in (1, 2, 3):
        raise UsageError("box dimension must be 1, 2 or 3")
    if k < 0:
        raise UsageError("refinement level must be >= 0")
    m = 2**k
    axes = [np.linspace(lo, hi, m + 1) for lo, hi in bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    vertices = np.stack([g.ravel() for g in grids], axis=1)

    shape = (m + 1,) * dim

    def vid(idx):
        return int(np.ravel_multi_index(idx, shape))

    cells = []
    if dim == 1:
        for i in range(m):
            cells.append((vid((i,)), vid((i + 1,))))
    elif dim == 2:
        for i in range(m):
            for j in range(m):
                v00, v10 = vid((i, j)), vid((i + 1, j))
                v01, v11 = vid((i, j + 1)), vid((i + 1, j + 1))
                cells.append((v00, v10, v11))
                cells.append((v00, v11, v01))
    else:
        for i in range(m):
            for j in range(m):
                for l in range(m):
                    base = np.array([i, j, l])
                    for path in _KUHN_PATHS:
                        corner = base.copy()
                        tet = [vid(tuple(corner))]
                        for ax in path:
                            corner[ax] += 1
                            tet.append(vid(tuple(corner)))
                        cells.append(tuple(tet))
    cells = _fix_orientation(vertices, np.array(cells), dim)

    boundary = np.zeros(len(vertices), dtype=bool)
    for d in range(dim):
        lo, hi = bounds[d]
        boundary |= (vertices[:, d] == lo) | (vertices[:, d] == hi)
    return SimplicialMesh(dim=dim, vertices=vertices, cells=cells, boundary=boundary)


def save_mesh(mesh: SimplicialMesh, path) -> None:
    with open(path, "w") as f:
        f.write(f"{mesh.dim} {mesh.n_vertices} {mesh.n_cells}\n")
        for v, b in zip(mesh.vertices, mesh.boundary):
            coords = " ".join(f"{x:.17g}" for x in v)
            f.write(f"{coords} {1 if b else 0}\n")
        for c in mesh.cells:
            f.write(" ".join(str(i) for i in c) + "\n")


def load_mesh(path) -> SimplicialMesh:
    with open(path) as f:
        dim, nv, nc = (int(t) for t in f.readline().split())
        vertices = np.empty((nv, dim))
        boundary = np.empty(nv, dtype=bool)
        for i in range(nv):
            parts = f.readline().split()
            vertices[i] = [float(t) for t in parts[:dim]]
            boundary[i] = parts[dim] == "1"
        cells = np.empty((nc, dim + 1), dtype=np.int64)
        for i in range(nc):
            cells[i] = [int(t) for t in f.readline().split()]
    return SimplicialMesh(dim=dim, vertices=vertices, cells=cells, boundary=boundary)
