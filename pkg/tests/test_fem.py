import numpy as np
import pytest
from conftest import observed_order

from torsilab import _kernels_np
from torsilab.errors import SolverError, UsageError
from torsilab.fem import assemble, kernel_backend, pcg, solve_exit_time
from torsilab.meshing import SimplicialMesh, build_box_mesh, build_disk_mesh
from torsilab.metrics import (
    NIL3,
    HomogeneousParams3,
    ScalingParams,
    euclidean,
    nil3_chart_metric,
    scaled_metric,
)
from torsilab.radial import radial_rigidity
from torsilab.metrics import flat_warp

UNIT_TRIANGLE = SimplicialMesh(
    dim=2,
    vertices=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    cells=np.array([[0, 1, 2]]),
    boundary=np.array([True, True, True]),
)


def test_reference_triangle_stiffness_and_load():
    S, L = assemble(UNIT_TRIANGLE, euclidean(2))
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    assert np.allclose(S.toarray(), expected, atol=1e-15)
    assert np.allclose(L, 1.0 / 6.0, rtol=1e-15)


@pytest.mark.parametrize("dim,c", [(2, 4.0), (3, 4.0)])
def test_assembly_scaling_exact(dim, c):
    mesh = build_box_mesh([(0, 1)] * dim, 1)
    S1, L1 = assemble(mesh, euclidean(dim))
    Sc, Lc = assemble(mesh, scaled_metric(ScalingParams(euclidean(dim), c)))
    assert np.array_equal(Sc.toarray(), c ** (dim / 2 - 1) * S1.toarray())
    assert np.array_equal(Lc, c ** (dim / 2) * L1)


def test_partition_of_unity(disk_mesh_l2):
    S, _ = assemble(disk_mesh_l2, euclidean(2))
    row_sums = np.asarray(S @ np.ones(disk_mesh_l2.n_vertices))
    assert np.max(np.abs(row_sums)) < 1e-13


def test_dimension_mismatch():
    with pytest.raises(UsageError):
        assemble(UNIT_TRIANGLE, euclidean(3))


def test_disk_solution_converges_to_closed_form():
    hs, terrs, eerrs = [], [], []
    for k in (1, 2, 3):
        mesh = build_disk_mesh(1.0, k)
        E, rep = solve_exit_time(mesh, euclidean(2))
        hs.append(mesh.h)
        terrs.append(abs(rep.T_integral - np.pi / 8))
        eerrs.append(abs(E[0] - 0.25))
    assert observed_order(hs, terrs) >= 1.8
    assert terrs[-1] < 1e-3


def test_galerkin_identity_and_positivity(disk_solution_l3):
    E, rep = disk_solution_l3
    assert abs(rep.T_integral - rep.T_energy) <= 10 * rep.residual * rep.T_integral
    assert E.min() >= -1e-10
    assert rep.T_integral > 0 and rep.V > 0


def test_discrete_scaling_law(disk_mesh_l2):
    m = euclidean(2)
    E1, r1 = solve_exit_time(disk_mesh_l2, m)
    E4, r4 = solve_exit_time(disk_mesh_l2, scaled_metric(ScalingParams(m, 4.0)))
    n = 2
    assert abs(r4.T_integral / r1.T_integral - 4.0 ** ((n + 2) / 2)) < 1e-12
    assert abs(r4.V / r1.V - 4.0 ** (n / 2)) < 1e-12
    inv1 = r1.T_integral / r1.V ** ((n + 2) / 2)
    inv4 = r4.T_integral / r4.V ** ((n + 2) / 2)
    assert abs(inv4 / inv1 - 1.0) < 1e-12


def test_nil3_box_mesh_convergence():
    p = HomogeneousParams3(group=NIL3, D=1, B=1, C=1)
    m = nil3_chart_metric(p)
    Ts = []
    for k in (3, 4, 5):
        mesh = build_box_mesh([(0, 1)] * 3, k)
        _, rep = solve_exit_time(mesh, m)
        Ts.append(rep.T_integral)
    order = np.log2(abs((Ts[1] - Ts[0]) / (Ts[2] - Ts[1])))
    assert 1.7 < order < 2.3


def test_fem_matches_radial_oracle():
    mesh = build_disk_mesh(1.0, 3)
    _, rep = solve_exit_time(mesh, euclidean(2))
    oracle = radial_rigidity(flat_warp(2))
    assert abs(rep.T_integral - oracle.T) < 5.0 * mesh.h**2 * oracle.T


def test_solver_error_carries_history(disk_mesh_l2):
    with pytest.raises(SolverError) as exc:
        solve_exit_time(disk_mesh_l2, euclidean(2), maxiter=2)
    assert len(exc.value.residual_history) == 3


def test_pcg_solves_spd_system():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 30))
    A = A @ A.T + 30 * np.eye(30)
    import scipy.sparse as sp

    b = rng.standard_normal(30)
    x, rel, hist = pcg(sp.csr_matrix(A), b, 1e-12, 1000)
    assert np.linalg.norm(A @ x - b) <= 1e-11 * np.linalg.norm(b)
    assert hist[-1] == rel


def test_kernel_backends_agree(disk_mesh_l2):
    try:
        from torsilab import _kernels_cy
    except ImportError:
        pytest.skip("compiled kernels not built")
    from torsilab.fem import metric_at_barycenters

    p = HomogeneousParams3(group=NIL3, D=0.8, B=1.4, C=2.1)
    mesh = build_box_mesh([(0, 1)] * 3, 2)
    ginv, sdet = metric_at_barycenters(mesh, nil3_chart_metric(p))
    out_cy = _kernels_cy.assemble_cells(mesh.vertices, mesh.cells, ginv, sdet)
    out_np = _kernels_np.assemble_cells(mesh.vertices, mesh.cells, ginv, sdet)
    for a, b in zip(out_cy, out_np):
        assert np.allclose(a, b, rtol=1e-13, atol=1e-300)


def test_backend_name():
    assert kernel_backend() in ("cython", "numpy")


# ---------------------------------------------------------------------------
# Radial oracle
# ---------------------------------------------------------------------------


def test_radial_flat_disk_closed_form():
    r = radial_rigidity(flat_warp(2))
    assert abs(r.T - np.pi / 8) < 1e-10
    assert abs(r.V - np.pi) < 1e-10
    assert abs(r.E(0.0) - 0.25) < 1e-12
    assert abs(r.E(0.5) - (1 - 0.25) / 4) < 1e-12
    assert r.E(1.0) == 0.0


def test_radial_flat_ball_closed_form():
    r = radial_rigidity(flat_warp(3))
    assert abs(r.T - 4 * np.pi / 45) < 1e-10
    assert abs(r.V - 4 * np.pi / 3) < 1e-10
    assert abs(r.E(0.0) - 1.0 / 6.0) < 1e-12


def test_radial_scaling_law():
    from torsilab.metrics import scale_warp, sphere_warp

    w = sphere_warp(2, 1.0, 1.0)
    base = radial_rigidity(w)
    for c in (0.5, 2.0):
        scaled = radial_rigidity(scale_warp(w, c))
        assert np.isclose(scaled.T, c**2 * base.T, rtol=1e-9)
        assert np.isclose(scaled.V, c * base.V, rtol=1e-10)
