"""Piecewise-linear finite elements for the unit-source Poisson problem.

Solves div grad E = -1 (Laplace-Beltrami of the supplied chart metric) with
zero Dirichlet boundary values on a simplicial mesh, and reports the
torsional rigidity of the domain both as the integral of E and as its
Dirichlet energy.

Assembly uses one-point (barycenter) quadrature for the metric factor, so a
constant conformal rescaling of the metric rescales the discrete system
exactly: stiffness by c^(n/2 - 1), load by c^(n/2).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels_np
from .errors import SolverError, UsageError
from .meshing import SimplicialMesh
from .metrics import MetricField

if os.environ.get("TORSILAB_PURE"):
    _kernels = _kernels_np
else:
    try:
        from . import _kernels_cy as _kernels  # type: ignore[no-redef]
    except ImportError:
        _kernels = _kernels_np


def kernel_backend() -> str:
    """Name of the active assembly backend ('cython' or 'numpy')."""
    return _kernels.BACKEND


DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class RigidityReport:
    """Torsional rigidity of one solved instance.

    ``T_integral`` is the integral of the exit time, ``T_energy`` its
    Dirichlet energy; the two agree up to the linear-solver residual.
    """

    T_integral: float
    T_energy: float
    V: float
    residual: float
    h: float


def metric_at_barycenters(mesh: SimplicialMesh, m: MetricField):
    """Inverse metric and volume density sampled at cell barycenters."""
    if m.dim != mesh.dim:
        raise UsageError(f"metric dimension {m.dim} != mesh dimension {mesh.dim}")
    bary = mesh.vertices[mesh.cells].mean(axis=1)
    g = m.matrix_many(bary)
    ginv = _kernels_np._inv_many(g)
    sqrtdet = np.sqrt(_kernels_np._det_many(g))
    return np.ascontiguousarray(ginv), np.ascontiguousarray(sqrtdet)


def assemble(mesh: SimplicialMesh, m: MetricField):
    """Assemble the stiffness matrix and load vector.

    Returns ``(S, L)`` over all vertices; the interior-interior block of S is
    symmetric positive definite.  Dirichlet elimination is the solver's job.
    """
    ginv, sqrtdet = metric_at_barycenters(mesh, m)
    rows, cols, vals, load = _kernels.assemble_cells(mesh.vertices, mesh.cells, ginv, sqrtdet)
    n = mesh.n_vertices
    S = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return S, load


def pcg(A, b, tol: float, maxiter: int):
    """Jacobi-preconditioned conjugate gradients for SPD systems.

    Stops when ||r|| <= tol * ||b||; raises SolverError (with the relative
    residual history attached) if the cap is hit first.
    """
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("system diagonal is not positive", [])
    minv = 1.0 / diag
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0.0, [0.0]
    x = np.zeros_like(b)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = float(r @ z)
    history = [1.0]
    for _ in range(maxiter):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if rel <= tol:
            return x, rel, history
        z = minv * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"conjugate gradients did not reach tol={tol:g} in {maxiter} iterations "
        f"(last residual {history[-1]:.3e})",
        history,
    )


def solve_exit_time(mesh: SimplicialMesh, m: MetricField, tol: float = DEFAULT_TOL, maxiter=None):
    """Solve the unit-source Dirichlet problem and report rigidity.

    Returns ``(E, report)`` where E has one value per vertex (exactly zero on
    boundary vertices).
    """
    if mesh.n_interior < 1:
        raise UsageError("mesh has no interior vertices")
    if not tol > 0:
        raise UsageError("solver tolerance must be positive")
    S, L = assemble(mesh, m)
    idx = np.flatnonzero(mesh.interior)
    A = S[idx][:, idx].tocsr()
    b = L[idx]
    cap = maxiter if maxiter is not None else 50 * len(idx)
    x, rel, _ = pcg(A, b, tol, cap)
    E = np.zeros(mesh.n_vertices)
    E[idx] = x
    T_int = float(L @ E)
    T_en = float(E @ (S @ E))
    report = RigidityReport(T_integral=T_int, T_energy=T_en, V=float(L.sum()), residual=rel, h=mesh.h)
    return E, report
