"""Certified variational bounds for torsional rigidity.

Lower bounds come from the Rayleigh-type quotient (int u dV)^2 / int |grad
u|^2 dV over trial functions vanishing on the boundary; upper bounds from
the field energy int |X|^2 dV over vector fields of metric divergence -1.
Both reproduce the solved rigidity exactly when fed the discrete solution
(resp. its gradient), and remain valid along a metric path when the initial
data is transported, which is how the evolution envelopes are certified.

Mesh trial functions are piecewise linear; their gradients are exact
cell-wise constants, so all quadratures below match the assembly's one-point
metric rule exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels_np
from .errors import DegenerateTrialError, InvalidFieldError, NotCertifiedError, UsageError
from .fem import assemble, metric_at_barycenters
from .meshing import SimplicialMesh
from .metrics import MetricField

BOUNDARY_ZERO_TOL = 1e-12
DEFAULT_DIV_TOL = 1e-8

TrialLike = Union[np.ndarray, Callable[[np.ndarray], float]]


@dataclass(frozen=True)
class DivergenceField:
    """A candidate unit-divergence field on a mesh.

    ``values`` holds per-cell vectors (shape ``(nc, dim)``, e.g. a discrete
    gradient), per-vertex vectors (``(nv, dim)``) or a callable chart point
    -> vector.  ``reference_metric`` records the metric with respect to which
    div X = -1 is claimed.
    """

    values: Union[np.ndarray, Callable]
    reference_metric: Optional[MetricField] = None
    tol: float = DEFAULT_DIV_TOL


def vertex_values(mesh: SimplicialMesh, u: TrialLike) -> np.ndarray:
    """Trial function as vertex values, validated to vanish on the boundary."""
    if callable(u):
        vals = np.array([float(u(x)) for x in mesh.vertices])
    else:
        vals = np.asarray(u, dtype=float)
        if vals.shape != (mesh.n_vertices,):
            raise UsageError("mesh field must have one value per vertex")
    scale = float(np.max(np.abs(vals))) or 1.0
    worst = float(np.max(np.abs(vals[mesh.boundary]))) if mesh.boundary.any() else 0.0
    if worst > BOUNDARY_ZERO_TOL * max(1.0, scale):
        raise UsageError(f"trial function does not vanish on the boundary (max |u| = {worst:.2e})")
    vals = vals.copy()
    vals[mesh.boundary] = 0.0
    return vals


def cell_field_values(mesh: SimplicialMesh, X: DivergenceField) -> np.ndarray:
    """Field vectors at cell barycenters, shape (nc, dim)."""
    vals = X.values
    if callable(vals):
        bary = mesh.vertices[mesh.cells].mean(axis=1)
        return np.array([np.asarray(vals(x), dtype=float) for x in bary])
    vals = np.asarray(vals, dtype=float)
    if vals.shape == (mesh.n_cells, mesh.dim):
        return vals
    if vals.shape == (mesh.n_vertices, mesh.dim):
        return vals[mesh.cells].mean(axis=1)
    raise UsageError(f"field array shape {vals.shape} matches neither cells nor vertices")


def gradient_field(E0: np.ndarray, mesh: SimplicialMesh, m0: MetricField) -> DivergenceField:
    """The metric gradient of a solved exit time as a per-cell field.

    Raises the chart gradient with the inverse metric at barycenters; for a
    converged solve this is a valid unit-divergence field up to solver
    tolerance.
    """
    _, grads = _kernels_np.cell_geometry(mesh.vertices, mesh.cells)
    du = np.einsum("ca,caj->cj", E0[mesh.cells], grads)
    ginv, _ = metric_at_barycenters(mesh, m0)
    X = np.einsum("cij,cj->ci", ginv, du)
    return DivergenceField(values=X, reference_metric=m0)


def _weights_and_grads(mesh, m):
    vols, grads = _kernels_np.cell_geometry(mesh.vertices, mesh.cells)
    gmat = m.matrix_many(mesh.vertices[mesh.cells].mean(axis=1))
    sdet = np.sqrt(_kernels_np._det_many(gmat))
    return vols * sdet, grads, gmat


def polya_lower_bound(u: TrialLike, mesh: SimplicialMesh, m: MetricField) -> float:
    """(int u dV)^2 / int |grad u|^2 dV, a lower bound for the rigidity.

    Scale invariant in u; equals the solved rigidity when u is the discrete
    exit time (the supremum is attained there).
    """
    vals = vertex_values(mesh, u)
    S, L = assemble(mesh, m)
    num = float(L @ vals) ** 2
    den = float(vals @ (S @ vals))
    if den <= 1e-300 or num == 0.0:
        raise DegenerateTrialError("trial function has no Dirichlet energy")
    return num / den


def check_divergence(X: DivergenceField, mesh: SimplicialMesh, m: MetricField) -> float:
    """Normalized weak residual of div_g X = -1 against interior hat functions.

    Computes r_a = int g(X, grad phi_a) dV - int phi_a dV over interior
    vertices and returns ||r||_2 / ||load||_2 (so the zero field scores 1).
    """
    Xb = cell_field_values(mesh, X)
    w, grads, _ = _weights_and_grads(mesh, m)
    # g(X, grad phi) = X^i g_ij g^{jk} d_k phi = X . (chart grad phi)
    contrib = np.einsum("cj,caj->ca", Xb, grads) * w[:, None]
    d = np.zeros(mesh.n_vertices)
    np.add.at(d, mesh.cells.ravel(), contrib.ravel())
    _, L = assemble(mesh, m)
    idx = mesh.interior
    return float(np.linalg.norm(d[idx] - L[idx]) / np.linalg.norm(L[idx]))


def field_upper_bound(
    X: DivergenceField, mesh: SimplicialMesh, m: MetricField, div_tol: Optional[float] = None
) -> float:
    """int g(X, X) dV, an upper bound for the rigidity of a valid field.

    The unit-divergence constraint is verified first; an invalid field would
    silently void the bound, so it is rejected instead.
    """
    tol = div_tol if div_tol is not None else X.tol
    res = check_divergence(X, mesh, m)
    if res > tol:
        raise InvalidFieldError(f"divergence residual {res:.3e} exceeds tolerance {tol:g}")
    Xb = cell_field_values(mesh, X)
    w, _, gmat = _weights_and_grads(mesh, m)
    return float(np.einsum("ci,cij,cj,c->", Xb, gmat, Xb, w))


def transported_lower_bound(E0: np.ndarray, mesh: SimplicialMesh, m_t: MetricField) -> float:
    """Rayleigh quotient of the initial exit time under the time-t metric.

    G(t)^2 / F(t) with G = int E0 dV_t and F = int |grad E0|_t^2 dV_t; a
    valid lower bound for the rigidity at time t.
    """
    return polya_lower_bound(np.asarray(E0, dtype=float), mesh, m_t)


def transported_upper_bound(
    E0: np.ndarray,
    mesh: SimplicialMesh,
    m0: MetricField,
    m_t: MetricField,
    tr_f_constant: bool,
    div_tol: float = DEFAULT_DIV_TOL,
) -> float:
    """Energy of the transported initial gradient under the time-t metric.

    Valid as an upper bound only on paths whose trace rate is spatially
    constant (then the divergence of the initial gradient is preserved by
    the flow); the caller must assert that property explicitly.
    """
    if not tr_f_constant:
        raise NotCertifiedError(
            "upper transport requires a spatially constant trace rate along the path"
        )
    X = gradient_field(np.asarray(E0, dtype=float), mesh, m0)
    return field_upper_bound(X, mesh, m_t, div_tol=div_tol)
