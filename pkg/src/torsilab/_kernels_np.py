"""Vectorized numpy fallback for the per-cell assembly kernels.

Same contract as the compiled module ``_kernels_cy``: given cell geometry
and the inverse metric / volume density sampled at cell barycenters, produce
COO triplets of the stiffness matrix and the load vector for piecewise-linear
elements with one-point metric quadrature.
"""

import numpy as np

BACKEND = "numpy"

_FACTORIAL = {1: 1.0, 2: 2.0, 3: 6.0}


def _inv_many(a):
    """Inverses of a batch of 1x1/2x2/3x3 matrices via adjugates."""
    d = a.shape[1]
    out = np.empty_like(a)
    if d == 1:
        out[:, 0, 0] = 1.0 / a[:, 0, 0]
        return out
    if d == 2:
        det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
        out[:, 0, 0] = a[:, 1, 1]
        out[:, 1, 1] = a[:, 0, 0]
        out[:, 0, 1] = -a[:, 0, 1]
        out[:, 1, 0] = -a[:, 1, 0]
        out /= det[:, None, None]
        return out
    c00 = a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1]
    c01 = a[:, 1, 2] * a[:, 2, 0] - a[:, 1, 0] * a[:, 2, 2]
    c02 = a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0]
    det = a[:, 0, 0] * c00 + a[:, 0, 1] * c01 + a[:, 0, 2] * c02
    out[:, 0, 0] = c00
    out[:, 1, 0] = c01
    out[:, 2, 0] = c02
    out[:, 0, 1] = a[:, 0, 2] * a[:, 2, 1] - a[:, 0, 1] * a[:, 2, 2]
    out[:, 1, 1] = a[:, 0, 0] * a[:, 2, 2] - a[:, 0, 2] * a[:, 2, 0]
    out[:, 2, 1] = a[:, 0, 1] * a[:, 2, 0] - a[:, 0, 0] * a[:, 2, 1]
    out[:, 0, 2] = a[:, 0, 1] * a[:, 1, 2] - a[:, 0, 2] * a[:, 1, 1]
    out[:, 1, 2] = a[:, 0, 2] * a[:, 1, 0] - a[:, 0, 0] * a[:, 1, 2]
    out[:, 2, 2] = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    out /= det[:, None, None]
    return out


def _det_many(a):
    d = a.shape[1]
    if d == 1:
        return a[:, 0, 0].copy()
    if d == 2:
        return a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    return (
        a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
        - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
        + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0])
    )


def cell_geometry(vertices, cells):
    """Cell chart volumes and chart gradients of the barycentric basis.

    Returns ``(vols, grads)`` with ``grads[c, a, j] = d_j phi_a`` on cell c.
    """
    v = vertices[cells]
    dim = vertices.shape[1]
    e = np.swapaxes(v[:, 1:, :] - v[:, :1, :], 1, 2)
    vols = _det_many(e) / _FACTORIAL[dim]
    einv = _inv_many(e)
    grads = np.empty((cells.shape[0], dim + 1, dim))
    grads[:, 1:, :] = einv
    grads[:, 0, :] = -einv.sum(axis=1)
    return vols, grads


def assemble_cells(vertices, cells, ginv, sqrtdet):
    """Stiffness COO triplets and load vector.

    ``ginv`` and ``sqrtdet`` are the inverse metric and volume density at the
    cell barycenters.  Entries: S_ab = vol * sqrtdet * grad_a . ginv . grad_b,
    load_a = vol * sqrtdet / (dim + 1).
    """
    nv = vertices.shape[0]
    dim = vertices.shape[1]
    vols, grads = cell_geometry(vertices, cells)
    w = vols * sqrtdet
    vals = np.einsum("cai,cij,cbj->cab", grads, ginv, grads, optimize=True) * w[:, None, None]
    rows = np.repeat(cells[:, :, None], dim + 1, axis=2)
    cols = np.repeat(cells[:, None, :], dim + 1, axis=1)
    load = np.zeros(nv)
    np.add.at(load, cells.ravel(), np.repeat(w / (dim + 1), dim + 1))
    return rows.ravel(), cols.ravel(), vals.ravel(), load
