# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-cell assembly kernels (same contract as _kernels_np)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline double _inv3(double* a, double* out) noexcept nogil:
    cdef double c00 = a[4] * a[8] - a[5] * a[7]
    cdef double c01 = a[5] * a[6] - a[3] * a[8]
    cdef double c02 = a[3] * a[7] - a[4] * a[6]
    cdef double det = a[0] * c00 + a[1] * c01 + a[2] * c02
    out[0] = c00 / det
    out[3] = c01 / det
    out[6] = c02 / det
    out[1] = (a[2] * a[7] - a[1] * a[8]) / det
    out[4] = (a[0] * a[8] - a[2] * a[6]) / det
    out[7] = (a[1] * a[6] - a[0] * a[7]) / det
    out[2] = (a[1] * a[5] - a[2] * a[4]) / det
    out[5] = (a[2] * a[3] - a[0] * a[5]) / det
    out[8] = (a[0] * a[4] - a[1] * a[3]) / det
    return det


cdef inline double _inv2(double* a, double* out) noexcept nogil:
    cdef double det = a[0] * a[3] - a[1] * a[2]
    out[0] = a[3] / det
    out[3] = a[0] / det
    out[1] = -a[1] / det
    out[2] = -a[2] / det
    return det


def cell_geometry(double[:, ::1] vertices, long long[:, ::1] cells):
    """Cell chart volumes and chart gradients of the barycentric basis."""
    cdef Py_ssize_t nc = cells.shape[0]
    cdef int dim = vertices.shape[1]
    vols_arr = np.empty(nc, dtype=np.float64)
    grads_arr = np.empty((nc, dim + 1, dim), dtype=np.float64)
    cdef double[::1] vols = vols_arr
    cdef double[:, :, ::1] grads = grads_arr
    cdef double e[9]
    cdef double einv[9]
    cdef double det, s
    cdef Py_ssize_t c, i, j, v0
    with nogil:
        for c in range(nc):
            v0 = cells[c, 0]
            for i in range(dim):
                for j in range(dim):
                    e[i * dim + j] = vertices[cells[c, j + 1], i] - vertices[v0, i]
            if dim == 1:
                det = e[0]
                einv[0] = 1.0 / det
                vols[c] = det
            elif dim == 2:
                det = _inv2(e, einv)
                vols[c] = det / 2.0
            else:
                det = _inv3(e, einv)
                vols[c] = det / 6.0
            for i in range(dim):
                s = 0.0
                for j in range(dim):
                    grads[c, j + 1, i] = einv[j * dim + i]
                    s += einv[j * dim + i]
                grads[c, 0, i] = -s
    return vols_arr, grads_arr


def assemble_cells(double[:, ::1] vertices, long long[:, ::1] cells,
                   double[:, :, ::1] ginv, double[::1] sqrtdet):
    """Stiffness COO triplets and load vector (one-point metric quadrature)."""
    cdef Py_ssize_t nc = cells.shape[0]
    cdef Py_ssize_t nv = vertices.shape[0]
    cdef int dim = vertices.shape[1]
    cdef int nl = dim + 1

    vols_arr, grads_arr = cell_geometry(vertices, cells)
    cdef double[::1] vols = vols_arr
    cdef double[:, :, ::1] grads = grads_arr

    rows_arr = np.empty(nc * nl * nl, dtype=np.int64)
    cols_arr = np.empty(nc * nl * nl, dtype=np.int64)
    vals_arr = np.empty(nc * nl * nl, dtype=np.float64)
    load_arr = np.zeros(nv, dtype=np.float64)
    cdef long long[::1] rows = rows_arr
    cdef long long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef double[::1] load = load_arr

    cdef double gg[12]
    cdef double w, s
    cdef Py_ssize_t c, a, b, i, j, base
    with nogil:
        for c in range(nc):
            w = vols[c] * sqrtdet[c]
            # gg[a, j] = sum_i ginv[j, i] * grads[a, i]  (ginv symmetric)
            for a in range(nl):
                for j in range(dim):
                    s = 0.0
                    for i in range(dim):
                        s += ginv[c, j, i] * grads[c, a, i]
                    gg[a * 3 + j] = s
            base = c * nl * nl
            for a in range(nl):
                load[cells[c, a]] += w / nl
                for b in range(nl):
                    s = 0.0
                    for j in range(dim):
                        s += grads[c, a, j] * gg[b * 3 + j]
                    rows[base + a * nl + b] = cells[c, a]
                    cols[base + a * nl + b] = cells[c, b]
                    vals[base + a * nl + b] = s * w
    return rows_arr, cols_arr, vals_arr, load_arr
