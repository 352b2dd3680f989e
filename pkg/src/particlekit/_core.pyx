# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cell assignment, bucket fill and the force sum.

Mirrors ``_pycore``.  Supports 1 to 3 dimensions.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, exp

cnp.import_array()

NAME = "compiled"
MAX_DIM = 3


cdef inline long _cell_coord(double p, double lower, double width, long n) nogil:
    cdef long c = <long>floor((p - lower) / width)
    if c < 0:
        return 0
    if c > n - 1:
        return n - 1
    return c


def assign_cells(const double[:, ::1] positions, const unsigned char[::1] alive,
                 const double[::1] lower, const double[::1] width, const long[::1] cells_per_dim):
    cdef Py_ssize_t n = positions.shape[0], dim = positions.shape[1], i, k
    out_arr = np.full(n, -1, dtype=np.int64)
    cdef long[::1] out = out_arr
    cdef long linear
    with nogil:
        for i in range(n):
            if not alive[i]:
                continue
            linear = 0
            for k in range(dim):
                linear = linear * cells_per_dim[k] + _cell_coord(
                    positions[i, k], lower[k], width[k], cells_per_dim[k])
            out[i] = linear
    return out_arr


def bucket_fill(const long[::1] cells, long ncells):
    cdef Py_ssize_t n = cells.shape[0], i
    start_arr = np.zeros(ncells + 1, dtype=np.int64)
    cdef long[::1] start = start_arr
    cursor_arr = np.zeros(ncells, dtype=np.int64)
    cdef long[::1] cursor = cursor_arr
    cdef long c, total = 0
    with nogil:
        for i in range(n):
            if cells[i] >= 0:
                start[cells[i] + 1] += 1
                total += 1
        for c in range(ncells):
            start[c + 1] += start[c]
            cursor[c] = start[c]
    members_arr = np.empty(total, dtype=np.int64)
    cdef long[::1] members = members_arr
    with nogil:
        for i in range(n):
            c = cells[i]
            if c >= 0:
                members[cursor[c]] = i
                cursor[c] += 1
    return start_arr, members_arr


cdef int _adjacent(long* coords, long* cells_per_dim, unsigned char* periodic,
                   int dim, long* out) nogil:
    """Write sorted unique linear ids of the 3^dim block into out."""
    cdef int count = 1, k, a, b, m, noptions
    cdef long options[3]
    cdef long tmp[27]
    cdef long c, key
    out[0] = 0
    for k in range(dim):
        noptions = 0
        for a in range(-1, 2):
            c = coords[k] + a
            if periodic[k]:
                c = ((c % cells_per_dim[k]) + cells_per_dim[k]) % cells_per_dim[k]
            elif c < 0 or c >= cells_per_dim[k]:
                continue
            options[noptions] = c
            noptions += 1
        m = 0
        for a in range(count):
            for b in range(noptions):
                tmp[m] = out[a] * cells_per_dim[k] + options[b]
                m += 1
        for a in range(m):
            out[a] = tmp[a]
        count = m
    # insertion sort, then drop duplicates
    for a in range(1, count):
        key = out[a]
        b = a - 1
        while b >= 0 and out[b] > key:
            out[b + 1] = out[b]
            b -= 1
        out[b + 1] = key
    m = 0
    for a in range(count):
        if m == 0 or out[a] != out[m - 1]:
            out[m] = out[a]
            m += 1
    return m


def exp_force_sum(const double[:, ::1] positions, const unsigned char[::1] alive,
                  const long[::1] cell_start, const long[::1] members,
                  const double[::1] lower, const double[::1] lengths, const double[::1] width,
                  const long[::1] cells_per_dim, const unsigned char[::1] periodic,
                  double r_cut, const long[::1] order, double[:, ::1] out):
    cdef int dim = positions.shape[1]
    if dim > MAX_DIM:
        raise ValueError("compiled kernels support at most 3 dimensions")
    cdef Py_ssize_t t, i, j, s
    cdef int k, nadj, a
    cdef long coords[3]
    cdef long ncell[3]
    cdef unsigned char per[3]
    cdef long adj[27]
    cdef double acc[3]
    cdef double dx[3]
    cdef double half[3]
    cdef double r2, r, scale
    for k in range(dim):
        ncell[k] = cells_per_dim[k]
        per[k] = periodic[k]
        half[k] = 0.5 * lengths[k]
    with nogil:
        for t in range(order.shape[0]):
            i = order[t]
            for k in range(dim):
                coords[k] = _cell_coord(positions[i, k], lower[k], width[k], ncell[k])
                acc[k] = 0.0
            nadj = _adjacent(coords, ncell, per, dim, adj)
            for a in range(nadj):
                for s in range(cell_start[adj[a]], cell_start[adj[a] + 1]):
                    j = members[s]
                    if not alive[j]:
                        continue
                    r2 = 0.0
                    for k in range(dim):
                        dx[k] = positions[j, k] - positions[i, k]
                        if per[k]:
                            if dx[k] > half[k]:
                                dx[k] -= lengths[k]
                            elif dx[k] <= -half[k]:
                                dx[k] += lengths[k]
                        r2 += dx[k] * dx[k]
                    r = sqrt(r2)
                    if r > 0.0 and r < r_cut:
                        scale = -exp(-r)
                        for k in range(dim):
                            acc[k] += (scale * dx[k]) / r
            for k in range(dim):
                out[i, k] = acc[k]
