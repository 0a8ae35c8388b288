# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled congruence kernels for stacks of small complex matrices."""

import numpy as np
cimport cython


cdef inline void _accumulate(const double complex[:, :] a,
                             const double complex[:, :] x,
                             double complex[:, :] out,
                             double complex[:] tmp) noexcept nogil:
    # out += a^H x a, one column of (x a) at a time
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, k, l, m
    cdef double complex s
    for m in range(n):
        for k in range(n):
            s = 0
            for l in range(n):
                s = s + x[k, l] * a[l, m]
            tmp[k] = s
        for i in range(n):
            s = 0
            for k in range(n):
                s = s + a[k, i].conjugate() * tmp[k]
            out[i, m] = out[i, m] + s


def congruence_sum(a, x):
    """Return ``sum_j a[j]^H @ x[j] @ a[j]`` for stacks of square matrices."""
    cdef const double complex[:, :, :] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[:, :, :] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef Py_ssize_t m = av.shape[0], n = av.shape[1], j
    if av.shape[2] != n or xv.shape[0] != m or xv.shape[1] != n or xv.shape[2] != n:
        raise ValueError(f"shape mismatch: {np.shape(a)} vs {np.shape(x)}")
    out = np.zeros((n, n), dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    cdef double complex[:, :] ov = out
    cdef double complex[:] tv = tmp
    with nogil:
        for j in range(m):
            _accumulate(av[j], xv[j], ov, tv)
    return out


def congruence_terms(a, x):
    """Return the stack ``a[j]^H @ x[j] @ a[j]`` without summing."""
    cdef const double complex[:, :, :] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[:, :, :] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef Py_ssize_t m = av.shape[0], n = av.shape[1], j
    if av.shape[2] != n or xv.shape[0] != m or xv.shape[1] != n or xv.shape[2] != n:
        raise ValueError(f"shape mismatch: {np.shape(a)} vs {np.shape(x)}")
    out = np.zeros((m, n, n), dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    cdef double complex[:, :, :] ov = out
    cdef double complex[:] tv = tmp
    with nogil:
        for j in range(m):
            _accumulate(av[j], xv[j], ov[j], tv)
    return out
