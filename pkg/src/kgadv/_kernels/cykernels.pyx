# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: embedding-gradient scatter-add, fused RMSProp,
in-place clipping, and valid 1-D convolution (forward/backward).

Arithmetic mirrors kgadv._kernels.pykernels: elementwise work stays in the
array dtype, reductions accumulate in double.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

IMPL = "compiled"

ctypedef fused floating:
    float
    double


def scatter_add_rows(floating[:, ::1] out, cnp.int64_t[::1] idx, floating[:, ::1] vals):
    cdef Py_ssize_t i, j, row
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t k = out.shape[1]
    if vals.shape[0] != n or vals.shape[1] != k:
        raise ValueError("vals shape does not match idx/out")
    for i in range(n):
        row = idx[i]
        if row < 0 or row >= out.shape[0]:
            raise IndexError(f"row index {row} out of range")
        for j in range(k):
            out[row, j] += vals[i, j]


def clip_inplace(floating[::1] a, double c):
    cdef Py_ssize_t i
    cdef floating lo = <floating>(-c)
    cdef floating hi = <floating>c
    for i in range(a.shape[0]):
        if a[i] > hi:
            a[i] = hi
        elif a[i] < lo:
            a[i] = lo


def rmsprop_update(floating[::1] theta, floating[::1] s, floating[::1] g,
                   double rho, double eps, double eta, double lam):
    cdef Py_ssize_t i
    cdef Py_ssize_t n = theta.shape[0]
    cdef floating rho_c = <floating>rho
    cdef floating omr_c = <floating>(1.0 - rho)
    cdef floating eps_c = <floating>eps
    cdef floating eta_c = <floating>eta
    cdef floating el_c = <floating>(eta * lam)
    if s.shape[0] != n or g.shape[0] != n:
        raise ValueError("state/gradient length mismatch")
    for i in range(n):
        s[i] = rho_c * s[i]
        s[i] = s[i] + (omr_c * g[i]) * g[i]
        theta[i] = theta[i] - (eta_c * g[i]) / (<floating>sqrt(<double>s[i]) + eps_c)
        if lam != 0.0:
            theta[i] = theta[i] - el_c * theta[i]


def conv1d_forward(floating[:, ::1] x, floating[:, ::1] filt):
    cdef Py_ssize_t bsz = x.shape[0]
    cdef Py_ssize_t length = x.shape[1]
    cdef Py_ssize_t tau = filt.shape[0]
    cdef Py_ssize_t width = filt.shape[1]
    if width > length:
        raise ValueError(f"filter width {width} exceeds input length {length}")
    cdef Py_ssize_t pos = length - width + 1
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    out_arr = np.empty((bsz, tau, pos), dtype=dtype)
    cdef floating[:, :, ::1] out = out_arr
    cdef Py_ssize_t b, t, p, j
    cdef double acc
    for b in range(bsz):
        for t in range(tau):
            for p in range(pos):
                acc = 0.0
                for j in range(width):
                    acc += (<double>x[b, p + j]) * (<double>filt[t, j])
                out[b, t, p] = <floating>acc
    return out_arr


def conv1d_backward(floating[:, :, ::1] grad, floating[:, ::1] x, floating[:, ::1] filt):
    cdef Py_ssize_t bsz = x.shape[0]
    cdef Py_ssize_t length = x.shape[1]
    cdef Py_ssize_t tau = filt.shape[0]
    cdef Py_ssize_t width = filt.shape[1]
    cdef Py_ssize_t pos = length - width + 1
    if grad.shape[0] != bsz or grad.shape[1] != tau or grad.shape[2] != pos:
        raise ValueError("gradient shape mismatch")
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gx64 = np.zeros((bsz, length), dtype=np.float64)
    gf64 = np.zeros((tau, width), dtype=np.float64)
    cdef double[:, ::1] gx = gx64
    cdef double[:, ::1] gf = gf64
    cdef Py_ssize_t b, t, p, j
    cdef double gv
    for b in range(bsz):
        for t in range(tau):
            for p in range(pos):
                gv = <double>grad[b, t, p]
                for j in range(width):
                    gx[b, p + j] += gv * (<double>filt[t, j])
                    gf[t, j] += gv * (<double>x[b, p + j])
    return gx64.astype(dtype), gf64.astype(dtype)
