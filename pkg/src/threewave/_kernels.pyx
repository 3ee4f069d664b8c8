# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the scalar hot loops; semantics match ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _soliton_rhs(double r, double w, double dw, double* fw, double* fd) noexcept nogil:
    fw[0] = dw
    if r == 0.0:
        fd[0] = (w - w * w) / 3.0
    else:
        fd[0] = w - w * w - 2.0 * dw / r


def shoot_soliton(double w0, double dr, Py_ssize_t nsteps,
                  double[::1] w_out, double[::1] dw_out):
    cdef double w = w0, dw = 0.0, h = dr, r
    cdef double k1w, k1d, k2w, k2d, k3w, k3d, k4w, k4d
    cdef Py_ssize_t i
    w_out[0] = w
    dw_out[0] = dw
    with nogil:
        for i in range(nsteps):
            r = i * h
            _soliton_rhs(r, w, dw, &k1w, &k1d)
            _soliton_rhs(r + 0.5 * h, w + 0.5 * h * k1w, dw + 0.5 * h * k1d, &k2w, &k2d)
            _soliton_rhs(r + 0.5 * h, w + 0.5 * h * k2w, dw + 0.5 * h * k2d, &k3w, &k3d)
            _soliton_rhs(r + h, w + h * k3w, dw + h * k3d, &k4w, &k4d)
            w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            dw += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
            w_out[i + 1] = w
            dw_out[i + 1] = dw
            if w < 0.0:
                with gil:
                    return 1, i + 1
            if dw > 0.0:
                with gil:
                    return -1, i + 1
    return 0, nsteps


cdef inline void _rhs(double complex p1, double complex p2, double complex p3, double alpha,
                      double complex* f1, double complex* f2, double complex* f3) noexcept nogil:
    cdef double a1 = p1.real * p1.real + p1.imag * p1.imag
    cdef double a2 = p2.real * p2.real + p2.imag * p2.imag
    cdef double a3 = p3.real * p3.real + p3.imag * p3.imag
    f1[0] = 1j * (a1 * a1 * p1 + alpha * p3 * p2.conjugate())
    f2[0] = 1j * (a2 * a2 * p2 + alpha * p3 * p1.conjugate())
    f3[0] = 1j * (a3 * a3 * p3 + alpha * p1 * p2)


def nonlinear_substeps(double complex[:, ::1] psi, double alpha, double h, Py_ssize_t m):
    cdef Py_ssize_t n = psi.shape[1], i, s
    cdef double complex p1, p2, p3
    cdef double complex a1, a2, a3, b1, b2, b3, c1, c2, c3, d1, d2, d3
    with nogil:
        for i in range(n):
            p1 = psi[0, i]
            p2 = psi[1, i]
            p3 = psi[2, i]
            for s in range(m):
                _rhs(p1, p2, p3, alpha, &a1, &a2, &a3)
                _rhs(p1 + 0.5 * h * a1, p2 + 0.5 * h * a2, p3 + 0.5 * h * a3, alpha, &b1, &b2, &b3)
                _rhs(p1 + 0.5 * h * b1, p2 + 0.5 * h * b2, p3 + 0.5 * h * b3, alpha, &c1, &c2, &c3)
                _rhs(p1 + h * c1, p2 + h * c2, p3 + h * c3, alpha, &d1, &d2, &d3)
                p1 = p1 + h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
                p2 = p2 + h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
                p3 = p3 + h / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
            psi[0, i] = p1
            psi[1, i] = p2
            psi[2, i] = p3
    return np.asarray(psi)
