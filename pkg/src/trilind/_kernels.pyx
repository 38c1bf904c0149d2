# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Runge-Kutta kernels for ``dy/dt = L y`` with a CSR generator.

Complex vectors are handled as interleaved float64 (re, im) pairs so the
arithmetic is explicit and does not depend on the C complex ABI.  The step
controller mirrors ``trilind._pykernels`` line for line.
"""

import numpy as np
from libc.math cimport sqrt, pow, fabs

from trilind.errors import IntegrationError

name = "cython"

# Dormand-Prince 5(4) tableau.
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0, E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0


class Generator:
    """CSR arrays of the generator in the layout the kernels expect."""

    def __init__(self, csr):
        csr = csr.tocsr()
        self.n = csr.shape[0]
        self.data = np.ascontiguousarray(csr.data, dtype=np.complex128).view(np.float64)
        self.indices = np.ascontiguousarray(csr.indices, dtype=np.intc)
        self.indptr = np.ascontiguousarray(csr.indptr, dtype=np.intc)


def prepare(csr):
    return Generator(csr)


cdef void _matvec(const double[::1] data, const int[::1] indices, const int[::1] indptr,
                  const double[::1] x, double[::1] out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k, j
    cdef double re, im, dr, di, xr, xi
    for i in range(n):
        re = 0.0
        im = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            dr = data[2 * k]
            di = data[2 * k + 1]
            xr = x[2 * j]
            xi = x[2 * j + 1]
            re = re + (dr * xr - di * xi)
            im = im + (dr * xi + di * xr)
        out[2 * i] = re
        out[2 * i + 1] = im


def matvec(gen, y):
    """Return ``L @ y`` for a complex vector ``y``."""
    cdef Py_ssize_t n = gen.n
    x = np.ascontiguousarray(y, dtype=np.complex128).view(np.float64)
    out = np.empty(2 * n, dtype=np.float64)
    _matvec(gen.data, gen.indices, gen.indptr, x, out, n)
    return out.view(np.complex128)


def dopri5_advance(gen, y0, double t0, double t1, double h, double rtol, double atol, double max_step):
    """Adaptive Dormand-Prince 5(4) from ``t0`` to exactly ``t1``.

    Returns ``(y, h_next, n_accepted, n_rejected)``.
    """
    cdef Py_ssize_t n = gen.n
    cdef Py_ssize_t m = 2 * n
    cdef const double[::1] data = gen.data
    cdef const int[::1] indices = gen.indices
    cdef const int[::1] indptr = gen.indptr

    y_arr = np.array(y0, dtype=np.complex128).view(np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] ynew = np.empty(m)
    cdef double[::1] ytmp = np.empty(m)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double[::1] k5 = np.empty(m)
    cdef double[::1] k6 = np.empty(m)
    cdef double[::1] k7 = np.empty(m)
    cdef double[::1] swap

    cdef double t = t0
    cdef double h_step, err, sc, er, ei, ar, ai, br, bi, factor, h_min
    cdef bint last, rejected = False
    cdef long n_acc = 0, n_rej = 0
    cdef Py_ssize_t i, c

    if t1 <= t0:
        return y_arr.view(np.complex128), h, 0, 0

    with nogil:
        _matvec(data, indices, indptr, y, k1, n)

    while t < t1:
        if h > max_step:
            h = max_step
        h_min = 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0)
        if h < h_min:
            raise IntegrationError(f"step size underflow at t = {t!r}", t_reached=t)
        if t + h >= t1 - 1e-14 * (fabs(t1) if fabs(t1) > 1.0 else 1.0):
            h_step = t1 - t
            last = True
        else:
            h_step = h
            last = False

        with nogil:
            for i in range(m):
                ytmp[i] = y[i] + h_step * (A21 * k1[i])
            _matvec(data, indices, indptr, ytmp, k2, n)
            for i in range(m):
                ytmp[i] = y[i] + h_step * (A31 * k1[i] + A32 * k2[i])
            _matvec(data, indices, indptr, ytmp, k3, n)
            for i in range(m):
                ytmp[i] = y[i] + h_step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _matvec(data, indices, indptr, ytmp, k4, n)
            for i in range(m):
                ytmp[i] = y[i] + h_step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _matvec(data, indices, indptr, ytmp, k5, n)
            for i in range(m):
                ytmp[i] = y[i] + h_step * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            _matvec(data, indices, indptr, ytmp, k6, n)
            for i in range(m):
                ynew[i] = y[i] + h_step * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            _matvec(data, indices, indptr, ynew, k7, n)

            err = 0.0
            for c in range(n):
                i = 2 * c
                er = h_step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                ei = h_step * (E1 * k1[i + 1] + E3 * k3[i + 1] + E4 * k4[i + 1] + E5 * k5[i + 1] + E6 * k6[i + 1] + E7 * k7[i + 1])
                ar = sqrt(y[i] * y[i] + y[i + 1] * y[i + 1])
                br = sqrt(ynew[i] * ynew[i] + ynew[i + 1] * ynew[i + 1])
                sc = atol + rtol * (ar if ar > br else br)
                err = err + (er * er + ei * ei) / (sc * sc)
            err = sqrt(err / n)

        if err <= 1.0:
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * pow(err, -0.2)
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
            if rejected and factor > 1.0:
                factor = 1.0
            rejected = False
            n_acc += 1
            swap = y
            y = ynew
            ynew = swap
            swap = k1
            k1 = k7
            k7 = swap
            if last:
                t = t1
                if not h_step < h:
                    h = h_step * factor
            else:
                t = t + h_step
                h = h_step * factor
        else:
            factor = SAFETY * pow(err, -0.2)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h = h_step * factor
            rejected = True
            n_rej += 1

    out = np.asarray(y).copy().view(np.complex128)
    return out, h, n_acc, n_rej


def rk4_advance(gen, y0, double t0, double t1, long n_steps):
    """Classical fixed-step RK4 with ``n_steps`` equal steps from ``t0`` to ``t1``."""
    cdef Py_ssize_t n = gen.n
    cdef Py_ssize_t m = 2 * n
    cdef const double[::1] data = gen.data
    cdef const int[::1] indices = gen.indices
    cdef const int[::1] indptr = gen.indptr
    y_arr = np.array(y0, dtype=np.complex128).view(np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] ytmp = np.empty(m)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double dt
    cdef long s
    cdef Py_ssize_t i
    if n_steps < 1 or t1 <= t0:
        return y_arr.view(np.complex128)
    dt = (t1 - t0) / n_steps
    with nogil:
        for s in range(n_steps):
            _matvec(data, indices, indptr, y, k1, n)
            for i in range(m):
                ytmp[i] = y[i] + 0.5 * dt * k1[i]
            _matvec(data, indices, indptr, ytmp, k2, n)
            for i in range(m):
                ytmp[i] = y[i] + 0.5 * dt * k2[i]
            _matvec(data, indices, indptr, ytmp, k3, n)
            for i in range(m):
                ytmp[i] = y[i] + dt * k3[i]
            _matvec(data, indices, indptr, ytmp, k4, n)
            for i in range(m):
                y[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return y_arr.view(np.complex128)
