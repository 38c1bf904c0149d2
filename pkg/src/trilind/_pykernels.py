"""Pure numpy/scipy versions of the Runge-Kutta kernels.

Same algorithm and step controller as the compiled ``_kernels`` module; used
when the extension is not built or when ``TRILIND_BACKEND=python``.
"""

import numpy as np
import scipy.sparse as sp

from .errors import IntegrationError

name = "python"

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


def prepare(csr):
    return sp.csr_matrix(csr, dtype=np.complex128)


def matvec(gen, y):
    return gen @ y


def dopri5_advance(gen, y0, t0, t1, h, rtol, atol, max_step):
    y = np.array(y0, dtype=np.complex128)
    if t1 <= t0:
        return y, h, 0, 0
    t = t0
    n_acc = n_rej = 0
    rejected = False
    k1 = gen @ y
    while t < t1:
        h = min(h, max_step)
        if h < 1e-14 * max(abs(t), 1.0):
            raise IntegrationError(f"step size underflow at t = {t!r}", t_reached=t)
        if t + h >= t1 - 1e-14 * max(abs(t1), 1.0):
            h_step, last = t1 - t, True
        else:
            h_step, last = h, False

        k2 = gen @ (y + h_step * (A21 * k1))
        k3 = gen @ (y + h_step * (A31 * k1 + A32 * k2))
        k4 = gen @ (y + h_step * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = gen @ (y + h_step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = gen @ (y + h_step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        ynew = y + h_step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = gen @ ynew

        e = h_step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.sqrt(np.mean((e.real**2 + e.imag**2) / sc**2)))

        if err <= 1.0:
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err**-0.2)
            if rejected:
                factor = min(factor, 1.0)
            rejected = False
            n_acc += 1
            y, k1 = ynew, k7
            if last:
                t = t1
                if not h_step < h:
                    h = h_step * factor
            else:
                t = t + h_step
                h = h_step * factor
        else:
            h = h_step * max(MIN_FACTOR, SAFETY * err**-0.2)
            rejected = True
            n_rej += 1
    return y, h, n_acc, n_rej


def rk4_advance(gen, y0, t0, t1, n_steps):
    y = np.array(y0, dtype=np.complex128)
    if n_steps < 1 or t1 <= t0:
        return y
    dt = (t1 - t0) / n_steps
    for _ in range(n_steps):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * dt * k1)
        k3 = gen @ (y + 0.5 * dt * k2)
        k4 = gen @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y
