"""Compiled inner loops: the DOP853 stepper for y'' = 6y^2 + t and the
Laurent recurrence at a double pole.

Everything here works on plain floats and arrays so numba can compile it;
the public wrappers live in :mod:`painleve_ivp.ode_core`.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

# Tableau of Hairer's DOP853 (stages 0..11, K[12] holds the FSAL slope).
A = np.ascontiguousarray(_dop.A[:12, :12])
B = np.ascontiguousarray(_dop.B)
C = np.ascontiguousarray(_dop.C[:12])
E3 = np.ascontiguousarray(_dop.E3)
E5 = np.ascontiguousarray(_dop.E5)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

REACHED_END = 0
SWITCH = 1
UNDERFLOW = 2
BUFFER_FULL = 3


@njit(cache=True)
def _accel(t, y):
    return 6.0 * y * y + t


@njit(cache=True)
def dop853_segment(t0, y0, v0, t_end, rtol, atol, y_switch, max_step,
                   h_abs, out, A, B, C, E3, E5, scale_cap):
    """Integrate from (t0, y0, v0) towards t_end.

    Accepted states are written row-wise to ``out`` (t, y, y'). Stops at
    t_end, when y exceeds ``y_switch``, on step underflow, or when ``out``
    is full. Returns (n_rows, status, next_step_size).

    The relative part of the error scale saturates at ``scale_cap``: close
    to a pole a purely relative test would let the absolute error grow
    like |y|, and that error is amplified when the pole is fitted.
    """
    cap = out.shape[0]
    out[0, 0] = t0
    out[0, 1] = y0
    out[0, 2] = v0
    n = 1
    if t0 == t_end:
        return n, REACHED_END, h_abs
    direction = 1.0 if t_end > t0 else -1.0
    K = np.empty((13, 2))
    t = t0
    y = y0
    v = v0
    fy = v
    fv = _accel(t, y)
    exponent = -1.0 / 8.0

    while True:
        if n >= cap:
            return n, BUFFER_FULL, h_abs
        if h_abs > max_step:
            h_abs = max_step
        min_step = 10.0 * abs(np.nextafter(t, direction * np.inf) - t)
        rejected = False
        while True:
            if h_abs < min_step:
                return n, UNDERFLOW, h_abs
            t_new = t + direction * h_abs
            if direction * (t_new - t_end) > 0.0:
                t_new = t_end
            h = t_new - t
            K[0, 0] = fy
            K[0, 1] = fv
            for s in range(1, 12):
                dy = 0.0
                dv = 0.0
                for j in range(s):
                    a = A[s, j]
                    if a != 0.0:
                        dy += a * K[j, 0]
                        dv += a * K[j, 1]
                ys = y + h * dy
                vs = v + h * dv
                K[s, 0] = vs
                K[s, 1] = _accel(t + C[s] * h, ys)
            sy = 0.0
            sv = 0.0
            for j in range(12):
                sy += B[j] * K[j, 0]
                sv += B[j] * K[j, 1]
            y_new = y + h * sy
            v_new = v + h * sv
            fy_new = v_new
            fv_new = _accel(t_new, y_new)
            K[12, 0] = fy_new
            K[12, 1] = fv_new

            scale_y = atol + rtol * min(max(abs(y), abs(y_new)), scale_cap)
            scale_v = atol + rtol * min(max(abs(v), abs(v_new)), scale_cap)
            e5y = 0.0
            e5v = 0.0
            e3y = 0.0
            e3v = 0.0
            for j in range(13):
                e5y += E5[j] * K[j, 0]
                e5v += E5[j] * K[j, 1]
                e3y += E3[j] * K[j, 0]
                e3v += E3[j] * K[j, 1]
            e5 = (e5y / scale_y) ** 2 + (e5v / scale_v) ** 2
            e3 = (e3y / scale_y) ** 2 + (e3v / scale_v) ** 2
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * 2.0)

            if not (np.isfinite(err) and np.isfinite(y_new) and np.isfinite(v_new)):
                h_abs *= MIN_FACTOR
                rejected = True
                continue
            if err < 1.0:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err ** exponent)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            h_abs *= max(MIN_FACTOR, SAFETY * err ** exponent)
            rejected = True

        t = t_new
        y = y_new
        v = v_new
        fy = fy_new
        fv = fv_new
        out[n, 0] = t
        out[n, 1] = y
        out[n, 2] = v
        n += 1
        if t == t_end:
            return n, REACHED_END, h_abs
        if y > y_switch:
            return n, SWITCH, h_abs


@njit(cache=True)
def laurent_series(c, tp, h):
    """Fill ``c`` with c_{-2}..c_{order} of y = sum c_k (t - tp)^k.

    ``c`` has length order + 3 and may be real or complex (complex input
    is used for complex-step derivatives); entry i holds c_{i-2}.
    Substituting the series into y'' = 6y^2 + t gives, for k != 4,
    (k - 4)(k + 3) c_k = 6 * sum' c_i c_j + [k == 2] tp + [k == 3],
    where the primed sum runs over i + j = k - 2 with i, j != k.
    """
    order = c.shape[0] - 3
    c[:] = 0.0
    c[0] = 1.0
    for k in range(-1, order + 1):
        if k == 4:
            c[k + 2] = h
            continue
        acc = c[0] * 0.0
        # i, j in [-1, k-1]; the -2 partner of index k is excluded
        for i in range(-1, k):
            j = k - 2 - i
            if j < -1:
                break
            if j >= k:
                continue
            acc += c[i + 2] * c[j + 2]
        rhs = 6.0 * acc
        if k == 2:
            rhs += tp
        elif k == 3:
            rhs += 1.0
        c[k + 2] = rhs / ((k - 4) * (k + 3))
    return c


@njit(cache=True)
def laurent_sum(c, z):
    """Evaluate y, y' of the series with coefficients ``c`` at offset z."""
    m = c.shape[0]
    # y * z^2 = sum_{i} c[i] z^i ; Horner in z
    p = c[m - 1]
    dp = c[m - 1] * 0.0
    for i in range(m - 2, -1, -1):
        dp = dp * z + p
        p = p * z + c[i]
    zinv = 1.0 / z
    y = p * zinv * zinv
    dy = (dp - 2.0 * p * zinv) * zinv * zinv
    return y, dy
