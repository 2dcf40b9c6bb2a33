"""Extrema and zero crossings of the excursion w = y + sqrt(-t/6)."""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicHermiteSpline


def excursion(t, y, dy):
    """w = y + sqrt(-t/6) and its t-derivative."""
    t = np.asarray(t, dtype=float)
    root = np.sqrt(-t / 6.0)
    return np.asarray(y) + root, np.asarray(dy) - 1.0 / (12.0 * root)


def _spline(t, y, dy):
    t = np.asarray(t, dtype=float)
    order = np.argsort(t)
    w, dw = excursion(t[order], np.asarray(y)[order], np.asarray(dy)[order])
    keep = np.concatenate([[True], np.diff(t[order]) > 0])
    return CubicHermiteSpline(t[order][keep], w[keep], dw[keep])


def extrema(t, y, dy):
    """Interior extrema of w, in increasing t.

    Returns (t_ext, w_ext, is_max).
    """
    s = _spline(t, y, dy)
    ds = s.derivative()
    roots = ds.roots(extrapolate=False)
    roots = np.unique(roots[np.isfinite(roots)])
    lo, hi = s.x[0], s.x[-1]
    roots = roots[(roots > lo) & (roots < hi)]
    curv = ds.derivative()(roots)
    keep = curv != 0
    roots = roots[keep]
    return roots, s(roots), curv[keep] < 0


def zero_crossings(t, y, dy):
    """Zeros of w, in increasing t, and whether w is rising there."""
    s = _spline(t, y, dy)
    roots = s.roots(extrapolate=False)
    roots = np.unique(roots[np.isfinite(roots)])
    roots = roots[(roots > s.x[0]) & (roots < s.x[-1])]
    slope = s.derivative()(roots)
    keep = slope != 0
    return roots[keep], slope[keep] > 0
