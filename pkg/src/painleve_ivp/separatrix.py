"""Locate the separatrix initial data where the A/C verdict flips.

Three one-parameter families are searched:

* ``bn``: y(0) = anchor fixed, y'(0) = b increasing from 0;
* ``bn_tilde``: same, with b decreasing from 0;
* ``an``: y'(0) = anchor fixed, y(0) = a decreasing from 0.

A coarse scan brackets each flip and bisection narrows it. Along each
sweep the n-th flip must leave a C solution for odd n and an A
solution for even n.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassifyOptions, classify
from .constants import constants, log_gamma
from .errors import VerdictInversion
from .ode_core import InitialData, IntegratorOptions

KINDS = ("bn", "bn_tilde", "an")
VARIANTS = ("improved", "power_law")
SCAN_STEP = 0.05
DEEPER = (-100.0, -150.0)
# brackets narrower than this are classified at DEEPER[0] or below
NARROW = 1e-4
CSV_HEADER = ("n", "found", "improved", "power_law", "abs_err_improved", "abs_err_power")


def _power_law_coefficient(kind: str) -> float:
    # computed from log_gamma directly rather than from Q0
    ratio = math.sqrt(3 * math.pi) * math.exp((log_gamma(11 / 6) - log_gamma(1 / 3)).real)
    if kind == "an":
        return -ratio ** 0.4
    b = 2.0 * ratio ** 0.6
    return b if kind == "bn" else -b


def predict_sequence(kind: str, n, variant: str = "improved"):
    """Large-n asymptotic location of the n-th separatrix value."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1) or np.any(n_arr != np.floor(n_arr)):
        raise ValueError("n must be a positive integer")
    if variant == "power_law":
        p = 0.4 if kind == "an" else 0.6
        out = _power_law_coefficient(kind) * n_arr ** p
    else:
        c = constants()
        phase = n_arr * math.pi - math.pi / 2
        if kind == "bn":
            out = 2.0 * ((phase + c.Q1) / c.Q0) ** 0.6
        elif kind == "bn_tilde":
            out = -2.0 * ((phase - c.Q1) / c.Q0) ** 0.6
        else:
            out = -(phase / c.Q0) ** 0.4
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SeparatrixValue:
    n: int
    lo: float
    hi: float

    @property
    def value(self) -> float:
        return 0.5 * (self.lo + self.hi)

    midpoint = value

    @property
    def width(self) -> float:
        return abs(self.hi - self.lo)


@dataclass
class SeparatrixSequence:
    kind: str
    anchor: float
    values: list = field(default_factory=list)
    tolerance: float = 1e-6
    depth: float = -60.0

    def as_array(self) -> np.ndarray:
        return np.array([v.value for v in self.values])

    def rows(self):
        for v in self.values:
            imp = predict_sequence(self.kind, v.n, "improved")
            pw = predict_sequence(self.kind, v.n, "power_law")
            yield (v.n, v.value, imp, pw, abs(v.value - imp), abs(v.value - pw))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows():
            w.writerow([row[0]] + [f"{x:.17g}" for x in row[1:]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _init(kind: str, anchor: float, x: float) -> InitialData:
    return InitialData(x, anchor) if kind == "an" else InitialData(anchor, x)


def _verdict(kind, anchor, x, depth, opts, copts) -> str:
    tag = classify(_init(kind, anchor, x), depth, opts, copts).tag
    if tag == "Undetermined":
        # close to a separatrix the decision happens later
        for deeper in DEEPER:
            if deeper < depth:
                tag = classify(_init(kind, anchor, x), deeper, opts, copts).tag
                if tag != "Undetermined":
                    break
    return tag


def _verdict_job(args):
    return _verdict(*args)


def _expected(flip_count: int) -> str:
    return "C" if flip_count % 2 else "A"


def find_sequence(kind: str, anchor: float = 0.0, n_max: int = 5, tol: float = 1e-6,
                  depth: float = -60.0, opts: IntegratorOptions | None = None,
                  copts: ClassifyOptions | None = None, jobs: int = 1,
                  step: float = SCAN_STEP) -> SeparatrixSequence:
    """First ``n_max`` separatrix values of one family to bracket width ``tol``."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not tol >= 1e-8:
        raise ValueError("tol must be >= 1e-8")
    sign = 1.0 if kind == "bn" else -1.0
    # scan past the predicted last value with a generous margin
    reach = abs(predict_sequence(kind, n_max + 1, "improved")) + 1.0
    grid = sign * np.arange(0.0, reach + step, step)

    args = [(kind, anchor, float(x), depth, opts, copts) for x in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            tags = list(ex.map(_verdict_job, args, chunksize=8))
    else:
        tags = [_verdict(*a) for a in args]

    seq = SeparatrixSequence(kind, anchor, tolerance=tol, depth=depth)
    brackets = []
    flips = 0
    for i, tag in enumerate(tags):
        if tag == "Undetermined":
            raise VerdictInversion(f"no verdict at {kind} scan point {grid[i]:.6g}")
        if i == 0:
            if tag != "A":
                raise VerdictInversion(f"sweep starts on a {tag} solution at {grid[0]:.6g}")
            continue
        if tag == tags[i - 1]:
            continue
        flips += 1
        if tag != _expected(flips):
            raise VerdictInversion(f"flip {flips} at {grid[i]:.6g} leads to {tag}")
        brackets.append((kind, anchor, float(grid[i - 1]), float(grid[i]), tags[i - 1], tol,
                         depth, opts, copts, flips))
        if flips == n_max:
            break
    if flips < n_max:
        raise VerdictInversion(f"found only {flips} of {n_max} flips before {grid[-1]:.6g}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            seq.values = list(ex.map(_bisect_job, brackets))
    else:
        seq.values = [_bisect(*b) for b in brackets]
    return seq


def _bisect_job(args):
    return _bisect(*args)


def _bisect(kind, anchor, lo, hi, tag_lo, tol, depth, opts, copts, n) -> SeparatrixValue:
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        d = min(depth, DEEPER[0]) if abs(hi - lo) < NARROW else depth
        tag = _verdict(kind, anchor, mid, d, opts, copts)
        if tag == "Undetermined":
            # unresolvable at any depth we try; keep the bracket we have
            break
        if tag == tag_lo:
            lo = mid
        else:
            hi = mid
    return SeparatrixValue(n, lo, hi)
