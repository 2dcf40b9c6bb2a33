"""A / C / Undetermined verdicts for real solutions at a finite depth.

A solution is called A once it has run several expected pole spacings
past its last pole and oscillates about -sqrt(-t/6) with a slowly
varying scaled amplitude; it is called C when it keeps producing poles
at the rate of the pole-train model down to the examined depth.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _signal
from .errors import InsufficientSpan
from .ode_core import MAX_POLES_EXCEEDED, InitialData, IntegratorOptions, Trajectory, integrate

TAGS = ("A", "C", "Undetermined")
FOURTH_ROOT_24 = 24.0 ** 0.25


def pole_spacing_model(t):
    """Leading-order distance between consecutive poles of a pole train near t.

    The pole phase (2/5) 24^(1/4) (-t)^(5/4) advances by pi from one pole
    to the next and its t-derivative has modulus (1/2) 24^(1/4) (-t)^(1/4),
    so the gap is 2 pi / (24^(1/4) (-t)^(1/4)).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t >= 0):
        raise ValueError("pole spacing is defined for t < 0")
    out = 2.0 * math.pi / (FOURTH_ROOT_24 * (-t) ** 0.25)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ClassifyOptions:
    depth: float = -60.0
    spacings_A: float = 3.0
    poles_C: int = 8
    gap_tol: float = 0.3
    drift_tol: float = 0.2
    min_sign_changes: int = 6


@dataclass(frozen=True)
class SolutionClass:
    tag: str
    pole_count: int
    last_pole_t: float | None
    quality: float
    depth: float

    def to_json(self) -> dict:
        return {"tag": self.tag, "pole_count": self.pole_count, "last_pole_t": self.last_pole_t,
                "quality": None if math.isnan(self.quality) else self.quality, "depth": self.depth}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "SolutionClass":
        quality = math.nan if data["quality"] is None else data["quality"]
        return cls(data["tag"], data["pole_count"], data.get("last_pole_t"), quality, data["depth"])


def oscillation_check(tail: Trajectory, drift_tol: float = 0.2, min_sign_changes: int = 6):
    """Does a pole-free tail oscillate stably about -sqrt(-t/6)?

    Returns (ok, quality) where quality is the largest relative change
    between consecutive maxima (or consecutive minima) of
    (y + sqrt(-t/6)) (-t)^(1/8) over the deeper half of the tail.
    Raises InsufficientSpan when the tail holds fewer than
    ``min_sign_changes`` sign changes of y + sqrt(-t/6).
    """
    if tail.poles:
        raise InsufficientSpan("oscillation tail must be pole-free")
    t, y, dy = tail.t, tail.y, tail.dy
    if len(t) < 4 or np.any(t >= 0):
        raise InsufficientSpan("tail must hold several samples at t < 0")
    t_z, rising = _signal.zero_crossings(t, y, dy)
    if len(t_z) < min_sign_changes:
        raise InsufficientSpan(f"only {len(t_z)} sign changes of y + sqrt(-t/6) in the tail")
    t_ext, w_ext, is_max = _signal.extrema(t, y, dy)
    # the first swings after a pole are far from the asymptotic regime,
    # so the shape tests use the deeper half of the tail
    deep = t_ext <= 0.5 * (t.min() + t.max())
    alternates = bool(np.all(rising[1:] != rising[:-1])) and bool(np.all((w_ext > 0)[deep] == is_max[deep]))
    scaled = np.abs(w_ext) * (-t_ext) ** 0.125
    drift = 0.0
    for kind in (True, False):
        v = scaled[(is_max == kind) & deep]
        if len(v) < 2:
            v = scaled[is_max == kind]
        if len(v) >= 2:
            drift = max(drift, float(np.max(np.abs(np.diff(v)) / np.maximum(v[:-1], 1e-300))))
    bounded = bool(np.all(np.isfinite(scaled)))
    ok = alternates and bounded and drift <= drift_tol
    return ok, drift


def classify_trajectory(traj: Trajectory, depth: float, copts: ClassifyOptions | None = None) -> SolutionClass:
    copts = copts or ClassifyOptions()
    tp = traj.pole_times
    n = len(tp)
    t_end = float(traj.t[-1])
    last = float(tp[-1]) if n else None

    if n and traj.termination != MAX_POLES_EXCEEDED:
        room = last - t_end
        clear = room >= copts.spacings_A * pole_spacing_model(min(last, -1.0))
    else:
        clear = traj.termination != MAX_POLES_EXCEEDED and t_end <= depth
    if clear and t_end <= depth:
        start = min(last - traj.poles[-1].radius if n else 0.0, -1.0)
        keep = traj.t < start
        tail = Trajectory(traj.t[keep], traj.y[keep], traj.dy[keep], [], traj.termination)
        try:
            ok, quality = oscillation_check(tail, copts.drift_tol, copts.min_sign_changes)
        except InsufficientSpan:
            ok, quality = False, math.nan
        if ok:
            return SolutionClass("A", n, last, quality, depth)
        return SolutionClass("Undetermined", n, last, quality, depth)

    if n >= copts.poles_C:
        recent = tp[-copts.poles_C:]
        gaps = -np.diff(recent)
        mids = 0.5 * (recent[1:] + recent[:-1])
        ok_mid = mids < -1.0
        if np.any(ok_mid):
            rel = np.abs(gaps[ok_mid] / pole_spacing_model(mids[ok_mid]) - 1.0)
            quality = float(np.max(rel))
            if quality <= copts.gap_tol:
                return SolutionClass("C", n, last, quality, depth)
            return SolutionClass("Undetermined", n, last, quality, depth)
    return SolutionClass("Undetermined", n, last, math.nan, depth)


def _options_for_depth(opts: IntegratorOptions | None, depth: float) -> IntegratorOptions:
    opts = opts or IntegratorOptions()
    # enough room for a pole train down to depth, plus margin
    needed = int(1.5 * 0.4 * FOURTH_ROOT_24 * (-depth) ** 1.25 / math.pi) + 20
    return opts.replace(max_poles=max(opts.max_poles, needed))


def classify(init: InitialData, depth: float = -60.0, opts: IntegratorOptions | None = None,
             copts: ClassifyOptions | None = None) -> SolutionClass:
    """Verdict for the solution with y(0) = a, y'(0) = b examined down to ``depth``."""
    if not depth <= -20:
        raise ValueError("depth must be <= -20")
    traj = integrate(init, depth, _options_for_depth(opts, depth))
    return classify_trajectory(traj, depth, copts)
