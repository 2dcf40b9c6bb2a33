"""Limiting connection formulas and fits of their parameters to numerics.

Two routes to the same numbers live in this package: :func:`predict`
evaluates the closed-form connection formulas directly, while
``stokes.kapaev_*`` applied to ``stokes.lemma_multipliers`` goes through
the Stokes data. Tests compare the two.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import _signal
from .constants import arg_gamma, constants
from .errors import FitDivergence, InsufficientData, SeparatrixProximity
from .stokes import (FOURTH_ROOT_24, LOG_SHIFT, THETA_PERIOD, ScalingParam,
                     _reduce, check_regime)

SEPARATRIX_COS_TOL = 1e-6


@dataclass(frozen=True)
class ConnectionParams:
    """Asymptotic parameters of one solution.

    Variant A carries (d, theta), B carries h and C carries (rho, sigma);
    unused fields are NaN. sigma is stored reduced to [0, pi).
    """

    variant: str
    d: float = math.nan
    theta: float = math.nan
    h: float = math.nan
    rho: float = math.nan
    sigma: float = math.nan

    def __post_init__(self):
        if self.variant not in ("A", "B", "C"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "A" and not self.d >= 0:
            raise ValueError("d must be non-negative")
        if self.variant == "C":
            s = self.sigma % math.pi
            # tiny negative inputs round up to exactly pi
            object.__setattr__(self, "sigma", 0.0 if s == math.pi else s)

    @classmethod
    def A(cls, d, theta):
        return cls("A", d=float(d), theta=float(theta))

    @classmethod
    def B(cls, h):
        return cls("B", h=float(h))

    @classmethod
    def C(cls, rho, sigma):
        return cls("C", rho=float(rho), sigma=float(sigma))

    def to_json(self) -> dict:
        keys = {"A": ("d", "theta"), "B": ("h",), "C": ("rho", "sigma")}[self.variant]
        return {"variant": self.variant, **{k: getattr(self, k) for k in keys}}

    @classmethod
    def from_json(cls, data: dict) -> "ConnectionParams":
        return cls(**data)

    def __str__(self) -> str:
        body = ", ".join(f"{k}={v:.10g}" for k, v in self.to_json().items() if k != "variant")
        return f"{self.variant}({body})"


def oscillation_phase(t, d, theta):
    s = -np.asarray(t, dtype=float)
    return FOURTH_ROOT_24 * (0.8 * s ** 1.25 - 0.625 * d * d * np.log(s) + theta)


def oscillation_model(t, p: ConnectionParams | None = None, *, d=None, theta=None):
    """-sqrt(-t/6) + d (-t)^(-1/8) cos(phi(t)), without higher corrections."""
    if p is not None:
        d, theta = p.d, p.theta
    s = -np.asarray(t, dtype=float)
    return -np.sqrt(s / 6.0) + d * s ** -0.125 * np.cos(oscillation_phase(t, d, theta))


def oscillation_model_slope(t, d, theta):
    s = -np.asarray(t, dtype=float)
    phi = oscillation_phase(t, d, theta)
    dphi = -FOURTH_ROOT_24 * (s ** 0.25 - 0.625 * d * d / s)
    amp = d * s ** -0.125
    return 1.0 / (12.0 * np.sqrt(s / 6.0)) + 0.125 * amp / s * np.cos(phi) - amp * np.sin(phi) * dphi


def pole_phase_model(t, p: ConnectionParams | None = None, *, rho=None, sigma=None):
    """(2/5) 24^(1/4) (-t)^(5/4) + (5/8) rho log(-t) + sigma; poles sit at multiples of pi."""
    if p is not None:
        rho, sigma = p.rho, p.sigma
    s = -np.asarray(t, dtype=float)
    return 0.4 * FOURTH_ROOT_24 * s ** 1.25 + 0.625 * rho * np.log(s) + sigma


def is_pole(t, p: ConnectionParams, eps: float = 1e-8):
    return np.abs(np.sin(pole_phase_model(t, p))) < eps


@dataclass(frozen=True)
class Prediction:
    case: str
    params: ConnectionParams
    cos_psi: float
    in_regime: bool
    warnings: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {"case": self.case, "params": self.params.to_json(), "cos_psi": self.cos_psi,
                "in_regime": self.in_regime, "warnings": list(self.warnings)}


def _A_from_phase(xi, psi):
    c = constants()
    k = (xi * c.P0 - math.log(2.0 * math.cos(psi))) / math.pi
    d = math.sqrt(k / FOURTH_ROOT_24)
    scaled = 2.0 * psi - k * LOG_SHIFT + math.pi / 4 - arg_gamma(complex(0.0, -k / 2.0))
    return d, scaled / FOURTH_ROOT_24


def _C_sigma(rho, shift):
    return rho * LOG_SHIFT + 0.5 * arg_gamma(complex(0.5, -rho)) + shift


def predict(case: str, a: float, b: float) -> Prediction:
    """Leading-order (d, theta) or (rho, sigma) for large initial data.

    Cases I and II pick A or C from the sign of cos(psi); case III is
    always C. theta is returned reduced modulo 2 pi 24^(-1/4) and sigma
    modulo pi.
    """
    c = constants()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        in_regime = check_regime(case, a, b)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    notes = tuple(str(w.message) for w in caught)
    p = ScalingParam.from_initial_data(case, a, b)
    xi = p.xi
    if case == "III":
        rho = xi * c.H0 / math.pi
        sigma = _C_sigma(rho, -math.sqrt(3.0) / 2.0 * xi * c.H0)
        return Prediction(case, ConnectionParams.C(rho, sigma), math.nan, in_regime, notes)
    psi = p.psi
    cos_psi = math.cos(psi)
    if abs(cos_psi) < SEPARATRIX_COS_TOL:
        raise SeparatrixProximity(f"cos(psi) = {cos_psi:.2e}: initial data sit on a separatrix")
    if cos_psi > 0:
        d, theta = _A_from_phase(xi, psi)
        params = ConnectionParams.A(d, _reduce(theta, THETA_PERIOD))
    else:
        rho = -(xi * c.P0 - math.log(-2.0 * cos_psi)) / (2.0 * math.pi)
        params = ConnectionParams.C(rho, _C_sigma(rho, -math.pi / 2 + psi))
    return Prediction(case, params, cos_psi, in_regime, notes)


def predict_h(case: str, a: float, b: float) -> float:
    """Leading-order h = s1 - s4 = 2 exp(xi P0) sin(psi) (cases I, II)."""
    if case == "III":
        raise ValueError("case III solutions are never separatrices at leading order")
    p = ScalingParam.from_initial_data(case, a, b)
    check_regime(case, a, b)
    return 2.0 * math.exp(p.xi * constants().P0) * math.sin(p.psi)


# ---- fits ---------------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    params: ConnectionParams
    rms: float
    n_used: int
    stage_one: tuple = ()

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "rms": self.rms, "n_used": self.n_used}


def _window_samples(traj, window):
    t_lo, t_hi = sorted(window)
    if t_hi > -1:
        raise InsufficientData("fit windows must lie in t <= -1")
    for p in traj.poles:
        if t_lo - p.radius <= p.t_p <= t_hi + p.radius:
            raise InsufficientData(f"pole at t = {p.t_p:.6g} inside the fit window")
    m = (traj.t >= t_lo) & (traj.t <= t_hi)
    return traj.t[m], traj.y[m], traj.dy[m]


def fit_oscillation(traj, window) -> FitReport:
    """Fit (d, theta) of an oscillating tail over a pole-free window.

    d starts from the median scaled extremum, theta from the zero
    crossings of w (phi = pi/2 mod 2 pi where w rises, 3 pi/2 where it
    falls); both are then refined jointly on all samples.
    """
    t, y, dy = _window_samples(traj, window)
    if len(t) < 20:
        raise InsufficientData("too few samples in the window")
    t_ext, w_ext, _ = _signal.extrema(t, y, dy)
    if len(t_ext) < 10:
        raise InsufficientData(f"need at least 10 extrema, found {len(t_ext)}")
    d0 = float(np.median(np.abs(w_ext) * (-t_ext) ** 0.125))

    t_z, rising = _signal.zero_crossings(t, y, dy)
    if len(t_z) < 2:
        raise InsufficientData("no zero crossings of y + sqrt(-t/6)")
    target = np.where(rising, 0.5 * math.pi, 1.5 * math.pi)
    # theta enters phi as 24^(1/4) theta: solve on the circle, then average
    base = oscillation_phase(t_z, d0, 0.0)
    cand = (target - base) / FOURTH_ROOT_24
    ang = cand * (2 * math.pi / THETA_PERIOD)
    theta0 = math.atan2(np.mean(np.sin(ang)), np.mean(np.cos(ang))) * THETA_PERIOD / (2 * math.pi)

    scale = (-t) ** -0.125

    def resid(x):
        return (y - oscillation_model(t, d=x[0], theta=x[1])) / scale

    sol = least_squares(resid, [d0, theta0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitDivergence(f"joint refinement failed: {sol.message}")
    d, theta = float(sol.x[0]), float(sol.x[1])
    if d < 0:
        d, theta = -d, theta + THETA_PERIOD / 2
    if abs(d - d0) > 0.5 * max(d0, 1e-3):
        raise FitDivergence(f"refined d = {d:.4g} drifted far from the initial {d0:.4g}")
    rms = float(np.sqrt(np.mean((y - oscillation_model(t, d=d, theta=theta)) ** 2)))
    return FitReport(ConnectionParams.A(d, _reduce(theta, THETA_PERIOD)), rms, len(t), (d0, theta0))


def _pole_times(poles):
    return np.array([getattr(p, "t_p", p) for p in poles], dtype=float)


def fit_pole_train(poles, t_max: float = -10.0, min_poles: int = 8) -> FitReport:
    """Fit (rho, sigma) to pole locations t_p <= t_max.

    Consecutive poles differ by pi in phase; the integer labels are
    assigned by rounding phase differences, first with rho = 0 and again
    with the fitted rho. The remaining problem is linear in (rho, sigma).
    """
    tp = np.sort(_pole_times(poles))[::-1]
    tp = tp[tp <= t_max]
    if len(tp) < min_poles:
        raise InsufficientData(f"need {min_poles} poles with t_p <= {t_max:g}, got {len(tp)}")
    g = 0.4 * FOURTH_ROOT_24 * (-tp) ** 1.25
    lg = np.log(-tp)
    rho = 0.0
    for _ in range(3):
        phase = g + 0.625 * rho * lg
        # every recorded pole is a new zero of sin, so labels advance by at least one
        k = np.concatenate([[0], np.cumsum(np.maximum(1.0, np.rint(np.diff(phase) / math.pi)))])
        A = np.column_stack([0.625 * lg, np.ones_like(lg)])
        coef, *_ = np.linalg.lstsq(A, k * math.pi - g, rcond=None)
        rho_new, sigma = float(coef[0]), float(coef[1])
        if not (math.isfinite(rho_new) and math.isfinite(sigma)):
            raise FitDivergence("non-finite pole-train fit")
        converged = abs(rho_new - rho) < 1e-12 * max(1.0, abs(rho))
        rho = rho_new
        if converged:
            break
    res = g + 0.625 * rho * lg + sigma - k * math.pi
    rms = float(np.sqrt(np.mean(res ** 2)))
    if rms > 0.25 * math.pi:
        raise FitDivergence(f"pole phases inconsistent with the model (rms {rms:.3g} rad)")
    return FitReport(ConnectionParams.C(rho, sigma), rms, len(tp))


def synthetic_pole_times(rho: float, sigma: float, t_lo: float, t_hi: float = -10.0) -> np.ndarray:
    """Exact zeros of sin(phase) in [t_lo, t_hi], decreasing."""
    from scipy.optimize import brentq

    f = lambda t: pole_phase_model(t, rho=rho, sigma=sigma)
    k_lo, k_hi = math.ceil(min(f(t_hi), f(t_lo)) / math.pi), math.floor(max(f(t_hi), f(t_lo)) / math.pi)
    out = []
    for k in range(k_lo, k_hi + 1):
        out.append(brentq(lambda t: f(t) - k * math.pi, t_lo, t_hi, xtol=1e-14, rtol=1e-15))
    return np.sort(np.array(out))[::-1]
