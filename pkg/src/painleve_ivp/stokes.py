"""Stokes multipliers of real solutions: leading-order values at large
initial data, constraint checks, and the maps to asymptotic parameters.

Leading-order multipliers drop every o(1) correction. Outside the
large-parameter regime they are still evaluated but a RegimeWarning is
issued.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .constants import arg_gamma, constants
from .errors import DomainError, NotSeparatrix, RegimeWarning

FOURTH_ROOT_24 = 24.0 ** 0.25
# coefficient of d^2 (resp. rho) in the phase shifts of both maps
LOG_SHIFT = 19.0 / 8.0 * math.log(2.0) + 5.0 / 8.0 * math.log(3.0)
THETA_PERIOD = 2.0 * math.pi / FOURTH_ROOT_24

CASES = ("I", "II", "III")
REGIME_THRESHOLDS = {"I": 4.0, "II": -2.0, "III": 2.0}


@dataclass(frozen=True)
class StokesMultipliers:
    s0: complex
    s1: complex
    s2: complex
    s3: complex
    s4: complex

    def __getitem__(self, k: int) -> complex:
        return (self.s0, self.s1, self.s2, self.s3, self.s4)[k % 5]

    def as_tuple(self) -> tuple:
        return (self.s0, self.s1, self.s2, self.s3, self.s4)

    def to_json(self) -> dict:
        return {f"s{k}": [v.real, v.imag] for k, v in enumerate(self.as_tuple())}

    @classmethod
    def from_json(cls, data: dict) -> "StokesMultipliers":
        return cls(*(complex(*data[f"s{k}"]) for k in range(5)))

    @classmethod
    def from_s0_s1_s3(cls, s0, s1, s3) -> "StokesMultipliers":
        """Complete a triple with the reality relations s4 = -conj s1, s2 = -conj s3."""
        return cls(complex(s0), complex(s1), -complex(s3).conjugate(), complex(s3), -complex(s1).conjugate())


@dataclass(frozen=True)
class ScalingParam:
    case: str
    xi: float
    sign: int = 1

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}, got {self.case!r}")
        if not self.xi > 0:
            raise DomainError("the scaling parameter xi must be positive")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_initial_data(cls, case: str, a: float, b: float) -> "ScalingParam":
        """xi = (|b|/2)^(5/3) for case I, (-a)^(5/2) for II, a^(5/2) for III."""
        if case == "I":
            if b == 0:
                raise DomainError("case I needs b != 0")
            return cls("I", (abs(b) / 2.0) ** (5.0 / 3.0), 1 if b > 0 else -1)
        if case == "II":
            if not a < 0:
                raise DomainError("case II needs a < 0")
            return cls("II", (-a) ** 2.5)
        if case == "III":
            if not a > 0:
                raise DomainError("case III needs a > 0")
            return cls("III", a ** 2.5)
        raise ValueError(f"case must be one of {CASES}, got {case!r}")

    @property
    def psi(self) -> float:
        """Phase xi Q0 - sgn(b) Q1 whose cosine fixes the type (cases I, II)."""
        c = constants()
        if self.case == "I":
            return self.xi * c.Q0 - self.sign * c.Q1
        if self.case == "II":
            return self.xi * c.Q0
        raise DomainError("case III has no oscillating phase")


def check_regime(case: str, a: float, b: float) -> bool:
    """True when the large parameter is past its threshold; warns otherwise."""
    if case == "I":
        ok = abs(b) >= REGIME_THRESHOLDS["I"]
        what = f"|b| = {abs(b):g} < {REGIME_THRESHOLDS['I']:g}"
    elif case == "II":
        ok = a <= REGIME_THRESHOLDS["II"]
        what = f"a = {a:g} > {REGIME_THRESHOLDS['II']:g}"
    else:
        ok = a >= REGIME_THRESHOLDS["III"]
        what = f"a = {a:g} < {REGIME_THRESHOLDS['III']:g}"
    if not ok:
        warnings.warn(f"case {case}: {what}; leading-order formulas may be inaccurate",
                      RegimeWarning, stacklevel=3)
    return ok


def multipliers_from_scaling(p: ScalingParam) -> StokesMultipliers:
    try:
        return _multipliers(p)
    except OverflowError:
        raise DomainError(f"xi = {p.xi:.4g}: multipliers exceed double range") from None


def _multipliers(p: ScalingParam) -> StokesMultipliers:
    c = constants()
    xi, sgn = p.xi, p.sign
    if p.case == "I":
        psi = p.psi
        s0 = complex(0.0, 2.0 * math.exp(-xi * c.P0) * math.cos(psi))
        s1 = 1j * cmath.exp(2.0 * xi * c.E0 - 2.0 * sgn * c.E1)
        s3 = -1j * cmath.exp(2.0 * xi * (c.E0 - c.F0) - 2.0 * sgn * (c.E1 - c.F1))
    elif p.case == "II":
        psi = p.psi
        s0 = complex(0.0, 2.0 * math.exp(-xi * c.P0) * math.cos(psi))
        s1 = 1j * cmath.exp(2.0 * xi * c.E0)
        s3 = -1j * cmath.exp(2.0 * xi * (c.E0 - c.F0))
    else:
        s0 = complex(0.0, -math.exp(2.0 * xi * c.H0))
        s1 = 1j * cmath.exp(2.0 * xi * c.G0)
        s3 = 1j * cmath.exp(2.0 * xi * (c.G0 + c.H0))
    return StokesMultipliers.from_s0_s1_s3(s0, s1, s3)


def lemma_multipliers(case: str, a: float, b: float) -> StokesMultipliers:
    """Leading-order Stokes multipliers for large initial data.

    Case I is fixed a with large |b|, case II fixed b with large negative
    a, case III fixed b with large positive a. The fixed parameter does
    not enter at this order.
    """
    p = ScalingParam.from_initial_data(case, a, b)
    check_regime(case, a, b)
    return multipliers_from_scaling(p)


@dataclass(frozen=True)
class ConstraintResidual:
    cyclic: float
    reality: float
    per_k: tuple

    def to_json(self) -> dict:
        return {"cyclic": self.cyclic, "reality": self.reality, "per_k": list(self.per_k)}


def constraint_residual(s: StokesMultipliers) -> ConstraintResidual:
    """Residuals of s_k = i(1 + s_{k+2} s_{k+3}) and of the reality relations."""
    per_k = tuple(abs(s[k] - 1j * (1 + s[k + 2] * s[k + 3])) / (1 + abs(s[k])) for k in range(5))
    reality = max(
        abs(s.s0.real) / (1 + abs(s.s0)),
        abs(s.s4 + s.s1.conjugate()) / (1 + abs(s.s1)),
        abs(s.s2 + s.s3.conjugate()) / (1 + abs(s.s3)),
    )
    return ConstraintResidual(max(per_k), reality, per_k)


def leading_order_residual(s: StokesMultipliers, drop_unit: bool = False) -> float:
    """Relative residual of s3 = i(1 + s0 s1).

    With ``drop_unit`` the 1 is omitted, for data where s0 s1 is
    exponentially large and the 1 has been consistently neglected.
    """
    rhs = 1j * (s.s0 * s.s1 if drop_unit else 1 + s.s0 * s.s1)
    return abs(s.s3 - rhs) / abs(s.s3)


def classify_from_stokes(s: StokesMultipliers, tol: float = 1e-12) -> str:
    """Type A, B or C from the sign of Im s0 = 1 + s2 s3.

    Leading-order data pair an exponentially small s0 with an
    exponentially large s1, so the zero test is applied to Im s0
    scaled by max(1, |s1|).
    """
    v = s.s0.imag
    if abs(v) * max(1.0, abs(s.s1)) <= tol:
        return "B"
    return "A" if v > 0 else "C"


def _reduce(x: float, period: float) -> float:
    # representative in (-period/2, period/2]
    r = math.remainder(x, period)
    return period / 2 if r == -period / 2 else r


@dataclass(frozen=True)
class OscillationParams:
    d: float
    theta: float
    theta_raw: float

    def __iter__(self):
        return iter((self.d, self.theta))


@dataclass(frozen=True)
class PoleTrainParams:
    rho: float
    sigma: float
    sigma_raw: float

    def __iter__(self):
        return iter((self.rho, self.sigma))


def kapaev_A(s: StokesMultipliers) -> OscillationParams:
    """(d, theta) of the oscillating solution with multipliers s.

    theta is defined through 24^(1/4) theta, so it is only fixed modulo
    2 pi 24^(-1/4); ``theta`` is the representative in
    (-pi 24^(-1/4), pi 24^(-1/4)] and ``theta_raw`` uses principal args.
    """
    m = abs(s.s0)
    if not 0 < m < 1:
        raise DomainError(f"need 0 < |s0| < 1 for an oscillating solution, got |s0| = {m:g}")
    k = -math.log(m) / math.pi
    d = math.sqrt(k / FOURTH_ROOT_24)
    scaled = -cmath.phase(s.s3) - k * LOG_SHIFT - math.pi / 4 - arg_gamma(complex(0.0, -k / 2.0))
    theta_raw = scaled / FOURTH_ROOT_24
    return OscillationParams(d, _reduce(theta_raw, THETA_PERIOD), theta_raw)


def kapaev_B(s: StokesMultipliers, tol: float = 1e-10) -> float:
    """h = s1 - s4 for a separatrix (1 + s2 s3 = 0)."""
    gap = abs(1 + s.s2 * s.s3)
    if gap > tol:
        raise NotSeparatrix(f"|1 + s2 s3| = {gap:.3g} exceeds {tol:g}")
    h = s.s1 - s.s4
    if abs(h.imag) > tol * max(1.0, abs(h)):
        warnings.warn(f"discarding imaginary part {h.imag:.3g} of h", RuntimeWarning, stacklevel=2)
    return h.real


def rho_forms(s: StokesMultipliers) -> dict[str, float]:
    """The three equivalent expressions for rho; equal only for exact data."""
    out = {}
    for name, val in (("s2", abs(s.s2) ** 2 - 1), ("1+s2s3", abs(1 + s.s2 * s.s3)), ("s0", abs(s.s0))):
        out[name] = math.log(val) / (2 * math.pi) if val > 0 else -math.inf
    return out


def kapaev_C(s: StokesMultipliers, cross_check: bool = False, tol: float = 1e-8) -> PoleTrainParams:
    """(rho, sigma) of the pole-train solution with multipliers s.

    rho is taken from |s0|, the one form that stays finite for
    leading-order data (where |s2| = 1 exactly). With ``cross_check``
    the other two forms must agree to ``tol``. sigma has period pi.
    """
    if not s.s0.imag < 0:
        raise DomainError("pole-train parameters need Im s0 < 0")
    rho = math.log(abs(s.s0)) / (2 * math.pi)
    if cross_check:
        forms = rho_forms(s)
        spread = max(forms.values()) - min(forms.values())
        if not spread <= tol * max(1.0, abs(rho)):
            raise DomainError(f"rho forms disagree by {spread:.3g}: {forms}")
    sigma_raw = (rho * LOG_SHIFT + 0.5 * arg_gamma(complex(0.5, -rho)) - math.pi / 4
                 + 0.5 * cmath.phase(s.s2))
    sigma = sigma_raw % math.pi
    return PoleTrainParams(rho, 0.0 if sigma == math.pi else sigma, sigma_raw)


def kapaev(s: StokesMultipliers):
    """Dispatch on the trichotomy: (d, theta), h, or (rho, sigma)."""
    tag = classify_from_stokes(s)
    if tag == "A":
        return tag, kapaev_A(s)
    if tag == "C":
        return tag, kapaev_C(s)
    return tag, kapaev_B(s)
