"""Closed-form asymptotic constants and their quadrature cross-checks.

The closed forms go through a hand-written complex log-gamma; the
cross-checks integrate the defining elliptic-type integrals numerically
(QUADPACK via scipy) so the two routes share no code.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import PoleOfGamma, QuadratureNonConvergence

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

ALPHA = cmath.exp(1j * math.pi / 3)
BETA = cmath.exp(-1j * math.pi / 3)


def _sinpi(z: complex) -> complex:
    # sin(pi z) with the real part reduced first, so integers give exact zeros
    x, y = z.real, z.imag
    n = math.floor(x + 0.5)
    r = x - n
    s, c = math.sin(math.pi * r), math.cos(math.pi * r)
    if n % 2:
        s, c = -s, -c
    return complex(s * math.cosh(math.pi * y), c * math.sinh(math.pi * y))


def _lanczos(z: complex) -> complex:
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    The branch cut runs along the negative real axis and the imaginary
    part is continuous elsewhere, matching the usual ``loggamma``
    convention (so it is not simply log of Gamma).
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleOfGamma(f"Gamma has a pole at z = {z.real:g}")
    if z.real >= 0.5:
        return _lanczos(z)
    if math.copysign(1.0, z.imag) < 0:
        return log_gamma(z.conjugate()).conjugate()
    # upper half plane: log sin(pi z) = -i pi z + i pi/2 - log 2 + log(1 - e^{2 pi i z})
    # is analytic there, and its imaginary part picks the branch of cmath.log
    log_sin = cmath.log(_sinpi(z))
    w = cmath.exp(2j * math.pi * z)
    target = -math.pi * z.real + 0.5 * math.pi + cmath.phase(1.0 - w)
    log_sin += 2j * math.pi * round((target - log_sin.imag) / (2.0 * math.pi))
    return LOG_PI - log_sin - _lanczos(1.0 - z)


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def arg_gamma(z) -> float:
    """Continuous argument of Gamma(z), i.e. Im log Gamma(z)."""
    return log_gamma(z).imag


def beta(x: float, y: float) -> float:
    if not (x > 0 and y > 0):
        raise ValueError("beta needs positive arguments")
    return math.exp((log_gamma(x) + log_gamma(y) - log_gamma(x + y)).real)


@dataclass(frozen=True)
class AsymptoticConstants:
    P0: float
    Q0: float
    Q1: float
    H0: float
    E0: complex
    E1: complex
    F0: complex
    F1: complex
    G0: complex
    B_bk: float

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = [v.real, v.imag] if isinstance(v, complex) else v
        return out

    def identity_residuals(self) -> dict[str, float]:
        """Algebraic relations that must hold among the constants."""
        s3 = math.sqrt(3.0)
        return {
            "P0 = E0 + F0": abs(self.P0 - (self.E0 + self.F0)),
            "F0 = conj E0": abs(self.F0 - self.E0.conjugate()),
            "F1 = -E1": abs(self.F1 + self.E1),
            "Q0 = i(E0 - F0)": abs(self.Q0 - 1j * (self.E0 - self.F0)),
            "Q1 = i(E1 - F1)": abs(self.Q1 - 1j * (self.E1 - self.F1)),
            "Q1 = pi/3": abs(self.Q1 - math.pi / 3),
            "G0 = e^(2 pi i/3) H0": abs(self.G0 - cmath.exp(2j * math.pi / 3) * self.H0),
            "H0 = Q0": abs(self.H0 - self.Q0),
            "B_bk = 2 (pi/Q0)^(3/5)": abs(self.B_bk - 2.0 * (math.pi / self.Q0) ** 0.6),
            "P0 = sqrt3 Q0": abs(self.P0 - s3 * self.Q0),
        }


def constants() -> AsymptoticConstants:
    b13 = beta(0.5, 1.0 / 3.0)
    s3 = math.sqrt(3.0)
    e0 = complex(0.6 * b13, -s3 / 5.0 * b13)
    e1 = complex(0.0, -math.pi / 6.0)
    h0 = 0.4 * beta(1.0 / 6.0, 0.5)
    ratio = math.sqrt(3.0 * math.pi) * math.exp((log_gamma(11.0 / 6.0) - log_gamma(1.0 / 3.0)).real)
    return AsymptoticConstants(
        P0=1.2 * b13,
        Q0=2.0 * s3 / 5.0 * b13,
        Q1=math.pi / 3.0,
        H0=h0,
        E0=e0,
        E1=e1,
        F0=e0.conjugate(),
        F1=-e1,
        G0=cmath.exp(2j * math.pi / 3.0) * h0,
        B_bk=2.0 * ratio ** 0.6,
    )


# ---- quadrature oracles ------------------------------------------------


def _root3(s):
    # (s+1)^(1/2) (s-alpha)^(1/2) (s-beta)^(1/2), each factor principal
    return np.sqrt(s + 1) * np.sqrt(s - ALPHA) * np.sqrt(s - BETA)


def _cquad(f, a, b, tol, **kw):
    """Integrate a complex-valued f over [a, b] as two real QUADPACK calls."""
    parts = []
    for part in (lambda x: f(x).real, lambda x: f(x).imag):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(part, a, b, epsabs=tol, epsrel=0.0, limit=200, **kw)
            except integrate.IntegrationWarning as exc:
                raise QuadratureNonConvergence(str(exc)) from exc
        if not err <= tol:
            raise QuadratureNonConvergence(f"error estimate {err:.2e} above target {tol:.2e}")
        parts.append(val)
    return complex(parts[0], parts[1])


def _ray_from(point, phi, tol):
    """Integral of phi(s) / sqrt(s - point) from ``point`` to infinity along
    the ray through it.

    With s = point / v^2 the ray becomes v in (0, 1] and
    sqrt(s - point) = sqrt(point) sqrt(1 - v) sqrt(1 + v) / v, so the
    endpoint singularity is exactly QUADPACK's algebraic weight (1 - v)^(-1/2).
    """
    root = cmath.sqrt(point)

    def g(v):
        if v == 0:
            return 0j
        s = point / (v * v)
        return phi(s) * 2.0 * point / (root * v * v * math.sqrt(1.0 + v))

    return _cquad(g, 0.0, 1.0, tol, weight="alg", wvar=(0.0, -0.5))


def _segment_beta_alpha(f, tol):
    """Integral of f along the straight segment from beta up to alpha.

    s = 1/2 + i (sqrt3/2) sin(u) removes square-root behaviour at both ends.
    """
    half = math.sqrt(3.0) / 2.0

    def g(u):
        s = complex(0.5, half * math.sin(u))
        return f(s) * 1j * half * math.cos(u)

    return _cquad(g, -math.pi / 2, math.pi / 2, tol)


def quadrature_values(tol: float = 1e-10) -> dict[str, complex]:
    """Every constant evaluated from its defining integral."""
    vals = {}
    # integrands carry (s+1)^(-1/2) (s-beta)^(-1/2); (s-alpha)^(-1/2) is the weight
    vals["E0"] = 1.2 * _ray_from(ALPHA, lambda s: 1.0 / (np.sqrt(s + 1) * np.sqrt(s - BETA)), tol)
    vals["E1"] = _ray_from(ALPHA, lambda s: 1.0 / (2.0 * s * np.sqrt(s + 1) * np.sqrt(s - BETA)), tol)
    integral_i = _segment_beta_alpha(_root3, tol)
    vals["I"] = integral_i
    vals["Q0"] = -2j * integral_i
    vals["Q1"] = -1j * _segment_beta_alpha(lambda s: 1.0 / (2.0 * _root3(s) * s), tol)

    # s = u^-2 turns (6/5) int_1^inf (s^3 - 1)^(-1/2) ds into int_0^1 2 (1 - u^6)^(-1/2) du
    def h(u):
        return 2.0 * math.sqrt((1.0 - u) / (1.0 - u ** 6)) if u < 1 else 2.0 / math.sqrt(6.0)

    vals["H0"] = 1.2 * _cquad(lambda u: complex(h(u)), 0.0, 1.0, tol, weight="alg", wvar=(0.0, -0.5))
    vals["B(1/2,1/3)"] = _cquad(lambda t: 1 + 0j, 0.0, 1.0, tol, weight="alg", wvar=(-0.5, -2.0 / 3.0))
    return vals


@dataclass(frozen=True)
class ResidualRow:
    name: str
    closed_form: complex
    quadrature: complex
    residual: float


def verify_constants(tol: float = 1e-10) -> list[ResidualRow]:
    """Closed forms against quadrature, plus the beta-function identity.

    The identity row compares B(1/2, 1/6) with sqrt(3) B(1/2, 1/3); both
    sides come from log_gamma, so it checks the reflection step.
    """
    if not tol >= 1e-12:
        raise ValueError("tol must be at least 1e-12")
    c = constants()
    b13 = beta(0.5, 1.0 / 3.0)
    q = quadrature_values(tol)
    closed = {
        "E0": c.E0,
        "E1": c.E1,
        "Q0": complex(c.Q0),
        "Q1": complex(c.Q1),
        "H0": complex(c.H0),
        "I": 1j * math.sqrt(3.0) / 5.0 * b13,
        "B(1/2,1/3)": complex(b13),
    }
    rows = [ResidualRow(k, closed[k], q[k], abs(closed[k] - q[k])) for k in closed]
    lhs = beta(0.5, 1.0 / 6.0)
    rhs = math.sqrt(3.0) * b13
    rows.append(ResidualRow("B(1/2,1/6) - sqrt3 B(1/2,1/3)", complex(lhs), complex(rhs), abs(lhs - rhs)))
    return rows
