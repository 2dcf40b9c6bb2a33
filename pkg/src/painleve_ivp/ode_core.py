"""Real-axis integration of y'' = 6y^2 + t through its double poles.

Between poles the equation is integrated with an adaptive DOP853 pair.
When y runs past ``y_switch`` a pole is close: the solution is matched to
the local Laurent chart

    y = (t - t_p)^-2 - t_p/10 (t - t_p)^2 - 1/6 (t - t_p)^3 + h (t - t_p)^4 + ...

at a point a distance ``r`` in front of the pole, and integration restarts
from the chart a distance ``r`` behind it ("vaulting"). The two free
constants (t_p, h) of every pole are kept in the trajectory.

Note that h here is the free order-4 Laurent coefficient. It has nothing
to do with the connection quantity h = s1 - s4 of a separatrix solution
(see :func:`painleve_ivp.stokes.kapaev_B`).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import NewtonDivergence

REACHED_END = "ReachedEnd"
MAX_POLES_EXCEEDED = "MaxPolesExceeded"
STEP_UNDERFLOW = "StepUnderflow"

_BUFFER_ROWS = 65536


@dataclass(frozen=True)
class InitialData:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"initial data must be finite, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class PIState:
    t: float
    y: float
    dy: float


@dataclass(frozen=True)
class PoleRecord:
    t_p: float
    h: float
    side_entered: int
    radius: float = float("nan")


@dataclass(frozen=True)
class IntegratorOptions:
    """Tolerances and pole-handling knobs.

    ``vault_radius`` is the largest chart radius tried; the radius actually
    used at a pole is shrunk until the series truncation estimate is below
    ``series_tol`` and the chart does not reach back over the previous pole.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    y_switch: float = 1e4
    vault_radius: float = 0.3
    max_poles: int = 200
    laurent_order: int = 40
    series_tol: float = 1e-13
    max_step: float = float("inf")
    first_step: float = 1e-3
    scale_cap: float = 1.0

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.y_switch > 10:
            raise ValueError("y_switch must exceed 10")
        if not 0 < self.vault_radius < 1:
            raise ValueError("vault_radius must lie in (0, 1)")
        if self.laurent_order < 6:
            raise ValueError("laurent_order must be at least 6")
        if self.max_poles < 0:
            raise ValueError("max_poles must be non-negative")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")

    def replace(self, **changes) -> "IntegratorOptions":
        return IntegratorOptions(**{**asdict(self), **changes})


@dataclass
class Trajectory:
    """Accepted integrator states plus the poles vaulted on the way.

    ``t``, ``y``, ``dy`` are strictly monotone in t (decreasing for the
    usual run towards -infinity). No stored state lies inside the chart of
    a recorded pole, except the final one when ``t_end`` itself falls
    inside a chart; that state is then evaluated from the series.
    """

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    poles: list = field(default_factory=list)
    termination: str = REACHED_END

    @property
    def samples(self) -> list[PIState]:
        return [PIState(float(a), float(b), float(c)) for a, b, c in zip(self.t, self.y, self.dy)]

    @property
    def pole_times(self) -> np.ndarray:
        return np.array([p.t_p for p in self.poles])

    def __len__(self):
        return len(self.t)

    def window(self, t_lo: float, t_hi: float) -> "Trajectory":
        """Samples and poles with t_lo <= t <= t_hi."""
        m = (self.t >= t_lo) & (self.t <= t_hi)
        poles = [p for p in self.poles if t_lo <= p.t_p <= t_hi]
        return Trajectory(self.t[m], self.y[m], self.dy[m], poles, self.termination)

    def pieces(self):
        """Split the samples into pole-free runs, one per inter-pole gap."""
        direction = -1.0 if len(self.t) > 1 and self.t[-1] < self.t[0] else 1.0
        cuts = sorted({int(np.count_nonzero(direction * (self.t - p.t_p) < 0)) for p in self.poles})
        bounds = [0] + cuts + [len(self.t)]
        return [(self.t[i:j], self.y[i:j], self.dy[i:j]) for i, j in zip(bounds[:-1], bounds[1:]) if j > i]

    def to_csv(self, path) -> None:
        """Write ``t,y,dy`` rows and a ``<path>.json`` sidecar with the poles."""
        path = Path(path)
        data = np.column_stack([self.t, self.y, self.dy])
        np.savetxt(path, data, delimiter=",", header="t,y,dy", comments="", fmt="%.17g")
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(self.sidecar(), indent=1))

    def sidecar(self) -> dict:
        return {
            "poles": [{"t_p": p.t_p, "h": p.h} for p in self.poles],
            "termination": self.termination,
        }

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        direction = -1 if len(data) < 2 or data[-1, 0] < data[0, 0] else 1
        poles = [PoleRecord(p["t_p"], p["h"], -direction) for p in meta["poles"]]
        return cls(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), poles, meta["termination"])


def rhs(state: PIState) -> tuple[float, float]:
    """Right-hand side of the first-order system: (y', 6y^2 + t)."""
    return state.dy, 6.0 * state.y ** 2 + state.t


def laurent_coeffs(t_p: float, h: float, order: int) -> np.ndarray:
    """Coefficients c_{-2}, ..., c_{order} of the pole chart at ``t_p``.

    Entry ``i`` holds c_{i-2}; c_{-2} = 1, c_{-1} = c_0 = c_1 = 0,
    c_2 = -t_p/10, c_3 = -1/6 and c_4 = h.
    """
    if order < 6:
        raise ValueError("order must be at least 6")
    c = np.zeros(order + 3)
    return _kernels.laurent_series(c, float(t_p), float(h))


def _series(t_p, h, z, order):
    if isinstance(t_p, complex) or isinstance(h, complex) or isinstance(z, complex):
        c = np.zeros(order + 3, dtype=complex)
        _kernels.laurent_series(c, complex(t_p), complex(h))
        return _kernels.laurent_sum(c, complex(z)), c
    c = np.zeros(order + 3)
    _kernels.laurent_series(c, float(t_p), float(h))
    return _kernels.laurent_sum(c, float(z)), c


def truncation_estimate(coeffs: np.ndarray, z: float) -> float:
    """Size of the last two retained terms relative to the leading z^-2."""
    n = len(coeffs)
    tail = abs(coeffs[-1]) * abs(z) ** (n - 1) + abs(coeffs[-2]) * abs(z) ** (n - 2)
    return float(tail)


def laurent_eval(pole: PoleRecord, z: float, order: int = 40) -> tuple[PIState, float]:
    """State at t = t_p + z from the truncated chart, with its truncation estimate."""
    if z == 0:
        raise ValueError("cannot evaluate the chart at the pole itself")
    (y, dy), c = _series(pole.t_p, pole.h, z, order)
    return PIState(pole.t_p + z, float(y), float(dy)), truncation_estimate(c, z)


def fit_pole(state: PIState, order: int = 40, max_iter: int = 40) -> PoleRecord:
    """Locate the pole ahead of ``state`` and its free coefficient h.

    Newton iteration on y(t) = chart(t), y'(t) = chart'(t) for (t_p, h);
    the Jacobian comes from complex-step differentiation of the chart,
    which is polynomial in both unknowns.
    """
    t, y, dy = state.t, state.y, state.dy
    if not y > 0:
        raise NewtonDivergence(f"no double pole near a state with y = {y}")
    # y ~ z^-2 with sign(z) = -sign(y') fixes the side
    side = 1 if dy < 0 else -1
    z = side / math.sqrt(y)
    t_p = t - z
    # energy H = y'^2/2 - 2y^3 - t y equals 1/z - 14 h + O(z) in the chart
    energy = 0.5 * dy * dy - 2.0 * y ** 3 - t * y
    h = (1.0 / z - energy) / 14.0
    if not math.isfinite(h) or abs(z) < 0.05:
        h = 0.0
    sy, sdy = abs(y), abs(dy)
    eps = 1e-30
    res = math.inf
    for _ in range(max_iter):
        (fy, fdy), _c = _series(t_p, h, t - t_p, order)
        r = np.array([(fy - y) / sy, (fdy - dy) / sdy])
        res = float(np.max(np.abs(r)))
        if res < 1e-15:
            break
        (gy, gdy), _c = _series(complex(t_p, eps), h, complex(t - t_p, -eps), order)
        (ky, kdy), _c = _series(t_p, complex(h, eps), t - t_p, order)
        jac = np.array([[gy.imag / eps / sy, ky.imag / eps / sy],
                        [gdy.imag / eps / sdy, kdy.imag / eps / sdy]])
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence("singular Jacobian in pole fit") from exc
        t_p += step[0]
        h += step[1]
        if not (math.isfinite(t_p) and math.isfinite(h)):
            raise NewtonDivergence(f"pole fit diverged from t = {t}")
        if abs(step[0]) <= 4e-16 * max(1.0, abs(t_p)) and abs(step[1]) <= 1e-13 * max(1.0, abs(h)):
            break
    (fy, fdy), _c = _series(t_p, h, t - t_p, order)
    res = max(abs(fy - y) / sy, abs(fdy - dy) / sdy)
    if not res < 1e-10:
        raise NewtonDivergence(f"pole fit residual {res:.3g} too large at t = {t}")
    return PoleRecord(float(t_p), float(h), 1 if t > t_p else -1, float(abs(t - t_p)))


def vault(pole: PoleRecord, opts: IntegratorOptions | None = None, direction: int = -1,
          radius: float | None = None) -> PIState:
    """Re-entry state a distance ``radius`` past the pole in ``direction``."""
    opts = opts or IntegratorOptions()
    r = radius if radius is not None else (pole.radius if math.isfinite(pole.radius) else opts.vault_radius)
    state, _ = laurent_eval(pole, direction * r, opts.laurent_order)
    return state


class _Stepper:
    def __init__(self, opts: IntegratorOptions):
        self.opts = opts
        self.buf = np.empty((_BUFFER_ROWS, 3))
        self.h_next = opts.first_step

    def run(self, t0, y0, v0, t_end, y_switch):
        """Integrate, returning (rows, status); rows include the start."""
        chunks = []
        o = self.opts
        while True:
            n, status, self.h_next = _kernels.dop853_segment(
                t0, y0, v0, t_end, o.rtol, o.atol, y_switch, o.max_step,
                self.h_next, self.buf, _kernels.A, _kernels.B, _kernels.C,
                _kernels.E3, _kernels.E5, o.scale_cap)
            rows = self.buf[:n].copy()
            if status != _kernels.BUFFER_FULL:
                chunks.append(rows)
                return np.concatenate(chunks), status
            chunks.append(rows[:-1])
            t0, y0, v0 = rows[-1]


def _choose_radius(opts, t_p, h, limit):
    r = min(opts.vault_radius, limit)
    c = laurent_coeffs(t_p, h, opts.laurent_order)
    while truncation_estimate(c, r) > opts.series_tol and r > 1e-3:
        r *= 0.85
    return r


def integrate_from(state: PIState, t_end: float, opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate from an arbitrary state to ``t_end`` (either direction)."""
    opts = opts or IntegratorOptions()
    direction = -1 if t_end < state.t else 1
    stepper = _Stepper(opts)
    pieces = []
    poles: list[PoleRecord] = []
    t, y, v = state.t, state.y, state.dy
    # chart radii are limited by the distance to the previous pole and
    # must leave the entry point beyond the previous exit point
    prev_pole = None
    prev_exit = t
    termination = REACHED_END
    if t == t_end:
        return Trajectory(np.array([t]), np.array([y]), np.array([v]), [], REACHED_END)
    while True:
        rows, status = stepper.run(t, y, v, t_end, opts.y_switch)
        if status == _kernels.REACHED_END:
            pieces.append(rows)
            break
        if status == _kernels.UNDERFLOW:
            pieces.append(rows)
            termination = STEP_UNDERFLOW
            break
        if len(poles) >= opts.max_poles:
            pieces.append(rows)
            termination = MAX_POLES_EXCEEDED
            break
        pole, kept, exit_state = _vault_segment(rows, direction, prev_pole, prev_exit, stepper, opts)
        pieces.append(kept)
        poles.append(pole)
        t, y, v = exit_state.t, exit_state.y, exit_state.dy
        prev_pole, prev_exit = pole.t_p, t
        if direction * (t - t_end) >= 0:
            # the chart itself reaches past t_end
            st, _ = laurent_eval(pole, t_end - pole.t_p, opts.laurent_order)
            pieces.append(np.array([[st.t, st.y, st.dy]]))
            break
    data = np.concatenate(pieces)
    return Trajectory(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), poles, termination)


def _vault_segment(rows, direction, prev_pole, prev_exit, stepper, opts):
    """Handle a pole detected at the end of ``rows``.

    Returns the pole record, the rows to keep (ending at the chart entry
    point) and the re-entry state on the far side.
    """
    t_det, y_det, _ = rows[-1]
    t_p = t_det + direction / math.sqrt(y_det)
    h = 0.0
    limit = 0.9 * abs(t_p - prev_exit)
    if prev_pole is not None:
        limit = min(limit, 0.45 * abs(t_p - prev_pole))
    pole = None
    for _attempt in range(6):
        r = _choose_radius(opts, t_p, h, limit)
        t_fit = t_p - direction * r
        # last accepted state strictly before the chart entry point
        before = direction * (rows[:, 0] - t_fit) < 0
        j = int(np.nonzero(before)[0][-1])
        seg, _ = stepper.run(rows[j, 0], rows[j, 1], rows[j, 2], t_fit, np.inf)
        entry = PIState(*seg[-1])
        pole = fit_pole(entry, opts.laurent_order)
        c = laurent_coeffs(pole.t_p, pole.h, opts.laurent_order)
        if truncation_estimate(c, r) <= opts.series_tol * 10 or r <= 1e-3:
            break
        t_p, h = pole.t_p, pole.h
    kept = np.concatenate([rows[: j + 1], seg[1:]])
    pole = PoleRecord(pole.t_p, pole.h, -direction, float(abs(entry.t - pole.t_p)))
    exit_state, _ = laurent_eval(pole, direction * pole.radius, opts.laurent_order)
    return pole, kept, exit_state


def integrate(init: InitialData, t_end: float, opts: IntegratorOptions | None = None) -> Trajectory:
    """Solve y'' = 6y^2 + t, y(0) = a, y'(0) = b on [t_end, 0]."""
    if t_end > 0:
        raise ValueError("t_end must be <= 0: integration runs towards negative t")
    return integrate_from(PIState(0.0, float(init.a), float(init.b)), t_end, opts)


def hermite_eval(t0, y0, v0, t1, y1, v1, tq):
    """Quintic Hermite interpolant through two states (y'' from the ODE)."""
    a0 = 6.0 * y0 * y0 + t0
    a1 = 6.0 * y1 * y1 + t1
    hstep = t1 - t0
    s = (np.asarray(tq) - t0) / hstep
    s2, s3 = s * s, s * s * s
    h00 = 1 - 10 * s3 + 15 * s3 * s - 6 * s3 * s2
    h10 = s - 6 * s3 + 8 * s3 * s - 3 * s3 * s2
    h20 = 0.5 * (s2 - 3 * s3 + 3 * s3 * s - s3 * s2)
    h01 = 10 * s3 - 15 * s3 * s + 6 * s3 * s2
    h11 = -4 * s3 + 7 * s3 * s - 3 * s3 * s2
    h21 = 0.5 * (s3 - 2 * s3 * s + s3 * s2)
    return (h00 * y0 + h10 * hstep * v0 + h20 * hstep ** 2 * a0
            + h01 * y1 + h11 * hstep * v1 + h21 * hstep ** 2 * a1)
