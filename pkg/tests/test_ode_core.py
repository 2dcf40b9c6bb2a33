import json
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from painleve_ivp.errors import NewtonDivergence
from painleve_ivp.ode_core import (MAX_POLES_EXCEEDED, REACHED_END, InitialData, IntegratorOptions,
                                   PIState, PoleRecord, Trajectory, fit_pole, hermite_eval, integrate,
                                   integrate_from, laurent_coeffs, laurent_eval, rhs, vault)


# ---- independent oracles ---------------------------------------------------

def sympy_laurent(tp, h, order):
    """Exact coefficients by substituting a generic series into y'' = 6y^2 + t."""
    z = sp.Symbol("z")
    cs = sp.symbols(f"c0:{order + 1}")
    coeffs = {-2: sp.Integer(1), -1: sp.Integer(0)}
    for k in range(0, order + 1):
        coeffs[k] = cs[k]
    coeffs[4] = h
    y = sum(coeffs[k] * z ** k for k in coeffs)
    expr = sp.expand(sp.diff(y, z, 2) - 6 * y ** 2 - (tp + z))
    solved = {}
    for power in range(-4, order - 1):
        eq = expr.coeff(z, power).subs(solved)
        free = [s for s in eq.free_symbols if s in cs]
        if free:
            sol = sp.solve(eq, free[0])
            solved[free[0]] = sol[0]
    return [coeffs[k].subs(solved) for k in range(-2, order + 1)]


def scipy_reference(a, b, t_end, rtol=1e-13):
    f = lambda t, u: [u[1], 6 * u[0] ** 2 + t]
    sol = solve_ivp(f, [0.0, t_end], [a, b], method="DOP853", rtol=rtol, atol=1e-14)
    return sol.y[:, -1]


def contour_around(t0, y0, v0, t1, side=1):
    """Carry (y, y') from t0 to t1 along a half circle in the complex t-plane."""
    c, R = 0.5 * (t0 + t1), 0.5 * abs(t1 - t0)
    ph0 = np.angle(t0 - c)

    def f(s, u):
        w = R * np.exp(1j * (ph0 + side * s))
        dt = 1j * side * w
        return [u[1] * dt, (6 * u[0] ** 2 + c + w) * dt]

    sol = solve_ivp(f, [0, math.pi], np.array([y0, v0], complex), method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


# ---- rhs ----------------------------------------------------------------------

@pytest.mark.parametrize("state,expected", [
    (PIState(0.0, 0.0, 0.0), (0.0, 0.0)),
    (PIState(0.0, 1.5, -0.25), (-0.25, 13.5)),
    (PIState(-6.0, 1.0, 2.0), (2.0, 0.0)),
])
def test_rhs_examples(state, expected):
    assert rhs(state) == expected


# ---- Laurent chart ----------------------------------------------------------------

def test_laurent_coeffs_match_exact_rational_oracle():
    tp, h = sp.Rational(-7, 3), sp.Rational(1, 5)
    exact = sympy_laurent(tp, h, 14)
    ours = laurent_coeffs(float(tp), float(h), 14)
    for k, (e, o) in enumerate(zip(exact, ours)):
        assert o == pytest.approx(float(e), rel=1e-14, abs=1e-15), f"c_{k - 2}"


@given(st.floats(-50, -0.1), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_laurent_fixed_coefficients(tp, h):
    c = laurent_coeffs(tp, h, 12)
    assert c[0] == 1 and c[1] == 0 and c[2] == 0 and c[3] == 0
    assert c[4] == pytest.approx(-tp / 10)
    assert c[5] == pytest.approx(-1 / 6)
    assert c[6] == h
    assert c[7] == 0
    assert c[8] == pytest.approx(tp ** 2 / 300)


def test_laurent_zero_pole_location():
    c = laurent_coeffs(0.0, 0.0, 12)
    assert c[4] == 0 and c[8] == 0


def test_laurent_order_precondition():
    with pytest.raises(ValueError):
        laurent_coeffs(-1.0, 0.0, 5)


def chart_residual(tp, h, z, order):
    """Exact residual y'' - 6y^2 - t of the truncated chart built from our coefficients."""
    c = [Fraction(float(x)) for x in laurent_coeffs(tp, h, order)]
    z = Fraction(z)
    y = sum(ck * z ** (k - 2) for k, ck in enumerate(c))
    ypp = sum(ck * (k - 2) * (k - 3) * z ** (k - 4) for k, ck in enumerate(c))
    return float(ypp - 6 * y * y - (Fraction(tp) + z)), float(6 * y * y)


@pytest.mark.parametrize("z", [1e-2, 1e-3])
def test_truncated_series_ode_residual(z):
    resid, scale = chart_residual(-2.0, 0.3, z, 12)
    assert abs(resid) / scale < 1e-15


def test_truncated_series_residual_order():
    # with rounding negligible, halving z divides the residual by about 2^(order-1)
    order = 12
    r1, _ = chart_residual(-2.0, 0.3, 0.4, order)
    r2, _ = chart_residual(-2.0, 0.3, 0.2, order)
    assert 2 ** (order - 1) / 2 < abs(r1 / r2) < 2 ** (order - 1) * 2


def test_laurent_leading_term_and_parity():
    pole = PoleRecord(-4.0, 0.7, 1)
    for z in (1e-2, 1e-3, 1e-4):
        s, _ = laurent_eval(pole, z)
        assert s.y * z * z == pytest.approx(1.0, abs=5 * z * z * 4)
    # terms of even order are the same at +z and -z; the odd part is small
    sp_, _ = laurent_eval(pole, 0.01)
    sm, _ = laurent_eval(pole, -0.01)
    odd = 0.5 * (sp_.y - sm.y)
    assert abs(odd) < 1e-5
    assert 0.5 * (sp_.y + sm.y) == pytest.approx(1e4 + 0.4 * 1e-4, rel=1e-10)


def test_laurent_eval_rejects_zero():
    with pytest.raises(ValueError):
        laurent_eval(PoleRecord(-1.0, 0.0, 1), 0.0)


# ---- pole fitting -------------------------------------------------------------

def test_fit_pole_roundtrip():
    s, _ = laurent_eval(PoleRecord(-3.0, 0.2, 1), 0.05)
    rec = fit_pole(s)
    assert rec.t_p == pytest.approx(-3.0, abs=1e-8)
    assert rec.h == pytest.approx(0.2, abs=1e-8)


@given(st.floats(-40, -0.5), st.floats(-3, 3), st.floats(0.02, 0.3), st.sampled_from([-1, 1]))
@settings(max_examples=40, deadline=None)
def test_fit_pole_roundtrip_property(tp, h, r, side):
    s, _ = laurent_eval(PoleRecord(tp, h, 1), side * r)
    rec = fit_pole(s)
    assert rec.t_p == pytest.approx(tp, abs=1e-9)
    # h enters y at relative size r^6, so its conditioning degrades like r^-6
    assert rec.h == pytest.approx(h, abs=1e-13 * r ** -6 * max(1, abs(h), abs(tp)))


def test_fit_pole_initial_guess_error_shrinks():
    # t - sign/sqrt(y) misses t_p by O(y^(-3/2)) in the leading correction
    errs = []
    for z in (0.04, 0.02, 0.01):
        s, _ = laurent_eval(PoleRecord(-5.0, 0.1, 1), z)
        guess = s.t - 1 / math.sqrt(s.y)
        errs.append(abs(guess + 5.0))
    assert errs[1] < errs[0] / 8 * 1.5 and errs[2] < errs[1] / 8 * 1.5


def test_fit_pole_rejects_nonpositive():
    with pytest.raises(NewtonDivergence):
        fit_pole(PIState(-1.0, -1e5, 3.0))


# ---- vaulting ----------------------------------------------------------------

def test_vault_radius_halving_consistency():
    pole = PoleRecord(-3.0, 0.2, 1, 0.05)
    opts = IntegratorOptions()
    a = vault(pole, opts, radius=0.2)
    b = vault(pole, opts, radius=0.1)
    # carry the r/2 exit state on to the r exit with the RK integrator
    tr = integrate_from(b, a.t, opts)
    assert tr.y[-1] == pytest.approx(a.y, rel=1e-8)
    assert tr.dy[-1] == pytest.approx(a.dy, rel=1e-8)


# ---- integrate ---------------------------------------------------------------

def test_zero_interval_gives_initial_state():
    tr = integrate(InitialData(0.3, -0.2), 0.0)
    assert len(tr) == 1 and tr.y[0] == 0.3 and tr.dy[0] == -0.2 and not tr.poles


def test_forward_time_rejected():
    with pytest.raises(ValueError):
        integrate(InitialData(0, 0), 1.0)


def test_nonfinite_initial_data_rejected():
    with pytest.raises(ValueError):
        InitialData(math.nan, 0.0)


@pytest.mark.parametrize("bad", [dict(rtol=0), dict(atol=-1), dict(y_switch=5), dict(vault_radius=1.5),
                                 dict(laurent_order=4), dict(max_poles=-1)])
def test_options_validation(bad):
    with pytest.raises(ValueError):
        IntegratorOptions(**bad)


def test_pole_free_solution_matches_scipy(trajectory):
    tr = trajectory(0.0, 0.0, -10.0)
    assert not tr.poles and tr.termination == REACHED_END
    ref = scipy_reference(0.0, 0.0, -10.0)
    assert tr.y[-1] == pytest.approx(ref[0], rel=1e-9)
    assert tr.dy[-1] == pytest.approx(ref[1], rel=1e-9)
    # oscillation about the lower parabola
    w = tr.y + np.sqrt(-tr.t / 6)
    assert np.count_nonzero(np.diff(np.sign(w[tr.t < -2]))) >= 4


def test_values_after_poles_match_complex_contour(trajectory):
    tr = trajectory(0.0, 2.0, -12.0)
    tp = tr.pole_times
    assert len(tp) >= 5
    for p in tp[:4]:
        i = np.argmin(np.abs(tr.t - (p + 0.9)))
        j = np.argmin(np.abs(tr.t - (p - 0.7)))
        for side in (1, -1):
            y, v = contour_around(tr.t[i], tr.y[i], tr.dy[i], tr.t[j], side)
            assert abs(y.imag) < 1e-9
            assert y.real == pytest.approx(tr.y[j], rel=1e-8)
            assert v.real == pytest.approx(tr.dy[j], rel=1e-8, abs=1e-8)


def test_pole_count_grows_for_pole_train(trajectory):
    short = trajectory(0.0, 2.5, -15.0)
    long = trajectory(0.0, 2.5, -30.0)
    assert 0 < len(short.poles) < len(long.poles)


def test_max_poles_termination():
    tr = integrate(InitialData(0.0, 2.0), -60.0, IntegratorOptions(max_poles=5))
    assert tr.termination == MAX_POLES_EXCEEDED
    assert len(tr.poles) == 5


def test_trajectory_invariants(trajectory):
    tr = trajectory(0.0, 2.0, -60.0)
    assert np.all(np.diff(tr.t) < 0)
    assert np.all(np.diff(tr.pole_times) < 0)
    # the end point may come from the last chart when t_end falls inside it
    inner = tr.t[:-1]
    for p in tr.poles:
        assert np.min(np.abs(inner - p.t_p)) >= p.radius * (1 - 1e-12)
        assert p.side_entered == 1
    assert np.all(np.isfinite(tr.y)) and np.all(np.isfinite(tr.dy))


def test_threshold_independence_first_pole():
    a = integrate(InitialData(0.0, 2.0), -5.0, IntegratorOptions(y_switch=1e3))
    b = integrate(InitialData(0.0, 2.0), -5.0, IntegratorOptions(y_switch=1e4))
    assert a.pole_times[0] < 0
    assert a.pole_times[0] == pytest.approx(b.pole_times[0], abs=1e-7)


def test_pole_chart_consistency_backwards(trajectory):
    tr = trajectory(0.0, 2.0, -20.0)
    for p in tr.poles[:5]:
        before = np.flatnonzero(tr.t > p.t_p)[-1]
        after = before + 1
        back = integrate_from(PIState(tr.t[after], tr.y[after], tr.dy[after]), tr.t[before])
        assert len(back.poles) == 1
        assert back.y[-1] == pytest.approx(tr.y[before], rel=1e-6)
        assert back.dy[-1] == pytest.approx(tr.dy[before], rel=1e-6)


def test_rtol_refinement_pole_free(trajectory):
    rtol = 1e-8
    a = integrate(InitialData(0.0, 0.0), -30.0, IntegratorOptions(rtol=rtol))
    b = integrate(InitialData(0.0, 0.0), -30.0, IntegratorOptions(rtol=rtol / 10))
    assert abs(a.y[-1] - b.y[-1]) <= 100 * rtol * abs(b.y[-1])


def test_determinism(trajectory):
    a = integrate(InitialData(0.1, 3.3), -25.0)
    b = integrate(InitialData(0.1, 3.3), -25.0)
    assert np.array_equal(a.t, b.t) and np.array_equal(a.y, b.y)
    assert [p.t_p for p in a.poles] == [p.t_p for p in b.poles]


# ---- serialization and helpers ------------------------------------------------

def test_csv_roundtrip(tmp_path, trajectory):
    tr = trajectory(0.0, 2.0, -10.0)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,y,dy"
    meta = json.loads((tmp_path / "traj.csv.json").read_text())
    assert set(meta) == {"poles", "termination"}
    assert set(meta["poles"][0]) == {"t_p", "h"}
    back = Trajectory.from_csv(path)
    assert np.array_equal(back.t, tr.t) and np.array_equal(back.y, tr.y) and np.array_equal(back.dy, tr.dy)
    assert [(p.t_p, p.h) for p in back.poles] == [(p.t_p, p.h) for p in tr.poles]
    assert back.termination == tr.termination


def test_pieces_split_at_poles(trajectory):
    tr = trajectory(0.0, 2.0, -10.0)
    pieces = tr.pieces()
    assert len(pieces) == len(tr.poles) + 1
    assert sum(len(p[0]) for p in pieces) == len(tr)


def test_hermite_eval_interpolates(trajectory):
    tr = trajectory(0.0, 0.0, -10.0)
    i = len(tr) // 2
    y = hermite_eval(tr.t[i], tr.y[i], tr.dy[i], tr.t[i + 1], tr.y[i + 1], tr.dy[i + 1],
                     np.array([tr.t[i], tr.t[i + 1]]))
    assert y[0] == pytest.approx(tr.y[i], rel=1e-14) and y[1] == pytest.approx(tr.y[i + 1], rel=1e-14)
    # midpoint against a tight scipy run
    tm = 0.5 * (tr.t[i] + tr.t[i + 1])
    ym = hermite_eval(tr.t[i], tr.y[i], tr.dy[i], tr.t[i + 1], tr.y[i + 1], tr.dy[i + 1], tm)
    assert float(ym) == pytest.approx(scipy_reference(0.0, 0.0, tm)[0], rel=1e-8)
