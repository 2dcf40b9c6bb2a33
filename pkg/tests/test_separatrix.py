import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from painleve_ivp.classify import classify
from painleve_ivp.constants import constants
from painleve_ivp.errors import VerdictInversion
from painleve_ivp.ode_core import InitialData
from painleve_ivp.separatrix import (CSV_HEADER, SeparatrixSequence, SeparatrixValue, find_sequence,
                                     predict_sequence)

# frozen from bisection runs to width 1e-6 at depth -60 (deepened near brackets)
FROZEN = {
    "bn": [1.85185432, 3.0040310, 3.9051754, 4.6834126, 5.3830868],
    "an": [-0.7401951, -1.2067036, -1.4843754],
    "bn_tilde": [-0.4514271, -2.2884960, -3.3237423],
}


@pytest.fixture(scope="module")
def bn5():
    return find_sequence("bn", 0.0, n_max=5, tol=1e-6)


@pytest.fixture(scope="module")
def an3():
    return find_sequence("an", 0.0, n_max=3, tol=1e-6)


@pytest.fixture(scope="module")
def bt3():
    return find_sequence("bn_tilde", 0.0, n_max=3, tol=1e-6)


# ---- closed forms -----------------------------------------------------------------

def test_predict_sequence_table_values():
    imp = predict_sequence("bn", [1, 2, 3, 4, 5, 10, 11])
    assert imp == pytest.approx([1.8754, 3.0098, 3.9081, 4.6853, 5.3844, 8.2454, 8.7388], abs=5e-4)
    pw = predict_sequence("bn", [1, 10], "power_law")
    assert pw == pytest.approx([2.0922, 8.3290], abs=5e-4)


def test_predict_sequence_power_law_uses_the_constants_identity():
    c = constants()
    assert predict_sequence("bn", 1, "power_law") == pytest.approx(c.B_bk, rel=1e-13)
    # B = 2 (pi / Q0)^(3/5) because Q0 = sqrt(pi/3) Gamma(1/3) / Gamma(11/6)
    assert predict_sequence("bn", 1, "power_law") == pytest.approx(2 * (math.pi / c.Q0) ** 0.6, rel=1e-12)
    assert predict_sequence("an", 1, "power_law") == pytest.approx(-(math.pi / c.Q0) ** 0.4, rel=1e-12)


@given(st.integers(1, 10 ** 6))
def test_predict_sequence_signs_and_growth(n):
    assert predict_sequence("bn", n + 1) > predict_sequence("bn", n) > 0
    assert predict_sequence("bn_tilde", n + 1) < predict_sequence("bn_tilde", n) < 0
    assert predict_sequence("an", n + 1) < predict_sequence("an", n) < 0


@given(st.integers(10 ** 3, 10 ** 8))
def test_improved_and_power_law_merge(n):
    for kind in ("bn", "bn_tilde", "an"):
        imp, pw = predict_sequence(kind, n), predict_sequence(kind, n, "power_law")
        assert abs(imp / pw - 1) < 2.0 / n


def test_predict_sequence_errors():
    with pytest.raises(ValueError):
        predict_sequence("cn", 1)
    with pytest.raises(ValueError):
        predict_sequence("bn", 0)
    with pytest.raises(ValueError):
        predict_sequence("bn", 1.5)
    with pytest.raises(ValueError):
        predict_sequence("bn", 1, "exact")


# ---- search ---------------------------------------------------------------------------

def test_find_sequence_argument_errors():
    with pytest.raises(ValueError):
        find_sequence("bn", tol=1e-9)
    with pytest.raises(ValueError):
        find_sequence("bn", n_max=0)
    with pytest.raises(ValueError):
        find_sequence("xx")


@pytest.mark.parametrize("name", ["bn5", "an3", "bt3"])
def test_found_values_match_frozen_runs(name, request):
    seq = request.getfixturevalue(name)
    assert seq.as_array() == pytest.approx(FROZEN[seq.kind], abs=3e-6)
    for v in seq.values:
        assert v.width <= 1e-6


@pytest.mark.parametrize("name", ["bn5", "an3", "bt3"])
def test_midpoints_monotone_and_brackets_disjoint(name, request):
    seq = request.getfixturevalue(name)
    mids = seq.as_array()
    steps = np.diff(mids)
    assert np.all(steps > 0) if seq.kind == "bn" else np.all(steps < 0)
    spans = sorted((min(v.lo, v.hi), max(v.lo, v.hi)) for v in seq.values)
    assert all(a[1] < b[0] for a, b in zip(spans, spans[1:]))


def test_bracket_endpoints_classify_differently(bn5):
    for v in bn5.values[:3]:
        lo = classify(InitialData(0.0, v.lo), -100.0).tag
        hi = classify(InitialData(0.0, v.hi), -100.0).tag
        assert {lo, hi} == {"A", "C"}


def test_interval_parity(bn5):
    edges = [0.0] + list(bn5.as_array())
    for k, (x, y) in enumerate(zip(edges, edges[1:])):
        tag = classify(InitialData(0.0, 0.5 * (x + y))).tag
        assert tag == ("A" if k % 2 == 0 else "C")


def test_first_an_has_poles_on_the_negative_side(an3):
    v = an3.values[0]
    assert v.value < 0
    assert classify(InitialData(v.value - 0.05, 0.0)).tag == "C"
    assert classify(InitialData(v.value + 0.05, 0.0)).tag == "A"


def test_improved_formula_beats_power_law(bn5):
    found = bn5.as_array()
    n = np.arange(1, len(found) + 1)
    imp = np.abs(found - predict_sequence("bn", n))
    pw = np.abs(found - predict_sequence("bn", n, "power_law"))
    assert np.all(np.diff(imp) < 0)
    assert np.all(imp < pw)


def test_csv_output(bn5, tmp_path):
    text = bn5.to_csv(tmp_path / "bn.csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 6
    assert float(rows[1][1]) == bn5.values[0].value
    assert (tmp_path / "bn.csv").read_text() == text


def test_sequence_helpers():
    seq = SeparatrixSequence("bn", 0.0, [SeparatrixValue(1, 1.0, 1.5)])
    assert seq.values[0].midpoint == 1.25 and seq.values[0].width == 0.5
    assert list(seq.rows())[0][0] == 1


def test_verdict_inversion_when_the_scan_cannot_reach(monkeypatch):
    # a scan that stops before the second separatrix is reported, not patched
    import painleve_ivp.separatrix as sep

    monkeypatch.setattr(sep, "predict_sequence", lambda *a, **k: 1.0)
    with pytest.raises(VerdictInversion):
        sep.find_sequence("bn", 0.0, n_max=2, tol=1e-3)


def test_verdict_inversion_on_a_non_A_start():
    # with a = 3 the sweep's first point (b = 0) already carries poles
    assert classify(InitialData(3.0, 0.0)).tag == "C"
    with pytest.raises(VerdictInversion):
        find_sequence("bn", 3.0, n_max=1, tol=1e-3)


@pytest.mark.parametrize("name", ["an3", "bt3"])
def test_other_families_approach_the_improved_formula(name, request):
    # no reference table exists for these families; the closed form is the only yardstick
    seq = request.getfixturevalue(name)
    found = seq.as_array()
    err = np.abs(found - predict_sequence(seq.kind, np.arange(1, len(found) + 1)))
    assert np.all(np.diff(err) < 0)
    assert err[-1] < 0.01
