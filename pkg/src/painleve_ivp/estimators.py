"""scikit-learn style wrappers around classification and the two fits.

The functional API is the primary one; these classes exist so verdicts
and fitted asymptotic parameters can sit inside ordinary sklearn
tooling (grid evaluation, pipelines, get_params/set_params, clone).
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classify import TAGS, ClassifyOptions, classify
from .connection import fit_oscillation, fit_pole_train, oscillation_model, pole_phase_model
from .ode_core import InitialData, IntegratorOptions, Trajectory


class PainleveClassifier(ClassifierMixin, BaseEstimator):
    """Maps rows (a, b) = (y(0), y'(0)) to 'A', 'C' or 'Undetermined'.

    Nothing is learned: ``fit`` only validates input and records the
    label set. ``y`` is accepted and ignored so the estimator composes.
    """

    def __init__(self, depth=-60.0, rtol=1e-10, spacings_A=3.0, poles_C=8):
        self.depth = depth
        self.rtol = rtol
        self.spacings_A = spacings_A
        self.poles_C = poles_C

    def _check_params(self):
        if not self.depth <= -20:
            raise ValueError("depth must be <= -20")
        if not 0 < self.rtol < 1:
            raise ValueError("rtol must lie in (0, 1)")

    def fit(self, X, y=None):
        self._check_params()
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (a, b), got {X.shape[1]}")
        self.n_features_in_ = 2
        self.classes_ = np.array(TAGS)
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (a, b), got {X.shape[1]}")
        opts = IntegratorOptions(rtol=self.rtol)
        copts = ClassifyOptions(depth=self.depth, spacings_A=self.spacings_A, poles_C=self.poles_C)
        return np.array([classify(InitialData(a, b), self.depth, opts, copts).tag for a, b in X])


def _as_trajectory(X, y):
    X = check_array(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != len(X):
        raise ValueError("X and y have different lengths")
    t = X[:, 0]
    if X.shape[1] >= 2:
        dy = X[:, 1]
    else:
        order = np.argsort(t)
        dy = np.empty_like(y)
        dy[order] = CubicSpline(t[order], y[order])(t[order], 1)
    return Trajectory(t, y, dy, [])


class OscillationRegressor(RegressorMixin, BaseEstimator):
    """Fits (d, theta) of the oscillating asymptotics to samples y(t).

    X holds t in its first column and, optionally, y'(t) in the second
    (otherwise a spline derivative is used to locate extrema). ``predict``
    evaluates the fitted leading-order model.
    """

    def __init__(self, window=None):
        self.window = window

    def fit(self, X, y):
        traj = _as_trajectory(X, y)
        window = self.window if self.window is not None else (float(traj.t.min()), float(traj.t.max()))
        rep = fit_oscillation(traj, window)
        self.d_, self.theta_ = rep.params.d, rep.params.theta
        self.rms_ = rep.rms
        self.n_features_in_ = check_array(X).shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "d_")
        t = check_array(X, dtype=float)[:, 0]
        return oscillation_model(t, d=self.d_, theta=self.theta_)


class PoleTrainRegressor(BaseEstimator):
    """Fits (rho, sigma) of the pole-train asymptotics to pole locations.

    X is a column of pole times; ``transform`` returns the model phase,
    which is close to a multiple of pi at every pole.
    """

    def __init__(self, t_max=-10.0, min_poles=8):
        self.t_max = t_max
        self.min_poles = min_poles

    def fit(self, X, y=None):
        tp = check_array(X, dtype=float, ensure_min_samples=1)[:, 0]
        rep = fit_pole_train(tp, self.t_max, self.min_poles)
        self.rho_, self.sigma_ = rep.params.rho, rep.params.sigma
        self.rms_ = rep.rms
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "rho_")
        t = check_array(X, dtype=float)[:, 0]
        return pole_phase_model(t, rho=self.rho_, sigma=self.sigma_)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)
