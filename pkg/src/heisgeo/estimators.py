"""scikit-learn style wrappers around the functional API.

Points are rows ``[x_1..x_n, y_1..y_n, t]`` of a 2-D array; planar curves are
passed as lists of :class:`~heisgeo.curves.PlanarCurve` or as 3-D arrays of
shape (n_curves, M + 1, 2n).
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import HeisPoint
from .curves import PlanarCurve, horizontal_lift
from .fourier import EQUALITY_RTOL, HIGH_HARMONIC_RTOL, isoperimetric_report
from .geodesic import distance, distance_from_origin
from .oracle import DEFAULT_K, DEFAULT_QUADRATURE, DEFAULT_STARTS, VariationalProblem, minimize_length


def _points(X):
    X = check_array(X, dtype=float)
    if X.shape[1] < 3 or X.shape[1] % 2 == 0:
        raise ValueError(f"point rows need 2n+1 columns, got {X.shape[1]}")
    return [HeisPoint.from_vector(row) for row in X]


def _curves(X):
    if isinstance(X, PlanarCurve):
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [PlanarCurve(c) for c in X]
    return [c if isinstance(c, PlanarCurve) else PlanarCurve(c) for c in X]


def cc_metric(u, v):
    """``d_cc`` between two flat point vectors, usable as a sklearn ``metric``."""
    return distance(HeisPoint.from_vector(u), HeisPoint.from_vector(v))


class CCDistance(TransformerMixin, BaseEstimator):
    """Map points to their CC distances from a fitted set of reference points."""

    def fit(self, X, y=None):
        self.references_ = _points(X)
        self.n_features_in_ = 2 * self.references_[0].n + 1
        return self

    def transform(self, X):
        check_is_fitted(self, "references_")
        pts = _points(X)
        if len(pts[0].as_vector()) != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {len(pts[0].as_vector())}")
        return np.array([[distance(p, r) for r in self.references_] for p in pts])


class HorizontalLift(TransformerMixin, BaseEstimator):
    """Lift planar curves to H^n; ``transform`` returns a list of HorizontalCurve."""

    def __init__(self, t0=0.0):
        self.t0 = t0

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [horizontal_lift(c, self.t0) for c in _curves(X)]


class IsoperimetricAnalyzer(TransformerMixin, BaseEstimator):
    """Rows ``[L^2, D, defect, relative_defect, equality]`` with equality in {-1, 0, 1}."""

    def __init__(self, K=None, rtol=EQUALITY_RTOL, harmonic_rtol=HIGH_HARMONIC_RTOL):
        self.K = K
        self.rtol = rtol
        self.harmonic_rtol = harmonic_rtol

    def fit(self, X=None, y=None):
        return self

    def reports(self, X):
        return [
            isoperimetric_report(c, K=self.K, rtol=self.rtol, harmonic_rtol=self.harmonic_rtol)
            for c in _curves(X)
        ]

    def transform(self, X):
        code = {"none": 0, "pos": 1, "neg": -1}
        return np.array(
            [
                [r.L2_parseval, r.D, r.defect, r.relative_defect, code[r.equality_case.value]]
                for r in self.reports(X)
            ]
        )


class VariationalOracle(BaseEstimator):
    """Brute-force shortest lengths from the origin; ``predict`` returns one per row.

    ``score`` is the negative mean relative gap to the closed-form distance.
    """

    def __init__(self, K=DEFAULT_K, M=DEFAULT_QUADRATURE, n_starts=DEFAULT_STARTS, seed=0):
        self.K = K
        self.M = M
        self.n_starts = n_starts
        self.seed = seed

    def fit(self, X=None, y=None):
        return self

    def predict(self, X):
        out = []
        for q in _points(X):
            prob = VariationalProblem(q.n, q, K=self.K, M=self.M, n_starts=self.n_starts)
            out.append(minimize_length(prob, seed=self.seed).best_length)
        return np.array(out)

    def score(self, X, y=None):
        lengths = self.predict(X)
        exact = np.array([distance_from_origin(q) for q in _points(X)])
        return -float(np.mean(np.abs(lengths - exact) / np.maximum(exact, 1e-300)))
