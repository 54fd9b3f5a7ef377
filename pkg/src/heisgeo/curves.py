"""Sampled planar curves in R^2n, their horizontal lifts, and curve lengths.

A planar curve is stored as ``M + 1`` samples at the uniform parameters
``s_k = k / M``. Each row is ``(x_1..x_n, y_1..y_n)``. Horizontal lifts add
the height column obtained by integrating ``dt = 2 sum_j (y_j dx_j - x_j dy_j)``
exactly along the sampled polyline.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from ._validation import as_finite_matrix, as_finite_vector, check_even_width, frozen

DEFAULT_SAMPLES = 2048
CLOSED_RTOL = 1e-9
_SPEED_RTOL = 1e-12
_MAX_NEWTON_STEPS = 30


class CurveNotClosedError(ValueError):
    pass


class ZeroLengthCurveError(ValueError):
    pass


def _polyline_length(samples):
    return float(np.sum(np.linalg.norm(np.diff(samples, axis=0), axis=1)))


class PlanarCurve:
    """Uniformly sampled curve ``gamma: [0, 1] -> R^2n``.

    Parameters
    ----------
    samples : array_like, shape (M + 1, 2n)
        Rows ``(x_1..x_n, y_1..y_n)`` at ``s_k = k / M``.
    closed : bool or None
        ``True`` demands ``gamma(0) == gamma(1)`` within ``1e-9 * (1 + length)``;
        ``None`` infers the flag from that same test.
    """

    def __init__(self, samples, closed=None):
        samples = as_finite_matrix(samples, "samples", min_rows=3)
        self._n = check_even_width(samples.shape[1])
        self._samples = frozen(samples)
        gap = float(np.linalg.norm(samples[-1] - samples[0]))
        closes = gap <= CLOSED_RTOL * (1.0 + _polyline_length(samples))
        if closed is None:
            closed = closes
        elif closed and not closes:
            raise CurveNotClosedError(f"curve marked closed but endpoints differ by {gap:.3e}")
        self._closed = bool(closed)

    @classmethod
    def from_xy(cls, x, y, closed=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim == 1:
            x, y = x[:, None], y[:, None]
        return cls(np.hstack([x, y]), closed=closed)

    @classmethod
    def from_function(cls, func, samples=DEFAULT_SAMPLES, closed=None):
        """Sample ``func(s) -> (len(s), 2n)`` on the uniform grid."""
        s = np.linspace(0.0, 1.0, samples + 1)
        return cls(func(s), closed=closed)

    @property
    def samples(self):
        return self._samples

    @property
    def n(self):
        return self._n

    @property
    def M(self):
        return self._samples.shape[0] - 1

    @property
    def closed(self):
        return self._closed

    @property
    def s(self):
        return np.linspace(0.0, 1.0, self.M + 1)

    @property
    def x(self):
        return self._samples[:, : self._n]

    @property
    def y(self):
        return self._samples[:, self._n :]

    @property
    def z(self):
        return self.x + 1j * self.y

    def reversed(self):
        return PlanarCurve(self._samples[::-1], closed=self._closed)

    def __len__(self):
        return self._samples.shape[0]

    def __repr__(self):
        return f"PlanarCurve(n={self.n}, M={self.M}, closed={self.closed})"


def _panel_increments(base):
    # Exact integral of 2 sum_j (y dx - x dy) along each polyline panel.
    x, y = base.x, base.y
    dx, dy = np.diff(x, axis=0), np.diff(y, axis=0)
    xm, ym = 0.5 * (x[1:] + x[:-1]), 0.5 * (y[1:] + y[:-1])
    return 2.0 * np.sum(dx * ym - xm * dy, axis=1)


@dataclass(frozen=True, eq=False)
class HorizontalCurve:
    """Sampled curve ``Gamma = (gamma, t)`` in H^n.

    ``horizontality_residual`` is the largest per-panel violation of the lift
    constraint. Passing ``max_residual`` rejects curves above that bound.
    """

    base: PlanarCurve
    t: np.ndarray
    max_residual: float = None

    def __post_init__(self):
        t = as_finite_vector(self.t, "t")
        if t.size != len(self.base):
            raise ValueError(f"t has {t.size} samples, base curve has {len(self.base)}")
        object.__setattr__(self, "t", frozen(t))
        if self.max_residual is not None and self.horizontality_residual > self.max_residual:
            raise ValueError(
                f"curve is not horizontal: residual {self.horizontality_residual:.3e}"
                f" > {self.max_residual:.3e}"
            )

    @property
    def horizontality_residual(self):
        return float(np.max(np.abs(np.diff(self.t) - _panel_increments(self.base))))

    @property
    def n(self):
        return self.base.n

    @property
    def M(self):
        return self.base.M

    def point(self, k):
        from .core import HeisPoint

        return HeisPoint(self.base.x[k], self.base.y[k], self.t[k])

    def points(self):
        """Array of shape (M + 1, 2n + 1) in the flat point layout."""
        return np.hstack([self.base.samples, self.t[:, None]])

    def __repr__(self):
        return (
            f"HorizontalCurve(n={self.n}, M={self.M},"
            f" residual={self.horizontality_residual:.2e})"
        )


def horizontal_lift(curve, t0=0.0):
    """Lift ``curve`` to the horizontal curve starting at height ``t0``."""
    t0 = float(t0)
    if not np.isfinite(t0):
        raise ValueError("t0 must be finite")
    t = t0 + np.concatenate([[0.0], np.cumsum(_panel_increments(curve))])
    return HorizontalCurve(curve, t)


def length_E(curve):
    """Euclidean polyline length of a planar curve."""
    return _polyline_length(curve.samples)


def length_H(curve):
    """Horizontal length of a lifted curve, i.e. the length of its projection."""
    return length_E(curve.base)


def length_cc_partition(curve, partitions, dist=None):
    """Sum of CC distances over a uniform partition of ``curve``.

    Partition nodes are snapped to the nearest sample index, so at most ``M``
    pieces are used.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    if dist is None:
        from .geodesic import distance as dist
    idx = np.unique(np.rint(np.linspace(0, curve.M, partitions + 1)).astype(int))
    pts = [curve.point(k) for k in idx]
    return float(sum(dist(p, q) for p, q in zip(pts[:-1], pts[1:])))


def _chords(pts):
    return np.linalg.norm(np.diff(pts, axis=0), axis=1)


def _chord_residual(spline, sigma):
    diff = np.diff(spline(sigma), axis=0)
    chords = np.linalg.norm(diff, axis=1)
    return diff, chords, chords - np.mean(chords)


def _fixed_point_step(sigma, chords):
    cum = np.concatenate([[0.0], np.cumsum(chords)])
    return np.interp(np.linspace(0.0, cum[-1], sigma.size), cum, sigma)


def _equalize_chords(spline, sigma, rtol, max_steps):
    # Damped Newton on  |P(sigma_{k+1}) - P(sigma_k)| = c  for the interior
    # sigma and c, with sigma_0, sigma_M fixed. The Jacobian is bidiagonal
    # plus a column of -1 for c, so each step is one sparse solve. Steps must
    # keep sigma increasing and shrink the residual; otherwise fall back to a
    # cumulative-chord inversion step.
    dspline = spline.derivative()
    m = sigma.size - 1
    rows = np.arange(m)
    diff, chords, res = _chord_residual(spline, sigma)
    for _ in range(max_steps):
        c = float(np.mean(chords))
        if np.ptp(chords) <= rtol * c:
            break
        unit = diff / chords[:, None]
        tang = dspline(sigma)
        lead = np.einsum("ij,ij->i", unit, tang[1:])
        trail = -np.einsum("ij,ij->i", unit, tang[:-1])
        J = sparse.lil_matrix((m, m))
        J[rows[:-1], rows[:-1]] = lead[:-1]
        J[rows[1:], rows[:-1]] = trail[1:]
        J[:, m - 1] = -1.0
        step = spsolve(J.tocsc(), -res)
        norm = np.linalg.norm(res)
        scale, accepted = 1.0, None
        while scale > 1e-4:
            trial = sigma.copy()
            trial[1:-1] += scale * step[:-1]
            if np.all(np.diff(trial) > 0.0):
                t_diff, t_chords, t_res = _chord_residual(spline, trial)
                if np.linalg.norm(t_res) < norm:
                    accepted = trial
                    break
            scale *= 0.5
        if accepted is None:
            accepted = _fixed_point_step(sigma, chords)
            t_diff, t_chords, t_res = _chord_residual(spline, accepted)
        sigma, diff, chords, res = accepted, t_diff, t_chords, t_res
    return sigma


def reparametrize_constant_speed(curve, samples=None):
    """Resample ``curve`` so consecutive samples are equally far apart.

    The samples are interpolated by a cubic spline in cumulative chord length
    (periodic for closed curves). One cumulative-chord inversion with linear
    interpolation gives near-uniform points on the spline, and a Newton solve
    then equalizes the chords to ``1e-12`` relative. Unlike resampling the
    polyline itself this does not cut corners, so the length is kept to the
    accuracy the sample count allows.
    """
    m_out = curve.M if samples is None else int(samples)
    if m_out < 2:
        raise ValueError("need at least 2 output panels")
    pts = np.array(curve.samples)
    u = np.concatenate([[0.0], np.cumsum(_chords(pts))])
    if u[-1] <= 0.0:
        raise ZeroLengthCurveError("cannot reparametrize a zero-length curve")
    keep = np.concatenate([[True], np.diff(u) > 0.0])
    if curve.closed:
        pts[-1] = pts[0]
        keep[-1] = True
    spline = CubicSpline(u[keep], pts[keep], bc_type="periodic" if curve.closed else "not-a-knot")
    sigma = np.linspace(0.0, u[-1], m_out + 1)
    chords = _chords(spline(sigma))
    cum = np.concatenate([[0.0], np.cumsum(chords)])
    sigma = np.interp(np.linspace(0.0, cum[-1], m_out + 1), cum, sigma)
    sigma = _equalize_chords(spline, sigma, _SPEED_RTOL, _MAX_NEWTON_STEPS)
    out = spline(sigma)
    # Pin the endpoints so closed curves stay exactly closed.
    out[0], out[-1] = pts[0], pts[-1]
    return PlanarCurve(out, closed=curve.closed)


def chord_speeds(curve):
    """Chordwise speeds ``M * |gamma(s_{k+1}) - gamma(s_k)|``."""
    return curve.M * np.linalg.norm(np.diff(curve.samples, axis=0), axis=1)


def signed_areas(curve):
    """Shoelace signed areas ``D_j`` of the projections to each x_j y_j plane."""
    if not curve.closed:
        raise CurveNotClosedError("signed areas need a closed curve")
    x, y = curve.x, curve.y
    return 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1], axis=0)
