"""Closed-form geodesics and the Carnot-Caratheodory distance in H^n.

Geodesics from the origin to ``(0, +-T)`` are

    Gamma(s) = ((1 - exp(-+ 2 pi i s)) w, +-T (s - sin(2 pi s) / 2 pi)),

with ``w = A + iB`` and ``4 pi |w|^2 = T``. Every point off the t-axis and off
the plane ``t = 0`` sits on exactly one of them, at the parameter ``s0`` solving
``H(s0) = h / |z|^2`` where

    H(s) = (2 pi s - sin 2 pi s) / (1 - cos 2 pi s).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DimensionMismatchError, as_finite_vector, check_same_n, frozen
from .core import HeisPoint, group_mul, inverse

TWO_PI = 2.0 * math.pi
SERIES_CUTOFF = 0.1
_SERIES_TOL = 1e-18
_SERIES_MAX_TERMS = 40
_EPS = np.finfo(float).eps


class DegenerateGeodesicError(ValueError):
    pass


# H and its derivative.


def _series_terms(u):
    """Numerator and denominator power series of H after dividing by u^2.

    Returns ``P, Q, dP/du, dQ/du`` with
    ``P = u/3! - u^3/5! + ...`` and ``Q = 1/2! - u^2/4! + ...``.
    """
    u2 = u * u
    P = np.zeros_like(u)
    Q = np.zeros_like(u)
    dP = np.zeros_like(u)
    dQ = np.zeros_like(u)
    power = np.ones_like(u)  # u^(2m)
    odd = np.zeros_like(u)  # u^(2m-1)
    fact = 2.0  # (2m + 2)!
    for m in range(_SERIES_MAX_TERMS):
        sign = -1.0 if m % 2 else 1.0
        q_term = sign * power / fact
        p_term = sign * power * u / (fact * (2 * m + 3))
        Q += q_term
        P += p_term
        dP += sign * (2 * m + 1) * power / (fact * (2 * m + 3))
        dQ += sign * 2 * m * odd / fact
        if np.max(np.abs(q_term)) < _SERIES_TOL and np.max(np.abs(p_term)) < _SERIES_TOL:
            break
        odd = power * u
        power = power * u2
        fact *= (2 * m + 3) * (2 * m + 4)
    return P, Q, dP, dQ


def _H_nonneg(s):
    """H and H' on ``0 <= s < 1`` (arrays)."""
    H = np.empty_like(s)
    dH = np.empty_like(s)

    small = s <= SERIES_CUTOFF
    if np.any(small):
        u = TWO_PI * s[small]
        P, Q, dP, dQ = _series_terms(u)
        H[small] = P / Q
        dH[small] = TWO_PI * (dP * Q - P * dQ) / (Q * Q)

    mid = (~small) & (s <= 0.5)
    if np.any(mid):
        sm = s[mid]
        u = TWO_PI * sm
        sin_half = np.sin(math.pi * sm)
        H[mid] = (u - np.sin(u)) / (2.0 * sin_half**2)
        cot = np.cos(math.pi * sm) / sin_half
        dH[mid] = TWO_PI * (1.0 - H[mid] * cot)

    high = s > 0.5
    if np.any(high):
        # Reflect about s = 1 so the vanishing factors are computed from 1 - s.
        sh = s[high]
        delta = 1.0 - sh
        sin_half = np.sin(math.pi * delta)
        H[high] = (TWO_PI * sh + np.sin(TWO_PI * delta)) / (2.0 * sin_half**2)
        cot = -np.cos(math.pi * delta) / sin_half
        dH[high] = TWO_PI * (1.0 - H[high] * cot)
    return H, dH


def _check_open_interval(s):
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)) or np.any(np.abs(s) >= 1.0):
        raise ValueError("H is defined on the open interval (-1, 1)")
    return s


def H_eval(s):
    """Evaluate ``H(s)`` for ``|s| < 1``; odd and strictly increasing."""
    s = _check_open_interval(s)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    H, _ = _H_nonneg(np.abs(s))
    H = np.sign(s) * H
    return float(H[0]) if scalar else H


def H_derivative(s):
    s = _check_open_interval(s)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    _, dH = _H_nonneg(np.abs(s))
    return float(dH[0]) if scalar else dH


def _H_scalar(s):
    """Scalar twin of :func:`_H_nonneg` on plain floats (hot path of the inverse)."""
    if s <= SERIES_CUTOFF:
        u = TWO_PI * s
        u2 = u * u
        P = Q = dP = dQ = 0.0
        power, odd, fact = 1.0, 0.0, 2.0
        for m in range(_SERIES_MAX_TERMS):
            sign = -1.0 if m % 2 else 1.0
            q_term = sign * power / fact
            p_term = sign * power * u / (fact * (2 * m + 3))
            Q += q_term
            P += p_term
            dP += sign * (2 * m + 1) * power / (fact * (2 * m + 3))
            dQ += sign * 2 * m * odd / fact
            if abs(q_term) < _SERIES_TOL and abs(p_term) < _SERIES_TOL:
                break
            odd = power * u
            power *= u2
            fact *= (2 * m + 3) * (2 * m + 4)
        return P / Q, TWO_PI * (dP * Q - P * dQ) / (Q * Q)
    if s <= 0.5:
        u = TWO_PI * s
        sin_half = math.sin(math.pi * s)
        H = (u - math.sin(u)) / (2.0 * sin_half * sin_half)
        cot = math.cos(math.pi * s) / sin_half
    else:
        delta = 1.0 - s
        sin_half = math.sin(math.pi * delta)
        H = (TWO_PI * s + math.sin(TWO_PI * delta)) / (2.0 * sin_half * sin_half)
        cot = -math.cos(math.pi * delta) / sin_half
    return H, TWO_PI * (1.0 - H * cot)


_S_MAX = math.nextafter(1.0, 0.0)


def _initial_guess(a):
    if a <= math.pi / 2:
        return min(3.0 * a / TWO_PI, 0.5)
    return min(max(1.0 - 1.0 / math.sqrt(math.pi * a), 0.5), _S_MAX)


def H_inverse(v, max_iter=200):
    """Solve ``H(s) = v`` for ``s`` in (-1, 1).

    Newton iterations are kept inside a monotone bracket and replaced by a
    bisection step whenever they would leave it. Values beyond ``H`` at the
    largest double below 1 saturate there.
    """
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("H_inverse needs a finite value")
    if v == 0.0:
        return 0.0
    a = abs(v)
    lo, hi = 0.0, _S_MAX
    H_hi, _ = _H_scalar(hi)
    if a >= H_hi:
        return math.copysign(hi, v)
    s = _initial_guess(a)
    for _ in range(max_iter):
        H, dH = _H_scalar(s)
        f = H - a
        if f == 0.0:
            break
        if f > 0.0:
            hi = s
        else:
            lo = s
        s_new = s - f / dH
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 2.0 * _EPS * s_new or hi - lo <= 2.0 * _EPS * hi:
            s = s_new
            break
        s = s_new
    return math.copysign(_polish(s, a), v)


def _polish(s, a, max_steps=64):
    # Walk single ulps while the residual shrinks; Newton stalls a few ulps
    # short where H is steep.
    f = abs(_H_scalar(s)[0] - a)
    for _ in range(max_steps):
        toward = 1.0 if _H_scalar(s)[0] < a else 0.0
        cand = math.nextafter(s, toward)
        if not 0.0 < cand < 1.0:
            break
        f_cand = abs(_H_scalar(cand)[0] - a)
        if f_cand >= f:
            break
        s, f = cand, f_cand
    return s


def _H_reflected(d):
    """``H(1 - d)`` and its derivative in ``d`` for ``0 < d <= 1/2``."""
    sin_half = math.sin(math.pi * d)
    H = (TWO_PI * (1.0 - d) + math.sin(TWO_PI * d)) / (2.0 * sin_half * sin_half)
    cot = math.cos(math.pi * d) / sin_half
    return H, -TWO_PI * (1.0 + H * cot)


def _complement_inverse(a, max_iter=100):
    """``d = 1 - H^{-1}(a)`` for ``a > pi/2``, solved directly in ``d``.

    Rounding ``s`` near 1 would cost ``eps / d`` relative accuracy in ``d``,
    which every trigonometric form of the distance inherits. Newton runs on
    ``H^{-1/2}``, which is nearly linear in ``d`` (``H ~ 1 / (pi d^2)``).
    """
    lo, hi = 0.0, 0.5
    d = min(1.0 / math.sqrt(math.pi * a), 0.5)
    target = 1.0 / math.sqrt(a)
    for _ in range(max_iter):
        H, dH = _H_reflected(d)
        f = 1.0 / math.sqrt(H) - target
        if f == 0.0:
            break
        if f > 0.0:
            hi = d
        else:
            lo = d
        d_new = d - f / (-0.5 * dH / H**1.5)
        if not lo < d_new < hi:
            d_new = 0.5 * (lo + hi)
        if abs(d_new - d) <= 2.0 * _EPS * d_new:
            d = d_new
            break
        d = d_new
    f = abs(_H_reflected(d)[0] - a)
    for _ in range(64):
        cand = math.nextafter(d, 0.0 if _H_reflected(d)[0] < a else 1.0)
        f_cand = abs(_H_reflected(cand)[0] - a) if cand > 0.0 else math.inf
        if f_cand >= f:
            break
        d, f = cand, f_cand
    return d


# Points and parameters.


def _cut(z, h):
    """Signed cut parameter ``s0`` and ``d = 1 - |s0|``, the latter accurate near 1."""
    r2 = float(np.sum(np.abs(np.asarray(z)) ** 2))
    if r2 == 0.0:
        raise DegenerateGeodesicError("cut parameter needs z != 0")
    v = h / r2
    if abs(v) <= math.pi / 2:
        s0 = H_inverse(v)
        return s0, 1.0 - abs(s0)
    d = _complement_inverse(abs(v))
    return math.copysign(1.0 - d, v), d


def _sin_cos_pi_cut(s0, d):
    """``sin(pi s0), cos(pi s0)`` with the reflected angle ``d`` used past 1/2."""
    if d < 0.5:
        sin, cos = math.sin(math.pi * d), -math.cos(math.pi * d)
    else:
        a = abs(s0)
        sin, cos = math.sin(math.pi * a), math.cos(math.pi * a)
    return math.copysign(sin, s0), cos


def cut_parameter(z, h):
    """Signed ``s0 = H^{-1}(h / |z|^2)`` for ``z != 0``."""
    return _cut(z, h)[0]


def distance_trig_form(z, h):
    """``h sin(pi s0) / |z| + |z| cos(pi s0)`` for ``z != 0``."""
    r = float(np.linalg.norm(np.asarray(z)))
    s0, d = _cut(z, h)
    sin, cos = _sin_cos_pi_cut(s0, d)
    return h * sin / r + r * cos


def distance_arc_form(z, h):
    """Length ``2 pi |s0| |z| / sqrt(2 (1 - cos 2 pi s0))`` of the cut arc.

    The radical is evaluated as ``2 |sin(pi s0)|``; at ``s0 = 0`` the limit ``|z|``.
    """
    r = float(np.linalg.norm(np.asarray(z)))
    s0, d = _cut(z, h)
    if s0 == 0.0:
        return r
    sin, _ = _sin_cos_pi_cut(s0, d)
    return TWO_PI * abs(s0) * r / (2.0 * abs(sin))


# Beyond this ratio h/|z|^2 the cut parameter is within 1e-9 of 1.
CENTER_GUARD = float(_H_nonneg(np.array([1.0 - 1e-9]))[0][0])


def distance_from_origin(q):
    """Carnot-Caratheodory distance ``d_cc(0, q)``."""
    r2 = float(np.sum(q.x**2) + np.sum(q.y**2))
    h = q.t
    if r2 == 0.0 or abs(h) > CENTER_GUARD * r2:
        return math.sqrt(math.pi * abs(h))
    if h == 0.0:
        # hypot is correctly rounded; sqrt of the summed squares is not.
        return math.hypot(*q.x, *q.y)
    return distance_trig_form(q.z, h)


def distance(p, q):
    """``d_cc(p, q) = d_0(q^{-1} * p)``."""
    check_same_n(p.n, q.n)
    return distance_from_origin(group_mul(inverse(q), p))


# Geodesic synthesis.


@dataclass(frozen=True, eq=False)
class GeodesicParams:
    """Parameters ``(A, B, sign, T, s_end)`` of a (possibly cut) geodesic.

    The full geodesic joins the origin to ``(0, sign * T)``; the cut one stops
    at parameter ``s_end``.
    """

    A: np.ndarray
    B: np.ndarray
    sign: int
    T: float
    s_end: float = 1.0

    def __post_init__(self):
        A = as_finite_vector(self.A, "A")
        B = as_finite_vector(self.B, "B")
        if A.shape != B.shape:
            raise ValueError("A and B must have equal length")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        T = float(self.T)
        if not T > 0.0:
            raise ValueError("T must be positive")
        if not abs(4 * math.pi * (np.sum(A**2) + np.sum(B**2)) - T) <= 1e-10 * T:
            raise ValueError("parameters violate 4 pi |A + iB|^2 = T")
        if not 0.0 < float(self.s_end) <= 1.0:
            raise ValueError("s_end must lie in (0, 1]")
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "B", frozen(B))
        object.__setattr__(self, "sign", int(self.sign))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "s_end", float(self.s_end))

    @classmethod
    def from_vector(cls, w, sign, s_end=1.0):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        T = 4 * math.pi * float(np.sum(np.abs(w) ** 2))
        return cls(w.real, w.imag, sign, T, s_end)

    @property
    def n(self):
        return self.A.size

    @property
    def w(self):
        return self.A + 1j * self.B

    @property
    def speed(self):
        return math.sqrt(math.pi * self.T)

    def to_json(self):
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "sign": self.sign,
            "T": self.T,
            "s_end": self.s_end,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["A"], obj["B"], int(obj["sign"]), obj["T"], obj.get("s_end", 1.0))


@dataclass(frozen=True, eq=False)
class Geodesic:
    """A geodesic from the origin, evaluable on its own parameter range.

    ``kind`` is ``"arc"`` (described by ``params``), ``"segment"`` (the line
    ``s -> s q`` for targets with ``t = 0``) or ``"constant"``.
    """

    kind: str
    target: HeisPoint
    params: GeodesicParams = None

    @property
    def n(self):
        return self.target.n

    @property
    def s_end(self):
        return self.params.s_end if self.kind == "arc" else 1.0

    @property
    def length(self):
        if self.kind == "arc":
            return self.params.s_end * self.params.speed
        if self.kind == "segment":
            return float(np.linalg.norm(self.target.z))
        return 0.0

    def evaluate(self, s):
        """Points at parameters ``s`` in ``[0, s_end]``, shape (len(s), 2n + 1)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.kind == "arc":
            p = self.params
            u = TWO_PI * s
            z = (1.0 - np.exp(-1j * p.sign * u))[:, None] * p.w[None, :]
            t = p.sign * p.T * (s - np.sin(u) / TWO_PI)
            return np.hstack([z.real, z.imag, t[:, None]])
        return s[:, None] * self.target.as_vector()[None, :]

    def sample(self, samples=2048):
        """Sample at ``s_end * k / M`` as a :class:`HorizontalCurve`."""
        from .curves import HorizontalCurve, PlanarCurve

        pts = self.evaluate(self.s_end * np.linspace(0.0, 1.0, samples + 1))
        n = self.n
        closed = self.kind == "arc" and self.s_end == 1.0
        if closed:
            pts[-1, : 2 * n] = 0.0
        return HorizontalCurve(PlanarCurve(pts[:, : 2 * n], closed=closed or None), pts[:, -1])

    def metadata(self):
        meta = {"kind": self.kind, "target": self.target.to_json()}
        if self.params is not None:
            meta.update(self.params.to_json())
        return meta


def geodesic_to_axis(A, B, sign=1):
    """Full geodesic from the origin to ``(0, sign * 4 pi |A + iB|^2)``."""
    w = np.atleast_1d(np.asarray(A, dtype=float)) + 1j * np.atleast_1d(np.asarray(B, dtype=float))
    if not np.any(w != 0):
        raise DegenerateGeodesicError("A + iB must be non-zero")
    params = GeodesicParams.from_vector(w, sign)
    n = params.n
    return Geodesic("arc", HeisPoint(np.zeros(n), np.zeros(n), sign * params.T), params)


def geodesic_to_point(q, direction=None):
    """A shortest geodesic from the origin to ``q``.

    Off the axis and off ``t = 0`` the geodesic is unique. On the t-axis the
    geodesics form a unitary family; ``direction`` (a non-zero vector in C^n)
    picks a member and defaults to ``e_1``.
    """
    n = q.n
    r2 = float(np.sum(q.x**2) + np.sum(q.y**2))
    if r2 == 0.0 and q.t == 0.0:
        return Geodesic("constant", q)
    if q.t == 0.0:
        return Geodesic("segment", q)
    sign = 1 if q.t > 0 else -1
    if r2 == 0.0:
        T = abs(q.t)
        if direction is None:
            direction = np.eye(n)[0]
        u = np.atleast_1d(np.asarray(direction, dtype=complex))
        check_same_n(u.size, n)
        if not np.any(u != 0):
            raise DegenerateGeodesicError("direction must be non-zero")
        w = math.sqrt(T / (4 * math.pi)) * u / np.linalg.norm(u)
        params = GeodesicParams(w.real, w.imag, sign, T)
        return Geodesic("arc", q, params)
    s0, d = _cut(q.z, q.t)
    s0 = abs(s0)
    # 1 - e^{-i phi} = 2i sin(phi/2) e^{-i phi/2}, with sin(pi s0) taken from d.
    sin, _ = _sin_cos_pi_cut(s0, d)
    w = q.z / (2j * sign * sin * np.exp(-1j * sign * math.pi * s0))
    T = 4 * math.pi * float(np.sum(np.abs(w) ** 2))
    return Geodesic("arc", q, GeodesicParams(w.real, w.imag, sign, T, s0))


# Unitary alignment of geodesics sharing an endpoint on the t-axis.


def unitary_frame(z):
    """Unitary matrix whose first column is ``z / |z|``.

    The remaining columns come from Gram-Schmidt (two passes) over the standard
    basis, skipping the basis vector most aligned with ``z``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    norm = np.linalg.norm(z)
    if norm == 0.0:
        raise DegenerateGeodesicError("cannot build a frame around the zero vector")
    n = z.size
    skip = int(np.argmax(np.abs(z)))
    columns = [z / norm]
    for k in range(n):
        if k == skip:
            continue
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for c in columns:
                v = v - np.vdot(c, v) * c
        columns.append(v / np.linalg.norm(v))
    return np.column_stack(columns)


def _params_of(g):
    return g.params if isinstance(g, Geodesic) else g


def align_geodesics(g1, g2, rtol=1e-10):
    """Unitary ``U`` with ``(z, t) -> (U z, t)`` carrying geodesic ``g1`` onto ``g2``."""
    p1, p2 = _params_of(g1), _params_of(g2)
    if p1 is None or p2 is None:
        raise DegenerateGeodesicError("alignment needs arc geodesics")
    if p1.n != p2.n:
        raise DimensionMismatchError(f"dimension mismatch: n={p1.n} vs n={p2.n}")
    if p1.sign != p2.sign or abs(p1.T - p2.T) > rtol * max(p1.T, p2.T):
        raise ValueError("geodesics must share sign and T (the same endpoint on the t-axis)")
    return unitary_frame(p2.w) @ unitary_frame(p1.w).conj().T


def apply_unitary(U, points):
    """Apply ``(z, t) -> (U z, t)`` to rows in the flat point layout."""
    points = np.atleast_2d(points)
    n = U.shape[0]
    z = points[:, :n] + 1j * points[:, n : 2 * n]
    mapped = z @ U.T
    return np.hstack([mapped.real, mapped.imag, points[:, 2 * n :]])


def unitary_to_json(U):
    flat = np.asarray(U).flatten(order="F")
    return {"n": U.shape[0], "order": "column-major", "re": flat.real.tolist(), "im": flat.imag.tolist()}


def unitary_from_json(obj):
    n = int(obj["n"])
    flat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return flat.reshape((n, n), order="F")
