"""Heisenberg group algebra on C^n x R.

Points are stored as real coordinates ``(x_1..x_n, y_1..y_n, t)`` with
``z_j = x_j + i y_j``. The group law is

    (z, t) * (z', t') = (z + z', t + t' + 2 Im sum_j z_j conj(z'_j)).
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_finite_vector, check_same_n, frozen

DEFAULT_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class HeisPoint:
    """A point ``(z, t)`` of the Heisenberg group H^n."""

    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        x = as_finite_vector(self.x, "x")
        y = as_finite_vector(self.y, "y")
        if x.shape != y.shape:
            raise ValueError(f"x and y must have equal length, got {x.size} and {y.size}")
        t = float(self.t)
        if not np.isfinite(t):
            raise ValueError("t must be finite")
        object.__setattr__(self, "x", frozen(x))
        object.__setattr__(self, "y", frozen(y))
        object.__setattr__(self, "t", t)

    @classmethod
    def from_complex(cls, z, t):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(z.real, z.imag, t)

    @classmethod
    def from_vector(cls, v):
        """Build from the flat real layout ``[x_1..x_n, y_1..y_n, t]``."""
        v = as_finite_vector(v, "point")
        if v.size < 3 or v.size % 2 == 0:
            raise ValueError(f"a point vector has 2n+1 entries, got {v.size}")
        n = (v.size - 1) // 2
        return cls(v[:n], v[n:2 * n], v[-1])

    @classmethod
    def origin(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0.0)

    @property
    def n(self):
        return self.x.size

    @property
    def z(self):
        return self.x + 1j * self.y

    def as_vector(self):
        return np.concatenate([self.x, self.y, [self.t]])

    def isclose(self, other, atol=DEFAULT_ATOL):
        check_same_n(self.n, other.n)
        return bool(np.all(np.abs(self.as_vector() - other.as_vector()) <= atol))

    def __eq__(self, other):
        if not isinstance(other, HeisPoint):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.as_vector(), other.as_vector()))

    def __hash__(self):
        return hash(tuple(self.as_vector()))

    def __mul__(self, other):
        if not isinstance(other, HeisPoint):
            return NotImplemented
        return group_mul(self, other)

    def __repr__(self):
        return f"HeisPoint(x={self.x.tolist()}, y={self.y.tolist()}, t={self.t!r})"

    # Serialization forms.

    def to_json(self):
        return {"n": self.n, "x": self.x.tolist(), "y": self.y.tolist(), "t": self.t}

    @classmethod
    def from_json(cls, obj):
        try:
            n = int(obj["n"])
            point = cls(obj["x"], obj["y"], obj["t"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed point JSON: {exc}") from exc
        if point.n != n:
            raise ValueError(f"point JSON declares n={n} but carries {point.n} coordinates")
        return point

    def to_string(self):
        """Compact ``x1,..,xn;y1,..,yn;t`` form (lossless)."""
        xs = ",".join(repr(float(v)) for v in self.x)
        ys = ",".join(repr(float(v)) for v in self.y)
        return f"{xs};{ys};{self.t!r}"

    @classmethod
    def parse(cls, text):
        parts = text.strip().split(";")
        if len(parts) != 3:
            raise ValueError(f"expected 'x1,..,xn;y1,..,yn;t', got {text!r}")
        try:
            xs = [float(v) for v in parts[0].split(",")]
            ys = [float(v) for v in parts[1].split(",")]
            t = float(parts[2])
        except ValueError as exc:
            raise ValueError(f"cannot parse point {text!r}: {exc}") from exc
        if len(xs) != len(ys):
            raise ValueError(f"point {text!r} has {len(xs)} x and {len(ys)} y coordinates")
        return cls(xs, ys, t)


@dataclass(frozen=True, eq=False)
class HorizontalTangent:
    """Horizontal vector ``sum_j a_j X_j + b_j Y_j`` at some base point."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_finite_vector(self.a, "a")
        b = as_finite_vector(self.b, "b")
        if a.shape != b.shape:
            raise ValueError("a and b must have equal length")
        object.__setattr__(self, "a", frozen(a))
        object.__setattr__(self, "b", frozen(b))

    @property
    def n(self):
        return self.a.size

    def norm_h(self):
        return float(np.sqrt(np.sum(self.a**2) + np.sum(self.b**2)))

    def vertical_component(self, p):
        """The d/dt coefficient ``c = 2 sum_j (a_j y_j - b_j x_j)`` at ``p``."""
        check_same_n(self.n, p.n)
        return float(2.0 * np.sum(self.a * p.y - self.b * p.x))

    def norm_e(self, p):
        c = self.vertical_component(p)
        return float(np.sqrt(self.norm_h() ** 2 + c**2))


def _mul_coords(x1, y1, t1, x2, y2, t2):
    # Broadcasting core of the group law; last axis indexes j.
    t = t1 + t2 + 2.0 * np.sum(x2 * y1 - x1 * y2, axis=-1)
    return x1 + x2, y1 + y2, t


def group_mul(p, q):
    check_same_n(p.n, q.n)
    x, y, t = _mul_coords(p.x, p.y, p.t, q.x, q.y, q.t)
    return HeisPoint(x, y, t)


def inverse(p):
    return HeisPoint(-p.x, -p.y, -p.t)


def conjugate_flip(p):
    """The isometry ``(z, t) -> (conj z, -t)``."""
    return HeisPoint(p.x, -p.y, -p.t)


def vertical_shift(p, c):
    return HeisPoint(p.x, p.y, p.t + float(c))


def left_translate(p, curve):
    """Translate a :class:`~heisgeo.curves.HorizontalCurve` pointwise by ``p``."""
    from .curves import HorizontalCurve, PlanarCurve

    base = curve.base
    check_same_n(p.n, base.n)
    x, y, t = _mul_coords(p.x, p.y, p.t, base.x, base.y, curve.t)
    moved = PlanarCurve(np.hstack([x, y]), closed=None)
    return HorizontalCurve(moved, t)
