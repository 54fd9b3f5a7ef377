"""Fourier analysis of closed curves in R^2n and the isoperimetric defect.

For a closed constant-speed curve with coefficients ``x_j(k)``, ``y_j(k)``

    L^2 = sum_jk 4 pi^2 k^2 (|x_j(k)|^2 + |y_j(k)|^2)
    D   = pi sum_jk k * 2 Im(conj(y_j(k)) x_j(k))

and ``L^2 / 4pi^2 - D / pi`` splits into a sum of non-negative terms, which
gives ``L^2 >= 4 pi |D|`` with equality exactly on circles through ``gamma(0)``
traversed at a common angular speed.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .curves import (
    CurveNotClosedError,
    ZeroLengthCurveError,
    reparametrize_constant_speed,
)

EQUALITY_RTOL = 1e-8
HIGH_HARMONIC_RTOL = 1e-8


class EqualityCase(str, Enum):
    NONE = "none"
    POSITIVE = "pos"
    NEGATIVE = "neg"


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Coefficients ``xhat[j, k + K]``, ``yhat[j, k + K]`` for ``|k| <= K``."""

    xhat: np.ndarray
    yhat: np.ndarray

    @property
    def n(self):
        return self.xhat.shape[0]

    @property
    def K(self):
        return (self.xhat.shape[1] - 1) // 2

    @property
    def ks(self):
        return np.arange(-self.K, self.K + 1)

    def x(self, k):
        return self.xhat[:, k + self.K]

    def y(self, k):
        return self.yhat[:, k + self.K]

    def energy_density(self):
        """Per-plane, per-k weights ``|x_j(k)|^2 + |y_j(k)|^2``."""
        return np.abs(self.xhat) ** 2 + np.abs(self.yhat) ** 2

    def high_harmonic_ratio(self):
        """Share of ``sum k^2 (|x|^2 + |y|^2)`` carried by ``|k| >= 2``."""
        w = self.ks**2 * self.energy_density()
        total = float(np.sum(w))
        if total == 0.0:
            return 0.0
        return float(np.sum(w[:, np.abs(self.ks) >= 2]) / total)


def _coefficients(values, K):
    # values: (M, n) periodic samples without the duplicated endpoint.
    M = values.shape[0]
    coeffs = np.fft.fft(values, axis=0) / M
    return coeffs[np.arange(-K, K + 1) % M].T


def analyze(curve, K, reparametrize=True):
    """Fourier coefficients of a closed curve up to harmonic ``K``.

    The curve is first resampled at constant speed unless ``reparametrize``
    is false. ``K`` must stay below the Nyquist index ``M / 2``.
    """
    if not curve.closed:
        raise CurveNotClosedError("Fourier analysis needs a closed curve")
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > curve.M // 2 - 1:
        raise ValueError(f"K={K} exceeds the Nyquist limit {curve.M // 2 - 1} for M={curve.M}")
    if reparametrize:
        curve = reparametrize_constant_speed(curve)
    return FourierSpectrum(_coefficients(curve.x[:-1], K), _coefficients(curve.y[:-1], K))


def parseval_length_sq(spec):
    return float(4 * np.pi**2 * np.sum(spec.ks**2 * spec.energy_density()))


def plane_areas(spec):
    """Signed area of each plane projection from the coefficients."""
    cross = np.imag(np.conj(spec.yhat) * spec.xhat)
    return np.pi * np.sum(spec.ks * 2.0 * cross, axis=1)


def area_sum(spec):
    return float(np.sum(plane_areas(spec)))


def termwise_defect(spec, orientation=+1):
    """Accumulate the non-negative decomposition of ``L^2/4pi^2 - orientation * D/pi``.

    Each term is ``(k^2 - |k|)(|x|^2 + |y|^2) + |k| |y + i*orientation*sgn(k) x|^2``.
    """
    ks = spec.ks
    stretch = (ks**2 - np.abs(ks)) * spec.energy_density()
    twist = np.abs(ks) * np.abs(spec.yhat + 1j * orientation * np.sign(ks) * spec.xhat) ** 2
    return float(np.sum(stretch + twist))


@dataclass(frozen=True, eq=False)
class IsoperimetricReport:
    L2_parseval: float
    D: float
    Dj: np.ndarray
    defect: float
    termwise_defect_sum: float
    equality_case: EqualityCase
    circle_params: dict = None
    relative_defect: float = 0.0
    high_harmonic_ratio: float = 0.0
    orientation_defects: dict = field(default_factory=dict)

    def to_json(self):
        circle = None
        if self.circle_params is not None:
            circle = {key: np.asarray(val).tolist() for key, val in self.circle_params.items()}
        return {
            "L2": self.L2_parseval,
            "D": self.D,
            "Dj": np.asarray(self.Dj).tolist(),
            "defect": self.defect,
            "equality": self.equality_case.value,
            "circle": circle,
        }


def isoperimetric_report(curve, K=None, rtol=EQUALITY_RTOL, harmonic_rtol=HIGH_HARMONIC_RTOL):
    """Measure how far a closed curve is from equality in ``L^2 >= 4 pi |D|``.

    Equality is reported only when both the relative defect and the share of
    energy above the first harmonic fall below their thresholds. In that case
    the circle parameters ``A, B, C, D`` are reconstructed, with ``C + iD``
    the starting point of the curve.
    """
    if not curve.closed:
        raise CurveNotClosedError("isoperimetric report needs a closed curve")
    uniform = reparametrize_constant_speed(curve)
    if K is None:
        K = uniform.M // 2 - 1
    spec = analyze(uniform, K, reparametrize=False)
    L2 = parseval_length_sq(spec)
    if L2 <= 0.0:
        raise ZeroLengthCurveError("curve has zero length")
    Dj = plane_areas(spec)
    D = float(np.sum(Dj))
    scale = L2 / (4 * np.pi**2)
    defect_pos = scale - D / np.pi
    defect_neg = scale + D / np.pi
    orientation = +1 if defect_pos <= defect_neg else -1
    defect = min(defect_pos, defect_neg)
    termwise = termwise_defect(spec, orientation)
    rel = defect / scale
    ratio = spec.high_harmonic_ratio()

    case = EqualityCase.NONE
    circle = None
    if rel <= rtol and ratio <= harmonic_rtol:
        case = EqualityCase.POSITIVE if orientation > 0 else EqualityCase.NEGATIVE
        circle = {
            "A": -np.real(spec.x(-1) + spec.x(1)),
            "B": -np.real(spec.y(-1) + spec.y(1)),
            "C": np.array(uniform.x[0]),
            "D": np.array(uniform.y[0]),
        }
    return IsoperimetricReport(
        L2_parseval=L2,
        D=D,
        Dj=Dj,
        defect=float(defect),
        termwise_defect_sum=termwise,
        equality_case=case,
        circle_params=circle,
        relative_defect=float(rel),
        high_harmonic_ratio=ratio,
        orientation_defects={"pos": float(defect_pos), "neg": float(defect_neg)},
    )


def circle_curve(A, B, C=None, D=None, orientation=+1, samples=2048):
    """Sample the equality-case circle family.

    ``orientation=+1`` gives ``(C+iD) + (1 - e^{2 pi i s})(A+iB)`` (all planes
    positively oriented), ``-1`` the conjugate-exponent family.
    """
    from .curves import PlanarCurve

    A = np.atleast_1d(np.asarray(A, dtype=float))
    B = np.atleast_1d(np.asarray(B, dtype=float))
    C = np.zeros_like(A) if C is None else np.atleast_1d(np.asarray(C, dtype=float))
    D = np.zeros_like(A) if D is None else np.atleast_1d(np.asarray(D, dtype=float))
    s = np.linspace(0.0, 1.0, samples + 1)[:, None]
    u = 2 * np.pi * s
    one_minus_cos = 1 - np.cos(u)
    sin = orientation * np.sin(u)
    x = C + A * one_minus_cos + B * sin
    y = D + B * one_minus_cos - A * sin
    # Exact closure; cos/sin at 2*pi leave ~1e-16 residue.
    x[-1], y[-1] = x[0], y[0]
    return PlanarCurve(np.hstack([x, y]), closed=True)


def random_closed_curve(n, rng, max_harmonic=8, samples=512, decay=4.0):
    """Band-limited closed curve with Gaussian coefficients of variance ``k^-decay``.

    Returns the sampled curve together with the exact coefficient arrays
    ``(cos_coef, sin_coef)`` of shape (max_harmonic, 2n) so callers can evaluate
    exact lengths and areas independently of the sampling.
    """
    from .curves import PlanarCurve

    ks = np.arange(1, max_harmonic + 1)
    std = ks ** (-decay / 2.0)
    cos_coef = rng.standard_normal((max_harmonic, 2 * n)) * std[:, None]
    sin_coef = rng.standard_normal((max_harmonic, 2 * n)) * std[:, None]
    offset = rng.standard_normal(2 * n)
    s = np.linspace(0.0, 1.0, samples + 1)
    phase = 2 * np.pi * np.outer(s, ks)
    pts = offset + np.cos(phase) @ cos_coef + np.sin(phase) @ sin_coef
    pts[-1] = pts[0]
    return PlanarCurve(pts, closed=True), (cos_coef, sin_coef)


def exact_plane_areas(cos_coef, sin_coef):
    """Signed areas of a trigonometric polynomial curve, from its coefficients.

    With ``x = sum a_k cos + b_k sin`` and ``y = sum c_k cos + d_k sin`` the area
    ``1/2 int (x y' - y x')`` is ``pi sum_k k (a_k d_k - b_k c_k)``.
    """
    n = cos_coef.shape[1] // 2
    ks = np.arange(1, cos_coef.shape[0] + 1)[:, None]
    a, c = cos_coef[:, :n], cos_coef[:, n:]
    b, d = sin_coef[:, :n], sin_coef[:, n:]
    return np.pi * np.sum(ks * (a * d - b * c), axis=0)
