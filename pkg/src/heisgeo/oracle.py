"""Brute-force variational oracle for geodesics and the isoperimetric bound.

Curves are truncated trigonometric series whose coefficients are optimized
directly; nothing here knows the closed-form answers. The objective is the
energy ``int |gamma'|^2`` (equal to ``L^2`` at constant speed, larger
otherwise), minimized under quadratic constraints by an augmented Lagrangian
whose penalty weight is ramped by 10x per round.

Open curves (geodesics to a target) use the basis ``1, s, cos(pi m s),
sin(pi m s)`` for ``m = 1 .. 2K``, i.e. all harmonics up to ``K`` of period 1
plus the half-integer ones an open arc needs. Closed curves use ``cos(2 pi k s),
sin(2 pi k s)`` for ``k = 1 .. K``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .core import HeisPoint
from .curves import PlanarCurve

logger = logging.getLogger(__name__)

DEFAULT_K = 6
DEFAULT_QUADRATURE = 96
DEFAULT_STARTS = 8
RESIDUAL_BOUND = 1e-8
_WHITEN_RCOND = 1e-12


@dataclass(frozen=True)
class VariationalProblem:
    n: int
    target: HeisPoint
    K: int = DEFAULT_K
    M: int = DEFAULT_QUADRATURE
    penalty_weights: tuple = (10.0, 10.0)
    rounds: int = 5
    max_rounds: int = 40
    residual_bound: float = RESIDUAL_BOUND
    n_starts: int = DEFAULT_STARTS
    max_iter: int = 5000

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if self.M < 16:
            raise ValueError("M must be >= 16")
        if self.target.n != self.n:
            raise ValueError(f"target lives in H^{self.target.n}, problem has n={self.n}")


@dataclass(eq=False)
class OracleResult:
    best_length: float
    best_curve: PlanarCurve
    constraint_residual: float
    iterations: int
    converged: bool
    energy: float = float("nan")
    coefficients: np.ndarray = None
    start_lengths: list = field(default_factory=list)

    def to_json(self):
        from .serialize import curve_to_json

        return {
            "best_length": self.best_length,
            "energy": self.energy,
            "constraint_residual": self.constraint_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "start_lengths": list(self.start_lengths),
            "minimizer": curve_to_json(self.best_curve),
        }


class _Basis:
    """Basis values and derivatives at Gauss-Legendre nodes on [0, 1]."""

    def __init__(self, funcs, M):
        nodes, weights = np.polynomial.legendre.leggauss(M)
        self.nodes = 0.5 * (nodes + 1.0)
        self.weights = 0.5 * weights
        self.funcs = funcs
        self.Phi, self.dPhi = self.evaluate(self.nodes)
        W = self.weights[:, None]
        self.gram = self.dPhi.T @ (W * self.dPhi)
        # 2 * c_x^T S c_y is the lift height contribution of one plane.
        self.twist = self.dPhi.T @ (W * self.Phi) - self.Phi.T @ (W * self.dPhi)
        self.at0 = self.evaluate(np.array([0.0]))[0][0]
        self.at1 = self.evaluate(np.array([1.0]))[0][0]

    @property
    def size(self):
        return self.Phi.shape[1]

    def evaluate(self, s):
        vals, ders = zip(*(f(s) for f in self.funcs))
        return np.column_stack(vals), np.column_stack(ders)


def _open_basis(K, M):
    funcs = [
        lambda s: (np.ones_like(s), np.zeros_like(s)),
        lambda s: (s, np.ones_like(s)),
    ]
    for m in range(1, 2 * K + 1):
        w = math.pi * m
        funcs.append(lambda s, w=w: (np.cos(w * s), -w * np.sin(w * s)))
        funcs.append(lambda s, w=w: (np.sin(w * s), w * np.cos(w * s)))
    return _Basis(funcs, M)


def _closed_basis(K, M):
    funcs = []
    for k in range(1, K + 1):
        w = 2 * math.pi * k
        funcs.append(lambda s, w=w: (np.cos(w * s), -w * np.sin(w * s)))
        funcs.append(lambda s, w=w: (np.sin(w * s), w * np.cos(w * s)))
    return _Basis(funcs, M)


class _Reduced:
    """Coefficients ``c = offset + T w`` satisfying the linear constraints exactly.

    ``T`` whitens the energy, so ``int |gamma'|^2 = |w|^2 + 2 g.w + e0``. The
    lift height ``2 sum_j int (x_j' y_j - x_j y_j')`` is the quadratic
    ``w^T Qw w + 2 qo.w + h0``. Coefficients flatten as ``C.ravel()`` with
    ``C`` of shape (nb, 2n).
    """

    def __init__(self, basis, n, A=None, b=None):
        width = 2 * n
        size = basis.size * width
        G = np.kron(basis.gram, np.eye(width))
        E = np.zeros((width, width))
        E[np.arange(n), n + np.arange(n)] = 1.0
        Q = np.kron(basis.twist, E)
        Q = Q + Q.T
        if A is None:
            offset = np.zeros(size)
            null = np.eye(size)
        else:
            offset = np.linalg.lstsq(A, b, rcond=None)[0]
            null = null_space(A)
        # The open basis is numerically redundant on [0, 1]; directions whose
        # energy is below _WHITEN_RCOND of the largest barely move the curve
        # and are dropped rather than blown up by the whitening.
        lam, vec = np.linalg.eigh(null.T @ G @ null)
        keep = lam > _WHITEN_RCOND * lam[-1]
        T = null @ (vec[:, keep] / np.sqrt(lam[keep]))
        self.basis, self.n = basis, n
        self.offset, self.T = offset, T
        self.g = T.T @ (G @ offset)
        self.e0 = float(offset @ G @ offset)
        self.Qw = T.T @ Q @ T
        self.qo = T.T @ (Q @ offset)
        self.h0 = float(offset @ Q @ offset)
        self.A, self.b = A, b

    @property
    def dim(self):
        return self.T.shape[1]

    def coefficients(self, w):
        return (self.offset + self.T @ w).reshape(self.basis.size, 2 * self.n)

    def energy(self, w):
        return float(w @ w + 2.0 * self.g @ w + self.e0)

    def height(self, w):
        Qw_w = self.Qw @ w
        return float(w @ Qw_w + 2.0 * self.qo @ w + self.h0), 2.0 * (Qw_w + self.qo)

    def linear_residual(self, w):
        if self.A is None:
            return 0.0
        return float(np.max(np.abs(self.A @ (self.offset + self.T @ w) - self.b)))

    def length(self, w):
        speed = np.linalg.norm(self.basis.dPhi @ self.coefficients(w), axis=1)
        return float(self.basis.weights @ speed)


def _augmented_lagrangian(red, w0, alpha, target, rounds, max_rounds, mu0, bound, max_iter):
    """Minimize energy subject to ``alpha * height(w) = target``."""

    def lagrangian(w, lam, mu):
        h, h_grad = red.height(w)
        r = alpha * h - target
        value = red.energy(w) + lam * r + 0.5 * mu * r * r
        grad = 2.0 * (w + red.g) + (lam + mu * r) * alpha * h_grad
        return value, grad

    w, lam, mu = w0, 0.0, mu0
    iterations = 0
    residual = math.inf
    for k in range(max_rounds):
        res = minimize(
            lagrangian,
            w,
            args=(lam, mu),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-16, "maxcor": 30},
        )
        w = res.x
        iterations += int(res.nit)
        r = alpha * red.height(w)[0] - target
        residual = max(abs(r), red.linear_residual(w))
        lam += mu * r
        if k < rounds - 1:
            mu *= 10.0
        elif residual <= bound:
            break
    return w, residual, iterations


def _multistart(red, alpha, target, settings, rng):
    best = None
    start_lengths = []
    total_iter = 0
    for _ in range(settings["n_starts"]):
        w0 = rng.standard_normal(red.dim) * math.sqrt(2.0 / red.dim)
        w, residual, iters = _augmented_lagrangian(
            red,
            w0,
            alpha,
            target,
            settings["rounds"],
            settings["max_rounds"],
            settings["mu0"],
            settings["residual_bound"],
            settings["max_iter"],
        )
        total_iter += iters
        length = red.length(w)
        start_lengths.append(length)
        converged = residual <= settings["residual_bound"]
        if not converged:
            logger.info("oracle start did not converge: residual %.3e", residual)
        key = (not converged, length)
        if best is None or key < best[0]:
            best = (key, w, residual, converged)
    _, w, residual, converged = best
    return w, residual, converged, start_lengths, total_iter


def _sample(basis, C, samples, closed=None):
    s = np.linspace(0.0, 1.0, samples + 1)
    Phi, _ = basis.evaluate(s)
    pts = Phi @ C
    if closed:
        pts[-1] = pts[0]
    return PlanarCurve(pts, closed=closed)


def _endpoint_rows(phi, nb, width):
    # Rows of d(phi^T C)/d C.ravel() for each output coordinate.
    J = np.zeros((width, nb * width))
    for col in range(width):
        J[col, col::width] = phi
    return J


def _result(red, w, residual, converged, start_lengths, iters, rho, samples, closed):
    C = red.coefficients(w)
    return OracleResult(
        best_length=rho * red.length(w),
        best_curve=_sample(red.basis, rho * C, samples, closed=closed),
        constraint_residual=residual,
        iterations=iters,
        converged=converged,
        energy=rho**2 * red.energy(w),
        coefficients=rho * C,
        start_lengths=[rho * v for v in start_lengths],
    )


def minimize_length(prob, seed=0, samples=2048):
    """Shortest horizontal curve from the origin to ``prob.target``, by brute force.

    The endpoints are imposed exactly through an affine parametrization of the
    coefficients; the lift height is matched by the augmented Lagrangian. The
    target is rescaled by the Heisenberg dilation to unit size first, and the
    reported residual refers to that normalized problem.
    """
    n = prob.n
    q = prob.target
    zvec = np.concatenate([q.x, q.y])
    rho = max(float(np.linalg.norm(zvec)), math.sqrt(abs(q.t)))
    if rho == 0.0:
        curve = PlanarCurve(np.zeros((samples + 1, 2 * n)), closed=True)
        return OracleResult(0.0, curve, 0.0, 0, True, 0.0)

    basis = _open_basis(prob.K, prob.M)
    nb, width = basis.size, 2 * n
    A = np.vstack([_endpoint_rows(basis.at0, nb, width), _endpoint_rows(basis.at1, nb, width)])
    b = np.concatenate([np.zeros(width), zvec / rho])
    red = _Reduced(basis, n, A, b)
    settings = {
        "n_starts": prob.n_starts,
        "rounds": prob.rounds,
        "max_rounds": prob.max_rounds,
        "mu0": float(max(prob.penalty_weights)),
        "residual_bound": prob.residual_bound,
        "max_iter": prob.max_iter,
    }
    rng = np.random.default_rng(seed)
    found = _multistart(red, 1.0, q.t / rho**2, settings, rng)
    closed = bool(np.all(zvec == 0.0)) or None
    return _result(red, *found, rho, samples, closed)


def isoperimetric_search(
    n,
    target_D,
    seed=0,
    K=DEFAULT_K,
    M=DEFAULT_QUADRATURE,
    n_starts=DEFAULT_STARTS,
    residual_bound=RESIDUAL_BOUND,
    samples=2048,
):
    """Shortest closed curve in R^2n whose plane areas sum to ``target_D``.

    The summed signed area equals ``-1/4`` of the lift height of the curve.
    """
    if target_D == 0:
        raise ValueError("target_D must be non-zero")
    rho = math.sqrt(abs(target_D))
    red = _Reduced(_closed_basis(K, M), n)
    settings = {
        "n_starts": n_starts,
        "rounds": 5,
        "max_rounds": 40,
        "mu0": 10.0,
        "residual_bound": residual_bound,
        "max_iter": 5000,
    }
    rng = np.random.default_rng(seed)
    found = _multistart(red, -0.25, target_D / rho**2, settings, rng)
    return _result(red, *found, rho, samples, True)


def height_corrected_perturbation(curve, field, correction=None):
    """Perturb ``curve`` by ``field + c * correction`` keeping the lift height.

    Both perturbations are sample arrays shaped like ``curve.samples``; they
    should vanish at the endpoints so the projection endpoints stay fixed.
    The default correction is ``sin(pi s)`` times the tangent turned by a
    quarter in every plane, which moves the height at first order.
    The height ``t(1) - t(0)`` of the horizontal lift is quadratic in ``c``,
    so ``c`` is the root of smallest magnitude of that quadratic. Raises
    ``ValueError`` when no real root exists.
    """
    from .curves import horizontal_lift

    base = np.asarray(curve.samples)
    if correction is None:
        n = curve.n
        d = np.gradient(base, axis=0)
        bump = np.sin(math.pi * curve.s)[:, None]
        correction = bump * np.hstack([-d[:, n:], d[:, :n]]) * curve.M

    def rise(c):
        moved = PlanarCurve(base + field + c * correction, closed=False)
        t = horizontal_lift(moved).t
        return float(t[-1] - t[0])

    target = rise_of(curve)
    h0, hp, hm = rise(0.0) - target, rise(1.0) - target, rise(-1.0) - target
    a, b = 0.5 * (hp + hm) - h0, 0.5 * (hp - hm)
    if a == 0.0:
        if b == 0.0:
            raise ValueError("correction field does not change the height")
        c = -h0 / b
    else:
        disc = b * b - 4.0 * a * h0
        if disc < 0.0:
            raise ValueError("no real height correction exists for this field")
        # Numerically stable quadratic roots.
        qq = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        roots = [qq / a] + ([h0 / qq] if qq != 0.0 else [])
        c = min(roots, key=abs)
    return PlanarCurve(base + field + c * correction, closed=False), c


def rise_of(curve):
    """Height change ``t(1) - t(0)`` of the horizontal lift of ``curve``."""
    from .curves import horizontal_lift

    t = horizontal_lift(curve).t
    return float(t[-1] - t[0])
