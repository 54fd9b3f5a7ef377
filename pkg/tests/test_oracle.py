import math

import numpy as np
import pytest
from scipy.integrate import simpson

from heisgeo.core import HeisPoint
from heisgeo.curves import PlanarCurve, horizontal_lift, length_E
from heisgeo.fourier import EqualityCase, analyze, circle_curve, isoperimetric_report
from heisgeo.geodesic import distance_from_origin, geodesic_to_point
from heisgeo.oracle import (
    VariationalProblem,
    _closed_basis,
    _endpoint_rows,
    _open_basis,
    _Reduced,
    height_corrected_perturbation,
    isoperimetric_search,
    minimize_length,
    rise_of,
)

TWO_PI = 2 * math.pi


def reduced_open(n, z, K=4, M=64):
    basis = _open_basis(K, M)
    nb, width = basis.size, 2 * n
    A = np.vstack([_endpoint_rows(basis.at0, nb, width), _endpoint_rows(basis.at1, nb, width)])
    b = np.concatenate([np.zeros(width), z])
    return _Reduced(basis, n, A, b)


class TestObjective:
    @pytest.mark.parametrize("closed", [False, True])
    def test_gradients_central_differences(self, rng, closed):
        red = _Reduced(_closed_basis(4, 64), 2) if closed else reduced_open(2, np.array([0.3, -0.2, 0.5, 0.1]))
        w = rng.normal(size=red.dim) * 0.3
        h_val, h_grad = red.height(w)
        step = 1e-6
        for i in range(red.dim):
            e = np.zeros(red.dim)
            e[i] = step
            fd_e = (red.energy(w + e) - red.energy(w - e)) / (2 * step)
            fd_h = (red.height(w + e)[0] - red.height(w - e)[0]) / (2 * step)
            assert abs(fd_e - 2 * (w[i] + red.g[i])) <= 1e-5 * (1 + abs(fd_e))
            assert abs(fd_h - h_grad[i]) <= 1e-5 * (1 + abs(fd_h))

    def test_quadratic_forms_match_sampled_curve(self, rng):
        red = reduced_open(1, np.array([0.4, 0.7]), K=3, M=64)
        w = rng.normal(size=red.dim) * 0.3
        C = red.coefficients(w)
        s = np.linspace(0, 1, 20001)
        Phi, dPhi = red.basis.evaluate(s)
        speed_sq = np.sum((dPhi @ C) ** 2, axis=1)
        energy = simpson(speed_sq, x=s)
        assert red.energy(w) == pytest.approx(energy, rel=1e-7)
        # Height from the exact integrand 2(x'y - xy'); a polyline rise on this
        # grid is itself only accurate to about 1e-6 for such wiggly curves.
        pts, vel = Phi @ C, dPhi @ C
        rate = 2 * (vel[:, 0] * pts[:, 1] - pts[:, 0] * vel[:, 1])
        # The open basis is a redundant frame, so whitening amplifies roundoff
        # in the reduced form by roughly eps * |T|^2 * |w|^2.
        bound = np.finfo(float).eps * np.abs(red.T).max() ** 2 * (w @ w)
        assert abs(red.height(w)[0] - simpson(rate, x=s)) < bound
        np.testing.assert_allclose(pts[[0, -1]], [[0, 0], [0.4, 0.7]], atol=1e-12)
        assert red.linear_residual(w) < 1e-11

    def test_problem_validation(self):
        q = HeisPoint([0.0], [0.0], 1.0)
        with pytest.raises(ValueError):
            VariationalProblem(1, q, K=1)
        with pytest.raises(ValueError):
            VariationalProblem(1, q, M=8)
        with pytest.raises(ValueError):
            VariationalProblem(2, q)


class TestMinimizeLength:
    def test_axis_target(self):
        q = HeisPoint([0.0], [0.0], 4 * math.pi)
        res = minimize_length(VariationalProblem(1, q), seed=0)
        assert res.converged and res.constraint_residual <= 1e-8
        assert abs(res.best_length - TWO_PI) <= 1e-4 * TWO_PI
        assert res.best_curve.closed
        assert analyze(res.best_curve, 20).high_harmonic_ratio() < 1e-6

    def test_planar_target_is_segment(self):
        q = HeisPoint([0.3], [-0.4], 0.0)
        res = minimize_length(VariationalProblem(1, q), seed=0)
        assert abs(res.best_length - 0.5) < 1e-6
        line = np.linspace(0, 1, res.best_curve.M + 1)[:, None] * [0.3, -0.4]
        assert np.max(np.abs(res.best_curve.samples - line)) < 1e-6

    def test_cut_arc_matches_pointwise(self):
        q = HeisPoint([1.0], [0.0], math.pi / 2)
        res = minimize_length(VariationalProblem(1, q), seed=0)
        assert abs(res.best_length - math.pi / 2) <= 1e-4 * math.pi / 2
        g = geodesic_to_point(q)
        s = np.linspace(0, 1, res.best_curve.M + 1)
        closed_form = g.evaluate(g.s_end * s)[:, :2]
        assert np.max(np.abs(res.best_curve.samples - closed_form)) < 1e-3

    def test_generic_n2_uniqueness_regime(self):
        q = HeisPoint([0.3, -0.7], [0.5, 0.2], -1.3)
        res = minimize_length(VariationalProblem(2, q), seed=3)
        d = distance_from_origin(q)
        assert res.converged
        assert abs(res.best_length - d) <= 1e-4 * d
        g = geodesic_to_point(q)
        s = np.linspace(0, 1, res.best_curve.M + 1)
        assert np.max(np.abs(res.best_curve.samples - g.evaluate(g.s_end * s)[:, :4])) < 1e-3

    def test_never_beats_the_distance(self, rng):
        for _ in range(6):
            n = int(rng.integers(1, 3))
            q = HeisPoint(rng.normal(size=n), rng.normal(size=n), rng.normal() * 2)
            res = minimize_length(VariationalProblem(n, q, n_starts=3), seed=int(rng.integers(1000)))
            d = distance_from_origin(q)
            if res.converged:
                assert res.best_length >= d - 1e-6 * (1 + d)

    def test_deterministic(self):
        q = HeisPoint([0.2], [0.9], 0.7)
        prob = VariationalProblem(1, q, n_starts=3)
        a, b = minimize_length(prob, seed=11), minimize_length(prob, seed=11)
        assert a.best_length == b.best_length
        np.testing.assert_array_equal(a.coefficients, b.coefficients)
        assert a.iterations == b.iterations

    def test_origin_target(self):
        res = minimize_length(VariationalProblem(2, HeisPoint.origin(2)))
        assert res.best_length == 0.0 and res.converged

    def test_unconverged_is_reported(self):
        q = HeisPoint([0.0], [0.0], 4 * math.pi)
        prob = VariationalProblem(1, q, n_starts=1, max_iter=2, rounds=1, max_rounds=1)
        res = minimize_length(prob)
        assert not res.converged
        assert res.constraint_residual > prob.residual_bound


class TestLocalMinimality:
    @pytest.mark.parametrize(
        "q", [HeisPoint([1.0], [0.0], math.pi / 2), HeisPoint([0.3, 0.2], [0.1, -0.5], 0.8)]
    )
    def test_perturbations_are_longer(self, rng, q):
        g = geodesic_to_point(q)
        base = g.sample(4096).base
        s = base.s[:, None]
        reference = length_E(base)
        target = rise_of(base)
        for _ in range(100):
            field = sum(rng.normal(size=2 * q.n) * 0.05 / m * np.sin(math.pi * m * s) for m in range(1, 6))
            moved, _ = height_corrected_perturbation(base, field)
            assert abs(rise_of(moved) - target) < 1e-10
            np.testing.assert_allclose(moved.samples[[0, -1]], base.samples[[0, -1]], atol=1e-15)
            assert length_E(moved) >= reference - 1e-9


class TestIsoperimetricSearch:
    def test_unit_area_circle(self):
        res = isoperimetric_search(1, math.pi, seed=0)
        assert abs(res.best_length - TWO_PI) < 1e-3
        rep = isoperimetric_report(res.best_curve)
        assert rep.equality_case is EqualityCase.POSITIVE

    def test_n3_negative_reconstruction(self):
        res = isoperimetric_search(3, -math.pi, seed=1)
        assert abs(res.best_length**2 - 4 * math.pi**2) <= 1e-3 * 4 * math.pi**2
        rep = isoperimetric_report(res.best_curve)
        assert rep.equality_case is EqualityCase.NEGATIVE
        p = rep.circle_params
        rebuilt = circle_curve(p["A"], p["B"], p["C"], p["D"], orientation=-1, samples=res.best_curve.M)
        assert np.max(np.abs(rebuilt.samples - res.best_curve.samples)) < 1e-3

    def test_scaling(self):
        small = isoperimetric_search(2, 0.7, seed=2).best_length
        large = isoperimetric_search(2, 2.8, seed=2).best_length
        assert large / small == pytest.approx(2.0, rel=1e-3)

    def test_rejects_zero_area(self):
        with pytest.raises(ValueError):
            isoperimetric_search(1, 0.0)
