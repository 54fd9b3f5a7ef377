import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisgeo import DimensionMismatchError
from heisgeo.core import HeisPoint, conjugate_flip, group_mul, inverse
from heisgeo.curves import chord_speeds, length_H
from heisgeo.geodesic import (
    SERIES_CUTOFF,
    DegenerateGeodesicError,
    GeodesicParams,
    H_derivative,
    H_eval,
    H_inverse,
    _H_nonneg,
    _H_scalar,
    align_geodesics,
    apply_unitary,
    cut_parameter,
    distance,
    distance_arc_form,
    distance_trig_form,
    distance_from_origin,
    geodesic_to_axis,
    geodesic_to_point,
    unitary_frame,
    unitary_from_json,
    unitary_to_json,
)

from conftest import random_point

TWO_PI = 2 * math.pi
mpmath.mp.dps = 40


def H_reference(s):
    # High-precision oracle straight from the defining quotient.
    s = mpmath.mpf(s)
    u = 2 * mpmath.pi * s
    return (u - mpmath.sin(u)) / (1 - mpmath.cos(u))


class TestH:
    def test_zero_and_slope(self):
        assert H_eval(0.0) == 0.0
        assert abs(H_eval(1e-8) / 1e-8 - TWO_PI / 3) < 1e-13
        assert abs(H_derivative(0.0) - TWO_PI / 3) < 1e-13

    def test_half(self):
        assert H_eval(0.5) == pytest.approx(math.pi / 2, rel=1e-15)

    @given(st.floats(-0.999, 0.999))
    @settings(max_examples=300)
    def test_odd(self, s):
        assert abs(H_eval(-s) + H_eval(s)) <= 1e-14 * (1 + abs(H_eval(s)))

    def test_against_high_precision(self):
        for s in np.concatenate([np.geomspace(1e-6, 0.1, 30), np.linspace(0.1, 0.999, 60)]):
            ref = float(H_reference(s))
            assert abs(H_eval(s) - ref) <= 4e-15 * abs(ref)

    def test_monotone(self):
        s = np.linspace(0, 0.9999, 20001)
        assert np.all(np.diff(H_eval(s)) > 0)

    def test_series_trig_agreement(self):
        s = np.linspace(0.05, 0.15, 401)
        u = TWO_PI * s
        trig = (u - np.sin(u)) / (1 - np.cos(u))
        np.testing.assert_allclose(H_eval(s), trig, rtol=1e-13)
        np.testing.assert_allclose(H_eval(-s), -trig, rtol=1e-13)

    def test_scalar_twin_is_bitwise(self):
        for s in np.linspace(0, 0.999, 301):
            H, dH = _H_nonneg(np.array([s]))
            assert _H_scalar(float(s)) == (H[0], dH[0])

    def test_derivative_finite_difference(self):
        for s in [1e-3, 0.05, SERIES_CUTOFF, 0.3, 0.5, 0.8, 0.95]:
            h = 1e-6 * max(s, 1e-3)
            fd = (H_eval(s + h) - H_eval(s - h)) / (2 * h)
            assert H_derivative(s) == pytest.approx(fd, rel=1e-7)

    @pytest.mark.parametrize("s", [1.0, -1.0, 1.5, math.nan])
    def test_domain(self, s):
        with pytest.raises(ValueError):
            H_eval(s)


class TestHInverse:
    def test_examples(self):
        assert H_inverse(0.0) == 0.0
        assert abs(H_inverse(math.pi / 2) - 0.5) < 1e-12

    def test_round_trip_log_spaced(self):
        for v in np.geomspace(1e-6, 1e6, 2000):
            assert abs(H_eval(H_inverse(v)) - v) <= 1e-12 * v

    def test_post_condition_moderate(self):
        # Above ~1e5 the double grid of s near 1 is coarser than 1e-13 (1 + v).
        for v in np.concatenate([-np.geomspace(1e-6, 1e5, 500), np.geomspace(1e-6, 1e5, 500)]):
            assert abs(H_eval(H_inverse(v)) - v) <= 1e-13 * (1 + abs(v))

    def test_saturates(self):
        s = H_inverse(1e300)
        assert 0 < s < 1 and s == math.nextafter(1.0, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            H_inverse(math.inf)


class TestAxisGeodesic:
    def test_midpoint_and_endpoint(self):
        g = geodesic_to_axis([1.0], [0.0], sign=1)
        assert g.params.T == pytest.approx(4 * math.pi)
        np.testing.assert_allclose(g.evaluate(0.5)[0], [2.0, 0.0, 2 * math.pi], atol=1e-14)
        np.testing.assert_allclose(g.evaluate(1.0)[0], [0.0, 0.0, 4 * math.pi], atol=1e-14)
        np.testing.assert_array_equal(g.evaluate(0.0)[0], [0.0, 0.0, 0.0])

    def test_constant_speed(self, rng):
        for sign in (1, -1):
            A, B = rng.normal(size=2), rng.normal(size=2)
            g = geodesic_to_axis(A, B, sign)
            curve = g.sample(4096)
            speeds = chord_speeds(curve.base)
            speed = math.sqrt(math.pi * g.params.T)
            # Chords undershoot arcs by (pi / M)^2 / 6 relative.
            np.testing.assert_allclose(speeds, speed, rtol=1e-6)
            assert curve.point(curve.M).isclose(HeisPoint(np.zeros(2), np.zeros(2), sign * g.params.T))

    def test_residual_second_order(self):
        g = geodesic_to_axis([0.7], [0.2])
        r1 = g.sample(512).horizontality_residual
        r2 = g.sample(1024).horizontality_residual
        assert r2 < r1 / 3.5

    def test_zero_vector(self):
        with pytest.raises(DegenerateGeodesicError):
            geodesic_to_axis([0.0], [0.0])

    def test_params_validation(self):
        with pytest.raises(ValueError):
            GeodesicParams([1.0], [0.0], 1, 1.0)
        with pytest.raises(ValueError):
            GeodesicParams([1.0], [0.0], 0, 4 * math.pi)
        with pytest.raises(ValueError):
            GeodesicParams([1.0], [0.0], 1, 4 * math.pi, s_end=1.5)
        p = GeodesicParams([1.0], [0.0], -1, 4 * math.pi, 0.25)
        q = GeodesicParams.from_json(p.to_json())
        assert q.to_json() == p.to_json()


class TestPointGeodesic:
    def test_segment(self):
        q = HeisPoint([0.3, 0.1], [-0.4, 0.2], 0.0)
        g = geodesic_to_point(q)
        assert g.kind == "segment"
        assert length_H(g.sample(64)) == pytest.approx(np.linalg.norm(q.z), rel=1e-14)

    def test_half_cut_example(self):
        q = HeisPoint([1.0], [0.0], math.pi / 2)
        g = geodesic_to_point(q)
        assert g.s_end == pytest.approx(0.5, abs=1e-15)
        np.testing.assert_allclose(g.params.w, [0.5], atol=1e-15)
        np.testing.assert_allclose(g.evaluate(0.5)[0], q.as_vector(), atol=1e-14)

    def test_axis_target(self):
        g = geodesic_to_point(HeisPoint([0.0], [0.0], 4 * math.pi))
        assert g.params.T == pytest.approx(4 * math.pi)
        assert g.length == pytest.approx(TWO_PI)
        np.testing.assert_allclose(g.params.A, [1.0])

    def test_direction_family(self):
        q = HeisPoint(np.zeros(2), np.zeros(2), -3.0)
        g = geodesic_to_point(q, direction=[1j, 1.0])
        np.testing.assert_allclose(g.evaluate(1.0)[0], q.as_vector(), atol=1e-14)
        assert g.length == pytest.approx(math.sqrt(3 * math.pi))

    def test_origin_and_errors(self):
        g = geodesic_to_point(HeisPoint.origin(2))
        assert g.kind == "constant" and g.length == 0.0
        with pytest.raises(DegenerateGeodesicError):
            geodesic_to_point(HeisPoint(np.zeros(1), np.zeros(1), 1.0), direction=[0.0])
        with pytest.raises(DimensionMismatchError):
            geodesic_to_point(HeisPoint(np.zeros(1), np.zeros(1), 1.0), direction=[1.0, 0.0])

    def test_endpoints_random(self, rng):
        for _ in range(300):
            q = random_point(rng, int(rng.integers(1, 4)), scale=rng.choice([1e-3, 1.0, 30.0]))
            g = geodesic_to_point(q)
            end = g.evaluate(g.s_end)[0]
            assert np.max(np.abs(end - q.as_vector())) <= 1e-10 * (1 + np.linalg.norm(q.as_vector()))
            # The length matches the distance formula.
            assert g.length == pytest.approx(distance_from_origin(q), rel=1e-12)


class TestDistance:
    def test_examples(self):
        z = np.array([0.3, -0.4])
        assert distance_from_origin(HeisPoint(z, [0.0, 0.0], 0.0)) == 0.5
        assert distance_from_origin(HeisPoint([0.0], [0.0], math.pi)) == pytest.approx(math.pi, rel=1e-15)
        assert distance_from_origin(HeisPoint([1.0], [0.0], math.pi / 2)) == pytest.approx(math.pi / 2, rel=1e-14)
        assert distance_from_origin(HeisPoint.origin(3)) == 0.0
        p = HeisPoint([0.1], [0.2], 0.3)
        assert distance(p, p) == 0.0
        assert distance(HeisPoint.origin(1), HeisPoint([0.0], [0.0], 4 * math.pi)) == pytest.approx(TWO_PI)

    def test_two_forms_agree(self, rng):
        for _ in range(2000):
            n = int(rng.integers(1, 4))
            z = rng.normal(size=n) + 1j * rng.normal(size=n)
            h = rng.normal() * 10 ** rng.uniform(-3, 3)
            a, b = distance_trig_form(z, h), distance_arc_form(z, h)
            assert abs(a - b) <= 1e-12 * b

    def test_near_axis_against_high_precision(self):
        # Cut parameters within 1e-8 of 1: both forms keep full relative accuracy.
        for v in (1e3, 1e8, 1e14):
            d = mpmath.findroot(
                lambda d: 1 / mpmath.sqrt(H_reference(1 - d)) - 1 / mpmath.sqrt(v), 1 / mpmath.sqrt(mpmath.pi * v)
            )
            s0 = 1 - d
            exact = float(2 * mpmath.pi * s0 / (2 * mpmath.sin(mpmath.pi * s0)))
            z = np.array([1.0 + 0j])
            assert distance_arc_form(z, v) == pytest.approx(exact, rel=1e-14)
            assert distance_trig_form(z, -v) == pytest.approx(exact, rel=1e-14)

    def test_continuity_across_plane(self):
        z = np.array([0.6, -0.8])
        d = distance_from_origin(HeisPoint(z, [0.0, 0.0], 1e-6))
        assert abs(d - 1.0) < 1e-5

    def test_center_guard_continuity(self):
        # Near the t-axis the trigonometric form and sqrt(pi |h|) meet smoothly.
        for r in (1e-3, 1e-5):
            h = 2.0
            d = distance_from_origin(HeisPoint([r], [0.0], h))
            assert d == pytest.approx(math.sqrt(math.pi * h), rel=1e-2)
            assert d < math.sqrt(math.pi * h) + 1e-12

    def test_flip_and_oddness(self, rng):
        for _ in range(200):
            q = random_point(rng, 2)
            d = distance_from_origin(q)
            assert abs(distance_from_origin(conjugate_flip(q)) - d) <= 1e-12 * (1 + d)
            assert abs(cut_parameter(q.z, -q.t) + cut_parameter(q.z, q.t)) == 0.0

    def test_bounds(self, rng):
        # A horizontal path is never shorter than its straight projection.
        for _ in range(200):
            q = random_point(rng, 2)
            d = distance_from_origin(q)
            assert d >= np.linalg.norm(q.z) * (1 - 1e-15)

    def test_symmetry_and_left_invariance(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 4))
            p, q, g = (random_point(rng, n) for _ in range(3))
            d = distance(p, q)
            assert abs(distance(q, p) - d) <= 1e-12 * (1 + d)
            assert abs(distance(group_mul(g, p), group_mul(g, q)) - d) <= 1e-12 * (1 + d)

    def test_inverse_invariance(self, rng):
        for _ in range(100):
            q = random_point(rng, 2)
            d = distance_from_origin(q)
            assert abs(distance_from_origin(inverse(q)) - d) <= 1e-12 * (1 + d)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            distance(HeisPoint.origin(1), HeisPoint.origin(2))


class TestAlignment:
    def test_identity_pair(self, rng):
        A, B = rng.normal(size=3), rng.normal(size=3)
        g = geodesic_to_axis(A, B)
        U = align_geodesics(g, g)
        np.testing.assert_allclose(U @ g.params.w, g.params.w, atol=1e-12)

    def test_coordinate_swap(self):
        r = 0.8
        g1, g2 = geodesic_to_axis([r, 0.0], [0.0, 0.0]), geodesic_to_axis([0.0, r], [0.0, 0.0])
        U = align_geodesics(g1, g2)
        np.testing.assert_allclose(np.abs(U), [[0, 1], [1, 0]], atol=1e-15)
        s = np.linspace(0, 1, 257)
        np.testing.assert_allclose(apply_unitary(U, g1.evaluate(s)), g2.evaluate(s), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_random_pairs(self, rng, n):
        s = np.linspace(0, 1, 129)
        for _ in range(50):
            w1 = rng.normal(size=n) + 1j * rng.normal(size=n)
            w2 = rng.normal(size=n) + 1j * rng.normal(size=n)
            w2 *= np.linalg.norm(w1) / np.linalg.norm(w2)
            sign = int(rng.choice([-1, 1]))
            g1, g2 = (geodesic_to_axis(w.real, w.imag, sign) for w in (w1, w2))
            U = align_geodesics(g1, g2)
            assert np.max(np.abs(U.conj().T @ U - np.eye(n))) < 1e-12
            np.testing.assert_allclose(U @ w1, w2, atol=1e-12 * np.linalg.norm(w1))
            mapped = apply_unitary(U, g1.evaluate(s))
            assert np.max(np.abs(mapped - g2.evaluate(s))) < 1e-10 * (1 + g1.params.T)

    def test_frame_unitary_for_axis_aligned(self):
        U = unitary_frame([0.0, 0.0, 2.0j])
        np.testing.assert_allclose(U.conj().T @ U, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(U[:, 0], [0, 0, 1j])

    def test_rejects_mismatch(self):
        g1, g2 = geodesic_to_axis([1.0, 0.0], [0.0, 0.0]), geodesic_to_axis([0.0, 2.0], [0.0, 0.0])
        with pytest.raises(ValueError):
            align_geodesics(g1, g2)
        with pytest.raises(ValueError):
            align_geodesics(g1, geodesic_to_axis([0.0, 1.0], [0.0, 0.0], sign=-1))
        with pytest.raises(DimensionMismatchError):
            align_geodesics(g1, geodesic_to_axis([1.0], [0.0]))
        with pytest.raises(DegenerateGeodesicError):
            unitary_frame([0.0, 0.0])

    def test_json_round_trip(self, rng):
        w1, w2 = rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3) + 1j * rng.normal(size=3)
        w2 *= np.linalg.norm(w1) / np.linalg.norm(w2)
        U = align_geodesics(geodesic_to_axis(w1.real, w1.imag), geodesic_to_axis(w2.real, w2.imag))
        obj = unitary_to_json(U)
        assert obj["order"] == "column-major" and obj["n"] == 3
        np.testing.assert_array_equal(unitary_from_json(obj), U)
