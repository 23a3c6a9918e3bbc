import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from confdiam import ambient as amb
from confdiam.errors import DomainError, UnsupportedAmbientError

BUILTINS = [amb.euclidean, amb.hyperbolic_ball, amb.hyperbolic_half_space, amb.sphere_stereographic]


def _point_in(a, raw):
    """Map a raw vector in [-1, 1]^3 into the chart domain of ``a``."""
    raw = np.asarray(raw, float)
    if a.kind == amb.HYPERBOLIC_BALL:
        return 0.9 * raw / max(1.0, np.linalg.norm(raw))
    if a.kind == amb.HYPERBOLIC_HALF_SPACE:
        return np.array([raw[0], raw[1], 0.1 + abs(raw[2])])
    return 2.0 * raw


coords = arrays(np.float64, 3, elements=st.floats(-1, 1, allow_nan=False))


class TestBuiltins:
    def test_euclidean_fields(self):
        a = amb.euclidean()
        p = np.array([[0.3, -2.0, 5.0]])
        assert a.phi(p)[0] == 0.0
        assert np.all(a.grad_phi(p) == 0.0)
        assert a.K_upper == 0.0 and math.isinf(a.injectivity_radius())

    def test_model_constants(self):
        assert amb.hyperbolic_ball().K_upper == -1.0
        assert amb.hyperbolic_half_space().K_upper == -1.0
        s3 = amb.sphere_stereographic()
        assert s3.K_upper == 1.0
        assert s3.injectivity_radius() == pytest.approx(math.pi)
        assert math.isinf(amb.hyperbolic_ball().injectivity_radius())

    def test_phi_closed_forms(self):
        p = np.array([[0.3, 0.4, 0.0]])
        assert amb.hyperbolic_ball().phi(p)[0] == pytest.approx(math.log(2 / 0.75))
        assert amb.hyperbolic_half_space().phi(np.array([[1.0, 2.0, 0.25]]))[0] == pytest.approx(math.log(4.0))
        assert amb.sphere_stereographic().phi(p)[0] == pytest.approx(math.log(2 / 1.25))

    @pytest.mark.parametrize("factory", BUILTINS)
    def test_gradient_matches_finite_differences(self, factory):
        a = factory()
        rng = np.random.default_rng(3)
        pts = np.array([_point_in(a, rng.uniform(-1, 1, 3)) for _ in range(25)])
        fd = amb.finite_difference_gradient(a.phi, pts)
        np.testing.assert_allclose(a.grad_phi(pts), fd, rtol=1e-6, atol=1e-9)

    def test_origin_in_stereographic_chart(self):
        s3 = amb.sphere_stereographic()
        assert s3.contains(np.zeros((1, 3)))[0]

    @pytest.mark.parametrize("name", ["e3", "h3-ball", "h3-half", "s3"])
    def test_from_name(self, name):
        assert amb.from_name(name).kind == amb.CLI_NAMES[name]

    def test_from_name_unknown(self):
        with pytest.raises(ValueError):
            amb.from_name("h4")


class TestConformalNorm:
    def test_examples(self):
        assert amb.conformal_norm(amb.euclidean(), [7, 8, 9], [3, 4, 0]) == pytest.approx(5.0)
        assert amb.conformal_norm(amb.hyperbolic_ball(), [0, 0, 0], [1, 0, 0]) == pytest.approx(2.0)
        assert amb.conformal_norm(amb.sphere_stereographic(), [1, 0, 0], [0, 1, 0]) == pytest.approx(1.0)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            amb.conformal_norm(amb.hyperbolic_ball(), [1.0, 0, 0], [1, 0, 0])
        with pytest.raises(DomainError):
            amb.conformal_norm(amb.hyperbolic_half_space(), [0, 0, -1.0], [1, 0, 0])

    @given(coords, coords, st.floats(-50, 50, allow_nan=False), st.sampled_from(BUILTINS))
    def test_homogeneous(self, raw, v, lam, factory):
        a = factory()
        p = _point_in(a, raw)
        assert amb.conformal_norm(a, p, lam * v) == pytest.approx(abs(lam) * amb.conformal_norm(a, p, v),
                                                                    rel=1e-14, abs=1e-300)


class TestCurveLength:
    def test_unit_square(self):
        sq = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float)
        assert amb.curve_length(amb.euclidean(), sq, closed=True) == pytest.approx(4.0)

    def test_hyperbolic_diameter_segment(self):
        t = 0.5
        poly = np.column_stack([np.linspace(-t, t, 2001), np.zeros(2001), np.zeros(2001)])
        # ln 3 from the origin to each end
        expected = 4 * math.atanh(t)
        assert amb.curve_length(amb.hyperbolic_ball(), poly) == pytest.approx(expected, rel=1e-6)
        # cross-check against an independent adaptive quadrature
        ref = oracles.conformal_segment_length(lambda p: amb.hyperbolic_ball().phi(p[None])[0], poly[0], poly[-1])
        assert ref == pytest.approx(expected, rel=1e-10)

    def test_stereographic_unit_circle(self):
        ang = np.linspace(0, 2 * math.pi, 400, endpoint=False)
        circle = np.column_stack([np.cos(ang), np.sin(ang), np.zeros_like(ang)])
        assert amb.curve_length(amb.sphere_stereographic(), circle, closed=True) == pytest.approx(2 * math.pi, rel=1e-4)

    def test_short_polyline_rejected(self):
        with pytest.raises(ValueError):
            amb.curve_length(amb.euclidean(), np.zeros((1, 3)))

    @pytest.mark.parametrize("factory", BUILTINS[1:])
    @pytest.mark.parametrize("rule,rtol", [("gauss2", 1e-4), ("gauss4", 1e-7), ("midpoint", 5e-3)])
    def test_segment_rules_vs_adaptive_quadrature(self, factory, rule, rtol):
        a = factory()
        rng = np.random.default_rng(11)
        for _ in range(10):
            p, q = (_point_in(a, rng.uniform(-1, 1, 3)) for _ in range(2))
            q = p + 0.005 * (q - p)
            ref = oracles.conformal_segment_length(lambda x: a.phi(x[None])[0], p, q)
            got = amb.segment_lengths(a, p[None], q[None], rule)[0]
            assert got == pytest.approx(ref, rel=rtol)
            exact = amb.segment_lengths(a, p[None], q[None], "exact")[0]
            assert exact == pytest.approx(ref, rel=1e-9)


class TestAmbientDistance:
    def test_examples(self):
        assert amb.ambient_distance(amb.euclidean(), [0, 0, 0], [1, 1, 1]) == pytest.approx(math.sqrt(3))
        d = amb.ambient_distance(amb.hyperbolic_ball(), [0, 0, 0], [0.5, 0, 0])
        assert d == pytest.approx(math.log(3.0), rel=1e-12)
        assert d == pytest.approx(oracles.ball_distance([0, 0, 0], [0.5, 0, 0]), rel=1e-12)
        p = [0.3, -0.7, 1.1]
        assert amb.ambient_distance(amb.sphere_stereographic(), p, p) == 0.0

    def test_custom_unsupported(self):
        a = amb.euclidean().shifted(0.5)
        with pytest.raises(UnsupportedAmbientError):
            amb.ambient_distance(a, [0, 0, 0], [1, 0, 0])

    @pytest.mark.parametrize("factory,oracle", [
        (amb.hyperbolic_ball, oracles.ball_distance),
        (amb.hyperbolic_half_space, oracles.half_space_distance),
        (amb.sphere_stereographic, oracles.sphere_distance),
    ])
    def test_against_arccosh_forms(self, factory, oracle):
        a = factory()
        rng = np.random.default_rng(5)
        for _ in range(50):
            p, q = (_point_in(a, rng.uniform(-1, 1, 3)) for _ in range(2))
            assert amb.ambient_distance(a, p, q) == pytest.approx(oracle(p, q), rel=1e-9, abs=1e-7)

    @settings(max_examples=60)
    @given(coords, coords, coords, st.sampled_from(BUILTINS))
    def test_metric_axioms(self, r1, r2, r3, factory):
        a = factory()
        p, q, r = (_point_in(a, x) for x in (r1, r2, r3))
        d = lambda x, y: float(amb.ambient_distance(a, x, y))  # noqa: E731
        assert d(p, q) == pytest.approx(d(q, p), rel=1e-12, abs=1e-12)
        assert d(p, r) <= d(p, q) + d(q, r) + 1e-9

    @given(coords, coords)
    def test_sphere_distance_at_most_pi(self, r1, r2):
        a = amb.sphere_stereographic()
        p, q = 50.0 * r1, 50.0 * r2
        assert amb.ambient_distance(a, p, q) <= math.pi + 1e-12

    @settings(max_examples=40)
    @given(coords, coords, st.sampled_from(BUILTINS))
    def test_distance_below_polyline_length(self, r1, r2, factory):
        a = factory()
        p, q = _point_in(a, r1), _point_in(a, r2)
        mid = 0.5 * (p + q) + np.array([0.0, 0.05, 0.0])
        if not a.contains(mid[None])[0]:
            mid = 0.5 * (p + q)
        t = np.linspace(0, 1, 200)[:, None]
        poly = np.vstack([p + t * (mid - p), mid + t[1:] * (q - mid)])
        length = amb.curve_length(a, poly, rule="exact")
        assert amb.ambient_distance(a, p, q) <= length * (1 + 1e-3) + 1e-12


class TestCustom:
    def test_self_check_rejects_wrong_gradient(self):
        with pytest.raises(ValueError):
            amb.custom(lambda p: p[..., 0], lambda p: np.zeros_like(p), K_upper=0.0,
                       probe_points=np.array([[0.1, 0.2, 0.3]]))

    def test_shifted_scales_curvature_and_radius(self):
        s3 = amb.sphere_stereographic()
        b = s3.shifted(math.log(2.0))
        assert b.K_upper == pytest.approx(0.25)
        assert b.injectivity_radius() == pytest.approx(2 * math.pi)
        p = np.array([[0.2, 0.1, -0.4]])
        assert b.phi(p)[0] == pytest.approx(s3.phi(p)[0] + math.log(2.0))
