import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

import oracles
from confdiam import ambient as amb
from confdiam import generators as gen
from confdiam import plateau as pl
from confdiam import surface as srf
from confdiam.errors import DomainError, MeshError, StalledSolverError

E3 = amb.euclidean()
BALL = amb.hyperbolic_ball()
HALF = amb.hyperbolic_half_space()
S3 = amb.sphere_stereographic()


def _jittered_disk(a_scale=1.0, seed=0, sigma=0.1, rings=6):
    m = gen.disk(a_scale, rings)
    P = m.positions.copy()
    inner = m.interior_vertices
    P[inner, 2] += np.random.default_rng(seed).normal(0.0, sigma * a_scale, len(inner))
    return m.with_positions(P)


class TestAreaFunctional:
    def test_matches_surface_area(self):
        m = gen.spherical_cap(1.0, 0.5, 6)
        for a in (E3, BALL, S3):
            assert pl.area_functional(m.positions, m.faces, a) == pytest.approx(srf.area(m, a), rel=1e-12)

    @pytest.mark.parametrize("a,mesh", [
        (E3, _jittered_disk()),
        (BALL, _jittered_disk(0.5, seed=1)),
        (HALF, gen.spherical_cap(1.2, 0.5, 6, center=(0, 0, 1.0))),
        (S3, _jittered_disk(1.5, seed=2)),
    ], ids=["e3", "h3-ball", "h3-half", "s3"])
    def test_gradient_vs_central_differences(self, a, mesh):
        P, F = mesh.positions, mesh.faces
        G = pl.area_gradient(P, F, a)
        scale = float(np.ptp(P, axis=0).max())
        h = 1e-6 * scale
        rng = np.random.default_rng(7)
        for v in rng.choice(mesh.interior_vertices, 20, replace=False):
            fd = np.empty(3)
            for k in range(3):
                Pp, Pm = P.copy(), P.copy()
                Pp[v, k] += h
                Pm[v, k] -= h
                fd[k] = (pl.area_functional(Pp, F, a) - pl.area_functional(Pm, F, a)) / (2 * h)
            assert np.linalg.norm(G[v] - fd) <= 1e-5 * np.linalg.norm(fd)


class TestMinimize:
    def test_flat_disk(self):
        curve = gen.circle(1.0, 48)
        m = pl.span_disk(curve, rings=8)
        P = m.positions.copy()
        P[m.interior_vertices, 2] += 0.2 * (1 - np.linalg.norm(P[m.interior_vertices, :2], axis=1) ** 2)
        out, hist = pl.minimize_area(m.with_positions(P), E3)
        assert hist.converged
        assert srf.total_mean_curvature(out, E3) <= 1e-3 * srf.boundary_length(out, E3)
        np.testing.assert_array_equal(out.positions[out.boundary_mask], m.positions[m.boundary_mask])

    @pytest.fixture(scope="class")
    @staticmethod
    def catenoid_run():
        a, b = gen.circle_pair(1.0, 1.0, 48)
        return pl.minimize_area(pl.span_tube(a, b, 16), E3)

    def test_catenoid(self, catenoid_run):
        out, hist = catenoid_run
        assert hist.converged and not hist.neck_collapse
        field = srf.mean_curvature_delta(out)
        inner = out.interior_vertices
        assert np.max(np.linalg.norm(field.H_delta[inner], axis=1)) <= 5e-2
        # the neck sits at the analytic catenoid radius
        mid = np.abs(out.positions[:, 2]) < 1e-9
        neck = np.linalg.norm(out.positions[mid, :2], axis=1).mean()
        assert neck == pytest.approx(gen.catenoid_neck(1.0, 1.0), rel=0.01)

    def test_area_history_non_increasing(self, catenoid_run):
        _, hist = catenoid_run
        areas = np.array(hist.area)
        assert np.all(np.diff(areas) <= 1e-12 * areas[:-1])

    def test_hyperbolic_centered_circle_stays_flat(self):
        m = pl.span_disk(gen.circle(0.5, 48), rings=8)
        P = m.positions.copy()
        P[m.interior_vertices, 2] += 0.05
        out, hist = pl.minimize_area(m.with_positions(P), BALL)
        assert hist.converged
        assert np.max(np.abs(out.positions[:, 2])) < 1e-3
        assert srf.total_mean_curvature(out, BALL) <= 1e-2 * srf.area(out, BALL)

    def test_hyperbolic_offset_circle_is_orthogonal_sphere(self):
        height = 0.3
        m = pl.span_disk(gen.circle(0.5, 48, center=(0, 0, height)), rings=8)
        out, hist = pl.minimize_area(m, BALL)
        assert hist.converged
        assert srf.total_mean_curvature(out, BALL) <= 1e-2 * srf.area(out, BALL)
        centre, radius = oracles.orthogonal_sphere(0.5, height)
        dist = np.linalg.norm(out.positions - centre, axis=1)
        np.testing.assert_allclose(dist, radius, rtol=2e-3)

    def test_closed_mesh_rejected(self):
        with pytest.raises(MeshError):
            pl.minimize_area(gen.icosphere(1), E3)

    def test_stalled_solver_carries_partial_result(self):
        m = _jittered_disk(sigma=0.3)
        opts = pl.SolverOptions(max_backtracks=1, armijo=0.9)
        with pytest.raises(StalledSolverError) as err:
            pl.minimize_area(m, E3, opts)
        assert err.value.mesh.n_vertices == m.n_vertices
        assert err.value.history.reason == "no admissible step"
        assert len(err.value.history.area) == 1

    def test_iteration_limit_reported(self):
        out, hist = pl.minimize_area(_jittered_disk(), E3, pl.SolverOptions(max_iters=1, precondition=False))
        assert not hist.converged and hist.reason == "iteration limit"
        assert hist.iterations == 1
        assert "area" in hist.to_dict()

    @pytest.mark.parametrize("kw", [dict(shrink=1.0), dict(armijo=0.0), dict(max_iters=0), dict(grad_tol=-1.0)])
    def test_options_validated(self, kw):
        with pytest.raises(ValueError):
            pl.SolverOptions(**kw)


class TestSpanning:
    def test_span_disk_keeps_curve(self):
        curve = gen.circle(1.0, 30)
        m = pl.span_disk(curve, rings=5)
        loop = m.boundary_loops[0]
        assert len(loop) == 30
        assert m.euler_characteristic() == 1
        assert {tuple(p) for p in m.positions[loop]} == {tuple(p) for p in curve}

    def test_span_tube_is_annulus(self):
        a, b = gen.circle_pair(1.0, 1.0, 24)
        m = pl.span_tube(a, b, 8)
        assert m.euler_characteristic() == 0 and len(m.boundary_loops) == 2

    def test_bad_curves(self):
        with pytest.raises(DomainError):
            pl.span_disk(np.zeros((2, 3)))
        with pytest.raises(DomainError):
            pl.span_tube(gen.circle(1.0, 10), gen.circle(1.0, 12))


class TestCatenoidTransition:
    def test_critical_ratio(self):
        u, ratio = oracles.catenoid_critical_ratio()
        assert u == pytest.approx(1.19968, abs=1e-5)
        assert ratio == pytest.approx(1.32549, abs=1e-5)
        assert pl.catenoid_critical_ratio() == pytest.approx(ratio, rel=1e-12)

    @pytest.mark.parametrize("h,collapse", [(1.2, False), (1.45, True)])
    def test_descent_either_side(self, h, collapse):
        a, b = gen.circle_pair(1.0, h, 48)
        out, hist = pl.minimize_area(pl.span_tube(a, b, 16), E3)
        assert hist.neck_collapse is collapse
        assert hist.converged is not collapse
        if not collapse:
            field = srf.mean_curvature_delta(out)
            assert np.max(np.linalg.norm(field.H_delta[out.interior_vertices], axis=1)) <= 5e-2


class TestScreening:
    def test_euclidean_far_circles(self):
        curves = [gen.circle(1.0, 64), gen.circle(1.0, 64, center=(0, 0, 1e6))]
        v = pl.screen_boundary(curves, E3)
        assert v.bound == pytest.approx(3888 * math.pi * math.pi * 4 * math.pi, rel=1e-3)
        assert v.separation == pytest.approx(1e6)
        assert v.verdict == pl.NO_SURFACE

    def test_hyperbolic_arithmetic(self):
        # hyperbolic distances of 1e5 are not representable in a float chart,
        # so the measured quantities are supplied directly
        far = pl.screen_verdict([0.1, 0.1], {(0, 1): 1e5}, K=-1.0)
        assert far.bound == pytest.approx(3888 * math.pi * math.pi * 0.2, rel=1e-12)
        assert far.bound == pytest.approx(7.67e3, rel=1e-3)
        assert far.verdict == pl.NO_SURFACE
        near = pl.screen_verdict([0.1, 0.1], {(0, 1): 1e3}, K=-1.0)
        assert near.verdict == pl.INCONCLUSIVE

    def test_half_space_tiny_circles(self):
        curves = [gen.circle(1e-6, 64, center=(0, 0, 1.0)), gen.circle(1e-5, 64, center=(0, 0, 10.0))]
        v = pl.screen_boundary(curves, HALF)
        assert v.component_lengths == pytest.approx([2 * math.pi * 1e-6] * 2, rel=1e-3)
        assert v.separation == pytest.approx(math.log(10.0), rel=1e-4)
        assert v.bound < v.separation and v.verdict == pl.NO_SURFACE

    def test_close_circles_inconclusive(self):
        v = pl.screen_boundary(gen.circle_pair(0.3, 0.5, 48), BALL)
        assert v.verdict == pl.INCONCLUSIVE and v.bound > v.separation

    def test_single_component(self):
        v = pl.screen_boundary([gen.circle(1.0, 16)], E3)
        assert v.separation == 0.0 and v.verdict == pl.INCONCLUSIVE

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_invariant_under_relabeling_and_motion(self, seed):
        rng = np.random.default_rng(seed)
        curves = [gen.circle(1.0, 32), gen.circle(0.5, 32, center=(0, 0, 3e5)), gen.circle(2.0, 32, center=(7e5, 0, 0))]
        base = pl.screen_boundary(curves, E3)
        R = Rotation.random(random_state=rng).as_matrix()
        shift = rng.uniform(-100, 100, 3)
        moved = [curves[i] @ R.T + shift for i in rng.permutation(3)]
        other = pl.screen_boundary(moved, E3)
        assert other.verdict == base.verdict
        assert other.separation == pytest.approx(base.separation, rel=1e-9)
        assert other.total_length == pytest.approx(base.total_length, rel=1e-9)  # coordinates near 1e6

    @settings(max_examples=30)
    @given(st.floats(0.0, 1e9), st.floats(1.0, 1e6))
    def test_nonpositive_curvature_ignores_budget(self, budget, dist):
        a = pl.screen_verdict([0.1, 0.2], {(0, 1): dist}, K=-1.0)
        b = pl.screen_verdict([0.1, 0.2], {(0, 1): dist}, K=-1.0, area_budget=budget)
        assert a.verdict == b.verdict and a.bound == b.bound

    def test_positive_curvature_needs_budget(self):
        with pytest.raises(DomainError) as err:
            pl.screen_boundary(gen.circle_pair(0.2, 0.5, 16), S3)
        assert err.value.code == "area-budget-required"

    def test_positive_curvature_with_budget(self):
        small = pl.screen_boundary(gen.circle_pair(0.2, 0.5, 16), S3, area_budget=0.1)
        assert small.alpha == pytest.approx(2 / 3) and small.verdict == pl.INCONCLUSIVE
        large = pl.screen_boundary(gen.circle_pair(0.2, 0.5, 16), S3, area_budget=10.0)
        assert large.bound is None and large.note.startswith("gates fail")

    def test_serializable(self):
        import json
        v = pl.screen_verdict([1.0], {}, K=0.0)
        json.dumps(v.to_dict())
