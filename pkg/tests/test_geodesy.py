import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from confdiam import ambient as amb
from confdiam import doubling as dbl
from confdiam import generators as gen
from confdiam import geodesy as geo
from confdiam.errors import ConnectivityError
from confdiam.surface import ImmersedMesh

E3 = amb.euclidean()
BALL = amb.hyperbolic_ball()


class TestDiameterExamples:
    def test_flat_disk(self):
        d = geo.intrinsic_diameter(gen.disk(1.0, 16, 8), E3, steiner=2).diameter
        assert 2.0 <= d <= 2.0 * 1.03

    def test_hyperbolic_disk(self):
        d = geo.intrinsic_diameter(gen.disk(0.5, 16, 8), BALL, steiner=2).diameter
        target = 2 * math.log(3.0)
        assert target <= d <= target * 1.03

    def test_unit_sphere(self):
        d = geo.intrinsic_diameter(gen.icosphere(3), E3, steiner=1).diameter
        assert math.pi <= d <= math.pi * 1.05

    def test_realizing_pair(self):
        m = gen.disk(1.0, 6)
        res = geo.intrinsic_diameter(m, E3)
        i, j = res.pair
        dist = geo.graph_distances(geo.build_graph(m, E3), i)[0, j]
        assert dist == pytest.approx(res.diameter)
        d, pair = res
        assert d == res.diameter and pair == res.pair

    def test_disconnected(self):
        a = gen.disk(1.0, 2)
        m = ImmersedMesh(np.vstack([a.positions, a.positions + 3.0]),
                         np.vstack([a.faces, a.faces + a.n_vertices]))
        with pytest.raises(ConnectivityError):
            geo.intrinsic_diameter(m, E3)


class TestAgainstFloydWarshall:
    @pytest.mark.parametrize("mesh", [gen.disk(1.0, 5), gen.bumpy_disk(rings=5), gen.annulus(0.4, 1.0, 4, 30),
                                      gen.icosphere(1), gen.catenoid(1.0, 1.0, 16, 6)],
                             ids=["disk", "bumpy", "annulus", "sphere", "catenoid"])
    def test_methods_agree(self, mesh):
        ref = oracles.euclidean_graph_diameter(mesh.positions, mesh.faces)
        bounding = geo.intrinsic_diameter(mesh, E3)
        assert bounding.diameter == pytest.approx(ref, rel=1e-12)
        assert bounding.upper_bound == pytest.approx(ref, rel=1e-12)
        assert geo.intrinsic_diameter(mesh, E3, method="all-pairs", threads=2).diameter == pytest.approx(ref, rel=1e-12)

    def test_capped_search_brackets(self):
        mesh = gen.icosphere(2)
        ref = oracles.euclidean_graph_diameter(mesh.positions, mesh.faces)
        res = geo.intrinsic_diameter(mesh, E3, max_searches=3)
        assert res.n_searches == 3
        assert res.diameter <= ref + 1e-12 <= res.upper_bound + 2e-12

    def test_tolerance_bracket(self):
        mesh = gen.icosphere(2)
        ref = oracles.euclidean_graph_diameter(mesh.positions, mesh.faces)
        res = geo.intrinsic_diameter(mesh, E3, tol=0.1)
        assert res.diameter <= ref + 1e-12
        assert ref <= res.diameter + 0.1 + 1e-12
        assert ref <= res.upper_bound + 1e-12


class TestInvariants:
    @pytest.mark.parametrize("a,mesh", [
        (amb.euclidean(), gen.bumpy_disk(rings=5)),
        (amb.hyperbolic_ball(), gen.spherical_cap(1.0, 0.6, 5)),
        (amb.hyperbolic_half_space(), gen.disk(1.0, 5, center=(0, 0, 1.2))),
        (amb.sphere_stereographic(), gen.spherical_cap(1.2, 1.5, 5)),
    ], ids=["e3", "h3-ball", "h3-half", "s3"])
    def test_intrinsic_dominates_extrinsic(self, a, mesh):
        graph = geo.build_graph(mesh, a)
        rng = np.random.default_rng(0)
        src = rng.choice(mesh.n_vertices, 6, replace=False)
        d = geo.graph_distances(graph, src)
        for row, s in zip(d, src):
            amb_d = amb.ambient_distance(a, np.broadcast_to(mesh.positions[s], mesh.positions.shape), mesh.positions)
            assert np.all(row >= amb_d - 1e-9)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_relabeling(self, seed):
        mesh = gen.bumpy_disk(rings=5)
        perm = np.random.default_rng(seed).permutation(mesh.n_vertices)
        inv = np.argsort(perm)
        relabeled = ImmersedMesh(mesh.positions[perm], inv[mesh.faces])
        a = geo.intrinsic_diameter(mesh, E3).diameter
        b = geo.intrinsic_diameter(relabeled, E3).diameter
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("a,mesh", [(E3, gen.disk(1.0, 6)), (BALL, gen.disk(0.5, 6)),
                                        (E3, gen.catenoid(1.0, 1.0, 24, 8))])
    def test_steiner_never_increases(self, a, mesh):
        # only nested point sets are comparable: k=3 contains the k=1 midpoints
        d0 = geo.intrinsic_diameter(mesh, a).diameter
        d1 = geo.intrinsic_diameter(mesh, a, steiner=1).diameter
        d2 = geo.intrinsic_diameter(mesh, a, steiner=2).diameter
        d3 = geo.intrinsic_diameter(mesh, a, steiner=3).diameter
        assert d1 <= d0 + 1e-12 and d2 <= d0 + 1e-12 and d3 <= d1 + 1e-12

    def test_weights_positive(self):
        g = geo.build_graph(gen.disk(0.5, 4), BALL, steiner=1)
        assert np.all(g.weights > 0)
        assert g.n_nodes > g.n_vertices


class TestMonotonicity:
    @pytest.fixture(scope="class")
    @staticmethod
    def drop():
        return dbl.make_teardrop(0.1)

    def test_disk_double(self, drop):
        disk = gen.disk(1.0, 6)
        double = dbl.build_double(disk, 0.05, drop, 16, E3)
        assert geo.doubling_monotonicity_check(disk, double, E3)

    def test_annulus_double_hyperbolic(self, drop):
        ann = gen.annulus(0.25, 0.5, 3, 36)
        double = dbl.build_double(ann, 0.02, drop, 16, BALL)
        assert geo.doubling_monotonicity_check(ann, double, BALL)

    def test_identity(self):
        sphere = gen.icosphere(1)
        assert geo.doubling_monotonicity_check(sphere, sphere, E3)

    def test_missing_correspondence(self):
        with pytest.raises(ValueError):
            geo.doubling_monotonicity_check(gen.disk(1.0, 3), gen.icosphere(1), E3)

    def test_plain_mesh_with_correspondence(self, drop):
        disk = gen.disk(1.0, 4)
        double = dbl.build_double(disk, 0.05, drop, 16, E3)
        assert geo.doubling_monotonicity_check(disk, double.mesh, E3, correspondence=double.copy_a)
