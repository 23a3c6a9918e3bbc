"""Immersed triangle meshes and their measure / curvature quantities.

Mean curvature uses the trace convention: the discrete mean curvature vector
of the unit sphere points inward with length 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import ambient as amb
from .errors import ConnectivityError, MeshError

logger = logging.getLogger(__name__)

DEGENERATE_AREA_RATIO = 1e-12


class ImmersedMesh:
    """Oriented triangle mesh of an immersed compact surface, possibly with boundary.

    Parameters
    ----------
    positions : array_like, shape (n, 3)
        Vertex positions in chart coordinates.
    faces : array_like, shape (m, 3)
        Consistently oriented vertex triples.
    validate : bool
        Check the manifold, orientation and non-degeneracy invariants.

    Notes
    -----
    Instances are treated as immutable; derived data is cached on first use.
    Boundary loops are oriented so that the surface lies to their left.
    """

    def __init__(self, positions, faces, validate=True):
        self.positions = np.array(positions, dtype=float)
        self.faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
        self.positions.setflags(write=False)
        self.faces.setflags(write=False)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise MeshError("positions must have shape (n, 3)", "mesh-shape")
        if validate:
            self.validate()

    def __repr__(self):
        return (f"ImmersedMesh(n_vertices={self.n_vertices}, n_faces={self.n_faces}, "
                f"boundary_loops={len(self.boundary_loops)})")

    @property
    def n_vertices(self):
        return len(self.positions)

    @property
    def n_faces(self):
        return len(self.faces)

    # -- topology ---------------------------------------------------------

    def validate(self):
        F = self.faces
        if len(F) == 0:
            raise MeshError("mesh has no faces", "mesh-empty")
        if F.min() < 0 or F.max() >= self.n_vertices:
            raise MeshError("face index out of range", "mesh-index")
        if np.any((F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 0] == F[:, 2])):
            raise MeshError("face with repeated vertex", "mesh-degenerate")
        if not np.all(np.isfinite(self.positions)):
            raise MeshError("non-finite vertex position", "mesh-nonfinite")
        counts = np.bincount(self._edge_inverse, minlength=len(self.edges))
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two faces", "mesh-nonmanifold")
        half = self._half_edges
        keys = half[:, 0] * self.n_vertices + half[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise MeshError("inconsistent face orientation", "mesh-orientation")
        scale = np.ptp(self.positions[np.unique(F)], axis=0).max()
        if np.min(self.face_areas_delta) <= DEGENERATE_AREA_RATIO * scale**2:
            raise MeshError("degenerate face (near-zero area)", "mesh-degenerate")
        self.boundary_loops  # raises on pinched boundaries

    @cached_property
    def _half_edges(self):
        F = self.faces
        return np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])

    @cached_property
    def _edge_data(self):
        sorted_half = np.sort(self._half_edges, axis=1)
        edges, inverse = np.unique(sorted_half, axis=0, return_inverse=True)
        return edges, inverse.ravel()

    @property
    def edges(self):
        """Unique undirected edges, shape (E, 2)."""
        return self._edge_data[0]

    @property
    def _edge_inverse(self):
        return self._edge_data[1]

    @cached_property
    def boundary_half_edges(self):
        counts = np.bincount(self._edge_inverse, minlength=len(self.edges))
        return self._half_edges[counts[self._edge_inverse] == 1]

    @cached_property
    def boundary_loops(self):
        """Cyclic vertex sequences of the boundary, surface to the left."""
        nxt = {}
        for u, v in self.boundary_half_edges.tolist():
            if u in nxt:
                raise MeshError(f"boundary pinched at vertex {u}", "mesh-nonmanifold")
            nxt[u] = v
        loops, seen = [], set()
        for start in sorted(nxt):
            if start in seen:
                continue
            loop, v = [], start
            while v not in seen:
                seen.add(v)
                loop.append(v)
                v = nxt[v]
            if v != start:
                raise MeshError("open boundary chain", "mesh-nonmanifold")
            loops.append(np.array(loop, dtype=np.int64))
        return loops

    @property
    def is_closed(self):
        return len(self.boundary_half_edges) == 0

    @cached_property
    def boundary_mask(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_half_edges.ravel()] = True
        return mask

    @cached_property
    def interior_vertices(self):
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.faces.ravel()] = True
        return np.flatnonzero(used & ~self.boundary_mask)

    @cached_property
    def adjacency(self):
        e = self.edges
        n = self.n_vertices
        data = np.ones(2 * len(e))
        return sparse.csr_matrix((data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n))

    @property
    def n_components(self):
        used = np.unique(self.faces)
        n, labels = csgraph.connected_components(self.adjacency, directed=False)
        return len(np.unique(labels[used]))

    @property
    def is_connected(self):
        return self.n_components == 1

    def require_connected(self):
        if not self.is_connected:
            raise ConnectivityError(f"mesh has {self.n_components} connected components")

    def euler_characteristic(self):
        used = len(np.unique(self.faces))
        return used - len(self.edges) + self.n_faces

    # -- Euclidean geometry ------------------------------------------------

    @cached_property
    def _face_cross(self):
        P = self.positions
        F = self.faces
        return np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])

    @cached_property
    def face_areas_delta(self):
        return 0.5 * np.linalg.norm(self._face_cross, axis=1)

    @cached_property
    def face_normals(self):
        return self._face_cross / (2.0 * self.face_areas_delta[:, None])

    @cached_property
    def centroids(self):
        return self.positions[self.faces].mean(axis=1)

    @cached_property
    def corner_cotangents(self):
        """``cot`` of the angle at each face corner, shape (m, 3)."""
        P = self.positions[self.faces]
        out = np.empty((self.n_faces, 3))
        dbl = 2.0 * self.face_areas_delta
        for c in range(3):
            u = P[:, (c + 1) % 3] - P[:, c]
            v = P[:, (c + 2) % 3] - P[:, c]
            out[:, c] = np.sum(u * v, axis=1) / dbl
        return out

    @cached_property
    def corner_angles(self):
        P = self.positions[self.faces]
        out = np.empty((self.n_faces, 3))
        for c in range(3):
            u = P[:, (c + 1) % 3] - P[:, c]
            v = P[:, (c + 2) % 3] - P[:, c]
            out[:, c] = np.arctan2(np.linalg.norm(np.cross(u, v), axis=1), np.sum(u * v, axis=1))
        return out

    @cached_property
    def vertex_normals(self):
        """Angle-weighted average of incident face normals."""
        acc = np.zeros((self.n_vertices, 3))
        for c in range(3):
            np.add.at(acc, self.faces[:, c], self.corner_angles[:, c, None] * self.face_normals)
        norm = np.linalg.norm(acc, axis=1)
        norm[norm == 0.0] = 1.0
        return acc / norm[:, None]

    @cached_property
    def _mixed_area_data(self):
        """Meyer-type mixed areas with a barycentric fallback for degenerate stars."""
        F = self.faces
        P = self.positions
        A = self.face_areas_delta
        cot = self.corner_cotangents
        obtuse = cot < 0.0
        any_obtuse = obtuse.any(axis=1)
        per_corner = np.empty((self.n_faces, 3))
        for c in range(3):
            j, k = (c + 1) % 3, (c + 2) % 3
            eij2 = np.sum((P[F[:, j]] - P[F[:, c]]) ** 2, axis=1)
            eik2 = np.sum((P[F[:, k]] - P[F[:, c]]) ** 2, axis=1)
            voronoi = (eij2 * cot[:, k] + eik2 * cot[:, j]) / 8.0
            per_corner[:, c] = np.where(any_obtuse, np.where(obtuse[:, c], A / 2.0, A / 4.0), voronoi)
        mixed = np.zeros(self.n_vertices)
        bary = np.zeros(self.n_vertices)
        for c in range(3):
            np.add.at(mixed, F[:, c], per_corner[:, c])
            np.add.at(bary, F[:, c], A / 3.0)
        fallback = ~(mixed > DEGENERATE_AREA_RATIO * bary) & (bary > 0)
        if np.any(fallback):
            logger.warning("barycentric area fallback at %d vertices", int(fallback.sum()))
        return np.where(fallback, bary, mixed), np.flatnonzero(fallback)

    @property
    def mixed_areas(self):
        return self._mixed_area_data[0]

    @cached_property
    def cotan_laplacian(self):
        """Symmetric cotangent stiffness ``W`` with ``(W x)_i = 1/2 sum (cot a + cot b)(x_j - x_i)``."""
        F = self.faces
        cot = self.corner_cotangents
        rows, cols, vals = [], [], []
        for c in range(3):
            i, j = F[:, (c + 1) % 3], F[:, (c + 2) % 3]
            w = 0.5 * cot[:, c]
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        W = sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_vertices,) * 2)
        return W - sparse.diags(np.asarray(W.sum(axis=1)).ravel())

    def with_positions(self, positions):
        return ImmersedMesh(positions, self.faces, validate=False)


@dataclass(frozen=True)
class CurvatureField:
    """Per-vertex curvature data; boundary vertices carry NaN curvature.

    ``H_conf_norm`` is ``|H|`` measured in the conformal metric (equal to
    ``|H_delta|`` for the Euclidean ambient).
    """

    H_delta: np.ndarray
    H_conf_norm: np.ndarray
    normals: np.ndarray
    mixed_areas: np.ndarray
    fallback_vertices: np.ndarray


def area(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> float:
    """g-area: sum over faces of ``exp(2 phi(centroid)) * Euclidean area``."""
    a.check_domain(mesh.positions, "vertex")
    return float(np.sum(np.exp(2.0 * a.phi(mesh.centroids)) * mesh.face_areas_delta))


def face_areas(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> np.ndarray:
    return np.exp(2.0 * a.phi(mesh.centroids)) * mesh.face_areas_delta


def vertex_areas(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> np.ndarray:
    """g-measure of the mixed dual cells, conformal factor sampled at the vertex."""
    return np.exp(2.0 * a.phi(mesh.positions)) * mesh.mixed_areas


def boundary_length(mesh: ImmersedMesh, a: amb.ConformalAmbient, rule="gauss2") -> float:
    """Total g-length of all boundary loops; 0.0 for a closed mesh (check ``mesh.is_closed``)."""
    return float(sum(loop_lengths(mesh, a, rule)))


def loop_lengths(mesh: ImmersedMesh, a: amb.ConformalAmbient, rule="gauss2"):
    return [amb.curve_length(a, mesh.positions[loop], closed=True, rule=rule)
            for loop in mesh.boundary_loops]


def mean_curvature_delta(mesh: ImmersedMesh) -> CurvatureField:
    """Euclidean mean curvature vectors from the cotangent Laplacian."""
    return mean_curvature(mesh, amb.euclidean())


def mean_curvature(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> CurvatureField:
    """Curvature field with ``|H|_g = exp(-phi) |H_delta - 2 (D phi)^perp|``."""
    P = mesh.positions
    a.check_domain(P, "vertex")
    mixed, fallback = mesh._mixed_area_data
    Hd = np.full((mesh.n_vertices, 3), np.nan)
    inner = mesh.interior_vertices
    lap = mesh.cotan_laplacian @ P
    Hd[inner] = lap[inner] / mixed[inner, None]
    n = mesh.vertex_normals
    Hnorm = np.full(mesh.n_vertices, np.nan)
    Hnorm[inner] = _conformal_h_norm(a, P[inner], Hd[inner], n[inner])
    return CurvatureField(Hd, Hnorm, n, mixed, fallback)


def _conformal_h_vector(a, points, H_delta, normals):
    """``H_delta - 2 (D phi)^perp`` with the normal part taken along ``normals``."""
    g = a.grad_phi(points)
    return H_delta - 2.0 * np.sum(g * normals, axis=1)[:, None] * normals


def _conformal_h_norm(a, points, H_delta, normals):
    vec = _conformal_h_vector(a, points, H_delta, normals)
    return np.exp(-a.phi(points)) * np.linalg.norm(vec, axis=1)


def mean_curvature_density(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> np.ndarray:
    """Per-vertex ``|H| dmu`` in the conformal metric; zero on boundary vertices.

    Equals ``exp(phi) |H_delta - 2 (D phi)^perp|_delta * mixed_area_delta``.
    """
    P = mesh.positions
    a.check_domain(P, "vertex")
    out = np.zeros(mesh.n_vertices)
    inner = mesh.interior_vertices
    mixed = mesh.mixed_areas
    lap = mesh.cotan_laplacian @ P
    Hd = lap[inner] / mixed[inner, None]
    vec = _conformal_h_vector(a, P[inner], Hd, mesh.vertex_normals[inner])
    out[inner] = np.exp(a.phi(P[inner])) * np.linalg.norm(vec, axis=1) * mixed[inner]
    return out


def total_mean_curvature(mesh: ImmersedMesh, a: amb.ConformalAmbient) -> float:
    """Discrete ``int |H| dmu`` over interior vertices, in the conformal metric."""
    return float(np.sum(mean_curvature_density(mesh, a)))


def face_quality(mesh: ImmersedMesh) -> np.ndarray:
    """Inradius over longest edge; ``sqrt(3)/6`` for an equilateral triangle."""
    P = mesh.positions[mesh.faces]
    lens = np.stack([np.linalg.norm(P[:, (c + 1) % 3] - P[:, c], axis=1) for c in range(3)], axis=1)
    inradius = 2.0 * mesh.face_areas_delta / lens.sum(axis=1)
    return inradius / lens.max(axis=1)
