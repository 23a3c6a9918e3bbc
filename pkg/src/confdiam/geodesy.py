"""Intrinsic distances on meshes under the conformal metric.

Surface distances are shortest paths in a graph whose edges are straight
chart segments lying on the mesh, weighted by their g-length. Every graph
path is a genuine curve on the surface, so graph distances never
underestimate intrinsic distances.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import ambient as amb
from .errors import MeshError
from .surface import ImmersedMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric sparse graph on the mesh vertices (plus optional Steiner nodes).

    The first ``n_vertices`` nodes are the mesh vertices.
    """

    n_vertices: int
    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray

    @property
    def matrix(self):
        i, j = self.edges.T
        m = sparse.coo_matrix((self.weights, (i, j)), shape=(self.n_nodes,) * 2)
        return (m + m.T).tocsr()

    @property
    def max_weight(self):
        return float(self.weights.max())


def default_rule(a):
    return "gauss2" if a.kind == amb.CUSTOM else "exact"


def build_graph(mesh: ImmersedMesh, a: amb.ConformalAmbient, steiner=False, rule=None) -> WeightedGraph:
    """Edge graph of ``mesh``, optionally refined with Steiner points.

    ``steiner=k`` places ``k`` equally spaced points inside every edge
    (``True`` means one midpoint) and joins all boundary points of each face
    by straight chords; the original edges are kept, so refinement never
    lengthens a vertex-to-vertex distance.

    ``rule`` selects the segment quadrature (default: closed form for builtin
    ambients, 2-point Gauss otherwise).
    """
    rule = rule or default_rule(a)
    P = mesh.positions
    a.check_domain(P, "vertex")
    edges = mesh.edges
    nodes = P
    k = int(steiner)
    if k > 0:
        n = mesh.n_vertices
        # k interior points per edge; node id n + e*k + q is point q+1 of k on edge e
        t = np.arange(1, k + 1) / (k + 1)
        e0, e1 = P[mesh.edges[:, 0]], P[mesh.edges[:, 1]]
        pts = e0[:, None, :] + t[None, :, None] * (e1 - e0)[:, None, :]
        nodes = np.concatenate([P, pts.reshape(-1, 3)])
        inv = mesh._edge_inverse.reshape(3, -1).T  # face corner c -> edge (c, c+1)
        F = mesh.faces
        local = [F]
        for c in range(3):
            local.append(n + inv[:, c, None] * k + np.arange(k)[None, :])
        local = np.concatenate(local, axis=1)
        iu, ju = np.triu_indices(local.shape[1], k=1)
        chords = np.stack([local[:, iu].ravel(), local[:, ju].ravel()], axis=1)
        edges = np.unique(np.sort(np.concatenate([edges, chords]), axis=1), axis=0)
    weights = amb.segment_lengths(a, nodes[edges[:, 0]], nodes[edges[:, 1]], rule)
    if not np.all(weights > 0):
        raise MeshError("graph edge with non-positive length", "mesh-degenerate")
    return WeightedGraph(mesh.n_vertices, len(nodes), edges, weights)


def graph_distances(graph: WeightedGraph, sources, limit_to_vertices=True):
    d = csgraph.dijkstra(graph.matrix, directed=False, indices=np.atleast_1d(sources))
    return d[:, : graph.n_vertices] if limit_to_vertices else d


@dataclass(frozen=True)
class DiameterResult:
    """``diameter`` is attained by ``pair``; the graph diameter is at most ``upper_bound``."""

    diameter: float
    pair: tuple
    n_searches: int
    max_edge_weight: float
    upper_bound: float

    def __iter__(self):
        yield self.diameter
        yield self.pair


def _used_vertices(mesh):
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.faces.ravel()] = True
    return used


def intrinsic_diameter(mesh: ImmersedMesh, a: amb.ConformalAmbient, steiner=False, rule=None,
                       method="bounding", threads=1, tol=0.0, rtol=0.0,
                       max_searches=None) -> DiameterResult:
    """Largest graph distance between two mesh vertices, and a pair realizing it.

    ``method="bounding"`` prunes single-source searches with eccentricity
    bounds; it stops once no remaining vertex can beat the best pair by more
    than ``tol + rtol * best`` (both zero means exact). Symmetric surfaces have many vertices
    of equal eccentricity, so a tolerance of about one edge length saves most
    searches there. ``max_searches`` caps the number of searches; the result
    is then a bracket, ``diameter`` (attained) <= true <= ``upper_bound``.
    Near-round closed surfaces, where every eccentricity is close to the
    diameter, are the case that needs it. ``method="all-pairs"`` runs one search per vertex, split
    over ``threads`` workers.
    """
    mesh.require_connected()
    graph = build_graph(mesh, a, steiner=steiner, rule=rule)
    used = _used_vertices(mesh)
    if method == "all-pairs":
        return _diameter_all_pairs(graph, used, threads)
    if method != "bounding":
        raise ValueError(f"unknown diameter method {method!r}")
    return _diameter_bounding(graph, used, tol, rtol, max_searches)


def _diameter_all_pairs(graph, used, threads, chunk=256):
    M = graph.matrix
    ids = np.flatnonzero(used)
    chunks = [ids[k:k + chunk] for k in range(0, len(ids), chunk)]

    def run(src):
        d = csgraph.dijkstra(M, directed=False, indices=src)[:, : graph.n_vertices]
        d[:, ~used] = -np.inf
        flat = int(np.argmax(d))
        r, c = divmod(flat, d.shape[1])
        return d[r, c], (int(src[r]), int(c))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, chunks))
    best = max(results, key=lambda item: item[0])
    return DiameterResult(float(best[0]), tuple(sorted(best[1])), len(ids), graph.max_weight, float(best[0]))


def _diameter_bounding(graph, used, tol=0.0, rtol=0.0, max_searches=None):
    M = graph.matrix
    n = graph.n_vertices
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    candidate = used.copy()
    best, pair, searches = -np.inf, None, 0
    pick_high = True
    ids = np.arange(n)
    while candidate.any() and (max_searches is None or searches < max_searches):
        cand = ids[candidate]
        v = int(cand[np.argmax(upper[cand])] if pick_high else cand[np.argmin(lower[cand])])
        pick_high = not pick_high
        d = csgraph.dijkstra(M, directed=False, indices=v)[:n]
        searches += 1
        if not np.all(np.isfinite(d[used])):
            raise MeshError("graph is disconnected", "mesh-disconnected")
        d = np.where(used, d, -np.inf)
        far = int(np.argmax(d))
        ecc = d[far]
        if ecc > best:
            best, pair = ecc, tuple(sorted((v, far)))
        dv = np.where(used, d, 0.0)
        lower = np.maximum(lower, np.maximum(dv, ecc - dv))
        upper = np.minimum(upper, ecc + dv)
        lower[v] = upper[v] = ecc
        candidate[v] = False
        candidate &= upper > best + tol + rtol * best
    # pruned vertices had upper below the threshold when dropped; searched ones are exact
    bound = max(float(best), float(upper[used].max()))
    return DiameterResult(float(best), pair, searches, graph.max_weight, bound)


def doubling_monotonicity_check(sigma: ImmersedMesh, m_eps, a: amb.ConformalAmbient,
                                correspondence=None, steiner=False, diameters=None) -> bool:
    """Whether ``d(sigma) <= d(M_eps)`` up to twice the largest graph edge weight.

    ``m_eps`` is a :class:`~confdiam.doubling.DoubledMesh` or, with an explicit
    ``correspondence`` (sigma vertex -> M_eps vertex), a plain mesh. Passing
    ``sigma`` itself checks the trivial equality case. Precomputed
    ``(d_sigma, d_m_eps)`` results may be supplied through ``diameters``.
    """
    mesh = getattr(m_eps, "mesh", m_eps)
    if correspondence is None:
        correspondence = getattr(m_eps, "copy_a", None)
    if correspondence is None:
        if m_eps is sigma:
            correspondence = np.arange(sigma.n_vertices)
        else:
            raise ValueError("vertex correspondence between sigma and M_eps is required")
    correspondence = np.asarray(correspondence)
    if len(correspondence) != sigma.n_vertices or not np.allclose(
            mesh.positions[correspondence], sigma.positions, rtol=0, atol=1e-12):
        raise ValueError("correspondence does not map sigma onto M_eps")
    if diameters is None:
        d_sigma = intrinsic_diameter(sigma, a, steiner=steiner)
        d_double = d_sigma if mesh is sigma else intrinsic_diameter(mesh, a, steiner=steiner)
    else:
        d_sigma, d_double = diameters
    tol = 2.0 * max(d_sigma.max_edge_weight, d_double.max_edge_weight)
    return bool(d_sigma.diameter <= d_double.diameter + tol)
