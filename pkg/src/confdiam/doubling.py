"""Doubling a surface with boundary into a closed surface through a thin tube.

The tube around a boundary loop ``gamma`` is
``F(s, t) = gamma(t) + eps * (x(s) e2(t) + y(s) e3(t))`` where ``(x, y)`` is a
closed planar teardrop through the origin leaving along ``+x`` and returning
along ``-x``, ``e2`` is the outward conormal and ``e3 = e1 x e2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import ambient as amb
from . import gates, geodesy, surface
from .errors import ConstructionError, DomainError, MeshError
from .surface import ImmersedMesh

# ---------------------------------------------------------------------------
# planar curves made of straight pieces and circular arcs


@dataclass(frozen=True)
class Piece:
    length: float
    curvature: float  # signed; 0 for straight pieces

    @property
    def turning(self):
        return self.length * self.curvature


@dataclass
class PlanarCurve:
    """Unit-speed planar curve starting at the origin with heading ``+x``.

    ``s, points, tangents, kappa`` hold samples; every junction between
    pieces appears twice with the one-sided curvatures, so trapezoid sums of
    ``|kappa|`` are exact.
    """

    pieces: list
    s: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    eta: float | None = None

    @property
    def length(self):
        return float(sum(p.length for p in self.pieces))

    @property
    def breakpoints(self):
        return np.concatenate([[0.0], np.cumsum([p.length for p in self.pieces])])

    @property
    def analytic_total_abs_curvature(self):
        return float(sum(abs(p.turning) for p in self.pieces))

    def evaluate(self, s):
        """Positions, unit tangents and curvature at arclength values ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return _evaluate_pieces(self.pieces, s)


def _evaluate_pieces(pieces, s, right_limit=None):
    bps = np.concatenate([[0.0], np.cumsum([p.length for p in pieces])])
    idx = np.clip(np.searchsorted(bps, s, side="right") - 1, 0, len(pieces) - 1)
    if right_limit is not None:
        idx = np.where(right_limit, idx, np.clip(np.searchsorted(bps, s, side="left") - 1, 0, len(pieces) - 1))
    # start state of every piece
    starts = np.zeros((len(pieces), 2))
    headings = np.zeros(len(pieces))
    pos, th = np.zeros(2), 0.0
    for i, p in enumerate(pieces):
        starts[i], headings[i] = pos, th
        pos, th = _advance(pos, th, p, p.length)
    local = s - bps[idx]
    k = np.array([pieces[i].curvature for i in idx])
    th0 = headings[idx]
    theta = th0 + k * local
    straight = k == 0.0
    safe_k = np.where(straight, 1.0, k)
    dx = np.where(straight, local * np.cos(th0), (np.sin(theta) - np.sin(th0)) / safe_k)
    dy = np.where(straight, local * np.sin(th0), (np.cos(th0) - np.cos(theta)) / safe_k)
    points = starts[idx] + np.column_stack([dx, dy])
    tangents = np.column_stack([np.cos(theta), np.sin(theta)])
    return points, tangents, k


def _advance(pos, heading, piece, length):
    k = piece.curvature
    if k == 0.0:
        return pos + length * np.array([math.cos(heading), math.sin(heading)]), heading
    th = heading + k * length
    return pos + np.array([math.sin(th) - math.sin(heading), math.cos(heading) - math.cos(th)]) / k, th


def _endpoint(pieces):
    pos, th = np.zeros(2), 0.0
    for p in pieces:
        pos, th = _advance(pos, th, p, p.length)
    return pos, th


def _sample_curve(pieces, n_samples, eta=None):
    b = sum(p.length for p in pieces)
    bps = np.concatenate([[0.0], np.cumsum([p.length for p in pieces])])
    uniform = np.linspace(0.0, b, n_samples)
    inner = bps[1:-1]
    uniform = uniform[~np.isin(uniform, inner)]
    s = np.sort(np.concatenate([uniform, inner, inner]))
    # the first copy of each junction takes the left limit
    right = np.ones(len(s), dtype=bool)
    for x in inner:
        first = np.flatnonzero(s == x)[0]
        right[first] = False
    points, tangents, kappa = _evaluate_pieces(pieces, s, right_limit=right)
    return PlanarCurve(list(pieces), s, points, tangents, kappa, eta)


def circle_curve(radius=1.0, n_samples=256):
    """Full circle traversed counter-clockwise."""
    return _sample_curve([Piece(2 * math.pi * radius, 1.0 / radius)], n_samples)


def semicircle_curve(radius=1.0, n_samples=256):
    """Open half circle (turning pi)."""
    return _sample_curve([Piece(math.pi * radius, 1.0 / radius)], n_samples)


TeardropCurve = PlanarCurve


def teardrop_pieces(eta, lead_out, slant, radius=1.0, tail_radius=None):
    tail_radius = radius if tail_radius is None else tail_radius
    return [
        Piece(lead_out, 0.0),
        Piece(radius * (math.pi + 2 * eta), 1.0 / radius),
        Piece(slant, 0.0),
        Piece(tail_radius * 2 * eta, -1.0 / tail_radius),
    ]


def make_teardrop(eta: float, n_samples: int = 256, tol=1e-9, max_iter=20) -> PlanarCurve:
    """Closed drop with total absolute curvature ``pi + 4 eta``.

    Pieces: a lead-out segment along ``+x``, a left arc turning ``pi + 2 eta``,
    a slant segment and a right arc turning ``2 eta`` back into the origin
    with heading ``-x``. The two segment lengths are found by shooting on the
    closure residual; the result is scaled to unit diameter.
    """
    if not 0.0 < eta < math.pi / 4:
        raise ValueError("eta must lie in (0, pi/4)")
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")

    def residual(lengths):
        return _endpoint(teardrop_pieces(eta, lengths[0], lengths[1]))[0]

    x = np.array([1.0 / eta, 1.0 / eta])
    h = 1e-6
    for _ in range(max_iter):
        r = residual(x)
        scale = sum(p.length for p in teardrop_pieces(eta, *x))
        if np.linalg.norm(r) <= tol * scale:
            break
        J = np.column_stack([(residual(x + h * np.eye(2)[k]) - residual(x - h * np.eye(2)[k])) / (2 * h)
                             for k in range(2)])
        x = x - np.linalg.solve(J, r)
    else:
        raise ConstructionError(f"teardrop closure did not converge for eta={eta} (residual {np.linalg.norm(r):.3g})")
    lead, slant = x
    if lead <= 0 or slant <= 0:
        raise ConstructionError(f"teardrop closure gave negative segment lengths for eta={eta}")
    pieces = teardrop_pieces(eta, lead, slant)
    pts, _, _ = _evaluate_pieces(pieces, np.linspace(0.0, scale, 4097))
    diam = np.max(np.linalg.norm(pts[:, None] - pts[None, ::16], axis=-1))
    pieces = [Piece(p.length / diam, p.curvature * diam) for p in pieces]
    return _sample_curve(pieces, n_samples, eta)


def total_abs_curvature(c: PlanarCurve) -> float:
    """Trapezoid rule for ``int |kappa| ds`` over the curve samples."""
    return float(trapezoid(np.abs(c.kappa), c.s))


def turning_number_total(c: PlanarCurve) -> float:
    """Total signed turning from the sampled tangents (unwrapped heading change)."""
    theta = np.unwrap(np.arctan2(c.tangents[:, 1], c.tangents[:, 0]))
    return float(theta[-1] - theta[0])


def tube_parameters(c: PlanarCurve, s_res: int) -> np.ndarray:
    """``s_res + 1`` arclength nodes including every piece junction.

    Nodes are shared out by length and by turning, so short arcs still get
    several nodes.
    """
    if s_res < 2 * len(c.pieces):
        raise ValueError(f"s_res must be at least {2 * len(c.pieces)}")
    b = c.length
    K = c.analytic_total_abs_curvature
    weight = np.array([0.5 * p.length / b + 0.5 * abs(p.turning) / K for p in c.pieces])
    counts = np.maximum(1 + (np.array([p.curvature for p in c.pieces]) != 0), np.floor(weight * s_res).astype(int))
    while counts.sum() < s_res:
        counts[np.argmax(weight * s_res - counts)] += 1
    while counts.sum() > s_res:
        counts[np.argmax(counts)] -= 1
    bps = c.breakpoints
    nodes = [np.linspace(bps[i], bps[i + 1], counts[i] + 1)[:-1] for i in range(len(c.pieces))]
    return np.concatenate(nodes + [[b]])


# ---------------------------------------------------------------------------
# frames and the doubled surface


@dataclass(frozen=True)
class BoundaryFrame:
    """Orthonormal frame along one boundary loop (rows follow ``loop``)."""

    loop: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


def boundary_frames(mesh: ImmersedMesh) -> list:
    """Tangent, outward conormal and ``e1 x e2`` at every boundary vertex.

    ``e2`` is the mean of the interior edges at the vertex, reversed, with
    its components along ``e1`` and the vertex normal removed.
    """
    if mesh.is_closed:
        raise MeshError("mesh has no boundary", "mesh-closed")
    P = mesh.positions
    bnd_keys = {tuple(sorted(e)) for e in mesh.boundary_half_edges.tolist()}
    adj = mesh.adjacency.tolil().rows
    normals = mesh.vertex_normals
    frames = []
    for loop in mesh.boundary_loops:
        prev = np.roll(loop, 1)
        nxt = np.roll(loop, -1)
        e1 = P[nxt] - P[prev]
        e1 /= np.linalg.norm(e1, axis=1)[:, None]
        e2 = np.empty_like(e1)
        for r, v in enumerate(loop):
            inner = [w for w in adj[v] if (min(v, w), max(v, w)) not in bnd_keys]
            if not inner:
                raise MeshError(f"boundary vertex {v} has no interior edge", "mesh-quality")
            d = P[v] - P[inner].mean(axis=0)
            n = normals[v] - np.dot(normals[v], e1[r]) * e1[r]
            n /= np.linalg.norm(n)
            d = d - np.dot(d, e1[r]) * e1[r] - np.dot(d, n) * n
            norm = np.linalg.norm(d)
            if norm == 0.0:
                raise MeshError(f"conormal undefined at boundary vertex {v}", "mesh-quality")
            e2[r] = d / norm
        e3 = np.cross(e1, e2)
        frames.append(BoundaryFrame(loop, e1, e2, e3))
    return frames


@dataclass(frozen=True)
class DoubledMesh:
    """Closed surface ``copy A + tubes + copy B`` with bookkeeping.

    ``copy_a[v]`` and ``copy_b[v]`` are the indices of sigma's vertex ``v``
    in the two copies; ``tube_faces`` flags tube triangles and
    ``ring_vertices`` the vertices where tubes meet the copies.
    """

    mesh: ImmersedMesh
    sigma: ImmersedMesh
    copy_a: np.ndarray
    copy_b: np.ndarray
    tube_faces: np.ndarray
    tube_vertices: np.ndarray
    ring_vertices: np.ndarray
    eps: float
    drop: PlanarCurve = field(repr=False)

    def vertex_weights(self):
        """Tube share of each vertex: 1 inside the tube, 1/2 on the junction rings."""
        w = np.zeros(self.mesh.n_vertices)
        w[self.tube_vertices] = 1.0
        w[self.ring_vertices] = 0.5
        return w


def build_double(mesh: ImmersedMesh, eps: float, drop: PlanarCurve, s_res: int = 64,
                 a: amb.ConformalAmbient | None = None) -> DoubledMesh:
    """Weld ``mesh``, a tube around each boundary loop and a reversed copy into a closed mesh."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if s_res < 8:
        raise ValueError("s_res must be at least 8")
    if mesh.is_closed:
        raise MeshError("mesh has no boundary to double along", "mesh-closed")
    n = mesh.n_vertices
    P = mesh.positions
    s_nodes = tube_parameters(drop, s_res)
    z, _, _ = drop.evaluate(s_nodes)
    if np.abs(z[0]).max() > 1e-12 or np.abs(z[-1]).max() > 1e-9 * drop.length:
        raise ConstructionError("teardrop must start and end at the origin")
    positions = [P, P]
    faces = [mesh.faces, mesh.faces[:, ::-1] + n]
    tube_face_count = 0
    next_id = 2 * n
    tube_ids = []
    for frame in boundary_frames(mesh):
        loop = frame.loop
        L = len(loop)
        inner_rows = z[1:-1]
        pts = (P[loop][None, :, :]
               + eps * (inner_rows[:, 0, None, None] * frame.e2[None] + inner_rows[:, 1, None, None] * frame.e3[None]))
        pts = pts.reshape(-1, 3)
        row_ids = [loop] + [next_id + r * L + np.arange(L) for r in range(len(inner_rows))] + [loop + n]
        tube_ids.append(np.arange(next_id, next_id + len(pts)))
        next_id += len(pts)
        positions.append(pts)
        tf = []
        for j in range(len(row_ids) - 1):
            lo, hi = row_ids[j], row_ids[j + 1]
            for k in range(L):
                k1 = (k + 1) % L
                a_, b_, d_, e_ = lo[k], lo[k1], hi[k], hi[k1]
                tf += [(b_, a_, d_), (b_, d_, e_)]
        faces.append(np.array(tf))
        tube_face_count += len(tf)
    positions = np.concatenate(positions)
    if a is not None and not np.all(a.contains(positions)):
        raise DomainError("tube leaves the ambient chart; decrease eps")
    all_faces = np.concatenate(faces)
    double = ImmersedMesh(positions, all_faces)
    tube_mask = np.zeros(len(all_faces), dtype=bool)
    tube_mask[2 * mesh.n_faces:] = True
    bnd = np.unique(np.concatenate(mesh.boundary_loops))
    rings = np.concatenate([bnd, bnd + n])
    tube_vertices = np.concatenate(tube_ids) if tube_ids else np.zeros(0, dtype=np.int64)
    return DoubledMesh(double, mesh, np.arange(n), np.arange(n, 2 * n), tube_mask,
                       tube_vertices, rings, float(eps), drop)


def tube_mean_curvature_integral(double: DoubledMesh, a: amb.ConformalAmbient) -> float:
    """``int_T |H| dmu`` restricted to the tube (junction rings weighted 1/2)."""
    density = surface.mean_curvature_density(double.mesh, a)
    return float(np.sum(density * double.vertex_weights()))


def tube_area(double: DoubledMesh, a: amb.ConformalAmbient) -> float:
    return float(np.sum(surface.face_areas(double.mesh, a)[double.tube_faces]))


# ---------------------------------------------------------------------------
# eps -> 0


@dataclass
class ConvergenceRow:
    eps: float
    tube_H: float
    reference: float
    error: float
    tube_area: float
    sigma_H: float
    d_sigma: float
    d_double: float
    d_double_upper: float
    monotone: bool
    rhs_double: float
    diam_bound_ok: bool
    wz_margin: float | None
    wz_verdict: str

    def as_dict(self):
        return dict(self.__dict__)


def convergence_study(mesh: ImmersedMesh, a: amb.ConformalAmbient, drop: PlanarCurve, eps_list,
                      s_res: int = 64, alpha=None, steiner=1, with_diameters=True, max_searches=12):
    """One row per ``eps``: tube curvature vs ``K(z) * length(boundary)`` and the diameter checks.

    The reference uses the sampled total absolute curvature of ``drop`` and
    the g-length of the mesh boundary. The doubled surface is nearly round,
    so its diameter is bracketed with at most ``max_searches`` searches
    (``None`` for exact): monotonicity is judged on the attained lower end,
    the diameter bound on the upper end.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list) or any(x <= y for x, y in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be positive and strictly decreasing")
    kz = total_abs_curvature(drop)
    reference = kz * surface.boundary_length(mesh, a)
    sigma_H = surface.total_mean_curvature(mesh, a)
    d_sigma = geodesy.intrinsic_diameter(mesh, a, steiner=steiner) if with_diameters else None
    rows = []
    for eps in eps_list:
        double = build_double(mesh, eps, drop, s_res, a)
        tube_H = tube_mean_curvature_integral(double, a)
        row = dict(eps=eps, tube_H=tube_H, reference=reference, error=abs(tube_H - reference),
                   tube_area=tube_area(double, a), sigma_H=sigma_H)
        if with_diameters:
            d_double = geodesy.intrinsic_diameter(double.mesh, a, steiner=steiner, max_searches=max_searches)
            wz = gates.wu_zheng_check(double.mesh, a, alpha=alpha, diameter=d_double)
            C = wz.C2alpha if wz.C2alpha is not None else gates.wz_constant(alpha or gates.OPTIMAL_ALPHA)
            rhs = C * (2.0 * sigma_H + tube_H)
            row.update(
                d_sigma=d_sigma.diameter, d_double=d_double.diameter, d_double_upper=d_double.upper_bound,
                monotone=geodesy.doubling_monotonicity_check(mesh, double, a, diameters=(d_sigma, d_double)),
                rhs_double=rhs, diam_bound_ok=bool(d_double.upper_bound <= rhs),
                wz_margin=wz.margin, wz_verdict=wz.verdict,
            )
        else:
            row.update(d_sigma=math.nan, d_double=math.nan, d_double_upper=math.nan, monotone=True, rhs_double=math.nan,
                       diam_bound_ok=True, wz_margin=None, wz_verdict="skipped")
        rows.append(ConvergenceRow(**row))
    return rows
