"""Discrete minimal surfaces with fixed boundary, and boundary screening.

Minimal test surfaces come from descent on the conformal area

    A(x) = sum_f exp(2 phi(c_f)) |f|_delta,   c_f = centroid of f,

over interior vertex positions. The search direction solves a cotangent
stiffness system weighted by the same face factors, so a unit step is the
classical harmonic-map step for the Euclidean case and the line search rarely
has to shrink it.

Screening turns the diameter bound for minimal surfaces into a test on
boundary data alone: a connected spanning surface touches every boundary
component, so its intrinsic diameter is at least the ambient distance between
any two of them.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from . import ambient as amb
from . import gates, generators, geodesy, surface
from .errors import DomainError, GateViolation, MeshError, StalledSolverError
from .surface import ImmersedMesh

logger = logging.getLogger(__name__)

NECK_QUALITY = 1e-3


@dataclass(frozen=True)
class SolverOptions:
    """Settings for :func:`minimize_area`.

    Parameters
    ----------
    max_iters : int
        Iteration cap; hitting it is reported, not raised.
    shrink : float
        Backtracking factor in (0, 1).
    armijo : float
        Sufficient-decrease constant in (0, 1).
    grad_tol : float
        Stop when the sup-norm of the area gradient over interior vertices
        drops below ``grad_tol`` times the mean g-area per face.
    rel_area_tol : float
        Stop when an accepted step lowers the area by less than this fraction.
    max_backtracks : int
        Rejected trial steps allowed per iteration before the solver stalls.
    min_quality : float
        Face quality (inradius / longest edge) below which the neck is
        declared collapsed.
    precondition : bool
        Use the weighted stiffness direction instead of the raw gradient.
    """

    max_iters: int = 400
    shrink: float = 0.5
    armijo: float = 1e-4
    grad_tol: float = 1e-6
    rel_area_tol: float = 1e-11
    max_backtracks: int = 40
    min_quality: float = NECK_QUALITY
    precondition: bool = True

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo must lie in (0, 1)")
        for name in ("max_iters", "grad_tol", "rel_area_tol", "max_backtracks", "min_quality"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveHistory:
    """Per-iteration record of a descent run.

    ``area[k]`` and ``grad_norm[k]`` describe the iterate before step ``k``;
    the last entries describe the returned mesh.
    """

    area: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step: list = field(default_factory=list)
    min_quality: list = field(default_factory=list)
    converged: bool = False
    neck_collapse: bool = False
    reason: str = ""

    @property
    def iterations(self):
        return len(self.step)

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# area functional

def _face_terms(a, P, F):
    p0, p1, p2 = P[F[:, 0]], P[F[:, 1]], P[F[:, 2]]
    cross = np.cross(p1 - p0, p2 - p0)
    area_delta = 0.5 * np.linalg.norm(cross, axis=1)
    c = (p0 + p1 + p2) / 3.0
    return cross, area_delta, c, np.exp(2.0 * a.phi(c))


def area_functional(positions, faces, a: amb.ConformalAmbient) -> float:
    """Conformal area with the factor sampled at face centroids."""
    P = np.asarray(positions, dtype=float)
    F = np.asarray(faces)
    _, area_delta, _, w = _face_terms(a, P, F)
    return float(np.sum(w * area_delta))


def area_gradient(positions, faces, a: amb.ConformalAmbient) -> np.ndarray:
    """Exact gradient of :func:`area_functional` with respect to every vertex, shape (n, 3)."""
    P = np.asarray(positions, dtype=float)
    F = np.asarray(faces)
    cross, area_delta, c, w = _face_terms(a, P, F)
    n = cross / (2.0 * area_delta[:, None])
    # the centroid moves by 1/3 of each corner's displacement
    shared = (2.0 / 3.0) * (w * area_delta)[:, None] * a.grad_phi(c)
    G = np.zeros_like(P)
    for k in range(3):
        opposite = P[F[:, (k + 2) % 3]] - P[F[:, (k + 1) % 3]]
        np.add.at(G, F[:, k], 0.5 * w[:, None] * np.cross(n, opposite) + shared)
    return G


def _weighted_stiffness(P, F, w):
    """Cotangent stiffness with per-face weights (symmetric positive semidefinite)."""
    n = len(P)
    rows, cols, vals = [], [], []
    E = [P[F[:, (c + 2) % 3]] - P[F[:, (c + 1) % 3]] for c in range(3)]
    dbl = np.linalg.norm(np.cross(E[0], E[1]), axis=1)
    for c in range(3):
        u = P[F[:, (c + 1) % 3]] - P[F[:, c]]
        v = P[F[:, (c + 2) % 3]] - P[F[:, c]]
        cot = np.sum(u * v, axis=1) / dbl
        i, j = F[:, (c + 1) % 3], F[:, (c + 2) % 3]
        wij = 0.5 * w * cot
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-wij, -wij, wij, wij]
    return sparse.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n, n))


def _descent_direction(P, F, a, G, normals, precondition):
    """Normal descent direction at interior vertices (``G`` and ``normals`` restricted to them).

    Tangential motion changes only the discretization, and the discrete
    conformal area can be lowered by sliding vertices toward small factors,
    so both the gradient and the step are projected onto vertex normals.
    """
    Gn = np.sum(G * normals, axis=1)[:, None] * normals
    if precondition is not None:
        try:
            d = precondition.solve(-Gn)
        except RuntimeError:
            d = -Gn
    else:
        d = -Gn
    d = np.sum(d * normals, axis=1)[:, None] * normals
    if not np.all(np.isfinite(d)) or np.sum(d * G) >= 0:
        d = -Gn
    return d, Gn


def _admissible(a, P_new, F, normals_old):
    if not np.all(np.isfinite(P_new)) or not np.all(a.contains(P_new)):
        return False
    cross = np.cross(P_new[F[:, 1]] - P_new[F[:, 0]], P_new[F[:, 2]] - P_new[F[:, 0]])
    return bool(np.all(np.sum(cross * normals_old, axis=1) > 0.0))


def minimize_area(mesh: ImmersedMesh, a: amb.ConformalAmbient, opts: SolverOptions | None = None):
    """Descend the conformal area with the boundary held fixed.

    Parameters
    ----------
    mesh : ImmersedMesh
        Initial surface; needs at least one boundary loop in every component.
    a : ConformalAmbient
    opts : SolverOptions, optional

    Returns
    -------
    mesh : ImmersedMesh
        Final iterate (same connectivity as the input).
    history : SolveHistory
        ``converged`` or ``neck_collapse`` tells how the run ended; a run that
        hits ``max_iters`` has neither flag set.

    Raises
    ------
    StalledSolverError
        Every trial step left the domain, flipped a face or failed to
        decrease the area; the error carries the last mesh and history.
    """
    opts = opts or SolverOptions()
    if mesh.is_closed:
        raise MeshError("minimize_area needs a fixed boundary", "mesh-closed")
    a.check_domain(mesh.positions, "vertex")
    F = mesh.faces
    interior = mesh.interior_vertices
    P = mesh.positions.copy()
    history = SolveHistory()
    if len(interior) == 0:
        history.converged, history.reason = True, "no interior vertices"
        return mesh, history
    A = area_functional(P, F, a)
    t_start = 1.0
    for it in range(opts.max_iters + 1):
        current = mesh.with_positions(P)
        normals = current.vertex_normals[interior]
        G = area_gradient(P, F, a)[interior]
        factor = None
        if opts.precondition:
            _, _, _, w = _face_terms(a, P, F)
            K = _weighted_stiffness(P, F, w)[interior][:, interior].tocsc()
            try:
                factor = splu(K)
            except RuntimeError:
                factor = None
        d, Gn = _descent_direction(P, F, a, G, normals, factor)
        gnorm = float(np.abs(Gn).max())
        quality = float(surface.face_quality(current).min())
        history.area.append(A)
        history.grad_norm.append(gnorm)
        history.min_quality.append(quality)
        if quality < opts.min_quality:
            history.neck_collapse, history.reason = True, f"face quality {quality:.2e} below threshold"
            break
        if gnorm <= opts.grad_tol * A / len(F):
            history.converged, history.reason = True, "gradient tolerance"
            break
        if it == opts.max_iters:
            history.reason = "iteration limit"
            break
        slope = float(np.sum(d * G))
        if -slope <= opts.rel_area_tol * A:
            history.converged, history.reason = True, "predicted decrease below tolerance"
            break
        face_n = current._face_cross
        t = t_start
        for _ in range(opts.max_backtracks):
            trial = P.copy()
            trial[interior] += t * d
            if _admissible(a, trial, F, face_n):
                A_trial = area_functional(trial, F, a)
                if A_trial <= A + opts.armijo * t * slope:
                    break
            t *= opts.shrink
        else:
            history.reason = "no admissible step"
            raise StalledSolverError(f"no admissible descent step after iteration {it}", current, history)
        history.step.append(t)
        P, A = trial, A_trial
        t_start = min(1.0, t / opts.shrink)
    return mesh.with_positions(P), history


# ---------------------------------------------------------------------------
# initial surfaces spanning given curves

def _resample_closed(curve, t):
    """Points at arc-length fractions ``t`` along the closed polyline ``curve``."""
    closed = np.vstack([curve, curve[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    return np.column_stack([np.interp(t, s, closed[:, k]) for k in range(3)])


def span_disk(curve, rings=8):
    """Disk-type mesh coned from the centroid of ``curve``, outer ring = ``curve`` exactly."""
    curve = np.asarray(curve, dtype=float)
    n = len(curve)
    if n < 3:
        raise DomainError("a boundary curve needs at least 3 points", "curve-short")
    closed = np.vstack([curve, curve[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    t_outer = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
    center = curve.mean(axis=0)
    pos = [center]
    ids, angs = [np.array([0])], [np.array([0.0])]
    faces = []
    for k in range(1, rings + 1):
        if k == rings:
            t, pts = t_outer, curve
        else:
            count = max(3, int(round(n * k / rings)))
            t = np.arange(count) / count
            pts = center + (k / rings) * (_resample_closed(curve, t) - center)
        ring = np.arange(len(pos), len(pos) + len(pts))
        pos.extend(pts)
        if k == 1:
            faces += [(0, ring[m], ring[(m + 1) % len(ring)]) for m in range(len(ring))]
        else:
            faces += generators._ring_strip(ids[-1], ring, angs[-1], 2 * math.pi * t)
        ids.append(ring)
        angs.append(2 * math.pi * t)
    return ImmersedMesh(np.array(pos), faces)


def span_tube(curve_a, curve_b, n_along=16):
    """Tube joining two closed polylines with equal point counts."""
    curve_a = np.asarray(curve_a, dtype=float)
    curve_b = np.asarray(curve_b, dtype=float)
    if len(curve_a) != len(curve_b):
        raise DomainError("tube spanning needs curves with equal point counts", "curve-mismatch")
    return generators.cylinder_between(curve_a, curve_b, n_along)


def catenoid_critical_ratio(tol=1e-14) -> float:
    """Largest ``height / radius`` of coaxial equal circles spanned by a catenoid.

    With ``u = h / 2a`` the circles need ``r = a cosh u``, so ``h / r = 2u / cosh u``,
    maximal where ``coth u = u``; that root is found by bisection on (1, 2).
    """
    lo, hi = 1.0 + 1e-12, 2.0
    f = lambda u: 1.0 / math.tanh(u) - u  # noqa: E731
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    u = 0.5 * (lo + hi)
    return 2.0 * u / math.cosh(u)


# ---------------------------------------------------------------------------
# screening

NO_SURFACE = "no-connected-surface"
INCONCLUSIVE = "inconclusive"


@dataclass
class ScreenVerdict:
    """Outcome of screening a boundary for connected minimal spanning surfaces.

    ``verdict`` is ``"no-connected-surface"`` exactly when ``separation``
    exceeds ``bound``.
    """

    component_lengths: list
    total_length: float
    pair_distances: dict
    separation: float
    bound: float | None
    verdict: str
    alpha: float | None
    C2alpha: float | None
    area_budget: float | None
    note: str = ""

    def to_dict(self):
        out = asdict(self)
        out["pair_distances"] = {f"{i},{j}": d for (i, j), d in self.pair_distances.items()}
        for key in ("separation", "bound", "total_length"):
            if isinstance(out[key], float) and not math.isfinite(out[key]):
                out[key] = None if math.isnan(out[key]) else "inf"
        return out


def screen_verdict(lengths, pair_distances, K, alpha=None, area_budget=None, inj=math.inf,
                   strict=False) -> ScreenVerdict:
    """Screen from measured component lengths and pairwise ambient distances.

    Parameters
    ----------
    lengths : sequence of float
        g-lengths of the boundary components.
    pair_distances : dict
        ``(i, j) -> min ambient distance`` for component pairs ``i < j``.
    K : float
        Upper sectional curvature bound of the ambient.
    alpha : float, optional
        Fixed exponent; by default the largest admissible one up to 2/3.
    area_budget : float, optional
        Area of some competitor; required when ``K > 0``.
    """
    lengths = [float(x) for x in lengths]
    total = float(sum(lengths))
    pair_distances = {tuple(sorted(k)): float(v) for k, v in dict(pair_distances).items()}
    separation = max(pair_distances.values(), default=0.0)
    if K > 0 and area_budget is None:
        raise DomainError("a positive curvature bound needs an area budget", "area-budget-required")
    area = float(area_budget) if K > 0 else 0.0
    base = dict(component_lengths=lengths, total_length=total, pair_distances=pair_distances,
                separation=separation, area_budget=area_budget)
    try:
        if alpha is None:
            alpha, C = gates.optimal_alpha(area, K, strict, inj, doubled=True)
        else:
            star, starstar = gates.check_gates(area, K, inj, alpha, strict, doubled=True)
            if not (star and starstar):
                raise GateViolation(f"gates fail for alpha = {alpha}")
            C = gates.wz_constant(alpha)
    except GateViolation as exc:
        return ScreenVerdict(**base, bound=None, verdict=INCONCLUSIVE, alpha=None, C2alpha=None,
                             note=f"gates fail: {exc}")
    bound = C * math.pi * total
    note = "" if len(lengths) > 1 else "single component"
    verdict = NO_SURFACE if separation > bound else INCONCLUSIVE
    return ScreenVerdict(**base, bound=bound, verdict=verdict, alpha=float(alpha), C2alpha=float(C), note=note)


def _min_distance(a, X, Y, block=256):
    best = math.inf
    for k in range(0, len(X), block):
        P = X[k:k + block, None, :]
        d = amb.ambient_distance(a, np.broadcast_to(P, (P.shape[0], len(Y), 3)),
                                 np.broadcast_to(Y[None], (P.shape[0], len(Y), 3)))
        best = min(best, float(np.min(d)))
    return best


def screen_boundary(curves, a: amb.ConformalAmbient, alpha=None, area_budget=None, strict=False,
                    threads=1) -> ScreenVerdict:
    """Rule out connected minimal surfaces spanning ``curves`` when they are too far apart.

    Each curve is a closed polyline (no repeated endpoint). Lengths use the
    closed-form segment rule for builtin ambients.
    """
    curves = [np.asarray(c, dtype=float) for c in curves]
    if not curves:
        raise DomainError("no boundary components given", "curve-empty")
    for c in curves:
        if c.ndim != 2 or c.shape[1] != 3 or len(c) < 3:
            raise DomainError("each component must be an array of at least 3 points", "curve-shape")
        a.check_domain(c, "curve point")
    rule = geodesy.default_rule(a)
    lengths = [amb.curve_length(a, c, closed=True, rule=rule) for c in curves]
    pairs = list(combinations(range(len(curves)), 2))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        dists = list(pool.map(lambda ij: _min_distance(a, curves[ij[0]], curves[ij[1]]), pairs))
    inj = a.injectivity_radius(np.concatenate(curves))
    return screen_verdict(lengths, dict(zip(pairs, dists)), a.K_upper, alpha, area_budget, inj, strict)
