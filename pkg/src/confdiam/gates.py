"""Smallness gates, Sobolev and diameter constants, and inequality reports.

``omega_m`` is the volume of the unit m-ball, so ``omega_2 = pi``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ambient as amb
from . import geodesy, surface
from .errors import GateViolation, MeshError

WZ_CAP = 1e18
OPTIMAL_ALPHA = 2.0 / 3.0
STRICT_SHRINK = 1e-9
GATE_RTOL = 1e-12


class ConstantOverflowWarning(RuntimeWarning):
    """The diameter constant hit its cap near the poles ``alpha -> 0, 1``."""


def unit_ball_volume(m: int) -> float:
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def wz_constant(alpha: float) -> float:
    """Closed-surface diameter constant ``576 pi / (alpha^2 (1 - alpha))`` for m = 2.

    Values above ``WZ_CAP`` are capped and a :class:`ConstantOverflowWarning` is issued.
    """
    _check_alpha(alpha)
    value = 576.0 * math.pi / (alpha * alpha * (1.0 - alpha))
    if not value <= WZ_CAP:
        warnings.warn(f"C(2, {alpha}) exceeds {WZ_CAP:g}; capped", ConstantOverflowWarning, stacklevel=2)
        return WZ_CAP
    return value


def hs_constant(m: int, alpha: float, K: float) -> float:
    """Sobolev constant ``c(m, alpha)``; the ``pi/2`` factor applies when ``K >= 0``."""
    if m < 2:
        raise ValueError("the Sobolev constant needs m >= 2")
    _check_alpha(alpha)
    c = (2.0 ** (m - 2) / alpha * (1.0 - alpha) ** (-1.0 / m) * m / (m - 1)
         * unit_ball_volume(m) ** (-1.0 / m))
    return c * math.pi / 2.0 if K >= 0 else c


def _gate_ratio(K, alpha, area, m=2):
    """``K (1 - alpha)^{-2/m} (area / omega_m)^{2/m}``; the arcsin argument squared."""
    return K * (1.0 - alpha) ** (-2.0 / m) * (area / unit_ball_volume(m)) ** (2.0 / m)


def rho0(alpha: float, area2: float, K: float, m: int = 2) -> float:
    """Radius ``rho_0`` built from ``alpha``, the area entering the gate, and ``K``.

    ``area2`` is the area of the closed surface the gate is about (twice
    ``|Sigma|`` for a doubled surface).
    """
    _check_alpha(alpha)
    if not area2 > 0:
        raise ValueError("area must be positive")
    base = (1.0 - alpha) ** (-1.0 / m) * (area2 / unit_ball_volume(m)) ** (1.0 / m)
    if K <= 0:
        return base
    arg = math.sqrt(K) * base
    if arg > 1.0 + GATE_RTOL:
        raise GateViolation(f"arcsin argument {arg:.6g} > 1: the area gate fails for alpha={alpha}")
    return math.asin(min(arg, 1.0)) / math.sqrt(K)


def check_gates(area: float, K: float, inj: float, alpha: float, strict: bool = False, m: int = 2,
                doubled: bool = True):
    """``(star_ok, starstar_ok)`` for a surface of area ``area``.

    With ``doubled`` the gate quantities use ``2 * area`` (surfaces with
    boundary, via their double); otherwise ``area`` itself (closed surfaces).
    ``strict`` selects ``<`` instead of ``<=``. Both compare with a relative
    slack of ``GATE_RTOL`` so that exact equality survives rounding.
    """
    _check_alpha(alpha)
    gate_area = 2.0 * area if doubled else area
    ratio = _gate_ratio(K, alpha, gate_area, m)
    if strict:
        leq = lambda x, y: x < y * (1.0 - GATE_RTOL)  # noqa: E731
    else:
        leq = lambda x, y: x <= y * (1.0 + GATE_RTOL)  # noqa: E731
    star = bool(leq(ratio, 1.0))
    if not star:
        return star, False
    # rho_0 -> 0 with the area, so a null surface meets the radius gate
    if gate_area <= 0 or math.isinf(inj):
        return star, True
    return star, bool(leq(2.0 * rho0(alpha, gate_area, K, m), inj))


def alpha_cap(area: float, K: float, inj: float, doubled: bool = True) -> float:
    """Largest ``alpha`` satisfying both gates (non-strict), or ``1.0`` when unconstrained."""
    gate_area = 2.0 * area if doubled else area
    cap = 1.0
    if K > 0:
        cap = min(cap, 1.0 - K * gate_area / math.pi)
        if math.isfinite(inj) and inj * math.sqrt(K) / 2.0 < math.pi / 2.0:
            s = math.sin(inj * math.sqrt(K) / 2.0)
            cap = min(cap, 1.0 - K * gate_area / (math.pi * s * s))
    elif math.isfinite(inj):
        cap = min(cap, 1.0 - 4.0 * gate_area / (math.pi * inj * inj))
    return cap


def optimal_alpha(area: float, K: float, strict: bool = False, inj: float = math.inf,
                  doubled: bool = True):
    """``(alpha, C(2, alpha))`` minimizing the constant subject to the gates.

    ``1 / (alpha^2 (1 - alpha))`` decreases on ``(0, 2/3]``, so the answer is
    ``min(2/3, cap)``. In strict mode a binding cap is pulled inward,
    ``1 - alpha`` growing by a relative ``STRICT_SHRINK``, so that strict
    inequalities hold.
    """
    cap = alpha_cap(area, K, inj, doubled)
    if cap <= 0.0:
        raise GateViolation(f"no alpha in (0, 1) satisfies the gates for area {area:.6g}, K={K}")
    alpha = min(OPTIMAL_ALPHA, cap)
    if strict and alpha == cap:
        alpha = 1.0 - (1.0 - cap) * (1.0 + STRICT_SHRINK)
    star, starstar = check_gates(area, K, inj, alpha, strict, doubled=doubled)
    if not (star and starstar):
        raise GateViolation(f"gates fail at the capped alpha {alpha:.6g}")
    return alpha, wz_constant(alpha)


# ---------------------------------------------------------------------------
# reports

@dataclass
class GateReport:
    """All gate quantities and the inequality margin for one surface.

    ``to_json`` uses these field names verbatim.
    """

    area: float
    K_upper: float
    alpha: float | None
    rho0: float | None
    star_ok: bool
    starstar_ok: bool
    strict_mode: bool
    C2alpha: float | None = None
    total_H: float | None = None
    boundary_len: float | None = None
    diameter: float | None = None
    rhs: float | None = None
    margin: float | None = None
    verdict: str = "ok"
    diameter_pair: list | None = None
    extra: dict = field(default_factory=dict)

    @property
    def applicable(self):
        return self.verdict in ("ok", "violated")

    def to_dict(self):
        out = asdict(self)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=False, **kw)


def _resolve_alpha(area, K, inj, alpha, strict, doubled):
    """Chosen or optimized alpha plus gate flags; alpha is None when no alpha is admissible."""
    if alpha is None:
        try:
            alpha, _ = optimal_alpha(area, K, strict, inj, doubled)
        except GateViolation:
            return None, False, False
    _check_alpha(alpha)
    star, starstar = check_gates(area, K, inj, alpha, strict, doubled=doubled)
    return alpha, star, starstar


def _rho0_or_none(alpha, area2, K):
    if alpha is None or area2 <= 0:
        return None
    try:
        return rho0(alpha, area2, K)
    except GateViolation:
        return None


def main_inequality_report(mesh, a: amb.ConformalAmbient, alpha=None, strict=False, steiner=1,
                           rule="gauss2") -> GateReport:
    """Evaluate ``d <= C(2, alpha) [2 int|H| + pi length(boundary)]`` on a surface with boundary.

    A negative ``margin`` is reported, not raised. Closed meshes and failed
    gates give a report whose ``verdict`` starts with ``"not applicable"``.
    """
    K = a.K_upper
    A = surface.area(mesh, a)
    inj = a.injectivity_radius(mesh.positions)
    if mesh.is_closed:
        return GateReport(A, K, alpha, None, False, False, strict,
                          verdict="not applicable: closed surface; use wu_zheng_check")
    mesh.require_connected()
    alpha, star, starstar = _resolve_alpha(A, K, inj, alpha, strict, doubled=True)
    report = GateReport(A, K, alpha, _rho0_or_none(alpha, 2 * A, K), star, starstar, strict)
    if not (star and starstar):
        report.verdict = "not applicable: gates fail"
        return report
    report.C2alpha = wz_constant(alpha)
    report.total_H = surface.total_mean_curvature(mesh, a)
    report.boundary_len = surface.boundary_length(mesh, a, rule)
    diam = geodesy.intrinsic_diameter(mesh, a, steiner=steiner)
    report.diameter = diam.diameter
    report.diameter_pair = list(diam.pair)
    report.rhs = report.C2alpha * (2.0 * report.total_H + math.pi * report.boundary_len)
    report.margin = report.rhs - report.diameter
    report.verdict = "ok" if report.margin >= 0 else "violated"
    return report


def wu_zheng_check(mesh, a: amb.ConformalAmbient, alpha=None, strict=False, steiner=1,
                   diameter=None) -> GateReport:
    """Closed-surface bound ``d(M) <= C(2, alpha) int_M |H| dmu`` (m = 2)."""
    if not mesh.is_closed:
        raise MeshError("wu_zheng_check needs a closed mesh", "mesh-has-boundary")
    K = a.K_upper
    A = surface.area(mesh, a)
    inj = a.injectivity_radius(mesh.positions)
    mesh.require_connected()
    alpha, star, starstar = _resolve_alpha(A, K, inj, alpha, strict, doubled=False)
    report = GateReport(A, K, alpha, _rho0_or_none(alpha, A, K), star, starstar, strict, boundary_len=0.0)
    if not (star and starstar):
        report.verdict = "not applicable: gates fail"
        return report
    report.C2alpha = wz_constant(alpha)
    report.total_H = surface.total_mean_curvature(mesh, a)
    if diameter is None:
        diameter = geodesy.intrinsic_diameter(mesh, a, steiner=steiner)
    report.diameter = diameter.diameter
    report.diameter_pair = list(diameter.pair)
    report.rhs = report.C2alpha * report.total_H
    # a capped search only brackets the diameter; judge by the upper end
    upper = getattr(diameter, "upper_bound", diameter.diameter)
    if upper > diameter.diameter:
        report.extra["diameter_upper_bound"] = upper
    report.margin = report.rhs - upper
    report.verdict = "ok" if report.margin >= 0 else "violated"
    return report


# ---------------------------------------------------------------------------
# Sobolev inequality and the weighted gate

def support_area(mesh, a, f):
    """g-area of faces with a nonzero corner value (over-covers the support)."""
    f = np.asarray(f, dtype=float)
    touched = np.any(f[mesh.faces] != 0.0, axis=1)
    return float(np.sum(surface.face_areas(mesh, a)[touched]))


def pl_gradients(mesh, f):
    """Euclidean gradient of the piecewise-linear interpolant of ``f`` on each face."""
    P = mesh.positions[mesh.faces]
    fv = np.asarray(f, dtype=float)[mesh.faces]
    n = mesh.face_normals
    A2 = 2.0 * mesh.face_areas_delta
    grad = np.zeros((mesh.n_faces, 3))
    for c in range(3):
        opposite = P[:, (c + 2) % 3] - P[:, (c + 1) % 3]
        grad += fv[:, c, None] * np.cross(n, opposite) / A2[:, None]
    return grad


def hoffman_spruck_check(mesh, a: amb.ConformalAmbient, f, alpha=2.0 / 3.0):
    """``(lhs, rhs)`` of the m = 2 Sobolev inequality for a vertex function ``f``.

    ``lhs = (sum f^2 dmu)^(1/2)`` over vertex cells and
    ``rhs = c(2, alpha) [sum |grad f|_g dmu + sum f |H| dmu]``.
    """
    f = np.asarray(f, dtype=float)
    a.check_domain(mesh.positions, "vertex")
    if f.shape != (mesh.n_vertices,):
        raise ValueError("f needs one value per vertex")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("f must be finite and non-negative")
    if np.any(f[mesh.boundary_mask] != 0.0):
        raise ValueError("f must vanish on the boundary")
    if not np.any(f):
        return 0.0, 0.0
    K = a.K_upper
    supp = support_area(mesh, a, f)
    inj = a.injectivity_radius(mesh.positions)
    star, starstar = check_gates(supp, K, inj, alpha, doubled=False)
    if not (star and starstar):
        raise GateViolation("Sobolev gates fail on the support of f")
    lhs = math.sqrt(float(np.sum(f**2 * surface.vertex_areas(mesh, a))))
    grad = np.linalg.norm(pl_gradients(mesh, f), axis=1)
    grad_term = np.sum(np.exp(a.phi(mesh.centroids)) * grad * mesh.face_areas_delta)
    curv_term = np.sum(f * surface.mean_curvature_density(mesh, a))
    return lhs, float(hs_constant(2, alpha, K) * (grad_term + curv_term))


def weighted_gate(mesh, psi, grad_psi) -> float:
    """Vertex quadrature of ``int <x, D psi(x)> exp(psi(x)) dmu_delta``."""
    P = mesh.positions
    integrand = np.sum(P * grad_psi(P), axis=1) * np.exp(psi(P))
    return float(np.sum(integrand * mesh.mixed_areas))


def stereographic_weight():
    """``(psi, grad_psi)`` of the surface-measure weight ``exp(psi) = 4 / (1 + r^2)^2``."""
    s3 = amb.sphere_stereographic()
    return (lambda p: 2.0 * s3.phi(p)), (lambda p: 2.0 * s3.grad_phi(p))
