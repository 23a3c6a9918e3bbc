"""Conformally flat ambient metrics ``g = exp(2 phi) * delta`` on a chart of R^3.

All point arguments are arrays whose last axis has length 3; functions are
vectorized over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, UnsupportedAmbientError

EUCLIDEAN = "Euclidean"
HYPERBOLIC_BALL = "HyperbolicBall"
HYPERBOLIC_HALF_SPACE = "HyperbolicHalfSpace"
SPHERE_STEREOGRAPHIC = "SphereStereographic"
CUSTOM = "Custom"

CLI_NAMES = {
    "e3": EUCLIDEAN,
    "h3-ball": HYPERBOLIC_BALL,
    "h3-half": HYPERBOLIC_HALF_SPACE,
    "s3": SPHERE_STEREOGRAPHIC,
}

QUADRATURE_RULES = ("midpoint", "gauss2", "gauss3", "gauss4", "gauss6", "gauss8", "exact")


@dataclass(frozen=True)
class ConformalAmbient:
    """Immutable description of ``(V, exp(2 phi) delta)``.

    Parameters
    ----------
    kind : str
        One of the module-level kind constants.
    phi, grad_phi : callable
        Log-conformal factor and its Euclidean gradient, vectorized over
        ``(..., 3)`` arrays.
    K_upper : float
        Upper bound for the sectional curvatures.
    inj_radius : callable
        Maps an ``(n, 3)`` array of chart points to a lower bound for the
        injectivity radius over that region (may be ``inf``).
    domain_test : callable
        Maps ``(..., 3)`` points to a boolean array of chart membership.
    """

    kind: str
    phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    grad_phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    K_upper: float
    inj_radius: Callable[[np.ndarray], float] = field(repr=False)
    domain_test: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def contains(self, points) -> np.ndarray:
        return np.asarray(self.domain_test(np.asarray(points, dtype=float)), dtype=bool)

    def check_domain(self, points, what="point"):
        points = np.asarray(points, dtype=float)
        inside = self.contains(points)
        if not np.all(inside):
            bad = np.argwhere(~np.atleast_1d(inside))
            raise DomainError(f"{what} outside the {self.kind} chart (first offender index {bad[0].tolist()})")
        return points

    def conformal_factor(self, points) -> np.ndarray:
        """``exp(phi)``, the factor multiplying Euclidean lengths."""
        return np.exp(self.phi(np.asarray(points, dtype=float)))

    def injectivity_radius(self, points=None) -> float:
        if points is None:
            points = np.zeros((0, 3))
        return float(self.inj_radius(np.atleast_2d(np.asarray(points, dtype=float))))

    def shifted(self, c: float) -> "ConformalAmbient":
        """Ambient with ``phi + c``: lengths scale by ``e^c``, curvature by ``e^{-2c}``."""
        phi, grad_phi, inj = self.phi, self.grad_phi, self.inj_radius
        return ConformalAmbient(
            kind=CUSTOM,
            phi=lambda p: phi(p) + c,
            grad_phi=grad_phi,
            K_upper=self.K_upper * math.exp(-2.0 * c),
            inj_radius=lambda p: inj(p) * math.exp(c),
            domain_test=self.domain_test,
        )


def _norm(v):
    return np.sqrt(np.sum(np.square(v), axis=-1))


def _sqnorm(v):
    return np.sum(np.square(v), axis=-1)


def _const_inj(value):
    return lambda points: value


def euclidean() -> ConformalAmbient:
    return ConformalAmbient(
        kind=EUCLIDEAN,
        phi=lambda p: np.zeros(np.shape(p)[:-1]),
        grad_phi=lambda p: np.zeros(np.shape(p)),
        K_upper=0.0,
        inj_radius=_const_inj(math.inf),
        domain_test=lambda p: np.all(np.isfinite(p), axis=-1),
    )


def hyperbolic_ball() -> ConformalAmbient:
    """Poincare ball: ``g = 4 / (1 - r^2)^2 delta`` on the open unit ball."""

    def phi(p):
        return np.log(2.0 / (1.0 - _sqnorm(p)))

    def grad_phi(p):
        return 2.0 * p / (1.0 - _sqnorm(p))[..., None]

    return ConformalAmbient(
        kind=HYPERBOLIC_BALL,
        phi=phi,
        grad_phi=grad_phi,
        K_upper=-1.0,
        inj_radius=_const_inj(math.inf),
        domain_test=lambda p: _sqnorm(p) < 1.0,
    )


def hyperbolic_half_space() -> ConformalAmbient:
    """Upper half-space: ``g = z^{-2} delta`` on ``z > 0``."""

    def phi(p):
        return -np.log(p[..., 2])

    def grad_phi(p):
        out = np.zeros(np.shape(p))
        out[..., 2] = -1.0 / p[..., 2]
        return out

    return ConformalAmbient(
        kind=HYPERBOLIC_HALF_SPACE,
        phi=phi,
        grad_phi=grad_phi,
        K_upper=-1.0,
        inj_radius=_const_inj(math.inf),
        domain_test=lambda p: p[..., 2] > 0.0,
    )


def sphere_stereographic() -> ConformalAmbient:
    """Unit 3-sphere through stereographic projection: ``g = 4 / (1 + r^2)^2 delta``.

    The chart is all of R^3 (the projection pole is the only missing point).
    """

    def phi(p):
        return np.log(2.0 / (1.0 + _sqnorm(p)))

    def grad_phi(p):
        return -2.0 * p / (1.0 + _sqnorm(p))[..., None]

    return ConformalAmbient(
        kind=SPHERE_STEREOGRAPHIC,
        phi=phi,
        grad_phi=grad_phi,
        K_upper=1.0,
        inj_radius=_const_inj(math.pi),
        domain_test=lambda p: np.all(np.isfinite(p), axis=-1),
    )


def custom(phi, grad_phi, K_upper, inj_radius=math.inf, domain_test=None,
           probe_points=None, rtol=1e-6, seed=0) -> ConformalAmbient:
    """Wrap user callables, checking ``grad_phi`` against central differences of ``phi``.

    ``inj_radius`` may be a number or a callable on ``(n, 3)`` arrays. When
    ``probe_points`` is omitted, 32 random points of ``[-1, 1]^3`` inside the
    domain are probed.
    """
    if domain_test is None:
        domain_test = lambda p: np.all(np.isfinite(p), axis=-1)  # noqa: E731
    if not callable(inj_radius):
        inj_radius = _const_inj(float(inj_radius))
    if probe_points is None:
        rng = np.random.default_rng(seed)
        cand = rng.uniform(-1.0, 1.0, size=(256, 3))
        probe_points = cand[np.asarray(domain_test(cand), dtype=bool)][:32]
    probe_points = np.atleast_2d(np.asarray(probe_points, dtype=float))
    if len(probe_points):
        analytic = np.asarray(grad_phi(probe_points), dtype=float)
        fd = finite_difference_gradient(phi, probe_points)
        err = _norm(analytic - fd)
        scale = np.maximum(_norm(analytic), 1.0)
        if np.any(err > rtol * scale):
            worst = int(np.argmax(err / scale))
            raise ValueError(
                f"grad_phi disagrees with finite differences of phi at {probe_points[worst].tolist()}"
            )
    return ConformalAmbient(CUSTOM, phi, grad_phi, float(K_upper), inj_radius, domain_test)


def finite_difference_gradient(phi, points, h=1e-5):
    points = np.asarray(points, dtype=float)
    out = np.empty_like(points)
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        out[..., k] = (phi(points + step) - phi(points - step)) / (2.0 * h)
    return out


def from_name(name: str) -> ConformalAmbient:
    """Builtin ambient from a CLI name (``e3``, ``h3-ball``, ``h3-half``, ``s3``) or kind."""
    kind = CLI_NAMES.get(name, name)
    factories = {
        EUCLIDEAN: euclidean,
        HYPERBOLIC_BALL: hyperbolic_ball,
        HYPERBOLIC_HALF_SPACE: hyperbolic_half_space,
        SPHERE_STEREOGRAPHIC: sphere_stereographic,
    }
    try:
        return factories[kind]()
    except KeyError:
        raise ValueError(f"unknown ambient {name!r}; choose from {sorted(CLI_NAMES)}") from None


# ---------------------------------------------------------------------------
# metric quantities

def conformal_norm(a: ConformalAmbient, p, v):
    """Length of the chart vector ``v`` attached at ``p``: ``exp(phi(p)) |v|``."""
    p = a.check_domain(p)
    v = np.asarray(v, dtype=float)
    # rescale first so tiny or huge vectors neither underflow nor overflow
    scale = np.max(np.abs(v), axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return np.exp(a.phi(p)) * safe[..., 0] * _norm(v / safe)


def _gauss_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def segment_lengths(a: ConformalAmbient, P, Q, rule="gauss2"):
    """g-length of the straight chart segments ``P[i] -> Q[i]``.

    ``rule="exact"`` uses closed-form antiderivatives (builtin kinds only);
    the Gauss rules integrate ``exp(phi)`` along the segment.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if rule == "exact":
        return _exact_segment_lengths(a, P, Q)
    if rule == "midpoint":
        t, w = np.array([0.5]), np.array([1.0])
    elif rule.startswith("gauss"):
        t, w = _gauss_nodes(int(rule[5:]))
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}; choose from {QUADRATURE_RULES}")
    D = Q - P
    nodes = P[..., None, :] + t[:, None] * D[..., None, :]
    factor = np.exp(a.phi(nodes)) @ w
    return factor * _norm(D)


def _exact_segment_lengths(a, P, Q):
    D = Q - P
    L = _norm(D)
    if a.kind == EUCLIDEAN:
        return L
    if a.kind == HYPERBOLIC_HALF_SPACE:
        z0 = P[..., 2]
        x = (Q[..., 2] - z0) / z0
        safe = np.where(x == 0.0, 1.0, x)
        ratio = np.where(x == 0.0, 1.0, np.log1p(safe) / safe)
        return L / z0 * ratio
    if a.kind not in (HYPERBOLIC_BALL, SPHERE_STEREOGRAPHIC):
        raise UnsupportedAmbientError(f"no closed-form segment length for {a.kind}")
    # |P + tD|^2 = A t^2 + B t + C
    A = _sqnorm(D)
    B = 2.0 * np.sum(P * D, axis=-1)
    C = _sqnorm(P)
    out = np.zeros_like(L)
    nz = A > 0.0
    A, B, C, Ln = A[nz], B[nz], C[nz], L[nz]
    if a.kind == HYPERBOLIC_BALL:
        disc = np.sqrt(B * B + 4.0 * A * (1.0 - C))
        w0 = B / disc
        w1 = (2.0 * A + B) / disc
        out[nz] = Ln * 4.0 / disc * np.arctanh((w1 - w0) / (1.0 - w0 * w1))
    else:
        disc = np.sqrt(4.0 * A * (1.0 + C) - B * B)
        u0 = B / disc
        u1 = (2.0 * A + B) / disc
        out[nz] = Ln * 4.0 / disc * np.arctan2(u1 - u0, 1.0 + u0 * u1)
    return out


def curve_length(a: ConformalAmbient, poly, closed=False, rule="gauss2") -> float:
    """g-length of a chart polyline, segment by segment.

    A polyline whose last point repeats the first is closed already; pass
    ``closed=True`` to add the closing segment otherwise.
    """
    poly = np.asarray(poly, dtype=float)
    if poly.ndim != 2 or poly.shape[1] != 3 or len(poly) < 2:
        raise ValueError("a polyline needs at least two 3-D points")
    a.check_domain(poly, "polyline vertex")
    P = poly
    Q = np.roll(poly, -1, axis=0) if closed else poly[1:]
    if not closed:
        P = poly[:-1]
    if np.any(_norm(Q - P) == 0.0):
        raise ValueError("consecutive polyline points must be distinct")
    return float(np.sum(segment_lengths(a, P, Q, rule)))


def inverse_stereographic(p):
    """Chart point -> unit vector in R^4 (pole at ``(0, 0, 0, 1)``)."""
    p = np.asarray(p, dtype=float)
    r2 = _sqnorm(p)[..., None]
    return np.concatenate([2.0 * p, r2 - 1.0], axis=-1) / (1.0 + r2)


def ambient_distance(a: ConformalAmbient, p, q):
    """Geodesic distance of the model space between chart points ``p`` and ``q``."""
    if a.kind == CUSTOM:
        raise UnsupportedAmbientError("ambient_distance needs a builtin ambient")
    p = a.check_domain(p)
    q = a.check_domain(q)
    d2 = _sqnorm(p - q)
    if a.kind == EUCLIDEAN:
        return np.sqrt(d2)
    if a.kind == HYPERBOLIC_BALL:
        # cosh d = 1 + 2 x  <=>  sinh(d/2) = sqrt(x)
        x = d2 / ((1.0 - _sqnorm(p)) * (1.0 - _sqnorm(q)))
        return 2.0 * np.arcsinh(np.sqrt(x))
    if a.kind == HYPERBOLIC_HALF_SPACE:
        x = d2 / (4.0 * p[..., 2] * q[..., 2])
        return 2.0 * np.arcsinh(np.sqrt(x))
    chord = _norm(inverse_stereographic(p) - inverse_stereographic(q))
    return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
