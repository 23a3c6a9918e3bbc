"""Deterministic mesh and boundary-curve fixtures."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .surface import ImmersedMesh


def _ring_strip(inner, outer, inner_ang, outer_ang):
    """Triangulate the band between two concentric rings of vertex ids (ccw seen from +z)."""
    faces = []
    ni, no = len(inner), len(outer)
    i = j = 0
    while i < ni or j < no:
        next_inner = inner_ang[(i + 1) % ni] + (2 * math.pi if i + 1 >= ni else 0.0)
        next_outer = outer_ang[(j + 1) % no] + (2 * math.pi if j + 1 >= no else 0.0)
        if i >= ni or (j < no and next_outer <= next_inner):
            faces.append((inner[i % ni], outer[j % no], outer[(j + 1) % no]))
            j += 1
        else:
            faces.append((inner[i % ni], outer[j % no], inner[(i + 1) % ni]))
            i += 1
    return faces


def polar_rings(rings, segments=6):
    """Concentric-ring triangulation of the unit disk (``segments * k`` vertices on ring ``k``).

    Returns ``(rho, theta, faces)`` in polar form; vertex 0 is the centre.
    """
    rho = [0.0]
    theta = [0.0]
    ring_ids = [np.array([0])]
    ring_angles = [np.array([0.0])]
    faces = []
    for k in range(1, rings + 1):
        count = segments * k
        ang = 2 * math.pi * np.arange(count) / count
        ids = np.arange(len(rho), len(rho) + count)
        rho.extend([k / rings] * count)
        theta.extend(ang.tolist())
        if k == 1:
            faces += [(0, ids[m], ids[(m + 1) % count]) for m in range(count)]
        else:
            faces += _ring_strip(ring_ids[-1], ids, ring_angles[-1], ang)
        ring_ids.append(ids)
        ring_angles.append(ang)
    return np.array(rho), np.array(theta), np.array(faces)


def disk(radius=1.0, rings=8, segments=6, center=(0.0, 0.0, 0.0)):
    """Flat disk in the plane ``z = center[2]``; the boundary has ``segments * rings`` vertices."""
    rho, theta, faces = polar_rings(rings, segments)
    pos = np.column_stack([radius * rho * np.cos(theta), radius * rho * np.sin(theta), np.zeros_like(rho)])
    return ImmersedMesh(pos + np.asarray(center, dtype=float), faces)


def bumpy_disk(radius=1.0, rings=10, segments=6, amplitude=0.15, lobes=3):
    """Disk graph ``z = amplitude (1 - rho^2) (1 + cos(lobes theta)) / 2``."""
    rho, theta, faces = polar_rings(rings, segments)
    z = amplitude * (1.0 - rho**2) * 0.5 * (1.0 + np.cos(lobes * theta)) * np.minimum(1.0, 4 * rho)
    pos = np.column_stack([radius * rho * np.cos(theta), radius * rho * np.sin(theta), z])
    return ImmersedMesh(pos, faces)


def annulus(r_in=0.5, r_out=1.0, rings=6, n_outer=48, center=(0.0, 0.0, 0.0)):
    """Planar annulus; ring ``k`` carries ``round(n_outer r_k / r_out)`` vertices."""
    radii = np.linspace(r_in, r_out, rings + 1)
    pos, ids, angs = [], [], []
    faces = []
    for k, r in enumerate(radii):
        count = max(6, int(round(n_outer * r / r_out)))
        ang = 2 * math.pi * (np.arange(count) + 0.5 * (k % 2)) / count
        start = len(pos)
        pos.extend(np.column_stack([r * np.cos(ang), r * np.sin(ang), np.zeros(count)]).tolist())
        ring = np.arange(start, start + count)
        if k:
            faces += _ring_strip(ids[-1], ring, angs[-1], ang)
        ids.append(ring)
        angs.append(ang)
    return ImmersedMesh(np.array(pos) + np.asarray(center, dtype=float), faces)


def spherical_cap(angle, radius=1.0, rings=8, segments=6, center=(0.0, 0.0, 0.0)):
    """Cap of polar angle ``angle`` around the +z pole of a sphere; normals point outward."""
    rho, theta, faces = polar_rings(rings, segments)
    psi = angle * rho
    pos = radius * np.column_stack([np.sin(psi) * np.cos(theta), np.sin(psi) * np.sin(theta), np.cos(psi)])
    return ImmersedMesh(pos + np.asarray(center, dtype=float), faces)


def hemisphere(radius=1.0, rings=10, segments=6):
    return spherical_cap(math.pi / 2, radius, rings, segments)


def icosphere(subdivisions=3, radius=1.0):
    """Subdivided icosahedron projected to the sphere (closed, outward orientation)."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return ImmersedMesh(radius * np.array(verts), faces)


def grid_faces(n_rows, n_cols, periodic=True, offset=0, shifted=False):
    """Faces of a ``n_rows x n_cols`` vertex grid, columns wrapping when ``periodic``.

    Vertex ``(r, c)`` has index ``offset + r * n_cols + c``. Quads are split
    along alternating diagonals; with ``shifted`` (odd rows offset by half a
    column) the split follows the row parity so triangles stay near-equilateral.
    """
    faces = []
    last_col = n_cols if periodic else n_cols - 1
    for r in range(n_rows - 1):
        for c in range(last_col):
            c1 = (c + 1) % n_cols
            a = offset + r * n_cols + c
            b = offset + r * n_cols + c1
            d = offset + (r + 1) * n_cols + c
            e = offset + (r + 1) * n_cols + c1
            if (r % 2 == 1) if shifted else ((r + c) % 2 == 0):
                faces += [(a, b, e), (a, e, d)]
            else:
                faces += [(a, b, d), (b, e, d)]
    return faces


def surface_of_revolution(profile_r, profile_z, n_around, phase_shift=True):
    """Mesh of the surface swept by the profile ``(r(s), z(s))`` about the z-axis.

    With increasing ``z`` the orientation is outward.
    """
    profile_r = np.asarray(profile_r, dtype=float)
    profile_z = np.asarray(profile_z, dtype=float)
    ang = 2 * math.pi * np.arange(n_around) / n_around
    pos = []
    for k, (r, z) in enumerate(zip(profile_r, profile_z)):
        a = ang + (math.pi / n_around if phase_shift and k % 2 else 0.0)
        pos.append(np.column_stack([r * np.cos(a), r * np.sin(a), np.full(n_around, z)]))
    faces = grid_faces(len(profile_r), n_around, periodic=True, shifted=phase_shift)
    return ImmersedMesh(np.concatenate(pos), faces)


def cylinder(radius=1.0, height=2.0, n_around=48, n_along=24):
    z = np.linspace(-height / 2, height / 2, n_along + 1)
    return surface_of_revolution(np.full_like(z, radius), z, n_around)


def catenoid_neck(radius, height):
    """Neck radius of the stable catenoid spanning coaxial circles; ``None`` beyond the critical ratio."""
    f = lambda a: a * math.cosh(height / (2 * a)) - radius  # noqa: E731
    # a cosh(h / 2a) is minimal where tanh(u) u = 1; the stable branch lies above
    u_star = brentq(lambda u: u * math.tanh(u) - 1.0, 0.5, 2.0)
    a_star = height / (2 * u_star)
    if f(a_star) > 0:
        return None
    return brentq(f, a_star, radius)


def catenoid(radius=1.0, height=1.0, n_around=48, n_along=24):
    """Analytic (stable) catenoid through two circles of ``radius`` at ``z = +-height/2``."""
    a = catenoid_neck(radius, height)
    if a is None:
        raise ValueError(f"no catenoid for height/radius = {height / radius:.4f}")
    z = np.linspace(-height / 2, height / 2, n_along + 1)
    return surface_of_revolution(a * np.cosh(z / a), z, n_around)


def torus(R=1.0, r=0.35, n_major=48, n_minor=24):
    """Closed torus of revolution about the z-axis, outward orientation."""
    u = 2 * math.pi * np.arange(n_major) / n_major
    v = 2 * math.pi * np.arange(n_minor) / n_minor
    pos = []
    for vv in v:
        rr = R + r * math.cos(vv)
        pos.append(np.column_stack([rr * np.cos(u), rr * np.sin(u), np.full(n_major, r * math.sin(vv))]))
    # one extra grid row wraps back onto the first ring
    faces = np.array(grid_faces(n_minor + 1, n_major, periodic=True)) % (n_minor * n_major)
    return ImmersedMesh(np.concatenate(pos), faces)


def plane_patch(half_width=1.0, n=16, height=1.0):
    """Square grid on the plane ``z = height`` (a horosphere in the half-space model)."""
    xs = np.linspace(-half_width, half_width, n + 1)
    X, Y = np.meshgrid(xs, xs)
    pos = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, height)])
    return ImmersedMesh(pos, grid_faces(n + 1, n + 1, periodic=False))


def circle(radius=1.0, n=64, center=(0.0, 0.0, 0.0), normal_axis=2):
    """Closed polyline (no repeated endpoint) of a circle in a coordinate plane."""
    ang = 2 * math.pi * np.arange(n) / n
    pts = np.zeros((n, 3))
    axes = [k for k in range(3) if k != normal_axis]
    pts[:, axes[0]] = radius * np.cos(ang)
    pts[:, axes[1]] = radius * np.sin(ang)
    return pts + np.asarray(center, dtype=float)


def circle_pair(radius=1.0, separation=2.0, n=64):
    """Two coaxial circles about the z-axis at ``z = +-separation/2``."""
    return [circle(radius, n, (0.0, 0.0, -separation / 2)),
            circle(radius, n, (0.0, 0.0, separation / 2))]


def cylinder_between(curve_bottom, curve_top, n_along):
    """Linear interpolation mesh between two matching closed polylines (initial guess for descent)."""
    curve_bottom = np.asarray(curve_bottom, dtype=float)
    curve_top = np.asarray(curve_top, dtype=float)
    t = np.linspace(0.0, 1.0, n_along + 1)
    pos = np.concatenate([(1 - s) * curve_bottom + s * curve_top for s in t])
    return ImmersedMesh(pos, grid_faces(n_along + 1, len(curve_bottom), periodic=True))
