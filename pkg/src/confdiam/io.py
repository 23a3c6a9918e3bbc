"""Mesh and boundary-curve files.

OFF is read and written; OBJ is read only (positions and faces). Polygons
with more than three corners are fan-triangulated on import. Boundary curves
live in JSON as ``{"components": [{"name": str, "points": [[x, y, z], ...]}]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MeshError
from .surface import ImmersedMesh


def _fan(poly):
    return [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]


def _tokens(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line.split()


def parse_off(text: str, validate=True) -> ImmersedMesh:
    lines = list(_tokens(text))
    if not lines:
        raise MeshError("empty OFF file", "io-parse")
    head = lines[0]
    if head[0] != "OFF":
        raise MeshError(f"expected an OFF header, got {head[0]!r}", "io-parse")
    rest = head[1:]
    body = lines[1:]
    if not rest:
        if not body:
            raise MeshError("missing OFF counts", "io-parse")
        rest, body = body[0], body[1:]
    try:
        nv, nf = int(rest[0]), int(rest[1])
        if nv < 0 or nf < 0 or len(body) < nv + nf:
            raise ValueError
        pos = np.array([[float(x) for x in body[k][:3]] for k in range(nv)])
        faces = []
        for k in range(nv, nv + nf):
            row = body[k]
            count = int(row[0])
            poly = [int(x) for x in row[1:1 + count]]
            if count < 3 or len(poly) != count:
                raise ValueError
            faces += _fan(poly)
    except (ValueError, IndexError):
        raise MeshError("malformed OFF data", "io-parse") from None
    if pos.shape != (nv, 3):
        raise MeshError("OFF vertex rows need three coordinates", "io-parse")
    return ImmersedMesh(pos, faces, validate=validate)


def parse_obj(text: str, validate=True) -> ImmersedMesh:
    pos, faces = [], []
    try:
        for row in _tokens(text):
            if row[0] == "v":
                pos.append([float(x) for x in row[1:4]])
            elif row[0] == "f":
                poly = []
                for item in row[1:]:
                    k = int(item.split("/")[0])
                    poly.append(k - 1 if k > 0 else len(pos) + k)
                if len(poly) < 3:
                    raise ValueError
                faces += _fan(poly)
    except (ValueError, IndexError):
        raise MeshError("malformed OBJ data", "io-parse") from None
    if not pos or any(len(p) != 3 for p in pos):
        raise MeshError("OBJ file has no usable vertices", "io-parse")
    return ImmersedMesh(np.array(pos), faces, validate=validate)


def read_mesh(path, validate=True) -> ImmersedMesh:
    """Read an ``.off`` or ``.obj`` file (chosen by suffix)."""
    path = Path(path)
    try:
        text = path.read_text()
    except UnicodeDecodeError:
        raise MeshError(f"{path} is not a text mesh file", "io-parse") from None
    suffix = path.suffix.lower()
    if suffix == ".off":
        return parse_off(text, validate)
    if suffix == ".obj":
        return parse_obj(text, validate)
    raise MeshError(f"unknown mesh format {suffix!r}", "io-format")


def format_off(mesh: ImmersedMesh) -> str:
    """OFF text with round-trip exact coordinates."""
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {len(mesh.edges)}"]
    out += [" ".join(repr(float(x)) for x in p) for p in mesh.positions]
    out += ["3 " + " ".join(str(int(i)) for i in f) for f in mesh.faces]
    return "\n".join(out) + "\n"


def write_off(mesh: ImmersedMesh, path):
    Path(path).write_text(format_off(mesh))


def read_curves(path):
    """``[(name, points)]`` from a curves JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MeshError(f"curves file is not valid JSON: {exc}", "io-parse") from None
    comps = data.get("components") if isinstance(data, dict) else None
    if not isinstance(comps, list) or not comps:
        raise MeshError("curves file needs a non-empty 'components' list", "io-schema")
    out = []
    for k, comp in enumerate(comps):
        if not isinstance(comp, dict) or "points" not in comp:
            raise MeshError(f"component {k} has no 'points'", "io-schema")
        try:
            pts = np.array(comp["points"], dtype=float)
        except (TypeError, ValueError):
            raise MeshError(f"component {k} has non-numeric points", "io-schema") from None
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3 or not np.all(np.isfinite(pts)):
            raise MeshError(f"component {k} must be at least 3 finite 3-vectors", "io-schema")
        out.append((str(comp.get("name", f"component{k}")), pts))
    return out


def write_curves(curves, path):
    """Write ``[(name, points)]`` (or bare point arrays) as curves JSON."""
    comps = []
    for k, item in enumerate(curves):
        name, pts = item if isinstance(item, tuple) else (f"component{k}", item)
        comps.append({"name": name, "points": np.asarray(pts, dtype=float).tolist()})
    Path(path).write_text(json.dumps({"components": comps}, indent=1) + "\n")
