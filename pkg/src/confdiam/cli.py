"""Command line interface: ``confdiam <command> [options]``.

Exit codes: 0 when every inequality holds or is not applicable, 1 on input
or solver errors, 2 when an inequality is numerically violated.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import ambient as amb
from . import doubling, gates, generators, geodesy, io, plateau, surface
from .errors import ConfdiamError, MeshError, StalledSolverError

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED = 0, 1, 2
COMMANDS = ("check", "double", "solve", "screen", "sobolev", "generate")


@dataclass
class RunConfig:
    """Validated settings of one CLI run; ``--config`` files may set any field."""

    command: str
    ambient: str = "e3"
    inputs: list = field(default_factory=list)
    alpha: float | None = None
    strict: bool = False
    eps: list = field(default_factory=lambda: [0.08, 0.04, 0.02])
    eta: float = 0.05
    s_res: int = 64
    steiner: int = 1
    rings: int = 8
    n_along: int = 16
    max_iters: int = 400
    area_budget: float | None = None
    f: str = "hat:center"
    kind: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "."
    threads: int = 1
    json: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.ambient not in amb.CLI_NAMES:
            raise ValueError(f"unknown ambient {self.ambient!r}; choose from {sorted(amb.CLI_NAMES)}")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError("--alpha must lie in (0, 1)")
        eps = [float(e) for e in self.eps]
        if not eps or any(e <= 0 for e in eps) or any(x <= y for x, y in zip(eps, eps[1:])):
            raise ValueError("--eps must be positive and strictly decreasing")
        self.eps = eps
        if not 0.0 < self.eta < math.pi / 4:
            raise ValueError("--eta must lie in (0, pi/4)")
        for name in ("s_res", "rings", "n_along", "max_iters", "threads"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be at least 1")
        if self.steiner < 0:
            raise ValueError("--steiner must be non-negative")
        if self.area_budget is not None and not self.area_budget > 0:
            raise ValueError("--area-budget must be positive")
        return self

    def hash(self):
        payload = {k: v for k, v in asdict(self).items() if k not in ("out", "threads", "json")}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def load_config_file(path):
    """Options from a JSON file; keys must be :class:`RunConfig` field names."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"command"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return data


# ---------------------------------------------------------------------------
# output helpers

def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(obj, path):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _write_manifest(cfg, outputs):
    out = Path(cfg.out)
    manifest = {
        "command": cfg.command,
        "config": asdict(cfg),
        "config_hash": cfg.hash(),
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in cfg.inputs],
        "outputs": sorted(outputs),
        "versions": {"confdiam": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    _dump_json(manifest, out / "manifest.json")


def _print(cfg, payload, title):
    if cfg.json:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
        return
    print(title)
    for key, value in payload.items():
        if isinstance(value, (dict, list)) and len(json.dumps(_jsonable(value))) > 80:
            continue
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"  {key:<20} {value}")


def _write_csv(rows, path):
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    Path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# commands

def _single_input(cfg, what):
    if len(cfg.inputs) != 1:
        raise ValueError(f"{cfg.command} needs exactly one {what}")
    return cfg.inputs[0]


def cmd_check(cfg):
    a = amb.from_name(cfg.ambient)
    mesh = io.read_mesh(_single_input(cfg, "mesh file"))
    if mesh.is_closed:
        report = gates.wu_zheng_check(mesh, a, cfg.alpha, cfg.strict, cfg.steiner)
        report.extra["inequality"] = "closed surface"
    else:
        report = gates.main_inequality_report(mesh, a, cfg.alpha, cfg.strict, cfg.steiner)
        report.extra["inequality"] = "surface with boundary"
    payload = report.to_dict()
    _dump_json(payload, Path(cfg.out) / "report.json")
    _write_manifest(cfg, ["report.json"])
    _print(cfg, payload, "diameter inequality")
    return EXIT_VIOLATED if report.verdict == "violated" else EXIT_OK


def cmd_double(cfg):
    a = amb.from_name(cfg.ambient)
    mesh = io.read_mesh(_single_input(cfg, "mesh file"))
    if mesh.is_closed:
        raise MeshError("doubling needs a surface with boundary", "mesh-closed")
    drop = doubling.make_teardrop(cfg.eta)
    rows = doubling.convergence_study(mesh, a, drop, cfg.eps, cfg.s_res, cfg.alpha, cfg.steiner)
    out = Path(cfg.out)
    written = []
    for row in rows:
        name = f"double_eps{row.eps:g}.off"
        io.write_off(doubling.build_double(mesh, row.eps, drop, cfg.s_res, a).mesh, out / name)
        written.append(name)
    table = [row.as_dict() for row in rows]
    _write_csv(table, out / "convergence.csv")
    payload = {"total_abs_curvature": doubling.total_abs_curvature(drop), "rows": table}
    _dump_json(payload, out / "convergence.json")
    _write_manifest(cfg, written + ["convergence.csv", "convergence.json"])
    if cfg.json:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    else:
        print(f"{'eps':>8} {'tube_H':>12} {'error':>10} {'d_sigma':>9} {'d_double':>9} {'monotone':>8} {'wz':>8}")
        for r in rows:
            print(f"{r.eps:8.4g} {r.tube_H:12.6g} {r.error:10.4g} {r.d_sigma:9.5g} {r.d_double:9.5g}"
                  f" {str(r.monotone):>8} {r.wz_verdict:>8}")
    bad = any(r.wz_verdict == "violated" or not r.diam_bound_ok for r in rows)
    return EXIT_VIOLATED if bad else EXIT_OK


def _initial_surface(curves, cfg):
    if len(curves) == 1:
        return plateau.span_disk(curves[0], cfg.rings)
    if len(curves) == 2:
        return plateau.span_tube(curves[0], curves[1], cfg.n_along)
    raise ValueError("solve handles one (disk) or two (tube) boundary components")


def cmd_solve(cfg):
    a = amb.from_name(cfg.ambient)
    curves = [pts for _, pts in io.read_curves(_single_input(cfg, "curves file"))]
    start = _initial_surface(curves, cfg)
    out = Path(cfg.out)
    opts = plateau.SolverOptions(max_iters=cfg.max_iters)
    try:
        mesh, history = plateau.minimize_area(start, a, opts)
    except StalledSolverError as exc:
        io.write_off(exc.mesh, out / "surface_partial.off")
        _dump_json(exc.history.to_dict(), out / "history.json")
        _write_manifest(cfg, ["history.json", "surface_partial.off"])
        raise
    io.write_off(mesh, out / "surface.off")
    _dump_json(history.to_dict(), out / "history.json")
    payload = {"converged": history.converged, "neck_collapse": history.neck_collapse,
               "reason": history.reason, "iterations": history.iterations,
               "area": history.area[-1], "total_H": surface.total_mean_curvature(mesh, a)}
    code = EXIT_OK
    if not history.neck_collapse:
        report = gates.main_inequality_report(mesh, a, cfg.alpha, cfg.strict, cfg.steiner)
        payload["report"] = report.to_dict()
        payload["margin"], payload["verdict"] = report.margin, report.verdict
        code = EXIT_VIOLATED if report.verdict == "violated" else EXIT_OK
    _dump_json(payload, out / "report.json")
    _write_manifest(cfg, ["history.json", "report.json", "surface.off"])
    _print(cfg, payload, "area minimization")
    return code


def cmd_screen(cfg):
    a = amb.from_name(cfg.ambient)
    named = io.read_curves(_single_input(cfg, "curves file"))
    verdict = plateau.screen_boundary([pts for _, pts in named], a, cfg.alpha, cfg.area_budget,
                                      cfg.strict, cfg.threads)
    payload = verdict.to_dict()
    payload["names"] = [name for name, _ in named]
    _dump_json(payload, Path(cfg.out) / "screen.json")
    _write_manifest(cfg, ["screen.json"])
    _print(cfg, payload, "boundary screening")
    return EXIT_OK


def sobolev_function(mesh, spec, seed=0):
    """Vertex values from a function spec.

    ``hat:center`` and ``hat:<i>`` are the piecewise-linear hat at the most
    central interior vertex or at vertex ``i``; ``cone:<r>`` is
    ``max(0, 1 - |x - c| / r)`` about the most central interior vertex;
    ``random`` draws uniform values on interior vertices. Boundary values are
    always zero.
    """
    kind, _, arg = spec.partition(":")
    interior = mesh.interior_vertices
    if len(interior) == 0:
        raise MeshError("mesh has no interior vertices", "mesh-no-interior")
    center = interior[np.argmin(np.linalg.norm(mesh.positions[interior] - mesh.positions.mean(axis=0), axis=1))]
    f = np.zeros(mesh.n_vertices)
    if kind == "hat":
        v = center if arg in ("", "center") else int(arg)
        if not 0 <= v < mesh.n_vertices:
            raise ValueError(f"vertex {v} out of range")
        f[v] = 1.0
    elif kind == "cone":
        r = float(arg)
        if not r > 0:
            raise ValueError("cone radius must be positive")
        f = np.maximum(0.0, 1.0 - np.linalg.norm(mesh.positions - mesh.positions[center], axis=1) / r)
    elif kind == "random":
        f[interior] = np.random.default_rng(seed).random(len(interior))
    else:
        raise ValueError(f"unknown function spec {spec!r}")
    f[mesh.boundary_mask] = 0.0
    return f


def cmd_sobolev(cfg):
    a = amb.from_name(cfg.ambient)
    mesh = io.read_mesh(_single_input(cfg, "mesh file"))
    f = sobolev_function(mesh, cfg.f, cfg.seed)
    alpha = cfg.alpha if cfg.alpha is not None else gates.OPTIMAL_ALPHA
    lhs, rhs = gates.hoffman_spruck_check(mesh, a, f, alpha)
    payload = {"f": cfg.f, "alpha": alpha, "lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs)}
    _dump_json(payload, Path(cfg.out) / "sobolev.json")
    _write_manifest(cfg, ["sobolev.json"])
    _print(cfg, payload, "Sobolev inequality")
    return EXIT_OK if lhs <= rhs else EXIT_VIOLATED


_GENERATORS = {
    "disk": (dict(r=1.0, n=8, segments=6),
             lambda p: generators.disk(p["r"], int(p["n"]), int(p["segments"]))),
    "annulus": (dict(r_in=0.5, r_out=1.0, n=6, n_outer=48),
                lambda p: generators.annulus(p["r_in"], p["r_out"], int(p["n"]), int(p["n_outer"]))),
    "spherical-cap": (dict(angle=0.5, r=1.0, n=8, segments=6),
                      lambda p: generators.spherical_cap(p["angle"], p["r"], int(p["n"]), int(p["segments"]))),
    "icosphere": (dict(subdiv=3, r=1.0), lambda p: generators.icosphere(int(p["subdiv"]), p["r"])),
    "catenoid-boundary": (dict(r=1.0, h=1.0, n=64),
                          lambda p: generators.circle_pair(p["r"], p["h"], int(p["n"]))),
    "circle-pair": (dict(r=1.0, sep=2.0, n=64),
                    lambda p: generators.circle_pair(p["r"], p["sep"], int(p["n"]))),
}


def cmd_generate(cfg):
    if cfg.kind not in _GENERATORS:
        raise ValueError(f"unknown generator {cfg.kind!r}; choose from {sorted(_GENERATORS)}")
    defaults, build = _GENERATORS[cfg.kind]
    unknown = sorted(set(cfg.params) - set(defaults) - {"jitter"})
    if unknown:
        raise ValueError(f"unknown parameters for {cfg.kind}: {', '.join(unknown)}")
    p = {**defaults, **{k: float(v) for k, v in cfg.params.items()}}
    for key in ("n", "segments", "subdiv", "n_outer"):
        if key in p and (p[key] != int(p[key]) or p[key] < (0 if key == "subdiv" else 1)):
            raise ValueError(f"{key} must be a positive integer")
    result = build(p)
    out = Path(cfg.out)
    if isinstance(result, list):
        name = f"{cfg.kind}.json"
        io.write_curves([(f"circle{k}", c) for k, c in enumerate(result)], out / name)
        payload = {"kind": cfg.kind, "components": len(result), "file": name}
    else:
        jitter = p.get("jitter", 0.0)
        if jitter:
            rng = np.random.default_rng(cfg.seed)
            P = result.positions.copy()
            P[result.interior_vertices] += jitter * rng.standard_normal((len(result.interior_vertices), 3))
            result = generators.ImmersedMesh(P, result.faces)
        result.validate()
        name = f"{cfg.kind}.off"
        io.write_off(result, out / name)
        payload = {"kind": cfg.kind, "vertices": result.n_vertices, "faces": result.n_faces,
                   "boundary_loops": len(result.boundary_loops),
                   "euler_characteristic": result.euler_characteristic(), "file": name}
    _write_manifest(cfg, [name])
    _print(cfg, payload, "generated")
    return EXIT_OK


_DISPATCH = dict(check=cmd_check, double=cmd_double, solve=cmd_solve, screen=cmd_screen,
                 sobolev=cmd_sobolev, generate=cmd_generate)


# ---------------------------------------------------------------------------
# argument parsing

def _eps_list(text):
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--ambient", choices=sorted(amb.CLI_NAMES), default=argparse.SUPPRESS)
    g.add_argument("--alpha", type=float, default=argparse.SUPPRESS)
    g.add_argument("--strict", action="store_true", default=argparse.SUPPRESS)
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker threads (default: hardware count)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: .)")
    g.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print JSON")
    g.add_argument("--config", default=None, help="JSON file of options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--steiner", type=int, default=argparse.SUPPRESS,
                   help="Steiner points per edge for distances")

    parser = argparse.ArgumentParser(prog="confdiam", description="Diameter bounds for surfaces "
                                     "in conformally flat 3-manifolds.")
    parser.add_argument("--version", action="version", version=f"confdiam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="evaluate the diameter inequality on a mesh")
    p.add_argument("mesh")

    p = sub.add_parser("double", parents=[common], help="doubling construction and convergence table")
    p.add_argument("mesh")
    p.add_argument("--eps", type=_eps_list, default=argparse.SUPPRESS, help="e.g. 0.08,0.04,0.02")
    p.add_argument("--eta", type=float, default=argparse.SUPPRESS)
    p.add_argument("--s-res", dest="s_res", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("solve", parents=[common], help="minimal surface spanning boundary curves")
    p.add_argument("--boundary", required=True)
    p.add_argument("--rings", type=int, default=argparse.SUPPRESS)
    p.add_argument("--n-along", dest="n_along", type=int, default=argparse.SUPPRESS)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("screen", parents=[common], help="rule out connected minimal surfaces")
    p.add_argument("--boundary", required=True)
    p.add_argument("--area-budget", dest="area_budget", type=float, default=argparse.SUPPRESS)

    p = sub.add_parser("sobolev", parents=[common], help="Sobolev inequality for a test function")
    p.add_argument("mesh")
    p.add_argument("--f", default=argparse.SUPPRESS, help="hat:center | hat:<i> | cone:<r> | random")

    p = sub.add_parser("generate", parents=[common], help="write a fixture mesh or curve file")
    p.add_argument("kind", choices=sorted(_GENERATORS))
    p.add_argument("params", nargs="*", help="key=value parameters")
    return parser


def parse_config(argv):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    values = {"threads": os.cpu_count() or 1}
    config_path = args.pop("config", None)
    if config_path:
        values.update(load_config_file(config_path))
    if "mesh" in args:
        values["inputs"] = [args.pop("mesh")]
    if "boundary" in args:
        values["inputs"] = [args.pop("boundary")]
    if command == "generate":
        values["kind"] = args.pop("kind")
        params = {}
        for item in args.pop("params"):
            key, sep, val = item.partition("=")
            if not sep:
                raise ValueError(f"generator parameter {item!r} is not key=value")
            params[key] = float(val)
        values["params"] = {**values.get("params", {}), **params}
    values.update(args)
    return RunConfig(command=command, **values).validate()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        return _DISPATCH[cfg.command](cfg)
    except (ConfdiamError, ValueError, OSError, json.JSONDecodeError) as exc:
        code = getattr(exc, "code", "input")
        print(f"confdiam: error [{code}]: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
