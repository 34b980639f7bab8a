"""Command line interface: ``poncelet {family,surface,curvature,tangle,invariants}``.

Options can also come from a ``key = value`` file given with ``--config``;
explicit flags win.  Exit codes: 0 success, 1 a checked property failed,
2 bad configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import confocal, export, psts, tangles
from .errors import DomainError, NumericError

log = logging.getLogger("poncelet")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_CAUSTIC = (1.0, 0.5)
INVARIANT_LIMIT = 1e-8

CURVE_SETS = {
    "contacts": ("contact_1", "contact_2", "contact_3"),
    "vertices": ("vertex_1", "vertex_2", "vertex_3"),
    "centers": ("X1", "X2", "contact_1", "contact_2", "contact_3"),
    "all": tangles.CURVE_LABELS,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    caustic: tuple[float, float] | None = None
    outer: tuple[float, float] | None = None
    grid: tuple[int, int] = (128, 33)
    samples: int = 1024
    embedding: str = "toroidal"
    major_radius: float | None = None
    color: str = "gaussian"
    out: str | None = None
    format: str | None = None
    curves: str = "contacts"

    def validate(self) -> "RunConfig":
        if self.caustic is not None and self.outer is not None:
            raise ConfigError("give either --caustic or --outer, not both")
        if self.caustic is None and self.outer is None:
            self.caustic = DEFAULT_CAUSTIC
        nu, nv = self.grid
        if nu < 8 or nv < 2:
            raise ConfigError(f"grid {nu}x{nv} too coarse (need nu >= 8, nv >= 2)")
        if self.samples < 64:
            raise ConfigError(f"samples={self.samples} too small (need >= 64)")
        if self.embedding not in ("straight", "toroidal"):
            raise ConfigError(f"unknown embedding {self.embedding!r}")
        if self.color not in ("gaussian", "mean", "none"):
            raise ConfigError(f"unknown color field {self.color!r}")
        if self.curves not in CURVE_SETS:
            raise ConfigError(f"unknown curve set {self.curves!r}")
        return self

    def pair(self) -> confocal.ConfocalPair:
        try:
            if self.outer is not None:
                return confocal.pair_from_outer(*self.outer)
            return confocal.pair_from_caustic(*self.caustic)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def radius(self, pair) -> float:
        if self.major_radius is None:
            return 2.0 * pair.a
        if not self.major_radius > pair.a:
            # the torus would pass through its own axis
            raise ConfigError(f"major radius {self.major_radius} must exceed the outer semi-axis a={pair.a:.6g}")
        return self.major_radius


_CONFIG_PARSERS = {
    "caustic": lambda s: tuple(float(x) for x in s.replace(",", " ").split()),
    "outer": lambda s: tuple(float(x) for x in s.replace(",", " ").split()),
    "grid": lambda s: tuple(int(x) for x in s.replace(",", " ").replace("x", " ").split()),
    "samples": int,
    "embedding": str,
    "major_radius": float,
    "color": str,
    "out": str,
    "format": str,
    "curves": str,
}


def read_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_PARSERS:
            raise ConfigError(f"{path}:{lineno}: cannot parse {raw!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    for key in ("caustic", "outer", "grid"):
        if key in values and len(values[key]) != 2:
            raise ConfigError(f"{path}: {key} needs two numbers")
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _CONFIG_PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = tuple(flag) if isinstance(flag, list) else flag
    if values.get("caustic") is not None and args.outer is not None:
        values.pop("caustic")  # a flag beats the file
    if values.get("outer") is not None and args.caustic is not None:
        values.pop("outer")
    return RunConfig(**values).validate()


def _pair_header(pair: confocal.ConfocalPair) -> dict:
    return {k: getattr(pair, k) for k in ("a", "b", "a_c", "b_c", "m", "K", "du", "N", "tau")}


def _out(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.out or default)


# -- commands -----------------------------------------------------------------


def cmd_family(cfg: RunConfig) -> int:
    pair = cfg.pair()
    n = cfg.samples
    u = np.linspace(0.0, pair.period, n, endpoint=False)
    t_jac = confocal.angular_positions(pair, u)
    verts = confocal.vertices(pair, u)
    t_std = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    std = confocal.standard_angular_positions(pair, t_std)
    header = ["u", "t1", "t2", "t3", "x1", "y1", "x2", "y2", "x3", "y3", "t", "std_t1", "std_t2", "std_t3"]
    rows = np.column_stack([u, t_jac, verts.reshape(n, 6), t_std, std])
    path = export.write_csv(_out(cfg, "family.csv"), header, rows)
    export.write_json(path.with_suffix(".meta.json"), {"pair": _pair_header(pair), "samples": n})
    log.info("wrote %s", path)
    return EXIT_OK


def surface_mesh(cfg: RunConfig):
    """Vertices, faces, curvature scalars and face groups of all three facets."""
    pair = cfg.pair()
    nu, nv = cfg.grid
    toroidal = cfg.embedding == "toroidal"
    verts, faces, K, H, groups = [], [], [], [], []
    offset = face_count = 0
    for facet in (1, 2, 3):
        straight = psts.patch(pair, facet, nu, nv, "straight")
        kf, hf = psts.curvature_numeric(straight)
        rows = nu if toroidal else nu + 1
        shape = psts.patch(pair, facet, nu, nv, "toroidal", cfg.radius(pair)) if toroidal else straight
        verts.append(shape.position.reshape(-1, 3))
        K.append(kf.values[:rows].ravel())
        H.append(hf.values[:rows].ravel())
        tri = export.grid_faces(rows, nv, wrap_u=toroidal, offset=offset)
        faces.append(tri)
        groups.append((f"facet_{facet}", face_count, face_count + len(tri)))
        offset += rows * nv
        face_count += len(tri)
    return (np.concatenate(verts), np.concatenate(faces), np.concatenate(K), np.concatenate(H), groups)


def cmd_surface(cfg: RunConfig) -> int:
    fmt = cfg.format or "obj"
    if fmt not in ("obj", "ply"):
        raise ConfigError(f"surface output must be obj or ply, not {fmt}")
    verts, faces, K, H, groups = surface_mesh(cfg)
    colors = None
    if cfg.color != "none":
        values = K if cfg.color == "gaussian" else H
        colors = export.diverging_colors(values, float(values.min()), float(values.max()))
    path = _out(cfg, f"surface.{fmt}")
    if fmt == "obj":
        export.write_obj_mesh(path, verts, faces, colors, groups)
    else:
        export.write_ply_mesh(path, verts, faces, colors, {"gaussian": K, "mean": H})
    log.info("wrote %s (%d vertices, %d faces)", path, len(verts), len(faces))
    return EXIT_OK


def cmd_curvature(cfg: RunConfig) -> int:
    pair = cfg.pair()
    nu, nv = cfg.grid
    stem = _out(cfg, "curvature")
    report = {"pair": _pair_header(pair), "grid": [nu, nv], "facets": []}
    for facet in (1, 2, 3):
        kf, hf = psts.curvature_numeric(psts.patch(pair, facet, nu, nv, "straight"))
        U, V = np.meshgrid(kf.u, kf.v, indexing="ij")
        export.write_csv(
            stem.parent / f"{stem.name}_facet{facet}.csv",
            ["u", "v", "K", "H"],
            np.column_stack([U.ravel(), V.ravel(), kf.values.ravel(), hf.values.ravel()]),
        )
        entry = {"facet": facet}
        for fld in (kf, hf):
            found = psts.find_critical_points(fld, pair, facet)
            entry[fld.which] = [c.as_dict() for c in found.critical_points]
        report["facets"].append(entry)
    export.write_json(stem.parent / f"{stem.name}_critical.json", report)
    return EXIT_OK


def cmd_tangle(cfg: RunConfig) -> int:
    pair = cfg.pair()
    R = cfg.radius(pair)
    curves = [tangles.sweep_curve(pair, label, cfg.samples, R) for label in CURVE_SETS[cfg.curves]]
    try:
        report = tangles.tangle_report(curves)
    except DomainError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    stem = _out(cfg, "tangle")
    data = {"pair": _pair_header(pair), "samples": cfg.samples, "major_radius": R, "curves": cfg.curves}
    data.update(report.as_dict())
    export.write_json(stem.parent / f"{stem.name}.json", data)
    for c in curves:
        export.write_obj_polyline(stem.parent / f"{stem.name}_{c.label}.obj", c.points, c.label)
    if not report.reliable:
        log.error("linking numbers unreliable: %s (try more --samples)", "; ".join(report.notes))
        return EXIT_CHECK
    return EXIT_OK


def cmd_invariants(cfg: RunConfig) -> int:
    pair = cfg.pair()
    rep = confocal.billiard_invariants(pair, cfg.samples)
    checks = {
        "perimeter_spread": rep.perimeter_spread,
        "reflection_deviation": rep.reflection_deviation,
        "cosine_sum_spread": rep.cosine_sum_spread,
        "tangency_residual": rep.tangency_residual,
    }
    failed = sorted(k for k, v in checks.items() if not v <= INVARIANT_LIMIT)
    data = {"pair": _pair_header(pair), **rep.as_dict(), "limit": INVARIANT_LIMIT, "failed": failed}
    export.write_json(_out(cfg, "invariants.json"), data)
    if failed:
        log.error("invariants exceed %g: %s", INVARIANT_LIMIT, ", ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


COMMANDS = {
    "family": cmd_family,
    "surface": cmd_surface,
    "curvature": cmd_curvature,
    "tangle": cmd_tangle,
    "invariants": cmd_invariants,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    geom = common.add_mutually_exclusive_group()
    geom.add_argument("--caustic", nargs=2, type=float, metavar=("A_C", "B_C"))
    geom.add_argument("--outer", nargs=2, type=float, metavar=("A", "B"))
    common.add_argument("--grid", nargs=2, type=int, metavar=("NU", "NV"))
    common.add_argument("--samples", type=int)
    common.add_argument("--embedding", choices=("straight", "toroidal"))
    common.add_argument("--major-radius", dest="major_radius", type=float)
    common.add_argument("--color", choices=("gaussian", "mean", "none"))
    common.add_argument("--out", help="output file (or stem for multi-file commands)")
    common.add_argument("--format", choices=("obj", "ply", "csv", "json"))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="poncelet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "tangle":
            p.add_argument("--curves", choices=tuple(CURVE_SETS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("bad configuration: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot write %s: %s", getattr(exc, "filename", "?"), exc.strerror or exc)
        return EXIT_CONFIG
    except (NumericError, DomainError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
