"""Writers for CSV, JSON, OBJ and binary PLY.

Floats go to CSV with 17 significant digits.  JSON uses Python's shortest
round-trip ``repr``.  Nothing time-dependent is written, so identical inputs
give byte-identical files.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "grid_faces",
    "diverging_colors",
    "write_obj_mesh",
    "write_ply_mesh",
    "read_ply",
    "write_obj_polyline",
]


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=False, allow_nan=False) + "\n")
    return path


def grid_faces(nu: int, nv: int, wrap_u: bool, offset: int = 0) -> np.ndarray:
    """Triangles of a ``nu x nv`` node grid (row-major, u slowest)."""
    rows = nu if wrap_u else nu - 1
    i, j = np.meshgrid(np.arange(rows), np.arange(nv - 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    i1 = (i + 1) % nu
    a = i * nv + j
    b = i1 * nv + j
    c = i1 * nv + j + 1
    d = i * nv + j + 1
    tris = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return tris + offset


_COLD = np.array([0.230, 0.299, 0.754])
_WARM = np.array([0.706, 0.016, 0.150])


def diverging_colors(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """Blue-white-red colors: ``vmin`` maps to blue, ``vmax`` to red."""
    span = vmax - vmin
    t = np.clip((values - vmin) / span, 0.0, 1.0) if span > 0 else np.full_like(values, 0.5)
    t = t[..., None]
    white = np.ones(3)
    lower = _COLD + (white - _COLD) * (2 * t)
    upper = white + (_WARM - white) * (2 * t - 1)
    return np.where(t < 0.5, lower, upper)


def write_obj_mesh(path, vertices, faces, colors=None, groups=()) -> Path:
    """Triangle mesh; ``colors`` (RGB in [0, 1]) use the ``v x y z r g b`` extension.

    ``groups`` is a sequence of ``(name, first_face, end_face)`` ranges.
    """
    path = Path(path)
    lines = []
    for k, p in enumerate(vertices):
        xyz = " ".join(fmt(c) for c in p)
        if colors is not None:
            xyz += " " + " ".join(format(float(c), ".6f") for c in colors[k])
        lines.append(f"v {xyz}")
    bounds = {start: name for name, start, _ in groups}
    for k, f in enumerate(faces):
        if k in bounds:
            lines.append(f"g {bounds[k]}")
        lines.append("f " + " ".join(str(int(i) + 1) for i in f))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_ply_mesh(path, vertices, faces, colors=None, scalars=None) -> Path:
    """Binary little-endian PLY with optional uchar colors and double scalars."""
    path = Path(path)
    vertices = np.asarray(vertices, dtype="<f8")
    scalars = dict(scalars or {})
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    if colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    fields += [(name, "<f8") for name in scalars]
    data = np.empty(len(vertices), dtype=fields)
    data["x"], data["y"], data["z"] = vertices.T
    if colors is not None:
        rgb = np.clip(np.round(np.asarray(colors) * 255), 0, 255).astype("u1")
        data["red"], data["green"], data["blue"] = rgb.T
    for name, vals in scalars.items():
        data[name] = np.asarray(vals, dtype=float)
    ply_types = {"<f8": "double", "u1": "uchar"}
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {len(vertices)}"]
    header += [f"property {ply_types[t]} {name}" for name, t in fields]
    header += [f"element face {len(faces)}", "property list uchar int vertex_indices", "end_header"]
    face_rec = np.empty(len(faces), dtype=[("n", "u1"), ("idx", "<i4", (3,))])
    face_rec["n"] = 3
    face_rec["idx"] = faces
    with path.open("wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(data.tobytes())
        fh.write(face_rec.tobytes())
    return path


def read_ply(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back a file written by :func:`write_ply_mesh` (vertex and face records)."""
    raw = Path(path).read_bytes()
    end = raw.index(b"end_header\n") + len(b"end_header\n")
    header = raw[:end].decode("ascii").splitlines()
    fields, n_vert, n_face = [], 0, 0
    np_types = {"double": "<f8", "uchar": "u1"}
    for line in header:
        parts = line.split()
        if parts[:2] == ["element", "vertex"]:
            n_vert = int(parts[2])
        elif parts[:2] == ["element", "face"]:
            n_face = int(parts[2])
        elif parts[0] == "property" and parts[1] != "list":
            fields.append((parts[2], np_types[parts[1]]))
    vert = np.frombuffer(raw, dtype=fields, count=n_vert, offset=end)
    face = np.frombuffer(
        raw, dtype=[("n", "u1"), ("idx", "<i4", (3,))], count=n_face, offset=end + vert.nbytes
    )
    return vert, face["idx"]


def write_obj_polyline(path, points, name: str) -> Path:
    """Closed polyline as an OBJ ``l`` element (first vertex repeated at the end)."""
    path = Path(path)
    lines = [f"o {name}"]
    lines += ["v " + " ".join(fmt(c) for c in p) for p in points]
    idx = list(range(1, len(points) + 1)) + [1]
    lines.append("l " + " ".join(map(str, idx)))
    path.write_text("\n".join(lines) + "\n")
    return path
