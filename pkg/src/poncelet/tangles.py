"""Closed space curves on the endpoint-identified surface and their linking.

Each curve samples one planar point of the family (a vertex, a caustic
contact point or a triangle center) over one period ``u in [0, 4K)`` and
lifts it to the solid torus ``((R + x) cos t, (R + x) sin t, y)``,
``t = 2 pi u / 4K``.  Gluing ``u = 0`` to ``u = 4K`` this way closes every
curve.

Linking numbers use the exact solid-angle formula for a pair of straight
segments, so for two closed polylines the sum is an integer up to rounding.
The residual reported with each integer measures how far the raw sum is from
it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .confocal import ConfocalPair, centers, contact_points, vertices
from .errors import DomainError

__all__ = [
    "CURVE_LABELS",
    "SpaceCurve",
    "LinkReport",
    "planar_track",
    "sweep_curve",
    "linking_number",
    "gauss_linking_integral",
    "tangle_report",
]

CURVE_LABELS = (
    "vertex_1", "vertex_2", "vertex_3",
    "contact_1", "contact_2", "contact_3",
    "X1", "X2",
)


@dataclass(frozen=True)
class SpaceCurve:
    """Closed polyline; the last point connects back to the first."""

    label: str
    points: np.ndarray  # (n, 3)

    @property
    def samples(self) -> int:
        return len(self.points)

    def reversed(self) -> "SpaceCurve":
        return SpaceCurve(self.label, self.points[::-1].copy())

    @property
    def scale(self) -> float:
        return float(np.ptp(self.points, axis=0).max())


def planar_track(pair: ConfocalPair, label: str, u) -> np.ndarray:
    """The 2D point named by ``label`` at each ``u``; shape ``(len(u), 2)``."""
    verts = vertices(pair, u)
    kind, _, idx = label.partition("_")
    if kind == "vertex":
        return verts[:, int(idx) - 1]
    if kind == "contact":
        return contact_points(pair, verts)[:, int(idx) - 1]
    if label in ("X1", "X2"):
        return centers(verts, label)
    raise ValueError(f"unknown curve label {label!r}; expected one of {CURVE_LABELS}")


def sweep_curve(pair: ConfocalPair, label: str, samples: int = 1024, R: float | None = None) -> SpaceCurve:
    if samples < 64:
        raise ValueError("samples must be >= 64")
    R = 2.0 * pair.a if R is None else float(R)
    u = np.linspace(0.0, pair.period, samples, endpoint=False)
    xy = planar_track(pair, label, u)
    t = 2.0 * np.pi * u / pair.period
    r = R + xy[:, 0]
    return SpaceCurve(label, np.column_stack([r * np.cos(t), r * np.sin(t), xy[:, 1]]))


def _min_distance(a: np.ndarray, b: np.ndarray, chunk: int = 512) -> float:
    best = np.inf
    for s in range(0, len(a), chunk):
        d = a[s:s + chunk, None, :] - b[None, :, :]
        best = min(best, float(np.sqrt(np.einsum("ijk,ijk->ij", d, d).min())))
    return best


def gauss_linking_integral(a: np.ndarray, b: np.ndarray, chunk: int = 256) -> float:
    """Raw Gauss linking sum of two closed polylines ``(n, 3)`` and ``(m, 3)``.

    Each segment pair contributes the solid angle of the quadrilateral it
    spans, split into two triangles (Klenin & Langowski form).
    """
    a1 = np.roll(a, -1, axis=0)
    b1 = np.roll(b, -1, axis=0)
    total = 0.0
    for s in range(0, len(a), chunk):
        A, A1 = a[s:s + chunk, None, :], a1[s:s + chunk, None, :]
        r1 = A - b[None]
        r2 = A - b1[None]
        r3 = A1 - b1[None]
        r4 = A1 - b[None]
        x1, y1, z1 = np.moveaxis(r1, -1, 0)
        x2, y2, z2 = np.moveaxis(r2, -1, 0)
        x3, y3, z3 = np.moveaxis(r3, -1, 0)
        x4, y4, z4 = np.moveaxis(r4, -1, 0)
        triple = x1 * (y2 * z3 - z2 * y3) + y1 * (z2 * x3 - x2 * z3) + z1 * (x2 * y3 - y2 * x3)
        n1 = np.sqrt(x1 * x1 + y1 * y1 + z1 * z1)
        n2 = np.sqrt(x2 * x2 + y2 * y2 + z2 * z2)
        n3 = np.sqrt(x3 * x3 + y3 * y3 + z3 * z3)
        n4 = np.sqrt(x4 * x4 + y4 * y4 + z4 * z4)
        d12 = x1 * x2 + y1 * y2 + z1 * z2
        d23 = x2 * x3 + y2 * y3 + z2 * z3
        d31 = x3 * x1 + y3 * y1 + z3 * z1
        d14 = x1 * x4 + y1 * y4 + z1 * z4
        d43 = x4 * x3 + y4 * y3 + z4 * z3
        den1 = n1 * n2 * n3 + d12 * n3 + d23 * n1 + d31 * n2
        den2 = n1 * n4 * n3 + d14 * n3 + d43 * n1 + d31 * n4
        total += float(np.sum(np.arctan2(triple, den1) + np.arctan2(triple, den2)))
    return total / (2.0 * np.pi)


def linking_number(c1: SpaceCurve, c2: SpaceCurve, *, min_separation: float = 1e-6) -> tuple[int, float]:
    """Signed linking number and the distance of the raw sum to that integer.

    Raises :class:`DomainError` when the curves come closer than
    ``min_separation`` times their size; the sum is meaningless there.
    """
    a, b = np.asarray(c1.points, float), np.asarray(c2.points, float)
    scale = max(c1.scale, c2.scale)
    gap = _min_distance(a, b)
    if gap <= min_separation * scale:
        raise DomainError(
            f"curves {c1.label} and {c2.label} nearly touch (distance {gap:.3g});"
            " increase samples or change the major radius"
        )
    raw = gauss_linking_integral(a, b)
    lk = int(round(raw))
    return lk, abs(raw - lk)


@dataclass(frozen=True)
class LinkReport:
    labels: tuple[str, ...]
    matrix: np.ndarray  # int, symmetric, zero diagonal
    residuals: np.ndarray  # float, same shape
    classification: str | None  # None when unreliable
    reliable: bool
    threshold: float = 0.05
    notes: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.astype(int).tolist(),
            "residuals": self.residuals.tolist(),
            "classification": self.classification,
            "reliable": self.reliable,
            "threshold": self.threshold,
            "notes": list(self.notes),
        }


def _classify(matrix: np.ndarray, nontrivial: bool) -> str:
    n = len(matrix)
    off = matrix[~np.eye(n, dtype=bool)]
    if n == 3 and np.all(np.abs(off) == 1):
        return "hopf_3_link"
    if np.all(off == 0) and nontrivial:
        return "borromean_like"
    return "other"


def tangle_report(curves, *, threshold: float = 0.05, nontrivial: bool = False) -> LinkReport:
    """Pairwise linking matrix of ``curves`` and a coarse classification.

    ``nontrivial`` flags that the curves are known to be entangled; only then
    is an all-zero matrix called ``borromean_like`` (pairwise linking cannot
    tell Borromean rings from an unlink).
    """
    curves = list(curves)
    if len(curves) < 2:
        raise ValueError("need at least two curves")
    n = len(curves)
    matrix = np.zeros((n, n), dtype=int)
    residuals = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        lk, res = linking_number(curves[i], curves[j])
        matrix[i, j] = matrix[j, i] = lk
        residuals[i, j] = residuals[j, i] = res
    reliable = bool(np.all(residuals <= threshold))
    notes = () if reliable else (f"max residual {residuals.max():.3g} exceeds {threshold}; increase samples",)
    return LinkReport(
        labels=tuple(c.label for c in curves),
        matrix=matrix,
        residuals=residuals,
        classification=_classify(matrix, nontrivial) if reliable else None,
        reliable=reliable,
        threshold=threshold,
        notes=notes,
    )
