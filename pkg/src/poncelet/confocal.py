"""Confocal pair of ellipses and its family of 3-periodic billiard triangles.

Vertices follow the Jacobi parametrization

    P_i(u) = (-a sn(u + i du, m), b cn(u + i du, m)),   du = 4K/3,  i = 1, 2, 3

so the family is 4K-periodic in ``u`` and advancing ``u`` by ``du`` moves each
vertex onto the next one.  At ``u = 0`` the triangle is isosceles with its
apex ``P_3`` on the top vertex ``(0, b)`` of the outer ellipse.  As ``u``
grows the apex reaches the left vertex at ``u = K``, the bottom at ``2K`` and
the right at ``3K`` (counter-clockwise traversal).

Side ``i`` joins ``P_i`` to ``P_{i+1}`` (indices mod 3).  It touches the
caustic at ``Q_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .elliptic import complete_K, incomplete_K, jacobi_am, jacobi_sn_cn_dn
from .errors import DomainError, NumericError

__all__ = [
    "ConfocalPair",
    "TriangleState",
    "InvariantReport",
    "pair_from_caustic",
    "pair_from_outer",
    "vertices",
    "vertex_derivatives",
    "contact_points",
    "side_lengths",
    "triangle_at",
    "triangle_center",
    "centers",
    "tangency_residual",
    "billiard_invariants",
    "angular_positions",
    "standard_angular_positions",
]


@dataclass(frozen=True)
class ConfocalPair:
    """Outer ellipse ``(a, b)`` and caustic ``(a_c, b_c)`` sharing foci.

    ``K`` is the quarter period and ``du = 4 tau K / N`` the parameter
    spacing between consecutive vertices.
    """

    a: float
    b: float
    a_c: float
    b_c: float
    m: float
    K: float
    du: float
    N: int = 3
    tau: int = 1

    @property
    def period(self) -> float:
        return 4.0 * self.K

    @property
    def focal_distance(self) -> float:
        return math.sqrt(self.a_c ** 2 - self.b_c ** 2)

    def invariant_residuals(self) -> dict[str, float]:
        """Residual of every defining identity of the pair."""
        cn_half = float(jacobi_sn_cn_dn(0.5 * self.du, self.m)[1])
        return {
            "parameter": abs(self.m - (self.a_c ** 2 - self.b_c ** 2) / self.a_c ** 2),
            "spacing": abs(self.du - 4.0 * self.tau * self.K / self.N),
            "confocality": abs(self.a ** 2 - self.b ** 2 - (self.a_c ** 2 - self.b_c ** 2)),
            "minor_axis": abs(self.b - self.b_c / cn_half),
        }

    def is_nested(self) -> bool:
        return self.a > self.b > 0 and self.a_c > self.b_c > 0 and self.a > self.a_c and self.b > self.b_c


@dataclass(frozen=True)
class TriangleState:
    """One member of the family.  ``sides[i]`` is the length opposite ``vertices[i]``."""

    u: float
    vertices: np.ndarray  # (3, 2)
    contacts: np.ndarray  # (3, 2); contacts[i] lies on side vertices[i] -> vertices[i+1]
    sides: np.ndarray  # (3,)
    perimeter: float

    @property
    def internal_angles(self) -> np.ndarray:
        return _internal_angles(self.vertices)


def pair_from_caustic(a_c: float, b_c: float) -> ConfocalPair:
    """Build the outer ellipse that carries a 3-periodic family for the caustic."""
    a_c, b_c = float(a_c), float(b_c)
    if not (a_c > b_c > 0.0):
        raise DomainError(f"caustic needs a_c > b_c > 0, got a_c={a_c}, b_c={b_c}")
    m = (a_c * a_c - b_c * b_c) / (a_c * a_c)
    K = float(complete_K(m))
    du = 4.0 * K / 3.0
    _, cn_half, _ = jacobi_sn_cn_dn(0.5 * du, m)
    b = b_c / float(cn_half)
    a = math.sqrt(b * b + a_c * a_c - b_c * b_c)
    return ConfocalPair(a=a, b=b, a_c=a_c, b_c=b_c, m=m, K=K, du=du)


def _outer_aspect(r: float) -> float:
    p = pair_from_caustic(1.0, r)
    return p.b / p.a


def pair_from_outer(a: float, b: float, *, search=(1e-6, 1.0 - 1e-12)) -> ConfocalPair:
    """Find the confocal caustic whose 3-periodic family lives in ``(a, b)``.

    The construction is homogeneous, so only the caustic aspect ratio needs
    solving for; the outer aspect ratio grows monotonically with it.
    """
    a, b = float(a), float(b)
    if not (a > b > 0.0):
        raise DomainError(f"outer ellipse needs a > b > 0, got a={a}, b={b}")
    target = b / a
    lo, hi = search
    f_lo, f_hi = _outer_aspect(lo) - target, _outer_aspect(hi) - target
    if f_lo * f_hi > 0:
        raise NumericError(
            f"outer aspect {target} not bracketed on caustic-ratio interval [{lo}, {hi}]"
            f" (outer aspects {f_lo + target:.6g} .. {f_hi + target:.6g})"
        )
    r = brentq(lambda x: _outer_aspect(x) - target, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    unit = pair_from_caustic(1.0, r)
    scale = a / unit.a
    return pair_from_caustic(scale, scale * r)


def vertices(pair: ConfocalPair, u) -> np.ndarray:
    """Vertices at ``u``; shape ``u.shape + (3, 2)``."""
    u = np.asarray(u, dtype=float)[..., None]
    w = u + pair.du * np.arange(1, 4)
    sn, cn, _ = jacobi_sn_cn_dn(w, pair.m)
    return np.stack([-pair.a * sn, pair.b * cn], axis=-1)


def vertex_derivatives(pair: ConfocalPair, u, order: int = 3) -> list[np.ndarray]:
    """``[P, P', P'', P''']`` (up to ``order``) of the three vertices in ``u``."""
    u = np.asarray(u, dtype=float)[..., None]
    w = u + pair.du * np.arange(1, 4)
    s, c, d = jacobi_sn_cn_dn(w, pair.m)
    m = pair.m
    # sn' = cn dn, cn' = -sn dn, dn' = -m sn cn, differentiated by hand
    sn_d = [s, c * d, -s * d * d - m * s * c * c, -c * d ** 3 - m * c ** 3 * d + 4 * m * s * s * c * d]
    cn_d = [c, -s * d, -c * d * d + m * s * s * c, s * d ** 3 + 4 * m * s * c * c * d - m * s ** 3 * d]
    return [np.stack([-pair.a * sn_d[k], pair.b * cn_d[k]], axis=-1) for k in range(order + 1)]


def contact_points(pair: ConfocalPair, verts: np.ndarray) -> np.ndarray:
    """Tangency points of the sides ``P_i P_{i+1}`` with the caustic.

    A caustic tangent written as ``p x + q y = 1`` touches it at
    ``(a_c^2 p, b_c^2 q)``.
    """
    p0 = verts
    p1 = np.roll(verts, -1, axis=-2)
    d = p1 - p0
    normal = np.stack([d[..., 1], -d[..., 0]], axis=-1)
    offset = np.sum(normal * p0, axis=-1, keepdims=True)
    line = normal / offset
    return line * np.array([pair.a_c ** 2, pair.b_c ** 2])


def side_lengths(verts: np.ndarray) -> np.ndarray:
    """Length of the side opposite each vertex."""
    return np.linalg.norm(np.roll(verts, -1, axis=-2) - np.roll(verts, -2, axis=-2), axis=-1)


def triangle_at(pair: ConfocalPair, u: float) -> TriangleState:
    u = float(np.mod(u, pair.period))
    verts = vertices(pair, u)
    sides = side_lengths(verts)
    return TriangleState(
        u=u,
        vertices=verts,
        contacts=contact_points(pair, verts),
        sides=sides,
        perimeter=float(sides.sum()),
    )


Center = Literal["X1", "X2", "incenter", "barycenter"]


def centers(verts: np.ndarray, which: Center) -> np.ndarray:
    """Vectorized triangle center over leading axes of ``verts`` (``(..., 3, 2)``)."""
    verts = np.asarray(verts, dtype=float)
    if which in ("X2", "barycenter"):
        return verts.mean(axis=-2)
    if which in ("X1", "incenter"):
        s = side_lengths(verts)[..., None]
        return (s * verts).sum(axis=-2) / s.sum(axis=-2)
    raise ValueError(f"unknown triangle center {which!r}")


def triangle_center(state: TriangleState | np.ndarray, which: Center) -> np.ndarray:
    verts = state.vertices if isinstance(state, TriangleState) else state
    return centers(verts, which)


def tangency_residual(pair: ConfocalPair, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Scaled discriminant of the line ``p + t (q - p)`` against the caustic.

    Zero exactly when the line is tangent; normalized by the size of the
    terms so it is dimensionless.
    """
    d = q - p
    wa, wb = 1.0 / pair.a_c ** 2, 1.0 / pair.b_c ** 2
    A = wa * d[..., 0] ** 2 + wb * d[..., 1] ** 2
    B = 2.0 * (wa * p[..., 0] * d[..., 0] + wb * p[..., 1] * d[..., 1])
    C = wa * p[..., 0] ** 2 + wb * p[..., 1] ** 2 - 1.0
    return np.abs(B * B - 4.0 * A * C) / (B * B + np.abs(4.0 * A * C))


def _internal_angles(verts: np.ndarray) -> np.ndarray:
    prev = np.roll(verts, 1, axis=-2) - verts
    nxt = np.roll(verts, -1, axis=-2) - verts
    cross = prev[..., 0] * nxt[..., 1] - prev[..., 1] * nxt[..., 0]
    return np.abs(np.arctan2(cross, np.sum(prev * nxt, axis=-1)))


@dataclass(frozen=True)
class InvariantReport:
    samples: int
    perimeter: float
    perimeter_spread: float  # (max - min) / mean
    reflection_deviation: float  # radians
    cosine_sum: float
    cosine_sum_spread: float
    tangency_residual: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def billiard_invariants(pair: ConfocalPair, samples: int = 256) -> InvariantReport:
    """Check reflection law, constant perimeter and constant sum of cosines."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    u = np.linspace(0.0, pair.period, samples, endpoint=False)
    verts = vertices(pair, u)
    perim = side_lengths(verts).sum(axis=-1)

    normal = -verts / np.array([pair.a ** 2, pair.b ** 2])  # inward
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    incoming = np.roll(verts, 1, axis=-2) - verts
    outgoing = np.roll(verts, -1, axis=-2) - verts

    def angle_to_normal(w):
        cross = w[..., 0] * normal[..., 1] - w[..., 1] * normal[..., 0]
        return np.abs(np.arctan2(cross, np.sum(w * normal, axis=-1)))

    reflection = np.abs(angle_to_normal(incoming) - angle_to_normal(outgoing))
    cos_sum = np.cos(_internal_angles(verts)).sum(axis=-1)
    tangency = tangency_residual(pair, verts, np.roll(verts, -1, axis=-2))
    return InvariantReport(
        samples=samples,
        perimeter=float(perim.mean()),
        perimeter_spread=float(np.ptp(perim) / perim.mean()),
        reflection_deviation=float(reflection.max()),
        cosine_sum=float(cos_sum.mean()),
        cosine_sum_spread=float(np.ptp(cos_sum)),
        tangency_residual=float(tangency.max()),
    )


def angular_positions(pair: ConfocalPair, u_grid) -> np.ndarray:
    """Unwrapped eccentric angles ``t_i`` with ``P_i = (a cos t_i, b sin t_i)``.

    Returns shape ``(len(u_grid), 3)``.  Unwrapping accumulates ``atan2``
    increments, so ``u_grid`` must be fine enough to resolve each turn.
    """
    verts = vertices(pair, np.asarray(u_grid, dtype=float))
    t = np.arctan2(verts[..., 1] / pair.b, verts[..., 0] / pair.a)
    return np.unwrap(t, axis=0)


def standard_angular_positions(pair: ConfocalPair, t_grid) -> np.ndarray:
    """Vertex angles when ``P_1`` is driven uniformly, ``P_1 = (a cos t, b sin t)``.

    Column 0 is ``t`` itself; the matching family parameter comes from
    ``t_1 = pi/2 + am(u + du)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    u = incomplete_K(t_grid - 0.5 * np.pi, pair.m) - pair.du
    return np.pi / 2 + jacobi_am(u[:, None] + pair.du * np.arange(1, 4), pair.m)
