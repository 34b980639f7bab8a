"""The spatio-temporal surface swept by the triangle family, and its curvature.

Facet ``i`` is the ruled surface

    sigma_i(u, v) = ((1 - v) P_i(u) + v P_{i+1}(u), u),   u in [0, 4K],  v in [0, 1]

(straight embedding; the family parameter is the third coordinate).  The
unit normal is ``sigma_u x sigma_v / |sigma_u x sigma_v|``; with it the mean
curvature is negative along the midline ``v = 1/2``.  Near the edges it turns
positive once the caustic is elongated enough (``b_c / a_c`` about 0.5 or less).

Curvature is available two ways:

* ``curvature_numeric`` / ``curvature_at`` build first and second fundamental
  forms from exact derivatives of ``sigma``.  This route is the reference.
* ``curvature_closed_form`` evaluates the long closed-form expressions in
  ``s_j, c_j, d_j = sn, cn, dn(u + j du)``, ``j = 1, 2`` (shifted per facet).

Critical points of either field are seeded from a discrete Morse scan of a
grid and polished by damped Newton iteration on the exact field.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .confocal import ConfocalPair, vertex_derivatives
from .elliptic import jacobi_sn_cn_dn
from .errors import NumericError

__all__ = [
    "SurfacePatch",
    "CriticalPoint",
    "CurvatureField",
    "surface_frame",
    "patch",
    "fundamental_forms",
    "curvature_numeric",
    "curvature_at",
    "curvature_gradient",
    "curvature_closed_form",
    "closed_form_terms",
    "find_critical_points",
]

Embedding = Literal["straight", "toroidal"]
FieldKind = Literal["gaussian", "mean"]


def _check_facet(facet: int) -> int:
    if facet not in (1, 2, 3):
        raise ValueError(f"facet must be 1, 2 or 3, got {facet}")
    return facet


def _planar_frame(pair: ConfocalPair, facet: int, u, v, order: int = 2):
    """Derivatives of the planar ruling point ``(1 - v) P_i + v P_{i+1}``.

    Returns ``(p, p_u, p_v, p_uu, p_uv[, p_uuu, p_uuv])``, each ``(..., 2)``.
    """
    i = _check_facet(facet) - 1
    j = (i + 1) % 3
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    P = vertex_derivatives(pair, u, order=max(order, 2))
    w = v[..., None]
    out = [
        (1 - w) * P[0][..., i, :] + w * P[0][..., j, :],
        (1 - w) * P[1][..., i, :] + w * P[1][..., j, :],
        P[0][..., j, :] - P[0][..., i, :],
        (1 - w) * P[2][..., i, :] + w * P[2][..., j, :],
        P[1][..., j, :] - P[1][..., i, :],
    ]
    if order >= 3:
        out += [(1 - w) * P[3][..., i, :] + w * P[3][..., j, :], P[2][..., j, :] - P[2][..., i, :]]
    return out


def _lift(xy, z):
    return np.concatenate([xy, z[..., None]], axis=-1)


def surface_frame(
    pair: ConfocalPair,
    facet: int,
    u,
    v,
    embedding: Embedding = "straight",
    R: float | None = None,
) -> dict[str, np.ndarray]:
    """Position and exact first/second derivatives of facet ``facet``.

    Keys: ``position, du, dv, duu, duv, dvv``; arrays of shape
    ``broadcast(u, v).shape + (3,)``.  The toroidal embedding maps
    ``(u, x, y)`` to ``((R + x) cos t, (R + x) sin t, y)`` with
    ``t = 2 pi u / 4K``; ``R`` defaults to ``2 a``.
    """
    p, pu, pv, puu, puv = _planar_frame(pair, facet, u, v)
    u = np.broadcast_to(np.asarray(u, float), p.shape[:-1])
    zero, one = np.zeros_like(u), np.ones_like(u)
    if embedding == "straight":
        return {
            "position": _lift(p, u),
            "du": _lift(pu, one),
            "dv": _lift(pv, zero),
            "duu": _lift(puu, zero),
            "duv": _lift(puv, zero),
            "dvv": np.zeros(p.shape[:-1] + (3,)),
        }
    if embedding != "toroidal":
        raise ValueError(f"unknown embedding {embedding!r}")
    R = 2.0 * pair.a if R is None else float(R)
    w = 2.0 * np.pi / pair.period
    ct, st = np.cos(w * u), np.sin(w * u)
    r = R + p[..., 0]

    def ring(radial, tangential, height):
        # radial/tangential components in the rotating frame
        return np.stack([radial * ct - tangential * st, radial * st + tangential * ct, height], axis=-1)

    return {
        "position": ring(r, zero, p[..., 1]),
        "du": ring(pu[..., 0], r * w, pu[..., 1]),
        "dv": ring(pv[..., 0], zero, pv[..., 1]),
        "duu": ring(puu[..., 0] - r * w * w, 2 * pu[..., 0] * w, puu[..., 1]),
        "duv": ring(puv[..., 0], pv[..., 0] * w, puv[..., 1]),
        "dvv": np.zeros(p.shape[:-1] + (3,)),
    }


@dataclass(frozen=True)
class SurfacePatch:
    """Sampled facet: node arrays have shape ``(nu, nv, 3)`` or ``(nu, nv)``.

    The fundamental-form fields stay ``None`` until :func:`fundamental_forms`.
    """

    facet: int
    embedding: str
    u: np.ndarray
    v: np.ndarray
    position: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray
    duv: np.ndarray
    dvv: np.ndarray
    normal: np.ndarray | None = None
    E: np.ndarray | None = None
    F: np.ndarray | None = None
    G: np.ndarray | None = None
    e: np.ndarray | None = None
    f: np.ndarray | None = None
    g: np.ndarray | None = None

    def __post_init__(self):
        if self.normal is None:
            n = np.cross(self.du, self.dv)
            norm = np.linalg.norm(n, axis=-1, keepdims=True)
            with np.errstate(invalid="ignore", divide="ignore"):
                object.__setattr__(self, "normal", n / norm)

    @property
    def shape(self) -> tuple[int, int]:
        return self.position.shape[:2]

    @property
    def has_forms(self) -> bool:
        return self.E is not None


def patch(
    pair: ConfocalPair,
    facet: int,
    nu: int,
    nv: int,
    embedding: Embedding = "straight",
    R: float | None = None,
) -> SurfacePatch:
    """Sample facet ``facet`` on a uniform ``u x v`` grid.

    ``nu`` counts intervals in ``u``.  The straight embedding keeps both ends
    (``nu + 1`` rows, ``u = 0`` and ``u = 4K``); the toroidal one identifies
    them, leaving ``nu`` rows.
    """
    if nu < 8 or nv < 2:
        raise ValueError(f"grid too coarse: nu={nu} (>= 8), nv={nv} (>= 2)")
    rows = nu + 1 if embedding == "straight" else nu
    u = np.linspace(0.0, pair.period, nu + 1)[:rows]
    v = np.linspace(0.0, 1.0, nv)
    U, V = np.meshgrid(u, v, indexing="ij")
    frame = surface_frame(pair, facet, U, V, embedding, R)
    return SurfacePatch(facet=facet, embedding=embedding, u=u, v=v, **frame)


def fundamental_forms(p: SurfacePatch) -> SurfacePatch:
    """Fill ``E, F, G`` and ``e, f, g`` from the stored derivatives."""
    E = np.sum(p.du * p.du, axis=-1)
    F = np.sum(p.du * p.dv, axis=-1)
    G = np.sum(p.dv * p.dv, axis=-1)
    det = E * G - F * F
    bad = ~(det > 0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NumericError(f"metric is singular at node {idx} (EG - F^2 = {det[idx]:.3g})")
    n = p.normal
    return dataclasses.replace(
        p,
        E=E,
        F=F,
        G=G,
        e=np.sum(p.duu * n, axis=-1),
        f=np.sum(p.duv * n, axis=-1),
        g=np.sum(p.dvv * n, axis=-1),
    )


@dataclass(frozen=True)
class CriticalPoint:
    u: float
    v: float
    value: float
    morse_type: str  # "min" | "max" | "saddle" | "degenerate"
    hessian_eigs: tuple[float, float]
    gradient_norm: float
    converged: bool = True
    diagnostic: str = ""

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["hessian_eigs"] = list(self.hessian_eigs)
        return d


@dataclass(frozen=True)
class CurvatureField:
    which: FieldKind
    u: np.ndarray
    v: np.ndarray
    values: np.ndarray  # (len(u), len(v))
    facet: int = 1
    critical_points: tuple[CriticalPoint, ...] = field(default_factory=tuple)

    @property
    def grid(self) -> np.ndarray:
        return self.values


def _curvatures_from_forms(E, F, G, e, f, g):
    det = E * G - F * F
    return (e * g - f * f) / det, (e * G - 2 * f * F + E * g) / (2 * det)


def curvature_numeric(p: SurfacePatch) -> tuple[CurvatureField, CurvatureField]:
    """Gaussian and mean curvature at every node of the patch."""
    if not p.has_forms:
        p = fundamental_forms(p)
    K, H = _curvatures_from_forms(p.E, p.F, p.G, p.e, p.f, p.g)
    return (
        CurvatureField("gaussian", p.u, p.v, K, facet=p.facet),
        CurvatureField("mean", p.u, p.v, H, facet=p.facet),
    )


def _dot(x, y):
    return np.sum(x * y, axis=-1)


def _ruled_terms(pair: ConfocalPair, facet: int, u, v, order: int = 2):
    """Unnormalized shape quantities of the straight embedding.

    With ``n = sigma_u x sigma_v`` (not unit): ``D = |n|^2 = EG - F^2``,
    ``en = sigma_uu . n`` and ``fn = sigma_uv . n``.  Rulings are straight, so
    ``g`` vanishes and ``K = -fn^2 / D^2``, ``H = (en G - 2 fn F) / (2 D^1.5)``.
    """
    planar = _planar_frame(pair, facet, u, v, order=order)
    uu = np.broadcast_to(np.asarray(u, float), planar[0].shape[:-1])
    one, zero = np.ones_like(uu), np.zeros_like(uu)
    su = _lift(planar[1], one)
    sv = _lift(planar[2], zero)
    suu = _lift(planar[3], zero)
    suv = _lift(planar[4], zero)
    n = np.cross(su, sv)
    t = dict(su=su, sv=sv, suu=suu, suv=suv, n=n, D=_dot(n, n), en=_dot(suu, n), fn=_dot(suv, n),
             F=_dot(su, sv), G=_dot(sv, sv))
    if order >= 3:
        t["suuu"] = _lift(planar[5], zero)
        t["suuv"] = _lift(planar[6], zero)
    return t


def curvature_at(pair: ConfocalPair, facet: int, u, v):
    """Pointwise ``(K, H)`` on the straight embedding (reference route)."""
    t = _ruled_terms(pair, facet, u, v)
    D, en, fn = t["D"], t["en"], t["fn"]
    K = -fn * fn / (D * D)
    H = (en * t["G"] - 2 * fn * t["F"]) / (2 * D ** 1.5)
    return K[()], H[()]


def curvature_gradient(pair: ConfocalPair, facet: int, u, v):
    """Exact ``(K_u, K_v, H_u, H_v)`` using third derivatives of the vertices."""
    t = _ruled_terms(pair, facet, u, v, order=3)
    su, sv, suu, suv, n = t["su"], t["sv"], t["suu"], t["suv"], t["n"]
    suuu, suuv = t["suuu"], t["suuv"]
    D, en, fn, F, G = t["D"], t["en"], t["fn"], t["F"], t["G"]

    n_u = np.cross(suu, sv) + np.cross(su, suv)
    n_v = np.cross(suv, sv)
    D_u, D_v = 2 * _dot(n, n_u), 2 * _dot(n, n_v)
    fn_u = _dot(suuv, n) + _dot(suv, n_u)
    fn_v = _dot(suv, n_v)  # identically zero; kept for symmetry of the formulas
    en_u = _dot(suuu, n) + _dot(suu, n_u)
    en_v = _dot(suuv, n) + _dot(suu, n_v)
    F_u, F_v = _dot(suu, sv) + _dot(su, suv), _dot(suv, sv)
    G_u, G_v = 2 * _dot(sv, suv), np.zeros_like(G)

    def dK(f_x, D_x):
        return -2 * fn * f_x / D ** 2 + 2 * fn * fn * D_x / D ** 3

    num = en * G - 2 * fn * F

    def dH(e_x, f_x, F_x, G_x, D_x):
        num_x = e_x * G + en * G_x - 2 * f_x * F - 2 * fn * F_x
        return num_x / (2 * D ** 1.5) - 0.75 * num * D_x / D ** 2.5

    return (
        dK(fn_u, D_u)[()],
        dK(fn_v, D_v)[()],
        dH(en_u, fn_u, F_u, G_u, D_u)[()],
        dH(en_v, fn_v, F_v, G_v, D_v)[()],
    )


def closed_form_terms(pair: ConfocalPair, facet: int, u, v) -> dict[str, np.ndarray]:
    """Closed-form ``f``, ``Delta`` and ``H_n`` in the sn/cn/dn of two vertices.

    Symbols: ``s4, c4, d4`` are sn, cn, dn at ``u + du`` and ``s8, c8, d8`` at
    ``u + 2 du`` (for facet 1; other facets shift ``u`` by ``(facet-1) du``).
    ``m`` is the elliptic parameter ``k^2``.  ``Delta = EG - F^2``,
    ``f = sigma_uv . (sigma_u x sigma_v)`` and ``H_n = 2 D^1.5 H``.
    """
    _check_facet(facet)
    a, b, m = pair.a, pair.b, pair.m
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    shift = (facet - 1) * pair.du
    s4, c4, d4 = jacobi_sn_cn_dn(u + shift + pair.du, m)
    s8, c8, d8 = jacobi_sn_cn_dn(u + shift + 2 * pair.du, m)
    a2, b2 = a * a, b * b

    f = -a * b * (d4 + d8) * (c4 * c8 + s4 * s8 - 1)
    # A = -((1 - v) d4 - v d8)^2 and B = (c4 c8 + s4 s8 - 1)^2 / 2, expanded
    A = (m * s4 ** 2 + m * s8 ** 2 - 2 * d4 * d8 - 2) * v ** 2 + (-2 * m * s4 ** 2 + 2 * d4 * d8 + 2) * v + m * s4 ** 2 - 1
    B = (s8 ** 2 - 0.5) * s4 ** 2 + s8 * (c4 * c8 - 1) * s4 - 0.5 * s8 ** 2 - c8 * c4 + 1
    # |P_j - P_i|^2
    G = (a2 - b2) * s4 ** 2 - 2 * s4 * s8 * a2 + (a2 - b2) * s8 ** 2 - 2 * b2 * (c4 * c8 - 1)
    delta = -2 * A * B * a2 * b2 + G
    F = (((a2 - b2) * s4 - s8 * a2) * c4 + s4 * b2 * c8) * (v - 1) * d4 - v * d8 * (
        -s8 * b2 * c4 + (s4 * a2 + (b2 - a2) * s8) * c8
    )
    e = m * a * b * (s4 - s8) * (2 * c4 * s4 * s8 + 2 * c4 * s8 ** 2 - 2 * c8 * s4 ** 2 - 2 * c8 * s4 * s8 - c4 + c8) * v - a * b * (
        2 * m * c4 * s4 ** 2 * s8 - 2 * c8 * m * s4 ** 3 - m * c4 * s4 + m * c8 * s4 - c4 * s8 + c8 * s4
    )
    Hn = 2 * a * b * (d4 + d8) * (c4 * c8 + s4 * s8 - 1) * F + e * G
    return {"f": f, "delta": delta, "Hn": Hn, "F": F, "G": G, "e": e}


def curvature_closed_form(pair: ConfocalPair, facet: int, u, v):
    """``(K, H)`` from the closed-form expressions: ``K = -(f/Delta)^2``, ``H = H_n Delta^-1.5 / 2``."""
    t = closed_form_terms(pair, facet, u, v)
    delta = t["delta"]
    if np.any(delta <= 0):
        raise NumericError("closed-form metric determinant is not positive")
    return (-(t["f"] / delta) ** 2)[()], (0.5 * t["Hn"] * delta ** -1.5)[()]


# -- critical points ---------------------------------------------------------

# ring of 8 neighbours in cyclic order
_RING = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def _seed_nodes(values: np.ndarray, periodic: bool):
    """Discrete Morse scan: interior nodes that are local min, max or saddle."""
    nu, nv = values.shape
    c = values[:, 1:-1]
    diffs = []
    for di, dj in _RING:
        nb = np.roll(values, -di, axis=0)[:, 1 + dj: nv - 1 + dj]
        diffs.append(nb - c)
    signs = np.stack(diffs, axis=-1) > 0  # ties count as "above"
    changes = np.sum(signs != np.roll(signs, 1, axis=-1), axis=-1)
    kind = np.full(c.shape, "", dtype=object)
    kind[np.all(signs, axis=-1)] = "min"
    kind[np.all(~signs, axis=-1)] = "max"
    kind[changes >= 4] = "saddle"
    if not periodic:
        kind[0, :] = ""
        kind[-1, :] = ""
    seeds = [(i, j + 1, kind[i, j]) for i, j in zip(*np.nonzero(kind != ""))]
    return seeds


def _hessian(grad, u, v, h=1e-5):
    gu_p, gu_m = np.array(grad(u + h, v)), np.array(grad(u - h, v))
    gv_p, gv_m = np.array(grad(u, v + h)), np.array(grad(u, v - h))
    Hm = np.column_stack([(gu_p - gu_m) / (2 * h), (gv_p - gv_m) / (2 * h)])
    return 0.5 * (Hm + Hm.T)


def _fd_gradient(fn, u, v, h=1e-5):
    return np.array([(fn(u + h, v) - fn(u - h, v)) / (2 * h), (fn(u, v + h) - fn(u, v - h)) / (2 * h)])


def _newton(grad, x, cell, step_tol, max_iter):
    """Damped Newton iteration on ``grad = 0``; returns ``(x, converged, note)``.

    At a degenerate critical point Newton only converges linearly.  That is
    detected from the ratio of successive steps, the geometric tail is summed
    once, and the point is returned unconverged with a diagnostic.
    """
    hu, hv = cell
    steps = []
    for _ in range(max_iter):
        step = np.linalg.lstsq(_hessian(grad, *x), np.array(grad(*x)), rcond=None)[0]
        # damping: never move more than one grid cell per iteration
        x = x - step / max(abs(step[0]) / hu, abs(step[1]) / hv, 1.0)
        steps.append(float(np.linalg.norm(step)))
        if not 0.0 < x[1] < 1.0:
            return x, False, f"left the domain at v={x[1]:.6g}"
        if steps[-1] <= step_tol:
            return x, True, ""
        q = _linear_rate(steps)
        if q is not None:
            # the remaining steps form a geometric series; sum it once
            return x - step * q / (1.0 - q), False, (
                f"linear convergence (step ratio {q:.3f}); Hessian singular at the limit"
            )
    return x, False, f"no convergence in {max_iter} iterations (last step {steps[-1]:.3g})"


def _linear_rate(steps, window=6):
    """Common ratio of the last ``window`` steps if they shrink geometrically."""
    if len(steps) < window:
        return None
    tail = np.array(steps[-window:])
    ratios = tail[1:] / tail[:-1]
    q = float(np.median(ratios))
    if 0.05 < q < 0.95 and np.ptp(ratios) < 0.02:
        return q
    return None


def _classify(eigs, rtol=1e-7) -> str:
    lo, hi = sorted(eigs)
    scale = max(abs(lo), abs(hi))
    if scale == 0 or abs(lo) <= rtol * scale or abs(hi) <= rtol * scale:
        return "degenerate"
    if lo > 0:
        return "min"
    if hi < 0:
        return "max"
    return "saddle"


def find_critical_points(
    fld: CurvatureField,
    pair: ConfocalPair,
    facet: int | None = None,
    *,
    step_tol: float = 1e-10,
    max_iter: int = 50,
) -> CurvatureField:
    """Locate and classify the interior critical points of ``fld``.

    Seeds come from the grid (a node lower/higher than all eight neighbours,
    or whose neighbour ring changes sign at least four times).  Each seed is
    refined by Newton's method on the exact gradient with steps clipped to
    one grid cell.  Points that fail to converge are kept with
    ``converged=False`` and a diagnostic.  Returns a copy of ``fld`` with
    ``critical_points`` filled, sorted by ``u``.
    """
    facet = fld.facet if facet is None else facet
    idx = {"gaussian": (0, 1), "mean": (2, 3)}[fld.which]
    which = 0 if fld.which == "gaussian" else 1
    u_grid, v_grid, values = np.asarray(fld.u), np.asarray(fld.v), np.asarray(fld.values)
    if len(u_grid) < 64 or len(v_grid) < 17:
        raise ValueError("critical point search needs at least a 64 x 17 grid")
    period = pair.period
    periodic = np.isclose(u_grid[-1] - u_grid[0], period) or np.isclose(
        u_grid[-1] + (u_grid[1] - u_grid[0]) - u_grid[0], period
    )
    if np.isclose(u_grid[-1] - u_grid[0], period):
        u_grid, values = u_grid[:-1], values[:-1]
    hu, hv = u_grid[1] - u_grid[0], v_grid[1] - v_grid[0]

    def fn(u, v):
        return float(curvature_at(pair, facet, u, v)[which])

    def grad(u, v):
        g = curvature_gradient(pair, facet, u, v)
        return float(g[idx[0]]), float(g[idx[1]])

    found: list[CriticalPoint] = []
    for i, j, _ in _seed_nodes(values, periodic):
        x, converged, note = _newton(grad, np.array([u_grid[i], v_grid[j]]), (hu, hv), step_tol, max_iter)
        u_c, v_c = float(np.mod(x[0], period)), float(x[1])
        tol_u, tol_v = (1e-6, 1e-6) if converged else (hu, hv)
        if any(
            abs(c.v - v_c) < tol_v and min(abs(c.u - u_c), period - abs(c.u - u_c)) < tol_u for c in found
        ):
            continue
        eigs = tuple(float(e) for e in np.linalg.eigvalsh(_hessian(grad, u_c, v_c)))
        found.append(
            CriticalPoint(
                u=u_c,
                v=v_c,
                value=fn(u_c, v_c),
                morse_type=_classify(eigs),
                hessian_eigs=eigs,
                gradient_norm=float(np.linalg.norm(_fd_gradient(fn, u_c, v_c))),
                converged=converged,
                diagnostic=note,
            )
        )
    found.sort(key=lambda c: (not c.converged, c.u, c.v))
    return dataclasses.replace(fld, critical_points=tuple(found))
