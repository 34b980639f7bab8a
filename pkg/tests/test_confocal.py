import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poncelet.confocal import (
    angular_positions,
    billiard_invariants,
    centers,
    contact_points,
    pair_from_caustic,
    pair_from_outer,
    side_lengths,
    standard_angular_positions,
    tangency_residual,
    triangle_at,
    triangle_center,
    vertex_derivatives,
    vertices,
)
from poncelet.elliptic import incomplete_K
from poncelet.errors import DomainError, NumericError


def support_residual(pair, p, q):
    """|c^2 - (a_c^2 n_x^2 + b_c^2 n_y^2)| for the line n.x = c through p, q.

    A line is tangent to the ellipse exactly when its offset equals the
    support function in the normal direction.
    """
    d = q - p
    n = np.stack([-d[..., 1], d[..., 0]], axis=-1)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    c = np.sum(n * p, axis=-1)
    return np.abs(c * c - (pair.a_c**2 * n[..., 0] ** 2 + pair.b_c**2 * n[..., 1] ** 2))


def on_ellipse(xy, a, b):
    return np.abs((xy[..., 0] / a) ** 2 + (xy[..., 1] / b) ** 2 - 1)


def test_near_circle_limit():
    p = pair_from_caustic(1.0, 0.9999)
    assert p.m < 2e-4
    assert abs(p.a / p.b - 1) < 1e-4


def test_confocality(pair):
    assert abs(pair.a**2 - pair.b**2 - (pair.a_c**2 - pair.b_c**2)) <= 1e-12
    assert pair.is_nested()
    assert max(pair.invariant_residuals().values()) <= 1e-12
    assert pair.period == pytest.approx(4 * pair.K)
    assert pair.du == pytest.approx(4 * pair.K / 3)


def test_first_chord_is_tangent(pair):
    P = triangle_at(pair, 0.0).vertices
    assert support_residual(pair, P[0], P[1]) <= 1e-10
    assert tangency_residual(pair, P[0], P[1]) <= 1e-10


@pytest.mark.parametrize("a_c, b_c", [(1, 1), (0.5, 1), (1, 0), (1, -0.2)])
def test_bad_caustic(a_c, b_c):
    with pytest.raises(DomainError):
        pair_from_caustic(a_c, b_c)


@pytest.mark.parametrize("a, b", [(2.0, 1.0), (1.0, 0.9), (5.0, 1.0), (1.3, 1.0)])
def test_pair_from_outer_round_trip(a, b):
    p = pair_from_outer(a, b)
    assert abs(p.a - a) <= 1e-8 * a
    assert abs(p.b - b) <= 1e-8 * a
    assert max(p.invariant_residuals().values()) <= 1e-12
    q = pair_from_caustic(p.a_c, p.b_c)
    assert abs(q.a - a) <= 1e-8 * a and abs(q.b - b) <= 1e-8 * a
    rep = billiard_invariants(p)
    assert rep.perimeter_spread <= 1e-10 and rep.reflection_deviation <= 1e-9


def test_pair_from_outer_errors():
    with pytest.raises(DomainError):
        pair_from_outer(1.0, 1.0)
    with pytest.raises(DomainError):
        pair_from_outer(1.0, 2.0)
    with pytest.raises(NumericError, match="not bracketed"):
        pair_from_outer(2.0, 1.0, search=(0.5, 0.6))


def test_periodicity(pair):
    for u in (0.0, 0.37, 2.1, 5.0):
        s, t = triangle_at(pair, u), triangle_at(pair, u + pair.period)
        assert np.abs(s.vertices - t.vertices).max() <= 1e-11
        assert np.abs(s.contacts - t.contacts).max() <= 1e-11


def test_shift_by_du_relabels_vertices(pair):
    u = np.linspace(0, pair.period, 40)
    V0, V1 = vertices(pair, u), vertices(pair, u + pair.du)
    assert np.abs(V1 - np.roll(V0, -1, axis=-2)).max() <= 1e-12


def test_u0_isosceles_with_apex_on_top(pair):
    s = triangle_at(pair, 0.0)
    # sides[2] is opposite the apex P_3
    assert abs(s.sides[0] - s.sides[1]) <= 1e-12
    assert np.abs(s.vertices[2] - [0.0, pair.b]).max() <= 1e-12


@pytest.mark.parametrize("j, apex", [(1, (-1, 0)), (2, (0, -1)), (3, (1, 0))])
def test_apex_visits_the_axis_vertices(pair, j, apex):
    s = triangle_at(pair, j * pair.K)
    P3 = s.vertices[2]
    assert np.abs(P3 - np.array(apex) * [pair.a, pair.b]).max() <= 1e-12
    assert abs(s.sides[0] - s.sides[1]) <= 1e-12


def test_perimeter_constant(pair):
    rng = np.random.default_rng(7)
    p0 = triangle_at(pair, 0.0).perimeter
    for u in rng.uniform(0, pair.period, 100):
        assert abs(triangle_at(pair, u).perimeter - p0) <= 1e-10 * p0


def test_geometry_of_family(ratio_pair):
    p = ratio_pair
    u = np.linspace(0, p.period, 300)
    V = vertices(p, u)
    Q = contact_points(p, V)
    assert on_ellipse(V, p.a, p.b).max() <= 1e-12
    assert on_ellipse(Q, p.a_c, p.b_c).max() <= 1e-10
    W = np.roll(V, -1, axis=-2)
    assert support_residual(p, V, W).max() <= 1e-10
    # Q_i on segment P_i P_{i+1}, strictly inside
    d = W - V
    t = np.sum((Q - V) * d, axis=-1) / np.sum(d * d, axis=-1)
    off = np.abs(d[..., 0] * (Q - V)[..., 1] - d[..., 1] * (Q - V)[..., 0]) / np.linalg.norm(d, axis=-1)
    assert off.max() <= 1e-10
    assert t.min() > 0 and t.max() < 1


def test_counter_clockwise_orientation(pair):
    V = vertices(pair, np.linspace(0, pair.period, 50))
    e1, e2 = V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]
    assert np.all(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] > 0)


def test_vertex_derivatives_by_finite_differences(pair):
    u = np.linspace(0, pair.period, 37)
    h = 1e-5
    P = vertex_derivatives(pair, u)
    for k in range(1, 4):
        fd = (vertex_derivatives(pair, u + h)[k - 1] - vertex_derivatives(pair, u - h)[k - 1]) / (2 * h)
        assert np.abs(fd - P[k]).max() <= 1e-7 * max(1.0, np.abs(P[k]).max())


@pytest.mark.parametrize("ratio", [0.3, 0.5, 0.8])
def test_billiard_invariants(ratio):
    rep = billiard_invariants(pair_from_caustic(1.0, ratio), 256)
    assert rep.perimeter_spread <= 1e-10
    assert rep.reflection_deviation <= 1e-9
    assert rep.cosine_sum_spread <= 1e-10
    assert rep.tangency_residual <= 1e-9
    assert set(rep.as_dict()) >= {"perimeter", "cosine_sum"}


def test_reflection_law_by_bisector(pair):
    """Unit incoming + unit outgoing directions are parallel to the normal."""
    V = vertices(pair, np.linspace(0, pair.period, 256, endpoint=False))
    w_in = np.roll(V, 1, axis=-2) - V
    w_out = np.roll(V, -1, axis=-2) - V
    bis = w_in / np.linalg.norm(w_in, axis=-1, keepdims=True) + w_out / np.linalg.norm(w_out, axis=-1, keepdims=True)
    grad = V / np.array([pair.a**2, pair.b**2])
    cross = bis[..., 0] * grad[..., 1] - bis[..., 1] * grad[..., 0]
    cos = cross / (np.linalg.norm(bis, axis=-1) * np.linalg.norm(grad, axis=-1))
    assert np.abs(np.arcsin(cos)).max() <= 1e-9


def test_near_circle_cosine_sum():
    rep = billiard_invariants(pair_from_caustic(1.0, 0.9999))
    assert abs(rep.cosine_sum - 1.5) <= 1e-8


def test_billiard_invariants_needs_samples(pair):
    with pytest.raises(ValueError):
        billiard_invariants(pair, 1)


def test_centers_fixtures():
    assert np.allclose(triangle_center(np.array([[0, 1], [1, 0], [-1, 0]]), "X2"), [0, 1 / 3], atol=1e-15)
    assert np.allclose(triangle_center(np.array([[0, 0], [4, 0], [0, 3]]), "X1"), [1, 1], atol=1e-15)
    eq = np.array([[math.cos(t), math.sin(t)] for t in (0.3, 0.3 + 2 * math.pi / 3, 0.3 + 4 * math.pi / 3)])
    assert np.abs(centers(eq, "incenter")).max() <= 1e-15
    assert np.abs(centers(eq, "barycenter")).max() <= 1e-15
    with pytest.raises(ValueError):
        centers(eq, "X3")


def test_centers_coincide_in_circular_limit():
    p = pair_from_caustic(1.0, 1.0 - 1e-10)
    for u in (0.0, 0.4, 2.0):
        s = triangle_at(p, u)
        X1, X2 = triangle_center(s, "X1"), triangle_center(s, "X2")
        assert np.abs(X1 - X2).max() <= 1e-9
        assert np.abs(X1).max() <= 1e-9


def test_incenter_is_equidistant_from_sides(pair):
    s = triangle_at(pair, 0.9)
    I = triangle_center(s, "X1")
    V, W = s.vertices, np.roll(s.vertices, -1, axis=0)
    d = W - V
    dist = np.abs(d[:, 0] * (I - V)[:, 1] - d[:, 1] * (I - V)[:, 0]) / np.linalg.norm(d, axis=1)
    assert np.ptp(dist) <= 1e-12


def test_angular_positions_are_delayed_copies(pair):
    u = np.linspace(0, pair.period, 401)
    t = angular_positions(pair, u)
    t_prev = angular_positions(pair, u - pair.du)
    for i in range(3):
        diff = t[:, i] - t_prev[:, (i + 1) % 3]
        assert np.ptp(diff) <= 1e-9
        assert abs(math.remainder(diff[0], 2 * math.pi)) <= 1e-9


def test_one_turn_per_period(ratio_pair):
    u = np.linspace(0, ratio_pair.period, 257)
    t = angular_positions(ratio_pair, u)
    assert np.abs(t[-1] - t[0] - 2 * math.pi).max() <= 1e-11
    assert np.all(np.diff(t, axis=0) > 0)


@pytest.mark.parametrize("eps", [1e-4, 1e-6, 1e-8])
def test_angles_linear_in_circular_limit(eps):
    p = pair_from_caustic(1.0, 1.0 - eps)
    u = np.linspace(0, p.period, 101)
    t = angular_positions(p, u)
    slopes = []
    for i in range(3):
        coef = np.polyfit(u, t[:, i], 1)
        slopes.append(coef[0])
        # deviation from linear shrinks with m ~ 2 eps
        assert np.abs(np.polyval(coef, u) - t[:, i]).max() <= p.m
    assert np.ptp(slopes) <= p.m
    assert slopes[0] == pytest.approx(2 * math.pi / p.period, rel=p.m)


def test_standard_parametrization(pair):
    t = np.linspace(0, 2 * math.pi, 50)
    std = standard_angular_positions(pair, t)
    assert np.abs(std[:, 0] - t).max() <= 1e-12
    # same triangles as the Jacobi family
    u = incomplete_K(t - math.pi / 2, pair.m) - pair.du
    V = vertices(pair, u)
    W = np.stack([pair.a * np.cos(std), pair.b * np.sin(std)], axis=-1)
    assert np.abs(V - W).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-100, 100, allow_nan=False), r=st.floats(0.05, 0.95))
def test_sides_always_tangent(u, r):
    p = pair_from_caustic(1.0, r)
    V = vertices(p, u)
    assert np.all(tangency_residual(p, V, np.roll(V, -1, axis=0)) <= 1e-9)
    assert np.all(side_lengths(V) > 0)
