import numpy as np
import pytest

from poncelet import pair_from_caustic
from poncelet.confocal import vertices
from poncelet.errors import DomainError
from poncelet.tangles import (
    CURVE_LABELS,
    SpaceCurve,
    gauss_linking_integral,
    linking_number,
    planar_track,
    sweep_curve,
    tangle_report,
)


def circle(center, e1, e2, radius=1.0, n=512, label="c"):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)[:, None]
    pts = np.asarray(center) + radius * (np.cos(t) * np.asarray(e1) + np.sin(t) * np.asarray(e2))
    return SpaceCurve(label, pts)


X, Y, Z = np.eye(3)


def hopf_pair(n=512):
    return circle([0, 0, 0], X, Y, n=n, label="a"), circle([1, 0, 0], X, Z, n=n, label="b")


def borromean(n=400):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    c, s = 2 * np.cos(t), np.sin(t)
    z = np.zeros_like(t)
    return [
        SpaceCurve("r1", np.column_stack([c, s, z])),
        SpaceCurve("r2", np.column_stack([z, c, s])),
        SpaceCurve("r3", np.column_stack([s, z, c])),
    ]


@pytest.fixture(scope="module")
def curves(pair):
    return {label: sweep_curve(pair, label, 1024) for label in CURVE_LABELS}


# -- fixtures with known answers ---------------------------------------------------


def test_hopf_circles():
    a, b = hopf_pair()
    lk, res = linking_number(a, b)
    assert abs(lk) == 1 and res <= 1e-3


def test_distant_circles():
    a = circle([0, 0, 0], X, Y)
    b = circle([5, 0, 0], X, Y)
    assert linking_number(a, b) == (0, pytest.approx(0, abs=1e-9))


def test_reversal_negates():
    a, b = hopf_pair()
    lk = linking_number(a, b)[0]
    assert linking_number(a.reversed(), b)[0] == -lk
    assert linking_number(a, b.reversed())[0] == -lk
    assert linking_number(a.reversed(), b.reversed())[0] == lk


def test_symmetric():
    a, b = hopf_pair(300)
    assert linking_number(a, b)[0] == linking_number(b, a)[0]
    assert gauss_linking_integral(a.points, b.points) == pytest.approx(gauss_linking_integral(b.points, a.points), abs=1e-12)


def test_polyline_sum_is_exact_even_when_coarse():
    a, b = hopf_pair(8)
    lk, res = linking_number(a, b)
    assert abs(lk) == 1 and res <= 1e-12


def test_torus_knot_winding():
    """A (1, 3) curve on a torus links the core circle three times."""
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    R, r = 3.0, 1.0
    w = 3 * t
    knot = np.column_stack([(R + r * np.cos(w)) * np.cos(t), (R + r * np.cos(w)) * np.sin(t), r * np.sin(w)])
    core = circle([0, 0, 0], X, Y, radius=R, n=2000)
    assert abs(linking_number(SpaceCurve("k", knot), core)[0]) == 3


def test_too_close():
    a = circle([0, 0, 0], X, Y)
    b = circle([0, 0, 1e-9], X, Y)
    with pytest.raises(DomainError, match="nearly touch"):
        linking_number(a, b)


def test_borromean_rings_pairwise_unlinked():
    rings = borromean()
    rep = tangle_report(rings, nontrivial=True)
    assert np.all(rep.matrix == 0)
    assert rep.classification == "borromean_like"
    assert tangle_report(rings).classification == "other"


def test_unreliable_report_has_no_classification(pair):
    # closed polylines give integers up to rounding; a zero threshold exposes the rounding
    c = [sweep_curve(pair, label, 256) for label in ("contact_1", "contact_2", "X1")]
    rep = tangle_report(c, threshold=0.0)
    assert not rep.reliable and rep.classification is None and rep.notes


def test_report_needs_two_curves():
    with pytest.raises(ValueError):
        tangle_report([circle([0, 0, 0], X, Y)])


# -- swept curves ------------------------------------------------------------------


def test_curves_close(pair):
    for label in CURVE_LABELS:
        ends = planar_track(pair, label, np.array([0.0, pair.period]))
        assert np.abs(ends[0] - ends[1]).max() <= 1e-11


def test_unknown_label(pair):
    with pytest.raises(ValueError):
        planar_track(pair, "X9", np.zeros(3))
    with pytest.raises(ValueError):
        sweep_curve(pair, "X1", 16)


def _preimage(curve, R):
    P = curve.points
    return np.column_stack([np.hypot(P[:, 0], P[:, 1]) - R, P[:, 2]])


def test_contact_curve_on_caustic(pair, curves):
    for i in (1, 2, 3):
        xy = _preimage(curves[f"contact_{i}"], 2 * pair.a)
        assert np.abs((xy[:, 0] / pair.a_c) ** 2 + (xy[:, 1] / pair.b_c) ** 2 - 1).max() <= 1e-10


def test_barycenter_curve_is_vertex_mean(pair, curves):
    R = 2 * pair.a
    mean = sum(_preimage(curves[f"vertex_{i}"], R) for i in (1, 2, 3)) / 3
    assert np.abs(_preimage(curves["X2"], R) - mean).max() <= 1e-12
    u = np.linspace(0, pair.period, 1024, endpoint=False)
    assert np.abs(_preimage(curves["vertex_1"], R) - vertices(pair, u)[:, 0]).max() <= 1e-12


def test_contact_rings(curves):
    rep = tangle_report([curves[f"contact_{i}"] for i in (1, 2, 3)])
    assert rep.classification == "hopf_3_link"
    assert rep.reliable and rep.residuals.max() <= 0.05
    d = rep.as_dict()
    assert d["matrix"] == rep.matrix.tolist() and d["labels"] == ["contact_1", "contact_2", "contact_3"]


def test_vertex_rings(curves):
    rep = tangle_report([curves[f"vertex_{i}"] for i in (1, 2, 3)])
    assert rep.classification == "hopf_3_link"


def test_centers_twist_three_times(curves):
    lk, res = linking_number(curves["X1"], curves["X2"])
    assert abs(lk) == 3 and res <= 0.05
    for X_ in ("X1", "X2"):
        for i in (1, 2, 3):
            assert abs(linking_number(curves[X_], curves[f"contact_{i}"])[0]) == 1


@pytest.mark.parametrize("ratio", [0.3, 0.8])
def test_other_aspect_ratios(ratio):
    p = pair_from_caustic(1.0, ratio)
    c = [sweep_curve(p, label, 512) for label in ("contact_1", "contact_2", "contact_3")]
    assert tangle_report(c).classification == "hopf_3_link"
    assert abs(linking_number(sweep_curve(p, "X1", 512), sweep_curve(p, "X2", 512))[0]) == 3


def test_major_radius_invariance(pair):
    results = set()
    for R in (1.5 * pair.a, 2 * pair.a, 3 * pair.a):
        a = sweep_curve(pair, "contact_1", 512, R)
        b = sweep_curve(pair, "contact_2", 512, R)
        results.add(linking_number(a, b)[0])
    assert len(results) == 1


def test_resampling_invariance(pair):
    raw = []
    for n in (1024, 2048):
        a = sweep_curve(pair, "vertex_1", n)
        b = sweep_curve(pair, "vertex_2", n)
        raw.append(gauss_linking_integral(a.points, b.points))
    assert abs(raw[0] - raw[1]) < 1e-3
