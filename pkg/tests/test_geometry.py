import math

import numpy as np
import pytest
from scipy import integrate

from polyweb.geometry import (ConvexDomain, Line, Segment, WindowFamily,
                              intersect, mu_hit_measure, separates)


def test_line_parametrisation():
    l = Line(0.0, 0.5)
    assert l.point_at(0.0) == (0.0, 0.5)          # foot of the perpendicular
    assert abs(l.signed_offset((3.0, 0.5))) < 1e-12
    v = Line.from_points((0.25, 0.0), (0.25, 1.0))
    assert abs(v.phi - math.pi / 2) < 1e-12 and abs(v.rho - 0.25) < 1e-12


def test_intersect_examples():
    assert np.allclose(intersect(Line(0.0, 0.0), Line(math.pi / 2, 0.0)), (0.0, 0.0))
    assert np.allclose(intersect(Line(0.0, 1.0), Line(math.pi / 2, 1.0)), (1.0, 1.0))
    assert intersect(Line(0.3, 0.2), Line(0.3, 0.2)) is None
    assert Line(0.3, 0.2).same_line(Line(0.3, 0.2))


def test_u_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(50):
        l = Line(rng.uniform(0, math.pi), rng.uniform(-2, 2))
        u = rng.uniform(-3, 3)
        assert abs(l.u_of(l.point_at(u)) - u) < 1e-12


def test_mu_hit_segment_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = tuple(rng.uniform(-1, 1, 2))
        b = tuple(rng.uniform(-1, 1, 2))
        if math.dist(a, b) < 1e-3:
            continue
        seg = Segment(a, b)
        assert mu_hit_measure(seg) == pytest.approx(2 * seg.length, rel=1e-9)


def _mu_quadrature(dom):
    # oracle: integrate the width function over directions
    val, _ = integrate.quad(lambda phi: dom.width(phi), 0, math.pi, limit=200)
    return val


def test_mu_hit_domain_is_perimeter():
    disc = ConvexDomain.disc((0.2, -0.1), 0.7)
    assert mu_hit_measure(disc) == pytest.approx(2 * math.pi * 0.7, rel=1e-12)
    assert mu_hit_measure(disc) == pytest.approx(_mu_quadrature(disc), rel=1e-6)
    rng = np.random.default_rng(3)
    for _ in range(5):
        pts = rng.uniform(-1, 1, (12, 2))
        from polyweb.geometry import convex_hull
        hull = convex_hull([tuple(p) for p in pts])
        if len(hull) < 3:
            continue
        try:
            poly = ConvexDomain.polygon(hull)
        except ValueError:
            continue
        assert mu_hit_measure(poly) == pytest.approx(poly.perimeter(), rel=1e-9)
        assert mu_hit_measure(poly) == pytest.approx(_mu_quadrature(poly), rel=1e-6)


def test_separates():
    x_axis = Line.from_points((0, 0), (1, 0))
    assert separates(x_axis, [(0, 1), (1, 2)])
    assert not separates(x_axis, [(0, 1), (0, -1)])
    assert separates(x_axis, [])
    # permutation and interior-point invariance
    pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)]
    inside = (1.0, 1.0)
    assert separates(x_axis, pts) == separates(x_axis, pts[::-1]) \
        == separates(x_axis, pts + [inside])


def test_window_at_endpoints(unit_disc, disc_family):
    assert disc_family.window_at(0.5).radius == pytest.approx(0.5)
    d1 = disc_family.window_at(1.0)
    assert d1.radius == pytest.approx(1.0)
    with pytest.raises(ValueError):
        disc_family.window_at(1.5)
    with pytest.raises(ValueError):
        disc_family.window_at(0.0)


def test_window_monotone():
    sq = ConvexDomain.square((0.5, 0.5), 1.0)
    fam = WindowFamily(sq, "homothety", origin=(0.4, 0.6))
    rng = np.random.default_rng(4)
    for _ in range(20):
        t1, t2 = sorted(rng.uniform(0.05, 1.0, 2))
        if t2 - t1 < 1e-3:
            continue
        inner, outer = fam.window_at(t1), fam.window_at(t2)
        assert all(outer.contains(v) for v in inner.vertices)


def test_reveal_examples(disc_family):
    assert disc_family.reveal_time((0.3, 0.0)) == pytest.approx(0.3)
    assert disc_family.reveal_time((0.0, 0.0)) == 0.0
    sq = ConvexDomain.square((0.5, 0.5), 1.0)
    fam = WindowFamily(sq, "homothety", origin=(0.5, 0.5))
    assert fam.reveal_time((1.0, 0.5)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        disc_family.reveal_time((2.0, 2.0))


def test_anchor_square_example():
    sq = ConvexDomain.square((0.5, 0.5), 1.0)
    fam = WindowFamily(sq, "homothety", origin=(0.5, 0.5))
    vline = Line.from_points((0.25, 0.0), (0.25, 1.0))
    p, tau = fam.anchor(vline)
    assert p == pytest.approx((0.25, 0.5), abs=1e-9)
    assert tau == pytest.approx(0.5, abs=1e-9)


def test_anchor_reveal_consistency(disc_family):
    # anchor time equals the reveal time of the anchor point, and an
    # independent bisection along the line finds no earlier time
    rng = np.random.default_rng(5)
    fams = [disc_family,
            WindowFamily(ConvexDomain.disc((0, 0), 1.0), "homothety", origin=(0.3, -0.2)),
            WindowFamily(ConvexDomain.square((0, 0), 1.6), "homothety", origin=(0.1, 0.2))]
    for fam in fams:
        for _ in range(20):
            line = Line(rng.uniform(0, math.pi), rng.uniform(-0.7, 0.7))
            if fam.base.chord(line) is None:
                continue
            p, tau = fam.anchor(line)
            assert fam.reveal_time(p) == pytest.approx(tau, abs=1e-12)
            lo, hi = fam.base.chord(line)
            grid = [fam.reveal_time(line.point_at(u))
                    for u in np.linspace(lo + 1e-9, hi - 1e-9, 200)]
            assert min(grid) >= tau - 1e-9


def test_anchor_through_origin(disc_family):
    line = Line.through((0.0, 0.0), 1.234)
    p, tau = disc_family.anchor(line)
    assert tau == pytest.approx(0.0, abs=1e-9)
    assert math.hypot(*p) < 1e-6


def test_tip_u_tracks_boundary(disc_family):
    line = Line(0.0, 0.5)
    for t in (0.55, 0.7, 0.99):
        for side in (+1, -1):
            u = disc_family.tip_u(line, side, t)
            assert disc_family.reveal_time(line.point_at(u)) == pytest.approx(t, abs=1e-9)
    fam = WindowFamily(ConvexDomain.square((0, 0), 1.6), "homothety", origin=(0.2, 0.1))
    line2 = Line(0.7, 0.2)
    for t in (0.6, 0.9):
        u = fam.tip_u(line2, +1, t)
        assert fam.reveal_time(line2.point_at(u)) == pytest.approx(t, abs=1e-9)


def test_chord_tangent_is_miss(unit_disc):
    assert unit_disc.chord(Line(0.3, 1.0)) is None
    assert unit_disc.chord(Line(0.3, 1.0 + 1e-12)) is None
    # a tiny but positive chord is a hit: only sub-tolerance chords are misses
    span = unit_disc.chord(Line(0.3, 1.0 - 1e-9))
    assert span is not None and span[1] - span[0] > 0
