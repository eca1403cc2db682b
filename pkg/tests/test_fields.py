import math

import numpy as np
import pytest
from scipy import stats

from polyweb.activity import ActivityMeasure
from polyweb.fields import (check_admissible, edge_pieces_in, marker_hit,
                            sample_field)
from polyweb.geometry import ConvexDomain, Line, Segment, WindowFamily

from conftest import scale

ACT1 = ActivityMeasure.homogeneous(1.0)


def test_zero_activity_empty(disc_family):
    s = sample_field(ActivityMeasure.homogeneous(0.0), disc_family,
                     np.random.default_rng(0))
    assert s.edges == []
    assert check_admissible(s).ok


def test_admissibility(disc_family):
    bad = 0
    for i in range(scale(1500, floor=300)):
        s = sample_field(ACT1, disc_family, np.random.default_rng(7000 + i))
        if not check_admissible(s).ok:
            bad += 1
    assert bad == 0


def test_vertex_birth_mean_unit_square():
    fam = WindowFamily(ConvexDomain.square((0.5, 0.5), 1.0), "homothety",
                       origin=(0.5, 0.5))
    n = scale(4000, floor=800)
    counts = [sample_field(ACT1, fam, np.random.default_rng(90000 + i)).vertex_birth_count
              for i in range(n)]
    se = np.std(counts) / math.sqrt(n)
    assert abs(np.mean(counts) - math.pi) <= 3 * se


def test_check_admissible_detects_crossing(unit_disc, disc_family):
    from polyweb.fields import FieldEdge, FieldSample
    e1 = FieldEdge(Line(0.0, 0.0), "line-birth")
    e1.u_lo, e1.u_hi = -0.5, 0.5
    e2 = FieldEdge(Line(math.pi / 2, 0.0), "line-birth")
    e2.u_lo, e2.u_hi = -0.5, 0.5
    rep = check_admissible(FieldSample([e1, e2], unit_disc, disc_family))
    assert not rep.ok and any("intersect" in v for v in rep.violations)


def test_marker_hit_basics(disc_family):
    s = sample_field(ActivityMeasure.homogeneous(0.0), disc_family,
                     np.random.default_rng(0))
    assert not marker_hit(s, (Line(0.3, 0.1), (0.0, 0.0)), 0.05, 0.05)
    from polyweb.fields import FieldEdge, FieldSample
    e = FieldEdge(Line(0.3, 0.1), "line-birth")
    e.u_lo, e.u_hi = -0.4, 0.4
    s2 = FieldSample([e], disc_family.base, disc_family)
    pt = Line(0.3, 0.1).point_at(0.0)
    assert marker_hit(s2, (Line(0.3, 0.1), pt), 1e-6, 1e-6)
    assert not marker_hit(s2, (Line(0.3 + 0.2, 0.1), pt), 0.01, 0.01)


def test_marker_hit_window_scaling(disc_family):
    # hit frequency scales with the window mass (here eps^2), up to the O(eps)
    # window bias and counting noise
    line = Line(0.9, 0.15)
    pt = line.point_at(0.1)
    n = scale(40000, floor=8000)
    rng = np.random.default_rng(41)
    eps = [0.08, 0.04, 0.02]
    hits = {e: 0 for e in eps}
    for _ in range(n):
        s = sample_field(ACT1, disc_family, rng)
        for e in eps:
            if marker_hit(s, (line, pt), e, e):
                hits[e] += 1
    for a, b in ((eps[0], eps[1]), (eps[1], eps[2])):
        ratio = hits[a] / max(hits[b], 1)
        assert ratio == pytest.approx(4.0, rel=0.3)


def test_probe_crossing_rotation_invariance(disc_family):
    # mean number of field-edge crossings of a probe segment is rotation
    # invariant for isotropic activity
    n = scale(4000, floor=800)
    def crossings(theta, seed_base):
        c, s_ = math.cos(theta), math.sin(theta)
        a, b = (0.1 * c - 0.35 * s_, 0.1 * s_ + 0.35 * c), \
               (0.45 * c - 0.0 * s_, 0.45 * s_ + 0.0 * c)
        probe = Segment(a, b)
        pl = probe.line()
        lo, hi = pl.u_of(a), pl.u_of(b)
        lo, hi = min(lo, hi), max(lo, hi)
        total = 0
        vals = []
        from polyweb.geometry import intersect
        for i in range(n):
            sample = sample_field(ACT1, disc_family, np.random.default_rng(seed_base + i))
            cnt = 0
            for e in sample.edges:
                z = intersect(pl, e.line)
                if z is None:
                    continue
                u_p = pl.u_of(z)
                u_e = e.line.u_of(z)
                if lo <= u_p <= hi and e.u_lo <= u_e <= e.u_hi:
                    cnt += 1
            vals.append(cnt)
        return np.mean(vals), np.std(vals) / math.sqrt(n)
    m1, se1 = crossings(0.0, 300000)
    m2, se2 = crossings(1.1, 600000)
    assert abs(m1 - m2) <= 3 * math.hypot(se1, se2)


def test_consistency_restriction(disc_family, unit_disc):
    # edge-piece counts in a subwindow: direct sampling vs restriction
    sub = ConvexDomain.disc((0.0, 0.0), 0.55)
    fam_sub = WindowFamily(sub, "concentric")
    n = scale(4000, floor=1000)
    direct = [sample_field(ACT1, fam_sub, np.random.default_rng(10_000 + i)).edge_count()
              for i in range(n)]
    restricted = [edge_pieces_in(sample_field(ACT1, disc_family,
                                              np.random.default_rng(500_000 + i)), sub)
                  for i in range(n)]
    _, p = stats.ks_2samp(direct, restricted)
    assert p > 0.01


def test_window_family_invariance(unit_disc):
    fam_a = WindowFamily(unit_disc, "concentric")
    fam_b = WindowFamily(unit_disc, "homothety", origin=(0.3, 0.0))
    n = scale(4000, floor=1000)
    a = [sample_field(ACT1, fam_a, np.random.default_rng(20_000 + i)).edge_count()
         for i in range(n)]
    b = [sample_field(ACT1, fam_b, np.random.default_rng(820_000 + i)).edge_count()
         for i in range(n)]
    _, p = stats.ks_2samp(a, b)
    assert p > 0.01


def test_determinism(disc_family):
    s1 = sample_field(ACT1, disc_family, np.random.default_rng(99))
    s2 = sample_field(ACT1, disc_family, np.random.default_rng(99))
    assert [(e.line.phi, e.line.rho, e.u_lo, e.u_hi) for e in s1.edges] == \
           [(e.line.phi, e.line.rho, e.u_lo, e.u_hi) for e in s2.edges]
