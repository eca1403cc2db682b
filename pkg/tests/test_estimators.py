import math

import numpy as np
import pytest

from polyweb.activity import ActivityMeasure
from polyweb.arrangement import count_marked
from polyweb.estimators import (DualityReport, EstimateReport, MarkerWindowError,
                                RunningStat, estimate_crop_expectation,
                                estimate_phi, estimate_phi_exact,
                                verify_duality, verify_partition, window_mass)
from polyweb.geometry import ConvexDomain, Line, WindowFamily
from polyweb.webs import MarkerConfig

from conftest import random_marker_config, scale

ACT1 = ActivityMeasure.homogeneous(1.0)


def test_running_stat_merge():
    rng = np.random.default_rng(1)
    xs = rng.normal(size=1000)
    a, b, c = RunningStat(), RunningStat(), RunningStat()
    for x in xs:
        c.push(x)
    for x in xs[:400]:
        a.push(x)
    for x in xs[400:]:
        b.push(x)
    m = a.merge(b)
    assert m.n == c.n
    assert m.mean == pytest.approx(c.mean)
    assert m.variance == pytest.approx(c.variance)


def test_window_mass_homogeneous():
    line = Line(0.4, 0.1)
    assert window_mass(ACT1, line, line.point_at(0.0), 0.02, 0.03) == \
        pytest.approx(4 * 0.02 * 0.03)


def test_phi_k0_is_one(disc_family):
    rep = estimate_phi(MarkerConfig([]), ACT1, disc_family, 0.02, 0.02, 10,
                       np.random.default_rng(0))
    assert rep.estimate == 1.0 and rep.se == 0.0


def test_singular_rejected(disc_family):
    l1 = Line(0.0, 0.2)
    l2 = Line.through((0.5, 0.2), 1.2)   # passes through marker 1's point
    mc = MarkerConfig([(l1, (0.5, 0.2)), (l2, l2.point_at(0.4))])
    with pytest.raises(MarkerWindowError):
        estimate_phi(mc, ACT1, disc_family, 0.02, 0.02, 10, np.random.default_rng(0))
    with pytest.raises(MarkerWindowError):
        estimate_phi_exact(mc, ACT1, 10, np.random.default_rng(0))


def test_overlapping_windows_rejected(disc_family):
    l1 = Line(0.4, 0.1)
    l2 = Line(0.405, 0.1)  # nearly identical line, windows overlap
    mc = MarkerConfig([(l1, l1.point_at(0.0)), (l2, l2.point_at(0.02))])
    with pytest.raises(MarkerWindowError):
        estimate_phi(mc, ACT1, disc_family, 0.05, 0.05, 10, np.random.default_rng(0))


def test_phi_window_k1(disc_family):
    line = Line(0.9, 0.3)
    mc = MarkerConfig([(line, line.point_at(0.15))])
    n = scale(12000, floor=2500)
    rep = estimate_phi(mc, ACT1, disc_family, 0.04, 0.04, n,
                       np.random.default_rng(21), probes=8)
    assert abs(rep.estimate - 1.0) <= 4 * rep.se
    assert rep.se < 0.25


def test_phi_exact_k1_and_k2():
    l1 = Line(0.9, 0.3)
    l2 = Line(2.1, -0.15)
    n = scale(12000, floor=3000)
    rep1 = estimate_phi_exact(MarkerConfig([(l1, l1.point_at(0.2))]), ACT1, n,
                              np.random.default_rng(31))
    assert abs(rep1.estimate - 1.0) <= 4 * rep1.se
    mc2 = MarkerConfig([(l1, l1.point_at(0.2)), (l2, l2.point_at(-0.2))])
    rep2 = estimate_phi_exact(mc2, ACT1, n, np.random.default_rng(32), pad=0.08)
    assert abs(rep2.estimate - 1.0) <= 4 * rep2.se


def test_crop_expectation_zero_activity(disc_family):
    mc = MarkerConfig([(Line(0.0, 0.2), (-0.85, 0.2)),
                       (Line(math.pi / 2, -0.5), (-0.5, 0.1))])
    act0 = ActivityMeasure.homogeneous(0.0)
    rep = estimate_crop_expectation(mc, act0, disc_family, "tangency", 50,
                                    np.random.default_rng(0))
    want = count_marked([m[0] for m in mc.markers], [m[1] for m in mc.markers],
                        disc_family.base)
    assert rep.estimate == float(want)
    assert rep.se == 0.0


def test_crop_expectation_k1(disc_family):
    line = Line(0.5, -0.2)
    mc = MarkerConfig([(line, line.point_at(0.3))])
    n = scale(6000, floor=1500)
    for rule in ("tangency", "immediate"):
        rep = estimate_crop_expectation(mc, ACT1, disc_family, rule, n,
                                        np.random.default_rng(10))
        assert abs(rep.estimate - 1.0) <= 3 * max(rep.se, 1e-12)


def test_verify_duality_exact_k2(disc_family):
    l1 = Line(0.9, 0.3)
    l2 = Line(2.1, -0.15)
    mc = MarkerConfig([(l1, l1.point_at(0.2)), (l2, l2.point_at(-0.2))])
    n = scale(8000, floor=2000)
    rep = verify_duality(mc, ACT1, disc_family, 0.02, 0.02, n, n,
                         np.random.default_rng(1), np.random.default_rng(2),
                         method="exact")
    assert rep.passed, (rep.phi.estimate, rep.crop.estimate, rep.combined_se)


def test_verify_partition_small_lambda():
    act = ActivityMeasure.homogeneous(0.5)
    n = scale(30000, floor=8000)
    rep = verify_partition(act, ConvexDomain.square((0, 0), 0.5), n,
                           np.random.default_rng(5))
    assert rep.reliable
    assert abs(rep.mc_mean - rep.target) <= 4 * rep.se


def test_phi_rotation_invariance(disc_family):
    # k = 1 estimate is rotation invariant for isotropic activity
    n = scale(6000, floor=1500)
    reps = []
    for theta, seed in ((0.0, 51), (1.3, 52)):
        line = Line.through((0.3 * math.cos(theta), 0.3 * math.sin(theta)),
                            0.9 + theta)
        mc = MarkerConfig([(line, (0.3 * math.cos(theta), 0.3 * math.sin(theta)))])
        reps.append(estimate_phi(mc, ACT1, disc_family, 0.04, 0.04, n,
                                 np.random.default_rng(seed), probes=4))
    diff = abs(reps[0].estimate - reps[1].estimate)
    assert diff <= 3 * math.hypot(reps[0].se, reps[1].se)
