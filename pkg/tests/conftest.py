import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from polyweb.geometry import ConvexDomain, Line, WindowFamily
from polyweb.webs import MarkerConfig

FAST = bool(int(os.environ.get("POLYWEB_FAST", "0")))


def scale(n: int, floor: int = 200) -> int:
    """Replica budget: full by default, reduced under POLYWEB_FAST=1."""
    return max(floor, n // 20) if FAST else n


@pytest.fixture(scope="session")
def unit_disc():
    return ConvexDomain.disc((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def disc_family(unit_disc):
    return WindowFamily(unit_disc, "concentric")


def random_marker_config(rng, k, dom, spread=0.6, coupled=False,
                         min_angle=0.02, min_dist=0.03) -> MarkerConfig:
    """General (optionally degenerate) marker configuration inside the ball
    of the given radius."""
    markers, lines = [], []
    for i in range(k):
        if coupled and i == 1:
            ln = lines[0]
        else:
            while True:
                ln = Line(rng.uniform(0, math.pi), rng.uniform(-spread * 0.85, spread * 0.85))
                if all(abs(math.sin(ln.phi - o.phi)) > min_angle
                       or abs(ln.rho - o.rho) > min_angle for o in lines):
                    break
        lines.append(ln)
        span = dom.chord(ln)
        lo, hi = max(span[0], -spread), min(span[1], spread)
        while True:
            u = rng.uniform(lo, hi)
            pt = ln.point_at(u)
            if math.hypot(*pt) < spread and all(
                    math.hypot(pt[0] - p[1][0], pt[1] - p[1][1]) > min_dist
                    for p in markers):
                break
        markers.append((ln, pt))
    return MarkerConfig(markers)
