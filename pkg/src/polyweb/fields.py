"""Event-driven sampler for consistent polygonal fields in a convex window.

The construction unfolds behind a growing window family: lines are born at
their anchor points, vertex pairs at window-revealed intersection sites, tips
update direction with the measure-hit hazard along swept arcs, and tips
colliding at a revealed intersection point stop each other.  All stochastic
clocks are drawn in arc length and mapped to times through reveal_time, so
the schedule is exact and deterministic given the generator.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .activity import ActivityMeasure
from .geometry import (EPS_GEO, ConvexDomain, DegenerateAnchorError, Line,
                       Point, Segment, WindowFamily, angle_gap, intersect)

# event ranks: tie-break order at equal times
_COLLISION, _BOUNDARY, _TURN, _BIRTH = 0, 1, 2, 3

#: lineage tags for edges
LINE_BIRTH = "line-birth"
VERTEX_BIRTH = "vertex-birth"
DIRECTIONAL_UPDATE = "directional-update"


@dataclass
class FieldEdge:
    line: Line
    lineage: str
    u_lo: float = math.nan
    u_hi: float = math.nan

    @property
    def a(self) -> Point:
        return self.line.point_at(self.u_lo)

    @property
    def b(self) -> Point:
        return self.line.point_at(self.u_hi)

    @property
    def length(self) -> float:
        return self.u_hi - self.u_lo

    def segment(self) -> Segment:
        return Segment(self.a, self.b)


class _Tip:
    __slots__ = ("tid", "edge_idx", "line", "side", "u_anchor", "u_exit", "alive")

    def __init__(self, tid, edge_idx, line, side, u_anchor, u_exit):
        self.tid = tid
        self.edge_idx = edge_idx
        self.line = line
        self.side = side
        self.u_anchor = u_anchor
        self.u_exit = u_exit
        self.alive = True


@dataclass
class FieldSample:
    edges: List[FieldEdge]
    domain: ConvexDomain
    family: WindowFamily
    seed: Optional[int] = None
    vertex_birth_count: int = 0
    line_birth_count: int = 0
    degenerate_resamples: int = 0

    def segments(self) -> List[Segment]:
        return [e.segment() for e in self.edges]

    def edge_count(self) -> int:
        return len(self.edges)


def sample_field(act: ActivityMeasure, fam: WindowFamily,
                 rng: np.random.Generator, seed: Optional[int] = None) -> FieldSample:
    """Draw one polygonal field in the base window of `fam`."""
    dom = fam.base
    edges: List[FieldEdge] = []
    tips: List[_Tip] = []
    heap: List[tuple] = []
    seq = 0
    degenerate = 0

    def push(t, rank, payload):
        nonlocal seq
        heapq.heappush(heap, (t, rank, seq, payload))
        seq += 1

    def u_tip_now(tip: _Tip, t: float) -> float:
        return fam.tip_u(tip.line, tip.side, t)

    def schedule_turn(tip: _Tip, t_now: float, u_now: float):
        max_arc = abs(tip.u_exit - u_now)
        res = act.next_arc_event(tip.line, u_now, float(tip.side), max_arc, rng)
        if res is None:
            return
        arc, new_line = res
        u_turn = u_now + tip.side * arc
        p = tip.line.point_at(u_turn)
        t_turn = fam.reveal_time(p)
        push(t_turn, _TURN, ("turn", tip.tid, u_turn, new_line))

    def schedule_collisions(tip: _Tip, t_now: float):
        for other in tips:
            if not other.alive or other.tid == tip.tid:
                continue
            if other.edge_idx == tip.edge_idx:
                continue
            z = intersect(tip.line, other.line)
            if z is None or not dom.contains(z):
                continue
            # ahead of both tips: correct side of each anchor, strictly later reveal
            if (z[0] * tip.line.dx + z[1] * tip.line.dy - tip.u_anchor) * tip.side <= EPS_GEO:
                continue
            if (z[0] * other.line.dx + z[1] * other.line.dy - other.u_anchor) * other.side <= EPS_GEO:
                continue
            t_z = fam.reveal_time(z)
            if t_z <= t_now:
                continue  # shared creation points reproduce t_now exactly
            push(t_z, _COLLISION, ("collision", tip.tid, other.tid, z))

    def new_tip(edge_idx: int, line: Line, side: int, t_now: float, u_now: float) -> _Tip:
        u_exit = fam.exit_u(line, side)
        tip = _Tip(len(tips), edge_idx, line, side, fam.anchor_u(line), u_exit)
        tips.append(tip)
        schedule_turn(tip, t_now, u_now)
        schedule_collisions(tip, t_now)
        return tip

    # colinear duplicates are mu-null; a rounded-key registry detects them
    line_keys = set()

    def line_is_fresh(line: Line) -> bool:
        key = (round(line.phi / 1e-7), round(line.rho / 1e-7))
        if key in line_keys:
            return False
        line_keys.add(key)
        return True

    # line births
    n_lines = 0
    for line in act.sample_line_process(dom, rng):
        try:
            _, tau = fam.anchor(line)
        except DegenerateAnchorError:
            degenerate += 1
            continue
        push(tau, _BIRTH, ("line", line))
        n_lines += 1

    # vertex births
    sites = act.sample_vertex_births(dom, rng)
    for z in sites:
        push(fam.reveal_time(z), _BIRTH, ("vertex", z))

    close_u: Dict[int, Dict[int, float]] = {}  # edge idx -> side -> stop coordinate

    def close_side(tip: _Tip, u_stop: float):
        tip.alive = False
        close_u.setdefault(tip.edge_idx, {})[tip.side] = u_stop

    while heap:
        t, rank, _, payload = heapq.heappop(heap)
        kind = payload[0]
        if kind == "line":
            line = payload[1]
            if not line_is_fresh(line):
                degenerate += 1
                continue
            u_a = fam.anchor_u(line)
            edge_idx = len(edges)
            edges.append(FieldEdge(line, LINE_BIRTH))
            new_tip(edge_idx, line, +1, t, u_a)
            new_tip(edge_idx, line, -1, t, u_a)
        elif kind == "vertex":
            z = payload[1]
            for _ in range(20):
                l1, l2 = act.sample_vertex_pair(z, rng)
                if line_is_fresh(l1) and line_is_fresh(l2) and not l1.same_line(l2, tol=1e-7):
                    u1, u2 = l1.u_of(z), l2.u_of(z)
                    try:
                        s1 = u1 - fam.anchor_u(l1)
                        s2 = u2 - fam.anchor_u(l2)
                    except DegenerateAnchorError:
                        degenerate += 1
                        continue
                    if abs(s1) > 10 * EPS_GEO and abs(s2) > 10 * EPS_GEO:
                        break
                degenerate += 1
            else:
                continue  # persistent degeneracy at this site: drop it
            for line, u_z, s in ((l1, u1, s1), (l2, u2, s2)):
                side = 1 if s > 0 else -1
                edge_idx = len(edges)
                edges.append(FieldEdge(line, VERTEX_BIRTH))
                close_u.setdefault(edge_idx, {})[-side] = u_z  # fixed inner end
                new_tip(edge_idx, line, side, t, u_z)
        elif kind == "turn":
            _, tid, u_turn, new_line = payload
            tip = tips[tid]
            if not tip.alive:
                continue
            if not line_is_fresh(new_line):
                degenerate += 1
                # re-draw a direction at the same point; keep the clock renewal exact
                p = tip.line.point_at(u_turn)
                new_line = act.sample_turn_direction(p, tip.line, rng)
                if not line_is_fresh(new_line):
                    continue
            p = tip.line.point_at(u_turn)
            close_side(tip, u_turn)
            try:
                u_a2 = fam.anchor_u(new_line)
            except DegenerateAnchorError:
                degenerate += 1
                continue
            u_p = new_line.u_of(p)
            side = 1 if u_p - u_a2 > 0 else -1
            edge_idx = len(edges)
            edges.append(FieldEdge(new_line, DIRECTIONAL_UPDATE))
            close_u.setdefault(edge_idx, {})[-side] = u_p
            nt = new_tip(edge_idx, new_line, side, t, u_p)
            schedule_collisions(nt, t)  # new geometry: check against all live tips
        elif kind == "collision":
            _, ta, tb, z = payload
            A, B = tips[ta], tips[tb]
            if not (A.alive and B.alive):
                continue
            close_side(A, A.line.u_of(z))
            close_side(B, B.line.u_of(z))

    # boundary sweep at t = 1
    for tip in tips:
        if tip.alive:
            close_side(tip, tip.u_exit)

    out: List[FieldEdge] = []
    for idx, e in enumerate(edges):
        stops = close_u.get(idx, {})
        if e.lineage == LINE_BIRTH:
            lo, hi = stops.get(-1), stops.get(+1)
        else:
            vals = sorted(stops.values())
            lo, hi = vals[0], vals[-1]
        if lo is None or hi is None:
            continue
        if hi - lo < 10 * EPS_GEO:
            degenerate += 1
            continue
        e.u_lo, e.u_hi = lo, hi
        out.append(e)

    return FieldSample(out, dom, fam, seed=seed,
                       vertex_birth_count=len(sites), line_birth_count=n_lines,
                       degenerate_resamples=degenerate)


# -- admissibility ----------------------------------------------------------

def _point_key(p: Point, tol: float) -> Tuple[int, int]:
    return (round(p[0] / tol), round(p[1] / tol))


def _dist_to_boundary(dom: ConvexDomain, p: Point) -> float:
    if dom.kind == "disc":
        return abs(math.hypot(p[0] - dom.center[0], p[1] - dom.center[1]) - dom.radius)
    best = math.inf
    vs = dom.vertices
    n = len(vs)
    for i in range(n):
        a, b = vs[i], vs[(i + 1) % n]
        ax, ay = b[0] - a[0], b[1] - a[1]
        t = ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / (ax * ax + ay * ay)
        t = min(1.0, max(0.0, t))
        q = (a[0] + t * ax, a[1] + t * ay)
        best = min(best, math.hypot(p[0] - q[0], p[1] - q[1]))
    return best


def _segments_cross(e1: FieldEdge, e2: FieldEdge, tol: float) -> bool:
    """Interior intersection test for two edges (shared endpoints allowed)."""
    z = intersect(e1.line, e2.line)
    if z is None:
        return False
    u1 = e1.line.u_of(z)
    u2 = e2.line.u_of(z)
    in1 = e1.u_lo - tol < u1 < e1.u_hi + tol
    in2 = e2.u_lo - tol < u2 < e2.u_hi + tol
    if not (in1 and in2):
        return False
    interior1 = e1.u_lo + tol < u1 < e1.u_hi - tol
    interior2 = e2.u_lo + tol < u2 < e2.u_hi - tol
    return interior1 or interior2


@dataclass
class AdmissibilityReport:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_admissible(sample: FieldSample, tol: float = 1e-7) -> AdmissibilityReport:
    """Verify the four admissibility properties of a sampled configuration."""
    violations: List[str] = []
    edges = sample.edges
    dom = sample.domain

    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if edges[i].line.same_line(edges[j].line, tol=tol):
                violations.append(f"edges {i} and {j} are colinear")
            elif _segments_cross(edges[i], edges[j], tol):
                violations.append(f"edges {i} and {j} intersect")

    degree: Dict[Tuple[int, int], int] = {}
    where: Dict[Tuple[int, int], Point] = {}
    for e in edges:
        for p in (e.a, e.b):
            k = _point_key(p, max(tol, 1e-7))
            degree[k] = degree.get(k, 0) + 1
            where[k] = p
    for k, deg in degree.items():
        p = where[k]
        # boundary endpoints come from exact chord formulas, so a tight
        # tolerance distinguishes them from interior turns near the boundary
        on_boundary = _dist_to_boundary(dom, p) <= 1e-8
        if on_boundary and deg != 1:
            violations.append(f"boundary vertex {p} has degree {deg} != 1")
        elif not on_boundary and deg != 2:
            violations.append(f"interior vertex {p} has degree {deg} != 2")

    for i, e in enumerate(edges):
        if not (dom.contains(e.a, tol=1e-6) and dom.contains(e.b, tol=1e-6)):
            violations.append(f"edge {i} leaves the window")

    return AdmissibilityReport(ok=not violations, violations=violations)


# -- marker probes ----------------------------------------------------------

def _point_segment_dist(p: Point, a: Point, b: Point) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    denom = ax * ax + ay * ay
    if denom == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - a[0] - t * ax, p[1] - a[1] - t * ay)


def marker_hit(sample: FieldSample, marker: Tuple[Line, Point],
               eps_x: float, eps_phi: float) -> bool:
    """Finite-window surrogate of the infinitesimal covering event: some edge
    with angle within eps_phi of the marker line passing within eps_x of the
    marker point."""
    line, pt = marker
    for e in sample.edges:
        if angle_gap(e.line.phi, line.phi) > eps_phi:
            continue
        if _point_segment_dist(pt, e.a, e.b) <= eps_x:
            return True
    return False


def edge_pieces_in(sample: FieldSample, sub: ConvexDomain, min_len: float = 1e-7) -> int:
    """Number of positive-length edge pieces of the sample inside a convex subwindow."""
    count = 0
    for e in sample.edges:
        span = sub.chord(e.line)
        if span is None:
            continue
        lo = max(span[0], e.u_lo)
        hi = min(span[1], e.u_hi)
        if hi - lo > min_len:
            count += 1
    return count
