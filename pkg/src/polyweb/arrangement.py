"""Exact enumeration of admissible polygonal configurations on a finite line set.

Intervals are chosen per line with endpoints among {window boundary} union
{intersections with other used lines}; at every interior intersection the
allowed joint states are (outside, outside), (interior, outside) and the
matched turn (endpoint, endpoint).  Everything else creates a crossing, a
T-node or a dangling interior endpoint and is pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .activity import ActivityMeasure
from .geometry import ConvexDomain, Line, Point, Segment, intersect

ENUMERATION_CAP = 8

_TOL = 1e-9


class EnumerationCapError(ValueError):
    """Too many lines for exact enumeration."""


@dataclass
class Configuration:
    """One admissible configuration: per used line an interval in arc coordinates."""
    intervals: Tuple[Tuple[int, float, float], ...]  # (line index, u_a, u_b)
    hamiltonian: float = 0.0

    @property
    def used_lines(self) -> Tuple[int, ...]:
        return tuple(i for i, _, _ in self.intervals)

    def segments(self, lines: Sequence[Line]) -> List[Segment]:
        return [Segment(lines[i].point_at(a), lines[i].point_at(b))
                for i, a, b in self.intervals]


def _validate_lines(lines: Sequence[Line], dom: ConvexDomain) -> List[Tuple[float, float]]:
    """Chords of the lines in the window; rejects colinear pairs and interior
    triple concurrences."""
    chords = []
    for i, l in enumerate(lines):
        span = dom.chord(l)
        if span is None:
            raise ValueError(f"line {i} misses the window")
        chords.append(span)
    for i, j in combinations(range(len(lines)), 2):
        if lines[i].same_line(lines[j], tol=1e-9):
            raise ValueError(f"lines {i} and {j} are colinear")
    pts: Dict[Tuple[int, int], set] = {}
    for i, j in combinations(range(len(lines)), 2):
        z = intersect(lines[i], lines[j])
        if z is None or not dom.contains(z, tol=-_TOL):
            continue
        key = (round(z[0] / 1e-7), round(z[1] / 1e-7))
        group = pts.setdefault(key, set())
        group.update((i, j))
        if len(group) > 2:
            raise ValueError("three lines concurrent inside the window")
    return chords


def _enumerate_used(lines: Sequence[Line], dom: ConvexDomain,
                    chords: Sequence[Tuple[float, float]],
                    used: Sequence[int],
                    must_contain: Optional[Dict[int, List[float]]] = None):
    """Backtracking enumeration over interval choices for the given used lines.

    Yields dicts line-index -> (u_a, u_b).  must_contain maps a line index to
    arc coordinates its interval has to cover.
    """
    used = list(used)
    k = len(used)
    if k == 0:
        yield {}
        return

    # mutual intersection coordinates, inside the open window only
    inter_u: Dict[Tuple[int, int], float] = {}
    for a in range(k):
        for b in range(a + 1, k):
            i, j = used[a], used[b]
            z = intersect(lines[i], lines[j])
            if z is None or not dom.contains(z, tol=-_TOL):
                continue
            ui = lines[i].u_of(z)
            uj = lines[j].u_of(z)
            lo_i, hi_i = chords[i]
            lo_j, hi_j = chords[j]
            if not (lo_i + _TOL < ui < hi_i - _TOL):
                continue
            if not (lo_j + _TOL < uj < hi_j - _TOL):
                continue
            inter_u[(i, j)] = ui
            inter_u[(j, i)] = uj

    # candidate intervals per line: endpoints among boundary + interior intersections
    def candidates(i: int) -> List[Tuple[float, float]]:
        lo, hi = chords[i]
        pts = [lo, hi] + [inter_u[(i, j)] for j in used if (i, j) in inter_u]
        pts.sort()
        out = []
        need = (must_contain or {}).get(i, [])
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                ua, ub = pts[a], pts[b]
                if ub - ua < _TOL:
                    continue
                if any(not (ua - _TOL <= u <= ub + _TOL) for u in need):
                    continue
                out.append((ua, ub))
        return out

    cand = {i: candidates(i) for i in used}

    def state(i: int, interval: Tuple[float, float], u: float) -> str:
        ua, ub = interval
        if u < ua - _TOL or u > ub + _TOL:
            return "out"
        if abs(u - ua) <= _TOL or abs(u - ub) <= _TOL:
            return "end"
        return "int"

    chosen: Dict[int, Tuple[float, float]] = {}

    def ok_pair(i: int, j: int) -> bool:
        if (i, j) not in inter_u:
            return True
        si = state(i, chosen[i], inter_u[(i, j)])
        sj = state(j, chosen[j], inter_u[(j, i)])
        if si == "out" or sj == "out":
            # a non-boundary endpoint must be matched by the partner line
            return not (si == "end" or sj == "end")
        if si == "end" and sj == "end":
            return True
        return False  # crossing or T-node

    def rec(pos: int):
        if pos == k:
            yield dict(chosen)
            return
        i = used[pos]
        for interval in cand[i]:
            chosen[i] = interval
            if all(ok_pair(i, used[q]) for q in range(pos)):
                # endpoints at intersections with not-yet-placed lines are
                # checked when those lines are placed
                yield from rec(pos + 1)
            del chosen[i]

    yield from rec(0)


def _config_from(lines, used_map, act: Optional[ActivityMeasure]) -> Configuration:
    intervals = tuple(sorted((i, a, b) for i, (a, b) in used_map.items()))
    ham = 0.0
    if act is not None:
        for i, a, b in intervals:
            ham += act.measure_hit(Segment(lines[i].point_at(a), lines[i].point_at(b)))
    return Configuration(intervals, ham)


def enumerate_admissible(lines: Sequence[Line], dom: ConvexDomain,
                         act: Optional[ActivityMeasure] = None) -> List[Configuration]:
    """All admissible configurations drawn on subsets of the given lines,
    including the empty one.  Each configuration reports its used-line set and,
    when an activity measure is supplied, its Hamiltonian."""
    if len(lines) > ENUMERATION_CAP:
        raise EnumerationCapError(f"{len(lines)} lines exceed the cap {ENUMERATION_CAP}")
    chords = _validate_lines(lines, dom)
    out = [Configuration(())]
    n = len(lines)
    for r in range(1, n + 1):
        for used in combinations(range(n), r):
            for used_map in _enumerate_used(lines, dom, chords, used):
                out.append(_config_from(lines, used_map, act))
    return out


def exact_partition_sum(lines: Sequence[Line], dom: ConvexDomain,
                        act: ActivityMeasure) -> float:
    """Sum of Boltzmann weights over configurations in which every given line
    carries exactly one interval; the empty line set contributes 1."""
    if len(lines) > ENUMERATION_CAP:
        raise EnumerationCapError(f"{len(lines)} lines exceed the cap {ENUMERATION_CAP}")
    if not lines:
        return 1.0
    chords = _validate_lines(lines, dom)
    total = 0.0
    for used_map in _enumerate_used(lines, dom, chords, range(len(lines))):
        cfg = _config_from(lines, used_map, act)
        total += math.exp(-cfg.hamiltonian)
    return total


def covering_partition_sum(lines: Sequence[Line], dom: ConvexDomain,
                           act: ActivityMeasure,
                           required: Dict[int, List[Point]],
                           cap: int = 12) -> float:
    """Boltzmann sum over all-lines-used configurations whose interval on each
    constrained line covers the listed points.  Used by the exact conditional
    correlation estimator."""
    if len(lines) > cap:
        raise EnumerationCapError(f"{len(lines)} lines exceed the cap {cap}")
    if not lines:
        return 1.0
    chords = _validate_lines(lines, dom)
    must = {i: [lines[i].u_of(p) for p in pts] for i, pts in required.items()}
    total = 0.0
    for used_map in _enumerate_used(lines, dom, chords, range(len(lines)), must):
        cfg = _config_from(lines, used_map, act)
        total += math.exp(-cfg.hamiltonian)
    return total


def count_marked(marker_lines: Sequence[Line], marker_points: Sequence[Point],
                 dom: ConvexDomain) -> int:
    """Number of admissible configurations on the marker lines in which every
    edge covers one of its line's markers and every marker is covered.

    Coupled markers (repeated lines) share one line whose interval must cover
    all of that line's marker points.
    """
    distinct: List[Line] = []
    groups: List[List[Point]] = []
    for ln, pt in zip(marker_lines, marker_points):
        for gi, dl in enumerate(distinct):
            if ln.same_line(dl, tol=1e-9):
                groups[gi].append(pt)
                break
        else:
            distinct.append(ln)
            groups.append([pt])
    if len(distinct) > ENUMERATION_CAP:
        raise EnumerationCapError("too many distinct marker lines")
    for ln, pts in zip(distinct, groups):
        for p in pts:
            if not dom.contains(p, tol=1e-7):
                raise ValueError(f"marker point {p} outside the window")
    chords = _validate_lines(distinct, dom)
    must = {i: [distinct[i].u_of(p) for p in groups[i]] for i in range(len(distinct))}
    count = 0
    for _ in _enumerate_used(distinct, dom, chords, range(len(distinct)), must):
        count += 1
    return count
