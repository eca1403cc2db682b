"""Dual inward construction: polygonal webs grown from edge markers.

Germs activate when the shrinking window boundary reaches them; active tips
track the chord endpoint on their side of the anchor, branching and dying at
the measure-hit hazard (critical), turning onto other live directional lines
via forced branching, and coalescing with co-linear partners head-on at the
anchor or by catching a waiting germ.

Tips that coincide (same line, same side) form a bundle: bundle members share
every subsequent event, and branchings spawn one offspring per member.  This
mirrors the shared-randomness coupling of equal edge markers in the marker
process and is what makes the three crop computations agree exactly.

The sampler records a total-ordered event timeline (crossings included); the
crop engine replays it for branch subcollections without re-running any
geometry.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .activity import ActivityMeasure
from .geometry import (EPS_GEO, ConvexDomain, DegenerateAnchorError, Line,
                       Point, WindowFamily, intersect, separates)

# event kinds
ACTIVATE = "activate"
CATCH = "catch"
BRANCH = "branch"
FORCE = "force"
CROSS = "cross"
KILL = "kill"
MERGE = "merge"
TANGENCY = "tangency"
SEPARATE = "separate"

# terminal causes
CAUSE_KILL = "terminated"
CAUSE_MERGE = "merged"
CAUSE_SEPARATED = "separated"
CAUSE_FROZEN = "frozen"

STOP_TANGENCY = "tangency"
STOP_IMMEDIATE = "immediate"

_heap_rank = {ACTIVATE: 0, CROSS: 1, FORCE: 1, TANGENCY: 2, BRANCH: 3, KILL: 3}


class MarkerConfigError(ValueError):
    pass


@dataclass
class MarkerConfig:
    """Ordered edge-marker collection (line_i, x_i) with position classification."""
    markers: List[Tuple[Line, Point]]

    def __post_init__(self):
        self.validate()

    def validate(self, tol: float = 1e-7):
        for i, (ln, pt) in enumerate(self.markers):
            if not ln.contains(pt, tol=tol):
                raise MarkerConfigError(f"marker {i}: point {pt} not on its line")
        for i in range(len(self.markers)):
            for j in range(i + 1, len(self.markers)):
                li, pi = self.markers[i]
                lj, pj = self.markers[j]
                if li.same_line(lj, tol=tol) and \
                        math.hypot(pi[0] - pj[0], pi[1] - pj[1]) <= tol:
                    raise MarkerConfigError(f"markers {i} and {j} coincide")
        # no three pairwise-different lines through one point
        pts: Dict[Tuple[int, int], Set[int]] = {}
        lines = self.distinct_lines()
        for a in range(len(lines)):
            for b in range(a + 1, len(lines)):
                z = intersect(lines[a], lines[b])
                if z is None:
                    continue
                key = (round(z[0] / tol), round(z[1] / tol))
                grp = pts.setdefault(key, set())
                grp.update((a, b))
                if len(grp) > 2:
                    raise MarkerConfigError("three marker lines are concurrent")

    @property
    def k(self) -> int:
        return len(self.markers)

    def distinct_lines(self, tol: float = 1e-7) -> List[Line]:
        out: List[Line] = []
        for ln, _ in self.markers:
            if all(not ln.same_line(o, tol=tol) for o in out):
                out.append(ln)
        return out

    def line_groups(self, tol: float = 1e-7) -> List[List[int]]:
        """Marker indices grouped by shared line (coupled groups)."""
        out: List[List[int]] = []
        reps: List[Line] = []
        for i, (ln, _) in enumerate(self.markers):
            for gi, rep in enumerate(reps):
                if ln.same_line(rep, tol=tol):
                    out[gi].append(i)
                    break
            else:
                reps.append(ln)
                out.append([i])
        return out

    def couplings(self) -> List[Tuple[int, int]]:
        pairs = []
        for grp in self.line_groups():
            for a in range(len(grp)):
                for b in range(a + 1, len(grp)):
                    pairs.append((grp[a], grp[b]))
        return pairs

    @property
    def degenerate(self) -> bool:
        return bool(self.couplings())

    def singular(self, tol: float = 1e-7) -> bool:
        for i, (_, pt) in enumerate(self.markers):
            for j, (ln, _) in enumerate(self.markers):
                if i == j:
                    continue
                if not ln.same_line(self.markers[i][0], tol=tol) and ln.contains(pt, tol=tol):
                    return True
        return False

    @property
    def classification(self) -> str:
        if self.singular():
            return "singular"
        if self.degenerate:
            return "degenerate"
        return "general"


@dataclass
class Strand:
    """One maximal straight piece of the web, indexed by its terminal."""
    sid: int
    line_id: int
    side: int                      # sweep side relative to the line's anchor
    root: int                      # marker index of the chain's germ
    parent: Optional[int]          # strand it branched from (None for germs)
    create_idx: int                # event index of creation (-1 for germs)
    create_s: float
    create_pt: Point
    is_germ: bool = False
    forced: bool = False
    activation_s: float = math.nan  # germs only
    active_from: int = -1          # event index when the tip starts moving
    death_idx: int = -1
    death_s: float = math.nan
    death_pt: Optional[Point] = None
    cause: str = ""
    children: List[int] = field(default_factory=list)


@dataclass
class Event:
    s: float
    kind: str
    a: Tuple[int, ...]                       # primary strand set
    b: Tuple[int, ...] = ()                  # partner set / forcer candidates
    children: Tuple[Tuple[int, int], ...] = ()  # (parent, child) pairs
    point: Optional[Point] = None


@dataclass
class Branch:
    """Chronological polyline of one branch, root marker to terminal."""
    terminal: int
    root: int
    strand_path: Tuple[int, ...]
    polyline: Tuple[Point, ...]
    cause: str


@dataclass
class PolygonalWeb:
    markers: MarkerConfig
    lines: List[Line]                 # line table (marker lines + offspring lines)
    line_anchor_u: List[float]
    strands: List[Strand]
    events: List[Event]
    domain: ConvexDomain
    family: WindowFamily
    stop_rule: str
    seed: Optional[int] = None
    degenerate_resamples: int = 0

    @property
    def k(self) -> int:
        return self.markers.k

    @property
    def m(self) -> int:
        return len(self.strands)

    def terminals(self) -> List[int]:
        return [s.sid for s in self.strands]

    def strand_line(self, sid: int) -> Line:
        return self.lines[self.strands[sid].line_id]

    def path(self, sid: int) -> Tuple[int, ...]:
        out = []
        cur: Optional[int] = sid
        while cur is not None:
            out.append(cur)
            cur = self.strands[cur].parent
        return tuple(reversed(out))

    def branch(self, sid: int) -> Branch:
        path = self.path(sid)
        pts: List[Point] = [self.strands[path[0]].create_pt]
        for s2 in path[1:]:
            pts.append(self.strands[s2].create_pt)
        st = self.strands[sid]
        if st.death_pt is not None:
            pts.append(st.death_pt)
        return Branch(sid, st.root, path, tuple(pts), st.cause)

    def branches(self) -> List[Branch]:
        return [self.branch(s.sid) for s in self.strands]

    def root_groups(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for s in self.strands:
            out.setdefault(s.root, []).append(s.sid)
        return out

    def forced_strands(self) -> List[int]:
        return [s.sid for s in self.strands if s.forced]

    def germ_line_mates(self) -> List[Tuple[int, ...]]:
        """Original coupled germ groups as strand-id tuples."""
        groups = self.markers.line_groups()
        return [tuple(g) for g in groups if len(g) > 1]


class _Bundle:
    __slots__ = ("bid", "line_id", "side", "members", "alive", "version", "u_now_hint")

    def __init__(self, bid, line_id, side, members):
        self.bid = bid
        self.line_id = line_id
        self.side = side
        self.members = list(members)
        self.alive = True
        self.version = 0


class _LineInfo:
    __slots__ = ("line", "anchor_u", "tau", "pending", "bundle_of_side")

    def __init__(self, line, anchor_u, tau):
        self.line = line
        self.anchor_u = anchor_u
        self.tau = tau
        self.pending: List[int] = []      # inactive unfrozen germ sids
        self.bundle_of_side: Dict[int, Optional[int]] = {+1: None, -1: None}


def sample_web(act: ActivityMeasure, fam: WindowFamily, mc: MarkerConfig,
               stop_rule: str = STOP_TANGENCY,
               rng: Optional[np.random.Generator] = None,
               seed: Optional[int] = None) -> PolygonalWeb:
    """Draw one polygonal web for the marker configuration in the base window."""
    if stop_rule not in (STOP_TANGENCY, STOP_IMMEDIATE):
        raise ValueError(f"unknown stop rule {stop_rule!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    dom = fam.base
    for i, (_, pt) in enumerate(mc.markers):
        if not dom.contains(pt, tol=1e-7):
            raise ValueError(f"marker {i} point {pt} outside the closed window")

    lines: List[Line] = []
    line_infos: List[_LineInfo] = []
    strands: List[Strand] = []
    events: List[Event] = []
    bundles: List[_Bundle] = []
    heap: List[tuple] = []
    seq = 0
    degenerate = 0
    crossing_done: Set[Tuple[int, int]] = set()

    def push(s, kind, payload):
        nonlocal seq
        heapq.heappush(heap, (s, _heap_rank[kind], seq, kind, payload))
        seq += 1

    def add_line(line: Line) -> int:
        try:
            p_a, tau = fam.anchor(line)
        except DegenerateAnchorError:
            raise
        lid = len(lines)
        lines.append(line)
        line_infos.append(_LineInfo(line, line.u_of(p_a), tau))
        return lid

    def record(ev: Event) -> int:
        events.append(ev)
        return len(events) - 1

    def kill_strands(sids: Sequence[int], idx: int, s: float, pt: Point, cause: str):
        for sid in sids:
            st = strands[sid]
            st.death_idx = idx
            st.death_s = s
            st.death_pt = pt
            st.cause = cause

    # marker lines (coupled markers share a line id)
    germ_of_marker: List[int] = []
    for gi, grp in enumerate(mc.line_groups()):
        line = mc.markers[grp[0]][0]
        lid = add_line(line)
        for mi in grp:
            _, pt = mc.markers[mi]
            u = line.u_of(pt)
            du = u - line_infos[lid].anchor_u
            if abs(du) < 10 * EPS_GEO:
                raise MarkerConfigError(
                    f"marker {mi} sits at the anchor point of its line (degenerate)")
            sid = len(strands)
            strands.append(Strand(sid, lid, 1 if du > 0 else -1, mi, None, -1, 0.0,
                                  pt, is_germ=True,
                                  activation_s=1.0 - fam.reveal_time(pt)))
            line_infos[lid].pending.append(sid)
            germ_of_marker.append(sid)
            push(strands[sid].activation_s, ACTIVATE, sid)

    def schedule_tangent(b: _Bundle):
        push(1.0 - line_infos[b.line_id].tau, TANGENCY, b.bid)

    def tip_u_now(b: _Bundle, s: float) -> float:
        return fam.tip_u(lines[b.line_id], b.side, max(line_infos[b.line_id].tau, 1.0 - s))

    def schedule_critical(b: _Bundle, s_now: float, u_now: float):
        """Sample the next branch/kill clock for the bundle from arc position u_now."""
        if act.is_zero:
            return
        info = line_infos[b.line_id]
        line = lines[b.line_id]
        max_arc = abs(u_now - info.anchor_u)
        if max_arc <= 10 * EPS_GEO:
            return
        res = act.next_arc_event(line, u_now, -float(b.side), max_arc, rng)
        kill_arc = act.next_arc_kill(line, u_now, -float(b.side), max_arc, rng)
        cand = []
        if res is not None:
            cand.append((res[0], BRANCH, res[1]))
        if kill_arc is not None:
            cand.append((kill_arc, KILL, None))
        if not cand:
            return
        arc, kind, new_line = min(cand, key=lambda c: c[0])
        u_ev = u_now - b.side * arc
        if abs(u_ev - info.anchor_u) <= 10 * EPS_GEO:
            return
        p = line.point_at(u_ev)
        s_ev = 1.0 - fam.reveal_time(p)
        push(s_ev, kind, (b.bid, b.version, u_ev, p, new_line))

    def schedule_crossings_for_bundle(b: _Bundle, s_now: float):
        line = lines[b.line_id]
        for lid2 in range(len(lines)):
            if lid2 == b.line_id:
                continue
            schedule_crossing(b, lid2, s_now)

    def schedule_crossing(b: _Bundle, lid2: int, s_now: float):
        line = lines[b.line_id]
        other = lines[lid2]
        z = intersect(line, other)
        if z is None or not dom.contains(z, tol=-EPS_GEO):
            return
        u_z = line.u_of(z)
        if (u_z - line_infos[b.line_id].anchor_u) * b.side <= 10 * EPS_GEO:
            return
        s_z = 1.0 - fam.reveal_time(z)
        if s_z <= s_now:
            return  # shared creation points reproduce s_now exactly
        push(s_z, CROSS, (b.bid, lid2, z))

    def new_bundle(member_sids: Sequence[int], line_id: int, side: int,
                   s_now: float, u_now: float) -> _Bundle:
        b = _Bundle(len(bundles), line_id, side, member_sids)
        bundles.append(b)
        info = line_infos[line_id]
        assert info.bundle_of_side[side] is None, "duplicate bundle on a line side"
        info.bundle_of_side[side] = b.bid
        schedule_tangent(b)
        schedule_critical(b, s_now, u_now)
        schedule_crossings_for_bundle(b, s_now)
        return b

    def retire_bundle(b: _Bundle):
        b.alive = False
        info = line_infos[b.line_id]
        if info.bundle_of_side.get(b.side) == b.bid:
            info.bundle_of_side[b.side] = None

    def live_entities():
        """(bundles, pending germs) still in play."""
        bs = [b for b in bundles if b.alive]
        germs = []
        for info in line_infos:
            germs.extend(info.pending)
        return bs, germs

    def separation_pass(s_now: float):
        if stop_rule != STOP_IMMEDIATE:
            return
        while True:
            bs, germs = live_entities()
            positions: Dict[int, Point] = {}
            for b in bs:
                u = tip_u_now(b, s_now)
                positions[b.bid] = lines[b.line_id].point_at(u)
            died = False
            for b in bs:
                pts = [positions[o.bid] for o in bs if o.bid != b.bid]
                pts += [strands[g].create_pt for g in germs]
                if separates(lines[b.line_id], pts):
                    pt = positions[b.bid]
                    idx = record(Event(s_now, SEPARATE, tuple(b.members), point=pt))
                    kill_strands(b.members, idx, s_now, pt, CAUSE_SEPARATED)
                    retire_bundle(b)
                    died = True
                    break
            if not died:
                for g in germs:
                    st = strands[g]
                    pts = [positions[b.bid] for b in bs]
                    pts += [strands[g2].create_pt for g2 in germs if g2 != g]
                    if separates(lines[st.line_id], pts):
                        idx = record(Event(s_now, SEPARATE, (g,), point=st.create_pt))
                        kill_strands([g], idx, s_now, st.create_pt, CAUSE_FROZEN)
                        line_infos[st.line_id].pending.remove(g)
                        died = True
                        break
            if not died:
                return

    separation_pass(0.0)

    while heap:
        s, _, _, kind, payload = heapq.heappop(heap)

        if kind == ACTIVATE:
            sid = payload
            st = strands[sid]
            if st.death_idx >= 0:
                continue  # frozen before activation
            info = line_infos[st.line_id]
            if sid in info.pending:
                info.pending.remove(sid)
            existing_bid = info.bundle_of_side[st.side]
            if existing_bid is not None and bundles[existing_bid].alive:
                b = bundles[existing_bid]
                st.active_from = record(Event(s, CATCH, tuple(b.members), (sid,),
                                              point=st.create_pt))
                b.members.append(sid)
            else:
                st.active_from = record(Event(s, ACTIVATE, (sid,), point=st.create_pt))
                new_bundle([sid], st.line_id, st.side, s, lines[st.line_id].u_of(st.create_pt))
            separation_pass(s)

        elif kind == CROSS:
            bid, lid2, z = payload
            b = bundles[bid]
            if not b.alive:
                continue
            pair = (min(b.line_id, lid2), max(b.line_id, lid2))
            if pair in crossing_done:
                continue
            info2 = line_infos[lid2]
            u_z2 = lines[lid2].u_of(z)
            dz = u_z2 - info2.anchor_u
            if abs(dz) <= 10 * EPS_GEO:
                degenerate += 1
                continue  # crossing at the other line's anchor: mu-null
            side2 = 1 if dz > 0 else -1
            crossing_done.add(pair)
            near_bid = info2.bundle_of_side[side2]
            if near_bid is not None and bundles[near_bid].alive:
                nb = bundles[near_bid]
                record(Event(s, CROSS, tuple(b.members), tuple(nb.members), point=z))
                continue
            # germ sitting exactly at the crossing point: occupies it, no forcing
            at_z = [g for g in info2.pending
                    if abs(lines[lid2].u_of(strands[g].create_pt) - u_z2) <= 10 * EPS_GEO]
            if at_z:
                record(Event(s, CROSS, tuple(b.members), tuple(at_z), point=z))
                continue
            far_bid = info2.bundle_of_side[-side2]
            candidates: List[int] = []
            if far_bid is not None and bundles[far_bid].alive:
                candidates.extend(bundles[far_bid].members)
            candidates.extend(info2.pending)
            if not candidates:
                continue  # the line is dead: no forcing
            kids = []
            for p_sid in b.members:
                csid = len(strands)
                strands.append(Strand(csid, lid2, side2, strands[p_sid].root, p_sid,
                                      0, s, z, forced=True))
                strands[p_sid].children.append(csid)
                kids.append((p_sid, csid))
            idx = record(Event(s, FORCE, tuple(b.members), tuple(candidates),
                               tuple(kids), point=z))
            for _, csid in kids:
                strands[csid].create_idx = idx
                strands[csid].active_from = idx
            new_bundle([c for _, c in kids], lid2, side2, s, u_z2)
            separation_pass(s)

        elif kind == TANGENCY:
            bid = payload
            b = bundles[bid]
            if not b.alive:
                continue
            info = line_infos[b.line_id]
            anchor_pt = lines[b.line_id].point_at(info.anchor_u)
            opp_bid = info.bundle_of_side[-b.side]
            if opp_bid is not None and bundles[opp_bid].alive:
                ob = bundles[opp_bid]
                idx = record(Event(s, MERGE, tuple(b.members), tuple(ob.members),
                                   point=anchor_pt))
                kill_strands(b.members + ob.members, idx, s, anchor_pt, CAUSE_MERGE)
                retire_bundle(b)
                retire_bundle(ob)
            else:
                idx = record(Event(s, TANGENCY, tuple(b.members), point=anchor_pt))
                kill_strands(b.members, idx, s, anchor_pt, CAUSE_SEPARATED)
                retire_bundle(b)
            separation_pass(s)

        elif kind in (BRANCH, KILL):
            bid, version, u_ev, p, new_line = payload
            b = bundles[bid]
            if not b.alive or b.version != version:
                continue
            if kind == KILL:
                idx = record(Event(s, KILL, tuple(b.members), point=p))
                kill_strands(b.members, idx, s, p, CAUSE_KILL)
                retire_bundle(b)
                separation_pass(s)
                continue
            # critical branch: one offspring per bundle member, on a fresh line
            ok = False
            for _ in range(20):
                try:
                    if all(not new_line.same_line(l2, tol=1e-9) for l2 in lines):
                        lid2 = add_line(new_line)
                        du = new_line.u_of(p) - line_infos[lid2].anchor_u
                        if abs(du) > 10 * EPS_GEO:
                            ok = True
                            break
                        lines.pop()
                        line_infos.pop()
                except DegenerateAnchorError:
                    pass
                degenerate += 1
                new_line = act.sample_turn_direction(p, lines[b.line_id], rng)
            if not ok:
                b.version += 1
                schedule_critical(b, s, u_ev)
                continue
            side2 = 1 if du > 0 else -1
            kids = []
            for p_sid in b.members:
                csid = len(strands)
                strands.append(Strand(csid, lid2, side2, strands[p_sid].root, p_sid,
                                      0, s, p))
                strands[p_sid].children.append(csid)
                kids.append((p_sid, csid))
            idx = record(Event(s, BRANCH, tuple(b.members), (), tuple(kids), point=p))
            for _, csid in kids:
                strands[csid].create_idx = idx
                strands[csid].active_from = idx
            nb = new_bundle([c for _, c in kids], lid2, side2, s, new_line.u_of(p))
            # existing live bundles may now cross the fresh line
            for other in bundles:
                if other.alive and other.bid not in (b.bid, nb.bid):
                    schedule_crossing(other, lid2, s)
            b.version += 1
            schedule_critical(b, s, u_ev)
            separation_pass(s)

    web = PolygonalWeb(mc, lines, [li.anchor_u for li in line_infos], strands, events,
                       dom, fam, stop_rule, seed=seed, degenerate_resamples=degenerate)
    _check_all_dead(web)
    return web


def _check_all_dead(web: PolygonalWeb):
    for st in web.strands:
        if st.death_idx < 0:
            raise RuntimeError(f"strand {st.sid} survived the construction")


def zero_activity_web(fam: WindowFamily, mc: MarkerConfig,
                      stop_rule: str = STOP_TANGENCY) -> PolygonalWeb:
    """The deterministic web: forced branchings, coalescences and stopping only."""
    from .activity import ActivityMeasure as _AM
    return sample_web(_AM.homogeneous(0.0), fam, mc, stop_rule,
                      rng=np.random.default_rng(0))


# -- structural checks -------------------------------------------------------

def node_census(web: PolygonalWeb, tol: float = 1e-7) -> Dict[str, int]:
    """Count T (branch points), I (terminals), X (crossings) and V nodes.

    Webs must contain no V-shaped nodes: two strands terminating at a common
    point from non-colinear directions.
    """
    census = {"T": 0, "I": 0, "X": 0, "V": 0}
    for ev in web.events:
        if ev.kind in (BRANCH, FORCE):
            census["T"] += 1
        elif ev.kind == CROSS:
            census["X"] += 1
    ends: Dict[Tuple[int, int], List[int]] = {}
    for st in web.strands:
        if st.death_pt is None:
            continue
        key = (round(st.death_pt[0] / tol), round(st.death_pt[1] / tol))
        ends.setdefault(key, []).append(st.sid)
    for key, sids in ends.items():
        if len(sids) == 1:
            census["I"] += 1
        else:
            lids = {web.strands[s].line_id for s in sids}
            if len(lids) == 1:
                census["I"] += len(sids)  # colinear coalescence, not a V node
            else:
                census["V"] += 1
    return census
