"""Crop-graph construction and the crop functional in its three equivalent forms.

All three computations replay the web's recorded event timeline instead of
re-running geometry, so they are exactly comparable:

* crop_subset_sum     - Moebius sum over terminal subsets, with the
                        complete/minimal/normal indicator evaluated by an
                        explicit truncation replay (the small-m oracle);
* crop_graph_sum      - depth-first recursion over branch decisions with
                        memoisation on (event index, live front set), one term
                        per normal crop graph via its minimal collection;
* signed_marker_terminal - breadth-first signed evolution of marker
                        configurations driven by the same event stream.

Terminals are identified with strands: every strand dies exactly once, and
coalescing pairs contribute one terminal per member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from .activity import ActivityMeasure
from .geometry import Point, WindowFamily
from .webs import (ACTIVATE, BRANCH, CATCH, CROSS, FORCE, KILL, MERGE,
                   SEPARATE, TANGENCY, MarkerConfig, PolygonalWeb, sample_web)

SUBSET_CAP = 22


class SubsetCapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# enriched branches
#
# A branch is one marker history: it starts at a germ, may turn onto a
# recorded offspring strand at a branching event, and may turn onto the
# co-moving front of a crossed line at a crossing event (a rider: the turned
# marker is equal to the markers it rides with and shares their events).
# Each branch is a chronological sequence of carrier legs.


@dataclass(frozen=True)
class EnrichedBranch:
    bid: int
    root: int
    legs: Tuple[Tuple[int, int, str], ...]  # (carrier sid, entry event idx, kind)

    @property
    def final_carrier(self) -> int:
        return self.legs[-1][0]


class BranchCapError(ValueError):
    pass


def enriched_branches(web: PolygonalWeb, cap: int = 4096) -> List[EnrichedBranch]:
    """All marker histories of the web, rider turns included.

    For webs without covered crossings these are exactly the strand paths.
    """
    strands = web.strands
    jumps: Dict[int, List[Tuple[int, int]]] = {}     # sid -> [(event idx, target)]
    for e, ev in enumerate(web.events):
        if ev.kind != CROSS:
            continue
        if ev.b:
            for s in ev.a:
                jumps.setdefault(s, []).append((e, ev.b[0]))
        if ev.a:
            for s in ev.b:
                jumps.setdefault(s, []).append((e, ev.a[0]))
    out: List[EnrichedBranch] = []

    def walk(carrier: int, entry: int, kind: str, prefix):
        legs = prefix + [(carrier, entry, kind)]
        if len(out) > cap:
            raise BranchCapError(f"more than {cap} enriched branches")
        death = strands[carrier].death_idx
        for c in strands[carrier].children:
            ci = strands[c].create_idx
            if entry < ci <= death:
                walk(c, ci, "child", legs)
        for (e, tgt) in jumps.get(carrier, ()):
            if entry < e <= death:
                walk(tgt, e, "jump", legs)
        out.append(EnrichedBranch(len(out), strands[legs[0][0]].root, tuple(legs)))

    for st in strands:
        if st.is_germ:
            walk(st.sid, -1, "root", [])
    out.sort(key=lambda b: (b.root, b.legs))
    return [EnrichedBranch(i, b.root, b.legs) for i, b in enumerate(out)]


# ---------------------------------------------------------------------------
# subset replay


@dataclass
class CropGraph:
    selection: Tuple[int, ...]
    complete: bool
    minimal: bool
    normal: bool
    polylines: List[Tuple[Point, ...]] = field(default_factory=list)
    nodes: List[Tuple[Point, str]] = field(default_factory=list)

    @property
    def flags(self) -> Tuple[bool, bool, bool]:
        return (self.complete, self.minimal, self.normal)

    @property
    def counts(self) -> bool:
        return self.complete and self.minimal and self.normal


class _Replay:
    """Truncation replay of the timeline for one selected branch collection."""

    def __init__(self, web: PolygonalWeb, branches: Sequence[EnrichedBranch]):
        self.web = web
        self.branches = list(branches)
        strands = web.strands
        # leg intervals: (carrier, entry, natural exit, kind, branch index)
        legs = []
        for bi, br in enumerate(self.branches):
            for li, (carrier, entry, kind) in enumerate(br.legs):
                if li + 1 < len(br.legs):
                    exit_ = br.legs[li + 1][1]
                else:
                    exit_ = strands[carrier].death_idx
                legs.append([carrier, entry, exit_, kind, bi])
        self.legs = legs
        self.cut: Dict[int, int] = {}          # branch index -> cut event
        self.resolved: Set[Tuple] = set()
        self.annihilated = False
        self._by_carrier: Dict[int, List[list]] = {}
        for leg in legs:
            self._by_carrier.setdefault(leg[0], []).append(leg)
        self._run()

    def _active_legs(self, sids: Sequence[int], e: int,
                     skip_jump_entries: bool = False) -> List[list]:
        out = []
        for s in sids:
            for leg in self._by_carrier.get(s, ()):
                carrier, entry, exit_, kind, bi = leg
                cut = self.cut.get(bi)
                if cut is not None and (entry > cut or cut < e):
                    continue
                if skip_jump_entries and kind == "jump" and entry == e:
                    continue  # a marker turning here is not a second front
                if entry <= e <= exit_:
                    out.append(leg)
        return out

    def _run(self):
        strands = self.web.strands
        for e, ev in enumerate(self.web.events):
            if ev.kind == CROSS:
                A = self._active_legs(ev.a, e, skip_jump_entries=True)
                B = self._active_legs(ev.b, e, skip_jump_entries=True)
                if A and B:
                    for leg in (self._active_legs(ev.a, e)
                                + self._active_legs(ev.b, e)):
                        bi = leg[4]
                        if self.cut.get(bi, 1 << 60) > e:
                            self.cut[bi] = e
                    # a marker dying in a collision while a coupled marker of
                    # the same line survives annihilates the configuration
                    dying = set(ev.a) | set(ev.b)
                    dying_lines = {strands[s].line_id for s in dying}
                    for leg in self.legs:
                        carrier, entry, exit_, kind, bi = leg
                        if carrier in dying:
                            continue
                        cut = self.cut.get(bi)
                        if cut is not None and (entry > cut or cut < e):
                            continue
                        if entry <= e <= exit_ and \
                                strands[carrier].line_id in dying_lines:
                            self.annihilated = True
            elif ev.kind in (CATCH, MERGE):
                A = self._active_legs(ev.a, e)
                B = self._active_legs(ev.b, e)
                if A and B:
                    for leg in A + B:
                        carrier, entry, _, kind, _ = leg
                        if self.web.strands[carrier].forced:
                            self.resolved.add(("F", carrier))
                        if kind == "jump":
                            self.resolved.add(("J", entry, carrier))
                        self.resolved.add(("G", carrier))

    # -- flags ---------------------------------------------------------------

    def complete(self) -> bool:
        return {br.root for br in self.branches} == set(range(self.web.k))

    def minimal(self) -> bool:
        # no turning point at or past a cut-off
        for bi, br in enumerate(self.branches):
            cut = self.cut.get(bi)
            if cut is not None:
                for carrier, entry, kind in br.legs[1:]:
                    if entry >= cut:
                        return False
        return True

    def _covered_past(self, carrier: int, e: int) -> bool:
        """Is the carrier covered by a selected leg spanning strictly past e?"""
        for leg in self._by_carrier.get(carrier, ()):
            _, entry, exit_, _, bi = leg
            cut = self.cut.get(bi)
            eff_exit = min(exit_, cut) if cut is not None else exit_
            if cut is not None and entry > cut:
                continue
            if entry <= e < eff_exit:
                return True
        return False

    def _line_mate_at(self, carrier: int, e: int) -> bool:
        """A covered, co-linear, not co-located marker at event e."""
        strands = self.web.strands
        st = strands[carrier]
        for leg in self.legs:
            c2, entry2, exit2, _, bi2 = leg
            if c2 == carrier:
                continue
            o2 = strands[c2]
            if o2.line_id != st.line_id:
                continue
            cut2 = self.cut.get(bi2)
            if cut2 is not None and (entry2 > cut2 or cut2 < e):
                continue
            if not (entry2 <= e <= exit2):
                continue
            co_located = (o2.side == st.side and 0 <= o2.active_from <= e)
            if not co_located:
                return True
        return False

    def _jump_valid(self, carrier: int, e: int) -> bool:
        """A rider turn needs a live marker of the target line at the crossing."""
        line = self.web.strands[carrier].line_id
        for leg in self.legs:
            c2, entry2, exit2, kind2, bi2 = leg
            if self.web.strands[c2].line_id != line:
                continue
            if kind2 == "jump" and entry2 == e:
                continue
            cut2 = self.cut.get(bi2)
            if cut2 is not None and (entry2 > cut2 or cut2 < e):
                continue
            if entry2 <= e <= exit2:
                return True
        return False

    def _force_valid(self, carrier: int, e: int) -> bool:
        """Taking a forced offspring needs a live marker of the forcing line
        at the creation event (the force fires per configuration)."""
        line = self.web.strands[carrier].line_id
        for leg in self.legs:
            c2, entry2, exit2, _, bi2 = leg
            if self.web.strands[c2].line_id != line or entry2 >= e:
                continue
            cut2 = self.cut.get(bi2)
            if cut2 is not None and (entry2 > cut2 or cut2 < e):
                continue
            if e <= exit2:
                return True
        return False

    def normal(self) -> bool:
        if self.annihilated:
            return False
        strands = self.web.strands
        visible_forced: Set[int] = set()
        for leg in self.legs:
            carrier, entry, exit_, kind, bi = leg
            cut = self.cut.get(bi)
            if cut is not None and entry > cut:
                continue
            if strands[carrier].forced:
                visible_forced.add(carrier)
                if kind == "child" and not self._force_valid(carrier, entry):
                    return False
            if kind == "jump" and (("J", entry, carrier) not in self.resolved
                                   or not self._jump_valid(carrier, entry)):
                return False
        # a marker turning off its line while a coupled (co-linear, not
        # co-located) marker is covered annihilates the configuration, unless
        # another branch keeps the original marker going past the turn
        for bi, br in enumerate(self.branches):
            cut = self.cut.get(bi)
            for li in range(len(br.legs) - 1):
                carrier = br.legs[li][0]
                e = br.legs[li + 1][1]
                if cut is not None and e > cut:
                    break
                if self._covered_past(carrier, e):
                    continue
                if self._line_mate_at(carrier, e):
                    return False
        for f in visible_forced:
            if ("F", f) not in self.resolved:
                return False
        for grp in self.web.germ_line_mates():
            for g in grp:
                if ("G", g) not in self.resolved:
                    return False
        return True

    def flags(self) -> Tuple[bool, bool, bool]:
        return self.complete(), self.minimal(), self.normal()

    # -- geometry of the truncated graph --------------------------------------

    def polylines(self) -> List[Tuple[Point, ...]]:
        out = []
        web = self.web
        for bi, br in enumerate(self.branches):
            cut = self.cut.get(bi)
            pts: List[Point] = [web.strands[br.legs[0][0]].create_pt]
            stopped = False
            for li, (carrier, entry, kind) in enumerate(br.legs):
                exit_ = (br.legs[li + 1][1] if li + 1 < len(br.legs)
                         else web.strands[carrier].death_idx)
                if cut is not None and entry >= cut:
                    stopped = True
                    break
                if cut is not None and cut <= exit_:
                    pts.append(web.events[cut].point)
                    stopped = True
                    break
                if li + 1 < len(br.legs):
                    nxt_entry = br.legs[li + 1][1]
                    pts.append(web.events[nxt_entry].point)
                else:
                    pts.append(web.strands[carrier].death_pt)
            out.append(tuple(pts))
        return out


def build_crop_graph(web: PolygonalWeb, selection: Sequence[int],
                     branches: Optional[List[EnrichedBranch]] = None) -> CropGraph:
    """Replay the chronological growth of the selected branches (ids into the
    enriched-branch list), truncating at first meetings, and report the graph
    with its three flags."""
    if branches is None:
        branches = enriched_branches(web)
    chosen = [branches[i] for i in selection]
    if not chosen:
        raise ValueError("selection must be a nonempty set of branch ids")
    rep = _Replay(web, chosen)
    comp, mini, norm = rep.flags()
    cg = CropGraph(tuple(sorted(set(selection))), comp, mini, norm)
    cg.polylines = rep.polylines()
    cg.nodes = _label_nodes(web, rep)
    return cg


def _label_nodes(web: PolygonalWeb, rep: _Replay) -> List[Tuple[Point, str]]:
    nodes: List[Tuple[Point, str]] = []
    cut_events = {e for e in rep.cut.values()}
    for e in cut_events:
        nodes.append((web.events[e].point, "V"))
    for bi, br in enumerate(rep.branches):
        if rep.cut.get(bi) is None:
            nodes.append((web.strands[br.final_carrier].death_pt, "I"))
    for e, ev in enumerate(web.events):
        if ev.kind in (BRANCH, FORCE):
            stays = rep._active_legs(ev.a, e)
            joins = [leg for leg in rep.legs
                     if leg[1] == e and rep.cut.get(leg[4], 1 << 60) >= e]
            if stays and joins and any(leg[2] > e for leg in stays):
                nodes.append((ev.point, "T"))
    return nodes


def crop_subset_sum(web: PolygonalWeb, cap: int = SUBSET_CAP) -> int:
    """Moebius form: sum over branch subcollections of (-1)^(card - k) iota.

    iota is 1 exactly when the collection is complete, minimal for its crop
    graph, and the graph is normal; the enumeration is factored over root
    groups, which skips incomplete collections outright.
    """
    if web.k == 0:
        return 1
    branches = enriched_branches(web)
    groups: Dict[int, List[EnrichedBranch]] = {}
    for br in branches:
        groups.setdefault(br.root, []).append(br)
    work = 1.0
    for grp in groups.values():
        work *= (2 ** len(grp) - 1)
    if len(branches) > cap or work > 2 ** cap:
        raise SubsetCapError(
            f"web has {len(branches)} branches (work {work:.3g}) over the "
            f"subset cap {cap}; use crop_graph_sum")
    total = 0
    k = web.k
    group_list = list(groups.values())

    def rec(gi: int, chosen: List[EnrichedBranch]):
        nonlocal total
        if gi == len(group_list):
            rep = _Replay(web, chosen)
            if rep.complete() and rep.minimal() and rep.normal():
                total += (-1) ** (len(chosen) - k)
            return
        grp = group_list[gi]
        for r in range(1, len(grp) + 1):
            for combo in combinations(grp, r):
                rec(gi + 1, chosen + list(combo))

    rec(0, [])
    return total


# ---------------------------------------------------------------------------
# event semantics shared by the graph sum and the marker process


def _config_steps(web: PolygonalWeb, e: int, C: FrozenSet[int]):
    """Offspring configurations of C under event e, as (config, sign) pairs.

    Returns None when the event does not touch C.  An empty list means the
    configuration is annihilated (coupling break).
    """
    ev = web.events[e]
    strands = web.strands
    kind = ev.kind
    if kind in (ACTIVATE, CATCH):
        return None
    if kind in (BRANCH, FORCE):
        S = C & frozenset(ev.a)
        if not S:
            return None
        if kind == FORCE and not (C & frozenset(ev.b)):
            return None  # no live marker of the forcing line in this configuration
        O = frozenset(c for p, c in ev.children if p in S)
        out = [(C, +1)]
        lines_S = {strands[s].line_id for s in S}
        rest = C - S
        turn_breaks = any(strands[r].line_id in lines_S for r in rest)
        if not turn_breaks:
            out.append(((rest | O), +1))
        out.append((C | O, -1))
        return out
    if kind == CROSS:
        SA = C & frozenset(ev.a)
        SB = C & frozenset(ev.b)
        if SA and SB:
            dying = SA | SB
            rest = C - dying
            lines_d = {strands[s].line_id for s in dying}
            if any(strands[r].line_id in lines_d for r in rest):
                return []  # a coupled marker died in a collision
            return [(rest, +1)]
        # one-sided crossing of a marker line still in the configuration: a
        # forced turn-and-branch whose offspring rides the co-moving front of
        # the other side (equal edge markers share all subsequent events)
        if SA and not SB:
            S, other = SA, ev.b
        elif SB and not SA:
            S, other = SB, ev.a
        else:
            return None
        if not other:
            return None
        rider_line = strands[other[0]].line_id
        if not any(strands[c].line_id == rider_line for c in C - S):
            return None  # no marker of the crossed line in this configuration
        rider = frozenset((other[0],))
        out = [(C, +1)]
        rest = C - S
        lines_S = {strands[s].line_id for s in S}
        if not any(strands[r].line_id in lines_S for r in rest):
            out.append((rest | rider, +1))
        out.append((C | rider, -1))
        return out
    if kind == KILL:
        S = C & frozenset(ev.a)
        if not S:
            return None
        rest = C - S
        lines_S = {strands[s].line_id for s in S}
        if any(strands[r].line_id in lines_S for r in rest):
            return []  # a coupled marker was killed
        return [(rest, +1)]
    if kind in (MERGE, TANGENCY, SEPARATE):
        S = C & frozenset(ev.a + ev.b)
        if not S:
            return None
        return [(C - S, +1)]
    raise ValueError(f"unknown event kind {kind!r}")


def crop_graph_sum(web: PolygonalWeb) -> int:
    """Crop as a sum over normal crop graphs of (-1)^(number of branchings).

    Depth-first extension over branch decisions (ignore / turn / keep both)
    with memoisation keyed by (event index, live front set); each surviving
    decision path is the minimal collection of one normal crop graph and the
    kept-branch count equals card(Y) - k.
    """
    if web.k == 0:
        return 1
    events = web.events
    memo: Dict[Tuple[int, FrozenSet[int]], int] = {}

    def go(e: int, C: FrozenSet[int]) -> int:
        if not C:
            return 1
        if e >= len(events):
            raise RuntimeError("live fronts left after the final event")
        key = (e, C)
        hit = memo.get(key)
        if hit is not None:
            return hit
        steps = _config_steps(web, e, C)
        if steps is None:
            val = go(e + 1, C)
        else:
            val = 0
            for C2, sgn in steps:
                val += sgn * go(e + 1, C2)
        memo[key] = val
        return val

    roots = frozenset(s.sid for s in web.strands if s.is_germ)
    return go(0, roots)


def em_signed_count(web: PolygonalWeb, state_cap: int = 200000) -> int:
    """Signed count of empty marker configurations after the edge-marker
    process driven by the web's own event stream."""
    if web.k == 0:
        return 1
    state: Dict[FrozenSet[int], int] = {
        frozenset(s.sid for s in web.strands if s.is_germ): 1}
    for e in range(len(web.events)):
        new_state: Dict[FrozenSet[int], int] = {}
        for C, w in state.items():
            steps = _config_steps(web, e, C) if C else None
            if steps is None:
                new_state[C] = new_state.get(C, 0) + w
                continue
            for C2, sgn in steps:
                new_state[C2] = new_state.get(C2, 0) + sgn * w
        state = {C: w for C, w in new_state.items() if w != 0}
        if len(state) > state_cap:
            raise RuntimeError(f"marker process state exploded past {state_cap}")
    for C in state:
        if C:
            raise RuntimeError("non-empty marker configuration survived to time 1")
    return state.get(frozenset(), 0)


def signed_marker_terminal(act: ActivityMeasure, fam: WindowFamily, mc: MarkerConfig,
                           stop_rule: str = "tangency",
                           rng: Optional[np.random.Generator] = None,
                           seed: Optional[int] = None) -> int:
    """Run the signed branching marker process on a freshly sampled web (the
    web and the process share one event stream by construction)."""
    web = sample_web(act, fam, mc, stop_rule, rng=rng, seed=seed)
    return em_signed_count(web)


def crop(web: PolygonalWeb) -> int:
    """The crop functional (graph-sum form, the workhorse)."""
    return crop_graph_sum(web)
