"""Debug helper: marker process with full history tracking.

Runs the same event semantics as em_signed_count but records, per surviving
empty configuration, the enriched-branch history of every marker, so the
result can be diffed against the subset enumeration's iota = 1 collections.
"""

from polyweb.webs import (ACTIVATE, BRANCH, CATCH, CROSS, FORCE, KILL, MERGE,
                          SEPARATE, TANGENCY)


def tracked_histories(web):
    """Map {sorted tuple of branch leg-tuples: net signed weight}."""
    strands = web.strands
    EV = web.events

    def steps(e, C):
        ev = EV[e]
        S = frozenset(m for m in C if m[0] in ev.a)
        Sb = frozenset(m for m in C if m[0] in ev.b)
        if ev.kind in (ACTIVATE, CATCH):
            return None
        if ev.kind in (BRANCH, FORCE):
            if not S:
                return None
            if ev.kind == FORCE and not any(m[0] in ev.b for m in C):
                return None
            chl = dict(ev.children)
            O = frozenset((chl[m[0]], m[1] + ((chl[m[0]], e, "child"),)) for m in S)
            out = [(C, 1, frozenset())]
            linesS = {strands[m[0]].line_id for m in S}
            rest = C - S
            if not any(strands[m[0]].line_id in linesS for m in rest):
                out.append((rest | O, 1, frozenset()))
            out.append((C | O, -1, frozenset()))
            return out
        if ev.kind == CROSS:
            if S and Sb:
                dying = S | Sb
                rest = C - dying
                ld = {strands[m[0]].line_id for m in dying}
                if any(strands[m[0]].line_id in ld for m in rest):
                    return []
                return [(rest, 1, dying)]
            if S and not Sb:
                T, other = S, ev.b
            elif Sb and not S:
                T, other = Sb, ev.a
            else:
                return None
            if not other:
                return None
            rl = strands[other[0]].line_id
            if not any(strands[m[0]].line_id == rl for m in C - T):
                return None
            out = [(C, 1, frozenset())]
            linesT = {strands[m[0]].line_id for m in T}
            rest = C - T
            riders = frozenset((other[0], m[1] + ((other[0], e, "jump"),)) for m in T)
            if not any(strands[m[0]].line_id in linesT for m in rest):
                out.append((rest | riders, 1, frozenset()))
            out.append((C | riders, -1, frozenset()))
            return out
        if ev.kind == KILL:
            if not S:
                return None
            rest = C - S
            lS = {strands[m[0]].line_id for m in S}
            if any(strands[m[0]].line_id in lS for m in rest):
                return []
            return [(rest, 1, S)]
        if ev.kind in (MERGE, TANGENCY, SEPARATE):
            D = S | Sb
            if not D:
                return None
            return [(C - D, 1, D)]
        raise ValueError(ev.kind)

    init = frozenset((s.sid, ((s.sid, -1, "root"),)) for s in strands if s.is_germ)
    state = {(init, frozenset()): 1}
    for e in range(len(EV)):
        ns = {}
        for (C, done), w in state.items():
            st = steps(e, C) if C else None
            if st is None:
                key = (C, done)
                ns[key] = ns.get(key, 0) + w
                continue
            for C2, sg, dying in st:
                d2 = done | frozenset(m[1] for m in dying)
                key = (C2, d2)
                ns[key] = ns.get(key, 0) + sg * w
        state = {k: v for k, v in ns.items() if v != 0}
    out = {}
    for (C, done), w in state.items():
        assert not C, "non-empty configuration survived"
        key = tuple(sorted(done))
        out[key] = out.get(key, 0) + w
    return {k: v for k, v in out.items() if v != 0}
