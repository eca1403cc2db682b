"""Line-oriented text interchange for field and web samples.

Typed headers, one record per line, coordinates in shortest exact decimal
form so that serialise -> parse -> serialise is byte-identical.  Webs carry
their full event timeline, so crops of stored webs replay exactly.
"""

from __future__ import annotations

from typing import List, Optional, TextIO, Tuple

from .fields import FieldEdge, FieldSample
from .geometry import ConvexDomain, Line, WindowFamily
from .webs import Event, MarkerConfig, PolygonalWeb, Strand

FIELD_MAGIC = "polyweb-field 1"
WEB_MAGIC = "polyweb-web 1"


def _f(x: float) -> str:
    return repr(float(x))


def _domain_words(dom: ConvexDomain) -> List[str]:
    if dom.kind == "disc":
        return ["disc", _f(dom.center[0]), _f(dom.center[1]), _f(dom.radius)]
    out = ["polygon"]
    for v in dom.vertices:
        out += [_f(v[0]), _f(v[1])]
    return out


def _parse_domain(words: List[str]) -> ConvexDomain:
    if words[0] == "disc":
        return ConvexDomain.disc((float(words[1]), float(words[2])), float(words[3]))
    if words[0] == "polygon":
        vals = [float(w) for w in words[1:]]
        return ConvexDomain.polygon(list(zip(vals[::2], vals[1::2])))
    raise ValueError(f"unknown domain {words[0]!r}")


def _family_words(fam: WindowFamily) -> List[str]:
    if fam.kind == "concentric":
        return ["concentric"]
    return ["homothety", _f(fam.origin[0]), _f(fam.origin[1])]


def _parse_family(words: List[str], dom: ConvexDomain) -> WindowFamily:
    if words[0] == "concentric":
        return WindowFamily(dom, "concentric")
    if words[0] == "homothety":
        return WindowFamily(dom, "homothety", origin=(float(words[1]), float(words[2])))
    raise ValueError(f"unknown family {words[0]!r}")


# -- fields -------------------------------------------------------------------

def write_field(sample: FieldSample, fh: TextIO):
    fh.write(FIELD_MAGIC + "\n")
    fh.write("domain " + " ".join(_domain_words(sample.domain)) + "\n")
    fh.write("family " + " ".join(_family_words(sample.family)) + "\n")
    fh.write(f"seed {sample.seed if sample.seed is not None else '-'}\n")
    fh.write(f"edges {len(sample.edges)}\n")
    for e in sample.edges:
        fh.write(" ".join(["edge", _f(e.line.phi), _f(e.line.rho),
                           _f(e.u_lo), _f(e.u_hi), e.lineage]) + "\n")


def read_field(fh: TextIO) -> FieldSample:
    lines = [ln.rstrip("\n") for ln in fh]
    if lines[0] != FIELD_MAGIC:
        raise ValueError("not a polyweb field file")
    dom = _parse_domain(lines[1].split()[1:])
    fam = _parse_family(lines[2].split()[1:], dom)
    seed_w = lines[3].split()[1]
    seed = None if seed_w == "-" else int(seed_w)
    n = int(lines[4].split()[1])
    edges = []
    for ln in lines[5:5 + n]:
        w = ln.split()
        e = FieldEdge(Line(float(w[1]), float(w[2])), w[5])
        e.u_lo, e.u_hi = float(w[3]), float(w[4])
        edges.append(e)
    return FieldSample(edges, dom, fam, seed=seed)


# -- webs ---------------------------------------------------------------------

def _csv(ids) -> str:
    return ",".join(str(i) for i in ids) if ids else "-"


def _parse_csv(word: str) -> Tuple[int, ...]:
    return () if word == "-" else tuple(int(x) for x in word.split(","))


def write_web(web: PolygonalWeb, fh: TextIO):
    fh.write(WEB_MAGIC + "\n")
    fh.write("domain " + " ".join(_domain_words(web.domain)) + "\n")
    fh.write("family " + " ".join(_family_words(web.family)) + "\n")
    fh.write(f"stop_rule {web.stop_rule}\n")
    fh.write(f"seed {web.seed if web.seed is not None else '-'}\n")
    fh.write(f"markers {web.k}\n")
    for ln, pt in web.markers.markers:
        fh.write(" ".join(["marker", _f(ln.phi), _f(ln.rho), _f(pt[0]), _f(pt[1])]) + "\n")
    fh.write(f"lines {len(web.lines)}\n")
    for i, ln in enumerate(web.lines):
        fh.write(" ".join(["line", _f(ln.phi), _f(ln.rho), _f(web.line_anchor_u[i])]) + "\n")
    fh.write(f"strands {web.m}\n")
    for s in web.strands:
        fh.write(" ".join([
            "strand", str(s.sid), str(s.line_id), str(s.side), str(s.root),
            "-" if s.parent is None else str(s.parent), str(s.create_idx),
            _f(s.create_s), _f(s.create_pt[0]), _f(s.create_pt[1]),
            "1" if s.is_germ else "0", "1" if s.forced else "0",
            str(s.active_from), str(s.death_idx), _f(s.death_s),
            _f(s.death_pt[0]), _f(s.death_pt[1]), s.cause]) + "\n")
    fh.write(f"events {len(web.events)}\n")
    for ev in web.events:
        pt = "-" if ev.point is None else f"{_f(ev.point[0])},{_f(ev.point[1])}"
        ch = "-" if not ev.children else ";".join(f"{p},{c}" for p, c in ev.children)
        fh.write(" ".join(["event", ev.kind, _f(ev.s), _csv(ev.a), _csv(ev.b),
                           ch, pt]) + "\n")


def read_web(fh: TextIO) -> PolygonalWeb:
    lines_txt = [ln.rstrip("\n") for ln in fh]
    if lines_txt[0] != WEB_MAGIC:
        raise ValueError("not a polyweb web file")
    dom = _parse_domain(lines_txt[1].split()[1:])
    fam = _parse_family(lines_txt[2].split()[1:], dom)
    stop_rule = lines_txt[3].split()[1]
    seed_w = lines_txt[4].split()[1]
    seed = None if seed_w == "-" else int(seed_w)
    pos = 5
    k = int(lines_txt[pos].split()[1]); pos += 1
    markers = []
    for _ in range(k):
        w = lines_txt[pos].split(); pos += 1
        markers.append((Line(float(w[1]), float(w[2])), (float(w[3]), float(w[4]))))
    mc = MarkerConfig(markers)
    nl = int(lines_txt[pos].split()[1]); pos += 1
    lines = []
    anchor_u = []
    for _ in range(nl):
        w = lines_txt[pos].split(); pos += 1
        lines.append(Line(float(w[1]), float(w[2])))
        anchor_u.append(float(w[3]))
    m = int(lines_txt[pos].split()[1]); pos += 1
    strands = []
    for _ in range(m):
        w = lines_txt[pos].split(); pos += 1
        s = Strand(int(w[1]), int(w[2]), int(w[3]), int(w[4]),
                   None if w[5] == "-" else int(w[5]), int(w[6]), float(w[7]),
                   (float(w[8]), float(w[9])), is_germ=w[10] == "1",
                   forced=w[11] == "1", active_from=int(w[12]),
                   death_idx=int(w[13]), death_s=float(w[14]),
                   death_pt=(float(w[15]), float(w[16])), cause=w[17])
        strands.append(s)
    for s in strands:
        if s.parent is not None:
            strands[s.parent].children.append(s.sid)
    ne = int(lines_txt[pos].split()[1]); pos += 1
    events = []
    for _ in range(ne):
        w = lines_txt[pos].split(); pos += 1
        pt = None if w[6] == "-" else tuple(float(x) for x in w[6].split(","))
        ch = () if w[5] == "-" else tuple(
            tuple(int(x) for x in pair.split(",")) for pair in w[5].split(";"))
        events.append(Event(float(w[2]), w[1], _parse_csv(w[3]), _parse_csv(w[4]),
                            ch, pt))
    return PolygonalWeb(mc, lines, anchor_u, strands, events, dom, fam,
                        stop_rule, seed=seed)
