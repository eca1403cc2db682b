"""SVG rendering: fields in black strokes, web branches colored by root
marker, crop graphs overlaid with V/T/I node glyphs."""

from __future__ import annotations

from typing import List, Optional, Tuple

from .crop import CropGraph
from .fields import FieldSample
from .geometry import ConvexDomain, Point
from .webs import PolygonalWeb

_PALETTE = ["#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400",
            "#16a085", "#7f8c8d", "#2c3e50"]


class _Canvas:
    def __init__(self, dom: ConvexDomain, size: int = 640, pad: float = 0.05):
        x0, y0, x1, y1 = dom.bbox()
        w = max(x1 - x0, y1 - y0)
        self.x0 = x0 - pad * w
        self.y1 = y1 + pad * w
        self.scale = size / (w * (1 + 2 * pad))
        self.size = size
        self.parts: List[str] = []

    def pt(self, p: Point) -> Tuple[float, float]:
        return ((p[0] - self.x0) * self.scale, (self.y1 - p[1]) * self.scale)

    def polyline(self, pts, color: str, width: float = 1.5, dash: str = ""):
        if len(pts) < 2:
            return
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (self.pt(p) for p in pts))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{coords}" fill="none" '
                          f'stroke="{color}" stroke-width="{width}"{extra}/>')

    def circle(self, p: Point, r: float, color: str, fill: str = "none"):
        x, y = self.pt(p)
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" '
                          f'stroke="{color}" fill="{fill}"/>')

    def rect_glyph(self, p: Point, r: float, color: str):
        x, y = self.pt(p)
        self.parts.append(f'<rect x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r}" '
                          f'height="{2 * r}" stroke="{color}" fill="none"/>')

    def domain(self, dom: ConvexDomain):
        if dom.kind == "disc":
            x, y = self.pt(dom.center)
            self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" '
                              f'r="{dom.radius * self.scale:.2f}" stroke="#999" '
                              f'fill="none" stroke-width="1"/>')
        else:
            pts = list(dom.vertices) + [dom.vertices[0]]
            self.polyline(pts, "#999", 1.0)

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
                f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">\n'
                f"{body}\n</svg>\n")


def field_svg(sample: FieldSample) -> str:
    cv = _Canvas(sample.domain)
    cv.domain(sample.domain)
    for e in sample.edges:
        cv.polyline([e.a, e.b], "#000000", 1.5)
    return cv.render()


def web_svg(web: PolygonalWeb, crop: Optional[CropGraph] = None) -> str:
    cv = _Canvas(web.domain)
    cv.domain(web.domain)
    for br in web.branches():
        color = _PALETTE[br.root % len(_PALETTE)]
        if len(br.polyline) >= 2:
            cv.polyline(br.polyline, color, 1.2)
    for ln, pt in web.markers.markers:
        cv.circle(pt, 4.0, "#000", fill="#fff")
    if crop is not None:
        for poly in crop.polylines:
            cv.polyline(poly, "#000", 2.5, dash="5,3")
        for p, label in crop.nodes:
            if label == "V":
                cv.circle(p, 5.0, "#c0392b")
            elif label == "T":
                cv.rect_glyph(p, 4.0, "#2980b9")
            else:
                cv.circle(p, 2.5, "#27ae60", fill="#27ae60")
    return cv.render()
