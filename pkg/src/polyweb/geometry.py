"""Exact planar primitives: lines in (angle, offset) coordinates, convex windows,
growing window families with closed-form reveal times, and the invariant line measure.

Conventions
-----------
A line is the pair (phi, rho) with phi in [0, pi).  The unit normal is
n = (sin phi, cos phi), the foot of the perpendicular from the origin is
rho * n, and the direction vector is d = (cos phi, -sin phi).  Points on the
line are p(u) = rho * n + u * d, u being the arc coordinate.

All coincidence/parallelism predicates use the global tolerance EPS_GEO.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

Point = Tuple[float, float]

#: Global geometric tolerance (length units) for coincidence and parallelism tests.
EPS_GEO = 1e-9


def wrap_angle(phi: float) -> float:
    """Reduce an angle to [0, pi)."""
    phi = math.fmod(phi, math.pi)
    if phi < 0.0:
        phi += math.pi
    if phi >= math.pi:
        phi -= math.pi
    return phi


def angle_gap(a: float, b: float) -> float:
    """Distance between two line angles on the circle of length pi."""
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, math.pi - d)


class Line:
    """Straight line in normal coordinates (phi, rho)."""

    __slots__ = ("phi", "rho", "nx", "ny", "dx", "dy")

    def __init__(self, phi: float, rho: float):
        phi = wrap_angle(phi)
        self.phi = phi
        self.rho = rho
        self.nx = math.sin(phi)
        self.ny = math.cos(phi)
        self.dx = math.cos(phi)
        self.dy = -math.sin(phi)

    @staticmethod
    def from_points(a: Point, b: Point) -> "Line":
        """Supporting line of the segment a-b (a != b)."""
        dx, dy = b[0] - a[0], b[1] - a[1]
        norm = math.hypot(dx, dy)
        if norm < EPS_GEO:
            raise ValueError("degenerate segment: coincident endpoints")
        phi = wrap_angle(-math.atan2(dy, dx))
        nx, ny = math.sin(phi), math.cos(phi)
        return Line(phi, a[0] * nx + a[1] * ny)

    @staticmethod
    def through(p: Point, phi: float) -> "Line":
        """Line through p with normal angle phi."""
        phi = wrap_angle(phi)
        return Line(phi, p[0] * math.sin(phi) + p[1] * math.cos(phi))

    def point_at(self, u: float) -> Point:
        return (self.rho * self.nx + u * self.dx, self.rho * self.ny + u * self.dy)

    def u_of(self, p: Point) -> float:
        """Arc coordinate of (the projection of) p along the line."""
        return p[0] * self.dx + p[1] * self.dy

    def signed_offset(self, p: Point) -> float:
        """Signed normal distance from p to the line."""
        return p[0] * self.nx + p[1] * self.ny - self.rho

    def contains(self, p: Point, tol: float = EPS_GEO) -> bool:
        return abs(self.signed_offset(p)) <= tol

    def same_line(self, other: "Line", tol: float = EPS_GEO) -> bool:
        if angle_gap(self.phi, other.phi) > tol:
            return False
        # opposite-normal representations cannot occur: phi is canonical in [0, pi)
        return abs(self.rho - other.rho) <= tol

    def __repr__(self) -> str:
        return f"Line(phi={self.phi:.12g}, rho={self.rho:.12g})"


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1]) < EPS_GEO:
            raise ValueError("degenerate segment")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def line(self) -> Line:
        return Line.from_points(self.a, self.b)

    def midpoint(self) -> Point:
        return ((self.a[0] + self.b[0]) / 2.0, (self.a[1] + self.b[1]) / 2.0)


def intersect(l1: Line, l2: Line, tol: float = EPS_GEO) -> Optional[Point]:
    """Intersection point of two lines, or None when parallel within tolerance.

    Colinear pairs also return None; use Line.same_line to tell them apart.
    """
    s = l1.dx * l2.nx + l1.dy * l2.ny  # sin(phi2 - phi1)
    if abs(s) < tol:
        return None
    u1 = (l2.rho - l1.rho * (l1.nx * l2.nx + l1.ny * l2.ny)) / s
    return l1.point_at(u1)


def separates(line: Line, hull_points: Sequence[Point], tol: float = EPS_GEO) -> bool:
    """True iff the line misses the convex hull of the points (empty set -> True)."""
    pos = neg = False
    for p in hull_points:
        s = line.signed_offset(p)
        if s > tol:
            pos = True
        elif s < -tol:
            neg = True
        else:
            return False  # point on the line: hull is hit
        if pos and neg:
            return False
    return True


def convex_hull(points: Sequence[Point]) -> List[Point]:
    """Monotone-chain convex hull, ccw, no duplicate endpoint."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return list(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class ConvexDomain:
    """Open bounded convex window: a disc or a convex polygon (ccw vertices)."""

    __slots__ = ("kind", "center", "radius", "vertices", "_edges")

    def __init__(self, kind: str, center: Point = (0.0, 0.0), radius: float = 0.0,
                 vertices: Optional[List[Point]] = None):
        self.kind = kind
        if kind == "disc":
            if radius <= 0:
                raise ValueError("disc radius must be positive")
            self.center = center
            self.radius = radius
            self.vertices = None
            self._edges = None
        elif kind == "polygon":
            if vertices is None or len(vertices) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            vs = list(vertices)
            n = len(vs)
            area2 = sum(vs[i][0] * vs[(i + 1) % n][1] - vs[(i + 1) % n][0] * vs[i][1]
                        for i in range(n))
            if area2 < 0:
                vs = vs[::-1]
            # strict convexity check
            for i in range(n):
                o, a, b = vs[i], vs[(i + 1) % n], vs[(i + 2) % n]
                cr = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
                if cr <= EPS_GEO:
                    raise ValueError("polygon vertices not in strictly convex position")
            self.vertices = vs
            # outward half-planes: m . x <= c
            edges = []
            for i in range(n):
                p, q = vs[i], vs[(i + 1) % n]
                ex, ey = q[0] - p[0], q[1] - p[1]
                ln = math.hypot(ex, ey)
                mx, my = ey / ln, -ex / ln  # outward normal for ccw
                edges.append((mx, my, mx * p[0] + my * p[1]))
            self._edges = edges
            self.center = None
            self.radius = 0.0
        else:
            raise ValueError(f"unknown domain kind {kind!r}")

    @staticmethod
    def disc(center: Point, radius: float) -> "ConvexDomain":
        return ConvexDomain("disc", center=center, radius=radius)

    @staticmethod
    def polygon(vertices: Sequence[Point]) -> "ConvexDomain":
        return ConvexDomain("polygon", vertices=list(vertices))

    @staticmethod
    def square(center: Point, side: float) -> "ConvexDomain":
        h = side / 2.0
        cx, cy = center
        return ConvexDomain.polygon([(cx - h, cy - h), (cx + h, cy - h),
                                     (cx + h, cy + h), (cx - h, cy + h)])

    def contains(self, p: Point, tol: float = EPS_GEO) -> bool:
        """Membership in the closed domain, inflated by tol."""
        if self.kind == "disc":
            return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius + tol
        return all(mx * p[0] + my * p[1] <= c + tol for mx, my, c in self._edges)

    def area(self) -> float:
        if self.kind == "disc":
            return math.pi * self.radius ** 2
        vs = self.vertices
        n = len(vs)
        return 0.5 * sum(vs[i][0] * vs[(i + 1) % n][1] - vs[(i + 1) % n][0] * vs[i][1]
                         for i in range(n))

    def perimeter(self) -> float:
        if self.kind == "disc":
            return 2.0 * math.pi * self.radius
        vs = self.vertices
        n = len(vs)
        return sum(math.hypot(vs[(i + 1) % n][0] - vs[i][0], vs[(i + 1) % n][1] - vs[i][1])
                   for i in range(n))

    def width(self, phi: float) -> float:
        """Width of the domain measured along the normal direction (sin phi, cos phi)."""
        nx, ny = math.sin(phi), math.cos(phi)
        if self.kind == "disc":
            return 2.0 * self.radius
        vals = [v[0] * nx + v[1] * ny for v in self.vertices]
        return max(vals) - min(vals)

    def rho_range(self, phi: float) -> Tuple[float, float]:
        """Offset interval of lines with angle phi hitting the domain."""
        nx, ny = math.sin(phi), math.cos(phi)
        if self.kind == "disc":
            c = self.center[0] * nx + self.center[1] * ny
            return c - self.radius, c + self.radius
        vals = [v[0] * nx + v[1] * ny for v in self.vertices]
        return min(vals), max(vals)

    def chord(self, line: Line, tol: float = EPS_GEO) -> Optional[Tuple[float, float]]:
        """Arc-coordinate interval of the line inside the closed domain.

        Near-tangency (chord length < tol) is classified as a miss.
        """
        if self.kind == "disc":
            d = line.signed_offset(self.center)
            h2 = self.radius ** 2 - d * d
            if h2 <= tol * tol:
                return None
            h = math.sqrt(h2)
            uc = line.u_of(self.center)
            return uc - h, uc + h
        lo, hi = -math.inf, math.inf
        px = line.rho * line.nx
        py = line.rho * line.ny
        for mx, my, c in self._edges:
            denom = mx * line.dx + my * line.dy
            num = c - (mx * px + my * py)
            if abs(denom) < 1e-15:
                if num < 0:
                    return None
                continue
            t = num / denom
            if denom > 0:
                hi = min(hi, t)
            else:
                lo = max(lo, t)
        if hi - lo < tol:
            return None
        return lo, hi

    def boundary_points(self, n: int = 128) -> List[Point]:
        """Polyline approximation of the boundary (for rendering)."""
        if self.kind == "disc":
            cx, cy = self.center
            return [(cx + self.radius * math.cos(2 * math.pi * i / n),
                     cy + self.radius * math.sin(2 * math.pi * i / n)) for i in range(n)]
        return list(self.vertices)

    def bbox(self) -> Tuple[float, float, float, float]:
        if self.kind == "disc":
            cx, cy = self.center
            r = self.radius
            return cx - r, cy - r, cx + r, cy + r
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def interior_point(self) -> Point:
        if self.kind == "disc":
            return self.center
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (sum(xs) / len(xs), sum(ys) / len(ys))

    def __repr__(self) -> str:
        if self.kind == "disc":
            return f"ConvexDomain.disc({self.center}, {self.radius})"
        return f"ConvexDomain.polygon({self.vertices})"


def mu_hit_measure(target) -> float:
    """Invariant measure of the set of lines hitting the target.

    Closed forms: 2 * length for a segment, perimeter for a convex domain
    (Cauchy formula).  Degenerate targets get measure 0.
    """
    if isinstance(target, Segment):
        return 2.0 * target.length
    if isinstance(target, ConvexDomain):
        return target.perimeter()
    raise TypeError(f"unsupported target {type(target)!r}")


class DegenerateAnchorError(ValueError):
    """Raised when a line misses the window or is tangent within tolerance."""


class WindowFamily:
    """Strictly increasing window family (D_t), t in [0,1], with D_1 the closed base.

    Two closed-form kinds: 'concentric' (discs about the disc centre) and
    'homothety' (D_t = x0 + t (D - x0) for an interior origin x0).  Both give
    exact reveal times, which the event-driven samplers rely on.
    """

    __slots__ = ("base", "kind", "origin", "_anchor_cache")

    def __init__(self, base: ConvexDomain, kind: str = "concentric",
                 origin: Optional[Point] = None):
        self.base = base
        if kind == "concentric":
            if base.kind != "disc":
                raise ValueError("concentric family requires a disc domain")
            self.origin = base.center
        elif kind == "homothety":
            self.origin = origin if origin is not None else base.interior_point()
            if not base.contains(self.origin, tol=-EPS_GEO):
                raise ValueError("homothety origin must be an interior point")
        else:
            raise ValueError(f"unknown window family kind {kind!r}")
        self.kind = kind
        self._anchor_cache = {}

    # -- reveal times ------------------------------------------------------

    def reveal_time(self, p: Point) -> float:
        """inf{t : p in D_t}; requires p in the closed base domain."""
        if not self.base.contains(p, tol=1e-7):
            raise ValueError(f"point {p} outside the closed base domain")
        if self.kind == "concentric":
            c, r = self.base.center, self.base.radius
            return min(1.0, math.hypot(p[0] - c[0], p[1] - c[1]) / r)
        x0 = self.origin
        v = (p[0] - x0[0], p[1] - x0[1])
        if self.base.kind == "polygon":
            t = 0.0
            for mx, my, c in self.base._edges:
                denom = c - (mx * x0[0] + my * x0[1])  # > 0 for interior origin
                t = max(t, (mx * v[0] + my * v[1]) / denom)
            return min(1.0, max(0.0, t))
        # disc with off-centre origin: |v - t w| = t R with w = centre - x0,
        # i.e. a t^2 + 2 b t - q = 0 with a = R^2 - |w|^2 > 0 (interior origin)
        c, r = self.base.center, self.base.radius
        w = (c[0] - x0[0], c[1] - x0[1])
        a = r * r - (w[0] ** 2 + w[1] ** 2)
        b = v[0] * w[0] + v[1] * w[1]
        q = v[0] ** 2 + v[1] ** 2
        if q == 0.0:
            return 0.0
        t = (-b + math.sqrt(b * b + a * q)) / a
        return min(1.0, max(0.0, t))

    def window_at(self, t: float) -> ConvexDomain:
        """The window D_t (t in (0,1]; D_0 degenerates to the origin point)."""
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"time {t} outside [0, 1]")
        if t == 0.0:
            raise ValueError("D_0 is the single origin point, not a domain")
        if self.kind == "concentric":
            return ConvexDomain.disc(self.base.center, t * self.base.radius)
        x0 = self.origin
        if self.base.kind == "disc":
            c = self.base.center
            return ConvexDomain.disc((x0[0] + t * (c[0] - x0[0]), x0[1] + t * (c[1] - x0[1])),
                                     t * self.base.radius)
        verts = [(x0[0] + t * (v[0] - x0[0]), x0[1] + t * (v[1] - x0[1]))
                 for v in self.base.vertices]
        return ConvexDomain.polygon(verts)

    # -- anchors -----------------------------------------------------------

    def anchor(self, line: Line) -> Tuple[Point, float]:
        """Anchor point A(l) and its reveal time tau_l.

        A(l) is the unique point of the line with minimal reveal time; lines
        missing the window (chord < EPS_GEO) raise DegenerateAnchorError.
        """
        key = (line.phi, line.rho)
        hit = self._anchor_cache.get(key)
        if hit is not None:
            return hit
        span = self.base.chord(line)
        if span is None:
            raise DegenerateAnchorError(f"line {line} misses the window or is tangent")
        if self.kind == "concentric":
            u = line.u_of(self.base.center)
            p = line.point_at(u)
            tau = self.reveal_time(p)
        else:
            u, p, tau = self._minimise_reveal(line, span)
        res = (p, tau)
        self._anchor_cache[key] = res
        return res

    def anchor_u(self, line: Line) -> float:
        p, _ = self.anchor(line)
        return line.u_of(p)

    def _minimise_reveal(self, line: Line, span: Tuple[float, float]):
        # reveal along a line is unimodal for convex increasing families
        lo, hi = span
        for _ in range(200):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if self.reveal_time(line.point_at(m1)) <= self.reveal_time(line.point_at(m2)):
                hi = m2
            else:
                lo = m1
            if hi - lo < 1e-14:
                break
        u = 0.5 * (lo + hi)
        tau = self.reveal_time(line.point_at(u))
        # polygon families admit flat minima (lines parallel to an edge);
        # canonicalise to the midpoint of the minimising interval
        thr = tau + 1e-12
        f = lambda x: self.reveal_time(line.point_at(x))
        a, b = span[0], u
        for _ in range(80):
            mid = 0.5 * (a + b)
            if f(mid) <= thr:
                b = mid
            else:
                a = mid
        left = b
        a, b = u, span[1]
        for _ in range(80):
            mid = 0.5 * (a + b)
            if f(mid) <= thr:
                a = mid
            else:
                b = mid
        right = a
        u = 0.5 * (left + right)
        p = line.point_at(u)
        return u, p, self.reveal_time(p)

    # -- growth-tip kinematics ----------------------------------------------

    def tip_u(self, line: Line, side: int, t: float) -> float:
        """Arc coordinate of the chord endpoint of l in D_t on the given side.

        side is +1/-1 relative to the anchor coordinate.  Requires
        tau_l <= t <= 1.
        """
        u_a = self.anchor_u(line)
        if self.kind == "concentric":
            c, r = self.base.center, self.base.radius
            d = line.signed_offset(c)
            h2 = (t * r) ** 2 - d * d
            h = math.sqrt(max(0.0, h2))
            return u_a + side * h
        span = self.base.chord(line)
        u_exit = span[1] if side > 0 else span[0]
        lo, hi = (u_a, u_exit) if side > 0 else (u_exit, u_a)
        # reveal is monotone in |u - u_a| on each side: bisect
        f = lambda u: self.reveal_time(line.point_at(u)) - t
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if (f(mid) <= 0.0) == (side > 0):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def exit_u(self, line: Line, side: int) -> float:
        """Chord endpoint coordinate at t = 1 on the given side of the anchor."""
        span = self.base.chord(line)
        if span is None:
            raise DegenerateAnchorError(f"line {line} misses the window")
        return span[1] if side > 0 else span[0]
