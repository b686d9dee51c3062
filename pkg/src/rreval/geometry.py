"""Quadrilateral geometry: area, intersection area and IoU.

Coordinates are image pixels with y growing downward, so a quad listed
clockwise on screen has a positive shoelace sum. All public functions
accept either winding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence


class GeometryError(ValueError):
    """Raised for polygons the intersection routines cannot handle."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Quad:
    """Four-vertex polygon.

    Construction checks vertex count and finiteness only. Simplicity and
    non-degeneracy are checked by the parsers, since predictions are allowed
    to be degenerate.
    """

    vertices: tuple[Point, Point, Point, Point]
    signed_area: float = field(init=False, repr=False, compare=False)
    bbox: tuple[float, float, float, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(Point(float(x), float(y)) for x, y in self.vertices)
        if len(verts) != 4:
            raise GeometryError(f"a quad needs exactly 4 vertices, got {len(verts)}")
        for p in verts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise GeometryError(f"non-finite vertex {p}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "signed_area", _signed_area(verts))
        xs = [p.x for p in verts]
        ys = [p.y for p in verts]
        object.__setattr__(self, "bbox", (min(xs), min(ys), max(xs), max(ys)))

    @classmethod
    def from_flat(cls, coords: Sequence[float]) -> "Quad":
        """Build from ``[x1, y1, ..., x4, y4]``."""
        if len(coords) != 8:
            raise GeometryError(f"expected 8 coordinates, got {len(coords)}")
        return cls(tuple(Point(coords[i], coords[i + 1]) for i in range(0, 8, 2)))

    def flat(self) -> list[float]:
        return [c for p in self.vertices for c in p]

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def is_clockwise(self) -> bool:
        # clockwise on screen == positive shoelace when y points down
        return self.signed_area > 0

    @property
    def is_degenerate(self) -> bool:
        return self.signed_area == 0.0

    @property
    def is_simple(self) -> bool:
        return is_simple(self)

    @property
    def is_convex(self) -> bool:
        return is_convex(self)


def _signed_area(pts: Sequence[tuple[float, float]]) -> float:
    n = len(pts)
    s = 0.0
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2.0


def quad_area(q: Quad) -> float:
    """Absolute shoelace area; 0 for degenerate quads."""
    return abs(q.signed_area)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p, q, r) -> bool:
    # r is collinear with pq; is it within the closed segment?
    return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))


def segments_intersect(p1, p2, p3, p4) -> bool:
    """Closed-segment intersection test, collinear overlap included."""
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    if d1 == 0 and _on_segment(p3, p4, p1):
        return True
    if d2 == 0 and _on_segment(p3, p4, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, p3):
        return True
    if d4 == 0 and _on_segment(p1, p2, p4):
        return True
    return False


def is_simple(q: Quad) -> bool:
    """True if no two non-adjacent edges of ``q`` touch or cross."""
    a, b, c, d = q.vertices
    return not (segments_intersect(a, b, c, d) or segments_intersect(b, c, d, a))


def is_convex(q: Quad) -> bool:
    """Convexity of a simple quad; collinear corners are allowed."""
    v = q.vertices
    sign = 0
    for i in range(4):
        cr = _cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4])
        if cr == 0:
            continue
        s = 1 if cr > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def clip_convex(subject: Sequence[tuple[float, float]],
                clipper: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a convex polygon against a convex polygon.

    ``clipper`` must have positive orientation (positive shoelace sum).
    Returns the vertices of the intersection, possibly empty.
    """
    output = list(subject)
    n = len(clipper)
    for i in range(n):
        if not output:
            break
        ax, ay = clipper[i]
        bx, by = clipper[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inp = output
        output = []
        sx, sy = inp[-1]
        s_side = ex * (sy - ay) - ey * (sx - ax)
        for px, py in inp:
            p_side = ex * (py - ay) - ey * (px - ax)
            if p_side >= 0:
                if s_side < 0:
                    t = s_side / (s_side - p_side)
                    output.append((sx + t * (px - sx), sy + t * (py - sy)))
                output.append((px, py))
            elif s_side >= 0:
                t = s_side / (s_side - p_side)
                output.append((sx + t * (px - sx), sy + t * (py - sy)))
            sx, sy, s_side = px, py, p_side
    return output


def _positive(pts: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = list(pts)
    if _signed_area(pts) < 0:
        pts.reverse()
    return pts


def _convex_overlap(a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]) -> float:
    poly = clip_convex(a, _positive(b))
    if len(poly) < 3:
        return 0.0
    return abs(_signed_area(poly))


def _fan(q: Quad) -> list[tuple[float, list[tuple[float, float]]]]:
    """Signed fan decomposition from vertex 0.

    For a non-convex quad whose reflex corner is not vertex 0 or 2, one fan
    triangle lies outside the quad; the signs make the sum of triangle
    indicators equal the quad's indicator almost everywhere.
    """
    v = q.vertices
    tris = []
    for tri in ((v[0], v[1], v[2]), (v[0], v[2], v[3])):
        s = _signed_area(tri)
        if s != 0.0:
            tris.append((1.0 if s > 0 else -1.0, list(tri)))
    if q.signed_area < 0:
        tris = [(-sign, tri) for sign, tri in tris]
    return tris


def intersection_area(a: Quad, b: Quad) -> float:
    """Area of the region shared by two quads.

    Degenerate quads give 0. Raises :class:`GeometryError` if either quad is
    self-intersecting.
    """
    if a.signed_area == 0.0 or b.signed_area == 0.0:
        return 0.0
    # fixed operand order keeps the result bit-identical under swapping
    if b.vertices < a.vertices:
        a, b = b, a
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    if ax0 >= bx1 or bx0 >= ax1 or ay0 >= by1 or by0 >= ay1:
        return 0.0
    for q in (a, b):
        if not is_simple(q):
            raise GeometryError(f"self-intersecting quad {q.flat()}")
    if is_convex(a) and is_convex(b):
        inter = _convex_overlap(a.vertices, b.vertices)
    else:
        inter = 0.0
        for sa, ta in _fan(a):
            for sb, tb in _fan(b):
                inter += sa * sb * _convex_overlap(ta, tb)
        inter = max(inter, 0.0)
    return min(inter, a.area, b.area)


def iou(a: Quad, b: Quad) -> float:
    """Intersection over union, 0 when the union is empty."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)

