"""Integer-exact geometry kernel for rectilinear layout data.

All coordinates are integer database units (dbu). No operation introduces
floating-point coordinates; where non-rectilinear polygon clipping needs
intermediate intersection points they are held as exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union


class GeometryError(ValueError):
    """Raised for malformed geometric inputs."""


# Full O(n^2) simplicity validation is skipped above this vertex count;
# layout shapes are small (GDSII boundaries are capped by the format).
_SIMPLICITY_CHECK_LIMIT = 256


@dataclass(frozen=True, order=True)
class Point:
    x: int
    y: int

    def translated(self, dx: int, dy: int) -> "Point":
        return Point(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class Rect:
    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        if self.lo.x > self.hi.x or self.lo.y > self.hi.y:
            raise GeometryError(f"rect corners not normalized: {self.lo}..{self.hi}")

    @classmethod
    def from_coords(cls, x0: int, y0: int, x1: int, y1: int) -> "Rect":
        return cls(Point(min(x0, x1), min(y0, y1)), Point(max(x0, x1), max(y0, y1)))

    @property
    def width(self) -> int:
        return self.hi.x - self.lo.x

    @property
    def height(self) -> int:
        return self.hi.y - self.lo.y

    @property
    def area(self) -> int:
        return self.width * self.height

    def is_degenerate(self) -> bool:
        return self.width == 0 or self.height == 0

    def contains(self, p: Point) -> bool:
        """Boundary-inclusive containment."""
        return self.lo.x <= p.x <= self.hi.x and self.lo.y <= p.y <= self.hi.y

    def intersects(self, other: "Rect") -> bool:
        """True if the closed rects share at least a point."""
        return (
            self.lo.x <= other.hi.x
            and other.lo.x <= self.hi.x
            and self.lo.y <= other.hi.y
            and other.lo.y <= self.hi.y
        )

    def expanded(self, margin: int) -> "Rect":
        return Rect(
            Point(self.lo.x - margin, self.lo.y - margin),
            Point(self.hi.x + margin, self.hi.y + margin),
        )

    def translated(self, dx: int, dy: int) -> "Rect":
        return Rect(self.lo.translated(dx, dy), self.hi.translated(dx, dy))

    def to_polygon(self) -> "Polygon":
        if self.is_degenerate():
            raise GeometryError(f"degenerate rect has no polygon form: {self}")
        return Polygon(
            [
                self.lo,
                Point(self.hi.x, self.lo.y),
                self.hi,
                Point(self.lo.x, self.hi.y),
            ]
        )


def rect_intersection(a: Rect, b: Rect) -> Rect | None:
    """Intersection rect of two closed rects, or None when they are apart."""
    x0 = max(a.lo.x, b.lo.x)
    y0 = max(a.lo.y, b.lo.y)
    x1 = min(a.hi.x, b.hi.x)
    y1 = min(a.hi.y, b.hi.y)
    if x0 > x1 or y0 > y1:
        return None
    return Rect(Point(x0, y0), Point(x1, y1))


def rect_intersection_area(a: Rect, b: Rect) -> int:
    w = min(a.hi.x, b.hi.x) - max(a.lo.x, b.lo.x)
    if w <= 0:
        return 0
    h = min(a.hi.y, b.hi.y) - max(a.lo.y, b.lo.y)
    if h <= 0:
        return 0
    return w * h


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if cross != 0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def _orient(a: Point, b: Point, c: Point) -> int:
    v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (v > 0) - (v < 0)


def _segments_touch(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """Closed-segment intersection test (shared points count)."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if d1 != d2 and d3 != d4:
        return True
    if d1 == 0 and _on_segment(p1, p3, p4):
        return True
    if d2 == 0 and _on_segment(p2, p3, p4):
        return True
    if d3 == 0 and _on_segment(p3, p1, p2):
        return True
    if d4 == 0 and _on_segment(p4, p1, p2):
        return True
    return False


class Polygon:
    """Simple closed polygon over integer vertices (implicit closure).

    Rejects rings with fewer than 3 distinct vertices, repeated consecutive
    vertices, or self-intersections (checked exhaustively up to
    _SIMPLICITY_CHECK_LIMIT vertices).
    """

    __slots__ = ("vertices", "bbox")

    def __init__(self, vertices: Sequence[Point]):
        verts = list(vertices)
        if len(verts) >= 2 and verts[0] == verts[-1]:
            verts = verts[:-1]
        if len(verts) < 3:
            raise GeometryError(f"polygon needs >=3 vertices, got {len(verts)}")
        n = len(verts)
        for i in range(n):
            if verts[i] == verts[(i + 1) % n]:
                raise GeometryError(f"repeated consecutive vertex {verts[i]}")
        if n <= _SIMPLICITY_CHECK_LIMIT:
            self._check_simple(verts)
        self.vertices = tuple(verts)
        xs = [v.x for v in verts]
        ys = [v.y for v in verts]
        self.bbox = Rect(Point(min(xs), min(ys)), Point(max(xs), max(ys)))

    @staticmethod
    def _check_simple(verts: list[Point]) -> None:
        n = len(verts)
        for i in range(n):
            a1, a2 = verts[i], verts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    # Adjacent edges share one endpoint; a spur (overlap past
                    # the shared point) still counts as self-intersection.
                    b1, b2 = verts[j], verts[(j + 1) % n]
                    shared = a2 if a2 in (b1, b2) else a1
                    far_a = a1 if shared == a2 else a2
                    far_b = b2 if shared == b1 else b1
                    if _on_segment(far_a, b1, b2) or _on_segment(far_b, a1, a2):
                        raise GeometryError("self-intersecting polygon (spur)")
                    continue
                b1, b2 = verts[j], verts[(j + 1) % n]
                if _segments_touch(a1, a2, b1, b2):
                    raise GeometryError("self-intersecting polygon")

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"Polygon({list(self.vertices)!r})"

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    def is_rectilinear(self) -> bool:
        return all(a.x == b.x or a.y == b.y for a, b in self.edges())

    def signed_area2(self) -> int:
        """Twice the signed (shoelace) area; positive for CCW rings."""
        total = 0
        n = len(self.vertices)
        for i in range(n):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % n]
            total += a.x * b.y - b.x * a.y
        return total

    @property
    def area(self) -> Fraction:
        return Fraction(abs(self.signed_area2()), 2)

    def bounding_rect(self) -> Rect:
        return self.bbox


def point_in_polygon(p: Point, poly: Polygon) -> bool:
    """Boundary-inclusive containment via exact ray casting.

    A point on the polygon outline counts as inside: a probe touching
    foreign metal cannot host a wire there.
    """
    if not poly.bbox.contains(p):
        return False
    for a, b in poly.edges():
        if _on_segment(p, a, b):
            return True
    inside = False
    for a, b in poly.edges():
        if (a.y > p.y) != (b.y > p.y):
            dy = b.y - a.y
            lhs = (p.x - a.x) * dy
            rhs = (p.y - a.y) * (b.x - a.x)
            if (lhs < rhs) if dy > 0 else (lhs > rhs):
                inside = not inside
    return inside


def rectilinear_decompose(poly: Polygon) -> list[Rect]:
    """Split a rectilinear polygon into disjoint horizontal-band rects."""
    if not poly.is_rectilinear():
        raise GeometryError("rectilinear decomposition of non-rectilinear polygon")
    verticals = []
    for a, b in poly.edges():
        if a.x == b.x and a.y != b.y:
            verticals.append((a.x, min(a.y, b.y), max(a.y, b.y)))
    ys = sorted({y for v in poly.vertices for y in (v.y,)})
    rects: list[Rect] = []
    for y0, y1 in zip(ys, ys[1:]):
        # Within a band split at every vertex y, a vertical edge either
        # spans the band fully or misses it.
        xs = sorted(x for x, lo, hi in verticals if lo <= y0 and hi >= y1)
        for i in range(0, len(xs) - 1, 2):
            rects.append(Rect(Point(xs[i], y0), Point(xs[i + 1], y1)))
    return rects


FracPoint = tuple[Fraction, Fraction]


def _area2_frac(pts: list[FracPoint]) -> Fraction:
    total = Fraction(0)
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        total += ax * by - bx * ay
    return total


def _clip_convex(subject: list[FracPoint], clipper: list[FracPoint]) -> list[FracPoint]:
    """Sutherland-Hodgman clip of `subject` by a convex CCW `clipper`."""
    out = subject
    m = len(clipper)
    for i in range(m):
        if not out:
            return []
        cx1, cy1 = clipper[i]
        cx2, cy2 = clipper[(i + 1) % m]
        ex, ey = cx2 - cx1, cy2 - cy1

        def side(p: FracPoint) -> Fraction:
            return ex * (p[1] - cy1) - ey * (p[0] - cx1)

        inp = out
        out = []
        prev = inp[-1]
        prev_side = side(prev)
        for cur in inp:
            cur_side = side(cur)
            if cur_side >= 0:
                if prev_side < 0:
                    out.append(_line_cross(prev, cur, (cx1, cy1), (cx2, cy2)))
                out.append(cur)
            elif prev_side >= 0:
                out.append(_line_cross(prev, cur, (cx1, cy1), (cx2, cy2)))
            prev, prev_side = cur, cur_side
    return out


def _line_cross(p1: FracPoint, p2: FracPoint, a: FracPoint, b: FracPoint) -> FracPoint:
    x1, y1 = p1
    x2, y2 = p2
    x3, y3 = a
    x4, y4 = b
    den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    # Caller guarantees a strict side change, so the lines are not parallel.
    px = ((x1 * y2 - y1 * x2) * (x3 - x4) - (x1 - x2) * (x3 * y4 - y3 * x4)) / den
    py = ((x1 * y2 - y1 * x2) * (y3 - y4) - (y1 - y2) * (x3 * y4 - y3 * x4)) / den
    return (px, py)


def _signed_fan(poly: Polygon) -> list[tuple[int, list[FracPoint]]]:
    """Fan triangulation with signs such that the signed indicator sums to 1
    inside the polygon and 0 outside (almost everywhere)."""
    verts = poly.vertices
    orient = 1 if poly.signed_area2() > 0 else -1
    tris: list[tuple[int, list[FracPoint]]] = []
    v0 = (Fraction(verts[0].x), Fraction(verts[0].y))
    for i in range(1, len(verts) - 1):
        a = (Fraction(verts[i].x), Fraction(verts[i].y))
        b = (Fraction(verts[i + 1].x), Fraction(verts[i + 1].y))
        t2 = _area2_frac([v0, a, b])
        if t2 == 0:
            continue
        sign = orient * (1 if t2 > 0 else -1)
        tri = [v0, a, b] if t2 > 0 else [v0, b, a]  # normalize CCW
        tris.append((sign, tri))
    return tris


ClipInput = Union[Polygon, Rect]


def _clip_rect_lists(a: ClipInput) -> list[Rect] | None:
    """Rect cover of a rectilinear input, or None for non-rectilinear."""
    if isinstance(a, Rect):
        return [] if a.is_degenerate() else [a]
    if a.is_rectilinear():
        return rectilinear_decompose(a)
    return None


def clip_intersection_area(a: ClipInput, b: ClipInput) -> int:
    """Exact area of the intersection of two simple polygons (or rects).

    Rectilinear inputs take an exact integer rectangle-decomposition path.
    General simple polygons are clipped pairwise over signed triangle fans
    in rational arithmetic; a non-integral result (possible only for
    non-rectilinear inputs) is rounded to the nearest dbu^2.
    """
    ra = _clip_rect_lists(a)
    rb = _clip_rect_lists(b)
    if ra is not None and rb is not None:
        if not ra or not rb:
            return 0
        # Quick bounding-box reject keeps the common disjoint case cheap.
        total = 0
        for r1 in ra:
            for r2 in rb:
                total += rect_intersection_area(r1, r2)
        return total

    pa = a.to_polygon() if isinstance(a, Rect) else a
    pb = b.to_polygon() if isinstance(b, Rect) else b
    fan_a = _signed_fan(pa)
    fan_b = _signed_fan(pb)
    area = Fraction(0)
    for sa, ta in fan_a:
        for sb, tb in fan_b:
            clipped = _clip_convex(ta, tb)
            if len(clipped) >= 3:
                area += sa * sb * abs(_area2_frac(clipped)) / 2
    if area < 0:
        area = Fraction(0)
    return round(area)


def manhattan_rect_distance(a: Rect, b: Rect) -> int:
    """Manhattan gap between two rects; 0 when they touch or overlap."""
    dx = max(a.lo.x - b.hi.x, b.lo.x - a.hi.x, 0)
    dy = max(a.lo.y - b.hi.y, b.lo.y - a.hi.y, 0)
    return dx + dy


def manhattan_rect_point(r: Rect, p: Point) -> int:
    dx = max(r.lo.x - p.x, p.x - r.hi.x, 0)
    dy = max(r.lo.y - p.y, p.y - r.hi.y, 0)
    return dx + dy


def union_area(rects: Sequence[Rect]) -> int:
    """Exact area of the union of axis-aligned rects (sweep over x).

    Degenerate rects contribute nothing.
    """
    events: list[tuple[int, int, int, int]] = []  # (x, +1/-1, y0, y1)
    ys: set[int] = set()
    for r in rects:
        if r.is_degenerate():
            continue
        events.append((r.lo.x, 1, r.lo.y, r.hi.y))
        events.append((r.hi.x, -1, r.lo.y, r.hi.y))
        ys.add(r.lo.y)
        ys.add(r.hi.y)
    if not events:
        return 0
    ylist = sorted(ys)
    yindex = {y: i for i, y in enumerate(ylist)}
    m = len(ylist) - 1

    # Segment tree over y intervals: count[] tracks full-cover additions,
    # covered[] the covered length within each node span.
    size = 1
    while size < m:
        size *= 2
    count = [0] * (2 * size)
    covered = [0] * (2 * size)
    span = [0] * (2 * size)

    def build(node: int, lo: int, hi: int) -> None:
        if lo >= m:
            return
        if hi - lo == 1:
            span[node] = ylist[lo + 1] - ylist[lo] if lo < m else 0
            return
        mid = (lo + hi) // 2
        build(2 * node, lo, mid)
        build(2 * node + 1, mid, hi)
        span[node] = span[2 * node] + span[2 * node + 1]

    build(1, 0, size)

    def update(node: int, lo: int, hi: int, a: int, b: int, delta: int) -> None:
        if b <= lo or hi <= a or lo >= m:
            return
        if a <= lo and hi <= b:
            count[node] += delta
        else:
            mid = (lo + hi) // 2
            update(2 * node, lo, mid, a, b, delta)
            update(2 * node + 1, mid, hi, a, b, delta)
        if count[node] > 0:
            covered[node] = span[node]
        elif hi - lo == 1:
            covered[node] = 0
        else:
            covered[node] = covered[2 * node] + covered[2 * node + 1]

    events.sort(key=lambda e: (e[0], -e[1]))
    area = 0
    prev_x = events[0][0]
    for x, delta, y0, y1 in events:
        if x != prev_x:
            area += (x - prev_x) * covered[1]
            prev_x = x
        update(1, 0, size, yindex[y0], yindex[y1], delta)
    return area
