"""Independent brute-force oracles used by the unit and acceptance tests.

Everything here deliberately avoids the library's own algorithms: scanline
parity fill instead of per-point ray casting, recursive flood fill instead
of BFS labeling, exhaustive enumeration instead of closed forms.
"""

from __future__ import annotations

import sys
from random import Random

from layoutsurf.geom import Point, Polygon, Rect


def random_rectilinear_polygon(rng: Random, cols: int = 8, xstep: int = 16,
                               span: int = 128) -> Polygon:
    """X-monotone rectilinear polygon with even coordinates in [0, span].

    Adjacent column intervals strictly overlap so the outline never touches
    itself.
    """
    xs = [i * xstep for i in range(cols + 1)]
    bottom = [2 * rng.randint(0, span // 2 - 1)]
    top = [2 * rng.randint(bottom[0] // 2 + 1, span // 2)]
    for i in range(1, cols):
        b = 2 * rng.randint(0, (top[i - 1] - 2) // 2)
        t = 2 * rng.randint(max(bottom[i - 1], b) // 2 + 1, span // 2)
        bottom.append(b)
        top.append(t)
    pts: list[Point] = [Point(xs[0], bottom[0]), Point(xs[0], top[0])]
    for i in range(cols):
        pts.append(Point(xs[i + 1], top[i]))
        if i + 1 < cols and top[i + 1] != top[i]:
            pts.append(Point(xs[i + 1], top[i + 1]))
    pts.append(Point(xs[cols], bottom[cols - 1]))
    for i in range(cols - 1, 0, -1):
        if bottom[i - 1] != bottom[i]:
            pts.append(Point(xs[i], bottom[i]))
            pts.append(Point(xs[i], bottom[i - 1]))
    # Drop consecutive duplicates introduced by equal envelope steps.
    dedup: list[Point] = []
    for p in pts:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    if dedup[0] == dedup[-1]:
        dedup.pop()
    return Polygon(dedup)


def scanline_cells(poly: Polygon, grid: int) -> set[tuple[int, int]]:
    """Cells of a grid x grid raster covered by an even-coordinate polygon.

    Cell (i, j) spans [2i, 2i+2] x [2j, 2j+2]; parity fill along the row
    through its center. Edges sit on even lines, so each cell is uniformly
    in or out.
    """
    verticals = []
    for a, b in poly.edges():
        if a.x == b.x and a.y != b.y:
            verticals.append((a.x, min(a.y, b.y), max(a.y, b.y)))
    cells = set()
    for j in range(grid):
        y = 2 * j + 1
        xs = sorted(x for x, lo, hi in verticals if lo < y < hi)
        for t in range(0, len(xs) - 1, 2):
            for i in range(xs[t] // 2, xs[t + 1] // 2):
                cells.add((i, j))
    return cells


def exhaustive_rect_points(r: Rect) -> list[Point]:
    return [Point(x, y)
            for x in range(r.lo.x, r.hi.x + 1)
            for y in range(r.lo.y, r.hi.y + 1)]


def boundary_rect_points(r: Rect) -> list[Point]:
    pts = []
    for x in range(r.lo.x, r.hi.x + 1):
        pts.append(Point(x, r.lo.y))
        pts.append(Point(x, r.hi.y))
    for y in range(r.lo.y + 1, r.hi.y):
        pts.append(Point(r.lo.x, y))
        pts.append(Point(r.hi.x, y))
    return pts


def min_manhattan_over_points(pa: list[Point], pb: list[Point]) -> int:
    return min(abs(a.x - b.x) + abs(a.y - b.y) for a in pa for b in pb)


def recursive_flood_regions(open_sites: set[tuple[int, int]]) -> list[set[tuple[int, int]]]:
    """Recursive flood fill decomposition of open grid sites (4-connected)."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(open_sites) + 10000))
    seen: set[tuple[int, int]] = set()
    regions = []

    def fill(c: int, r: int, region: set[tuple[int, int]]) -> None:
        if (c, r) in seen or (c, r) not in open_sites:
            return
        seen.add((c, r))
        region.add((c, r))
        fill(c + 1, r, region)
        fill(c - 1, r, region)
        fill(c, r + 1, region)
        fill(c, r - 1, region)

    for site in sorted(open_sites):
        if site not in seen:
            region: set[tuple[int, int]] = set()
            fill(site[0], site[1], region)
            regions.append(region)
    return regions
