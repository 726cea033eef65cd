"""The three layout attack-surface metrics.

* trigger_spaces: histogram of maximal 4-connected open placement regions.
* net_blockage: same-layer perimeter probing plus adjacent-layer projection,
  combined 2/3 : 1/3 into an overall fraction per net and design-wide as
  ratio-of-sums.
* route_distance: minimum Manhattan distance from each open region to each
  unblocked critical net, normalized by the design's net-length deviation.

All fractions are exact rationals; floats appear only in the final sigma
normalization, so results are bit-identical regardless of work ordering.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .geom import Point, Rect, rect_intersection
from .layout import OCCUPIED, LayoutDb

INF = float("inf")


class MetricError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Trigger space


@dataclass
class TriggerSpace:
    id: int
    sites: list[tuple[int, int]]  # (col, row)
    size: int
    bbox: Rect
    row_runs: dict[int, list[tuple[int, int]]]  # row -> [(c0, c1)] inclusive


def trigger_spaces(db: LayoutDb) -> tuple[list[TriggerSpace], dict[int, int]]:
    """Maximal 4-connected regions of open (empty or filler) sites via BFS,
    seeded in scanline order."""
    grid = db.grid
    cols, rows = grid.cols, grid.rows
    occ = grid.occupancy
    label = [[-1] * cols for _ in range(rows)]
    regions: list[TriggerSpace] = []

    for r0 in range(rows):
        row0 = occ[r0]
        for c0 in range(cols):
            if row0[c0] == OCCUPIED or label[r0][c0] >= 0:
                continue
            rid = len(regions)
            label[r0][c0] = rid
            queue = deque([(c0, r0)])
            sites: list[tuple[int, int]] = []
            while queue:
                c, r = queue.popleft()
                sites.append((c, r))
                if c > 0 and occ[r][c - 1] != OCCUPIED and label[r][c - 1] < 0:
                    label[r][c - 1] = rid
                    queue.append((c - 1, r))
                if c + 1 < cols and occ[r][c + 1] != OCCUPIED and label[r][c + 1] < 0:
                    label[r][c + 1] = rid
                    queue.append((c + 1, r))
                if r > 0 and occ[r - 1][c] != OCCUPIED and label[r - 1][c] < 0:
                    label[r - 1][c] = rid
                    queue.append((c, r - 1))
                if r + 1 < rows and occ[r + 1][c] != OCCUPIED and label[r + 1][c] < 0:
                    label[r + 1][c] = rid
                    queue.append((c, r + 1))
            regions.append(_make_region(rid, sites, grid))

    histogram: dict[int, int] = {}
    for reg in regions:
        histogram[reg.size] = histogram.get(reg.size, 0) + 1
    return regions, histogram


def _make_region(rid: int, sites: list[tuple[int, int]], grid) -> TriggerSpace:
    by_row: dict[int, list[int]] = {}
    for c, r in sites:
        by_row.setdefault(r, []).append(c)
    row_runs: dict[int, list[tuple[int, int]]] = {}
    for r, cs in by_row.items():
        cs.sort()
        runs = []
        start = prev = cs[0]
        for c in cs[1:]:
            if c == prev + 1:
                prev = c
                continue
            runs.append((start, prev))
            start = prev = c
        runs.append((start, prev))
        row_runs[r] = runs
    min_c = min(c for c, _ in sites)
    max_c = max(c for c, _ in sites)
    min_r = min(r for _, r in sites)
    max_r = max(r for _, r in sites)
    bbox = Rect(grid.site_rect(min_c, min_r).lo, grid.site_rect(max_c, max_r).hi)
    return TriggerSpace(id=rid, sites=sites, size=len(sites), bbox=bbox,
                        row_runs=row_runs)


# ---------------------------------------------------------------------------
# Net blockage


@dataclass(frozen=True)
class BlockageConfig:
    granularity: int = 1
    extension: int | None = None  # None: one wire-pitch of the rect's layer

    def __post_init__(self) -> None:
        if self.granularity < 1:
            raise MetricError("granularity must be >= 1 dbu")
        if self.extension is not None and self.extension < 1:
            raise MetricError("extension distance must be >= 1 dbu")


@dataclass(frozen=True)
class OpenRun:
    """Arithmetic progression of unblocked perimeter samples on one side."""

    layer: str
    horizontal: bool
    fixed: int  # y for horizontal runs, x for vertical
    start: int
    stop: int  # inclusive, >= start
    step: int

    def points(self) -> list[Point]:
        coords = range(self.start, self.stop + 1, self.step)
        if self.horizontal:
            return [Point(x, self.fixed) for x in coords]
        return [Point(self.fixed, y) for y in coords]


@dataclass
class NetBlockage:
    net: str
    same_layer: Fraction
    adjacent_layer: Fraction
    overall: Fraction
    perimeter: int
    perimeter_blocked: int
    area: int
    area_blocked: int
    open_runs: list[OpenRun] = field(default_factory=list)
    open_patch_points: list[tuple[str, Point]] = field(default_factory=list)

    @property
    def open_points(self) -> list[tuple[str, Point]]:
        pts = [(run.layer, p) for run in self.open_runs for p in run.points()]
        pts.extend(self.open_patch_points)
        return pts


@dataclass
class DesignBlockage:
    same_layer: Fraction
    adjacent_layer: Fraction
    overall: Fraction
    net_count: int


def net_blockage(db: LayoutDb, cfg: BlockageConfig = BlockageConfig()
                 ) -> tuple[list[NetBlockage], DesignBlockage, list[str]]:
    """Blockage fractions for every critical net present in the layout.

    Design-wide values are ratio-of-sums: blocked perimeter (or area) summed
    over nets divided by total perimeter (or area), not a mean of per-net
    ratios.
    """
    warnings: list[str] = []
    per_net: list[NetBlockage] = []
    routing = {l.name: l for l in db.lef.layers if l.kind == "routing"}

    for name in db.critical_present:
        rects = [(layer, r) for layer, r in db.net_rects(name)
                 if layer in routing]
        if not rects or all(r.is_degenerate() for _, r in rects):
            warnings.append(f"critical net {name} has no routing-layer "
                            "geometry; excluded from blockage")
            continue
        per_net.append(_blockage_for_net(db, cfg, name, rects, routing))

    if not per_net:
        warnings.append("no critical nets with geometry; design blockage is 0")
        design = DesignBlockage(Fraction(0), Fraction(0), Fraction(0), 0)
        return per_net, design, warnings

    sum_perim = sum(nb.perimeter for nb in per_net)
    sum_perim_blocked = sum(nb.perimeter_blocked for nb in per_net)
    sum_area = sum(nb.area for nb in per_net)
    sum_area_blocked = sum(nb.area_blocked for nb in per_net)
    b_same = Fraction(sum_perim_blocked, sum_perim) if sum_perim else Fraction(0)
    b_adj = Fraction(sum_area_blocked, sum_area) if sum_area else Fraction(0)
    design = DesignBlockage(
        same_layer=b_same, adjacent_layer=b_adj,
        overall=Fraction(2, 3) * b_same + Fraction(1, 3) * b_adj,
        net_count=len(per_net))
    return per_net, design, warnings


def _blockage_for_net(db: LayoutDb, cfg: BlockageConfig, name: str,
                      rects: list[tuple[str, Rect]],
                      routing: dict) -> NetBlockage:
    g = cfg.granularity
    perimeter = perimeter_blocked = 0
    open_runs: list[OpenRun] = []
    area_total = area_blocked = 0
    patch_points: list[tuple[str, Point]] = []

    for layer_name, rect in rects:
        if rect.is_degenerate():
            continue
        layer = routing[layer_name]
        d = cfg.extension if cfg.extension is not None else layer.pitch
        if d is None:
            raise MetricError(f"layer {layer_name} has no PITCH and no "
                              "extension override was given")
        p_total, p_blocked, runs = _sample_perimeter(db, name, layer, rect, d, g)
        perimeter += p_total
        perimeter_blocked += p_blocked
        open_runs.extend(runs)

        below, above = db.adjacent_layers(layer_name)
        for adj in (below, above):
            if adj is None:
                continue
            area_total += rect.area
            blocked, patches = _project_to_layer(db, name, layer_name, adj, rect)
            area_blocked += blocked
            patch_points.extend((adj, p) for p in patches)

    same = Fraction(perimeter_blocked, perimeter) if perimeter else Fraction(0)
    adjacent = Fraction(area_blocked, area_total) if area_total else Fraction(0)
    overall = Fraction(2, 3) * same + Fraction(1, 3) * adjacent
    if overall == 1:
        open_runs = []
        patch_points = []
    return NetBlockage(net=name, same_layer=same, adjacent_layer=adjacent,
                       overall=overall, perimeter=perimeter,
                       perimeter_blocked=perimeter_blocked, area=area_total,
                       area_blocked=area_blocked, open_runs=open_runs,
                       open_patch_points=patch_points)


def _sample_perimeter(db: LayoutDb, net: str, layer, rect: Rect, d: int,
                      g: int) -> tuple[int, int, list[OpenRun]]:
    """Probe the offset ring around one net rectangle.

    Returns (perimeter length, blocked length, open runs). Samples step `g`
    along the ring; each covers up to `g` dbu of arc. Open stretches shorter
    than min_width + min_spacing are reclassified as blocked: nothing can be
    routed through them.
    """
    ring = rect.expanded(d)
    w, h = ring.width, ring.height
    perim = 2 * (w + h)
    # sides: (horizontal?, fixed coord, start, direction, length)
    sides = (
        (True, ring.lo.y, ring.lo.x, 1, w),    # south, walking east
        (False, ring.hi.x, ring.lo.y, 1, h),   # east, walking north
        (True, ring.hi.y, ring.hi.x, -1, w),   # north, walking west
        (False, ring.lo.x, ring.hi.y, -1, h),  # west, walking south
    )
    samples: list[tuple[Point, int, int, bool]] = []  # point, arc, side, blocked
    pos = 0
    index = db.shapes
    while pos < perim:
        arc = min(g, perim - pos)
        rel = pos
        for si, (horiz, fixed, start, direction, length) in enumerate(sides):
            if rel < length:
                coord = start + direction * rel
                p = Point(coord, fixed) if horiz else Point(fixed, coord)
                blocked = index.point_blocked(layer.name, p, exclude_owner=net)
                samples.append((p, arc, si, blocked))
                break
            rel -= length
        pos += g

    # Circular open runs below the routable threshold become blocked.
    threshold = None
    if layer.min_width is not None and layer.min_spacing is not None:
        threshold = layer.min_width + layer.min_spacing
    flags = [blocked for _, _, _, blocked in samples]
    n = len(samples)
    if threshold is not None and any(flags) and not all(flags):
        start_idx = flags.index(True)
        i = 0
        while i < n:
            idx = (start_idx + i) % n
            if flags[idx]:
                i += 1
                continue
            j = i
            run_len = 0
            while j < n and not flags[(start_idx + j) % n]:
                run_len += samples[(start_idx + j) % n][1]
                j += 1
            if run_len < threshold:
                for k in range(i, j):
                    flags[(start_idx + k) % n] = True
            i = j
    elif threshold is not None and not any(flags):
        if perim < threshold:
            flags = [True] * n

    blocked_len = sum(arc for (_, arc, _, blk), f in zip(samples, flags) if f)

    runs: list[OpenRun] = []
    run_pts: list[Point] = []
    run_side = -1

    def close_run() -> None:
        if not run_pts:
            return
        horiz = sides[run_side][0]
        coords = sorted((p.x if horiz else p.y) for p in run_pts)
        fixed = run_pts[0].y if horiz else run_pts[0].x
        step = g if len(coords) == 1 else coords[1] - coords[0]
        runs.append(OpenRun(layer=layer.name, horizontal=horiz, fixed=fixed,
                            start=coords[0], stop=coords[-1], step=step))

    for (p, arc, si, _), f in zip(samples, flags):
        if f:
            close_run()
            run_pts, run_side = [], -1
            continue
        if run_side != si:
            close_run()
            run_pts, run_side = [p], si
        else:
            run_pts.append(p)
    close_run()
    return perim, blocked_len, runs


def _project_to_layer(db: LayoutDb, net: str, from_layer: str, adj: str,
                      footprint: Rect) -> tuple[int, list[Point]]:
    """Adjacent-layer blockage of one footprint rect.

    Blocked area is the union of foreign shapes clipped to the footprint;
    residual free patches that cannot accommodate the smallest via cut
    between the two layers are reclassified blocked. Returns blocked area
    and one attachment point per surviving patch.
    """
    obstacles: list[Rect] = []
    for shape in db.shapes.query_rect(adj, footprint):
        if shape.owner == net:
            continue
        clipped = rect_intersection(shape.rect, footprint)
        if clipped is not None and not clipped.is_degenerate():
            obstacles.append(clipped)

    fit: tuple[int, int] | None = None
    cut = db.lef.cut_layer_between(from_layer, adj)
    if cut is not None:
        rule = db.lef.via_rules.get(cut)
        if rule is not None:
            fit = (rule.width, rule.height)

    blocked, patches = _free_patch_analysis(footprint, obstacles, fit)
    return blocked, patches


def _compress(values: set[int]) -> list[int]:
    return sorted(values)


def _cover_grid(domain: Rect, obstacles: list[Rect]
                ) -> tuple[list[int], list[int], list[list[bool]]]:
    xs = {domain.lo.x, domain.hi.x}
    ys = {domain.lo.y, domain.hi.y}
    for r in obstacles:
        xs.add(r.lo.x)
        xs.add(r.hi.x)
        ys.add(r.lo.y)
        ys.add(r.hi.y)
    xl = _compress(xs)
    yl = _compress(ys)
    covered = [[False] * (len(xl) - 1) for _ in range(len(yl) - 1)]
    xi = {x: i for i, x in enumerate(xl)}
    yi = {y: i for i, y in enumerate(yl)}
    for r in obstacles:
        for j in range(yi[r.lo.y], yi[r.hi.y]):
            row = covered[j]
            for i in range(xi[r.lo.x], xi[r.hi.x]):
                row[i] = True
    return xl, yl, covered


def _subtract_open_box(piece: tuple[int, int, int, int],
                       hole: tuple[int, int, int, int]
                       ) -> list[tuple[int, int, int, int]]:
    """Closed rect minus an open box, as up to four closed (possibly
    degenerate) rects. Degenerate pieces still carry valid lattice points."""
    px0, py0, px1, py1 = piece
    hx0, hy0, hx1, hy1 = hole
    if hx0 >= px1 and hx1 <= px0:
        pass
    if hx0 >= px1 or hx1 <= px0 or hy0 >= py1 or hy1 <= py0:
        return [piece]
    out = []
    if hx0 >= px0:
        out.append((px0, py0, hx0, py1))
    if hx1 <= px1:
        out.append((hx1, py0, px1, py1))
    mx0, mx1 = max(px0, hx0), min(px1, hx1)
    if hy0 >= py0:
        out.append((mx0, py0, mx1, hy0))
    if hy1 <= py1:
        out.append((mx0, hy1, mx1, py1))
    return out


def _free_patch_analysis(footprint: Rect, obstacles: list[Rect],
                         fit: tuple[int, int] | None
                         ) -> tuple[int, list[Point]]:
    if footprint.is_degenerate():
        return 0, []
    xl, yl, covered = _cover_grid(footprint, obstacles)
    ncx, ncy = len(xl) - 1, len(yl) - 1

    # Free-space components over compressed cells (4-connected); remember
    # each component's largest cell as a fallback attachment point.
    comp = [[-1] * ncx for _ in range(ncy)]
    comp_areas: list[int] = []
    comp_big_cell: list[Rect] = []
    for j0 in range(ncy):
        for i0 in range(ncx):
            if covered[j0][i0] or comp[j0][i0] >= 0:
                continue
            cid = len(comp_areas)
            area = 0
            big: Rect | None = None
            queue = deque([(i0, j0)])
            comp[j0][i0] = cid
            while queue:
                i, j = queue.popleft()
                cell = Rect(Point(xl[i], yl[j]), Point(xl[i + 1], yl[j + 1]))
                area += cell.area
                if big is None or cell.area > big.area:
                    big = cell
                for ni, nj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                    if 0 <= ni < ncx and 0 <= nj < ncy \
                            and not covered[nj][ni] and comp[nj][ni] < 0:
                        comp[nj][ni] = cid
                        queue.append((ni, nj))
            comp_areas.append(area)
            comp_big_cell.append(big)

    free_total = sum(comp_areas)
    union_blocked = footprint.area - free_total
    if not comp_areas:
        return footprint.area, []

    if fit is None:
        # No via rule for this layer pair: no reclassification.
        patches = [Point((c.lo.x + c.hi.x) // 2, (c.lo.y + c.hi.y) // 2)
                   for c in comp_big_cell]
        return union_blocked, patches

    # Valid lower-left via positions: the closed position domain minus the
    # open dilation of each obstacle. Degenerate (line/point) domains are
    # real placements, e.g. a via exactly as wide as the wire.
    fw, fh = fit
    hi_x = footprint.hi.x - fw
    hi_y = footprint.hi.y - fh
    fits: dict[int, tuple[int, Point]] = {}  # cid -> (best piece area, point)
    if hi_x >= footprint.lo.x and hi_y >= footprint.lo.y:
        pieces = [(footprint.lo.x, footprint.lo.y, hi_x, hi_y)]
        for r in sorted(obstacles, key=lambda r: (r.lo, r.hi)):
            hole = (r.lo.x - fw, r.lo.y - fh, r.hi.x, r.hi.y)
            nxt: list[tuple[int, int, int, int]] = []
            for piece in pieces:
                nxt.extend(_subtract_open_box(piece, hole))
            pieces = [p for p in nxt if p[0] <= p[2] and p[1] <= p[3]]
        for x0, y0, x1, y1 in pieces:
            p = Point((x0 + x1) // 2, (y0 + y1) // 2)
            # The via interior's center locates the free component; doubled
            # coordinates keep the lookup integer-exact.
            ci = _locate(xl, 2 * p.x + fw)
            cj = _locate(yl, 2 * p.y + fh)
            cid = comp[cj][ci]
            if cid < 0:
                continue
            piece_area = (x1 - x0) * (y1 - y0)
            best = fits.get(cid)
            point = Point(p.x + fw // 2, p.y + fh // 2)
            if best is None or piece_area > best[0]:
                fits[cid] = (piece_area, point)

    blocked = union_blocked
    patches: list[Point] = []
    for cid, area in enumerate(comp_areas):
        if cid in fits:
            patches.append(fits[cid][1])
        else:
            blocked += area
    return blocked, patches


def _locate(coords: list[int], doubled: int) -> int:
    """Index i with coords[i] <= doubled/2 < coords[i+1]."""
    lo, hi = 0, len(coords) - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if 2 * coords[mid] <= doubled:
            lo = mid
        else:
            hi = mid - 1
    return lo


# ---------------------------------------------------------------------------
# Net length statistics


@dataclass
class NetLengthStats:
    mean: Fraction
    variance: Fraction
    stddev: float
    count: int
    lengths: dict[str, int]


def net_length_stats(db: LayoutDb, include_special: bool = False) -> NetLengthStats:
    """Population mean/stddev of routed net centerline lengths."""
    lengths: dict[str, int] = {}
    for name, geo in db.nets.items():
        if geo.special and not include_special:
            continue
        if geo.length > 0:
            lengths[name] = geo.length
    n = len(lengths)
    if n < 2:
        raise MetricError(f"net-length distribution needs >= 2 routed nets, "
                          f"have {n}")
    vals = list(lengths.values())
    mean = Fraction(sum(vals), n)
    variance = sum((Fraction(v) - mean) ** 2 for v in vals) / n
    return NetLengthStats(mean=mean, variance=variance,
                          stddev=math.sqrt(variance), count=n,
                          lengths=lengths)


# ---------------------------------------------------------------------------
# Route distance


@dataclass(frozen=True)
class RouteEntry:
    net: str
    region_id: int
    manhattan: int
    sigma: float  # INF sentinel when stddev is 0 and manhattan != mean


@dataclass
class RouteDistanceMatrix:
    entries: list[RouteEntry]
    size_bin_edges: list[int]
    sigma_bin_edges: list[float]
    # (size_bin_index, sigma_bin_index) -> column-normalized fraction
    heatmap: dict[tuple[int, int], float]
    column_counts: dict[int, int]

    def size_bin_label(self, i: int) -> str:
        edges = self.size_bin_edges
        if i + 1 < len(edges):
            return f"{edges[i]}-{edges[i + 1] - 1}"
        return f">={edges[i]}"

    def sigma_bin_label(self, i: int) -> str:
        edges = self.sigma_bin_edges
        if i == 0:
            return f"<{edges[0]}"
        if i == len(edges):
            return f">={edges[-1]}"
        return f"{edges[i - 1]}-{edges[i]}"


def default_size_bins(max_size: int) -> list[int]:
    edges = [1]
    while edges[-1] * 2 <= max_size:
        edges.append(edges[-1] * 2)
    return edges


DEFAULT_SIGMA_BINS = [0.5, 1.0, 2.0, 3.0]


def _sigma_value(manhattan: int, stats: NetLengthStats) -> float:
    if stats.variance == 0:
        return 0.0 if Fraction(manhattan) == stats.mean else INF
    return float((manhattan - stats.mean) / Fraction(stats.stddev))


def _gap(lo: int, hi: int, a: int, b: int) -> int:
    """Gap between intervals [lo, hi] and [a, b]."""
    return max(lo - b, a - hi, 0)


def _run_gap_x(run: OpenRun, lo: int, hi: int) -> int:
    """Gap between [lo, hi] and the run's sample coordinates on its axis."""
    if run.start > hi:
        return run.start - hi
    if run.stop < lo:
        return lo - run.stop
    # Interval overlaps the run span; the nearest on-step sample may still
    # miss [lo, hi] when step > 1.
    first = run.start + ((lo - run.start) + run.step - 1) // run.step * run.step
    first = max(first, run.start)  # smallest sample >= lo (or the first one)
    if first <= min(hi, run.stop):
        return 0
    cands = []
    if first <= run.stop:
        cands.append(first - hi)
    prev = first - run.step
    if prev >= run.start:
        cands.append(lo - prev)
    return min(cands)


def _region_to_items(region: TriggerSpace, grid,
                     runs: list[OpenRun],
                     points: list[tuple[str, Point]]) -> int:
    """Min Manhattan distance from any site rect of `region` to any open
    sample point; exact, via per-row interval arithmetic."""
    best = None
    sw, sh = grid.site_w, grid.site_h
    ox, oy = grid.origin.x, grid.origin.y
    for row, col_runs in region.row_runs.items():
        y0 = oy + row * sh
        y1 = y0 + sh
        for c0, c1 in col_runs:
            x0 = ox + c0 * sw
            x1 = ox + (c1 + 1) * sw
            for run in runs:
                if run.horizontal:
                    dy = _gap(y0, y1, run.fixed, run.fixed)
                    if best is not None and dy >= best:
                        continue
                    dx = _run_gap_x(run, x0, x1)
                else:
                    dy = _run_gap_x(run, y0, y1)
                    if best is not None and dy >= best:
                        continue
                    dx = _gap(x0, x1, run.fixed, run.fixed)
                d = dx + dy
                if best is None or d < best:
                    best = d
            for _, p in points:
                d = _gap(x0, x1, p.x, p.x) + _gap(y0, y1, p.y, p.y)
                if best is None or d < best:
                    best = d
    assert best is not None
    return best


def route_distance(db: LayoutDb, regions: list[TriggerSpace],
                   blockage: list[NetBlockage], stats: NetLengthStats,
                   size_bin_edges: list[int] | None = None,
                   sigma_bin_edges: list[float] | None = None
                   ) -> RouteDistanceMatrix:
    """Minimum distances between unblocked critical nets and open regions.

    Only nets below 100% overall blockage enter the matrix. Each heatmap
    column (trigger-size bin) is normalized to a histogram over sigma bins.
    """
    unblocked = [nb for nb in blockage if nb.overall < 1]
    entries: list[RouteEntry] = []
    for nb in sorted(unblocked, key=lambda nb: nb.net):
        runs = nb.open_runs
        points = nb.open_patch_points
        if not runs and not points:
            continue
        for region in regions:
            manhattan = _region_to_items(region, db.grid, runs, points)
            entries.append(RouteEntry(net=nb.net, region_id=region.id,
                                      manhattan=manhattan,
                                      sigma=_sigma_value(manhattan, stats)))

    if size_bin_edges is None:
        max_size = max((r.size for r in regions), default=1)
        size_bin_edges = default_size_bins(max_size)
    if sigma_bin_edges is None:
        sigma_bin_edges = list(DEFAULT_SIGMA_BINS)

    region_size = {r.id: r.size for r in regions}
    counts: dict[tuple[int, int], int] = {}
    column_counts: dict[int, int] = {}
    for e in entries:
        sb = _bin_index_size(region_size[e.region_id], size_bin_edges)
        gb = _bin_index_sigma(e.sigma, sigma_bin_edges)
        counts[(sb, gb)] = counts.get((sb, gb), 0) + 1
        column_counts[sb] = column_counts.get(sb, 0) + 1
    heatmap = {key: count / column_counts[key[0]]
               for key, count in counts.items()}
    return RouteDistanceMatrix(entries=entries, size_bin_edges=size_bin_edges,
                               sigma_bin_edges=sigma_bin_edges,
                               heatmap=heatmap, column_counts=column_counts)


def _bin_index_size(size: int, edges: list[int]) -> int:
    idx = 0
    for i, edge in enumerate(edges):
        if size >= edge:
            idx = i
    return idx


def _bin_index_sigma(sigma: float, edges: list[float]) -> int:
    for i, edge in enumerate(edges):
        if sigma < edge:
            return i
    return len(edges)
