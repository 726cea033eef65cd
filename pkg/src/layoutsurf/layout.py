"""Unified layout database: placement-site occupancy, per-layer shape index,
net geometry, and critical-net marking.

Net geometry comes from DEF routed wiring (segments expanded to rectangles,
via shapes placed from their LEF definitions); GDSII participates only as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .gdsii import FlatGeometry
from .geom import Point, Rect, rectilinear_decompose, union_area
from .lefdef import FloorplanDef, LayerMap, LefData, RoutedNet

EMPTY = 0
FILLER = 1
OCCUPIED = 2

DEFAULT_FILLER_PREFIXES = ("FILL", "DECAP")


class LayoutError(ValueError):
    pass


def transform_macro_point(p: Point, orient: str, w: int, h: int) -> Point:
    """Map a macro-local point by a DEF orientation; the result lies in the
    oriented bounding box anchored at (0, 0)."""
    x, y = p.x, p.y
    if orient == "N":
        return Point(x, y)
    if orient == "S":
        return Point(w - x, h - y)
    if orient == "W":
        return Point(h - y, x)
    if orient == "E":
        return Point(y, w - x)
    if orient == "FN":
        return Point(w - x, y)
    if orient == "FS":
        return Point(x, h - y)
    if orient == "FW":
        return Point(y, x)
    if orient == "FE":
        return Point(h - y, w - x)
    raise LayoutError(f"unknown orientation {orient}")


def oriented_dims(orient: str, w: int, h: int) -> tuple[int, int]:
    return (h, w) if orient in ("W", "E", "FW", "FE") else (w, h)


def transform_macro_rect(rect: Rect, orient: str, w: int, h: int,
                         location: Point) -> Rect:
    a = transform_macro_point(rect.lo, orient, w, h)
    b = transform_macro_point(rect.hi, orient, w, h)
    return Rect.from_coords(a.x + location.x, a.y + location.y,
                            b.x + location.x, b.y + location.y)


@dataclass
class PlacementGrid:
    cols: int
    rows: int
    site_w: int
    site_h: int
    origin: Point
    occupancy: list[bytearray]  # [row][col]

    def state(self, col: int, row: int) -> int:
        return self.occupancy[row][col]

    def site_rect(self, col: int, row: int) -> Rect:
        x = self.origin.x + col * self.site_w
        y = self.origin.y + row * self.site_h
        return Rect(Point(x, y), Point(x + self.site_w, y + self.site_h))

    def counts(self) -> tuple[int, int, int]:
        empty = filler = occupied = 0
        for row in self.occupancy:
            empty += row.count(EMPTY)
            filler += row.count(FILLER)
            occupied += row.count(OCCUPIED)
        return empty, filler, occupied

    def is_open(self, col: int, row: int) -> bool:
        return self.occupancy[row][col] != OCCUPIED


@dataclass(frozen=True)
class Shape:
    layer: str
    rect: Rect
    owner: str  # net name, or "inst:<name>" for unconnected cell geometry


class ShapeIndex:
    """Uniform-bucket spatial index over rectangles, per layer."""

    def __init__(self, shapes: list[Shape], bucket: int = 4096):
        self.shapes = shapes
        self.bucket = bucket
        self._grid: dict[tuple[str, int, int], list[int]] = {}
        for idx, shape in enumerate(shapes):
            r = shape.rect
            for bx in range(r.lo.x // bucket, r.hi.x // bucket + 1):
                for by in range(r.lo.y // bucket, r.hi.y // bucket + 1):
                    self._grid.setdefault((shape.layer, bx, by), []).append(idx)

    def candidates_at(self, layer: str, p: Point) -> list[int]:
        return self._grid.get((layer, p.x // self.bucket, p.y // self.bucket), [])

    def point_blocked(self, layer: str, p: Point, exclude_owner: str) -> bool:
        for idx in self.candidates_at(layer, p):
            s = self.shapes[idx]
            if s.owner != exclude_owner and s.rect.contains(p):
                return True
        return False

    def query_rect(self, layer: str, rect: Rect) -> list[Shape]:
        out = []
        seen: set[int] = set()
        b = self.bucket
        for bx in range(rect.lo.x // b, rect.hi.x // b + 1):
            for by in range(rect.lo.y // b, rect.hi.y // b + 1):
                for idx in self._grid.get((layer, bx, by), []):
                    if idx in seen:
                        continue
                    seen.add(idx)
                    s = self.shapes[idx]
                    if s.rect.intersects(rect):
                        out.append(s)
        return out


@dataclass
class NetGeometry:
    name: str
    rects: list[tuple[str, Rect]]  # (layer, rect) from segments and vias
    length: int
    special: bool = False


@dataclass
class LayoutDb:
    lef: LefData
    floorplan: FloorplanDef
    grid: PlacementGrid
    shapes: ShapeIndex
    nets: dict[str, NetGeometry]
    critical: object  # netlist.CriticalSet
    critical_present: list[str]
    unmatched: list[str]
    warnings: list[str] = field(default_factory=list)

    def adjacent_layers(self, layer: str) -> tuple[str | None, str | None]:
        """Nearest routing/masterslice layer below and above, skipping cuts."""
        order = [l for l in sorted(self.lef.layers, key=lambda l: l.stack_index)
                 if l.kind in ("routing", "masterslice")]
        names = [l.name for l in order]
        if layer not in names:
            return (None, None)
        i = names.index(layer)
        below = names[i - 1] if i > 0 else None
        above = names[i + 1] if i + 1 < len(names) else None
        return (below, above)

    def net_rects(self, name: str) -> list[tuple[str, Rect]]:
        geo = self.nets.get(name)
        return geo.rects if geo else []


def _segment_rect(seg) -> Rect:
    if seg.width % 2:
        raise LayoutError(f"segment width {seg.width} on {seg.layer} is odd; "
                          "cannot expand to integer half-widths")
    half = seg.width // 2
    if seg.p1.y == seg.p2.y:
        return Rect(Point(min(seg.p1.x, seg.p2.x), seg.p1.y - half),
                    Point(max(seg.p1.x, seg.p2.x), seg.p1.y + half))
    return Rect(Point(seg.p1.x - half, min(seg.p1.y, seg.p2.y)),
                Point(seg.p1.x + half, max(seg.p1.y, seg.p2.y)))


def build_layout(lef: LefData, fp: FloorplanDef, critical,
                 filler_prefixes: tuple[str, ...] = DEFAULT_FILLER_PREFIXES
                 ) -> LayoutDb:
    """Fuse parsed inputs into the queryable LayoutDb.

    Sites covered by macros whose name starts with a filler prefix are
    `filler` (open to an attacker); other covered sites are `occupied`.
    """
    warnings: list[str] = []
    grid = _build_grid(lef, fp, filler_prefixes, warnings)
    shapes, nets = _materialize_shapes(lef, fp, warnings)

    members = sorted(critical.members) if critical else []
    present = [n for n in members if n in nets and not nets[n].special]
    unmatched = [n for n in members if n not in nets or nets[n].special]
    for name in unmatched:
        warnings.append(f"critical net {name} has no DEF routing")

    db = LayoutDb(lef=lef, floorplan=fp, grid=grid, shapes=ShapeIndex(shapes),
                  nets=nets, critical=critical, critical_present=present,
                  unmatched=unmatched, warnings=warnings)
    for name in present:
        for layer, rect in db.net_rects(name):
            if not (fp.die_area.contains(rect.lo) and fp.die_area.contains(rect.hi)):
                warnings.append(f"critical net {name} shape on {layer} "
                                "extends outside the die area")
    return db


def _build_grid(lef: LefData, fp: FloorplanDef,
                filler_prefixes: tuple[str, ...],
                warnings: list[str]) -> PlacementGrid:
    if not fp.rows:
        raise LayoutError("DEF has no placement rows")
    rows = sorted(fp.rows, key=lambda r: r.origin.y)
    site = lef.sites.get(rows[0].site)
    if site is None:
        raise LayoutError(f"row site {rows[0].site} not in LEF")
    base = rows[0].origin
    for i, row in enumerate(rows):
        if row.site != rows[0].site or row.count != rows[0].count:
            raise LayoutError("placement rows are not uniform")
        if row.origin.x != base.x or row.origin.y != base.y + i * site.height:
            raise LayoutError(f"row {row.name} is not site-aligned with row 0")
        if row.step != site.width:
            raise LayoutError(f"row {row.name} step {row.step} differs from "
                              f"site width {site.width}")
    cols = rows[0].count
    grid = PlacementGrid(cols=cols, rows=len(rows), site_w=site.width,
                         site_h=site.height, origin=base,
                         occupancy=[bytearray(cols) for _ in rows])

    owner: dict[tuple[int, int], str] = {}
    for comp in sorted(fp.components, key=lambda c: c.name):
        macro = lef.macros[comp.macro]
        ow, oh = oriented_dims(comp.orient, macro.width, macro.height)
        dx = comp.location.x - base.x
        dy = comp.location.y - base.y
        if dx % site.width or dy % site.height:
            raise LayoutError(f"component {comp.name} at {comp.location} is "
                              "off the site grid")
        if ow % site.width or oh % site.height:
            raise LayoutError(f"component {comp.name} footprint {ow}x{oh} is "
                              "not a whole number of sites")
        col0, row0 = dx // site.width, dy // site.height
        span_c, span_r = ow // site.width, oh // site.height
        if col0 < 0 or row0 < 0 or col0 + span_c > cols or row0 + span_r > len(rows):
            raise LayoutError(f"component {comp.name} extends outside the grid")
        is_filler = any(comp.macro.startswith(p) for p in filler_prefixes)
        state = FILLER if is_filler else OCCUPIED
        for r in range(row0, row0 + span_r):
            for c in range(col0, col0 + span_c):
                prev = grid.occupancy[r][c]
                if prev == OCCUPIED and not is_filler:
                    raise LayoutError(
                        f"components {owner[(c, r)]} and {comp.name} overlap "
                        f"at site ({c}, {r})")
                grid.occupancy[r][c] = max(prev, state)
                if not is_filler:
                    owner[(c, r)] = comp.name
    return grid


def _materialize_shapes(lef: LefData, fp: FloorplanDef, warnings: list[str]
                        ) -> tuple[list[Shape], dict[str, NetGeometry]]:
    shapes: list[Shape] = []
    nets: dict[str, NetGeometry] = {}
    via_defs = {v.name: v for v in lef.vias}

    def add_net(net: RoutedNet, special: bool) -> None:
        rects: list[tuple[str, Rect]] = []
        for seg in net.segments:
            rects.append((seg.layer, _segment_rect(seg)))
        for via in net.vias:
            vdef = via_defs[via.via]
            for layer, rect in vdef.shapes:
                rects.append((layer, rect.translated(via.at.x, via.at.y)))
        if net.name in nets:
            raise LayoutError(f"duplicate net name {net.name} in DEF")
        nets[net.name] = NetGeometry(name=net.name, rects=rects,
                                     length=net.length(), special=special)
        for layer, rect in rects:
            shapes.append(Shape(layer=layer, rect=rect, owner=net.name))

    for net in fp.nets:
        add_net(net, special=False)
    for net in fp.special_nets:
        add_net(net, special=True)

    pin_nets = {}
    for net in list(fp.nets) + list(fp.special_nets):
        for inst, pin in net.pins:
            pin_nets[(inst, pin)] = net.name

    for comp in fp.components:
        macro = lef.macros[comp.macro]
        for pin in macro.pins:
            owner = pin_nets.get((comp.name, pin.name), f"inst:{comp.name}")
            for layer, rect in pin.shapes:
                shapes.append(Shape(
                    layer=layer,
                    rect=transform_macro_rect(rect, comp.orient, macro.width,
                                              macro.height, comp.location),
                    owner=owner))
        for layer, rect in macro.obstructions:
            shapes.append(Shape(
                layer=layer,
                rect=transform_macro_rect(rect, comp.orient, macro.width,
                                          macro.height, comp.location),
                owner=f"inst:{comp.name}"))

    shapes.sort(key=lambda s: (s.layer, s.rect.lo, s.rect.hi, s.owner))
    return shapes, nets


# ---------------------------------------------------------------------------
# Attack descriptions


@dataclass(frozen=True)
class AttackSpec:
    name: str
    std_cells: int
    placement_sites: int
    timing_critical: bool
    target_nets: tuple[str, ...] = ()


class AttackParseError(ValueError):
    pass


def parse_attacks(text: str) -> list[AttackSpec]:
    """Blank-line separated blocks of `attack/cells/sites/timing_critical/
    targets` lines."""
    blocks: list[list[tuple[str, str]]] = [[]]
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        key, _, value = line.partition(" ")
        blocks[-1].append((key, value.strip()))
    out: list[AttackSpec] = []
    for block in blocks:
        if not block:
            continue
        kv = dict(block)
        label = kv.get("attack", f"block {len(out) + 1}")
        for key in ("attack", "cells", "sites", "timing_critical"):
            if key not in kv:
                raise AttackParseError(f"attack {label!r} missing key {key!r}")
        tc = kv["timing_critical"].lower()
        if tc not in ("true", "false"):
            raise AttackParseError(
                f"attack {label!r}: timing_critical must be true or false")
        targets = tuple(t for t in kv.get("targets", "").split(",") if t)
        spec = AttackSpec(name=kv["attack"], std_cells=int(kv["cells"]),
                          placement_sites=int(kv["sites"]),
                          timing_critical=tc == "true", target_nets=targets)
        if not (spec.placement_sites >= spec.std_cells >= 1):
            raise AttackParseError(
                f"attack {label!r}: need sites >= cells >= 1, got "
                f"{spec.placement_sites} / {spec.std_cells}")
        out.append(spec)
    return out


# ---------------------------------------------------------------------------
# GDSII cross-check


@dataclass
class LayerCrosscheck:
    layer: str
    def_area: int
    gds_area: int
    only_def: int
    only_gds: int
    fraction: Fraction
    ok: bool


@dataclass
class CrosscheckReport:
    layers: list[LayerCrosscheck]
    epsilon: Fraction
    ok: bool
    warnings: list[str] = field(default_factory=list)


def crosscheck_gds(db: LayoutDb, flat: FlatGeometry, layer_map: LayerMap,
                   epsilon: Fraction = Fraction(1, 100)) -> CrosscheckReport:
    """Compare DEF-derived shapes against flattened GDSII geometry per layer.

    Mismatch fraction is symmetric-difference area over combined union area;
    a layer passes when it stays below epsilon. Only rectilinear GDSII
    polygons are comparable; others are skipped with a warning.
    """
    warnings: list[str] = []
    layers: list[LayerCrosscheck] = []
    by_layer: dict[str, list[Rect]] = {}
    for shape in db.shapes.shapes:
        by_layer.setdefault(shape.layer, []).append(shape.rect)

    for name, (gl, gd) in layer_map.entries:
        def_rects = by_layer.get(name, [])
        gds_rects: list[Rect] = []
        for poly in flat.shapes.get((gl, gd), []):
            if poly.is_rectilinear():
                gds_rects.extend(rectilinear_decompose(poly))
            else:
                warnings.append(f"layer {name}: skipped non-rectilinear "
                                "GDSII polygon")
        if not def_rects and not gds_rects:
            warnings.append(f"layer {name} absent from both DEF and GDSII")
            layers.append(LayerCrosscheck(name, 0, 0, 0, 0, Fraction(0), True))
            continue
        a_def = union_area(def_rects)
        a_gds = union_area(gds_rects)
        a_all = union_area(def_rects + gds_rects)
        only_def = a_all - a_gds
        only_gds = a_all - a_def
        fraction = Fraction(only_def + only_gds, a_all) if a_all else Fraction(0)
        layers.append(LayerCrosscheck(
            layer=name, def_area=a_def, gds_area=a_gds, only_def=only_def,
            only_gds=only_gds, fraction=fraction, ok=fraction < epsilon))
    return CrosscheckReport(layers=layers, epsilon=epsilon,
                            ok=all(l.ok for l in layers), warnings=warnings)
