"""Parsers for the LEF, DEF, and layer-map subsets the metrics consume.

Constructs outside the subset are skipped with a counted warning, never an
error. All distances become integer dbu at parse time: LEF micron values
are converted through DATABASE MICRONS with exact rational arithmetic, DEF
coordinates are already dbu integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .geom import Point, Rect


class LefParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DefParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LayerMapError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks: list[tuple[str, int]] = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for ch in "();":
            line = line.replace(ch, f" {ch} ")
        for tok in line.split():
            toks.append((tok, ln))
    return toks


class _Cursor:
    def __init__(self, toks: list[tuple[str, int]], err: type):
        self.toks = toks
        self.i = 0
        self._err = err

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    @property
    def line(self) -> int:
        idx = min(self.i, len(self.toks) - 1)
        return self.toks[idx][1] if self.toks else 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def next(self) -> str:
        if self.at_end():
            raise self._err("unexpected end of file")
        tok, _ = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok != value:
            raise self._err(f"expected {value!r}, got {tok!r}", self.line)

    def skip_statement(self) -> None:
        while not self.at_end() and self.next() != ";":
            pass

    def error(self, msg: str):
        raise self._err(msg, self.line)


# ---------------------------------------------------------------------------
# LEF model


@dataclass(frozen=True)
class TechLayer:
    name: str
    kind: str  # routing | cut | masterslice
    stack_index: int
    direction: str | None = None
    pitch: int | None = None
    min_width: int | None = None
    min_spacing: int | None = None


@dataclass(frozen=True)
class ViaDef:
    name: str
    shapes: tuple[tuple[str, Rect], ...]


@dataclass(frozen=True)
class ViaRule:
    cut_layer: str
    width: int
    height: int


@dataclass(frozen=True)
class Site:
    name: str
    width: int
    height: int


@dataclass(frozen=True)
class MacroPin:
    name: str
    direction: str | None
    shapes: tuple[tuple[str, Rect], ...]


@dataclass(frozen=True)
class Macro:
    name: str
    width: int
    height: int
    site: str | None
    site_span: int | None
    pins: tuple[MacroPin, ...]
    obstructions: tuple[tuple[str, Rect], ...]


@dataclass
class LefData:
    dbu_per_micron: int
    layers: list[TechLayer]
    vias: list[ViaDef]
    sites: dict[str, Site]
    macros: dict[str, Macro]
    warnings: list[str] = field(default_factory=list)

    def layer(self, name: str) -> TechLayer | None:
        for lay in self.layers:
            if lay.name == name:
                return lay
        return None

    @property
    def via_rules(self) -> dict[str, ViaRule]:
        """Smallest cut geometry seen per cut layer across via definitions."""
        cuts = {lay.name for lay in self.layers if lay.kind == "cut"}
        rules: dict[str, ViaRule] = {}
        for via in self.vias:
            for lname, rect in via.shapes:
                if lname not in cuts:
                    continue
                old = rules.get(lname)
                if (old is None
                        or rect.width * rect.height < old.width * old.height):
                    rules[lname] = ViaRule(lname, rect.width, rect.height)
        return rules

    def cut_layer_between(self, a: str, b: str) -> str | None:
        idx = {lay.name: lay.stack_index for lay in self.layers}
        if a not in idx or b not in idx:
            return None
        lo, hi = sorted((idx[a], idx[b]))
        for lay in self.layers:
            if lay.kind == "cut" and lo < lay.stack_index < hi:
                return lay.name
        return None


def _to_dbu(token: str, dbu: int, cur: _Cursor) -> int:
    try:
        value = Fraction(token) * dbu
    except ValueError:
        cur.error(f"malformed number {token!r}")
    if value.denominator != 1:
        cur.error(f"value {token} is off the dbu grid (scale {dbu})")
    return int(value)


def parse_lef(text: str) -> LefData:
    cur = _Cursor(_tokenize(text), LefParseError)
    dbu: int | None = None
    layers: list[TechLayer] = []
    vias: list[ViaDef] = []
    sites: dict[str, Site] = {}
    macros: dict[str, Macro] = {}
    warnings: list[str] = []

    def need_dbu() -> int:
        if dbu is None:
            cur.error("DATABASE MICRONS must appear before geometry")
        return dbu

    while not cur.at_end():
        tok = cur.next()
        if tok == "VERSION" or tok == "BUSBITCHARS" or tok == "DIVIDERCHAR" \
                or tok == "NAMESCASESENSITIVE" or tok == "MANUFACTURINGGRID":
            cur.skip_statement()
        elif tok == "UNITS":
            while True:
                sub = cur.next()
                if sub == "END":
                    cur.expect("UNITS")
                    break
                if sub == "DATABASE":
                    cur.expect("MICRONS")
                    try:
                        dbu = int(cur.next())
                    except ValueError:
                        cur.error("DATABASE MICRONS value must be an integer")
                    cur.expect(";")
                else:
                    warnings.append(f"skipped LEF UNITS entry {sub}")
                    cur.skip_statement()
        elif tok == "LAYER":
            layers.append(_parse_lef_layer(cur, need_dbu(), len(layers), warnings))
        elif tok == "VIA":
            vias.append(_parse_lef_via(cur, need_dbu(), warnings))
        elif tok == "SITE":
            site = _parse_lef_site(cur, need_dbu(), warnings)
            sites[site.name] = site
        elif tok == "MACRO":
            macro = _parse_lef_macro(cur, need_dbu(), sites, warnings)
            macros[macro.name] = macro
        elif tok == "PROPERTYDEFINITIONS":
            while cur.next() != "END":
                pass
            cur.expect("PROPERTYDEFINITIONS")
            warnings.append("skipped PROPERTYDEFINITIONS")
        elif tok == "END":
            nxt = cur.next()
            if nxt == "LIBRARY":
                break
            cur.error(f"unexpected END {nxt}")
        else:
            warnings.append(f"skipped LEF construct {tok}")
            cur.skip_statement()

    if dbu is None:
        raise LefParseError("missing UNITS / DATABASE MICRONS")
    for lay in layers:
        if (lay.kind == "routing" and lay.pitch is not None
                and lay.min_width is not None and lay.min_spacing is not None
                and lay.pitch < lay.min_width + lay.min_spacing):
            raise LefParseError(
                f"layer {lay.name}: pitch {lay.pitch} below width+spacing "
                f"{lay.min_width + lay.min_spacing}")
    return LefData(dbu_per_micron=dbu, layers=layers, vias=vias, sites=sites,
                   macros=macros, warnings=warnings)


def _parse_lef_layer(cur: _Cursor, dbu: int, stack_index: int,
                     warnings: list[str]) -> TechLayer:
    name = cur.next()
    kind = "routing"
    direction = None
    pitch = min_width = min_spacing = None
    while True:
        tok = cur.next()
        if tok == "END":
            got = cur.next()
            if got != name:
                cur.error(f"LAYER {name} terminated by END {got}")
            break
        if tok == "TYPE":
            kind = cur.next().lower()
            if kind not in ("routing", "cut", "masterslice"):
                cur.error(f"unsupported layer TYPE {kind}")
            cur.expect(";")
        elif tok == "DIRECTION":
            direction = cur.next().lower()
            cur.expect(";")
        elif tok == "PITCH":
            first = cur.next()
            pitch = _to_dbu(first, dbu, cur)
            if cur.peek() != ";":  # two-value form; keep the x pitch
                cur.next()
            cur.expect(";")
        elif tok == "WIDTH":
            min_width = _to_dbu(cur.next(), dbu, cur)
            cur.expect(";")
        elif tok == "SPACING":
            min_spacing = _to_dbu(cur.next(), dbu, cur)
            cur.expect(";")
        else:
            warnings.append(f"skipped LAYER {name} attribute {tok}")
            cur.skip_statement()
    return TechLayer(name=name, kind=kind, stack_index=stack_index,
                     direction=direction, pitch=pitch, min_width=min_width,
                     min_spacing=min_spacing)


def _parse_rect(cur: _Cursor, dbu: int) -> Rect:
    vals = [_to_dbu(cur.next(), dbu, cur) for _ in range(4)]
    cur.expect(";")
    return Rect.from_coords(*vals)


def _parse_lef_via(cur: _Cursor, dbu: int, warnings: list[str]) -> ViaDef:
    name = cur.next()
    if cur.peek() == "DEFAULT":
        cur.next()
    shapes: list[tuple[str, Rect]] = []
    current_layer: str | None = None
    while True:
        tok = cur.next()
        if tok == "END":
            got = cur.next()
            if got != name:
                cur.error(f"VIA {name} terminated by END {got}")
            break
        if tok == "LAYER":
            current_layer = cur.next()
            cur.expect(";")
        elif tok == "RECT":
            if current_layer is None:
                cur.error("RECT before LAYER in VIA")
            shapes.append((current_layer, _parse_rect(cur, dbu)))
        else:
            warnings.append(f"skipped VIA {name} attribute {tok}")
            cur.skip_statement()
    return ViaDef(name=name, shapes=tuple(shapes))


def _parse_lef_site(cur: _Cursor, dbu: int, warnings: list[str]) -> Site:
    name = cur.next()
    width = height = None
    while True:
        tok = cur.next()
        if tok == "END":
            got = cur.next()
            if got != name:
                cur.error(f"SITE {name} terminated by END {got}")
            break
        if tok == "SIZE":
            width = _to_dbu(cur.next(), dbu, cur)
            cur.expect("BY")
            height = _to_dbu(cur.next(), dbu, cur)
            cur.expect(";")
        else:
            warnings.append(f"skipped SITE {name} attribute {tok}")
            cur.skip_statement()
    if width is None or height is None:
        cur.error(f"SITE {name} without SIZE")
    return Site(name=name, width=width, height=height)


def _parse_lef_macro(cur: _Cursor, dbu: int, sites: dict[str, Site],
                     warnings: list[str]) -> Macro:
    name = cur.next()
    width = height = None
    site_name: str | None = None
    pins: list[MacroPin] = []
    obstructions: list[tuple[str, Rect]] = []
    while True:
        tok = cur.next()
        if tok == "END":
            got = cur.next()
            if got != name:
                cur.error(f"MACRO {name} terminated by END {got}")
            break
        if tok == "SIZE":
            width = _to_dbu(cur.next(), dbu, cur)
            cur.expect("BY")
            height = _to_dbu(cur.next(), dbu, cur)
            cur.expect(";")
        elif tok == "SITE":
            site_name = cur.next()
            cur.expect(";")
        elif tok == "PIN":
            pins.append(_parse_lef_pin(cur, dbu, warnings))
        elif tok == "OBS":
            current_layer = None
            while True:
                sub = cur.next()
                if sub == "END":
                    break
                if sub == "LAYER":
                    current_layer = cur.next()
                    cur.expect(";")
                elif sub == "RECT":
                    if current_layer is None:
                        cur.error("RECT before LAYER in OBS")
                    obstructions.append((current_layer, _parse_rect(cur, dbu)))
                else:
                    warnings.append(f"skipped OBS attribute {sub}")
                    cur.skip_statement()
        else:
            warnings.append(f"skipped MACRO {name} attribute {tok}")
            cur.skip_statement()
    if width is None or height is None:
        cur.error(f"MACRO {name} without SIZE")

    span = None
    site = sites.get(site_name) if site_name else None
    if site is None and len(sites) == 1:
        site = next(iter(sites.values()))
    if site is not None:
        if width % site.width:
            raise LefParseError(
                f"MACRO {name} width {width} not a multiple of site width "
                f"{site.width}")
        span = width // site.width
    bounds = Rect(Point(0, 0), Point(width, height))
    for pin in pins:
        for _, rect in pin.shapes:
            if not (bounds.contains(rect.lo) and bounds.contains(rect.hi)):
                raise LefParseError(
                    f"MACRO {name} pin {pin.name} rect outside cell bounds")
    return Macro(name=name, width=width, height=height,
                 site=site.name if site else None, site_span=span,
                 pins=tuple(pins), obstructions=tuple(obstructions))


def _parse_lef_pin(cur: _Cursor, dbu: int, warnings: list[str]) -> MacroPin:
    name = cur.next()
    direction = None
    shapes: list[tuple[str, Rect]] = []
    while True:
        tok = cur.next()
        if tok == "END":
            got = cur.next()
            if got != name:
                cur.error(f"PIN {name} terminated by END {got}")
            break
        if tok == "DIRECTION":
            direction = cur.next().lower()
            cur.expect(";")
        elif tok == "PORT":
            current_layer = None
            while True:
                sub = cur.next()
                if sub == "END":
                    break
                if sub == "LAYER":
                    current_layer = cur.next()
                    cur.expect(";")
                elif sub == "RECT":
                    if current_layer is None:
                        cur.error("RECT before LAYER in PORT")
                    shapes.append((current_layer, _parse_rect(cur, dbu)))
                else:
                    warnings.append(f"skipped PORT attribute {sub}")
                    cur.skip_statement()
        else:
            warnings.append(f"skipped PIN {name} attribute {tok}")
            cur.skip_statement()
    return MacroPin(name=name, direction=direction, shapes=tuple(shapes))


# ---------------------------------------------------------------------------
# DEF model

ORIENTATIONS = ("N", "S", "E", "W", "FN", "FS", "FE", "FW")


@dataclass(frozen=True)
class Row:
    name: str
    site: str
    origin: Point
    orient: str
    count: int
    step: int


@dataclass(frozen=True)
class Component:
    name: str
    macro: str
    location: Point
    orient: str


@dataclass(frozen=True)
class RoutedSegment:
    layer: str
    p1: Point
    p2: Point
    width: int


@dataclass(frozen=True)
class RoutedVia:
    via: str
    at: Point
    layer: str  # routing layer named by the wire that placed the via


@dataclass(frozen=True)
class RoutedNet:
    name: str
    segments: tuple[RoutedSegment, ...] = ()
    vias: tuple[RoutedVia, ...] = ()
    pins: tuple[tuple[str, str], ...] = ()

    def length(self) -> int:
        return sum(abs(s.p2.x - s.p1.x) + abs(s.p2.y - s.p1.y)
                   for s in self.segments)


@dataclass
class FloorplanDef:
    design: str
    dbu_per_micron: int
    die_area: Rect
    rows: list[Row]
    components: list[Component]
    nets: list[RoutedNet]
    special_nets: list[RoutedNet]
    warnings: list[str] = field(default_factory=list, compare=False)


def parse_def(text: str, lef: LefData) -> FloorplanDef:
    cur = _Cursor(_tokenize(text), DefParseError)
    design = ""
    dbu: int | None = None
    die: Rect | None = None
    rows: list[Row] = []
    components: list[Component] = []
    nets: list[RoutedNet] = []
    special: list[RoutedNet] = []
    warnings: list[str] = []
    saw_nets_section = False

    while not cur.at_end():
        tok = cur.next()
        if tok == "VERSION" or tok == "DIVIDERCHAR" or tok == "BUSBITCHARS":
            cur.skip_statement()
        elif tok == "DESIGN":
            design = cur.next()
            cur.expect(";")
        elif tok == "UNITS":
            cur.expect("DISTANCE")
            cur.expect("MICRONS")
            try:
                dbu = int(cur.next())
            except ValueError:
                cur.error("UNITS DISTANCE MICRONS value must be an integer")
            cur.expect(";")
            if dbu != lef.dbu_per_micron:
                cur.error(f"DEF dbu scale {dbu} differs from LEF scale "
                          f"{lef.dbu_per_micron}")
        elif tok == "DIEAREA":
            pts = []
            while cur.peek() == "(":
                pts.append(_parse_def_point(cur, None))
            cur.expect(";")
            if len(pts) != 2:
                cur.error("only rectangular DIEAREA (two points) is supported")
            die = Rect.from_coords(pts[0].x, pts[0].y, pts[1].x, pts[1].y)
        elif tok == "ROW":
            rows.append(_parse_def_row(cur))
        elif tok == "COMPONENTS":
            components.extend(_parse_def_components(cur, lef, warnings))
        elif tok == "NETS":
            saw_nets_section = True
            nets.extend(_parse_def_nets(cur, lef, "NETS", warnings))
        elif tok == "SPECIALNETS":
            special.extend(_parse_def_nets(cur, lef, "SPECIALNETS", warnings))
        elif tok == "PINS" or tok == "VIAS" or tok == "TRACKS" \
                or tok == "GCELLGRID" or tok == "BLOCKAGES":
            warnings.append(f"skipped DEF section {tok}")
            if tok in ("TRACKS", "GCELLGRID"):
                cur.skip_statement()
            else:
                while not (cur.peek() == "END"):
                    cur.next()
                cur.next()
                cur.expect(tok)
        elif tok == "END":
            nxt = cur.next()
            if nxt == "DESIGN":
                break
            cur.error(f"unexpected END {nxt}")
        else:
            warnings.append(f"skipped DEF construct {tok}")
            cur.skip_statement()

    if dbu is None:
        raise DefParseError("missing UNITS DISTANCE MICRONS")
    if die is None:
        raise DefParseError("missing DIEAREA")
    if not saw_nets_section:
        warnings.append("DEF has no NETS section")

    fp = FloorplanDef(design=design, dbu_per_micron=dbu, die_area=die,
                      rows=rows, components=components, nets=nets,
                      special_nets=special, warnings=warnings)
    _validate_def(fp, lef)
    return fp


def _validate_def(fp: FloorplanDef, lef: LefData) -> None:
    for comp in fp.components:
        if comp.macro not in lef.macros:
            raise DefParseError(
                f"component {comp.name} references unknown macro {comp.macro}")
    for row in fp.rows:
        if row.site not in lef.sites:
            raise DefParseError(f"row {row.name} references unknown site {row.site}")
    via_names = {v.name for v in lef.vias}
    for net in list(fp.nets) + list(fp.special_nets):
        for seg in net.segments:
            if lef.layer(seg.layer) is None:
                raise DefParseError(
                    f"net {net.name} routed on unknown layer {seg.layer}")
            for p in (seg.p1, seg.p2):
                if not fp.die_area.contains(p):
                    raise DefParseError(
                        f"net {net.name} point {p} outside die area")
        for via in net.vias:
            if via.via not in via_names:
                raise DefParseError(f"net {net.name} uses unknown via {via.via}")
            if not fp.die_area.contains(via.at):
                raise DefParseError(
                    f"net {net.name} via at {via.at} outside die area")


def _parse_def_point(cur: _Cursor, prev: Point | None) -> Point:
    cur.expect("(")
    vals: list[str] = []
    while cur.peek() != ")":
        vals.append(cur.next())
    cur.next()
    if len(vals) not in (2, 3):  # optional extension value ignored
        cur.error(f"malformed point with {len(vals)} fields")

    def coord(tok: str, fallback: int | None) -> int:
        if tok == "*":
            if fallback is None:
                cur.error("'*' coordinate without a previous point")
            return fallback
        try:
            return int(tok)
        except ValueError:
            cur.error(f"non-integer coordinate {tok!r}")

    return Point(coord(vals[0], prev.x if prev else None),
                 coord(vals[1], prev.y if prev else None))


def _int(cur: _Cursor) -> int:
    tok = cur.next()
    try:
        return int(tok)
    except ValueError:
        cur.error(f"expected an integer, got {tok!r}")


def _parse_def_row(cur: _Cursor) -> Row:
    name = cur.next()
    site = cur.next()
    x = _int(cur)
    y = _int(cur)
    orient = cur.next()
    if orient not in ORIENTATIONS:
        cur.error(f"bad row orientation {orient}")
    cur.expect("DO")
    nx = _int(cur)
    cur.expect("BY")
    ny = _int(cur)
    cur.expect("STEP")
    sx = _int(cur)
    _int(cur)  # step y, unused for single-height rows
    cur.expect(";")
    if ny != 1:
        cur.error(f"row {name}: only DO n BY 1 rows are supported")
    return Row(name=name, site=site, origin=Point(x, y), orient=orient,
               count=nx, step=sx)


def _parse_def_components(cur: _Cursor, lef: LefData,
                          warnings: list[str]) -> list[Component]:
    _int(cur)
    cur.expect(";")
    out: list[Component] = []
    while True:
        tok = cur.next()
        if tok == "END":
            cur.expect("COMPONENTS")
            return out
        if tok != "-":
            cur.error(f"expected '-' starting a component, got {tok!r}")
        inst = cur.next()
        macro = cur.next()
        location = None
        orient = "N"
        placed = False
        while cur.peek() != ";":
            cur.expect("+")
            attr = cur.next()
            if attr in ("PLACED", "FIXED", "COVER"):
                location = _parse_def_point(cur, None)
                orient = cur.next()
                if orient not in ORIENTATIONS:
                    cur.error(f"bad orientation {orient}")
                placed = True
            elif attr == "UNPLACED":
                warnings.append(f"skipped unplaced component {inst}")
            else:
                warnings.append(f"skipped component attribute {attr}")
                while cur.peek() not in ("+", ";"):
                    cur.next()
        cur.expect(";")
        if placed:
            out.append(Component(name=inst, macro=macro, location=location,
                                 orient=orient))


def _parse_def_nets(cur: _Cursor, lef: LefData, section: str,
                    warnings: list[str]) -> list[RoutedNet]:
    _int(cur)
    cur.expect(";")
    is_special = section == "SPECIALNETS"
    out: list[RoutedNet] = []
    while True:
        tok = cur.next()
        if tok == "END":
            cur.expect(section)
            return out
        if tok != "-":
            cur.error(f"expected '-' starting a net, got {tok!r}")
        name = cur.next()
        pins: list[tuple[str, str]] = []
        segments: list[RoutedSegment] = []
        vias: list[RoutedVia] = []
        while cur.peek() == "(":
            cur.next()
            inst = cur.next()
            pin = cur.next()
            cur.expect(")")
            pins.append((inst, pin))
        while cur.peek() != ";":
            cur.expect("+")
            attr = cur.next()
            if attr == "ROUTED":
                segs, vs = _parse_routing(cur, lef, is_special, name)
                segments.extend(segs)
                vias.extend(vs)
            elif attr == "USE":
                cur.next()
            else:
                warnings.append(f"skipped net attribute {attr} on {name}")
                while cur.peek() not in ("+", ";"):
                    cur.next()
        cur.expect(";")
        out.append(RoutedNet(name=name, segments=tuple(segments),
                             vias=tuple(vias), pins=tuple(pins)))


def _parse_routing(cur: _Cursor, lef: LefData, is_special: bool,
                   net: str) -> tuple[list[RoutedSegment], list[RoutedVia]]:
    segments: list[RoutedSegment] = []
    vias: list[RoutedVia] = []
    while True:
        layer_name = cur.next()
        layer = lef.layer(layer_name)
        if layer is None:
            raise DefParseError(f"net {net} routed on unknown layer {layer_name}",
                                cur.line)
        width = None
        if is_special or (cur.peek() not in ("(",) and cur.peek() is not None
                          and cur.peek().lstrip("-").isdigit()):
            width = int(cur.next())
        if width is None:
            if layer.min_width is None:
                raise DefParseError(
                    f"net {net}: layer {layer_name} has no WIDTH to default to",
                    cur.line)
            width = layer.min_width
        pts: list[Point] = []
        while cur.peek() == "(":
            pts.append(_parse_def_point(cur, pts[-1] if pts else None))
        if not pts:
            cur.error(f"net {net}: wire on {layer_name} has no points")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                continue
            if a.x != b.x and a.y != b.y:
                cur.error(f"net {net}: non-axis-parallel segment {a}..{b}")
            if width <= 0:
                cur.error(f"net {net}: non-positive wire width {width}")
            segments.append(RoutedSegment(layer=layer_name, p1=a, p2=b,
                                          width=width))
        nxt = cur.peek()
        if nxt not in (";", "+", "NEW", None) and nxt != "(":
            vias.append(RoutedVia(via=cur.next(), at=pts[-1], layer=layer_name))
        if cur.peek() == "NEW":
            cur.next()
            continue
        return segments, vias


def emit_def(fp: FloorplanDef) -> str:
    """Canonical DEF text for a parsed floorplan (debug/fixture emitter)."""
    out: list[str] = []
    out.append("VERSION 5.8 ;")
    out.append(f"DESIGN {fp.design} ;")
    out.append(f"UNITS DISTANCE MICRONS {fp.dbu_per_micron} ;")
    out.append(f"DIEAREA ( {fp.die_area.lo.x} {fp.die_area.lo.y} ) "
               f"( {fp.die_area.hi.x} {fp.die_area.hi.y} ) ;")
    for row in fp.rows:
        out.append(f"ROW {row.name} {row.site} {row.origin.x} {row.origin.y} "
                   f"{row.orient} DO {row.count} BY 1 STEP {row.step} 0 ;")
    out.append(f"COMPONENTS {len(fp.components)} ;")
    for comp in fp.components:
        out.append(f"- {comp.name} {comp.macro} + PLACED "
                   f"( {comp.location.x} {comp.location.y} ) {comp.orient} ;")
    out.append("END COMPONENTS")

    def emit_nets(section: str, nets: Sequence[RoutedNet], special: bool) -> None:
        out.append(f"{section} {len(nets)} ;")
        for net in nets:
            parts = [f"- {net.name}"]
            for inst, pin in net.pins:
                parts.append(f"( {inst} {pin} )")
            wires: list[str] = []
            for i, seg in enumerate(net.segments):
                kw = "+ ROUTED" if not wires else "NEW"
                width = f" {seg.width}" if special else ""
                wires.append(f"{kw} {seg.layer}{width} ( {seg.p1.x} {seg.p1.y} ) "
                             f"( {seg.p2.x} {seg.p2.y} )")
            for via in net.vias:
                kw = "+ ROUTED" if not wires else "NEW"
                # A via-only wire names its routing layer then the via.
                wires.append(f"{kw} {via.layer} "
                             f"( {via.at.x} {via.at.y} ) {via.via}")
            parts.extend(wires)
            out.append(" ".join(parts) + " ;")
        out.append(f"END {section}")

    emit_nets("NETS", fp.nets, False)
    if fp.special_nets:
        emit_nets("SPECIALNETS", fp.special_nets, True)
    out.append("END DESIGN")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Layer map


@dataclass(frozen=True)
class LayerMap:
    entries: tuple[tuple[str, tuple[int, int]], ...]

    def as_dict(self) -> dict[str, tuple[int, int]]:
        return dict(self.entries)

    def gds_pair(self, layer: str) -> tuple[int, int] | None:
        return self.as_dict().get(layer)


def parse_layermap(text: str) -> LayerMap:
    """Whitespace-delimited `<layer> <purpose> <gdsLayer> <gdsDatatype>` lines."""
    seen: dict[str, tuple[int, int, int]] = {}  # name -> (layer, dt, line)
    used_pairs: dict[tuple[int, int], tuple[str, int]] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise LayerMapError(f"line {ln}: expected 4 fields, got {len(fields)}")
        name, _purpose, l_str, d_str = fields
        try:
            gl, gd = int(l_str), int(d_str)
        except ValueError:
            raise LayerMapError(f"line {ln}: non-integer layer number")
        if name in seen:
            old_l, old_d, old_ln = seen[name]
            if (old_l, old_d) != (gl, gd):
                raise LayerMapError(
                    f"conflicting duplicate for {name}: line {old_ln} has "
                    f"({old_l},{old_d}), line {ln} has ({gl},{gd})")
            continue
        if (gl, gd) in used_pairs and used_pairs[(gl, gd)][0] != name:
            other, other_ln = used_pairs[(gl, gd)]
            raise LayerMapError(
                f"line {ln}: ({gl},{gd}) already mapped to {other} "
                f"on line {other_ln}")
        seen[name] = (gl, gd, ln)
        used_pairs[(gl, gd)] = (name, ln)
    return LayerMap(tuple((name, (l, d)) for name, (l, d, _) in seen.items()))
