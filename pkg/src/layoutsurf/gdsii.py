"""GDSII binary stream reader/writer and hierarchy flattener.

The reader keeps raw payload bytes for timestamp/real-valued records so a
parsed library re-emits byte-identically. Record order inside elements is
canonicalized on write, so byte-exact round trips are guaranteed for
streams this writer produced (which covers every fixture in the suite).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .geom import Point, Polygon, Rect

# Record type codes (subset we interpret; everything else is opaque).
HEADER = 0x00
BGNLIB = 0x01
LIBNAME = 0x02
UNITS = 0x03
ENDLIB = 0x04
BGNSTR = 0x05
STRNAME = 0x06
ENDSTR = 0x07
BOUNDARY = 0x08
PATH = 0x09
SREF = 0x0A
AREF = 0x0B
TEXT = 0x0C
LAYER = 0x0D
DATATYPE = 0x0E
WIDTH = 0x0F
XY = 0x10
ENDEL = 0x11
SNAME = 0x12
COLROW = 0x13
NODE = 0x15
STRANS = 0x1A
MAG = 0x1B
ANGLE = 0x1C
PATHTYPE = 0x21
BOX = 0x2D

_ELEMENT_OPENERS = {BOUNDARY, PATH, SREF, AREF, TEXT, NODE, BOX}

_NAMES = {
    HEADER: "HEADER", BGNLIB: "BGNLIB", LIBNAME: "LIBNAME", UNITS: "UNITS",
    ENDLIB: "ENDLIB", BGNSTR: "BGNSTR", STRNAME: "STRNAME", ENDSTR: "ENDSTR",
    BOUNDARY: "BOUNDARY", PATH: "PATH", SREF: "SREF", AREF: "AREF",
    TEXT: "TEXT", LAYER: "LAYER", DATATYPE: "DATATYPE", WIDTH: "WIDTH",
    XY: "XY", ENDEL: "ENDEL", SNAME: "SNAME", COLROW: "COLROW", NODE: "NODE",
    STRANS: "STRANS", MAG: "MAG", ANGLE: "ANGLE", PATHTYPE: "PATHTYPE",
    BOX: "BOX",
}

_ELEMENT_WIDTHS = {0: 1, 1: 2, 2: 2, 3: 4, 4: 4, 5: 8, 6: 1}

MAX_NAME_LEN = 32


class GdsError(ValueError):
    """Structured GDSII stream error, carrying the byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


# ---------------------------------------------------------------------------
# Excess-64 floating point codec


def decode_real8_fraction(data: bytes) -> Fraction:
    if len(data) != 8:
        raise GdsError(f"real64 payload must be 8 bytes, got {len(data)}")
    sign = -1 if data[0] & 0x80 else 1
    exponent = (data[0] & 0x7F) - 64
    mantissa = int.from_bytes(data[1:], "big")
    return sign * Fraction(mantissa, 1 << 56) * Fraction(16) ** exponent


def decode_real8(data: bytes) -> float:
    return float(decode_real8_fraction(data))


def encode_real8(value: float | Fraction) -> bytes:
    """Canonical (normalized) excess-64 encoding of an exact rational."""
    f = Fraction(value)
    if f == 0:
        return b"\x00" * 8
    sign = 0x80 if f < 0 else 0x00
    f = abs(f)
    exponent = 64
    while f >= 1:
        f /= 16
        exponent += 1
    while f < Fraction(1, 16):
        f *= 16
        exponent -= 1
    mantissa = round(f * (1 << 56))
    if mantissa == 1 << 56:
        mantissa >>= 4
        exponent += 1
    if not 0 <= exponent <= 127:
        raise GdsError(f"value {value!r} outside excess-64 exponent range")
    return bytes([sign | exponent]) + mantissa.to_bytes(7, "big")


def decode_real4_fraction(data: bytes) -> Fraction:
    if len(data) != 4:
        raise GdsError(f"real32 payload must be 4 bytes, got {len(data)}")
    sign = -1 if data[0] & 0x80 else 1
    exponent = (data[0] & 0x7F) - 64
    mantissa = int.from_bytes(data[1:], "big")
    return sign * Fraction(mantissa, 1 << 24) * Fraction(16) ** exponent


# ---------------------------------------------------------------------------
# Records and low-level stream handling


@dataclass(frozen=True)
class GdsRecord:
    record_type: int
    data_type: int
    payload: bytes

    def encode(self) -> bytes:
        length = 4 + len(self.payload)
        if length % 2:
            raise GdsError(f"odd record length {length} for "
                           f"{_NAMES.get(self.record_type, hex(self.record_type))}")
        return struct.pack(">HBB", length, self.record_type, self.data_type) + self.payload

    def int16s(self) -> list[int]:
        return list(struct.unpack(f">{len(self.payload) // 2}h", self.payload))

    def int32s(self) -> list[int]:
        return list(struct.unpack(f">{len(self.payload) // 4}i", self.payload))

    def ascii(self) -> str:
        return self.payload.rstrip(b"\x00").decode("ascii")


def iter_records(data: bytes) -> Iterator[tuple[int, GdsRecord]]:
    """Yield (offset, record) pairs, validating framing as we go."""
    pos = 0
    n = len(data)
    while pos < n:
        if pos + 4 > n:
            raise GdsError("truncated record header", pos)
        length, rtype, dtype = struct.unpack(">HBB", data[pos:pos + 4])
        if length < 4:
            raise GdsError(f"record length {length} below header size", pos)
        if length % 2:
            raise GdsError(f"odd record length {length}", pos)
        if pos + length > n:
            raise GdsError("truncated record payload", pos)
        payload = data[pos + 4:pos + length]
        width = _ELEMENT_WIDTHS.get(dtype)
        if width is None:
            raise GdsError(f"unknown data type {dtype}", pos)
        if len(payload) % width:
            raise GdsError(f"payload size {len(payload)} not a multiple "
                           f"of element width {width}", pos)
        yield pos, GdsRecord(rtype, dtype, payload)
        pos += length


def _encode_name(name: str) -> bytes:
    raw = name.encode("ascii")
    if len(raw) % 2:
        raw += b"\x00"
    return raw


def _encode_points(points: Sequence[Point]) -> bytes:
    flat: list[int] = []
    for p in points:
        flat.append(p.x)
        flat.append(p.y)
    return struct.pack(f">{len(flat)}i", *flat)


def _decode_points(rec: GdsRecord) -> tuple[Point, ...]:
    vals = rec.int32s()
    return tuple(Point(vals[i], vals[i + 1]) for i in range(0, len(vals), 2))


# ---------------------------------------------------------------------------
# Element and cell model


@dataclass
class Boundary:
    layer: int
    datatype: int
    xy: tuple[Point, ...]  # as stored, including the explicit closing point

    def polygon(self) -> Polygon:
        pts = self.xy
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        return Polygon(pts)

    def records(self) -> list[GdsRecord]:
        return [
            GdsRecord(BOUNDARY, 0, b""),
            GdsRecord(LAYER, 2, struct.pack(">h", self.layer)),
            GdsRecord(DATATYPE, 2, struct.pack(">h", self.datatype)),
            GdsRecord(XY, 3, _encode_points(self.xy)),
            GdsRecord(ENDEL, 0, b""),
        ]


@dataclass
class PathElement:
    layer: int
    datatype: int
    xy: tuple[Point, ...]
    width: int | None = None
    pathtype: int | None = None

    def records(self) -> list[GdsRecord]:
        recs = [
            GdsRecord(PATH, 0, b""),
            GdsRecord(LAYER, 2, struct.pack(">h", self.layer)),
            GdsRecord(DATATYPE, 2, struct.pack(">h", self.datatype)),
        ]
        if self.pathtype is not None:
            recs.append(GdsRecord(PATHTYPE, 2, struct.pack(">h", self.pathtype)))
        if self.width is not None:
            recs.append(GdsRecord(WIDTH, 3, struct.pack(">i", self.width)))
        recs.append(GdsRecord(XY, 3, _encode_points(self.xy)))
        recs.append(GdsRecord(ENDEL, 0, b""))
        return recs

    def rects(self) -> list[Rect]:
        """Expand the centerline to flush-ended rectangles (pathtype 0)."""
        if self.pathtype not in (None, 0):
            raise GdsError(f"unsupported pathtype {self.pathtype} (only flush ends)")
        if self.width is None or self.width <= 0:
            raise GdsError("path without a positive width")
        if self.width % 2:
            raise GdsError(f"odd path width {self.width} cannot expand to "
                           "integer coordinates")
        half = self.width // 2
        out = []
        for a, b in zip(self.xy, self.xy[1:]):
            if a.x != b.x and a.y != b.y:
                raise GdsError(f"non-axis-parallel path segment {a}..{b}")
            if a.y == b.y:
                out.append(Rect(Point(min(a.x, b.x), a.y - half),
                                Point(max(a.x, b.x), a.y + half)))
            else:
                out.append(Rect(Point(a.x - half, min(a.y, b.y)),
                                Point(a.x + half, max(a.y, b.y))))
        return out


@dataclass
class _RefMixin:
    cell: str
    strans_raw: bytes | None = None
    mag_raw: bytes | None = None
    angle_raw: bytes | None = None

    @property
    def reflect(self) -> bool:
        return bool(self.strans_raw and self.strans_raw[0] & 0x80)

    @property
    def magnification(self) -> float:
        return decode_real8(self.mag_raw) if self.mag_raw else 1.0

    @property
    def angle_degrees(self) -> float:
        return decode_real8(self.angle_raw) if self.angle_raw else 0.0

    def _trans_records(self) -> list[GdsRecord]:
        recs = []
        if self.strans_raw is not None:
            recs.append(GdsRecord(STRANS, 1, self.strans_raw))
        if self.mag_raw is not None:
            recs.append(GdsRecord(MAG, 5, self.mag_raw))
        if self.angle_raw is not None:
            recs.append(GdsRecord(ANGLE, 5, self.angle_raw))
        return recs

    @staticmethod
    def _make_trans(rotation: int, reflect: bool) -> tuple[bytes | None, bytes | None]:
        strans = b"\x80\x00" if reflect else (b"\x00\x00" if rotation else None)
        angle = encode_real8(rotation) if rotation else None
        return strans, angle


@dataclass
class Sref(_RefMixin):
    origin: Point = Point(0, 0)

    @classmethod
    def make(cls, cell: str, origin: Point, rotation: int = 0,
             reflect: bool = False) -> "Sref":
        strans, angle = cls._make_trans(rotation, reflect)
        return cls(cell=cell, origin=origin, strans_raw=strans, angle_raw=angle)

    def records(self) -> list[GdsRecord]:
        recs = [GdsRecord(SREF, 0, b""),
                GdsRecord(SNAME, 6, _encode_name(self.cell))]
        recs.extend(self._trans_records())
        recs.append(GdsRecord(XY, 3, _encode_points([self.origin])))
        recs.append(GdsRecord(ENDEL, 0, b""))
        return recs


@dataclass
class Aref(_RefMixin):
    cols: int = 1
    rows: int = 1
    xy: tuple[Point, Point, Point] = (Point(0, 0), Point(0, 0), Point(0, 0))

    @classmethod
    def make(cls, cell: str, origin: Point, cols: int, rows: int,
             col_pitch: int, row_pitch: int, rotation: int = 0,
             reflect: bool = False) -> "Aref":
        strans, angle = cls._make_trans(rotation, reflect)
        return cls(cell=cell, cols=cols, rows=rows,
                   xy=(origin,
                       Point(origin.x + cols * col_pitch, origin.y),
                       Point(origin.x, origin.y + rows * row_pitch)),
                   strans_raw=strans, angle_raw=angle)

    def records(self) -> list[GdsRecord]:
        recs = [GdsRecord(AREF, 0, b""),
                GdsRecord(SNAME, 6, _encode_name(self.cell))]
        recs.extend(self._trans_records())
        recs.append(GdsRecord(COLROW, 2, struct.pack(">hh", self.cols, self.rows)))
        recs.append(GdsRecord(XY, 3, _encode_points(self.xy)))
        recs.append(GdsRecord(ENDEL, 0, b""))
        return recs


@dataclass
class OpaqueElement:
    """TEXT/NODE/BOX or unknown element, preserved verbatim."""

    raw_records: tuple[GdsRecord, ...]

    def records(self) -> list[GdsRecord]:
        return list(self.raw_records)


Element = Boundary | PathElement | Sref | Aref | OpaqueElement

_ZERO_TIMESTAMP = b"\x00" * 24


@dataclass
class GdsCell:
    name: str
    elements: list[Element] = field(default_factory=list)
    bgnstr_raw: bytes = _ZERO_TIMESTAMP

    @property
    def boundaries(self) -> list[Boundary]:
        return [e for e in self.elements if isinstance(e, Boundary)]

    @property
    def paths(self) -> list[PathElement]:
        return [e for e in self.elements if isinstance(e, PathElement)]

    @property
    def references(self) -> list[Sref | Aref]:
        return [e for e in self.elements if isinstance(e, (Sref, Aref))]

    def add_boundary(self, layer: int, datatype: int,
                     points: Sequence[Point]) -> Boundary:
        pts = list(points)
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        b = Boundary(layer, datatype, tuple(pts))
        self.elements.append(b)
        return b

    def add_rect(self, layer: int, datatype: int, rect: Rect) -> Boundary:
        return self.add_boundary(layer, datatype, [
            rect.lo, Point(rect.hi.x, rect.lo.y), rect.hi, Point(rect.lo.x, rect.hi.y)])

    def add_sref(self, cell: str, origin: Point, rotation: int = 0,
                 reflect: bool = False) -> Sref:
        ref = Sref.make(cell, origin, rotation, reflect)
        self.elements.append(ref)
        return ref

    def add_aref(self, cell: str, origin: Point, cols: int, rows: int,
                 col_pitch: int, row_pitch: int) -> Aref:
        ref = Aref.make(cell, origin, cols, rows, col_pitch, row_pitch)
        self.elements.append(ref)
        return ref


@dataclass
class GdsLibrary:
    name: str
    units_raw: bytes
    header_raw: bytes = b"\x02\x58"  # stream version 600
    bgnlib_raw: bytes = _ZERO_TIMESTAMP
    cells: list[GdsCell] = field(default_factory=list)
    # Opaque library-level records as (cells-seen-before-it, record).
    extras: list[tuple[int, GdsRecord]] = field(default_factory=list)

    @classmethod
    def new(cls, name: str, dbu_per_micron: int) -> "GdsLibrary":
        user = Fraction(1, dbu_per_micron)
        meters = Fraction(1, dbu_per_micron * 10 ** 6)
        return cls(name=name,
                   units_raw=encode_real8(user) + encode_real8(meters))

    @property
    def dbu_in_user_units(self) -> Fraction:
        return decode_real8_fraction(self.units_raw[:8])

    @property
    def dbu_in_meters(self) -> Fraction:
        return decode_real8_fraction(self.units_raw[8:])

    @property
    def dbu_per_micron(self) -> int:
        per = Fraction(1, 10 ** 6) / self.dbu_in_meters
        return round(per)

    def add_cell(self, name: str) -> GdsCell:
        cell = GdsCell(name)
        self.cells.append(cell)
        return cell

    def cell_map(self) -> dict[str, GdsCell]:
        return {c.name: c for c in self.cells}

    @property
    def top_name(self) -> str | None:
        referenced = {ref.cell for c in self.cells for ref in c.references}
        for c in self.cells:
            if c.name not in referenced:
                return c.name
        return None


@dataclass
class FlatGeometry:
    """Per-(layer, datatype) polygon soup in top-cell coordinates."""

    shapes: dict[tuple[int, int], list[Polygon]]

    def polygon_count(self) -> int:
        return sum(len(v) for v in self.shapes.values())


# ---------------------------------------------------------------------------
# Reader


def _parse_element(opener: GdsRecord, records: list[tuple[int, GdsRecord]],
                   idx: int) -> tuple[Element, int]:
    """Parse one element starting at records[idx] (the opener). Returns the
    element and the index just past its ENDEL."""
    start_off = records[idx][0]
    fields: dict[int, GdsRecord] = {}
    raw = [opener]
    j = idx + 1
    while j < len(records):
        off, rec = records[j]
        raw.append(rec)
        if rec.record_type == ENDEL:
            break
        if rec.record_type in fields:
            raise GdsError(f"duplicate {_NAMES.get(rec.record_type, '?')} in element", off)
        fields[rec.record_type] = rec
        j += 1
    else:
        raise GdsError("element without ENDEL", start_off)

    kind = opener.record_type
    if kind in (TEXT, NODE, BOX) or kind not in (BOUNDARY, PATH, SREF, AREF):
        return OpaqueElement(tuple(raw)), j + 1

    def need(rtype: int) -> GdsRecord:
        if rtype not in fields:
            raise GdsError(f"{_NAMES[kind]} element missing {_NAMES[rtype]}", start_off)
        return fields[rtype]

    if kind == BOUNDARY:
        el: Element = Boundary(layer=need(LAYER).int16s()[0],
                               datatype=need(DATATYPE).int16s()[0],
                               xy=_decode_points(need(XY)))
    elif kind == PATH:
        el = PathElement(
            layer=need(LAYER).int16s()[0],
            datatype=need(DATATYPE).int16s()[0],
            xy=_decode_points(need(XY)),
            width=fields[WIDTH].int32s()[0] if WIDTH in fields else None,
            pathtype=fields[PATHTYPE].int16s()[0] if PATHTYPE in fields else None,
        )
    elif kind == SREF:
        pts = _decode_points(need(XY))
        if len(pts) != 1:
            raise GdsError("SREF XY must hold exactly one point", start_off)
        el = Sref(cell=need(SNAME).ascii(), origin=pts[0],
                  strans_raw=fields[STRANS].payload if STRANS in fields else None,
                  mag_raw=fields[MAG].payload if MAG in fields else None,
                  angle_raw=fields[ANGLE].payload if ANGLE in fields else None)
    else:  # AREF
        pts = _decode_points(need(XY))
        if len(pts) != 3:
            raise GdsError("AREF XY must hold exactly three points", start_off)
        cols, rows = need(COLROW).int16s()
        el = Aref(cell=need(SNAME).ascii(), cols=cols, rows=rows,
                  xy=(pts[0], pts[1], pts[2]),
                  strans_raw=fields[STRANS].payload if STRANS in fields else None,
                  mag_raw=fields[MAG].payload if MAG in fields else None,
                  angle_raw=fields[ANGLE].payload if ANGLE in fields else None)
    return el, j + 1


def read_gds(data: bytes) -> GdsLibrary:
    records = list(iter_records(data))
    if not records or records[0][1].record_type != HEADER:
        raise GdsError("stream does not begin with HEADER record", 0)

    header_raw = records[0][1].payload
    bgnlib_raw = None
    name = None
    units_raw = None
    cells: list[GdsCell] = []
    extras: list[tuple[int, GdsRecord]] = []
    saw_endlib = False

    i = 1
    while i < len(records):
        off, rec = records[i]
        rt = rec.record_type
        if rt == BGNLIB:
            bgnlib_raw = rec.payload
            i += 1
        elif rt == LIBNAME:
            name = rec.ascii()
            i += 1
        elif rt == UNITS:
            if len(rec.payload) != 16:
                raise GdsError("UNITS payload must be two real64 values", off)
            units_raw = rec.payload
            i += 1
        elif rt == BGNSTR:
            cell, i = _parse_cell(records, i)
            if any(c.name == cell.name for c in cells):
                raise GdsError(f"duplicate cell name {cell.name!r}", off)
            cells.append(cell)
        elif rt == ENDLIB:
            saw_endlib = True
            i += 1
            break
        else:
            extras.append((len(cells), rec))
            i += 1

    if not saw_endlib:
        raise GdsError("missing ENDLIB", len(data))
    if units_raw is None:
        raise GdsError("missing UNITS record")
    if bgnlib_raw is None:
        raise GdsError("missing BGNLIB record")

    lib = GdsLibrary(name=name if name is not None else "",
                     units_raw=units_raw, header_raw=header_raw,
                     bgnlib_raw=bgnlib_raw, cells=cells, extras=extras)
    _check_references(lib)
    return lib


def _parse_cell(records: list[tuple[int, GdsRecord]], idx: int) -> tuple[GdsCell, int]:
    start_off, bgn = records[idx][0], records[idx][1]
    i = idx + 1
    if i >= len(records) or records[i][1].record_type != STRNAME:
        raise GdsError("BGNSTR not followed by STRNAME", start_off)
    name = records[i][1].ascii()
    cell = GdsCell(name=name, bgnstr_raw=bgn.payload)
    i += 1
    while i < len(records):
        off, rec = records[i]
        rt = rec.record_type
        if rt == ENDSTR:
            return cell, i + 1
        if rt in _ELEMENT_OPENERS:
            el, i = _parse_element(rec, records, i)
            cell.elements.append(el)
        else:
            cell.elements.append(OpaqueElement((rec,)))
            i += 1
    raise GdsError(f"cell {name!r} without ENDSTR", start_off)


def _check_references(lib: GdsLibrary) -> None:
    cmap = lib.cell_map()
    for cell in lib.cells:
        for ref in cell.references:
            if ref.cell not in cmap:
                raise GdsError(f"cell {cell.name!r} references undefined cell "
                               f"{ref.cell!r}")
    # Cycle detection over the reference DAG.
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(name: str, stack: list[str]) -> None:
        if state.get(name) == 1:
            return
        if state.get(name) == 0:
            cyc = stack[stack.index(name):] + [name]
            raise GdsError("reference cycle: " + " -> ".join(cyc))
        state[name] = 0
        stack.append(name)
        for ref in cmap[name].references:
            visit(ref.cell, stack)
        stack.pop()
        state[name] = 1

    for cell in lib.cells:
        visit(cell.name, [])


# ---------------------------------------------------------------------------
# Writer


def write_gds(lib: GdsLibrary) -> bytes:
    out = bytearray()
    out += GdsRecord(HEADER, 2, lib.header_raw).encode()
    out += GdsRecord(BGNLIB, 2, lib.bgnlib_raw).encode()
    out += GdsRecord(LIBNAME, 6, _encode_name(lib.name)).encode()
    out += GdsRecord(UNITS, 5, lib.units_raw).encode()

    extras_by_pos: dict[int, list[GdsRecord]] = {}
    for pos, rec in lib.extras:
        extras_by_pos.setdefault(pos, []).append(rec)

    for pos in range(len(lib.cells) + 1):
        for rec in extras_by_pos.get(pos, []):
            out += rec.encode()
        if pos == len(lib.cells):
            break
        cell = lib.cells[pos]
        if len(cell.name) > MAX_NAME_LEN:
            raise GdsError(f"cell name {cell.name!r} exceeds {MAX_NAME_LEN} chars")
        out += GdsRecord(BGNSTR, 2, cell.bgnstr_raw).encode()
        out += GdsRecord(STRNAME, 6, _encode_name(cell.name)).encode()
        for el in cell.elements:
            if isinstance(el, (Sref, Aref)) and len(el.cell) > MAX_NAME_LEN:
                raise GdsError(f"referenced cell name {el.cell!r} exceeds "
                               f"{MAX_NAME_LEN} chars")
            for rec in el.records():
                out += rec.encode()
        out += GdsRecord(ENDSTR, 0, b"").encode()
    out += GdsRecord(ENDLIB, 0, b"").encode()
    return bytes(out)


# ---------------------------------------------------------------------------
# Flattening


@dataclass(frozen=True)
class _Xform:
    # x' = a*x + b*y + dx ; y' = c*x + d*y + dy
    a: int
    b: int
    c: int
    d: int
    dx: int
    dy: int

    def apply(self, p: Point) -> Point:
        return Point(self.a * p.x + self.b * p.y + self.dx,
                     self.c * p.x + self.d * p.y + self.dy)

    def compose(self, inner: "_Xform") -> "_Xform":
        """self applied after inner."""
        return _Xform(
            a=self.a * inner.a + self.b * inner.c,
            b=self.a * inner.b + self.b * inner.d,
            c=self.c * inner.a + self.d * inner.c,
            d=self.c * inner.b + self.d * inner.d,
            dx=self.a * inner.dx + self.b * inner.dy + self.dx,
            dy=self.c * inner.dx + self.d * inner.dy + self.dy,
        )


_IDENTITY = _Xform(1, 0, 0, 1, 0, 0)
_ROT = {0: (1, 0, 0, 1), 90: (0, -1, 1, 0), 180: (-1, 0, 0, -1), 270: (0, 1, -1, 0)}


def _ref_xform(ref: Sref | Aref, origin: Point) -> _Xform:
    if ref.mag_raw is not None and ref.magnification != 1.0:
        raise GdsError(f"non-unit magnification {ref.magnification} on reference "
                       f"to {ref.cell!r} is not supported")
    angle = ref.angle_degrees % 360.0
    if angle not in (0.0, 90.0, 180.0, 270.0):
        raise GdsError(f"rotation {angle} not in 0/90/180/270 on reference "
                       f"to {ref.cell!r}")
    a, b, c, d = _ROT[int(angle)]
    if ref.reflect:
        # Reflect about the x axis first, then rotate.
        b, d = -b, -d
    return _Xform(a, b, c, d, origin.x, origin.y)


def _aref_origins(ref: Aref) -> list[Point]:
    p0, p1, p2 = ref.xy
    if ref.cols <= 0 or ref.rows <= 0:
        raise GdsError(f"AREF to {ref.cell!r} with non-positive COLROW")
    cdx, cdy = p1.x - p0.x, p1.y - p0.y
    rdx, rdy = p2.x - p0.x, p2.y - p0.y
    if cdx % ref.cols or cdy % ref.cols or rdx % ref.rows or rdy % ref.rows:
        raise GdsError(f"AREF to {ref.cell!r} pitch does not divide evenly")
    cstep = (cdx // ref.cols, cdy // ref.cols)
    rstep = (rdx // ref.rows, rdy // ref.rows)
    return [Point(p0.x + i * cstep[0] + j * rstep[0],
                  p0.y + i * cstep[1] + j * rstep[1])
            for j in range(ref.rows) for i in range(ref.cols)]


def flatten(lib: GdsLibrary, top: str) -> FlatGeometry:
    """Flatten `top` into per-(layer, datatype) polygons.

    Applies reflect, then rotate, then translate per reference, composed
    down the tree. Paths become flush-ended rectangles. Opaque elements
    carry no interpretable geometry and are skipped.
    """
    cmap = lib.cell_map()
    if top not in cmap:
        raise GdsError(f"top cell {top!r} not in library")
    _check_references(lib)

    out: dict[tuple[int, int], list[Polygon]] = {}

    def emit(cell: GdsCell, xf: _Xform) -> None:
        for el in cell.elements:
            if isinstance(el, Boundary):
                poly = el.polygon()
                out.setdefault((el.layer, el.datatype), []).append(
                    Polygon([xf.apply(p) for p in poly.vertices]))
            elif isinstance(el, PathElement):
                for rect in el.rects():
                    corners = [xf.apply(rect.lo),
                               xf.apply(Point(rect.hi.x, rect.lo.y)),
                               xf.apply(rect.hi),
                               xf.apply(Point(rect.lo.x, rect.hi.y))]
                    out.setdefault((el.layer, el.datatype), []).append(
                        Polygon(corners))
            elif isinstance(el, Sref):
                emit(cmap[el.cell], xf.compose(_ref_xform(el, el.origin)))
            elif isinstance(el, Aref):
                for origin in _aref_origins(el):
                    emit(cmap[el.cell], xf.compose(_ref_xform(el, origin)))

    emit(cmap[top], _IDENTITY)
    return FlatGeometry(out)
