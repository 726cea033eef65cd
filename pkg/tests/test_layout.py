from __future__ import annotations

from fractions import Fraction
from random import Random

import pytest

from layoutsurf.gdsii import GdsLibrary, flatten
from layoutsurf.geom import Point, Rect
from layoutsurf.layout import (
    EMPTY,
    FILLER,
    OCCUPIED,
    AttackParseError,
    LayoutError,
    build_layout,
    crosscheck_gds,
    parse_attacks,
    transform_macro_rect,
)
from layoutsurf.lefdef import parse_def, parse_layermap, parse_lef
from layoutsurf.netlist import TraceConfig, parse_netlist, trace_fanin

LEF = """
UNITS
  DATABASE MICRONS 1000 ;
END UNITS
LAYER metal1
  TYPE ROUTING ;
  DIRECTION HORIZONTAL ;
  PITCH 0.2 ;
  WIDTH 0.1 ;
  SPACING 0.1 ;
END metal1
LAYER via1
  TYPE CUT ;
END via1
LAYER metal2
  TYPE ROUTING ;
  DIRECTION VERTICAL ;
  PITCH 0.2 ;
  WIDTH 0.1 ;
  SPACING 0.1 ;
END metal2
VIA via1_min DEFAULT
  LAYER via1 ;
    RECT -0.05 -0.05 0.05 0.05 ;
END via1_min
SITE core
  SIZE 0.1 BY 1.0 ;
END core
MACRO INVX1
  SIZE 0.4 BY 1.0 ;
  SITE core ;
  PIN A
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.05 0.1 0.15 0.2 ;
    END
  END A
  PIN Y
    DIRECTION OUTPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.25 0.1 0.35 0.2 ;
    END
  END Y
END INVX1
MACRO FILL1
  SIZE 0.1 BY 1.0 ;
  SITE core ;
END FILL1
MACRO TALL2
  SIZE 0.2 BY 2.0 ;
  SITE core ;
END TALL2
END LIBRARY
"""

DEF_HEAD = """VERSION 5.8 ;
DESIGN demo ;
UNITS DISTANCE MICRONS 1000 ;
DIEAREA ( 0 0 ) ( 1000 2000 ) ;
ROW r0 core 0 0 N DO 10 BY 1 STEP 100 0 ;
ROW r1 core 0 1000 N DO 10 BY 1 STEP 100 0 ;
"""

NETLIST = """
module demo (a);
  input a;
  wire sec_supv;
  INVX1 u1 (.A(a), .Y(sec_supv));
endmodule
"""


def make_def(components: list[str], nets: list[str]) -> str:
    body = [DEF_HEAD]
    body.append(f"COMPONENTS {len(components)} ;")
    body.extend(components)
    body.append("END COMPONENTS")
    body.append(f"NETS {len(nets)} ;")
    body.extend(nets)
    body.append("END NETS")
    body.append("END DESIGN")
    return "\n".join(body) + "\n"


def critical_for(netlist_text: str, depth: int = 2):
    g = parse_netlist(netlist_text)
    return trace_fanin(g, TraceConfig(root_prefix="sec_", depth=depth))


def build(components: list[str], nets: list[str], netlist: str = NETLIST):
    lef = parse_lef(LEF)
    fp = parse_def(make_def(components, nets), lef)
    return build_layout(lef, fp, critical_for(netlist))


class TestGrid:
    def test_single_cell_occupancy(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
                   ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        states = [db.grid.state(c, 0) for c in range(10)]
        assert states == [EMPTY, EMPTY, OCCUPIED, OCCUPIED, OCCUPIED, OCCUPIED,
                          EMPTY, EMPTY, EMPTY, EMPTY]

    def test_filler_state(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;",
                    "- f0 FILL1 + PLACED ( 0 0 ) N ;"],
                   ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        assert db.grid.state(0, 0) == FILLER

    def test_occupancy_conservation(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;",
                    "- f0 FILL1 + PLACED ( 0 0 ) N ;",
                    "- t0 TALL2 + PLACED ( 800 0 ) N ;"],
                   ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        empty, filler, occupied = db.grid.counts()
        assert empty + filler + occupied == 20
        assert occupied == 4 + 4  # INVX1 plus TALL2 (2 cols x 2 rows)

    def test_multi_row_macro_spans_rows(self):
        db = build(["- t0 TALL2 + PLACED ( 800 0 ) N ;"],
                   ["- sec_supv + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        assert db.grid.state(8, 0) == OCCUPIED
        assert db.grid.state(9, 1) == OCCUPIED
        assert db.grid.state(7, 1) == EMPTY

    def test_overlap_error_names_both(self):
        with pytest.raises(LayoutError, match="u1.*u2|u2.*u1"):
            build(["- u1 INVX1 + PLACED ( 200 0 ) N ;",
                   "- u2 INVX1 + PLACED ( 300 0 ) N ;"],
                  ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])

    def test_off_grid_placement(self):
        with pytest.raises(LayoutError, match="off the site grid"):
            build(["- u1 INVX1 + PLACED ( 250 0 ) N ;"],
                  ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])

    def test_component_order_independence(self):
        comps = ["- u1 INVX1 + PLACED ( 200 0 ) N ;",
                 "- f0 FILL1 + PLACED ( 0 0 ) N ;",
                 "- t0 TALL2 + PLACED ( 800 0 ) N ;"]
        nets = ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"]
        rng = Random(1)
        base = build(comps, nets)
        for _ in range(3):
            rng.shuffle(comps)
            other = build(comps, nets)
            assert other.grid.occupancy == base.grid.occupancy
            assert [(s.layer, s.rect, s.owner) for s in other.shapes.shapes] == \
                   [(s.layer, s.rect, s.owner) for s in base.shapes.shapes]


class TestShapes:
    def test_net_geometry_from_def(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
                   ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        assert db.critical_present == ["sec_supv"]
        rects = db.net_rects("sec_supv")
        assert rects == [("metal2", Rect(Point(300, 100), Point(400, 900)))]

    def test_unmatched_critical_net_warns(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
                   ["- other ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        assert "sec_supv" in db.unmatched
        assert any("sec_supv" in w for w in db.warnings)

    def test_connected_pin_owned_by_net(self):
        db = build(["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
                   ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])
        # Y pin rect (0.25,0.1)-(0.35,0.2) at (200,0): (450,100)-(550,200)
        owners = {(s.rect, s.owner) for s in db.shapes.shapes if s.layer == "metal1"}
        assert (Rect(Point(450, 100), Point(550, 200)), "sec_supv") in owners
        assert (Rect(Point(250, 100), Point(350, 200)), "inst:u1") in owners

    def test_via_shapes_placed(self):
        db = build(
            ["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
            ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) via1_min ;"])
        rects = db.net_rects("sec_supv")
        assert ("via1", Rect(Point(300, 850), Point(400, 950))) in rects


class TestOrientations:
    # Local rect (1,2)-(3,5) in a 10x20 macro, placed at origin.
    CASES = {
        "N": (1, 2, 3, 5),
        "S": (7, 15, 9, 18),
        "W": (15, 1, 18, 3),
        "E": (2, 7, 5, 9),
        "FN": (7, 2, 9, 5),
        "FS": (1, 15, 3, 18),
        "FW": (2, 1, 5, 3),
        "FE": (15, 7, 18, 9),
    }

    @pytest.mark.parametrize("orient", sorted(CASES))
    def test_orientation_table(self, orient):
        rect = Rect(Point(1, 2), Point(3, 5))
        got = transform_macro_rect(rect, orient, 10, 20, Point(0, 0))
        assert got == Rect.from_coords(*self.CASES[orient])

    @pytest.mark.parametrize("orient", sorted(CASES))
    def test_orientation_stays_in_box(self, orient):
        rect = Rect(Point(1, 2), Point(3, 5))
        got = transform_macro_rect(rect, orient, 10, 20, Point(0, 0))
        w, h = (20, 10) if orient in ("E", "W", "FE", "FW") else (10, 20)
        assert 0 <= got.lo.x <= got.hi.x <= w
        assert 0 <= got.lo.y <= got.hi.y <= h
        assert got.area == rect.area


ATTACKS = """attack A2-Analog
cells 2
sites 20
timing_critical false
targets sec_supv

attack Key-Leak
cells 187
sites 2553
timing_critical true
"""


class TestAttacks:
    def test_table_values(self):
        specs = parse_attacks(ATTACKS)
        assert specs[0].name == "A2-Analog"
        assert (specs[0].std_cells, specs[0].placement_sites) == (2, 20)
        assert specs[0].timing_critical is False
        assert specs[0].target_nets == ("sec_supv",)
        assert (specs[1].std_cells, specs[1].placement_sites) == (187, 2553)
        assert specs[1].timing_critical is True
        assert specs[1].target_nets == ()

    def test_empty_file(self):
        assert parse_attacks("") == []
        assert parse_attacks("# only a comment\n\n") == []

    def test_missing_key(self):
        with pytest.raises(AttackParseError, match="A2-Analog.*sites|missing"):
            parse_attacks("attack A2-Analog\ncells 2\ntiming_critical false\n")

    def test_sites_vs_cells_invariant(self):
        with pytest.raises(AttackParseError, match="sites >= cells"):
            parse_attacks("attack X\ncells 30\nsites 20\ntiming_critical false\n")


LAYERMAP = "metal1 drawing 10 0\nvia1 drawing 11 0\nmetal2 drawing 12 0\n"


def gds_from_db(db) -> GdsLibrary:
    lm = parse_layermap(LAYERMAP).as_dict()
    lib = GdsLibrary.new("XCHK", 1000)
    top = lib.add_cell("TOP")
    for shape in db.shapes.shapes:
        gl, gd = lm[shape.layer]
        top.add_rect(gl, gd, shape.rect)
    return lib


class TestCrosscheck:
    def build_db(self):
        return build(
            ["- u1 INVX1 + PLACED ( 200 0 ) N ;"],
            ["- sec_supv ( u1 Y ) + ROUTED metal2 ( 350 100 ) ( 350 900 ) ;"])

    def test_self_consistency(self):
        db = self.build_db()
        flat = flatten(gds_from_db(db), "TOP")
        report = crosscheck_gds(db, flat, parse_layermap(LAYERMAP))
        assert report.ok
        for layer in report.layers:
            assert layer.fraction == 0

    def test_missing_segment_detected(self):
        db = self.build_db()
        lib = gds_from_db(db)
        # Drop the lone metal2 boundary (layer 12).
        top = lib.cells[0]
        top.elements = [e for e in top.elements if e.layer != 12]
        report = crosscheck_gds(db, flatten(lib, "TOP"), parse_layermap(LAYERMAP))
        m2 = next(l for l in report.layers if l.layer == "metal2")
        assert m2.only_def == 100 * 800
        assert not m2.ok
        assert not report.ok

    def test_empty_map(self):
        db = self.build_db()
        flat = flatten(gds_from_db(db), "TOP")
        report = crosscheck_gds(db, flat, parse_layermap("# none\n"))
        assert report.layers == []
        assert report.ok

    def test_layer_absent_everywhere_warns(self):
        db = self.build_db()
        flat = flatten(gds_from_db(db), "TOP")
        lm = parse_layermap(LAYERMAP + "metal9 drawing 99 0\n")
        report = crosscheck_gds(db, flat, lm)
        assert any("metal9" in w for w in report.warnings)

    def test_epsilon_tolerates_small_delta(self):
        db = self.build_db()
        lib = gds_from_db(db)
        lib.cells[0].add_rect(12, 0, Rect(Point(0, 1900), Point(20, 1910)))
        report = crosscheck_gds(db, flatten(lib, "TOP"),
                                parse_layermap(LAYERMAP),
                                epsilon=Fraction(1, 100))
        m2 = next(l for l in report.layers if l.layer == "metal2")
        assert m2.only_gds == 200
        assert m2.ok  # 200 / 80200 < 1%
