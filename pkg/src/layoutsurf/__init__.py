"""layoutsurf: attack-surface metrics for placed-and-routed IC layouts.

The package ingests a layout (LEF + DEF, optionally cross-checked against
GDSII), identifies security-critical nets from a gate-level netlist, and
computes three quantitative metrics over the physical design:

* open placement regions (contiguous 4-connected open sites),
* blockage around critical nets (same-layer perimeter, adjacent-layer area),
* routing distance from open regions to unblocked attachment points,

plus per-attack viability counts derived from those metrics.
"""

__version__ = "0.1.0"
