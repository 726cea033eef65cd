"""Structural gate-level netlist parsing and critical-signal fan-in tracing.

The supported subset is what post-layout netlists actually contain: a module
header, scalar/vector input/output/wire declarations, cell instances with
named port connections, and `assign a = b;` aliases. Vectors are expanded
to per-bit nets (`name[i]`). Behavioral constructs are rejected.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field


class NetlistParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# Port directions for a generic gate library; `clk` pins are inputs that
# fan-in tracing must not pass through.
BUILTIN_DIRECTIONS: dict[str, dict[str, str]] = {
    "INV": {"A": "in", "Y": "out"},
    "BUF": {"A": "in", "Y": "out"},
    "NAND2": {"A": "in", "B": "in", "Y": "out"},
    "NAND3": {"A": "in", "B": "in", "C": "in", "Y": "out"},
    "NOR2": {"A": "in", "B": "in", "Y": "out"},
    "NOR3": {"A": "in", "B": "in", "C": "in", "Y": "out"},
    "AND2": {"A": "in", "B": "in", "Y": "out"},
    "OR2": {"A": "in", "B": "in", "Y": "out"},
    "XOR2": {"A": "in", "B": "in", "Y": "out"},
    "MUX2": {"A": "in", "B": "in", "S": "in", "Y": "out"},
    "DFF": {"D": "in", "CLK": "clk", "Q": "out"},
    "TIELO": {"Y": "out"},
    "TIEHI": {"Y": "out"},
}

_SIZED_SUFFIX = re.compile(r"^(?P<base>[A-Za-z0-9]+?)X\d+$")

_BEHAVIORAL = {"always", "initial", "if", "else", "case", "casex", "casez",
               "for", "while", "repeat", "forever", "reg", "integer", "real",
               "function", "task"}

_CONSTANT = re.compile(r"^\d+'[bBdDhHoO][0-9a-fA-FxXzZ_]+$")


def port_directions(cell_type: str,
                    extra: dict[str, dict[str, str]] | None = None
                    ) -> dict[str, str] | None:
    """Direction table for a cell type; sized variants (e.g. INVX2) fall
    back to their base entry."""
    if extra and cell_type in extra:
        return extra[cell_type]
    if cell_type in BUILTIN_DIRECTIONS:
        return BUILTIN_DIRECTIONS[cell_type]
    m = _SIZED_SUFFIX.match(cell_type)
    if m:
        base = m.group("base")
        if extra and base in extra:
            return extra[base]
        if base in BUILTIN_DIRECTIONS:
            return BUILTIN_DIRECTIONS[base]
    return None


def parse_direction_file(text: str) -> dict[str, dict[str, str]]:
    """Lines of `<cellType> <port>:<in|out|clk> ...`; `#` comments."""
    table: dict[str, dict[str, str]] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        ports: dict[str, str] = {}
        for spec in fields[1:]:
            if ":" not in spec:
                raise NetlistParseError(f"malformed port spec {spec!r}", ln)
            port, kind = spec.split(":", 1)
            if kind not in ("in", "out", "clk"):
                raise NetlistParseError(f"bad port kind {kind!r}", ln)
            ports[port] = kind
        table[fields[0]] = ports
    return table


@dataclass
class Cell:
    name: str
    ctype: str
    ports: dict[str, tuple[str, ...]]
    directions: dict[str, str]

    def input_bits(self) -> list[str]:
        out = []
        for port, bits in self.ports.items():
            if self.directions.get(port) == "in":
                out.extend(bits)
        return out


@dataclass
class NetGraph:
    module: str
    cells: list[Cell]
    nets: list[str]
    # net -> ("cell", Cell) or ("alias", source bits)
    driver: dict[str, tuple] = field(default_factory=dict)

    def net_set(self) -> set[str]:
        return set(self.nets)


class _Tok:
    def __init__(self, text: str):
        self.toks: list[tuple[str, int]] = []
        text = re.sub(r"/\*.*?\*/", lambda m: "\n" * m.group(0).count("\n"),
                      text, flags=re.S)
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("//", 1)[0]
            for pat in re.finditer(r"\d+'[bBdDhHoO][0-9a-zA-Z_]+"
                                   r"|[A-Za-z_\\][A-Za-z0-9_$]*"
                                   r"|\[|\]|[(){},;:=.]|\S", line):
                self.toks.append((pat.group(0), ln))
        self.i = 0

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
            raise NetlistParseError("unexpected end of netlist")
        tok, _ = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok != value:
            raise NetlistParseError(f"expected {value!r}, got {tok!r}", self.line)


def _expand_decl(name: str, rng: tuple[int, int] | None) -> list[str]:
    if rng is None:
        return [name]
    msb, lsb = rng
    step = -1 if msb >= lsb else 1
    return [f"{name}[{i}]" for i in range(msb, lsb + step, step)]


def parse_netlist(text: str,
                  directions: dict[str, dict[str, str]] | None = None
                  ) -> NetGraph:
    tk = _Tok(text)
    tk.expect("module")
    module = tk.next()
    if tk.peek() == "(":
        depth = 0
        while True:
            tok = tk.next()
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0:
                    break
    tk.expect(";")

    declared: dict[str, tuple[int, int] | None] = {}
    nets: list[str] = []
    cells: list[Cell] = []
    driver: dict[str, tuple] = {}
    aliases: list[tuple[list[str], list[str], int]] = []

    def declare(name: str, rng: tuple[int, int] | None, line: int) -> None:
        if name in declared:
            # Port + wire double declaration is normal; ranges must agree.
            if declared[name] != rng:
                raise NetlistParseError(f"conflicting redeclaration of {name}", line)
            return
        declared[name] = rng
        nets.extend(_expand_decl(name, rng))

    def netref_bits(line: int) -> list[str]:
        tok = tk.next()
        if _CONSTANT.match(tok):
            m = re.match(r"^(\d+)'", tok)
            if int(m.group(1)) != 1 or tok[2].lower() != "b" or len(tok) != 4:
                raise NetlistParseError(
                    f"only 1-bit constants supported, got {tok!r}", line)
            const = f"const{tok[3]}"
            if const not in declared:
                declare(const, None, line)
            return [const]
        if not re.match(r"^[A-Za-z_\\]", tok):
            raise NetlistParseError("behavioral construct unsupported: "
                                    f"expression token {tok!r}", line)
        name = tok
        if name not in declared:
            raise NetlistParseError(f"undeclared net {name!r}", line)
        if tk.peek() == "[":
            tk.next()
            hi = int(tk.next())
            if tk.peek() == ":":
                tk.next()
                lo = int(tk.next())
                tk.expect("]")
                if declared[name] is None:
                    raise NetlistParseError(f"part-select on scalar {name}", line)
                step = -1 if hi >= lo else 1
                return [f"{name}[{i}]" for i in range(hi, lo + step, step)]
            tk.expect("]")
            if declared[name] is None:
                raise NetlistParseError(f"bit-select on scalar {name}", line)
            return [f"{name}[{hi}]"]
        return _expand_decl(name, declared[name])

    while not tk.at_end():
        tok = tk.next()
        line = tk.line
        if tok == "endmodule":
            break
        if tok in _BEHAVIORAL:
            raise NetlistParseError("behavioral construct unsupported", line)
        if tok in ("input", "output", "inout", "wire"):
            rng = None
            if tk.peek() == "[":
                tk.next()
                msb = int(tk.next())
                tk.expect(":")
                lsb = int(tk.next())
                tk.expect("]")
                rng = (msb, lsb)
            while True:
                declare(tk.next(), rng, line)
                if tk.peek() == ",":
                    tk.next()
                    continue
                tk.expect(";")
                break
        elif tok == "assign":
            lhs = netref_bits(line)
            tk.expect("=")
            rhs = netref_bits(line)
            nxt = tk.next()
            if nxt != ";":
                raise NetlistParseError("behavioral construct unsupported: "
                                        f"expression near {nxt!r}", line)
            if len(lhs) != len(rhs):
                raise NetlistParseError(
                    f"assign width mismatch {len(lhs)} vs {len(rhs)}", line)
            aliases.append((lhs, rhs, line))
        else:
            cell_type = tok
            inst = tk.next()
            dirs = port_directions(cell_type, directions)
            if dirs is None:
                raise NetlistParseError(
                    f"unknown cell type {cell_type!r}: no direction entry", line)
            tk.expect("(")
            ports: dict[str, tuple[str, ...]] = {}
            while True:
                tk.expect(".")
                port = tk.next()
                tk.expect("(")
                bits = netref_bits(line)
                tk.expect(")")
                if port not in dirs:
                    raise NetlistParseError(
                        f"cell {cell_type} has no port {port}", line)
                if len(bits) != 1:
                    raise NetlistParseError(
                        f"port {port} of {inst} connected to {len(bits)} bits", line)
                ports[port] = tuple(bits)
                if tk.peek() == ",":
                    tk.next()
                    continue
                break
            tk.expect(")")
            tk.expect(";")
            cell = Cell(name=inst, ctype=cell_type, ports=ports, directions=dirs)
            cells.append(cell)
            for port, bits in ports.items():
                if dirs.get(port) == "out":
                    for bit in bits:
                        if bit in driver:
                            raise NetlistParseError(
                                f"net {bit} has multiple drivers", line)
                        driver[bit] = ("cell", cell)

    for lhs, rhs, line in aliases:
        for lbit, rbit in zip(lhs, rhs):
            if lbit in driver:
                raise NetlistParseError(f"net {lbit} has multiple drivers", line)
            driver[lbit] = ("alias", (rbit,))

    return NetGraph(module=module, cells=cells, nets=nets, driver=driver)


@dataclass(frozen=True)
class TraceConfig:
    root_prefix: str = "sec_"
    depth: int = 2

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError("trace depth must be >= 0")


@dataclass
class CriticalSet:
    roots: tuple[str, ...]
    members: dict[str, int]
    edges: tuple[tuple[str, str], ...]  # (source net, influenced net)
    subtrees: dict[str, frozenset[str]]

    def sorted_members(self) -> list[tuple[str, int]]:
        return sorted(self.members.items())


def find_roots(g: NetGraph, prefix: str) -> list[str]:
    return sorted(n for n in g.nets if n.startswith(prefix))


def _trace_from(g: NetGraph, root: str, depth: int
                ) -> tuple[dict[str, int], set[tuple[str, str]]]:
    dist = {root: 0}
    edges: set[tuple[str, str]] = set()
    dq = deque([root])
    while dq:
        net = dq.popleft()
        d = dist[net]
        drv = g.driver.get(net)
        if drv is None:
            continue
        if drv[0] == "alias":
            for src in drv[1]:
                edges.add((src, net))
                if src not in dist or dist[src] > d:
                    dist[src] = d
                    dq.appendleft(src)
        else:
            if d >= depth:
                continue
            cell: Cell = drv[1]
            for src in cell.input_bits():
                edges.add((src, net))
                if src not in dist or dist[src] > d + 1:
                    dist[src] = d + 1
                    dq.append(src)
    return dist, edges


def trace_fanin(g: NetGraph, cfg: TraceConfig) -> CriticalSet:
    """Backward breadth-first fan-in from every prefix-flagged root.

    Alias (assign) edges cost nothing; stepping through a driving cell to
    its data inputs costs one level. Clock pins are never traversed.
    """
    roots = find_roots(g, cfg.root_prefix)
    members: dict[str, int] = {}
    edges: set[tuple[str, str]] = set()
    subtrees: dict[str, frozenset[str]] = {}
    for root in roots:
        dist, e = _trace_from(g, root, cfg.depth)
        edges |= e
        subtrees[root] = frozenset(dist)
        for net, d in dist.items():
            if net not in members or members[net] > d:
                members[net] = d
    return CriticalSet(roots=tuple(roots), members=members,
                       edges=tuple(sorted(edges)), subtrees=subtrees)


def emit_dot(cs: CriticalSet, g: NetGraph) -> str:
    """Deterministic Graphviz dot text for a traced critical set."""
    lines = ["digraph fanin {"]
    for net, depth in cs.sorted_members():
        lines.append(f'  "{net}" [label="{net}\\ndepth={depth}"];')
    for src, dst in cs.edges:
        lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
