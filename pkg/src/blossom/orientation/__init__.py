"""
Orientation Component

Fractional orientations of plane maps. A k-fractional orientation gives
every dart a non-negative value, the two darts of an edge summing to k; the
outdegree of a vertex is the sum over its darts. Orientations are solved,
minimized and compared against exhaustive oracles here.

Key responsibilities:
- alpha_d, alpha_{d,k}^-/+ , quasi-Eulerian and Eulerian outdegree targets
- Accessibility and quasi-accessibility by reverse reachability
- Counterclockwise forward cycles and minimization by unit pushes
- Max-flow construction of alpha_{d,k}^-/+ orientations (networkx)
- Cut enumeration, minimum cuts and trumpet/cornet classification
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from ..planar_map import Color, PlaneMap, check_budget

logger = logging.getLogger(__name__)

# Exhaustive cut enumeration is limited to this many vertices.
MAX_CUT_VERTICES = 12


class OrientationError(ValueError):
    """Raised on invalid orientations or violated preconditions."""


@dataclass(frozen=True)
class FractionalOrientation:
    k: int
    values: Tuple[int, ...]

    def __getitem__(self, h: int) -> int:
        return self.values[h]

    def __len__(self) -> int:
        return len(self.values)

    def pushed(self, alpha: Sequence[int], cycle: Sequence[int]) -> "FractionalOrientation":
        """One unit of flow moved backwards around a forward cycle."""
        values = list(self.values)
        for h in cycle:
            values[h] -= 1
            values[alpha[h]] += 1
        return FractionalOrientation(self.k, tuple(values))


class TargetKind(Enum):
    ALPHA_D = "alpha_d"
    ALPHA_DK_MINUS = "alpha_dk_minus"
    ALPHA_DK_PLUS = "alpha_dk_plus"
    QUASI_EULERIAN = "quasi_eulerian"
    EULERIAN = "eulerian"


@dataclass(frozen=True)
class OutdegreeTarget:
    kind: TargetKind
    d: int = 1
    kk: int = 0
    rho: int = 0
    tau: Optional[int] = None

    @property
    def fractionality(self) -> int:
        if self.kind is TargetKind.QUASI_EULERIAN:
            return 2
        if self.kind is TargetKind.EULERIAN:
            return 1
        return self.d + 1

    def value(self, m: PlaneMap, v: int) -> int:
        deg = m.degree(v)
        if self.kind is TargetKind.QUASI_EULERIAN:
            return deg
        if self.kind is TargetKind.EULERIAN:
            return deg // 2
        base = self.d * deg if m.color(v) is Color.BLACK else deg
        if self.kind is TargetKind.ALPHA_DK_MINUS:
            return base - self.kk * (v == self.rho) + self.kk * (v == self.tau)
        if self.kind is TargetKind.ALPHA_DK_PLUS:
            return base + self.kk * (v == self.rho) - self.kk * (v == self.tau)
        return base


class Tightness(Enum):
    TRUMPET = "trumpet"
    CORNET = "cornet"
    NEITHER = "neither"


@dataclass(frozen=True)
class Cut:
    R: FrozenSet[int]
    S: FrozenSet[int]
    color: Optional[Color]
    weight: int


@dataclass
class MinCut:
    cut: Cut
    unique: bool
    minimal: List[Cut] = field(default_factory=list)


@dataclass
class TightnessVerdict:
    verdict: Tightness
    k: int
    witness: Optional[Cut] = None


# ----------------------------------------------------------------------
# Basic operations
# ----------------------------------------------------------------------

def validate(m: PlaneMap, o: FractionalOrientation) -> None:
    if len(o.values) != m.num_darts:
        raise OrientationError(f"{len(o.values)} values for {m.num_darts} darts")
    for h, g in m.edges():
        if o[h] < 0 or o[g] < 0:
            raise OrientationError(f"negative value on edge ({h}, {g})")
        if o[h] + o[g] != o.k:
            raise OrientationError(f"edge ({h}, {g}) sums to {o[h] + o[g]}, expected {o.k}")


def outdegrees(m: PlaneMap, o: FractionalOrientation) -> List[int]:
    return [sum(o[h] for h in cycle) for cycle in m.vertices]


def check_target(m: PlaneMap, o: FractionalOrientation, target: OutdegreeTarget) -> None:
    """Raise unless ``o`` is an orientation with exactly the target outdegrees."""
    validate(m, o)
    if o.k != target.fractionality:
        raise OrientationError(f"{o.k}-fractional orientation for a {target.kind.value} target")
    for v, out in enumerate(outdegrees(m, o)):
        if out != target.value(m, v):
            raise OrientationError(f"vertex {v} has outdegree {out}, target {target.value(m, v)}")


def initial_alpha_d(m: PlaneMap, d: int) -> FractionalOrientation:
    """Black darts d, white darts 1: every edge forward both ways."""
    if d < 1:
        raise OrientationError(f"d={d} is outside d >= 1")
    if not m.is_bipartite:
        raise OrientationError("alpha_d orientations need a bipartite map")
    values = tuple(d if m.dart_color(h) is Color.BLACK else 1 for h in range(m.num_darts))
    return FractionalOrientation(d + 1, values)


def forward_digraph(m: PlaneMap, o: FractionalOrientation) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(m.num_vertices))
    for h in range(m.num_darts):
        if o[h] > 0:
            graph.add_edge(m.vertex_of[h], m.vertex_of[m.alpha[h]])
    return graph


def is_accessible(m: PlaneMap, o: FractionalOrientation, target: Optional[int] = None,
                  except_vertex: Optional[int] = None) -> bool:
    """Every vertex (except ``except_vertex``) reaches ``target`` by forward edges.

    ``target`` defaults to the root vertex; passing the tau of a pointed
    map as ``except_vertex`` gives quasi-accessibility.
    """
    if m.num_darts == 0:
        return True
    root = m.root_vertex if target is None else target
    reaching = nx.ancestors(forward_digraph(m, o), root) | {root}
    missing = set(range(m.num_vertices)) - reaching - {except_vertex}
    return not missing


def has_accessible_outer_vertex(m: PlaneMap, o: FractionalOrientation) -> bool:
    """Unrooted convention: some outer-face vertex is reached from everywhere."""
    outer_vertices = {m.vertex_of[h] for h in m.outer_darts()} or {0}
    return any(is_accessible(m, o, target=v) for v in sorted(outer_vertices))


def saturated_edges(m: PlaneMap, o: FractionalOrientation) -> Set[Tuple[int, int]]:
    """Directed edges (tail dart, head dart) whose head dart carries 0."""
    return {(h, m.alpha[h]) for h in range(m.num_darts) if o[h] > 0 and o[m.alpha[h]] == 0}


# ----------------------------------------------------------------------
# Minimality
# ----------------------------------------------------------------------

def forward_cycles(m: PlaneMap, o: FractionalOrientation):
    """Simple forward cycles as dart lists, each listed once from its least dart."""
    out_darts: Dict[int, List[int]] = {v: [] for v in range(m.num_vertices)}
    for h in range(m.num_darts):
        if o[h] > 0:
            out_darts[m.vertex_of[h]].append(h)

    def extend(start: int, origin: int, path: List[int], visited: Set[int]):
        for h in out_darts[m.vertex_of[m.alpha[path[-1]]]]:
            if h <= start or m.alpha[h] in path:
                continue
            head = m.vertex_of[m.alpha[h]]
            if head == origin:
                yield path + [h]
            elif head not in visited:
                visited.add(head)
                yield from extend(start, origin, path + [h], visited)
                visited.discard(head)

    for start in range(m.num_darts):
        if o[start] <= 0:
            continue
        origin, head = m.vertex_of[start], m.vertex_of[m.alpha[start]]
        if head == origin:
            yield [start]
        else:
            yield from extend(start, origin, [start], {origin, head})


def left_faces(m: PlaneMap, cycle: Sequence[int]) -> Set[int]:
    """Faces on the left side of a simple cycle of darts."""
    blocked = set(cycle) | {m.alpha[h] for h in cycle}
    start = m.face_of[m.alpha[cycle[0]]]
    region = {start}
    frontier = [start]
    while frontier:
        f = frontier.pop()
        for h in m.faces[f]:
            if h in blocked:
                continue
            g = m.face_of[m.alpha[h]]
            if g not in region:
                region.add(g)
                frontier.append(g)
    return region


def is_counterclockwise(m: PlaneMap, cycle: Sequence[int]) -> bool:
    return m.outer_face not in left_faces(m, cycle)


def find_counterclockwise_cycle(m: PlaneMap, o: FractionalOrientation) -> Optional[List[int]]:
    for cycle in forward_cycles(m, o):
        if is_counterclockwise(m, cycle):
            return cycle
    return None


def minimize(m: PlaneMap, o: FractionalOrientation) -> FractionalOrientation:
    """Push flow around counterclockwise cycles until none remains."""
    validate(m, o)
    bound = 4 * o.k * max(m.num_edges, 1) ** 2
    pushes = 0
    while True:
        cycle = find_counterclockwise_cycle(m, o)
        if cycle is None:
            break
        pushes += 1
        if pushes > bound:
            raise OrientationError(f"minimize exceeded {bound} pushes")
        o = o.pushed(m.alpha, cycle)
    logger.debug(f"minimize: {pushes} pushes on a map with {m.num_edges} edges")
    return o


def minimal_alpha_d(m: PlaneMap, d: int) -> FractionalOrientation:
    """The unique minimal accessible alpha_d-orientation."""
    return minimize(m, initial_alpha_d(m, d))


def quasi_eulerian_minimal(m: PlaneMap) -> FractionalOrientation:
    """Minimal 2-fractional orientation with outdegree deg(v) everywhere."""
    return minimize(m, FractionalOrientation(2, tuple([1] * m.num_darts)))


def all_alpha_orientations(m: PlaneMap, target: OutdegreeTarget) -> List[FractionalOrientation]:
    """Every orientation meeting ``target``; exhaustive over edge values."""
    check_budget(m.num_edges, 6, "edges for orientation enumeration")
    k = target.fractionality
    edges = m.edges()
    wanted = [target.value(m, v) for v in range(m.num_vertices)]
    found = []
    for choice in product(range(k + 1), repeat=len(edges)):
        values = [0] * m.num_darts
        for (h, g), c in zip(edges, choice):
            values[h], values[g] = c, k - c
        o = FractionalOrientation(k, tuple(values))
        if outdegrees(m, o) == wanted:
            found.append(o)
    return found


# ----------------------------------------------------------------------
# Flows and cuts
# ----------------------------------------------------------------------

def flow_network(m: PlaneMap, d: int, source: int, sink: int) -> nx.DiGraph:
    """Two arcs per edge: white->black with capacity 1, black->white with d.

    Parallel edges are merged into one arc of summed capacity.
    """
    net = nx.DiGraph(source=source, sink=sink)
    net.add_nodes_from(range(m.num_vertices))
    for h, g in m.edges():
        w, b = m.vertex_of[m.white_dart(h)], m.vertex_of[m.alpha[m.white_dart(h)]]
        for tail, head, cap in ((w, b, 1), (b, w, d)):
            if net.has_edge(tail, head):
                net[tail][head]["capacity"] += cap
            else:
                net.add_edge(tail, head, capacity=cap)
    return net


def alpha_dk_orientation(m: PlaneMap, tau: int, d: int, k: int,
                         sign: str = "minus") -> Optional[FractionalOrientation]:
    """An alpha_{d,k}^sign orientation from a maximum flow, or None."""
    if not m.is_bipartite:
        raise OrientationError("alpha_{d,k} orientations need a bipartite map")
    if sign not in ("minus", "plus"):
        raise ValueError(f"Unknown sign: {sign}")
    rho = m.root_vertex
    if tau == rho:
        raise OrientationError("tau must differ from the root vertex")
    if m.degree(tau) != k:
        raise OrientationError(f"deg(tau)={m.degree(tau)} but k={k}")
    if not d >= k >= 1:
        raise OrientationError(f"need d >= k >= 1, got d={d}, k={k}")
    if max(m.degree(v) for v in range(m.num_vertices)) > d:
        raise OrientationError(f"maximum degree exceeds d={d}")

    source, sink = (rho, tau) if sign == "minus" else (tau, rho)
    net = flow_network(m, d, source, sink)
    # the feeding arc caps the flow value at k
    net.add_edge("feed", source, capacity=k)
    value, flow = nx.maximum_flow(net, "feed", sink, flow_func=edmonds_karp)
    if value < k:
        logger.debug(f"alpha_dk {sign}: max flow {value} < k={k}")
        return None

    # split net pair flows over the parallel edges, each within [-1, d]
    remaining: Dict[Tuple[int, int], int] = {}
    for h, g in m.edges():
        w, b = m.vertex_of[m.white_dart(h)], m.vertex_of[m.alpha[m.white_dart(h)]]
        if (w, b) not in remaining:
            remaining[(w, b)] = flow.get(b, {}).get(w, 0) - flow.get(w, {}).get(b, 0)
    values = [0] * m.num_darts
    for h, g in m.edges():
        hw = m.white_dart(h)
        key = (m.vertex_of[hw], m.vertex_of[m.alpha[hw]])
        net_flow = remaining[key]
        share = min(d, net_flow) if net_flow > 0 else max(-1, net_flow)
        remaining[key] -= share
        values[hw] = 1 + share
        values[m.alpha[hw]] = d - share
    o = FractionalOrientation(d + 1, tuple(values))
    kind = TargetKind.ALPHA_DK_MINUS if sign == "minus" else TargetKind.ALPHA_DK_PLUS
    check_target(m, o, OutdegreeTarget(kind, d, k, rho, tau))
    return o


def cut_of(m: PlaneMap, S: FrozenSet[int]) -> Cut:
    R = frozenset(range(m.num_vertices)) - S
    weight = 0
    s_colors = set()
    for h, g in m.edges():
        a, b = m.vertex_of[h], m.vertex_of[g]
        if (a in S) != (b in S):
            weight += 1
            s_colors.add(m.color(a if a in S else b))
    color = s_colors.pop() if len(s_colors) == 1 else None
    return Cut(R, S, color, weight)


def enumerate_cuts(m: PlaneMap, tau: int, rho: Optional[int] = None) -> List[Cut]:
    """All partitions (R, S) with rho in R and tau in S."""
    rho = m.root_vertex if rho is None else rho
    check_budget(m.num_vertices, MAX_CUT_VERTICES, "vertices for cut enumeration")
    others = [v for v in range(m.num_vertices) if v not in (rho, tau)]
    cuts = []
    for size in range(len(others) + 1):
        for extra in combinations(others, size):
            cuts.append(cut_of(m, frozenset((tau,) + extra)))
    return cuts


def _min_cut_by_flow(m: PlaneMap, tau: int, rho: int, color: Color) -> Optional[MinCut]:
    big = m.num_edges + 1
    net = nx.DiGraph()
    net.add_nodes_from(range(m.num_vertices))
    for h, g in m.edges():
        a, b = m.vertex_of[h], m.vertex_of[g]
        for tail, head in ((a, b), (b, a)):
            cap = 1 if m.color(head) is color else big
            if net.has_edge(tail, head):
                net[tail][head]["capacity"] += cap
            else:
                net.add_edge(tail, head, capacity=cap)
    residual = edmonds_karp(net, rho, tau)
    if residual.graph["flow_value"] >= big:
        return None
    open_arcs = nx.DiGraph()
    open_arcs.add_nodes_from(residual)
    open_arcs.add_edges_from((u, v) for u, v, attr in residual.edges(data=True)
                             if attr["capacity"] - attr["flow"] > 0)
    source_side = nx.descendants(open_arcs, rho) | {rho}
    sink_side = nx.ancestors(open_arcs, tau) | {tau}
    cut = cut_of(m, frozenset(range(m.num_vertices)) - frozenset(source_side))
    unique = len(source_side) + len(sink_side) == m.num_vertices
    return MinCut(cut, unique, [cut])


def min_cut(m: PlaneMap, tau: int, color: Color, rho: Optional[int] = None) -> Optional[MinCut]:
    """Minimum-weight cut of ``color`` and whether it is unique; None if no such cut."""
    rho = m.root_vertex if rho is None else rho
    if m.num_vertices > MAX_CUT_VERTICES:
        return _min_cut_by_flow(m, tau, rho, color)
    cuts = [c for c in enumerate_cuts(m, tau, rho) if c.color is color]
    if not cuts:
        return None
    best = min(c.weight for c in cuts)
    minimal = [c for c in cuts if c.weight == best]
    return MinCut(minimal[0], len(minimal) == 1, minimal)


def min_cut_weight_by_flow(m: PlaneMap, tau: int, color: Color,
                           rho: Optional[int] = None) -> Optional[int]:
    found = _min_cut_by_flow(m, tau, m.root_vertex if rho is None else rho, color)
    return None if found is None else found.cut.weight


def classify_tightness(m: PlaneMap, tau: int) -> TightnessVerdict:
    """Trumpet: tau black and the trivial cut is a minimum black cut.
    Cornet: tau white and the trivial cut is the unique minimum white cut."""
    if tau == m.root_vertex:
        raise OrientationError("tau must differ from the root vertex")
    color = m.color(tau)
    k = m.degree(tau)
    best = min_cut(m, tau, color)
    if best is None:
        return TightnessVerdict(Tightness.NEITHER, k)
    trivial = best.cut.S == frozenset({tau})
    if color is Color.BLACK and best.cut.weight == k:
        return TightnessVerdict(Tightness.TRUMPET, k, best.cut)
    if color is Color.WHITE and best.unique and trivial:
        return TightnessVerdict(Tightness.CORNET, k, best.cut)
    return TightnessVerdict(Tightness.NEITHER, k, best.cut)


def tightness_by_flow(m: PlaneMap, tau: int, d: int) -> Tightness:
    """Flow-side verdict: alpha_{d,k}^- feasibility for black tau, alpha_{d,k}^+
    feasibility with quasi-accessibility for white tau."""
    k = m.degree(tau)
    if m.color(tau) is Color.BLACK:
        o = alpha_dk_orientation(m, tau, d, k, "minus")
        return Tightness.TRUMPET if o is not None else Tightness.NEITHER
    o = alpha_dk_orientation(m, tau, d, k, "plus")
    if o is not None and is_accessible(m, o, except_vertex=tau):
        return Tightness.CORNET
    return Tightness.NEITHER


# ----------------------------------------------------------------------
# Exchange format
# ----------------------------------------------------------------------

def format_orientation(o: FractionalOrientation) -> str:
    return f"orient k {o.k}\nvalues " + " ".join(str(v) for v in o.values)


def orientation_from_record(record: Dict[str, List[str]]) -> FractionalOrientation:
    try:
        k = int(record["orient"][1])
        values = tuple(int(tok) for tok in record["values"])
    except (KeyError, IndexError, ValueError) as exc:
        raise OrientationError(f"malformed orientation record: {exc}") from exc
    return FractionalOrientation(k, values)
