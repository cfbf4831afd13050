"""
Mobiles Component

Directed geodesic labelings of dual maps and the three mobile
constructions that relate oriented bipartite maps to labeled mobiles: the
local opening of an oriented map into a blossoming mobile, the labeled
mobile of a pointed Eulerian map, and the reconstruction of stems and
orientation from labels.

Mobiles are plane trees stored like maps: ``sigma`` rotates darts
counterclockwise around each vertex and opening stems are darts fixed by
``alpha``. Vertices are round (white or black) or square.

Key responsibilities:
- Breadth-first geodesic labels and the label/orientation identity
- Subdivision of arbitrary maps into bipartite ones, with orientation lift
- phi_BF, phi_BDG and upsilon_d
- Condition checkers, canonical codes and the commutation check
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from ..orientation import FractionalOrientation, minimal_alpha_d, outdegrees, validate
from ..planar_map import (
    Color, DualMap, MapError, PlaneMap, build_map, check_budget, compose, cycles_of, dual,
    invert, min_rotation_code, pack_words, parse_record,
)

logger = logging.getLogger(__name__)

# Exhaustive labeling search is limited to duals with this many vertices.
MAX_LABELING_VERTICES = 6


class MobileError(ValueError):
    """Raised when an input is outside the domain of a mobile construction."""


class VertexKind(Enum):
    WHITE = "w"
    BLACK = "b"
    SQUARE = "s"


_KIND_OF_COLOR = {Color.WHITE: VertexKind.WHITE, Color.BLACK: VertexKind.BLACK}
_KIND_RANK = {VertexKind.WHITE: 0, VertexKind.BLACK: 1, VertexKind.SQUARE: 2}


# ----------------------------------------------------------------------
# Geodesic labelings
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicLabels:
    """Directed distance from the pointed dual vertex, per dual vertex."""
    labels: Tuple[int, ...]
    pointed: int

    def __getitem__(self, v: int) -> int:
        return self.labels[v]


def _arc_graph(d: DualMap) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(d.underlying.num_vertices))
    graph.add_edges_from((tail, head) for tail, head, _ in d.canonical_arcs())
    return graph


def geodesic_labeling(d: DualMap, pointed: Optional[int] = None) -> GeodesicLabels:
    if pointed is None:
        pointed = d.pointed
    n = d.underlying.num_vertices
    if d.underlying.num_darts == 0:
        return GeodesicLabels((0,), pointed)
    distances = nx.single_source_shortest_path_length(_arc_graph(d), pointed)
    if len(distances) != n:
        missing = sorted(set(range(n)) - set(distances))
        raise MobileError(f"dual vertices {missing} are unreachable from {pointed}")
    return GeodesicLabels(tuple(distances[v] for v in range(n)), pointed)


def satisfies_geodesic_conditions(d: DualMap, labels: Sequence[int],
                                  pointed: Optional[int] = None) -> bool:
    """The three local conditions that characterize the geodesic labeling."""
    if pointed is None:
        pointed = d.pointed
    if labels[pointed] != 0 or any(value < 0 for value in labels):
        return False
    arcs = d.canonical_arcs()
    if any(labels[head] > labels[tail] + 1 for tail, head, _ in arcs):
        return False
    reached = {head for tail, head, _ in arcs if labels[head] == labels[tail] + 1}
    return all(v in reached for v in range(len(labels)) if v != pointed)


def labelings_satisfying_conditions(d: DualMap) -> List[Tuple[int, ...]]:
    """Every labeling meeting the local conditions; exhaustive."""
    n = d.underlying.num_vertices
    check_budget(n, MAX_LABELING_VERTICES, "dual vertices for labeling search")
    return [labels for labels in product(range(n), repeat=n)
            if satisfies_geodesic_conditions(d, labels)]


def check_geodesic_relation(m: PlaneMap, o: FractionalOrientation, d: int) -> bool:
    """Label drop along each canonical dual arc equals O(white dart) - 1."""
    if o.k != d + 1:
        logger.debug(f"check_geodesic_relation: {o.k}-fractional orientation for d={d}")
        return False
    labels = geodesic_labeling(dual(m))
    for h in range(m.num_darts):
        if m.dart_color(h) is not Color.WHITE:
            continue
        drop = labels[m.face_of[h]] - labels[m.face_of[m.alpha[h]]]
        if drop != o[h] - 1:
            logger.debug(f"check_geodesic_relation: dart {h} drops {drop}, value {o[h]}")
            return False
    return True


# ----------------------------------------------------------------------
# Subdivision
# ----------------------------------------------------------------------

def subdivide_to_bipartite(m: PlaneMap) -> PlaneMap:
    """Insert a black degree-2 vertex in every edge; old vertices turn white.

    Dart ``h`` keeps its index and its new partner is ``n + h``, so the
    original vertices keep their indices too.
    """
    n = m.num_darts
    if n == 0:
        return build_map((), (), None, colors=(Color.WHITE,))
    sigma = list(m.sigma) + [n + m.alpha[h] for h in range(n)]
    alpha = [n + h for h in range(n)] + list(range(n))
    colors = [Color.WHITE] * m.num_vertices + [Color.BLACK] * m.num_edges
    sub = build_map(sigma, alpha, m.root_dart, 0, colors=colors)
    return replace(sub, outer_face=sub.face_of[m.faces[m.outer_face][0]])


def lift_orientation(m: PlaneMap, o: FractionalOrientation) -> FractionalOrientation:
    """Quasi-Eulerian orientation of ``m`` as an alpha_Delta one on its subdivision."""
    if o.k != 2:
        raise MobileError(f"expected a 2-fractional orientation, got k={o.k}")
    delta = max(m.degree(v) for v in range(m.num_vertices))
    values = list(o.values) + [delta + 1 - o[h] for h in range(m.num_darts)]
    return FractionalOrientation(delta + 1, tuple(values))


def restrict_orientation(m: PlaneMap, lifted: FractionalOrientation) -> FractionalOrientation:
    """Inverse of :func:`lift_orientation`: keep the values of the white darts."""
    n = m.num_darts
    for h in range(n):
        if lifted[h] + lifted[n + h] != lifted.k:
            raise MobileError(f"edge ({h}, {n + h}) is not a subdivided edge")
    return FractionalOrientation(2, tuple(lifted.values[:n]))


# ----------------------------------------------------------------------
# Mobiles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Mobile:
    sigma: Tuple[int, ...]
    alpha: Tuple[int, ...]
    kinds: Tuple[VertexKind, ...]
    vertices: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    vertex_of: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(cycles_of(self.sigma))
        if len(vertices) != len(self.kinds):
            raise MobileError(f"{len(self.kinds)} vertex kinds for {len(vertices)} vertices")
        vertex_of = [0] * len(self.sigma)
        for v, cycle in enumerate(vertices):
            for h in cycle:
                vertex_of[h] = v
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "vertex_of", tuple(vertex_of))

    @property
    def num_darts(self) -> int:
        return len(self.sigma)

    def kind(self, v: int) -> VertexKind:
        return self.kinds[v]

    def dart_kind(self, h: int) -> VertexKind:
        return self.kinds[self.vertex_of[h]]

    def is_stem(self, h: int) -> bool:
        return self.alpha[h] == h

    def edges(self) -> List[Tuple[int, int]]:
        return [(h, self.alpha[h]) for h in range(self.num_darts) if h < self.alpha[h]]

    def degree(self, v: int) -> int:
        """Number of tree edges at ``v``; stems are not counted."""
        return sum(1 for h in self.vertices[v] if not self.is_stem(h))

    def stems_at(self, v: int) -> int:
        return sum(1 for h in self.vertices[v] if self.is_stem(h))

    def is_tree(self) -> bool:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(len(self.vertices)))
        graph.add_edges_from((self.vertex_of[h], self.vertex_of[g]) for h, g in self.edges())
        return graph.number_of_edges() == len(self.vertices) - 1 and nx.is_connected(graph)

    def next_edge(self, h: int) -> int:
        """Next non-stem dart counterclockwise after ``h`` around its vertex."""
        g = self.sigma[h]
        while self.is_stem(g) and g != h:
            g = self.sigma[g]
        return g

    def contour(self) -> List[int]:
        """Tree darts in counterclockwise contour order, face on the right."""
        start = next((h for h in range(self.num_darts) if not self.is_stem(h)), None)
        if start is None:
            return []
        walk = [start]
        h = self.next_edge(self.alpha[start])
        while h != start:
            walk.append(h)
            h = self.next_edge(self.alpha[h])
        return walk


@dataclass(frozen=True)
class BlossomingMobile(Mobile):
    """Mobile with opening stems on squares and a k-fractional orientation.

    Stems carry 0, as does the round side of every round-square edge.
    """
    values: Tuple[int, ...]
    k: int

    def excess(self) -> int:
        """Round-incident half-edges minus opening stems."""
        round_darts = sum(1 for h in range(self.num_darts)
                          if not self.is_stem(h) and self.dart_kind(h) is not VertexKind.SQUARE)
        stems = sum(1 for h in range(self.num_darts) if self.is_stem(h))
        return round_darts - stems

    def indegree(self, v: int) -> int:
        return sum(self.k - self.values[h] for h in self.vertices[v] if not self.is_stem(h))


@dataclass(frozen=True)
class LabeledMobile(Mobile):
    """Mobile with square labels (per vertex) and flag labels.

    ``flags[h]`` labels the side of a white-black edge on the right of
    dart ``h``; other darts carry None, as do round vertices in
    ``square_labels``.
    """
    square_labels: Tuple[Optional[int], ...]
    flags: Tuple[Optional[int], ...]


@dataclass(frozen=True)
class MobileWitness:
    ok: bool
    violations: Tuple[str, ...] = ()


def _from_rotations(rotations: Sequence[Tuple[VertexKind, Sequence[int]]],
                    n: int) -> Tuple[Tuple[int, ...], Tuple[VertexKind, ...]]:
    sigma = [0] * n
    dart_kind: Dict[int, VertexKind] = {}
    for kind, rotation in rotations:
        for i, h in enumerate(rotation):
            sigma[h] = rotation[(i + 1) % len(rotation)]
            dart_kind[h] = kind
    kinds = tuple(dart_kind[cycle[0]] for cycle in cycles_of(sigma))
    return tuple(sigma), kinds


@dataclass
class _Assembly:
    """Mobile darts with the primal dart each one comes from.

    ``origin[i]`` is ``(role, h)`` with role ``round`` (primal dart kept),
    ``spoke`` (square side of the edge replacing saturated dart h) or
    ``stem`` (opening stem standing for side h).
    """
    rotations: List[Tuple[VertexKind, List[int]]] = field(default_factory=list)
    alpha: List[int] = field(default_factory=list)
    origin: List[Tuple[str, int]] = field(default_factory=list)
    square_face: Dict[int, int] = field(default_factory=dict)

    def new_dart(self, role: str, h: int) -> int:
        dart = len(self.origin)
        self.origin.append((role, h))
        self.alpha.append(dart)
        return dart

    def link(self, a: int, b: int) -> None:
        self.alpha[a] = b
        self.alpha[b] = a


def _assemble(m: PlaneMap, saturated: FrozenSet[int], with_stems: bool) -> _Assembly:
    """Shared tree layout of phi_BF and phi_BDG.

    ``saturated`` holds white darts whose edges become square-to-white
    edges: the square of the face on the right of the black dart receives
    the edge, at the position of that black dart in the face.
    """
    removed = {m.alpha[h] for h in saturated}
    for h in sorted(saturated):
        if m.face_of[m.alpha[h]] == m.outer_face:
            raise MobileError(f"outside phi_BF domain: saturated dart {m.alpha[h]} "
                              f"has the outer face on its right")
    out = _Assembly()
    ids: Dict[int, int] = {}
    for v, cycle in enumerate(m.vertices):
        rotation = []
        for h in cycle:
            if h not in removed:
                ids[h] = out.new_dart("round", h)
                rotation.append(ids[h])
        out.rotations.append((_KIND_OF_COLOR[m.color(v)], rotation))
    for h, dart in ids.items():
        if m.alpha[h] in ids:
            out.alpha[dart] = ids[m.alpha[h]]

    for f in range(m.num_faces):
        if f == m.outer_face:
            continue
        rotation = []
        # counterclockwise around the square is the face boundary walked backwards
        h = start = m.faces[f][0]
        while True:
            if h in removed:
                spoke = out.new_dart("spoke", h)
                out.link(spoke, ids[m.alpha[h]])
                rotation.append(spoke)
            elif with_stems:
                rotation.append(out.new_dart("stem", h))
            h = m.phi_inv[h]
            if h == start:
                break
        if not any(out.origin[dart][0] == "spoke" for dart in rotation):
            raise MobileError(f"outside phi_BF domain: face {f} receives no edge")
        out.square_face[len(out.rotations)] = f
        out.rotations.append((VertexKind.SQUARE, rotation))
    return out


def phi_BF(m: PlaneMap, o: FractionalOrientation) -> BlossomingMobile:
    """Open a minimal oriented bipartite map into a blossoming mobile.

    A square goes in every face and the outer square is dropped with its
    stems. Non-saturated edges stay, with a stem on both adjacent squares.
    A saturated edge b -> w leaves a stem on its left square and is
    replaced by an edge from its right square to w.
    """
    validate(m, o)
    if m.colors is None:
        raise MapError("phi_BF needs a bipartite map")
    if m.num_darts == 0:
        raise MobileError("the vertex map has no mobile")
    for h in range(m.num_darts):
        if m.dart_color(h) is Color.BLACK and o[h] == 0:
            raise MobileError(f"outside phi_BF domain: edge of dart {h} saturated towards black")
    saturated = frozenset(h for h in range(m.num_darts)
                          if m.dart_color(h) is Color.WHITE and o[h] == 0)
    layout = _assemble(m, saturated, with_stems=True)
    values = []
    for role, h in layout.origin:
        values.append(o[h] if role == "round" else (o.k if role == "spoke" else 0))
    sigma, kinds = _from_rotations(layout.rotations, len(layout.origin))
    mobile = BlossomingMobile(sigma, tuple(layout.alpha), kinds, tuple(values), o.k)
    if not mobile.is_tree():
        raise MobileError("outside phi_BF domain: the result is not a tree")
    logger.debug(f"phi_BF: {len(saturated)} saturated edges, excess {mobile.excess()}")
    return mobile


def primal_of(d: DualMap) -> PlaneMap:
    """The bipartite map whose dual is ``d``, marked at the pointed vertex."""
    if d.canonical_darts is None:
        raise MapError("the dual carries no canonical direction")
    under = d.underlying
    sigma = compose(invert(under.sigma), under.alpha)
    root = min(d.canonical_darts)
    return build_map(sigma, under.alpha, root, d.pointed, root_color=Color.WHITE)


def phi_BDG(d: DualMap) -> LabeledMobile:
    """Labeled mobile of a pointed Eulerian map.

    An arc whose label rises by one is geodesic and becomes an edge from
    the square of its head to the white vertex on its left. Every other
    arc becomes a white-black edge whose flags copy the labels of the dual
    vertices on either side.
    """
    if d.underlying.num_vertices < 2:
        raise MobileError("single-face input: the pointed vertex is the whole dual")
    labels = geodesic_labeling(d)
    m = primal_of(d)
    geodesic = frozenset(h for tail, head, h in d.canonical_arcs()
                         if labels[head] == labels[tail] + 1)
    layout = _assemble(m, geodesic, with_stems=False)
    flags = []
    for role, h in layout.origin:
        flags.append(labels[m.face_of[h]] if role == "round" and h not in geodesic else None)
    sigma, kinds = _from_rotations(layout.rotations, len(layout.origin))
    square_of_dart = {}
    for index, f in layout.square_face.items():
        for dart in layout.rotations[index][1]:
            square_of_dart[dart] = labels[f]
    square_labels = tuple(square_of_dart.get(cycle[0]) for cycle in cycles_of(sigma))
    mobile = LabeledMobile(sigma, tuple(layout.alpha), kinds, square_labels, tuple(flags))
    if not mobile.is_tree():
        raise MobileError("phi_BDG produced a non-tree")
    return mobile


# ----------------------------------------------------------------------
# Successors and stem reconstruction
# ----------------------------------------------------------------------

def predecessor_counts(t: LabeledMobile) -> Dict[int, int]:
    """Predecessors of each square corner.

    A corner is named by the dart it follows counterclockwise. The
    successor of a flag labeled l >= 1 is the first corner labeled l met
    clockwise, that of a corner labeled l >= 2 the first corner labeled
    l - 1.
    """
    items: List[Tuple[bool, int, int]] = []
    for h in t.contour():
        if t.flags[h] is not None:
            items.append((False, h, t.flags[h]))
        corner = t.alpha[h]
        label = t.square_labels[t.vertex_of[corner]]
        if label is not None:
            items.append((True, corner, label))
    counts = {key: 0 for is_corner, key, _ in items if is_corner}
    n = len(items)
    for i, (is_corner, key, label) in enumerate(items):
        target = label - 1 if is_corner else label
        if target < 1:
            continue
        for step in range(1, n + 1):
            other_corner, other_key, other_label = items[(i - step) % n]
            if other_corner and other_label == target:
                counts[other_key] += 1
                break
        else:
            raise MobileError(f"no successor for label {label} at dart {key}")
    return counts


def upsilon_d(t: LabeledMobile, d: int) -> BlossomingMobile:
    """Stems from predecessor counts, orientation from flag differences."""
    if d < 1:
        raise MobileError(f"d={d} is outside d >= 1")
    for v, kind in enumerate(t.kinds):
        if kind is VertexKind.WHITE and t.degree(v) > d:
            raise MobileError(f"white vertex {v} has degree {t.degree(v)} > d={d}")
    k = d + 1
    values: List[int] = [0] * t.num_darts
    for h, g in t.edges():
        white, other = (h, g) if t.dart_kind(h) is VertexKind.WHITE else (g, h)
        if t.dart_kind(other) is VertexKind.SQUARE:
            values[white], values[other] = 0, k
            continue
        rise = t.flags[white] - t.flags[other]
        if not 0 <= rise <= d - 1:
            raise MobileError(f"flag difference {rise} on edge ({h}, {g}) is out of range for d={d}")
        values[white] = rise + 1
        values[other] = k - values[white]

    counts = predecessor_counts(t)
    n = t.num_darts
    rotations = []
    for v, cycle in enumerate(t.vertices):
        rotation = []
        for h in cycle:
            rotation.append(h)
            for _ in range(counts.get(h, 0)):
                rotation.append(n)
                n += 1
        rotations.append((t.kinds[v], rotation))
    alpha = list(t.alpha) + list(range(t.num_darts, n))
    values.extend([0] * (n - t.num_darts))
    sigma, kinds = _from_rotations(rotations, n)
    return BlossomingMobile(sigma, tuple(alpha), kinds, tuple(values), k)


# ----------------------------------------------------------------------
# Checkers and codes
# ----------------------------------------------------------------------

def check_labeled_mobile(t: LabeledMobile) -> MobileWitness:
    """Flag and square label conditions, read clockwise around round vertices."""
    violations = []
    flags = [value for value in t.flags if value is not None]
    if any(value < 0 for value in flags) or 0 not in flags:
        violations.append("flags must be non-negative with at least one 0")
    for v, kind in enumerate(t.kinds):
        if kind is VertexKind.SQUARE:
            if t.square_labels[v] is None or t.square_labels[v] < 1:
                violations.append(f"square {v} needs a positive label")
            continue
        # clockwise word of (label, position): a left flag is followed by the
        # right flag of the same edge
        word: List[Tuple[int, str]] = []
        for h in reversed(t.vertices[v]):
            if t.is_stem(h):
                continue
            partner = t.alpha[h]
            if t.dart_kind(partner) is VertexKind.SQUARE:
                word.append((t.square_labels[t.vertex_of[partner]], "square"))
            else:
                word.append((t.flags[partner], "left"))
                word.append((t.flags[h], "right"))
        if len(word) < 2:
            continue
        for i, (l1, position) in enumerate(word):
            l2 = word[(i + 1) % len(word)][0]
            if not _labels_fit(kind, l1, l2, position == "left", position == "square"):
                violations.append(f"labels {l1}, {l2} clockwise around {kind.value} vertex {v}")
    return MobileWitness(not violations, tuple(violations))


def _labels_fit(kind: VertexKind, l1: int, l2: int, same_edge: bool, after_square: bool) -> bool:
    if kind is VertexKind.BLACK:
        return l2 <= l1 if same_edge else l2 >= l1
    if same_edge:
        return l2 >= l1
    if after_square:
        return l2 == l1 - 1
    return l2 == l1


def check_d_blossoming_mobile(b: BlossomingMobile, d: int) -> MobileWitness:
    """Tree shape, stem placement, orientation and the six d-conditions.

    The degree of a black vertex in the closed map is not visible on the
    mobile, so its indegree is only required to reach its mobile degree.
    """
    violations = []
    if not b.is_tree():
        violations.append("not a tree")
    if b.k != d + 1:
        violations.append(f"{b.k}-fractional orientation for d={d}")
    for h in range(b.num_darts):
        kind = b.dart_kind(h)
        if b.is_stem(h):
            if kind is not VertexKind.SQUARE:
                violations.append(f"stem {h} on a round vertex")
            if b.values[h] != 0:
                violations.append(f"stem {h} carries {b.values[h]}")
            continue
        partner = b.alpha[h]
        if b.values[h] + b.values[partner] != b.k:
            violations.append(f"edge ({h}, {partner}) does not sum to {b.k}")
        round_side = kind is not VertexKind.SQUARE and b.dart_kind(partner) is VertexKind.SQUARE
        if (b.values[h] == 0) != round_side and kind is not VertexKind.SQUARE:
            violations.append(f"dart {h} value {b.values[h]} breaks the zero rule")
    if b.excess() <= 0:
        violations.append(f"excess {b.excess()} is not positive")
    for h, g in b.edges():
        pair = {b.dart_kind(h), b.dart_kind(g)}
        if pair not in ({VertexKind.WHITE, VertexKind.BLACK}, {VertexKind.WHITE, VertexKind.SQUARE}):
            violations.append(f"edge ({h}, {g}) joins {sorted(k.value for k in pair)}")
        elif pair == {VertexKind.WHITE, VertexKind.BLACK} and (b.values[h] in (0, b.k)):
            violations.append(f"white-black edge ({h}, {g}) is saturated")
    for v, kind in enumerate(b.kinds):
        if kind is VertexKind.WHITE:
            if b.degree(v) > d:
                violations.append(f"white vertex {v} has degree {b.degree(v)} > {d}")
            if b.indegree(v) != d * b.degree(v):
                violations.append(f"white vertex {v} has indegree {b.indegree(v)}")
        elif kind is VertexKind.BLACK and b.indegree(v) < b.degree(v):
            violations.append(f"black vertex {v} has indegree {b.indegree(v)} below its degree")
    return MobileWitness(not violations, tuple(violations))


def _ranked(raw: Sequence[Tuple[int, ...]]) -> List[int]:
    order = {tag: i for i, tag in enumerate(sorted(set(raw)))}
    return [order[tag] for tag in raw]


def mobile_code(t: Mobile) -> bytes:
    """Unrooted canonical code over kinds, stems, orientation and labels."""
    raw = []
    for h in range(t.num_darts):
        tag = [_KIND_RANK[t.dart_kind(h)], int(t.is_stem(h))]
        if isinstance(t, BlossomingMobile):
            tag.append(t.values[h])
        if isinstance(t, LabeledMobile):
            flag = t.flags[h]
            square = t.square_labels[t.vertex_of[h]]
            tag.extend([-1 if flag is None else flag, -1 if square is None else square])
        raw.append(tuple(tag))
    header = [getattr(t, "k", 0)] + [len(set(raw))] + [x for tag in sorted(set(raw)) for x in tag]
    return pack_words(header) + min_rotation_code(t.sigma, t.alpha, _ranked(raw))


def check_commutation(m: PlaneMap, d: int) -> Optional[bool]:
    """Both routes from ``m`` to a blossoming mobile agree; None when skipped."""
    if m.num_faces < 2:
        logger.warning("check_commutation: single-face map skipped")
        return None
    widest = max(m.degree(v) for v in range(m.num_vertices) if m.color(v) is Color.WHITE)
    if widest > d:
        raise MobileError(f"white degree {widest} exceeds d={d}")
    direct = phi_BF(m, minimal_alpha_d(m, d))
    via_labels = upsilon_d(phi_BDG(dual(m)), d)
    same = mobile_code(direct) == mobile_code(via_labels)
    if not same:
        logger.info(f"check_commutation: routes differ on a {m.num_edges}-edge map, d={d}")
    return same


def round_indegrees(m: PlaneMap, o: FractionalOrientation) -> List[int]:
    """Indegrees of the map's vertices, sorted; phi_BF keeps them on round vertices."""
    return sorted(o.k * m.degree(v) - out for v, out in enumerate(outdegrees(m, o)))


def mobile_round_indegrees(b: BlossomingMobile) -> List[int]:
    return sorted(b.indegree(v) for v, kind in enumerate(b.kinds) if kind is not VertexKind.SQUARE)


# ----------------------------------------------------------------------
# Exchange format
# ----------------------------------------------------------------------

def format_mobile(t: Mobile) -> str:
    """Map-style record; stems are alpha fixed points."""
    lines = [
        f"darts {t.num_darts}",
        "sigma " + " ".join(str(h + 1) for h in t.sigma),
        "alpha " + " ".join(str(h + 1) for h in t.alpha),
        "kinds " + " ".join(kind.value for kind in t.kinds),
    ]
    if isinstance(t, LabeledMobile):
        lines.append("labels " + " ".join("-" if x is None else str(x) for x in t.square_labels))
        lines.append("flags " + " ".join("-" if x is None else str(x) for x in t.flags))
    if isinstance(t, BlossomingMobile):
        lines.append(f"orient k {t.k}")
        lines.append("values " + " ".join(str(v) for v in t.values))
    return "\n".join(lines)


def parse_mobile(text: str) -> Mobile:
    record = parse_record(text)
    try:
        sigma = tuple(int(tok) - 1 for tok in record["sigma"])
        alpha = tuple(int(tok) - 1 for tok in record["alpha"])
        kinds = tuple(VertexKind(tok) for tok in record["kinds"])
    except (KeyError, ValueError) as exc:
        raise MapError(f"malformed mobile record: {exc}") from exc
    if "values" in record:
        values = tuple(int(tok) for tok in record["values"])
        return BlossomingMobile(sigma, alpha, kinds, values, int(record["orient"][1]))
    if "flags" in record:
        labels = tuple(None if tok == "-" else int(tok) for tok in record["labels"])
        flags = tuple(None if tok == "-" else int(tok) for tok in record["flags"])
        return LabeledMobile(sigma, alpha, kinds, labels, flags)
    return Mobile(sigma, alpha, kinds)
