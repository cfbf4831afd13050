"""
Blossoming Component

Blossoming trees and maps: plane maps whose dangling darts are opening
or closing stems. Stems are darts fixed by ``alpha`` that keep their place
in the vertex rotation, so a stem sits in the corner it was attached to.

Key responsibilities:
- Charge bookkeeping and the well-charged predicate
- Exhaustive generation of well-charged trees (planted and corner-rooted)
- Canonical alpha_d / alpha_{d,k} orientations on trees
- Closure, complete closure and their inverse openings
- Decomposition of doubly rooted maps into a trumpet and a cornet, and
  the k gluings back
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx

from ..orientation import (
    FractionalOrientation, OrientationError, alpha_dk_orientation, is_accessible, min_cut,
    minimize, cut_of,
)
from ..planar_map import (
    Color, MapError, Monomial, PlaneMap, bump, build_map, canonical_code, check_budget,
    compose, cycles_of, invert, pack_words, rotation_words,
)

logger = logging.getLogger(__name__)

MAX_TREE_EDGES = 8


class ChargeError(ValueError):
    """Raised when a tree cannot carry the requested orientation."""


class OpeningMismatch(ValueError):
    """Raised when an opening does not close back to its input."""


class InseparablePair(ValueError):
    """Raised when a doubly rooted map has no black cut."""


class StemKind(Enum):
    OPENING = "O"
    CLOSING = "C"


_KIND_TAG = {None: 0, StemKind.OPENING: 1, StemKind.CLOSING: 2}
_PLANTED_TAG = 3


@dataclass(frozen=True)
class BlossomingMap:
    """A plane map with stems.

    ``stems[h]`` is the kind of the stem at dart ``h`` (None for edge darts
    and for the planted dart). ``outer_dart`` is a dart of the marked face;
    ``values`` is an optional orientation of fractionality ``k`` covering
    the stems too.
    """
    sigma: Tuple[int, ...]
    alpha: Tuple[int, ...]
    stems: Tuple[Optional[StemKind], ...]
    colors: Tuple[Color, ...]
    root_dart: Optional[int] = None
    outer_dart: Optional[int] = None
    planted_dart: Optional[int] = None
    values: Optional[Tuple[int, ...]] = None
    k: Optional[int] = None
    vertices: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    vertex_of: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    faces: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    face_of: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    phi: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.sigma)
        if n:
            phi = compose(self.sigma, self.alpha)
            vertices, faces = tuple(cycles_of(self.sigma)), tuple(cycles_of(phi))
        else:
            phi, vertices, faces = (), ((),), ((),)
        vertex_of, face_of = [0] * n, [0] * n
        for i, cycle in enumerate(vertices):
            for h in cycle:
                vertex_of[h] = i
        for i, cycle in enumerate(faces):
            for h in cycle:
                face_of[h] = i
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "vertex_of", tuple(vertex_of))
        object.__setattr__(self, "face_of", tuple(face_of))

    @property
    def num_darts(self) -> int:
        return len(self.sigma)

    @property
    def root_vertex(self) -> int:
        anchor = self.planted_dart if self.planted_dart is not None else self.root_dart
        return 0 if anchor is None else self.vertex_of[anchor]

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    def color(self, v: int) -> Color:
        return self.colors[v]

    def is_stem(self, h: int) -> bool:
        return self.stems[h] is not None

    def edge_darts(self) -> List[int]:
        return [h for h in range(self.num_darts) if self.alpha[h] != h]

    def stem_darts(self, kind: Optional[StemKind] = None) -> List[int]:
        return [h for h in range(self.num_darts)
                if self.stems[h] is not None and (kind is None or self.stems[h] is kind)]

    def num_edges(self) -> int:
        return len(self.edge_darts()) // 2

    def is_tree(self) -> bool:
        return self.num_edges() == len(self.vertices) - 1

    def charge(self) -> int:
        return len(self.stem_darts(StemKind.CLOSING)) - len(self.stem_darts(StemKind.OPENING))

    def marked_face(self) -> Tuple[int, ...]:
        if self.outer_dart is None:
            return self.faces[0]
        return self.faces[self.face_of[self.outer_dart]]

    def contour(self) -> List[int]:
        """Darts of the marked face in clockwise order (phi^-1 walk)."""
        if not self.sigma:
            return []
        start = self.outer_dart if self.outer_dart is not None else self.marked_face()[0]
        phi_inv = invert(self.phi)
        walk = [start]
        h = phi_inv[start]
        while h != start:
            walk.append(h)
            h = phi_inv[h]
        return walk

    def forward_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.vertices)))
        for h in self.edge_darts():
            if self.values is None or self.values[h] > 0:
                graph.add_edge(self.vertex_of[h], self.vertex_of[self.alpha[h]])
        return graph

    def to_plane_map(self) -> PlaneMap:
        """The underlying plane map; no stem may remain."""
        if self.stem_darts() or self.planted_dart is not None:
            raise MapError("blossoming map still carries stems")
        outer = 0
        m = build_map(self.sigma, self.alpha, self.root_dart, 0, colors=self.colors)
        if self.outer_dart is not None:
            outer = m.face_of[self.outer_dart]
        return replace(m, outer_face=outer)

    def orientation(self) -> FractionalOrientation:
        if self.values is None:
            raise OrientationError("blossoming map carries no orientation")
        return FractionalOrientation(self.k, self.values)


BlossomingTree = BlossomingMap


@dataclass
class Charge:
    total: int
    per_vertex: Dict[int, int] = field(default_factory=dict)


@dataclass
class WellChargedWitness:
    ok: bool
    violations: List[Tuple[int, str]] = field(default_factory=list)


class PlantedNode(NamedTuple):
    """A planted subtree: vertex color and its items after the parent dart,
    in counterclockwise order; an item is a stem kind or a child node."""
    color: Color
    items: Tuple[Union[StemKind, "PlantedNode"], ...]


# ----------------------------------------------------------------------
# Construction helpers
# ----------------------------------------------------------------------

def make_blossoming(rotations: Sequence[Sequence[int]], alpha: Sequence[int],
                    stems: Sequence[Optional[StemKind]], vertex_colors: Sequence[Color],
                    **kwargs) -> BlossomingMap:
    """Assemble from per-vertex rotations listed in any order.

    Colors are given per rotation and are reordered to match the vertex
    numbering (cycles sorted by least dart).
    """
    n = len(alpha)
    sigma = [0] * n
    dart_color: Dict[int, Color] = {}
    lone: Optional[Color] = None
    for rotation, color in zip(rotations, vertex_colors):
        if not rotation:
            lone = color
        for i, h in enumerate(rotation):
            sigma[h] = rotation[(i + 1) % len(rotation)]
            dart_color[h] = color
    if n == 0:
        colors = (lone if lone is not None else vertex_colors[0],)
    else:
        colors = tuple(dart_color[cycle[0]] for cycle in cycles_of(sigma))
    return BlossomingMap(tuple(sigma), tuple(alpha), tuple(stems), colors, **kwargs)


def from_plane_map(m: PlaneMap, o: Optional[FractionalOrientation] = None) -> BlossomingMap:
    if m.colors is None:
        raise MapError("blossoming maps are bipartite")
    return BlossomingMap(
        m.sigma, m.alpha, tuple([None] * m.num_darts), m.colors, m.root_dart,
        m.faces[m.outer_face][0] if m.num_darts else None, None,
        o.values if o is not None else None, o.k if o is not None else None,
    )


def materialize(items: Sequence[Union[StemKind, PlantedNode]], root_color: Color,
                planted: bool = False) -> BlossomingTree:
    """Darts for a root item sequence; dart 0 is the planted dart or the root item."""
    rotations: List[List[int]] = []
    colors: List[Color] = []
    alpha: List[int] = []
    stems: List[Optional[StemKind]] = []

    def new_dart(kind: Optional[StemKind]) -> int:
        alpha.append(len(alpha))
        stems.append(kind)
        return len(alpha) - 1

    def build(color: Color, node_items, parent: Optional[int]) -> None:
        rotation: List[int] = [] if parent is None else [parent]
        rotations.append(rotation)
        colors.append(color)
        for item in node_items:
            if isinstance(item, StemKind):
                rotation.append(new_dart(item))
                continue
            h = new_dart(None)
            g = new_dart(None)
            alpha[h], alpha[g] = g, h
            rotation.append(h)
            build(item.color, item.items, g)

    planted_dart = new_dart(None) if planted else None
    build(root_color, items, planted_dart)
    root = 0 if alpha else None
    tree = make_blossoming(rotations, alpha, stems, colors, root_dart=root,
                           outer_dart=root, planted_dart=planted_dart)
    return tree


# ----------------------------------------------------------------------
# Charge and the well-charged predicate
# ----------------------------------------------------------------------

def _tree_parents(tree: BlossomingMap) -> Tuple[List[int], Dict[int, Optional[int]]]:
    """Vertices in BFS order from the root vertex and their parents."""
    root = tree.root_vertex
    graph = nx.Graph()
    graph.add_node(root)
    graph.add_edges_from((tree.vertex_of[h], tree.vertex_of[g]) for h, g in enumerate(tree.alpha) if g != h)
    parent: Dict[int, Optional[int]] = {root: None}
    parent.update(nx.bfs_predecessors(graph, root))
    return list(parent), parent


def charge(tree: BlossomingTree) -> Charge:
    """Total charge and the charge of the subtree below every vertex."""
    order, parent = _tree_parents(tree)
    own = {v: 0 for v in order}
    for h in tree.stem_darts():
        own[tree.vertex_of[h]] += 1 if tree.stems[h] is StemKind.CLOSING else -1
    sub = dict(own)
    for v in reversed(order):
        if parent[v] is not None:
            sub[parent[v]] += sub[v]
    return Charge(tree.charge(), sub)


def is_well_charged(tree: BlossomingTree) -> WellChargedWitness:
    per_vertex = charge(tree).per_vertex
    violations = []
    for h in tree.stem_darts():
        v = tree.vertex_of[h]
        if tree.color(v) is Color.BLACK and tree.stems[h] is StemKind.CLOSING:
            violations.append((v, "black vertex carries a closing stem"))
        if tree.color(v) is Color.WHITE and tree.stems[h] is StemKind.OPENING:
            violations.append((v, "white vertex carries an opening stem"))
    for v, c in per_vertex.items():
        if v == tree.root_vertex and tree.planted_dart is None:
            continue
        if tree.color(v) is Color.BLACK and c > 1:
            violations.append((v, f"black subtree charge {c} > 1"))
        if tree.color(v) is Color.WHITE and c < 0:
            violations.append((v, f"white subtree charge {c} < 0"))
    return WellChargedWitness(not violations, violations)


# ----------------------------------------------------------------------
# Generation
# ----------------------------------------------------------------------

def _stem_for(color: Color) -> Tuple[StemKind, int]:
    return (StemKind.OPENING, -1) if color is Color.BLACK else (StemKind.CLOSING, 1)


@lru_cache(maxsize=None)
def _sequences(color: Color, budget: int, max_len: Optional[int],
               degrees: Optional[FrozenSet[int]]) -> Tuple[Tuple[tuple, int, int], ...]:
    """(items, degree sum used, charge) for item sequences at a vertex."""
    found = [((), 0, 0)]
    if budget <= 0 or max_len == 0:
        return tuple(found)
    stem, stem_charge = _stem_for(color)
    options = [(stem, 1, stem_charge)]
    for child, used, c in _planted(color.flip(), budget - 1, degrees):
        options.append((child, 1 + used, c))
    for first, cost, c in options:
        if cost > budget:
            continue
        rest_len = None if max_len is None else max_len - 1
        for rest, used, rest_charge in _sequences(color, budget - cost, rest_len, degrees):
            found.append(((first,) + rest, cost + used, c + rest_charge))
    return tuple(found)


@lru_cache(maxsize=None)
def _planted(color: Color, budget: int,
             degrees: Optional[FrozenSet[int]]) -> Tuple[Tuple[PlantedNode, int, int], ...]:
    """Well-charged planted subtrees with degree sum at most ``budget``."""
    if budget < 1:
        return ()
    max_len = None if degrees is None else max(degrees) - 1
    found = []
    for items, used, c in _sequences(color, budget - 1, max_len, degrees):
        if degrees is not None and len(items) + 1 not in degrees:
            continue
        if color is Color.BLACK and c > 1:
            continue
        if color is Color.WHITE and c < 0:
            continue
        found.append((PlantedNode(color, items), used + 1, c))
    return tuple(found)


def enumerate_well_charged_trees(charge_k: int, max_edges: int, max_degree: Optional[int] = None,
                                 root_color: Color = Color.WHITE, planted: bool = False,
                                 degrees: Optional[Iterable[int]] = None) -> List[BlossomingTree]:
    """Well-charged trees of charge ``charge_k``.

    Corner-rooted trees are kept when their complete closure has at most
    ``max_edges`` edges; planted trees when half their degree sum (planted
    dart included) is at most ``max_edges``. ``degrees`` restricts every
    vertex degree to a set.
    """
    check_budget(max_edges, MAX_TREE_EDGES, "max_edges")
    allowed = None
    if degrees is not None:
        allowed = frozenset(degrees)
    elif max_degree is not None:
        allowed = frozenset(range(max_degree + 1))
    budget = 2 * max_edges
    trees = []
    if planted:
        for node, used, c in _planted(root_color, budget, allowed):
            if c == charge_k:
                trees.append(materialize(node.items, root_color, planted=True))
    else:
        max_len = None if allowed is None else max(allowed)
        for items, used, c in _sequences(root_color, budget, max_len, allowed):
            if c != charge_k or used + abs(c) > budget:
                continue
            if allowed is not None and len(items) not in allowed and items:
                continue
            trees.append(materialize(items, root_color))
    logger.info(f"{len(trees)} well-charged trees (charge {charge_k}, {max_edges} edges, "
                f"{'planted' if planted else 'rooted'})")
    return trees


def tree_weight(tree: BlossomingTree) -> Monomial:
    """u^{#opening} prod x_deg(white) prod y_deg(black) xi^{charge}."""
    monomial: Monomial = {}
    bump(monomial, "u", len(tree.stem_darts(StemKind.OPENING)))
    for v in range(len(tree.vertices)):
        prefix = "x" if tree.color(v) is Color.WHITE else "y"
        bump(monomial, f"{prefix}{tree.degree(v)}")
    bump(monomial, "xi", tree.charge())
    return monomial


def blossoming_code(b: BlossomingMap, with_values: bool = True) -> bytes:
    """Rooted code covering stems, the planted dart, colors and values."""
    if b.num_darts == 0:
        return pack_words([0, 1 if b.colors[0] is Color.WHITE else 2])
    tags = []
    for h in range(b.num_darts):
        tag = _PLANTED_TAG if h == b.planted_dart else _KIND_TAG[b.stems[h]]
        if with_values and b.values is not None:
            tag += 4 * (b.values[h] + 1)
        tags.append(tag)
    root = b.planted_dart if b.planted_dart is not None else b.root_dart
    words = list(rotation_words(b.sigma, b.alpha, root, tags))
    words.append(1 if b.color(b.vertex_of[root]) is Color.WHITE else 2)
    return pack_words(words)


# ----------------------------------------------------------------------
# Orientations on trees
# ----------------------------------------------------------------------

def orient_tree(tree: BlossomingTree, d: int) -> BlossomingTree:
    """The unique orientation making ``tree`` an alpha_d (or alpha_{d,k}) tree.

    Child-side dart of a black child: d + c; of a white child: c + 1, where
    c is the child's subtree charge. Opening stems carry d + 1 and closing
    stems 0. The corner-rooted root then has outdegree alpha_d - c(tree).
    """
    if d < 1:
        raise ChargeError(f"d={d} is outside d >= 1")
    witness = is_well_charged(tree)
    if not witness.ok:
        raise ChargeError(f"tree is not well-charged: {witness.violations[0][1]}")
    if max(tree.degree(v) for v in range(len(tree.vertices))) > d:
        raise ChargeError("not orientable at this d")
    # the two single-stem trees excluded at d=1 carry a stem of the wrong
    # kind and are already refused as not well-charged
    total = tree.charge()

    per_vertex = charge(tree).per_vertex
    order, parent = _tree_parents(tree)
    values = [0] * tree.num_darts
    for h in tree.stem_darts():
        values[h] = d + 1 if tree.stems[h] is StemKind.OPENING else 0
    for v in order:
        if parent[v] is None:
            continue
        up = next(h for h in tree.vertices[v]
                  if tree.alpha[h] != h and tree.vertex_of[tree.alpha[h]] == parent[v])
        c = per_vertex[v]
        child_side = d + c if tree.color(v) is Color.BLACK else c + 1
        values[up] = child_side
        values[tree.alpha[up]] = d + 1 - child_side
    if tree.planted_dart is not None:
        values[tree.planted_dart] = d + total if tree.color(tree.root_vertex) is Color.BLACK else total + 1

    child_sides = [values[h] for v in order if parent[v] is not None
                   for h in tree.vertices[v]
                   if tree.alpha[h] != h and tree.vertex_of[tree.alpha[h]] == parent[v]]
    if any(not 0 <= val <= d + 1 for val in values) or any(val <= 0 for val in child_sides):
        raise ChargeError("not orientable at this d")
    if tree.planted_dart is not None and values[tree.planted_dart] <= 0:
        raise ChargeError("not orientable at this d")

    for v in range(len(tree.vertices)):
        base = d * tree.degree(v) if tree.color(v) is Color.BLACK else tree.degree(v)
        if v == tree.root_vertex and tree.planted_dart is None:
            base -= total
        out = sum(values[h] for h in tree.vertices[v])
        if out != base:
            raise ChargeError(f"vertex {v} outdegree {out} misses its target {base}")
    return replace(tree, values=tuple(values), k=d + 1)


def excess(tree: BlossomingTree) -> int:
    """Orientation value of the planted dart."""
    if tree.planted_dart is None or tree.values is None:
        raise ChargeError("excess needs an oriented planted tree")
    return tree.values[tree.planted_dart]


def forget_orientation(tree: BlossomingTree) -> BlossomingTree:
    return replace(tree, values=None, k=None)


# ----------------------------------------------------------------------
# Closure
# ----------------------------------------------------------------------

def match_stems(kinds: Sequence[StemKind]) -> Tuple[List[Tuple[int, int]], List[int]]:
    """Cyclic parenthesis matching: opening = '(' and closing = ')'.

    Returns (opening position, closing position) pairs and the unmatched
    positions in contour order.
    """
    stack: List[int] = []
    matched: Dict[int, int] = {}
    pending: List[int] = []
    for pos, kind in enumerate(kinds):
        if kind is StemKind.OPENING:
            stack.append(pos)
        elif stack:
            matched[stack.pop()] = pos
        else:
            pending.append(pos)
    # wrap around: early closing stems meet late opening stems
    still = []
    for pos in pending:
        if stack:
            matched[stack.pop()] = pos
        else:
            still.append(pos)
    unmatched = sorted(still + stack)
    return sorted(matched.items()), unmatched


def closure(b: BlossomingMap) -> BlossomingMap:
    """Match the stems of the marked face along its clockwise contour.

    Each matched pair becomes an edge with the outer face on its left,
    oriented from the opening to the closing stem.
    """
    contour = b.contour()
    marked = set(b.marked_face())
    positions = [i for i, h in enumerate(contour) if b.stems[h] is not None and h in marked]
    kinds = [b.stems[contour[i]] for i in positions]
    pairs, unmatched = match_stems(kinds)

    alpha = list(b.alpha)
    stems = list(b.stems)
    for i, j in pairs:
        o, c = contour[positions[i]], contour[positions[j]]
        alpha[o], alpha[c] = c, o
        stems[o] = stems[c] = None

    outer_dart = b.outer_dart
    if unmatched:
        outer_dart = contour[positions[unmatched[0]]]
    elif pairs:
        length = len(contour)
        widest = max(pairs, key=lambda p: (positions[p[1]] - positions[p[0]]) % length)
        outer_dart = contour[positions[widest[1]]]
    closed = replace(b, alpha=tuple(alpha), stems=tuple(stems), outer_dart=outer_dart)
    logger.debug(f"closure: {len(pairs)} edges created, {len(unmatched)} stems unmatched")
    return closed


def complete_closure(tree: BlossomingTree) -> Tuple[PlaneMap, int]:
    """Closure, then a new vertex tau absorbing the unmatched stems."""
    c = tree.charge()
    if c == 0:
        raise ChargeError("complete closure needs a non-zero charge")
    closed = closure(tree)
    contour = closed.contour()
    leftover = [h for h in contour if closed.stems[h] is not None]
    n = closed.num_darts
    taus = list(range(n, n + len(leftover)))
    sigma = list(closed.sigma) + [taus[(i + 1) % len(taus)] for i in range(len(taus))]
    alpha = list(closed.alpha) + list(leftover)
    for t, s in zip(taus, leftover):
        alpha[s] = t
    tau_color = Color.BLACK if c > 0 else Color.WHITE
    dart_color = {h: closed.color(closed.vertex_of[h]) for h in range(n)}
    dart_color.update({t: tau_color for t in taus})
    colors = tuple(dart_color[cycle[0]] for cycle in cycles_of(sigma))
    m = build_map(sigma, alpha, closed.root_dart, 0, colors=colors)
    m = replace(m, outer_face=m.face_of[taus[0]])
    return m, m.vertex_of[taus[0]]


# ----------------------------------------------------------------------
# Opening
# ----------------------------------------------------------------------

def _accessible_without(b: BlossomingMap, values: Sequence[int], alpha: Sequence[int],
                        removed: int) -> bool:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(b.vertices)))
    for h in range(b.num_darts):
        if alpha[h] != h and h != removed and values[h] > 0:
            graph.add_edge(b.vertex_of[h], b.vertex_of[alpha[h]])
    root = b.root_vertex
    return len(nx.ancestors(graph, root)) + 1 == len(b.vertices)


def open_blossoming(b: BlossomingMap) -> BlossomingTree:
    """Cut saturated edges with the outer face on their left until one face remains.

    Among the candidates the least tail dart whose removal keeps every
    vertex able to reach the root is cut first. The closure of the result
    must give back ``b``.
    """
    if b.values is None:
        raise OpeningMismatch("opening needs an orientation")
    values = list(b.values)
    alpha = list(b.alpha)
    stems = list(b.stems)
    outer_dart = b.outer_dart if b.outer_dart is not None else 0
    cuts = 0
    while True:
        current = replace(b, alpha=tuple(alpha), stems=tuple(stems), outer_dart=outer_dart)
        outer = current.face_of[outer_dart] if current.num_darts else 0
        chosen = None
        for a in range(current.num_darts):
            h = alpha[a]
            if h == a or values[a] <= 0 or values[h] != 0:
                continue
            if current.face_of[h] != outer or current.face_of[a] == outer:
                continue
            if _accessible_without(current, values, alpha, a):
                chosen = a
                break
        if chosen is None:
            break
        h = alpha[chosen]
        alpha[chosen], alpha[h] = chosen, h
        stems[chosen], stems[h] = StemKind.OPENING, StemKind.CLOSING
        outer_dart = h
        cuts += 1

    tree = replace(b, alpha=tuple(alpha), stems=tuple(stems), outer_dart=outer_dart)
    if len(tree.faces) != 1:
        raise OpeningMismatch(f"opening mismatch: {len(tree.faces)} faces remain")
    reclosed = closure(tree)
    if reclosed.alpha != b.alpha or reclosed.stems != b.stems:
        raise OpeningMismatch("opening mismatch: closure does not give the input back")
    if b.outer_dart is not None and reclosed.face_of[reclosed.outer_dart] != b.face_of[b.outer_dart]:
        if b.stem_darts() == [] or reclosed.faces[reclosed.face_of[reclosed.outer_dart]] != b.marked_face():
            raise OpeningMismatch("opening mismatch: outer face moved")
    logger.debug(f"opening: {cuts} edges cut")
    return tree


def opening(m: PlaneMap, o: FractionalOrientation) -> BlossomingTree:
    """Unique blossoming tree whose closure is (m, o)."""
    return open_blossoming(from_plane_map(m, o))


def open_pointed(m: PlaneMap, tau: int, d: int) -> BlossomingTree:
    """Inverse of the complete closure for a trumpet (black tau) or cornet (white tau)."""
    k = m.degree(tau)
    sign = "minus" if m.color(tau) is Color.BLACK else "plus"
    o = alpha_dk_orientation(m, tau, d, k, sign)
    if o is None:
        raise OrientationError(f"no alpha_{{d,k}}^{sign} orientation: not a {'trumpet' if sign == 'minus' else 'cornet'}")
    m_out = replace(m, outer_face=m.face_of[m.vertices[tau][0]])
    o = minimize(m_out, o)
    except_vertex = None if sign == "minus" else tau
    if not is_accessible(m_out, o, except_vertex=except_vertex):
        raise OpeningMismatch("opening mismatch: orientation is not accessible")

    # drop tau; its partners become stems
    tau_darts = set(m.vertices[tau])
    keep = [h for h in range(m.num_darts) if h not in tau_darts]
    new_id = {h: i for i, h in enumerate(keep)}
    alpha = [0] * len(keep)
    stems: List[Optional[StemKind]] = [None] * len(keep)
    for h in keep:
        g = m.alpha[h]
        if g in tau_darts:
            alpha[new_id[h]] = new_id[h]
            stems[new_id[h]] = StemKind.CLOSING if sign == "minus" else StemKind.OPENING
        else:
            alpha[new_id[h]] = new_id[g]
    rotations = [[new_id[h] for h in m.vertices[v]] for v in range(m.num_vertices) if v != tau]
    colors = [m.color(v) for v in range(m.num_vertices) if v != tau]
    values = [o[h] for h in keep]
    stem_ids = [new_id[m.alpha[t]] for t in m.vertices[tau]]
    b = make_blossoming(rotations, alpha, stems, colors, root_dart=new_id[m.root_dart],
                        outer_dart=stem_ids[0], values=tuple(values), k=d + 1)
    tree = open_blossoming(b)
    closed, new_tau = complete_closure(forget_orientation(tree))
    if canonical_code(closed, marked=False, pointed=new_tau) != canonical_code(m, marked=False, pointed=tau):
        raise OpeningMismatch("opening mismatch: complete closure does not give the input back")
    return tree


# ----------------------------------------------------------------------
# Doubly rooted maps
# ----------------------------------------------------------------------

def _contract(m: PlaneMap, keep: FrozenSet[int], root_dart: int) -> Tuple[PlaneMap, int]:
    """Contract the vertices outside ``keep`` into one vertex tau."""
    kept = [h for h in range(m.num_darts) if m.vertex_of[h] in keep]
    boundary = [m.alpha[h] for h in kept if m.vertex_of[m.alpha[h]] not in keep]
    ids = {h: i for i, h in enumerate(kept + boundary)}
    n = len(ids)
    sigma = [0] * n
    alpha = [0] * n
    for h in kept:
        sigma[ids[h]] = ids[m.sigma[h]]
        alpha[ids[h]] = ids[m.alpha[h]]
    for h in boundary:
        g = m.sigma[h]
        while m.vertex_of[m.alpha[g]] not in keep:
            g = m.sigma[m.alpha[g]]
        sigma[ids[h]] = ids[g]
        alpha[ids[h]] = ids[m.alpha[h]]
    tau_color = m.color(m.vertex_of[boundary[0]])
    dart_color = {ids[h]: m.dart_color(h) for h in kept}
    dart_color.update({ids[h]: tau_color for h in boundary})
    colors = tuple(dart_color[cycle[0]] for cycle in cycles_of(sigma))
    contracted = build_map(sigma, alpha, ids[root_dart], 0, colors=colors)
    return contracted, contracted.vertex_of[ids[boundary[0]]]


def decompose_doubly_rooted(m: PlaneMap, rho1: int, rho2: int) -> Tuple[Tuple[PlaneMap, int], Tuple[PlaneMap, int]]:
    """Split at the least minimum black cut into a trumpet and a cornet."""
    v1, v2 = m.vertex_of[rho1], m.vertex_of[rho2]
    if v1 == v2:
        raise MapError("doubly rooted maps need two distinct root vertices")
    best = min_cut(m, v2, Color.BLACK, rho=v1)
    if best is None:
        raise InseparablePair("inseparable pair")
    S_min = frozenset.intersection(*(c.S for c in best.minimal))
    cut = cut_of(m, S_min)
    if cut.weight != best.cut.weight or cut.color is not Color.BLACK:
        raise InseparablePair("intersection of minimum black cuts is not a minimum black cut")
    graph = m.vertex_graph()
    for side in (cut.R, cut.S):
        if not nx.is_connected(graph.subgraph(side)):
            raise InseparablePair("a side of the minimum black cut is disconnected")
    trumpet = _contract(m, cut.R, rho1)
    cornet = _contract(m, cut.S, rho2)
    return trumpet, cornet


def glue(trumpet: Tuple[PlaneMap, int], cornet: Tuple[PlaneMap, int], rotation: int) -> Tuple[PlaneMap, int]:
    """Join the stems left by tau1 and tau2 in one of the k planar ways.

    The partner of the i-th dart around tau1 meets the partner of the
    ((rotation - i) mod k)-th dart around tau2.
    """
    (m1, tau1), (m2, tau2) = trumpet, cornet
    k = m1.degree(tau1)
    if m2.degree(tau2) != k:
        raise MapError(f"degree mismatch: {k} vs {m2.degree(tau2)}")
    around1 = [m1.alpha[t] for t in m1.vertices[tau1]]
    around2 = [m2.alpha[t] for t in m2.vertices[tau2]]
    keep1 = [h for h in range(m1.num_darts) if m1.vertex_of[h] != tau1]
    keep2 = [h for h in range(m2.num_darts) if m2.vertex_of[h] != tau2]
    ids1 = {h: i for i, h in enumerate(keep1)}
    ids2 = {h: len(keep1) + i for i, h in enumerate(keep2)}
    n = len(keep1) + len(keep2)
    sigma = [0] * n
    alpha = [0] * n
    for h in keep1:
        sigma[ids1[h]] = ids1[m1.sigma[h]]
        if m1.vertex_of[m1.alpha[h]] != tau1:
            alpha[ids1[h]] = ids1[m1.alpha[h]]
    for h in keep2:
        sigma[ids2[h]] = ids2[m2.sigma[h]]
        if m2.vertex_of[m2.alpha[h]] != tau2:
            alpha[ids2[h]] = ids2[m2.alpha[h]]
    for i, a in enumerate(around1):
        b = around2[(rotation - i) % k]
        alpha[ids1[a]], alpha[ids2[b]] = ids2[b], ids1[a]
    dart_color = {ids1[h]: m1.dart_color(h) for h in keep1}
    dart_color.update({ids2[h]: m2.dart_color(h) for h in keep2})
    colors = tuple(dart_color[cycle[0]] for cycle in cycles_of(sigma))
    glued = build_map(sigma, alpha, ids1[m1.root_dart], 0, colors=colors)
    glued = replace(glued, outer_face=glued.face_of[glued.root_dart])
    return glued, ids2[m2.root_dart]


# ----------------------------------------------------------------------
# Exchange format
# ----------------------------------------------------------------------

def format_blossoming(b: BlossomingMap) -> str:
    """Map-style record: stems are alpha fixed points, annotated per dart."""
    marks = []
    for h in range(b.num_darts):
        marks.append("P" if h == b.planted_dart else (b.stems[h].value if b.stems[h] else "-"))
    root = 0 if b.root_dart is None else b.root_dart + 1
    outer = 0 if b.outer_dart is None else b.outer_dart + 1
    lines = [
        f"darts {b.num_darts}",
        "sigma " + " ".join(str(h + 1) for h in b.sigma),
        "alpha " + " ".join(str(h + 1) for h in b.alpha),
        f"root {root} outer {outer}",
        "colors " + " ".join(c.value for c in b.colors),
        "stems " + " ".join(marks),
    ]
    if b.values is not None:
        lines.append(f"orient k {b.k}")
        lines.append("values " + " ".join(str(v) for v in b.values))
    return "\n".join(lines)


def blossoming_from_record(record: Dict[str, List[str]]) -> BlossomingMap:
    try:
        n = int(record["darts"][0])
        sigma = tuple(int(tok) - 1 for tok in record.get("sigma", []))
        alpha = tuple(int(tok) - 1 for tok in record.get("alpha", []))
        root = int(record["root"][0]) - 1
        outer = int(record["root"][record["root"].index("outer") + 1]) - 1
        colors = tuple(Color(tok) for tok in record["colors"])
        marks = record.get("stems", ["-"] * n)
    except (KeyError, IndexError, ValueError) as exc:
        raise MapError(f"malformed blossoming record: {exc}") from exc
    stems = tuple(StemKind(tok) if tok in ("O", "C") else None for tok in marks)
    planted = marks.index("P") if "P" in marks else None
    values, k = None, None
    if "values" in record:
        values = tuple(int(tok) for tok in record["values"])
        k = int(record["orient"][1])
    return BlossomingMap(sigma, alpha, stems, colors, root if root >= 0 else None,
                         outer if outer >= 0 else None, planted, values, k)
