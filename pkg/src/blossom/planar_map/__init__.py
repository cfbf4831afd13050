"""
Planar Map Component

Dart-permutation representation of rooted plane maps. A map on darts
0..2E-1 is a vertex rotation ``sigma`` (counterclockwise next dart around
a vertex) and an edge involution ``alpha``. Faces are the cycles of
``phi = sigma o alpha``; every dart has its face on its right.

A dart ``h`` also names the corner between ``h`` and ``sigma(h)`` at its
vertex. That corner lies in the face of ``sigma(h)``.

Key responsibilities:
- Validation of (sigma, alpha) pairs: fixed points, connectivity, genus
- Bipartite coloring and duality with the canonical Eulerian direction
- Canonical codes for rooted, pointed and doubly rooted maps
- Textual map exchange format (1-based darts)
- Exhaustive enumeration oracles: bipartite plane maps, pointed and
  doubly rooted maps, spin maps and R-maps
- Monomial weights of the planar, plane, square and Ising schemes
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

# Enumeration caps; anything larger is refused with BudgetExceeded.
MAX_MAP_EDGES = 6
MAX_SPIN_VERTICES = 3
MAX_SPIN_EDGES = 4
MAX_R_MAP_VERTICES = 3

Monomial = Dict[str, int]


class MapError(ValueError):
    """Raised when permutations do not describe a valid planar map."""


class BudgetExceeded(ValueError):
    """Raised instead of truncating an exhaustive enumeration."""


class Color(Enum):
    """Vertex colors of bipartite maps and spin configurations."""
    WHITE = "w"
    BLACK = "b"

    def flip(self) -> "Color":
        return Color.BLACK if self is Color.WHITE else Color.WHITE


def check_budget(value: int, cap: int, what: str) -> None:
    if value > cap:
        logger.warning(f"Refusing {what}={value}: cap is {cap}")
        raise BudgetExceeded(f"{what}={value} exceeds the enumeration cap {cap}")


# ----------------------------------------------------------------------
# Permutation helpers
# ----------------------------------------------------------------------

def cycles_of(perm: Sequence[int]) -> List[Tuple[int, ...]]:
    """Cycles of ``perm``, each starting at its minimal element, sorted."""
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycle = []
        h = start
        while not seen[h]:
            seen[h] = True
            cycle.append(h)
            h = perm[h]
        cycles.append(tuple(cycle))
    return cycles


def invert(perm: Sequence[int]) -> Tuple[int, ...]:
    inverse = [0] * len(perm)
    for i, image in enumerate(perm):
        inverse[image] = i
    return tuple(inverse)


def compose(outer: Sequence[int], inner: Sequence[int]) -> Tuple[int, ...]:
    """``outer o inner``: apply ``inner`` first."""
    return tuple(outer[inner[h]] for h in range(len(inner)))


def bfs_labels(sigma: Sequence[int], alpha: Sequence[int], root: int) -> Dict[int, int]:
    """Breadth-first labels of the darts reachable from ``root``.

    From each dart the search visits ``sigma(h)`` then ``alpha(h)``. This
    order is what makes rotation codes canonical.
    """
    labels = {root: 0}
    queue = deque([root])
    while queue:
        h = queue.popleft()
        for g in (sigma[h], alpha[h]):
            if g not in labels:
                labels[g] = len(labels)
                queue.append(g)
    return labels


def rotation_words(sigma: Sequence[int], alpha: Sequence[int], root: int,
                   tags: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
    """Relabeled (sigma, alpha[, tags]) words seen from ``root``."""
    labels = bfs_labels(sigma, alpha, root)
    order = sorted(labels, key=labels.get)
    words = [len(order)]
    words.extend(labels[sigma[h]] for h in order)
    words.extend(labels[alpha[h]] for h in order)
    if tags is not None:
        words.extend(tags[h] for h in order)
    return tuple(words)


def pack_words(words: Iterable[int]) -> bytes:
    return np.asarray(list(words), dtype="<i4").tobytes()


def min_rotation_code(sigma: Sequence[int], alpha: Sequence[int],
                      tags: Optional[Sequence[int]] = None) -> bytes:
    """Code of the unrooted object: the least rooted code over all roots."""
    if not sigma:
        return pack_words([0])
    return pack_words(min(rotation_words(sigma, alpha, r, tags) for r in range(len(sigma))))


# ----------------------------------------------------------------------
# Domain types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneMap:
    """A validated rooted plane map. Build it with :func:`build_map`."""
    sigma: Tuple[int, ...]
    alpha: Tuple[int, ...]
    root_dart: Optional[int]
    outer_face: int = 0
    colors: Optional[Tuple[Color, ...]] = None
    vertices: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    faces: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    vertex_of: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    face_of: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    phi: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sigma:
            phi = compose(self.sigma, self.alpha)
            vertices = tuple(cycles_of(self.sigma))
            faces = tuple(cycles_of(phi))
        else:
            # atomic map: one vertex, one face, no dart
            phi, vertices, faces = (), ((),), ((),)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "vertex_of", _index_cycles(vertices, len(self.sigma)))
        object.__setattr__(self, "face_of", _index_cycles(faces, len(self.sigma)))

    @property
    def num_darts(self) -> int:
        return len(self.sigma)

    @property
    def num_edges(self) -> int:
        return len(self.sigma) // 2

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def root_vertex(self) -> int:
        return 0 if self.root_dart is None else self.vertex_of[self.root_dart]

    @property
    def is_bipartite(self) -> bool:
        return self.colors is not None

    @cached_property
    def sigma_inv(self) -> Tuple[int, ...]:
        return invert(self.sigma)

    @cached_property
    def phi_inv(self) -> Tuple[int, ...]:
        return invert(self.phi)

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    def face_degree(self, f: int) -> int:
        return len(self.faces[f])

    def color(self, v: int) -> Color:
        if self.colors is None:
            raise MapError("map carries no bipartite coloring")
        return self.colors[v]

    def dart_color(self, h: int) -> Color:
        return self.color(self.vertex_of[h])

    def white_dart(self, h: int) -> int:
        """The dart of the edge of ``h`` that sits at its white endpoint."""
        return h if self.dart_color(h) is Color.WHITE else self.alpha[h]

    def edges(self) -> List[Tuple[int, int]]:
        return [(h, self.alpha[h]) for h in range(self.num_darts) if h < self.alpha[h]]

    def vertex_graph(self) -> nx.MultiGraph:
        """Underlying multigraph, one keyed edge per edge of the map."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.num_vertices))
        for h, g in self.edges():
            graph.add_edge(self.vertex_of[h], self.vertex_of[g], key=h)
        return graph

    def outer_darts(self) -> Tuple[int, ...]:
        return self.faces[self.outer_face]


@dataclass(frozen=True)
class DegreeProfile:
    """Sorted white and black vertex degrees of a bipartite map."""
    white_degrees: Tuple[int, ...]
    black_degrees: Tuple[int, ...]

    @classmethod
    def of(cls, m: PlaneMap, skip: Iterable[int] = ()) -> "DegreeProfile":
        skipped = set(skip)
        white, black = [], []
        for v in range(m.num_vertices):
            if v in skipped:
                continue
            (white if m.color(v) is Color.WHITE else black).append(m.degree(v))
        return cls(tuple(sorted(white)), tuple(sorted(black)))

    @property
    def max_white(self) -> int:
        return max(self.white_degrees, default=0)

    @property
    def max_black(self) -> int:
        return max(self.black_degrees, default=0)


@dataclass(frozen=True)
class SpinConfiguration:
    spins: Tuple[Color, ...]
    mono_count: int

    @classmethod
    def of(cls, m: PlaneMap, spins: Sequence[Color]) -> "SpinConfiguration":
        if len(spins) != m.num_vertices:
            raise MapError(f"{len(spins)} spins for {m.num_vertices} vertices")
        mono = sum(1 for h, g in m.edges() if spins[m.vertex_of[h]] is spins[m.vertex_of[g]])
        return cls(tuple(spins), mono)


@dataclass(frozen=True)
class DualMap:
    """Dual of a plane map.

    ``underlying`` has the primal faces as vertices (same indices) and is
    rooted at ``sigma(root)``; its marked face is the face of the primal
    root vertex. ``pointed`` is the dual vertex of the primal outer face.
    ``canonical_darts`` holds, for bipartite primals, the tail dart of
    every canonically directed dual edge (the primal white darts), so that
    white primal vertices sit on the left.
    """
    underlying: PlaneMap
    pointed: int
    canonical_darts: Optional[FrozenSet[int]] = None

    def canonical_arcs(self) -> List[Tuple[int, int, int]]:
        """(tail dual vertex, head dual vertex, tail dart) per dual edge."""
        if self.canonical_darts is None:
            raise MapError("canonical direction needs a bipartite primal map")
        d = self.underlying
        return [(d.vertex_of[h], d.vertex_of[d.alpha[h]], h) for h in sorted(self.canonical_darts)]


def _index_cycles(cycles: Sequence[Tuple[int, ...]], n: int) -> Tuple[int, ...]:
    index = [0] * n
    for i, cycle in enumerate(cycles):
        for h in cycle:
            index[h] = i
    return tuple(index)


# ----------------------------------------------------------------------
# Construction and validation
# ----------------------------------------------------------------------

def atomic_map(root_color: Color = Color.WHITE) -> PlaneMap:
    """The vertex map: no edge, one vertex, one face."""
    return PlaneMap((), (), None, 0, (root_color,))


def two_coloring(m: PlaneMap, root_color: Color = Color.WHITE) -> Optional[Tuple[Color, ...]]:
    """Proper 2-coloring with the root vertex in ``root_color``, if any."""
    try:
        sides = nx.bipartite.color(m.vertex_graph())
    except nx.NetworkXError:
        return None
    root_side = sides[m.root_vertex]
    return tuple(root_color if sides[v] == root_side else root_color.flip() for v in range(m.num_vertices))


def build_map(sigma: Sequence[int], alpha: Sequence[int], root_dart: Optional[int] = 0,
              outer_face: int = 0, colors: Optional[Sequence[Color]] = None,
              root_color: Color = Color.WHITE) -> PlaneMap:
    """Validate (sigma, alpha) and return the rooted plane map.

    The bipartite coloring is computed when it exists, with the root vertex
    colored ``root_color``; an explicit ``colors`` tuple is checked instead.
    """
    sigma = tuple(int(h) for h in sigma)
    alpha = tuple(int(h) for h in alpha)
    n = len(sigma)
    if len(alpha) != n:
        raise MapError("sigma and alpha act on different dart sets")
    if n == 0:
        m = atomic_map(root_color)
        return replace(m, colors=tuple(colors)) if colors is not None else m
    darts = list(range(n))
    if sorted(sigma) != darts or sorted(alpha) != darts:
        raise MapError("sigma and alpha must be permutations of the darts")
    for h in darts:
        if alpha[h] == h:
            raise MapError(f"alpha has a fixed point at dart {h}")
        if alpha[alpha[h]] != h:
            raise MapError("alpha is not an involution")
    if root_dart is not None and not 0 <= root_dart < n:
        raise MapError(f"root dart {root_dart} out of range")

    m = PlaneMap(sigma, alpha, root_dart, 0, None)
    if not nx.is_connected(m.vertex_graph()):
        raise MapError("disconnected")
    euler = m.num_vertices - m.num_edges + m.num_faces
    if euler != 2:
        raise MapError(f"genus {(2 - euler) // 2} map rejected")
    if not 0 <= outer_face < m.num_faces:
        raise MapError(f"outer face {outer_face} does not exist")

    if colors is None:
        found = two_coloring(m, root_color)
    else:
        found = tuple(colors)
        if len(found) != m.num_vertices:
            raise MapError("one color per vertex expected")
        for h, g in m.edges():
            if found[m.vertex_of[h]] is found[m.vertex_of[g]]:
                raise MapError("coloring is not proper")
    return replace(m, outer_face=outer_face, colors=found)


def reroot(m: PlaneMap, root_dart: Optional[int], outer_face: Optional[int] = None,
           root_color: Optional[Color] = None) -> PlaneMap:
    """Same map with another root (and marked face, and coloring)."""
    if outer_face is None:
        outer_face = m.outer_face
    if root_color is None:
        return replace(m, root_dart=root_dart, outer_face=outer_face)
    return build_map(m.sigma, m.alpha, root_dart, outer_face, root_color=root_color)


def relabel(m: PlaneMap, perm: Sequence[int]) -> PlaneMap:
    """Rename dart ``h`` to ``perm[h]``; root and marked face follow."""
    n = m.num_darts
    if n == 0:
        return m
    sigma = [0] * n
    alpha = [0] * n
    for h in range(n):
        sigma[perm[h]] = perm[m.sigma[h]]
        alpha[perm[h]] = perm[m.alpha[h]]
    moved = build_map(sigma, alpha, perm[m.root_dart] if m.root_dart is not None else None)
    outer = moved.face_of[perm[m.faces[m.outer_face][0]]]
    colors = None
    if m.colors is not None:
        dart_colors = [m.colors[m.vertex_of[h]] for h in invert(perm)]
        colors = tuple(dart_colors[cycle[0]] for cycle in moved.vertices)
    return replace(moved, outer_face=outer, colors=colors)


def random_relabel(m: PlaneMap, rng: np.random.Generator) -> PlaneMap:
    return relabel(m, [int(h) for h in rng.permutation(m.num_darts)])


# ----------------------------------------------------------------------
# Duality
# ----------------------------------------------------------------------

def dual(m: PlaneMap) -> DualMap:
    """Dual map: sigma* = phi^-1, alpha* = alpha, rooted at sigma(root)."""
    if m.num_darts == 0:
        return DualMap(atomic_map(), 0, frozenset() if m.colors is not None else None)
    root = m.sigma[m.root_dart if m.root_dart is not None else 0]
    d = build_map(m.phi_inv, m.alpha, root, 0)
    # dual faces are alpha-images of primal vertex rotations
    marked = d.face_of[m.alpha[m.root_dart if m.root_dart is not None else 0]]
    d = replace(d, outer_face=marked)
    canonical = None
    if m.colors is not None:
        canonical = frozenset(h for h in range(m.num_darts) if m.dart_color(h) is Color.WHITE)
    return DualMap(d, m.outer_face, canonical)


def double_dual(m: PlaneMap) -> PlaneMap:
    """Dual of the dual, marked at the face that carries the primal outer face.

    The result is isomorphic to ``m`` through ``h -> alpha(h)``.
    """
    if m.num_darts == 0:
        return m
    first = dual(m)
    second = dual(first.underlying).underlying
    outer_dart = m.faces[m.outer_face][0]
    marked = second.face_of[m.alpha[outer_dart]]
    root_color = m.dart_color(m.root_dart) if m.colors is not None else Color.WHITE
    return build_map(second.sigma, second.alpha, second.root_dart, marked, root_color=root_color)


# ----------------------------------------------------------------------
# Canonical codes
# ----------------------------------------------------------------------

_COLOR_WORD = {None: 0, Color.WHITE: 1, Color.BLACK: 2}


def canonical_code(m: PlaneMap, marked: bool = True, pointed: Optional[int] = None,
                   second_root: Optional[int] = None,
                   tags: Optional[Sequence[int]] = None) -> bytes:
    """Byte code equal for two maps iff they are isomorphic as rooted maps.

    ``marked`` keeps the outer face in the code, ``pointed`` a distinguished
    vertex and ``second_root`` a second root dart; ``tags`` attaches one
    integer per dart.
    """
    if m.num_darts == 0:
        return pack_words([0, _COLOR_WORD[m.colors[0] if m.colors else None]])
    root = m.root_dart if m.root_dart is not None else 0
    labels = bfs_labels(m.sigma, m.alpha, root)
    words = list(rotation_words(m.sigma, m.alpha, root, tags))
    words.append(_COLOR_WORD[m.colors[m.vertex_of[root]] if m.colors else None])
    if marked:
        words.append(min(labels[h] for h in m.faces[m.outer_face]))
    if pointed is not None:
        words.append(min(labels[h] for h in m.vertices[pointed]))
    if second_root is not None:
        words.append(labels[second_root])
    return pack_words(words)


def unrooted_code(m: PlaneMap) -> bytes:
    """Code of the underlying sphere map, forgetting root, face and colors."""
    return min_rotation_code(m.sigma, m.alpha)


# ----------------------------------------------------------------------
# Exchange format
# ----------------------------------------------------------------------

def format_map(m: PlaneMap, spins: Optional[SpinConfiguration] = None) -> str:
    """Textual record; darts and faces are written 1-based."""
    lines = [
        f"darts {m.num_darts}",
        "sigma " + " ".join(str(h + 1) for h in m.sigma),
        "alpha " + " ".join(str(h + 1) for h in m.alpha),
        f"root {0 if m.root_dart is None else m.root_dart + 1} outer {m.outer_face + 1}",
    ]
    if m.colors is not None:
        lines.append("colors " + " ".join(c.value for c in m.colors))
    if spins is not None:
        lines.append("spins " + " ".join(c.value for c in spins.spins))
    return "\n".join(lines)


def parse_record(text: str) -> Dict[str, List[str]]:
    """Keyword -> tokens for one record; the keyword order is free."""
    record: Dict[str, List[str]] = {}
    for raw in text.strip().splitlines():
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if tokens[0] in record:
            raise MapError(f"duplicate line '{tokens[0]}'")
        record[tokens[0]] = tokens[1:]
    return record


def split_records(text: str) -> List[str]:
    """Records are separated by blank lines."""
    return [block for block in text.strip().split("\n\n") if block.strip()]


def map_from_record(record: Dict[str, List[str]]) -> PlaneMap:
    try:
        n = int(record["darts"][0])
        sigma = [int(tok) - 1 for tok in record.get("sigma", [])]
        alpha = [int(tok) - 1 for tok in record.get("alpha", [])]
        root_line = record["root"]
        root = int(root_line[0]) - 1
        outer = int(root_line[root_line.index("outer") + 1]) - 1
    except (KeyError, IndexError, ValueError) as exc:
        raise MapError(f"malformed map record: {exc}") from exc
    if len(sigma) != n:
        raise MapError(f"expected {n} sigma entries, found {len(sigma)}")
    colors = None
    if "colors" in record:
        colors = [Color(tok) for tok in record["colors"]]
    return build_map(sigma, alpha, root if root >= 0 else None, outer, colors=colors,
                     root_color=colors[0] if colors else Color.WHITE)


def parse_map(text: str) -> PlaneMap:
    return map_from_record(parse_record(text))


def parse_spin_map(text: str) -> Tuple[PlaneMap, SpinConfiguration]:
    record = parse_record(text)
    m = map_from_record(record)
    if "spins" not in record:
        raise MapError("record has no spins line")
    return m, SpinConfiguration.of(m, [Color(tok) for tok in record["spins"]])


# ----------------------------------------------------------------------
# Enumeration
# ----------------------------------------------------------------------

def _grow(base: PlaneMap) -> Iterator[PlaneMap]:
    """Maps with one more edge: a pendant edge at a corner, or a chord
    between two corners of one face at vertices of opposite colors."""
    n = base.num_darts
    for h in range(n):
        sigma = list(base.sigma) + [base.sigma[h], n + 1]
        sigma[h] = n
        alpha = list(base.alpha) + [n + 1, n]
        yield build_map(sigma, alpha)
    for h1 in range(n):
        for h2 in range(h1 + 1, n):
            if base.face_of[base.sigma[h1]] != base.face_of[base.sigma[h2]]:
                continue
            if base.dart_color(h1) is base.dart_color(h2):
                continue
            sigma = list(base.sigma) + [base.sigma[h1], base.sigma[h2]]
            sigma[h1] = n
            sigma[h2] = n + 1
            alpha = list(base.alpha) + [n + 1, n]
            yield build_map(sigma, alpha)


@lru_cache(maxsize=None)
def enumerate_sphere_bipartite_maps(n_edges: int) -> Tuple[PlaneMap, ...]:
    """One representative per unrooted bipartite sphere map with n edges."""
    check_budget(n_edges, MAX_MAP_EDGES, "n_edges")
    if n_edges == 0:
        return (atomic_map(),)
    if n_edges == 1:
        return (build_map((0, 1), (1, 0)),)
    classes: Dict[bytes, PlaneMap] = {}
    for base in enumerate_sphere_bipartite_maps(n_edges - 1):
        for grown in _grow(base):
            classes.setdefault(unrooted_code(grown), grown)
    logger.info(f"{len(classes)} unrooted bipartite maps with {n_edges} edges")
    return tuple(classes[code] for code in sorted(classes))


def _rooted_variants(n_edges: int, root_color: Color, marked: bool) -> Iterator[PlaneMap]:
    for base in enumerate_sphere_bipartite_maps(n_edges):
        for r in range(base.num_darts):
            faces = range(base.num_faces) if marked else [base.face_of[r]]
            for f in faces:
                yield build_map(base.sigma, base.alpha, r, f, root_color=root_color)


def enumerate_bipartite_plane_maps(n_edges: int, max_white_degree: Optional[int] = None,
                                   root_color: Color = Color.WHITE) -> List[PlaneMap]:
    """Rooted bipartite plane maps (root and marked face), one per class."""
    check_budget(n_edges, MAX_MAP_EDGES, "n_edges")
    if n_edges == 0:
        return [atomic_map(root_color)]
    found: Dict[bytes, PlaneMap] = {}
    for m in _rooted_variants(n_edges, root_color, marked=True):
        if max_white_degree is not None and DegreeProfile.of(m).max_white > max_white_degree:
            continue
        found.setdefault(canonical_code(m), m)
    logger.info(f"{len(found)} rooted bipartite plane maps with {n_edges} edges")
    return [found[code] for code in sorted(found)]


def enumerate_bipartite_planar_maps(n_edges: int, root_color: Color = Color.WHITE) -> List[PlaneMap]:
    """Rooted bipartite planar maps; the stored outer face is the root face."""
    check_budget(n_edges, MAX_MAP_EDGES, "n_edges")
    if n_edges == 0:
        return [atomic_map(root_color)]
    found: Dict[bytes, PlaneMap] = {}
    for m in _rooted_variants(n_edges, root_color, marked=False):
        found.setdefault(canonical_code(m, marked=False), m)
    return [found[code] for code in sorted(found)]


def enumerate_pointed_maps(n_edges: int, root_color: Color = Color.WHITE,
                           tau_color: Optional[Color] = None) -> List[Tuple[PlaneMap, int]]:
    """Rooted bipartite planar maps with a marked vertex tau away from the root."""
    pointed = []
    for m in enumerate_bipartite_planar_maps(n_edges, root_color):
        for tau in range(m.num_vertices):
            if tau == m.root_vertex:
                continue
            if tau_color is not None and m.color(tau) is not tau_color:
                continue
            pointed.append((m, tau))
    return pointed


def enumerate_doubly_rooted_maps(n_edges: int, colors: str = "ww") -> List[Tuple[PlaneMap, int]]:
    """Bipartite planar maps with two root corners on distinct vertices.

    ``colors`` names the colors of the two root vertices (ww, wb or bb).
    """
    first, second = Color(colors[0]), Color(colors[1])
    doubly = []
    for m in enumerate_bipartite_planar_maps(n_edges, first):
        for r2 in range(m.num_darts):
            if m.vertex_of[r2] != m.root_vertex and m.dart_color(r2) is second:
                doubly.append((m, r2))
    return doubly


def _perfect_matchings(darts: Sequence[int]) -> Iterator[List[Tuple[int, int]]]:
    if not darts:
        yield []
        return
    first = darts[0]
    for i in range(1, len(darts)):
        rest = list(darts[1:i]) + list(darts[i + 1:])
        for matching in _perfect_matchings(rest):
            yield [(first, darts[i])] + matching


def _alpha_from(matching: Iterable[Tuple[int, int]], n: int) -> List[int]:
    alpha = [0] * n
    for a, b in matching:
        alpha[a], alpha[b] = b, a
    return alpha


def _rooted_planar_classes(candidates: Iterable[Tuple[Sequence[int], Sequence[int]]]) -> List[PlaneMap]:
    found: Dict[bytes, PlaneMap] = {}
    for sigma, alpha in candidates:
        try:
            base = build_map(sigma, alpha)
        except MapError:
            continue
        for r in range(base.num_darts):
            m = reroot(base, r, base.face_of[r])
            found.setdefault(canonical_code(m, marked=False), m)
    return [found[code] for code in sorted(found)]


def enumerate_spin_maps(n_vertices: Optional[int] = None, degree: Optional[int] = 4,
                        n_edges: Optional[int] = None) -> List[Tuple[PlaneMap, SpinConfiguration]]:
    """Rooted planar maps paired with every spin configuration.

    Quartic mode (``degree=4``) fixes ``n_vertices`` 4-valent vertices and
    ranges over all edge pairings. Unrestricted mode (``degree=None``)
    ranges over all rotations of ``n_edges`` fixed edges, optionally
    keeping only ``n_vertices`` vertices.
    """
    if degree is not None:
        if degree != 4 or n_vertices is None:
            raise ValueError("spin maps with fixed degree need degree=4 and n_vertices")
        check_budget(n_vertices, MAX_SPIN_VERTICES, "n_vertices")
        if n_vertices == 0:
            return []
        n = 4 * n_vertices
        sigma = [4 * (h // 4) + (h + 1) % 4 for h in range(n)]
        candidates = ((sigma, _alpha_from(mt, n)) for mt in _perfect_matchings(list(range(n))))
        maps = _rooted_planar_classes(candidates)
    else:
        if n_edges is None:
            raise ValueError("unrestricted spin maps need n_edges")
        check_budget(n_edges, MAX_SPIN_EDGES, "n_edges")
        if n_edges == 0:
            return []
        n = 2 * n_edges
        alpha = [h ^ 1 for h in range(n)]
        maps = _rooted_planar_classes((perm, alpha) for perm in permutations(range(n)))
        if n_vertices is not None:
            maps = [m for m in maps if m.num_vertices == n_vertices]
    result = []
    for m in maps:
        for spins in product((Color.WHITE, Color.BLACK), repeat=m.num_vertices):
            result.append((m, SpinConfiguration.of(m, spins)))
    logger.info(f"{len(result)} spin maps ({len(maps)} rooted maps)")
    return result


def enumerate_r_maps(n_quartic: int) -> List[Tuple[PlaneMap, int, SpinConfiguration]]:
    """Rooted maps with a white pendant root vertex, a black pendant vertex tau
    and ``n_quartic`` 4-valent vertices carrying every spin assignment.

    Dart 0 is the root pendant and dart 1 the tau pendant.
    """
    check_budget(n_quartic, MAX_R_MAP_VERTICES, "n_quartic")
    n = 2 + 4 * n_quartic
    sigma = [0, 1] + [2 + 4 * ((h - 2) // 4) + (h - 2 + 1) % 4 for h in range(2, n)]
    found: Dict[bytes, Tuple[PlaneMap, int]] = {}
    for matching in _perfect_matchings(list(range(n))):
        try:
            m = build_map(sigma, _alpha_from(matching, n), 0)
        except MapError:
            continue
        tau = m.vertex_of[1]
        found.setdefault(canonical_code(m, marked=False, pointed=tau), (m, tau))
    result = []
    for code in sorted(found):
        m, tau = found[code]
        free = [v for v in range(m.num_vertices) if v not in (m.root_vertex, tau)]
        for assignment in product((Color.WHITE, Color.BLACK), repeat=len(free)):
            spins = [Color.WHITE] * m.num_vertices
            spins[tau] = Color.BLACK
            for v, c in zip(free, assignment):
                spins[v] = c
            result.append((m, tau, SpinConfiguration.of(m, spins)))
    logger.info(f"{len(result)} R-maps with {n_quartic} quartic vertices")
    return result


# ----------------------------------------------------------------------
# Weights
# ----------------------------------------------------------------------

def bump(monomial: Monomial, var: str, exp: int = 1) -> None:
    if exp:
        monomial[var] = monomial.get(var, 0) + exp
        if monomial[var] == 0:
            del monomial[var]


def weight(m: PlaneMap, scheme: str, spins: Optional[SpinConfiguration] = None,
           squares: Optional[Iterable[int]] = None, unweighted: Iterable[int] = ()) -> Monomial:
    """Monomial of ``m`` under a weight scheme, as a {variable: exponent} dict.

    planar: u^F prod x_deg(white) prod y_deg(black); plane: planar / u;
    square: planar with square vertices unweighted, times t per maximal chain
    of squares and nu per square; ising: t^E nu^mono u^F with the vertex
    products taken over spins. Vertices in ``unweighted`` get no x/y factor.
    """
    skip = set(unweighted)
    monomial: Monomial = {}
    if scheme in ("planar", "plane", "square"):
        if m.colors is None:
            raise MapError(f"{scheme} weight needs a bipartite map")
        sides = m.colors
    elif scheme == "ising":
        if spins is None:
            raise MapError("ising weight needs a spin configuration")
        sides = spins.spins
        bump(monomial, "t", m.num_edges)
        bump(monomial, "nu", spins.mono_count)
    else:
        raise ValueError(f"Unknown weight scheme: {scheme}")

    square_set = set(squares or ())
    if scheme == "square":
        if squares is None:
            raise MapError("square weight needs the square vertex annotation")
        if any(m.degree(v) != 2 for v in square_set):
            raise MapError("square vertices must have degree two")
        # a round-round edge is an empty chain
        graph = m.vertex_graph().subgraph(square_set)
        empty = sum(1 for h, g in m.edges()
                    if m.vertex_of[h] not in square_set and m.vertex_of[g] not in square_set)
        bump(monomial, "t", nx.number_connected_components(graph) + empty)
        bump(monomial, "nu", len(square_set))
        skip |= square_set

    bump(monomial, "u", m.num_faces - (1 if scheme == "plane" else 0))
    for v in range(m.num_vertices):
        if v in skip:
            continue
        prefix = "x" if sides[v] is Color.WHITE else "y"
        bump(monomial, f"{prefix}{m.degree(v)}")
    return monomial


def monomial_key(monomial: Monomial) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted((var, exp) for var, exp in monomial.items() if exp))
