"""
Series Component

Exact truncated multivariate power series over the rationals, Laurent in
the charge variable ``xi``, and the generating functions built on them.

Key responsibilities:
- Truncated arithmetic under a weighted grading, per-variable caps and a
  bounded xi window
- Order-ramping fixed-point solver shared by every algebraic system
- Well-charged tree series B and W, plane map, trumpet, cornet and doubly
  rooted map series
- Quartic closed forms (P, M_o, Pol) and the quartic Ising
  parametrization through the Lagrangian series Q
- Square substitution and the Theta change of variables
"""

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, TypeVar, Union

from ..planar_map import Color, Monomial, check_budget

logger = logging.getLogger(__name__)

MAX_SERIES_ORDER = 12
MAX_T_ORDER = 16

Exponents = Tuple[int, ...]
Scalar = Union[int, Fraction]
State = TypeVar("State")


class SeriesError(ArithmeticError):
    """Raised on non-invertible input, xi-window overflow, inexact division,
    non-convergence and failed closed-form identities."""


def _normalize(c: Scalar) -> Scalar:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


# ----------------------------------------------------------------------
# Rings
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesRing:
    """Variables, grading weights and truncation.

    A term is kept when its weighted grade is at most ``order`` and every
    capped variable stays within its cap. The ``xi`` variable may carry
    negative exponents inside ``[-xi_window, xi_window]``; leaving the
    window is an error, never a silent clamp.
    """
    variables: Tuple[str, ...]
    weights: Tuple[int, ...]
    order: int
    xi: Optional[str] = None
    xi_window: int = 0
    caps: Tuple[Optional[int], ...] = ()
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.weights) != len(self.variables):
            raise ValueError("one grading weight per variable")
        if not self.caps:
            object.__setattr__(self, "caps", tuple([None] * len(self.variables)))
        object.__setattr__(self, "index", {v: i for i, v in enumerate(self.variables)})

    @property
    def xi_index(self) -> Optional[int]:
        return None if self.xi is None else self.index[self.xi]

    def grade(self, e: Exponents) -> int:
        return sum(w * x for w, x in zip(self.weights, e) if w)

    def keeps(self, e: Exponents) -> bool:
        if self.grade(e) > self.order:
            return False
        for x, cap in zip(e, self.caps):
            if cap is not None and x > cap:
                return False
        if self.xi is not None and abs(e[self.xi_index]) > self.xi_window:
            raise SeriesError(f"xi exponent {e[self.xi_index]} outside the window "
                              f"[-{self.xi_window}, {self.xi_window}]")
        return True

    def exponents(self, monomial: Mapping[str, int]) -> Exponents:
        e = [0] * len(self.variables)
        for var, x in monomial.items():
            if var not in self.index:
                if x:
                    raise SeriesError(f"variable {var} is not in the ring")
                continue
            e[self.index[var]] += x
        return tuple(e)

    def series(self, terms: Mapping[Exponents, Scalar]) -> "TruncatedSeries":
        kept = {e: _normalize(c) for e, c in terms.items() if c and self.keeps(e)}
        return TruncatedSeries(self, kept)

    def monomial(self, monomial: Optional[Mapping[str, int]] = None, coeff: Scalar = 1) -> "TruncatedSeries":
        return self.series({self.exponents(monomial or {}): coeff})

    def var(self, name: str) -> "TruncatedSeries":
        return self.monomial({name: 1})

    def constant(self, c: Scalar) -> "TruncatedSeries":
        return self.monomial({}, c)

    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {})

    def one(self) -> "TruncatedSeries":
        return self.constant(1)

    def with_order(self, order: int) -> "SeriesRing":
        return replace(self, order=order)

    def shifted(self, e: Exponents) -> "SeriesRing":
        """Ring in which a quotient by the monomial ``e`` is still exact."""
        caps = tuple(None if cap is None else cap - x for cap, x in zip(self.caps, e))
        return replace(self, order=self.order - self.grade(e), caps=caps)

    def meet(self, other: "SeriesRing") -> "SeriesRing":
        if other.variables != self.variables:
            raise SeriesError(f"incompatible variable sets {self.variables} and {other.variables}")
        caps = tuple(b if a is None else (a if b is None else min(a, b))
                     for a, b in zip(self.caps, other.caps))
        return replace(self, order=min(self.order, other.order),
                       xi_window=min(self.xi_window, other.xi_window), caps=caps)


def make_ring(variables: Sequence[str], weights: Mapping[str, int], order: int,
              xi: Optional[str] = None, xi_window: int = 0,
              caps: Optional[Mapping[str, int]] = None) -> SeriesRing:
    caps = caps or {}
    return SeriesRing(tuple(variables), tuple(weights.get(v, 0) for v in variables), order,
                      xi, xi_window, tuple(caps.get(v) for v in variables))


def tree_ring(degrees: Iterable[int], order: int, caps: Optional[Mapping[str, int]] = None) -> SeriesRing:
    """x_k, y_k weighted by k (twice the edge count), plus u and xi.

    ``order`` counts edges; the xi window is max(order + 3, 2 * order, K).
    """
    degrees = sorted(degrees)
    names = [f"x{k}" for k in degrees] + [f"y{k}" for k in degrees] + ["u", "xi"]
    weights = {f"{p}{k}": k for p in "xy" for k in degrees}
    window = max(order + 3, 2 * order, degrees[-1] if degrees else 0)
    return make_ring(names, weights, 2 * order, "xi", window, caps)


def quartic_ring(order: int, caps: Optional[Mapping[str, int]] = None) -> SeriesRing:
    return make_ring(("x2", "x4", "y2", "y4", "u"), {"x2": 2, "x4": 4, "y2": 2, "y4": 4},
                     2 * order, caps=caps)


def ising_ring(t_order: int, nu_cap: Optional[int] = None) -> SeriesRing:
    caps = None if nu_cap is None else {"nu": nu_cap}
    return make_ring(("x", "y", "t", "nu", "u"), {"t": 1}, t_order, caps=caps)


# ----------------------------------------------------------------------
# Series
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    ring: SeriesRing
    terms: Dict[Exponents, Scalar]

    # -- coercion ------------------------------------------------------

    def _pair(self, other) -> Tuple["TruncatedSeries", "TruncatedSeries", SeriesRing]:
        if not isinstance(other, TruncatedSeries):
            other = self.ring.constant(other)
        ring = self.ring if other.ring == self.ring else self.ring.meet(other.ring)
        return self, other, ring

    def to_ring(self, ring: SeriesRing) -> "TruncatedSeries":
        """Re-express in ``ring``, matching variables by name and truncating."""
        if ring.variables == self.ring.variables:
            return ring.series(self.terms)
        moved: Dict[Exponents, Scalar] = {}
        for e, c in self.terms.items():
            target = ring.exponents({v: x for v, x in zip(self.ring.variables, e) if x})
            moved[target] = moved.get(target, 0) + c
        return ring.series(moved)

    def retruncate(self, order: int) -> "TruncatedSeries":
        return self.to_ring(self.ring.with_order(order))

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other) -> "TruncatedSeries":
        a, b, ring = self._pair(other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            out[e] = out.get(e, 0) + c
        return ring.series(out)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-other if isinstance(other, TruncatedSeries) else -Fraction(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return (-self) + other

    def _by_grade(self) -> Dict[int, List[Tuple[Exponents, Scalar]]]:
        buckets: Dict[int, List[Tuple[Exponents, Scalar]]] = {}
        for e, c in self.terms.items():
            buckets.setdefault(self.ring.grade(e), []).append((e, c))
        return buckets

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            if not other:
                return self.ring.zero()
            return TruncatedSeries(self.ring, {e: _normalize(c * other) for e, c in self.terms.items()})
        a, b, ring = self._pair(other)
        out: Dict[Exponents, Scalar] = {}
        left, right = a._by_grade(), b._by_grade()
        for ga, la in left.items():
            for gb, lb in right.items():
                if ga + gb > ring.order:
                    continue
                for ea, ca in la:
                    for eb, cb in lb:
                        e = tuple(x + y for x, y in zip(ea, eb))
                        out[e] = out.get(e, 0) + ca * cb
        return ring.series(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Scalar) -> "TruncatedSeries":
        if isinstance(scalar, TruncatedSeries):
            return self * scalar.invert_unit()
        return self * (Fraction(1) / Fraction(scalar))

    def __pow__(self, n: int) -> "TruncatedSeries":
        if n < 0:
            return self.invert_unit() ** (-n)
        result, base = self.ring.one(), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            other = self.ring.constant(other)
        try:
            _, _, ring = self._pair(other)
        except SeriesError:
            return False
        return self.to_ring(ring).terms == other.to_ring(ring).terms

    __hash__ = None

    # -- queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Scalar:
        return self.terms.get(tuple([0] * len(self.ring.variables)), 0)

    def coefficient(self, monomial: Mapping[str, int]) -> Scalar:
        return self.terms.get(self.ring.exponents(monomial), 0)

    def monomials(self) -> List[Tuple[Monomial, Scalar]]:
        out = []
        for e in sorted(self.terms):
            out.append(({v: x for v, x in zip(self.ring.variables, e) if x}, self.terms[e]))
        return out

    def select(self, keep: Callable[[Monomial], bool]) -> "TruncatedSeries":
        names = self.ring.variables
        return TruncatedSeries(self.ring, {e: c for e, c in self.terms.items()
                                           if keep({v: x for v, x in zip(names, e) if x})})

    def is_nonnegative_integral(self) -> bool:
        return all(isinstance(c, int) and c >= 0 for c in self.terms.values())

    def dump(self) -> str:
        """One line per monomial, ``<rational> <var>^<exp> ...``, sorted."""
        lines = []
        for monomial, c in self.monomials():
            body = " ".join(f"{v}^{x}" for v, x in sorted(monomial.items())) or "1"
            lines.append(f"{c} {body}")
        return "\n".join(sorted(lines))

    # -- operations ----------------------------------------------------

    def substitute(self, mapping: Mapping[str, Union["TruncatedSeries", Scalar]],
                   target: Optional[SeriesRing] = None) -> "TruncatedSeries":
        """Replace variables by series of ``target``; the others carry over by name."""
        target = target or self.ring
        images = {var: img if isinstance(img, TruncatedSeries) else target.constant(img)
                  for var, img in mapping.items()}
        slots = [i for i, v in enumerate(self.ring.variables) if v in images]
        groups: Dict[Exponents, Dict[Exponents, Scalar]] = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in slots)
            rest = {v: x for i, (v, x) in enumerate(zip(self.ring.variables, e)) if x and i not in slots}
            te = target.exponents(rest)
            bucket = groups.setdefault(key, {})
            bucket[te] = bucket.get(te, 0) + c
        powers: Dict[Tuple[int, int], TruncatedSeries] = {}

        def power(i: int, x: int) -> TruncatedSeries:
            if (i, x) not in powers:
                img = images[self.ring.variables[i]].to_ring(target)
                powers[(i, x)] = target.one() if x == 0 else power(i, x - 1) * img
            return powers[(i, x)]

        result = target.zero()
        for key, rest in groups.items():
            part = target.series(rest)
            for i, x in zip(slots, key):
                if part.is_zero():
                    break
                if x:
                    part = part * power(i, x)
            result = result + part
        return result

    def specialize(self, values: Mapping[str, Scalar]) -> "TruncatedSeries":
        return self.substitute(values)

    def invert_unit(self) -> "TruncatedSeries":
        """Geometric inverse; the non-constant part must be nilpotent under truncation."""
        c = self.constant_term()
        if not c:
            raise SeriesError("series is not invertible: zero constant term")
        rest = self - c
        for e in rest.terms:
            if self.ring.grade(e) == 0 and not any(
                    x > 0 and cap is not None for x, cap in zip(e, self.ring.caps)):
                raise SeriesError("series is not invertible in this truncation")
        r = rest * (-Fraction(1) / Fraction(c))
        total, term = self.ring.one(), self.ring.one()
        while True:
            term = term * r
            if term.is_zero():
                break
            total = total + term
        return total * (Fraction(1) / Fraction(c))

    def differentiate(self, var: str = "u") -> "TruncatedSeries":
        i = self.ring.index[var]
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return self.ring.series(out)

    def integrate(self, var: str = "u") -> "TruncatedSeries":
        i = self.ring.index[var]
        out = {}
        for e, c in self.terms.items():
            if e[i] == -1:
                raise SeriesError(f"cannot integrate a {var}^-1 term")
            f = list(e)
            f[i] += 1
            out[tuple(f)] = Fraction(c) / (e[i] + 1)
        return self.ring.series(out)

    def divide_monomial(self, monomial: Mapping[str, int]) -> "TruncatedSeries":
        """Exact division by a monomial; the result lives in the shifted ring."""
        d = self.ring.exponents(monomial)
        ring = self.ring.shifted(d)
        out = {}
        for e, c in self.terms.items():
            f = tuple(x - y for x, y in zip(e, d))
            if any(x < 0 for i, x in enumerate(f) if i != self.ring.xi_index):
                body = " ".join(f"{v}^{x}" for v, x in monomial.items())
                raise SeriesError(f"inexact division by {body}")
            out[f] = c
        return ring.series(out)

    def divide_polynomial(self, divisor: "TruncatedSeries", var: str) -> "TruncatedSeries":
        """Exact division by a polynomial in ``var`` alone with rational coefficients."""
        i = self.ring.index[var]
        if self.ring.caps[i] is not None:
            raise SeriesError(f"division in {var} needs {var} untruncated")
        poly: Dict[int, Scalar] = {}
        for e, c in divisor.terms.items():
            if any(x for j, x in enumerate(e) if j != i):
                raise SeriesError(f"divisor must be a polynomial in {var} alone")
            poly[e[i]] = c
        if not poly:
            raise SeriesError("division by zero")
        top = max(poly)
        lead = Fraction(poly[top])
        groups: Dict[Exponents, Dict[int, Scalar]] = {}
        for e, c in self.terms.items():
            key = e[:i] + (0,) + e[i + 1:]
            groups.setdefault(key, {})[e[i]] = c
        out: Dict[Exponents, Scalar] = {}
        for key, rem in groups.items():
            rem = dict(rem)
            while rem and max(rem) >= top:
                deg = max(rem)
                q = Fraction(rem[deg]) / lead
                out[key[:i] + (deg - top,) + key[i + 1:]] = q
                for k, a in poly.items():
                    val = rem.get(deg - top + k, 0) - q * a
                    if val:
                        rem[deg - top + k] = val
                    else:
                        rem.pop(deg - top + k, None)
            if rem:
                raise SeriesError(f"inexact division by a polynomial in {var}")
        return self.ring.series(out)

    def xi_extract(self, mode: str, p: int = 0) -> "TruncatedSeries":
        return xi_extract(self, mode, p)

    def swap_colors(self) -> "TruncatedSeries":
        return swap_colors(self)


def xi_extract(s: TruncatedSeries, mode: str, p: int = 0) -> TruncatedSeries:
    """``le p`` and ``ge p`` keep xi exponents on one side of p; ``coeff p``
    keeps xi^p and divides it out."""
    i = s.ring.xi_index
    if i is None:
        raise SeriesError("ring has no xi variable")
    if mode == "le":
        return TruncatedSeries(s.ring, {e: c for e, c in s.terms.items() if e[i] <= p})
    if mode == "ge":
        return TruncatedSeries(s.ring, {e: c for e, c in s.terms.items() if e[i] >= p})
    if mode == "coeff":
        return TruncatedSeries(s.ring, {e[:i] + (0,) + e[i + 1:]: c
                                        for e, c in s.terms.items() if e[i] == p})
    raise ValueError(f"Unknown xi extraction mode: {mode}")


def swap_colors(s: TruncatedSeries) -> TruncatedSeries:
    """Exchange x_k and y_k (or x and y)."""
    names = s.ring.variables
    perm = []
    for v in names:
        if v[:1] in ("x", "y") and (v[1:].isdigit() or v[1:] == ""):
            partner = ("y" if v[0] == "x" else "x") + v[1:]
            if partner not in s.ring.index:
                raise SeriesError(f"{v} has no partner {partner} in the ring")
            perm.append(s.ring.index[partner])
        else:
            perm.append(s.ring.index[v])
    out = {}
    for e, c in s.terms.items():
        f = [0] * len(e)
        for i, x in enumerate(e):
            f[perm[i]] = x
        out[tuple(f)] = c
    return s.ring.series(out)


def series_arith(a: TruncatedSeries, b: Optional[TruncatedSeries], op: str,
                 var: str = "u") -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "substitute":
        return a.substitute({var: b})
    if op == "invert_unit":
        return a.invert_unit()
    if op == "differentiate_u":
        return a.differentiate(var)
    if op == "integrate_u":
        return a.integrate(var)
    raise ValueError(f"Unknown series operation: {op}")


def series_from_weights(ring: SeriesRing, monomials: Iterable[Monomial]) -> TruncatedSeries:
    """Sum of weight monomials, e.g. an enumeration oracle."""
    out: Dict[Exponents, int] = {}
    for monomial in monomials:
        e = ring.exponents(monomial)
        out[e] = out.get(e, 0) + 1
    return ring.series(out)


# ----------------------------------------------------------------------
# Fixed points
# ----------------------------------------------------------------------

def _lift(state, ring: SeriesRing):
    if isinstance(state, TruncatedSeries):
        return state.to_ring(ring)
    return tuple(_lift(s, ring) for s in state)


def _same(a, b) -> bool:
    if isinstance(a, TruncatedSeries):
        return a == b
    return all(_same(x, y) for x, y in zip(a, b))


def solve_fixed_point(step: Callable[[SeriesRing, State], State], ring: SeriesRing,
                      initial: Callable[[SeriesRing], State], name: str = "fixed point") -> State:
    """Raise the truncation one grade at a time; one step fixes each new grade.

    ``step`` must only read strictly lower grades of its argument for the
    new grade of its result. A last step at full order must leave the
    state unchanged.
    """
    state = initial(ring.with_order(0))
    for level in range(ring.order + 1):
        sub = ring.with_order(level)
        state = step(sub, _lift(state, sub))
    final = step(ring, state)
    if not _same(final, state):
        raise SeriesError(f"{name} did not stabilize within {ring.order + 2} iterations")
    logger.debug(f"{name} solved at order {ring.order}")
    return state


# ----------------------------------------------------------------------
# Trees and maps
# ----------------------------------------------------------------------

@dataclass
class TreeSeriesPair:
    B: TruncatedSeries
    W: TruncatedSeries
    degrees: Tuple[int, ...]

    @property
    def ring(self) -> SeriesRing:
        return self.B.ring

    def component(self, color: Color, k: int) -> TruncatedSeries:
        """B_k or W_k."""
        s = self.B if color is Color.BLACK else self.W
        return s.xi_extract("coeff", k)

    @cached_property
    def black_sum(self) -> TruncatedSeries:
        """sum_l y_l (u/xi + W)^l over l >= 1."""
        return _degree_sum(self.ring, "y", self.degrees, self.ring.monomial({"u": 1, "xi": -1}) + self.W, 0)

    @cached_property
    def white_sum(self) -> TruncatedSeries:
        """sum_l x_l (xi + B)^l over l >= 1."""
        return _degree_sum(self.ring, "x", self.degrees, self.ring.var("xi") + self.B, 0)


def _degree_sum(ring: SeriesRing, prefix: str, degrees: Sequence[int], base: TruncatedSeries,
                shift: int) -> TruncatedSeries:
    """sum over l of prefix_{l + shift} * base^l, with l + shift in ``degrees``."""
    total = ring.zero()
    power = ring.one()
    for l in range(max(degrees) + 1):
        if l + shift in degrees:
            total = total + ring.var(f"{prefix}{l + shift}") * power
        if l + shift >= max(degrees):
            break
        power = power * base
    return total


def solve_tree_system(max_degree: int, order: int, degrees: Optional[Iterable[int]] = None,
                      caps: Optional[Mapping[str, int]] = None) -> TreeSeriesPair:
    """Planted well-charged tree series.

    B = [xi^<=1] sum_l y_{l+1} (u/xi + W)^l and W = [xi^>=0] sum_l x_{l+1} (xi + B)^l,
    with ``order`` counting edges (half the degree sum).
    """
    check_budget(order, MAX_SERIES_ORDER, "order")
    degrees = tuple(sorted(set(degrees))) if degrees is not None else tuple(range(1, max_degree + 1))
    ring = tree_ring(degrees, order, caps)

    def step(sub: SeriesRing, state):
        B, W = state
        black = _degree_sum(sub, "y", degrees, sub.monomial({"u": 1, "xi": -1}) + W, 1)
        white = _degree_sum(sub, "x", degrees, sub.var("xi") + B, 1)
        return black.xi_extract("le", 1), white.xi_extract("ge", 0)

    B, W = solve_fixed_point(step, ring, lambda sub: (sub.zero(), sub.zero()), "tree system")
    logger.info(f"tree system solved at order {order}: {len(B.terms)} black and {len(W.terms)} white terms")
    return TreeSeriesPair(B, W, degrees)


def plane_map_series(pair: TreeSeriesPair) -> TruncatedSeries:
    """White-rooted bipartite plane maps, weight u^{F-1} prod x prod y."""
    return pair.white_sum.xi_extract("coeff", 0)


def trumpet_cornet_series(pair: TreeSeriesPair, k: int, root_color: Color, kind: str) -> TruncatedSeries:
    """Trumpets (u^k [xi^k]) and cornets ([xi^-k]) with a degree-k tau left unweighted."""
    if k < 1:
        raise SeriesError(f"k must be positive, got {k}")
    total = pair.white_sum if root_color is Color.WHITE else pair.black_sum
    if kind == "trumpet":
        return pair.ring.monomial({"u": k}) * total.xi_extract("coeff", k)
    if kind == "cornet":
        return total.xi_extract("coeff", -k)
    raise ValueError(f"Unknown pointed map kind: {kind}")


def doubly_rooted_series(pair: TreeSeriesPair, colors: str) -> TruncatedSeries:
    """sum_k k u^-k M^t_k M^c_k for root colors ww, wb or bb.

    The u^k factor of every trumpet must cancel exactly.
    """
    if colors not in ("ww", "wb", "bb"):
        raise ValueError(f"Unknown root colors: {colors}")
    first, second = Color(colors[0]), Color(colors[1])
    total = pair.ring.zero()
    for k in range(1, pair.ring.xi_window + 1):
        trumpet = trumpet_cornet_series(pair, k, first, "trumpet")
        cornet = trumpet_cornet_series(pair, k, second, "cornet")
        if trumpet.is_zero() or cornet.is_zero():
            continue
        try:
            total = total + (trumpet * cornet).divide_monomial({"u": k}) * k
        except SeriesError as exc:
            raise SeriesError(f"surviving negative u exponent at k={k}") from exc
    return total


# ----------------------------------------------------------------------
# Quartic closed forms
# ----------------------------------------------------------------------

class ClosedFormCatalog:
    """Quartic closed forms, each written down once.

    Bipartite entries take P in the ring of :func:`quartic_ring`; Ising
    entries take Q in the ring of :func:`ising_ring`.
    """

    ENTRIES = ("p_equation", "planar", "plane", "plane_root4", "pol", "pol_denominator",
               "lagrangian", "pol_ising", "ising_denominator")

    @staticmethod
    def _vars(s: TruncatedSeries, *names: str) -> List[TruncatedSeries]:
        return [s.ring.var(n) for n in names]

    @classmethod
    def _s(cls, P: TruncatedSeries) -> TruncatedSeries:
        x2, x4, y2, y4 = cls._vars(P, "x2", "x4", "y2", "y4")
        return (y2 + 3 * x2 * y4 * P) * (1 - 9 * x4 * y4 * P ** 2).invert_unit()

    @classmethod
    def p_equation(cls, P: TruncatedSeries) -> TruncatedSeries:
        """Right side of P = u + 3 x4 y4 P^3 + P (x2 + 3 x4 y2 P)(y2 + 3 x2 y4 P) / (1 - 9 x4 y4 P^2)^2."""
        x2, x4, y2, y4, u = cls._vars(P, "x2", "x4", "y2", "y4", "u")
        inv = (1 - 9 * x4 * y4 * P ** 2).invert_unit()
        return u + 3 * x4 * y4 * P ** 3 + P * (x2 + 3 * x4 * y2 * P) * (y2 + 3 * x2 * y4 * P) * inv * inv

    @classmethod
    def planar(cls, P: TruncatedSeries) -> TruncatedSeries:
        x2, x4, y2, y4, u = cls._vars(P, "x2", "x4", "y2", "y4", "u")
        x4y4 = x4 * y4
        return (15 * x4y4 ** 2 * P ** 6 - 5 * x4y4 * P ** 4 + 4 * u * x4y4 * P ** 3
                + Fraction(1, 3) * (x2 * y2 - 1) * P ** 2 + Fraction(4, 3) * u * P - u * u)

    @classmethod
    def plane_root4(cls, P: TruncatedSeries) -> TruncatedSeries:
        x4, y4 = cls._vars(P, "x4", "y4")
        S = cls._s(P)
        return 2 * x4 * P ** 2 * (y4 * P + 3 * S * S)

    @classmethod
    def plane(cls, P: TruncatedSeries) -> TruncatedSeries:
        (x2,) = cls._vars(P, "x2")
        return 2 * x2 * P * cls._s(P) + cls.plane_root4(P)

    @classmethod
    def pol(cls, p: TruncatedSeries) -> TruncatedSeries:
        x2, x4, y2, y4, u = cls._vars(p, "x2", "x4", "y2", "y4", "u")
        return (1215 * x4 ** 4 * y4 ** 3 * p ** 8
                - 540 * x4 ** 3 * y4 ** 2 * p ** 6
                + 27 * x4 ** 2 * y4 ** 2 * (12 * x4 * u - x2 ** 2) * p ** 5
                + 18 * x4 ** 2 * y4 * (1 - x2 * y2) * p ** 4
                + 6 * x4 * y4 * (12 * x4 * u - 5 * x2 ** 2) * p ** 3
                + (45 * x2 ** 2 * x4 * y4 * u + 3 * x4 - 3 * x2 ** 4 * y4 - 6 * x4 * x2 * y2
                   - 81 * x4 ** 2 * y4 * u ** 2) * p ** 2
                + (1 - x2 * y2) * (x2 ** 2 - 12 * x4 * u) * p
                + u * (9 * x4 * u - x2 ** 2))

    @classmethod
    def pol_denominator(cls, P: TruncatedSeries) -> TruncatedSeries:
        """9 x4 (9 P^2 x4 y4 - 1) without its x4 factor."""
        x4, y4 = cls._vars(P, "x4", "y4")
        return 9 * (9 * P ** 2 * x4 * y4 - 1)

    @classmethod
    def lagrangian(cls, Q: TruncatedSeries) -> TruncatedSeries:
        """Q = t^2 u D(Q)^2 / N(Q), the Lagrangian equation solved for Q."""
        x, y, t, nu, u = cls._vars(Q, "x", "y", "t", "nu", "u")
        w = 1 - nu * nu
        N = (1 - 3 * nu ** 2 * (x + y) * Q - 3 * x * y * w * (3 * nu ** 2 + 7) * Q ** 2
             + 135 * x ** 2 * y ** 2 * w ** 3 * Q ** 4 - 243 * x ** 3 * y ** 3 * w ** 5 * Q ** 6)
        D = 1 - 9 * x * y * w ** 2 * Q ** 2
        return t * t * u * D * D * N.invert_unit()

    @classmethod
    def pol_ising(cls, q: TruncatedSeries) -> TruncatedSeries:
        x, y, t, nu, u = cls._vars(q, "x", "y", "t", "nu", "u")
        w = 1 - nu * nu
        t2u = t * t * u
        return (405 * x ** 3 * y ** 2 * w ** 4 * q ** 7
                + 351 * x ** 2 * y ** 2 * w ** 3 * q ** 6
                + 27 * x * y * w ** 2 * (nu ** 2 * y - (5 + 12 * t2u * w ** 2 * y) * x) * q ** 5
                + 3 * x * y * w * (36 * t2u * w ** 2 * x - 3 * nu ** 2 - 47) * q ** 4
                + ((252 * t2u * w ** 2 * y - 6 * nu ** 2 - 9) * x - 15 * nu ** 2 * y) * q ** 3
                + ((36 * t2u * w - 108 * t2u * t2u * y * w ** 3) * x + 5 + 9 * nu ** 2 * t2u * w * y) * q ** 2
                - t2u * (27 * t2u * w ** 2 * x - 3 * nu ** 2 + 8) * q
                + 3 * t2u * t2u * w)

    @classmethod
    def ising_denominator(cls, Q: TruncatedSeries) -> TruncatedSeries:
        """1 + 3 x (1 - nu^2) Q; the factors 9, (1 - nu^2) and t^4 are divided out separately."""
        x, nu = cls._vars(Q, "x", "nu")
        return 1 + 3 * x * (1 - nu * nu) * Q


class QuarticForms(NamedTuple):
    planar: TruncatedSeries
    plane: TruncatedSeries
    planar_root4: TruncatedSeries


def quartic_P(order: int, caps: Optional[Mapping[str, int]] = None,
              cross_check: bool = True) -> TruncatedSeries:
    """The series with constant term u solving the quartic P equation.

    With ``cross_check`` the result is compared with u (1 + B_1) from the
    tree system restricted to degrees 2 and 4.
    """
    check_budget(order, MAX_SERIES_ORDER, "order")
    ring = quartic_ring(order, caps)
    P = solve_fixed_point(lambda sub, p: ClosedFormCatalog.p_equation(p), ring,
                          lambda sub: sub.var("u"), "quartic P")
    if cross_check:
        pair = solve_tree_system(4, order, degrees=(2, 4), caps=caps)
        B1 = pair.component(Color.BLACK, 1).to_ring(ring)
        if ring.var("u") * (1 + B1) != P:
            raise SeriesError("quartic P disagrees with u(1 + B_1) from the tree system")
    logger.info(f"quartic P solved at order {order}: {len(P.terms)} terms")
    return P


def quartic_closed_forms(P: TruncatedSeries) -> QuarticForms:
    """M_o, its u-derivative and M_{o,4}, with their built-in identities checked."""
    planar = ClosedFormCatalog.planar(P)
    plane = ClosedFormCatalog.plane(P)
    if planar.differentiate("u") != plane:
        raise SeriesError("d/du of the planar closed form differs from the plane series")
    numerator = ClosedFormCatalog.pol(P) * ClosedFormCatalog.pol_denominator(P).invert_unit()
    try:
        planar_root4 = numerator.divide_monomial({"x4": 1})
    except SeriesError as exc:
        raise SeriesError("Pol division by x4 is not exact") from exc
    if planar_root4.differentiate("u") != ClosedFormCatalog.plane_root4(P):
        raise SeriesError("d/du of M_{o,4} differs from the degree-4 plane series")
    return QuarticForms(planar, plane, planar_root4)


# ----------------------------------------------------------------------
# Square substitution, Theta and the Ising series
# ----------------------------------------------------------------------

class ThetaDirection(Enum):
    THETA = "theta"
    THETA_INVERSE = "theta_inverse"


_DEGREE_VAR = re.compile(r"([xy])(\d+)")


def square_substitution(s: TruncatedSeries, target: SeriesRing,
                        rename: Optional[Mapping[str, str]] = None) -> TruncatedSeries:
    """x_k -> x_k t^{k/2} + nu [k = 2], and likewise for y_k.

    ``rename`` maps a source variable to its name in ``target`` (x4 -> x for
    the quartic Ising ring); a variable missing from ``target`` is set to 0.
    """
    rename = rename or {}
    t, nu = target.var("t"), target.var("nu")
    mapping = {}
    for i, var in enumerate(s.ring.variables):
        match = _DEGREE_VAR.fullmatch(var)
        if not match:
            continue
        k = int(match.group(2))
        if k % 2:
            if any(e[i] for e in s.terms):
                raise SeriesError(f"odd-degree variable {var} in a square substitution")
            mapping[var] = target.zero()
            continue
        name = rename.get(var, var)
        image = target.var(name) * t ** (k // 2) if name in target.index else target.zero()
        if k == 2:
            image = image + nu
        mapping[var] = image
    return s.substitute(mapping, target)


def theta_apply(s: TruncatedSeries, direction: Union[ThetaDirection, str] = ThetaDirection.THETA,
                t: str = "t", nu: str = "nu") -> TruncatedSeries:
    """t -> t / (1 - nu^2) or t -> t (1 - nu^2).

    The forward direction needs nu capped in the ring.
    """
    direction = ThetaDirection(direction)
    tv, nv = s.ring.var(t), s.ring.var(nu)
    factor = 1 - nv * nv
    if direction is ThetaDirection.THETA:
        factor = factor.invert_unit()
    return s.substitute({t: tv * factor})


def solve_Q(t_order: int, check_positive: bool = True) -> TruncatedSeries:
    """Series in t with constant term 0 solving the Lagrangian equation."""
    check_budget(t_order, MAX_T_ORDER, "t_order")
    ring = ising_ring(t_order)
    Q = solve_fixed_point(lambda sub, q: ClosedFormCatalog.lagrangian(q), ring,
                          lambda sub: sub.zero(), "Lagrangian Q")
    if check_positive:
        for monomial, c in Q.monomials():
            if not (isinstance(c, int) and c >= 0):
                raise SeriesError(f"Q coefficient {c} at {monomial} is not a non-negative integer")
    logger.info(f"Q solved to t^{t_order}: {len(Q.terms)} terms")
    return Q


def ising_series(Q: TruncatedSeries) -> TruncatedSeries:
    """I_o from Q; the result is exact to four t-orders below Q's truncation."""
    numerator = ClosedFormCatalog.pol_ising(Q)
    try:
        numerator = numerator.divide_monomial({"t": 4})
    except SeriesError as exc:
        raise SeriesError("Pol_I is not divisible by t^4") from exc
    nu = numerator.ring.var("nu")
    numerator = numerator.divide_polynomial(1 - nu * nu, "nu")
    denominator = ClosedFormCatalog.ising_denominator(Q).to_ring(numerator.ring)
    return numerator * denominator.invert_unit() * Fraction(1, 9)


def q_from_p(order_t: int, nu_cap: int) -> TruncatedSeries:
    """t Theta^-1(t P^square) with x2 = y2 = 0 away from nu, up to t^order_t and nu^nu_cap."""
    quartic = max(order_t - 2, 0) // 2
    edges = nu_cap + 2 * quartic
    check_budget(edges, MAX_SERIES_ORDER, "order")
    P = quartic_P(edges, caps={"x2": nu_cap, "y2": nu_cap, "x4": quartic, "y4": quartic},
                  cross_check=False)
    target = ising_ring(order_t, nu_cap)
    t = target.var("t")
    square = square_substitution(P, target, {"x4": "x", "y4": "y"})
    return t * theta_apply(t * square, ThetaDirection.THETA_INVERSE)


def ising_from_bipartite(order_t: int, nu_cap: int) -> TruncatedSeries:
    """Theta^-1 of M_{o,4}(nu, x t^2, nu, y t^2, u), up to t^order_t and nu^nu_cap."""
    quartic = order_t // 2
    edges = nu_cap + 2 * (quartic + 1)
    check_budget(edges, MAX_SERIES_ORDER, "order")
    caps = {"x2": nu_cap, "y2": nu_cap, "x4": quartic + 1, "y4": quartic + 1}
    P = quartic_P(edges, caps=caps, cross_check=False)
    forms = quartic_closed_forms(P)
    target = ising_ring(order_t, nu_cap)
    square = square_substitution(forms.planar_root4, target, {"x4": "x", "y4": "y"})
    return theta_apply(square, ThetaDirection.THETA_INVERSE)
