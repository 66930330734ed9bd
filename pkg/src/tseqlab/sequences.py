"""Generators for the explicit null-sequence constructions.

Four recipe families, each an immutable description from which any term of
the sequence can be produced exactly:

* :class:`FreeAnchorRecipe` - ambient Z (+) H; even terms are p-power
  multiples of the free generator, odd terms add a marker integer times the
  free generator to an enumerated element of H.
* :class:`PruferTripleRecipe` - ambient Z(p^inf) (+) H; three interleaved
  strands (shrinking fractions, odd-indexed marker fractions plus enumerated
  H elements, and partial sums of even-indexed marker fractions whose limit
  has aperiodic base-p digits).
* :class:`PruferPairRecipe` - ambient Z(p^inf) (+) H; shrinking fractions and
  marker fractions plus enumerated H elements, with a designated anchor value
  substituted at the block indices.
* :class:`CyclicLadderRecipe` - ambient an infinite ladder of finite cyclic
  generators; even terms walk all multiples of each generator, odd terms pair
  a target with a block of fresh generators.

The marker numbers are the combinatorial heart: ``marker_int(p, n)`` is the
integer with base-p digits 1 exactly at positions n^3 - j*n for 0 <= j <= n,
and ``marker_frac(p, n)`` is its mirror image in the p-power-denominator
rationals mod 1.  Short signed combinations of markers with distinct indices
are recognizable by magnitude, which is what the exclusion windows verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional

from .groups import (
    Cyclic,
    Element,
    ElementEnumeration,
    GroupError,
    GroupSpec,
    INF,
    OMEGA,
    Prufer,
    element,
    prime_power,
    zero,
)


class RecipeError(GroupError):
    """Invalid recipe parameters or out-of-range term index."""


# ---------------------------------------------------------------------------
# Numeric ingredients
# ---------------------------------------------------------------------------

def triangular(n: int) -> int:
    """n(n+1)/2.

    >>> [triangular(n) for n in (0, 4, 10)]
    [0, 10, 55]
    """
    if n < 0:
        raise RecipeError("triangular numbers need n >= 0")
    return n * (n + 1) // 2


def triangular_index(n: int) -> int:
    """Largest t with triangular(t) <= n, for n >= 1.

    >>> [triangular_index(n) for n in (1, 7, 10)]
    [1, 3, 4]
    """
    if n < 1:
        raise RecipeError("triangular_index needs n >= 1")
    return (math.isqrt(8 * n + 1) - 1) // 2


def marker_int(p: int, n: int) -> int:
    """Sum of p^(n^3 - j*n) over 0 <= j <= n; n+1 base-p digits equal to 1.

    >>> marker_int(2, 1), marker_int(2, 2), marker_int(3, 2)
    (3, 336, 7371)
    """
    if n < 1:
        raise RecipeError("marker_int needs n >= 1")
    cube = n**3
    return sum(p ** (cube - j * n) for j in range(n + 1))


def marker_frac(p: int, n: int) -> Fraction:
    """Sum of p^-(n^3 - j*n) over 0 <= j <= n, reduced mod 1.

    >>> marker_frac(2, 2), marker_frac(2, 1), marker_frac(3, 2)
    (Fraction(21, 256), Fraction(1, 2), Fraction(91, 6561))
    """
    if n < 1:
        raise RecipeError("marker_frac needs n >= 1")
    cube = n**3
    total = sum(Fraction(1, p ** (cube - j * n)) for j in range(n + 1))
    return total % 1


def identity_rule(i: int) -> int:
    return i


def marker_series_prefix(
    p: int, n: int, rule: Callable[[int], int] = identity_rule
) -> Fraction:
    """Partial sum of even-indexed marker fractions along a strictly
    increasing index rule; exact in the p-power-denominator rationals mod 1.

    >>> marker_series_prefix(2, 0)
    Fraction(0, 1)
    >>> marker_series_prefix(2, 1)
    Fraction(21, 256)
    """
    if n < 0:
        raise RecipeError("prefix length must be >= 0")
    total = Fraction(0)
    last = 0
    for i in range(1, n + 1):
        j = rule(i)
        if j <= last:
            raise RecipeError("index rule must be strictly increasing and positive")
        last = j
        total += marker_frac(p, 2 * j)
    return total % 1


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _embedded(g: Element, ambient: GroupSpec, offset: int) -> Element:
    """Re-house an element of a subgroup spec inside the ambient spec."""
    return element(ambient, {(c + offset, i): v for (c, i), v in g.terms})


def _require_prime(p: int):
    if prime_power(p) != (p, 1):
        raise RecipeError(f"{p} is not prime")


def _spec_size(spec: GroupSpec) -> int | float:
    return spec.size()


# ---------------------------------------------------------------------------
# Free-anchor recipe (ambient Z (+) H)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeAnchorRecipe:
    """Even terms p^n * anchor; odd terms marker_int(p, n) * anchor plus an
    enumerated element of the subgroup, selected by the block residue of n.

    ``eps_rule`` controls the sign in front of the enumerated element:
    ``all-ones`` keeps it, ``zero-at-blocks`` drops it exactly at the indices
    whose block residue is 0.  ``zero_index`` decides what residue 0 itself
    picks: the zero element of the subgroup (default) or the anchor.
    """

    p: int
    subgroup: GroupSpec
    eps_rule: str = "all-ones"
    zero_index: str = "zero"
    enumeration: Optional[ElementEnumeration] = field(
        default=None, compare=False, repr=False
    )

    min_index = 5
    tag = "free-anchor"

    def __post_init__(self):
        _require_prime(self.p)
        if self.eps_rule not in ("all-ones", "zero-at-blocks"):
            raise RecipeError(f"unknown eps rule {self.eps_rule!r}")
        if self.zero_index not in ("zero", "anchor"):
            raise RecipeError(f"unknown zero-index policy {self.zero_index!r}")

    @cached_property
    def ambient(self) -> GroupSpec:
        from .groups import FreeZ

        return GroupSpec(((FreeZ(), 1), *self.subgroup.components))

    @cached_property
    def _enum(self) -> ElementEnumeration:
        return self.enumeration or ElementEnumeration(self.subgroup)

    def _anchor(self, coeff: int) -> Element:
        return element(self.ambient, {(0, 0): coeff})

    def _residue(self, n: int) -> int:
        """Block residue of the odd-strand index n."""
        size = _spec_size(self.subgroup)
        modulus = triangular(triangular_index(n)) if size is INF else int(size)
        return n % modulus

    def _h_part(self, residue: int) -> Element:
        if residue == 0:
            if self.zero_index == "anchor":
                return self._anchor(1)
            return zero(self.ambient)
        return _embedded(self._enum.nonzero(residue - 1), self.ambient, 1)

    def term(self, idx: int) -> Element:
        if idx < self.min_index:
            raise RecipeError(f"term index {idx} below minimum {self.min_index}")
        if idx % 2 == 0:
            n = idx // 2
            return self._anchor(self.p**n)
        n = (idx + 1) // 2
        residue = self._residue(n)
        eps = 0 if (self.eps_rule == "zero-at-blocks" and residue == 0) else 1
        out = self._anchor(marker_int(self.p, n))
        if eps:
            out = out + self._h_part(residue)
        return out

    def min_index_bound(self, g: Element, k: int) -> int:
        """Start index from which the window scan is guaranteed clean.

        The target must decompose as b * anchor + (optional) one enumerated
        subgroup element; the bound grows with |b| and the weight budget.
        """
        if g.is_zero:
            raise RecipeError("the exclusion criterion concerns nonzero targets")
        if g.spec != self.ambient:
            raise RecipeError("target lives in a different group")
        b = g.value((0, 0))
        h_part = element(
            self.subgroup, {(c - 1, i): v for (c, i), v in g.terms if c > 0}
        )
        if not h_part.is_zero:
            self._enum.index_of(h_part)  # must be a single enumerated element
        return 20 * (abs(b) + 1) * (k + 1)

    def describe(self) -> str:
        return (
            f"free-anchor{{p={self.p};H={self.subgroup};"
            f"eps={self.eps_rule};zero-index={self.zero_index}}}"
        )


# ---------------------------------------------------------------------------
# Quasicyclic recipes (ambient Z(p^inf) (+) H)
# ---------------------------------------------------------------------------

def _prufer_ambient(p: int, subgroup: GroupSpec) -> GroupSpec:
    return GroupSpec(((Prufer(p), 1), *subgroup.components))


@dataclass(frozen=True)
class PruferTripleRecipe:
    """Three strands: 1/p^n; an odd-indexed marker fraction plus an enumerated
    subgroup element; and the n-th partial sum of even-indexed marker
    fractions (whose limit has aperiodic base-p digits under the default
    index rule, i.e. is irrational)."""

    p: int
    subgroup: GroupSpec
    j_rule: str = "identity"
    j_rule_fn: Optional[Callable[[int], int]] = field(
        default=None, compare=False, repr=False
    )
    enumeration: Optional[ElementEnumeration] = field(
        default=None, compare=False, repr=False
    )

    min_index = 9
    tag = "prufer-triple"

    def __post_init__(self):
        _require_prime(self.p)
        if self.j_rule != "identity" and self.j_rule_fn is None:
            raise RecipeError(f"unknown index rule {self.j_rule!r}")

    @cached_property
    def ambient(self) -> GroupSpec:
        return _prufer_ambient(self.p, self.subgroup)

    @cached_property
    def _enum(self) -> ElementEnumeration:
        return self.enumeration or ElementEnumeration(self.subgroup)

    def _rule(self) -> Callable[[int], int]:
        return self.j_rule_fn or identity_rule

    def _frac(self, value: Fraction) -> Element:
        return element(self.ambient, {(0, 0): value})

    def _h_elem(self, idx0: int) -> Element:
        return _embedded(self._enum.nonzero(idx0), self.ambient, 1)

    def term(self, idx: int) -> Element:
        if idx < self.min_index:
            raise RecipeError(f"term index {idx} below minimum {self.min_index}")
        n, phase = divmod(idx, 3)
        if phase == 0:
            return self._frac(Fraction(1, self.p**n))
        if phase == 2:
            return self._frac(marker_series_prefix(self.p, n, self._rule()))
        size = _spec_size(self.subgroup)
        out = self._frac(marker_frac(self.p, 2 * self._rule()(n) + 1))
        if size is INF:
            residue = n % triangular(triangular_index(n))
            return out + self._h_elem(residue)
        if size >= 2:
            residue = n % (int(size) - 1)
            return out + self._h_elem(residue)
        return out  # trivial subgroup: no element strand

    def min_index_bound(self, g: Element, k: int) -> int:
        if g.is_zero:
            raise RecipeError("the exclusion criterion concerns nonzero targets")
        if g.spec != self.ambient:
            raise RecipeError("target lives in a different group")
        frac = g.value((0, 0))
        z = _vp(frac.denominator, self.p) if frac != 0 else 0
        return 30 * self.p * (k + 1) * (z + 1)

    def describe(self) -> str:
        if self.j_rule_fn is not None:
            raise RecipeError("custom index rules are not serializable")
        return f"prufer-triple{{p={self.p};H={self.subgroup};jrule={self.j_rule}}}"


@dataclass(frozen=True)
class PruferPairRecipe:
    """Two strands: 1/p^n, and marker_frac(p, n) plus an enumerated subgroup
    element; block residue 0 substitutes the designated anchor value from the
    quasicyclic coordinate (possibly zero)."""

    p: int
    subgroup: GroupSpec
    anchor: Fraction = Fraction(0)
    enumeration: Optional[ElementEnumeration] = field(
        default=None, compare=False, repr=False
    )

    min_index = 5
    tag = "prufer-pair"

    def __post_init__(self):
        _require_prime(self.p)
        anchor = Fraction(self.anchor) % 1
        den = anchor.denominator
        while den % self.p == 0:
            den //= self.p
        if den != 1:
            raise RecipeError("anchor must have a p-power denominator")
        object.__setattr__(self, "anchor", anchor)

    @cached_property
    def ambient(self) -> GroupSpec:
        return _prufer_ambient(self.p, self.subgroup)

    @cached_property
    def _enum(self) -> ElementEnumeration:
        return self.enumeration or ElementEnumeration(self.subgroup)

    @property
    def anchor_order_exponent(self) -> int:
        """delta with p^delta the order of the anchor value (0 for zero)."""
        return _vp(self.anchor.denominator, self.p)

    def _frac(self, value: Fraction) -> Element:
        return element(self.ambient, {(0, 0): value})

    def term(self, idx: int) -> Element:
        if idx < self.min_index:
            raise RecipeError(f"term index {idx} below minimum {self.min_index}")
        if idx % 2 == 0:
            return self._frac(Fraction(1, self.p ** (idx // 2)))
        n = (idx + 1) // 2
        size = _spec_size(self.subgroup)
        modulus = triangular(triangular_index(n)) if size is INF else int(size)
        residue = n % modulus
        out = self._frac(marker_frac(self.p, n))
        if residue == 0:
            return out + self._frac(self.anchor)
        return out + _embedded(self._enum.nonzero(residue - 1), self.ambient, 1)

    def min_index_bound(self, g: Element, k: int) -> int:
        if g.is_zero:
            raise RecipeError("the exclusion criterion concerns nonzero targets")
        if g.spec != self.ambient:
            raise RecipeError("target lives in a different group")
        frac = g.value((0, 0))
        z = _vp(frac.denominator, self.p) if frac != 0 else 0
        return 30 * self.p * (k + 1) * (z + 1) + self.anchor_order_exponent

    def describe(self) -> str:
        a = self.anchor
        text = "0" if a == 0 else f"{a.numerator}/{a.denominator}"
        return f"prufer-pair{{p={self.p};H={self.subgroup};e0={text}}}"


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Cyclic ladder recipe (ambient an infinite sum of finite cyclic generators)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderRule:
    """Generator orders: a finite prefix, then either a constant or the
    geometric rule u_j = p^(j - start + 1)."""

    prefix: tuple[int, ...]
    tail_kind: str  # "const" | "geom"
    tail_param: int

    def __post_init__(self):
        if self.tail_kind not in ("const", "geom"):
            raise RecipeError(f"unknown tail kind {self.tail_kind!r}")
        for u in self.prefix:
            if u < 2:
                raise RecipeError("generator orders must be >= 2")
        if self.tail_kind == "const" and self.tail_param < 2:
            raise RecipeError("constant tail order must be >= 2")
        if self.tail_kind == "geom":
            _require_prime(self.tail_param)

    def order(self, j: int) -> int:
        if j < len(self.prefix):
            return self.prefix[j]
        if self.tail_kind == "const":
            return self.tail_param
        return self.tail_param ** (j - len(self.prefix) + 1)

    def unbounded(self) -> bool:
        return self.tail_kind == "geom"


@dataclass(frozen=True)
class TargetRule:
    """Target coefficients c_j (the kept element is c_j times generator j)."""

    prefix: tuple[int, ...]
    tail: int

    def coeff(self, j: int) -> int:
        return self.prefix[j] if j < len(self.prefix) else self.tail


@dataclass(frozen=True)
class CyclicLadderRecipe:
    """Even terms list every nonzero multiple of each generator in turn; odd
    term number n pairs the target of the block residue of n with the sum of
    the n fresh generators (or subsequence members) of block n.

    Variant is determined by the orders: a constant tail requires every
    prefix order to divide it (variant "a"); a geometric tail gives orders
    with sup = infinity (variant "b").  ``d5`` selects the published explicit
    value of the third odd term ("explicit", default) or the general formula
    ("formula"); the two disagree at that single index.
    """

    orders: OrderRule
    targets: TargetRule
    d5: str = "explicit"

    min_index = 0
    tag = "cyclic-ladder"

    def __post_init__(self):
        if self.d5 not in ("explicit", "formula"):
            raise RecipeError(f"unknown d5 policy {self.d5!r}")
        if not self.orders.unbounded():
            tail = self.orders.tail_param
            for u in self.orders.prefix:
                if tail % u != 0:
                    raise RecipeError(
                        "constant-tail ladders need every prefix order to "
                        "divide the tail order"
                    )
        for j, c in enumerate(self.targets.prefix):
            if not 0 <= c < self.orders.order(j):
                raise RecipeError(f"target coefficient {c} out of range at {j}")
        if self.targets.tail < 0:
            raise RecipeError("tail target must be >= 0")
        if self.orders.tail_kind == "const" and self.targets.tail >= self.orders.tail_param:
            raise RecipeError("tail target must be below the tail order")

    @property
    def variant(self) -> str:
        return "b" if self.orders.unbounded() else "a"

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, order: int, target: int) -> "CyclicLadderRecipe":
        return cls(OrderRule((), "const", order), TargetRule((), target))

    @classmethod
    def with_prefix(
        cls,
        prefix_orders,
        prefix_targets,
        tail_order: int,
        tail_target: int,
    ) -> "CyclicLadderRecipe":
        return cls(
            OrderRule(tuple(prefix_orders), "const", tail_order),
            TargetRule(tuple(prefix_targets), tail_target),
        )

    @classmethod
    def with_geometric_tail(
        cls, prefix_orders, prefix_targets, p: int, tail_target: int
    ) -> "CyclicLadderRecipe":
        return cls(
            OrderRule(tuple(prefix_orders), "geom", p),
            TargetRule(tuple(prefix_targets), tail_target),
        )

    # -- ambient and generators ----------------------------------------------

    @cached_property
    def ambient(self) -> GroupSpec:
        comps: list = []
        for u in self.orders.prefix:
            comps.extend((Cyclic(p, a), 1) for p, a in _factor(u))
        if self.orders.tail_kind == "const":
            comps.extend(
                (Cyclic(p, a), OMEGA) for p, a in _factor(self.orders.tail_param)
            )
        else:
            comps.append((Prufer(self.orders.tail_param), OMEGA))
        return GroupSpec(tuple(comps))

    @cached_property
    def _layout(self):
        """(prefix component slices, tail component indices)."""
        slices = []
        c = 0
        for u in self.orders.prefix:
            width = len(_factor(u))
            slices.append(list(range(c, c + width)))
            c += width
        tail = list(range(c, len(self.ambient.components)))
        return slices, tail

    def generator(self, j: int) -> Element:
        slices, tail = self._layout
        if j < len(slices):
            return element(self.ambient, {(comp, 0): 1 for comp in slices[j]})
        copy = j - len(slices)
        if self.orders.tail_kind == "const":
            return element(self.ambient, {(c, copy): 1 for c in tail})
        order = self.orders.order(j)
        return element(
            self.ambient, {(tail[0], copy): Fraction(1, order)}
        )

    def target(self, j: int) -> Element:
        return self.generator(j).times(self.targets.coeff(j))

    # -- terms -----------------------------------------------------------------

    def _even_entry(self, n: int) -> Element:
        j, start = 0, 0
        while True:
            width = self.orders.order(j) - 1
            if n < start + width:
                return self.generator(j).times(n - start + 1)
            start += width
            j += 1

    def _fresh_block(self, n: int) -> Element:
        total = zero(self.ambient)
        for k in range(triangular(n - 1) + 1, triangular(n) + 1):
            total = total + self.generator(k)
        return total

    def term(self, idx: int) -> Element:
        if idx < 0:
            raise RecipeError("term index must be >= 0")
        n, odd = divmod(idx, 2)
        if not odd:
            return self._even_entry(n)
        if n == 0:
            return self.target(0)
        if n == 1:
            return self.target(0) + self.generator(1)
        if n == 2 and self.d5 == "explicit":
            return self.target(1) + self.generator(2) + self.generator(3)
        residue = n % triangular(triangular_index(n))
        return self.target(residue) + self._fresh_block(n)

    # -- exclusion bound --------------------------------------------------------

    def _generator_index_of_coord(self, coord) -> int:
        slices, tail = self._layout
        comp, copy = coord
        for j, comps in enumerate(slices):
            if comp in comps:
                return j
        return len(slices) + copy

    def min_index_bound(self, g: Element, k: int) -> int:
        if g.is_zero:
            raise RecipeError("the exclusion criterion concerns nonzero targets")
        if g.spec != self.ambient:
            raise RecipeError("target lives in a different group")
        top = max(self._generator_index_of_coord(c) for c, _ in g.terms)
        v = max(top, 3)
        block_end = sum(self.orders.order(j) - 1 for j in range(v + 1))
        m_prime = max(4, block_end)
        if self.variant == "a":
            j0 = len(self.orders.prefix)
            m0 = 4 * m_prime * (j0 + 2) * (k + 1)
        else:
            # orders beyond the prefix grow geometrically, so violations of
            # u_j > 2(k+1) stop after finitely many indices
            threshold = 2 * (k + 1)
            j_prime = m_prime + 1
            j = 1
            while j <= 10_000:
                if self.orders.order(j) <= threshold:
                    j_prime = max(j_prime, j + 1)
                elif j > j_prime:
                    break
                j += 1
            m0 = 4 * j_prime * (k + 1)
        return 2 * m0

    def describe(self) -> str:
        return (
            f"cyclic-ladder{{orders={_orders_text(self.orders)};"
            f"targets={_targets_text(self.targets)};d5={self.d5}}}"
        )


def _factor(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    p = 2
    while n > 1:
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append((p, a))
        p += 1
    return tuple(out)


def _orders_text(orders: OrderRule) -> str:
    tail = (
        f"geom({orders.tail_param})"
        if orders.tail_kind == "geom"
        else str(orders.tail_param)
    )
    if not orders.prefix:
        return tail
    return ",".join(map(str, orders.prefix)) + "|" + tail


def _targets_text(targets: TargetRule) -> str:
    if not targets.prefix:
        return str(targets.tail)
    return ",".join(map(str, targets.prefix)) + "|" + str(targets.tail)


# ---------------------------------------------------------------------------
# Recipe text form:  tag{key=value;key=value;...}
#
# Recipes are duck-typed: anything with term / ambient / min_index /
# min_index_bound / describe can drive the exclusion and character modules.
# ---------------------------------------------------------------------------

def parse_recipe(text: str):
    """Inverse of each recipe's ``describe()``."""
    from .groups import parse_group_spec, SpecParseError

    text = text.strip()
    if "{" not in text or not text.endswith("}"):
        raise SpecParseError("expected tag{key=value;...}", 0)
    tag, _, body = text[:-1].partition("{")
    params: dict[str, str] = {}
    if body:
        for item in body.split(";"):
            key, eq, value = item.partition("=")
            if not eq:
                raise SpecParseError(f"bad recipe parameter {item!r}", 0)
            params[key.strip()] = value.strip()
    try:
        if tag == "free-anchor":
            return FreeAnchorRecipe(
                p=int(params["p"]),
                subgroup=parse_group_spec(params["H"]),
                eps_rule=params.get("eps", "all-ones"),
                zero_index=params.get("zero-index", "zero"),
            )
        if tag == "prufer-triple":
            return PruferTripleRecipe(
                p=int(params["p"]),
                subgroup=parse_group_spec(params["H"]),
                j_rule=params.get("jrule", "identity"),
            )
        if tag == "prufer-pair":
            return PruferPairRecipe(
                p=int(params["p"]),
                subgroup=parse_group_spec(params["H"]),
                anchor=Fraction(params.get("e0", "0")),
            )
        if tag == "cyclic-ladder":
            return CyclicLadderRecipe(
                orders=_parse_orders(params["orders"]),
                targets=_parse_targets(params.get("targets", "1")),
                d5=params.get("d5", "explicit"),
            )
    except KeyError as exc:
        raise SpecParseError(f"missing recipe parameter {exc.args[0]}", 0) from None
    raise SpecParseError(f"unknown recipe tag {tag!r}", 0)


def _parse_orders(text: str) -> OrderRule:
    prefix_text, bar, tail_text = text.rpartition("|")
    prefix = tuple(int(x) for x in prefix_text.split(",")) if bar else ()
    tail_text = tail_text.strip()
    if tail_text.startswith("geom(") and tail_text.endswith(")"):
        return OrderRule(prefix, "geom", int(tail_text[5:-1]))
    return OrderRule(prefix, "const", int(tail_text))


def _parse_targets(text: str) -> TargetRule:
    prefix_text, bar, tail_text = text.rpartition("|")
    prefix = tuple(int(x) for x in prefix_text.split(",")) if bar else ()
    return TargetRule(prefix, int(tail_text))
