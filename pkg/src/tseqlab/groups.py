"""Exact elements of countable direct sums of Z, Z(p^a), and Z(p^inf).

A group is described structurally (:class:`GroupSpec`) as an ordered, finite
list of summand kinds, each with a multiplicity that is a positive integer,
``OMEGA`` (countably many copies) or ``ALEPH`` (an unspecified infinite
cardinal; only finiteness ever matters downstream).  Elements are finitely
supported coordinate maps with exact arithmetic:

* free coordinates carry arbitrary-precision integers,
* cyclic coordinates carry residues in ``[0, p^a)``,
* quasicyclic (Prufer) coordinates carry reduced fractions ``c/p^t`` in
  ``[0, 1)``, i.e. elements of the p-power-denominator rationals mod 1.

Values are immutable after construction; everything here is safe to share
between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Mapping, Union

INF = math.inf


class GroupError(ValueError):
    """Structural misuse: spec mismatch, invalid coordinate or value."""


class SpecParseError(GroupError):
    """Malformed group-spec / element / character text, with a position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_power(n: int) -> tuple[int, int] | None:
    """Return (p, a) with n = p^a, or None if n is not a prime power."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if p * p > n:
            return (n, 1) if n > 1 else None
        if n % p:
            continue
        a = 0
        while n % p == 0:
            n //= p
            a += 1
        return (p, a) if n == 1 else None
    return None


def p_valuation(n: int, p: int) -> int:
    if n == 0:
        raise GroupError("valuation of zero is undefined")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Component kinds and cardinalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeZ:
    """An infinite cyclic summand."""

    def __str__(self) -> str:
        return "Z"


@dataclass(frozen=True)
class Cyclic:
    """A cyclic summand of prime-power order p^a."""

    p: int
    a: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise GroupError(f"{self.p} is not prime")
        if self.a < 1:
            raise GroupError("cyclic exponent must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p ** self.a

    def __str__(self) -> str:
        return f"Z({self.modulus})"


@dataclass(frozen=True)
class Prufer:
    """The quasicyclic p-group, realized as p-power-denominator rationals mod 1."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise GroupError(f"{self.p} is not prime")

    def __str__(self) -> str:
        return f"Z({self.p}^inf)"


ComponentKind = Union[FreeZ, Cyclic, Prufer]


class _InfiniteCardinal:
    """Multiplicity marker: 'w' (countable) or 'inf' (unspecified infinite)."""

    __slots__ = ("_label",)

    def __init__(self, label: str):
        self._label = label

    def __repr__(self) -> str:
        return self._label

    __str__ = __repr__


OMEGA = _InfiniteCardinal("w")
ALEPH = _InfiniteCardinal("inf")

Cardinality = Union[int, _InfiniteCardinal]


def card_is_finite(c: Cardinality) -> bool:
    return isinstance(c, int)


# ---------------------------------------------------------------------------
# Group specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """Ordered list of (kind, multiplicity) summands; the empty list is {0}."""

    components: tuple[tuple[ComponentKind, Cardinality], ...]

    def __post_init__(self):
        for kind, mult in self.components:
            if not isinstance(kind, (FreeZ, Cyclic, Prufer)):
                raise GroupError(f"bad component kind {kind!r}")
            if card_is_finite(mult):
                if mult < 1:
                    raise GroupError("multiplicity must be >= 1")
            elif mult is not OMEGA and mult is not ALEPH:
                raise GroupError(f"bad multiplicity {mult!r}")

    # -- structural predicates ---------------------------------------------

    def is_torsion(self) -> bool:
        return all(not isinstance(k, FreeZ) for k, _ in self.components)

    def is_bounded(self) -> bool:
        return all(isinstance(k, Cyclic) for k, _ in self.components)

    def is_trivial(self) -> bool:
        return not self.components

    def size(self) -> int | float:
        """Group order: an integer, or math.inf."""
        total = 1
        for kind, mult in self.components:
            if not card_is_finite(mult) or not isinstance(kind, Cyclic):
                return INF
            total *= kind.modulus ** mult
        return total

    # -- coordinate helpers --------------------------------------------------

    def kind(self, comp: int) -> ComponentKind:
        if not 0 <= comp < len(self.components):
            raise GroupError(f"component index {comp} out of range")
        return self.components[comp][0]

    def multiplicity(self, comp: int) -> Cardinality:
        if not 0 <= comp < len(self.components):
            raise GroupError(f"component index {comp} out of range")
        return self.components[comp][1]

    def check_coord(self, coord: tuple[int, int]) -> ComponentKind:
        comp, copy = coord
        kind = self.kind(comp)
        if copy < 0:
            raise GroupError(f"negative copy index {copy}")
        mult = self.components[comp][1]
        if card_is_finite(mult) and copy >= mult:
            raise GroupError(f"copy {copy} out of range for multiplicity {mult}")
        return kind

    def coordinates(self) -> list[tuple[int, int]]:
        """All coordinates, finite specs only."""
        if self.size() is INF:
            raise GroupError("infinite spec has no finite coordinate list")
        return [
            (c, i)
            for c, (_, mult) in enumerate(self.components)
            for i in range(mult)
        ]

    def __str__(self) -> str:
        return format_group_spec(self)


def group_spec(*components: tuple[ComponentKind, Cardinality]) -> GroupSpec:
    return GroupSpec(tuple(components))


TRIVIAL_SPEC = GroupSpec(())


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

Coord = tuple[int, int]
Value = Union[int, Fraction]


def _normalize_value(kind: ComponentKind, v) -> Value:
    """Reduce v into the canonical value set of the kind; 0 means 'drop'."""
    if isinstance(kind, FreeZ):
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise GroupError("free coordinate needs an integer value")
            v = v.numerator
        return int(v)
    if isinstance(kind, Cyclic):
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise GroupError("cyclic coordinate needs an integer value")
            v = v.numerator
        return int(v) % kind.modulus
    # Prufer: reduced fraction in [0, 1) with p-power denominator
    frac = Fraction(v) % 1
    den = frac.denominator
    while den % kind.p == 0:
        den //= kind.p
    if den != 1:
        raise GroupError(
            f"value {frac} has a non-{kind.p}-power denominator"
        )
    return frac


@dataclass(frozen=True)
class Element:
    """Finitely supported element; ``terms`` is sorted and zero-free."""

    spec: GroupSpec
    terms: tuple[tuple[Coord, Value], ...]

    # Construction goes through element(); the dataclass itself trusts input.

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> dict[Coord, Value]:
        return dict(self.terms)

    def value(self, coord: Coord) -> Value:
        for c, v in self.terms:
            if c == coord:
                return v
        kind = self.spec.check_coord(coord)
        return Fraction(0) if isinstance(kind, Prufer) else 0

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Element") -> "Element":
        if self.spec != other.spec:
            raise GroupError("elements live in different groups")
        merged = dict(self.terms)
        for coord, v in other.terms:
            merged[coord] = merged.get(coord, 0) + v
        return element(self.spec, merged)

    def __neg__(self) -> "Element":
        return self.times(-1)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def times(self, n: int) -> "Element":
        """Exact n-fold sum for any integer n."""
        return element(self.spec, {c: n * v for c, v in self.terms})

    __rmul__ = times

    # -- invariants ----------------------------------------------------------

    def order(self) -> int | float:
        """Least n >= 1 with n*self = 0, or math.inf."""
        result = 1
        for coord, v in self.terms:
            kind = self.spec.kind(coord[0])
            if isinstance(kind, FreeZ):
                return INF
            if isinstance(kind, Cyclic):
                result = math.lcm(result, kind.modulus // math.gcd(v, kind.modulus))
            else:
                result = math.lcm(result, v.denominator)
        return result

    def height(self, p: int) -> int | float:
        """Largest n with self divisible by p^n; support must be p-primary."""
        best: int | float = INF
        for coord, v in self.terms:
            kind = self.spec.kind(coord[0])
            if isinstance(kind, Cyclic) and kind.p == p:
                best = min(best, p_valuation(v, p))
            elif isinstance(kind, Prufer) and kind.p == p:
                continue  # divisible coordinate, contributes height inf
            else:
                raise GroupError(
                    f"coordinate {coord} is not {p}-primary; height undefined"
                )
        return best

    def project(self, comp: int) -> "Element":
        """Restrict the support to one component of the direct sum."""
        if not 0 <= comp < len(self.spec.components):
            raise GroupError(f"component index {comp} out of range")
        return Element(self.spec, tuple(t for t in self.terms if t[0][0] == comp))

    def __str__(self) -> str:
        return format_element(self)


def element(spec: GroupSpec, support: Mapping[Coord, Value]) -> Element:
    """Canonical element: values reduced, zeros dropped, coordinates sorted."""
    terms = []
    for coord, raw in support.items():
        kind = spec.check_coord(coord)
        v = _normalize_value(kind, raw)
        if v != 0:
            terms.append((coord, v))
    terms.sort(key=lambda t: t[0])
    return Element(spec, tuple(terms))


def zero(spec: GroupSpec) -> Element:
    return Element(spec, ())


def element_sort_key(g: Element):
    """Deterministic total order: support size, then coordinate/value pairs."""
    return (len(g.terms), g.terms)


# ---------------------------------------------------------------------------
# Text forms
# ---------------------------------------------------------------------------

def _format_value(v: Value) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def format_element(g: Element) -> str:
    """Sum of ``v*e(c,i)`` terms; the zero element prints as ``0``."""
    if g.is_zero:
        return "0"
    return " + ".join(
        f"{_format_value(v)}*e({c},{i})" for (c, i), v in g.terms
    )


def parse_element(text: str, spec: GroupSpec) -> Element:
    """Inverse of :func:`format_element` over the given spec."""
    text = text.strip()
    if text == "0":
        return zero(spec)
    support: dict[Coord, Value] = {}
    pos = 0
    for chunk in text.split("+"):
        term = chunk.strip()
        if not term:
            raise SpecParseError("empty term", pos)
        if "*e(" not in term:
            raise SpecParseError(f"expected v*e(c,i), got {term!r}", pos)
        vtext, _, ctext = term.partition("*e(")
        if not ctext.endswith(")"):
            raise SpecParseError("unclosed coordinate", pos + len(term))
        try:
            if "/" in vtext:
                v: Value = Fraction(vtext)
            else:
                v = int(vtext)
            comp_s, copy_s = ctext[:-1].split(",")
            coord = (int(comp_s), int(copy_s))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecParseError(f"bad term {term!r}: {exc}", pos) from None
        support[coord] = support.get(coord, 0) + v
        pos += len(chunk) + 1
    return element(spec, support)


# ---------------------------------------------------------------------------
# Group-spec grammar:  spec := term ('+' term)*
#                      term := base ('^' mult)?
#                      base := 'Z' | 'Z(' n ')' | 'Z(' p '^' a ')' | 'Z(' p '^inf)'
#                      mult := nat | 'w'          ('inf' accepted as extension)
# ---------------------------------------------------------------------------

class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise SpecParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def number(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise SpecParseError("expected a number", start)
        return int(self.text[start:self.pos])

    def word(self, w: str) -> bool:
        self.skip_ws()
        if self.text.startswith(w, self.pos):
            self.pos += len(w)
            return True
        return False


def parse_group_spec(text: str) -> GroupSpec:
    sc = _Scanner(text)
    comps: list[tuple[ComponentKind, Cardinality]] = []
    while True:
        comps.append(_parse_term(sc))
        sc.skip_ws()
        if sc.pos >= len(sc.text):
            break
        sc.expect("+")
    return GroupSpec(tuple(comps))


def _parse_term(sc: _Scanner) -> tuple[ComponentKind, Cardinality]:
    if not sc.word("Z"):
        raise SpecParseError("expected 'Z'", sc.pos)
    kind: ComponentKind
    if sc.peek() == "(":
        sc.expect("(")
        at = sc.pos
        n = sc.number()
        if sc.peek() == "^":
            sc.expect("^")
            if sc.word("inf"):
                if not is_prime(n):
                    raise SpecParseError(f"{n} is not prime", at)
                kind = Prufer(n)
            else:
                a = sc.number()
                if not is_prime(n):
                    raise SpecParseError(f"{n} is not prime", at)
                if a < 1:
                    raise SpecParseError("exponent must be >= 1", at)
                kind = Cyclic(n, a)
        else:
            pp = prime_power(n)
            if pp is None:
                raise SpecParseError(f"{n} is not a prime power", at)
            kind = Cyclic(*pp)
        sc.expect(")")
    else:
        kind = FreeZ()
    mult: Cardinality = 1
    if sc.peek() == "^":
        sc.expect("^")
        if sc.word("w"):
            mult = OMEGA
        elif sc.word("inf"):
            mult = ALEPH
        else:
            mult = sc.number()
            if mult < 1:
                raise SpecParseError("multiplicity must be >= 1", sc.pos)
    return (kind, mult)


def format_group_spec(spec: GroupSpec) -> str:
    if spec.is_trivial():
        return "0"
    parts = []
    for kind, mult in spec.components:
        base = str(kind)
        if mult == 1:
            parts.append(base)
        else:
            parts.append(f"{base}^{mult}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Enumeration of elements
# ---------------------------------------------------------------------------

def _kind_values(kind: ComponentKind, level: int) -> list[Value]:
    """Nonzero values of this kind visible at the given enumeration level."""
    if isinstance(kind, Cyclic):
        return list(range(1, kind.modulus))
    if isinstance(kind, FreeZ):
        vals: list[Value] = []
        for m in range(1, level + 1):
            vals.extend((-m, m))
        return vals
    vals = []
    for tau in range(1, level + 1):
        den = kind.p ** tau
        vals.extend(
            Fraction(c, den) for c in range(1, den) if c % kind.p != 0
        )
    return vals


def _value_level(kind: ComponentKind, v: Value) -> int:
    if isinstance(kind, Cyclic):
        return 1
    if isinstance(kind, FreeZ):
        return abs(v)
    return p_valuation(v.denominator, kind.p)


_LEVEL_BUDGET = 2_000_000


def iter_elements(spec: GroupSpec) -> Iterator[Element]:
    """All elements of a finite spec, zero first, in a fixed order."""
    size = spec.size()
    if size is INF:
        raise GroupError("spec is infinite; use ElementEnumeration")
    coords = spec.coordinates()
    ranges = [range(spec.kind(c).modulus) for c, _ in coords]
    for values in product(*ranges):
        yield element(spec, dict(zip(coords, values)))


class ElementEnumeration:
    """Deterministic indexed listing of the nonzero elements of a countable spec.

    Elements appear in levels: level L admits copies < L of every
    omega-multiplicity component, integers of magnitude <= L, and p-power
    denominators up to exponent L.  Within a level the order is the canonical
    element sort.  Finite specs are listed outright.  Indexing is 0-based.
    """

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self._items: list[Element] = []
        self._index: dict[Element, int] = {}
        self._level = 0
        self._finite = spec.size() is not INF
        if self._finite:
            items = sorted(
                (g for g in iter_elements(spec) if not g.is_zero),
                key=element_sort_key,
            )
            self._install(items)

    def _install(self, items: Iterable[Element]):
        for g in items:
            if g not in self._index:
                self._index[g] = len(self._items)
                self._items.append(g)

    def __len__(self) -> int:
        if not self._finite:
            raise GroupError("enumeration of an infinite group has no length")
        return len(self._items)

    def _grow(self):
        if self._finite:
            raise GroupError("enumeration exhausted: the group is finite")
        self._level += 1
        lvl = self._level
        coords = []
        for c, (kind, mult) in enumerate(self.spec.components):
            cap = mult if card_is_finite(mult) else lvl
            coords.extend((c, i) for i in range(min(cap, lvl)))
        options = []
        budget = 1
        for coord in coords:
            vals = _kind_values(self.spec.kind(coord[0]), lvl)
            budget *= len(vals) + 1
            if budget > _LEVEL_BUDGET:
                raise GroupError(
                    "element enumeration level too large; "
                    "restructure the spec or supply a custom enumeration"
                )
            options.append([None, *vals])
        fresh = []
        for combo in product(*options):
            support = {c: v for c, v in zip(coords, combo) if v is not None}
            if not support:
                continue
            level = max(
                max(copy + 1, _value_level(self.spec.kind(comp), v))
                for (comp, copy), v in support.items()
            )
            if level == lvl:
                fresh.append(element(self.spec, support))
        fresh.sort(key=element_sort_key)
        self._install(fresh)

    def nonzero(self, idx: int) -> Element:
        """idx-th nonzero element (0-based)."""
        if idx < 0:
            raise GroupError("enumeration index must be >= 0")
        while idx >= len(self._items):
            if self._finite:
                raise GroupError(
                    f"index {idx} out of range for a group of order "
                    f"{len(self._items) + 1}"
                )
            self._grow()
        return self._items[idx]

    def index_of(self, g: Element, search_cap: int = 200_000) -> int:
        """Inverse lookup; grows the listing until g is found."""
        if g.spec != self.spec:
            raise GroupError("element belongs to a different spec")
        if g.is_zero:
            raise GroupError("zero is not part of the nonzero enumeration")
        while g not in self._index:
            if self._finite or len(self._items) > search_cap:
                raise GroupError(f"element {g} not found in enumeration")
            self._grow()
        return self._index[g]


# ---------------------------------------------------------------------------
# Finite subgroup utilities
# ---------------------------------------------------------------------------

def subgroup_closure(generators: Iterable[Element], spec: GroupSpec) -> frozenset[Element]:
    """Subgroup generated by the given elements of a finite group."""
    if spec.size() is INF:
        raise GroupError("subgroup closure implemented for finite specs only")
    closed: set[Element] = {zero(spec)}
    for g in generators:
        if g.spec != spec:
            raise GroupError("generator belongs to a different spec")
        if g in closed:
            continue
        n = g.order()
        closed = {s + k * g for s in closed for k in range(int(n))}
    return frozenset(closed)


def subgroup_divisors(members: frozenset[Element]) -> tuple[int, ...]:
    """Elementary divisors (prime powers, sorted) of a finite subgroup."""
    if not members:
        raise GroupError("a subgroup contains at least zero")
    exponent = 1
    for g in members:
        exponent = math.lcm(exponent, int(g.order()))
    divisors: list[int] = []
    p = 2
    rest = exponent
    while rest > 1:
        if rest % p == 0:
            a_max = p_valuation(exponent, p)
            cof = exponent // (p ** a_max)
            part = {cof * g for g in members}  # the p-primary part
            sizes = [len(part)]
            layer = part
            while len(layer) > 1:
                layer = {p * g for g in layer}
                sizes.append(len(layer))
            gens_at_least = [
                p_valuation(sizes[j] // sizes[j + 1], p) if sizes[j] > sizes[j + 1] else 0
                for j in range(len(sizes) - 1)
            ]
            # count of cyclic factors of order exactly p^(j+1)
            for j, d in enumerate(gens_at_least):
                nxt = gens_at_least[j + 1] if j + 1 < len(gens_at_least) else 0
                divisors.extend([p ** (j + 1)] * (d - nxt))
            while rest % p == 0:
                rest //= p
        p += 1
    return tuple(sorted(divisors))


def spec_divisors(spec: GroupSpec) -> tuple[int, ...]:
    """Elementary divisors of a finite spec, for isomorphism-type comparison."""
    if spec.size() is INF:
        raise GroupError("spec is infinite")
    out: list[int] = []
    for kind, mult in spec.components:
        out.extend([kind.modulus] * mult)
    return tuple(sorted(out))
