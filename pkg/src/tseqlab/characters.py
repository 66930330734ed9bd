"""Exact character pairings, convergence scans, and common-kernel machinery.

Characters assign a dual value to each coordinate of a group spec:

* free coordinates pair through a circle angle (exact rational, with an
  arbitrary-precision inexact fallback for non-torsion angles),
* cyclic coordinates Z(p^a) pair through a residue d: the angle is
  c*d / p^a,
* quasicyclic coordinates pair through a truncated p-adic integer x: the
  value c/p^t pairs to the angle c * (x mod p^t) / p^t.

On a finite group the characters separate points and can be enumerated
exhaustively (up to order 2^16; beyond that the operations refuse rather
than sample).  The common kernel of the characters surviving a sequence tail
is computed exactly and compared against an expected subgroup.

Membership of a character in the tail set of an infinite sequence is an
infinite-tail property; the windowed scanner reports member-in-window /
rejected / inconclusive rather than pretending to decide it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Sequence, Union

import mpmath

from .groups import (
    Cyclic,
    Element,
    FreeZ,
    GroupError,
    GroupSpec,
    INF,
    Prufer,
    card_is_finite,
    element,
    element_sort_key,
    iter_elements,
    p_valuation,
    subgroup_closure,
    subgroup_divisors,
    spec_divisors,
    zero,
)

CHARACTER_LIMIT = 1 << 16


class PrecisionError(GroupError):
    """A pairing needed more p-adic digits than the character carries."""

    def __init__(self, required: int, available: int):
        super().__init__(
            f"insufficient p-adic precision: need {required} digits, "
            f"have {available}"
        )
        self.required = required
        self.available = available


class RefusalError(GroupError):
    """Exhaustive enumeration would exceed the exactness limit."""

    def __init__(self, size, limit: int = CHARACTER_LIMIT):
        super().__init__(
            f"group of order {size} exceeds the exhaustive-enumeration "
            f"limit {limit}; refusing rather than sampling"
        )
        self.size = size
        self.limit = limit


# ---------------------------------------------------------------------------
# Circle values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleValue:
    """Angle in [0, 1): exact Fraction, or an mpmath real for the fallback."""

    frac: Optional[Fraction] = None
    approx: Optional[object] = None

    @classmethod
    def exact(cls, q) -> "CircleValue":
        return cls(frac=Fraction(q) % 1)

    @classmethod
    def inexact(cls, x) -> "CircleValue":
        return cls(approx=mpmath.frac(mpmath.mpf(x)))

    @property
    def is_exact(self) -> bool:
        return self.frac is not None

    @property
    def is_zero_angle(self) -> bool:
        return self.frac == 0

    def plus(self, other: "CircleValue") -> "CircleValue":
        if self.is_exact and other.is_exact:
            return CircleValue.exact(self.frac + other.frac)
        a = self.approx if not self.is_exact else _to_mpf(self.frac)
        b = other.approx if not other.is_exact else _to_mpf(other.frac)
        return CircleValue.inexact(a + b)

    def scaled(self, n: int) -> "CircleValue":
        if self.is_exact:
            return CircleValue.exact(n * self.frac)
        return CircleValue.inexact(n * self.approx)

    def deviation(self):
        """|1 - exp(2 pi i theta)| = 2 |sin(pi theta)|, at the ambient dps."""
        if self.is_zero_angle:
            return mpmath.mpf(0)
        theta = _to_mpf(self.frac) if self.is_exact else self.approx
        return 2 * abs(mpmath.sin(mpmath.pi * theta))

    def __str__(self) -> str:
        if self.is_exact:
            return str(self.frac)
        return "~" + mpmath.nstr(self.approx, 12)


def _to_mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


ZERO_ANGLE = CircleValue.exact(0)


# ---------------------------------------------------------------------------
# Truncated p-adic integers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicInt:
    """A p-adic integer known to len(digits) base-p digits, little-endian."""

    p: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if not self.digits:
            raise GroupError("need at least one digit of precision")
        if any(not 0 <= d < self.p for d in self.digits):
            raise GroupError("digit out of range")

    @classmethod
    def from_int(cls, m: int, p: int, precision: int) -> "PadicInt":
        value = m % p**precision
        digits = []
        for _ in range(precision):
            digits.append(value % p)
            value //= p
        return cls(p, tuple(digits))

    @property
    def precision(self) -> int:
        return len(self.digits)

    def residue(self, tau: int) -> int:
        """The integer x mod p^tau, needing tau digits."""
        if tau > self.precision:
            raise PrecisionError(required=tau, available=self.precision)
        total = 0
        for d in reversed(self.digits[:tau]):
            total = total * self.p + d
        return total

    def plus(self, other: "PadicInt") -> "PadicInt":
        if self.p != other.p:
            raise GroupError("p-adic primes differ")
        n = min(self.precision, other.precision)
        return PadicInt.from_int(self.residue(n) + other.residue(n), self.p, n)

    @property
    def is_zero(self) -> bool:
        return all(d == 0 for d in self.digits)

    def __str__(self) -> str:
        if self.p <= 10:
            return "".join(str(d) for d in self.digits)
        return "[" + ",".join(str(d) for d in self.digits) + "]"


def padic_unit(p: int, precision: int) -> PadicInt:
    """The distinguished unit (1, 0, 0, ...)."""
    return PadicInt.from_int(1, p, precision)


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------

DualValue = Union[CircleValue, int, PadicInt]


def _normalize_dual(kind, v) -> Optional[DualValue]:
    """Canonical dual value for the kind; None means 'drop' (zero dual)."""
    if isinstance(kind, FreeZ):
        if isinstance(v, (int, Fraction)):
            v = CircleValue.exact(v)
        if not isinstance(v, CircleValue):
            raise GroupError("free coordinate needs a circle-valued dual")
        if v.is_exact and v.frac == 0:
            return None
        return v
    if isinstance(kind, Cyclic):
        if not isinstance(v, int):
            raise GroupError("cyclic coordinate needs a residue dual")
        v %= kind.modulus
        return v if v else None
    if not isinstance(v, PadicInt) or v.p != kind.p:
        raise GroupError(f"quasicyclic coordinate needs a {kind.p}-adic dual")
    return None if v.is_zero else v


@dataclass(frozen=True)
class Character:
    """Finitely supported dual assignment; unassigned coordinates pair to 1."""

    spec: GroupSpec
    duals: tuple[tuple[tuple[int, int], DualValue], ...]

    def value_at(self, coord) -> Optional[DualValue]:
        for c, v in self.duals:
            if c == coord:
                return v
        return None

    def __add__(self, other: "Character") -> "Character":
        if self.spec != other.spec:
            raise GroupError("characters live on different groups")
        merged: dict = dict(self.duals)
        for coord, v in other.duals:
            mine = merged.get(coord)
            if mine is None:
                merged[coord] = v
            elif isinstance(v, CircleValue):
                merged[coord] = mine.plus(v)
            elif isinstance(v, int):
                merged[coord] = mine + v
            else:
                merged[coord] = mine.plus(v)
        return character(self.spec, merged)

    @property
    def is_trivial(self) -> bool:
        return not self.duals

    def __str__(self) -> str:
        return format_character(self)


def character(spec: GroupSpec, duals) -> Character:
    out = []
    for coord, raw in dict(duals).items():
        kind = spec.check_coord(coord)
        v = _normalize_dual(kind, raw)
        if v is not None:
            out.append((coord, v))
    out.sort(key=lambda t: t[0])
    return Character(spec, tuple(out))


def trivial_character(spec: GroupSpec) -> Character:
    return Character(spec, ())


def format_character(chi: Character) -> str:
    if chi.is_trivial:
        return "trivial"
    parts = []
    for (c, i), v in chi.duals:
        parts.append(f"e({c},{i}):{v}")
    return "; ".join(parts)


def parse_character(text: str, spec: GroupSpec) -> Character:
    from .groups import SpecParseError

    text = text.strip()
    if text in ("trivial", ""):
        return trivial_character(spec)
    duals: dict = {}
    for chunk in text.split(";"):
        item = chunk.strip()
        if not item.startswith("e(") or ":" not in item:
            raise SpecParseError(f"expected e(c,i):value, got {item!r}", 0)
        coord_text, _, value_text = item.partition(":")
        try:
            comp_s, copy_s = coord_text[2:].rstrip(")").split(",")
            coord = (int(comp_s), int(copy_s))
        except ValueError:
            raise SpecParseError(f"bad coordinate in {item!r}", 0) from None
        kind = spec.check_coord(coord)
        value_text = value_text.strip()
        if isinstance(kind, FreeZ):
            duals[coord] = CircleValue.exact(Fraction(value_text))
        elif isinstance(kind, Cyclic):
            duals[coord] = int(value_text)
        else:
            if value_text.startswith("["):
                digits = tuple(int(d) for d in value_text[1:-1].split(","))
            else:
                digits = tuple(int(d) for d in value_text)
            duals[coord] = PadicInt(kind.p, digits)
    return character(spec, duals)


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------

def pair(chi: Character, g: Element) -> CircleValue:
    """Total angle of the pairing; exact unless a free coordinate meets an
    inexact circle value."""
    if chi.spec != g.spec:
        raise GroupError("character and element live on different groups")
    total = ZERO_ANGLE
    for coord, v in g.terms:
        kind = g.spec.kind(coord[0])
        dual = chi.value_at(coord)
        if dual is None:
            continue
        if isinstance(kind, FreeZ):
            total = total.plus(dual.scaled(v))
        elif isinstance(kind, Cyclic):
            total = total.plus(
                CircleValue.exact(Fraction(v * dual, kind.modulus))
            )
        else:
            tau = p_valuation(v.denominator, kind.p)
            residue = dual.residue(tau)
            total = total.plus(
                CircleValue.exact(Fraction(v.numerator * residue, v.denominator))
            )
    return total


def _pairs_trivially(chi: Character, g: Element, exp: int) -> bool:
    """Fast exact path for finite all-cyclic specs: angle * exp mod exp == 0."""
    total = 0
    for coord, v in g.terms:
        dual = chi.value_at(coord)
        if dual is None:
            continue
        modulus = g.spec.kind(coord[0]).modulus
        total += v * dual * (exp // modulus)
    return total % exp == 0


# ---------------------------------------------------------------------------
# Finite enumeration
# ---------------------------------------------------------------------------

def _check_enumerable(spec: GroupSpec) -> int:
    size = spec.size()
    if size is INF or size > CHARACTER_LIMIT:
        raise RefusalError(size)
    return int(size)


def enumerate_characters(spec: GroupSpec) -> list[Character]:
    """All characters of a finite spec (as many as elements), fixed order."""
    _check_enumerable(spec)
    coords = spec.coordinates()
    ranges = [range(spec.kind(c).modulus) for c, _ in coords]
    out = []
    for values in product(*ranges):
        duals = {coord: v for coord, v in zip(coords, values) if v}
        out.append(character(spec, duals))
    return out


def group_exponent_int(spec: GroupSpec) -> int:
    exp = 1
    for kind, _ in spec.components:
        exp = math.lcm(exp, kind.modulus)
    return exp


# ---------------------------------------------------------------------------
# Convergence scanning and membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanEntry:
    index: int
    angle: CircleValue
    deviation: float


@dataclass(frozen=True)
class ScanReport:
    recipe_text: str
    window: tuple[int, int]
    entries: tuple[ScanEntry, ...]
    max_deviation: float


def convergence_scan(
    recipe, chi: Character, window: tuple[int, int], dps: int = 30,
    stride: int = 1,
) -> ScanReport:
    """Per-index deviations |1 - exp(2 pi i angle_n)| over the window.

    ``stride`` restricts the scan to every stride-th index, which isolates
    one strand of an interleaved construction (e.g. the even terms).
    """
    lo, hi = window
    if lo > hi or lo < recipe.min_index:
        raise GroupError("window outside the recipe's defined range")
    if stride < 1:
        raise GroupError("stride must be >= 1")
    entries = []
    with mpmath.workdps(dps):
        for idx in range(lo, hi + 1, stride):
            angle = pair(chi, recipe.term(idx))
            entries.append(ScanEntry(idx, angle, float(angle.deviation())))
    worst = max((e.deviation for e in entries), default=0.0)
    return ScanReport(recipe.describe(), (lo, hi), tuple(entries), worst)


@dataclass(frozen=True)
class MembershipReport:
    verdict: str  # "member-in-window" | "rejected" | "inconclusive"
    witness: Optional[int]
    scanned: int


def tail_membership(
    recipe,
    chi: Character,
    tail: int,
    length: int,
    tolerance: float,
    dps: int = 30,
) -> MembershipReport:
    """Three-valued verdict over [tail, tail+length].

    Rejected needs an exactly rational nonzero pairing whose deviation
    exceeds the tolerance; member-in-window needs every pairing to be exactly
    zero; anything else (inexact values, small nonzero angles) is
    inconclusive.
    """
    if tail < recipe.min_index:
        raise GroupError("tail starts before the recipe's first index")
    saw_unresolved = False
    scanned = 0
    with mpmath.workdps(dps):
        for idx in range(tail, tail + length + 1):
            scanned += 1
            angle = pair(chi, recipe.term(idx))
            if angle.is_exact:
                if angle.frac == 0:
                    continue
                if float(angle.deviation()) > tolerance:
                    return MembershipReport("rejected", idx, scanned)
                saw_unresolved = True
            else:
                saw_unresolved = True
    if saw_unresolved:
        return MembershipReport("inconclusive", None, scanned)
    return MembershipReport("member-in-window", None, scanned)


# ---------------------------------------------------------------------------
# Finite truncation pipeline
# ---------------------------------------------------------------------------

def validate_truncation(ambient: GroupSpec, trunc: GroupSpec):
    if len(trunc.components) > len(ambient.components):
        raise GroupError("truncation has more components than the ambient group")
    for i, (kind, mult) in enumerate(trunc.components):
        akind, amult = ambient.components[i]
        if kind != akind:
            raise GroupError(
                f"truncation component {i} is {kind}, ambient has {akind}"
            )
        if not card_is_finite(mult):
            raise GroupError("truncation must be finite")
        if card_is_finite(amult) and mult > amult:
            raise GroupError("truncation exceeds the ambient multiplicity")


def truncate_element(g: Element, trunc: GroupSpec) -> Element:
    """Drop coordinates outside the truncation (the canonical projection)."""
    support = {}
    for (c, i), v in g.terms:
        if c >= len(trunc.components):
            continue
        mult = trunc.multiplicity(c)
        if card_is_finite(mult) and i >= mult:
            continue
        support[(c, i)] = v
    return element(trunc, support)


@dataclass(frozen=True)
class TailKernelScan:
    trunc: GroupSpec
    tail: int
    stabilization: int
    kept: tuple[Character, ...]
    stable: bool
    distinct_terms: int


def tail_kernel_scan(
    trunc: GroupSpec,
    recipe,
    tail: int,
    stabilization: int,
    project: Optional[Callable[[Element], Element]] = None,
) -> TailKernelScan:
    """Characters of the truncation that pair to 1 with every projected term
    of [tail, tail+stabilization], with a stability check at twice the window."""
    validate_truncation(recipe.ambient, trunc)
    _check_enumerable(trunc)
    if tail < recipe.min_index:
        raise GroupError("tail starts before the recipe's first index")
    proj = project or (lambda g: truncate_element(g, trunc))
    exp = group_exponent_int(trunc)

    def distinct_projected(hi: int) -> set[Element]:
        out = set()
        for idx in range(tail, hi + 1):
            g = proj(recipe.term(idx))
            if not g.is_zero:
                out.add(g)
        return out

    short = distinct_projected(tail + stabilization)
    long = distinct_projected(tail + 2 * stabilization)
    chars = enumerate_characters(trunc)
    kept_short = [
        chi for chi in chars if all(_pairs_trivially(chi, g, exp) for g in short)
    ]
    if long == short:
        kept_long = kept_short
    else:
        kept_long = [
            chi for chi in chars if all(_pairs_trivially(chi, g, exp) for g in long)
        ]
    stable = [c.duals for c in kept_short] == [c.duals for c in kept_long]
    return TailKernelScan(
        trunc=trunc,
        tail=tail,
        stabilization=stabilization,
        kept=tuple(kept_short),
        stable=stable,
        distinct_terms=len(long),
    )


def annihilator(chars: Sequence[Character], trunc: GroupSpec) -> tuple[Element, ...]:
    """Generators (in canonical order) of the subgroup killed by every
    character in the set."""
    _check_enumerable(trunc)
    exp = group_exponent_int(trunc)
    members = [
        g
        for g in iter_elements(trunc)
        if all(_pairs_trivially(chi, g, exp) for chi in chars)
    ]
    generators: list[Element] = []
    closed = {zero(trunc)}
    for g in sorted(members, key=element_sort_key):
        if g in closed:
            continue
        generators.append(g)
        closed = {s + k * g for s in closed for k in range(int(g.order()))}
    return tuple(generators)


# ---------------------------------------------------------------------------
# Radical reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpectedSubgroup:
    """What the common kernel should be: explicit generators, an isomorphism
    type, the whole truncation, or the trivial subgroup."""

    kind: str  # "generators" | "spec" | "whole" | "trivial"
    generators: tuple[Element, ...] = ()
    spec: Optional[GroupSpec] = None

    def matches(self, subgroup: frozenset, trunc: GroupSpec) -> bool:
        if self.kind == "generators":
            return subgroup_closure(self.generators, trunc) == subgroup
        if self.kind == "spec":
            return spec_divisors(self.spec) == subgroup_divisors(subgroup)
        if self.kind == "whole":
            return len(subgroup) == trunc.size()
        if self.kind == "trivial":
            return len(subgroup) == 1
        raise GroupError(f"unknown expectation kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "generators":
            return "gens:" + ";".join(str(g) for g in self.generators)
        if self.kind == "spec":
            return f"spec:{self.spec}"
        return self.kind


@dataclass(frozen=True)
class RadicalReport:
    recipe_text: str
    trunc: GroupSpec
    tail: int
    stabilization: int
    stable: bool
    distinct_terms: int
    kept_count: int
    kept: tuple[Character, ...]  # listing capped; count is authoritative
    kept_listed: int
    annihilator_generators: tuple[Element, ...]
    subgroup_size: int
    expected: str
    verdict: str  # "match" | "mismatch"
    mismatch_witness: Optional[Element]


KEPT_LISTING_CAP = 512


def radical_report(
    recipe,
    trunc: GroupSpec,
    tail: int,
    stabilization: int,
    expected: ExpectedSubgroup,
    project: Optional[Callable[[Element], Element]] = None,
) -> RadicalReport:
    """Full finite pipeline: tail kernel, annihilator, comparison."""
    scan = tail_kernel_scan(trunc, recipe, tail, stabilization, project)
    generators = annihilator(scan.kept, trunc)
    subgroup = subgroup_closure(generators, trunc)
    ok = expected.matches(subgroup, trunc)
    witness = None
    if not ok:
        witness = _mismatch_witness(expected, subgroup, trunc)
    return RadicalReport(
        recipe_text=recipe.describe(),
        trunc=trunc,
        tail=tail,
        stabilization=stabilization,
        stable=scan.stable,
        distinct_terms=scan.distinct_terms,
        kept_count=len(scan.kept),
        kept=scan.kept[:KEPT_LISTING_CAP],
        kept_listed=min(len(scan.kept), KEPT_LISTING_CAP),
        annihilator_generators=generators,
        subgroup_size=len(subgroup),
        expected=expected.describe(),
        verdict="match" if ok else "mismatch",
        mismatch_witness=witness,
    )


def _mismatch_witness(
    expected: ExpectedSubgroup, subgroup: frozenset, trunc: GroupSpec
) -> Optional[Element]:
    if expected.kind == "generators":
        wanted = subgroup_closure(expected.generators, trunc)
        diff = sorted(subgroup ^ wanted, key=element_sort_key)
        return diff[0] if diff else None
    extras = sorted(
        (g for g in subgroup if not g.is_zero), key=element_sort_key
    )
    return extras[0] if extras else None


# ---------------------------------------------------------------------------
# Windowed (non-finite) pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeOutcome:
    character: Character
    expected_member: bool
    verdict: str
    witness: Optional[int]


@dataclass(frozen=True)
class WindowedRadicalReport:
    recipe_text: str
    tail: int
    length: int
    tolerance: float
    outcomes: tuple[ProbeOutcome, ...]
    consistent: bool
    inconclusive: int


def windowed_radical_report(
    recipe,
    probes: Sequence[tuple[Character, bool]],
    tail: int,
    length: int,
    tolerance: float,
    dps: int = 30,
) -> WindowedRadicalReport:
    """Evaluate probe characters against the expected tail-membership.

    A contradiction is a rejected character that was expected in, or a
    member-in-window that was expected out; inconclusive probes are counted
    but never contradict.
    """
    outcomes = []
    consistent = True
    unresolved = 0
    for chi, expected_member in probes:
        report = tail_membership(recipe, chi, tail, length, tolerance, dps)
        if report.verdict == "inconclusive":
            unresolved += 1
        elif report.verdict == "member-in-window" and not expected_member:
            consistent = False
        elif report.verdict == "rejected" and expected_member:
            consistent = False
        outcomes.append(
            ProbeOutcome(chi, expected_member, report.verdict, report.witness)
        )
    return WindowedRadicalReport(
        recipe_text=recipe.describe(),
        tail=tail,
        length=length,
        tolerance=tolerance,
        outcomes=tuple(outcomes),
        consistent=consistent,
        inconclusive=unresolved,
    )


# ---------------------------------------------------------------------------
# p-adic multiple check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicMultipleReport:
    found: bool
    witness: Optional[int]
    window: tuple[int, int]
    bound: int


def padic_multiple_check(
    x: PadicInt, window: tuple[int, int], bound: int
) -> PadicMultipleReport:
    """Is x congruent to an integer multiple m * (1, 0, 0, ...) with
    |m| <= bound, modulo p^N for the window's upper precision N?

    Equivalent to an exhaustive scan over m, resolved by a residue
    comparison: the only candidates below p^N / 2 are the residue itself and
    its negative complement.
    """
    lo, hi = window
    if not 1 <= lo <= hi:
        raise GroupError("window must satisfy 1 <= lo <= hi")
    if x.precision < hi:
        raise PrecisionError(required=hi, available=x.precision)
    modulus = x.p**hi
    residue = x.residue(hi)
    witness: Optional[int] = None
    if residue <= bound:
        witness = residue
    elif modulus - residue <= bound:
        witness = residue - modulus
    return PadicMultipleReport(witness is not None, witness, window, bound)
