"""Structural invariants of group specs and admissibility decisions.

The two decision procedures here are purely structural:

* a bounded infinite group admits a topology whose only continuous character
  is trivial iff the multiplicity attached to the largest exponent of every
  prime (its leading layer) is infinite;
* a countable subgroup H of a bounded infinite G is the common kernel of all
  continuous characters for some Hausdorff topology iff G contains infinitely
  many independent elements of order >= p^b for every prime power p^b exactly
  dividing exp H.

On a negative answer the certificate is a multiplication map with finite
nonzero image; its kernel is open and closed in every Hausdorff group
topology, which blocks the requested common kernel.  ``classify_reduction``
picks the construction the sequence builders can realize and returns its
ambient group together with ready-made recipes, one per direct summand (the
common-kernel computation distributes over finite direct sums).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .groups import (
    ALEPH,
    Cardinality,
    Cyclic,
    FreeZ,
    GroupError,
    GroupSpec,
    INF,
    OMEGA,
    Prufer,
    card_is_finite,
    p_valuation,
)
from . import sequences as seq


class DecisionError(GroupError):
    """Input outside a decision procedure's domain."""


class NotRealizableError(DecisionError):
    """The requested subgroup is obstructed; carries the certificate."""

    def __init__(self, certificate: "ObstructionCertificate"):
        super().__init__(
            f"not realizable: obstruction at p={certificate.prime} "
            f"(multiplier {certificate.multiplier}, image {certificate.image})"
        )
        self.certificate = certificate


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def exponent(spec: GroupSpec) -> int | float:
    """lcm of element orders; math.inf when a free or quasicyclic summand exists."""
    result = 1
    for kind, _ in spec.components:
        if not isinstance(kind, Cyclic):
            return INF
        result = math.lcm(result, kind.modulus)
    return result


def _card_add(a: Cardinality, b: Cardinality) -> Cardinality:
    if card_is_finite(a) and card_is_finite(b):
        return a + b
    return ALEPH if (a is ALEPH or b is ALEPH) else OMEGA


@dataclass(frozen=True)
class UlmProfile:
    """Per prime: the (exponent, multiplicity) layers, exponents ascending."""

    layers: tuple[tuple[int, tuple[tuple[int, Cardinality], ...]], ...]

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.layers)

    def layers_for(self, p: int) -> tuple[tuple[int, Cardinality], ...]:
        for q, ls in self.layers:
            if q == p:
                return ls
        return ()

    def leading(self) -> dict[int, Cardinality]:
        return {p: ls[-1][1] for p, ls in self.layers}


def ulm_profile(spec: GroupSpec) -> UlmProfile:
    if not spec.is_bounded():
        raise DecisionError("Ulm profile requires a bounded spec")
    per_prime: dict[int, dict[int, Cardinality]] = {}
    for kind, mult in spec.components:
        layer = per_prime.setdefault(kind.p, {})
        layer[kind.a] = _card_add(layer.get(kind.a, 0), mult)
    return UlmProfile(
        tuple(
            (p, tuple(sorted(layers.items())))
            for p, layers in sorted(per_prime.items())
        )
    )


def leading_invariants(spec: GroupSpec) -> dict[int, Cardinality]:
    """For each prime, the multiplicity attached to its largest exponent."""
    return ulm_profile(spec).leading()


def _prime_factors(n: int) -> list[tuple[int, int]]:
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
    return out


# ---------------------------------------------------------------------------
# Certificates and decisions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObstructionCertificate:
    """Multiplication by ``multiplier`` has finite nonzero image on G.

    Its kernel is an open-and-closed subgroup in every Hausdorff group
    topology, hence contains the common character kernel, which therefore
    cannot be the requested subgroup.
    """

    prime: int
    threshold: int  # the exponent b whose order->=p^b layer count came up short
    multiplier: int
    image: GroupSpec


@dataclass(frozen=True)
class Decision:
    admissible: bool
    certificate: Optional[ObstructionCertificate] = None

    def __bool__(self) -> bool:
        return self.admissible


def _image_spec(spec: GroupSpec, m: int) -> GroupSpec:
    """Spec of m*G for bounded G: componentwise m*Z(p^a) = Z(p^a / gcd(m, p^a))."""
    comps = []
    for kind, mult in spec.components:
        reduced = kind.modulus // math.gcd(m, kind.modulus)
        if reduced > 1:
            comps.append((Cyclic(kind.p, p_valuation(reduced, kind.p)), mult))
    return GroupSpec(tuple(comps))


def _certificate(spec: GroupSpec, p: int, b: int) -> ObstructionCertificate:
    exp_g = exponent(spec)
    n_p = p_valuation(exp_g, p)
    m = exp_g // p ** (n_p - b + 1)
    image = _image_spec(spec, m)
    if image.size() is INF:
        raise AssertionError("obstruction image must be finite")
    return ObstructionCertificate(prime=p, threshold=b, multiplier=m, image=image)


def admits_minap(spec: GroupSpec) -> Decision:
    """Bounded infinite specs only: every leading layer must be infinite."""
    if not spec.is_bounded():
        raise DecisionError("criterion applies to bounded specs")
    if spec.size() is not INF:
        raise DecisionError("criterion applies to infinite specs")
    profile = ulm_profile(spec)
    for p in profile.primes():
        top_exp, top_mult = profile.layers_for(p)[-1]
        if card_is_finite(top_mult):
            return Decision(False, _certificate(spec, p, top_exp))
    return Decision(True)


def contains_cyclic_power_omega(spec: GroupSpec, n: int) -> bool:
    """Does the spec'd group contain a countable power of Z(n)?

    True iff for every prime power p^b exactly dividing n the group has
    infinitely many independent elements of order >= p^b.  Each cyclic layer
    Z(p^a) with a >= b contributes its multiplicity, each quasicyclic copy
    contributes one element (its subgroups are linearly ordered), and free
    summands contribute nothing.
    """
    if n < 2:
        raise DecisionError("n must be >= 2")
    for p, b in _prime_factors(n):
        total: Cardinality = 0
        for kind, mult in spec.components:
            if isinstance(kind, Cyclic) and kind.p == p and kind.a >= b:
                total = _card_add(total, mult)
            elif isinstance(kind, Prufer) and kind.p == p:
                total = _card_add(total, mult)
        if card_is_finite(total):
            return False
    return True


def embeddable(sub: GroupSpec, ambient: GroupSpec) -> bool:
    """Multiplicity-wise dominance per (prime, exponent >= b); bounded specs."""
    if not sub.is_bounded() or not ambient.is_bounded():
        return False
    if sub.is_trivial():
        return True
    sub_profile = ulm_profile(sub)
    amb_profile = ulm_profile(ambient)
    for p in sub_profile.primes():
        for b, _ in sub_profile.layers_for(p):
            need: Cardinality = 0
            have: Cardinality = 0
            for a, k in sub_profile.layers_for(p):
                if a >= b:
                    need = _card_add(need, k)
            for a, k in amb_profile.layers_for(p):
                if a >= b:
                    have = _card_add(have, k)
            if card_is_finite(have) and (not card_is_finite(need) or need > have):
                return False
    return True


def nr_membership(ambient: GroupSpec, sub: GroupSpec) -> Decision:
    """Can sub be the common character kernel of some topology on ambient?

    Bounded infinite ambient only; the answer is the same for plain and for
    complete topologies.  The trivial subgroup is always realizable.
    """
    if not ambient.is_bounded():
        raise DecisionError("ambient group must be bounded")
    if ambient.size() is not INF:
        raise DecisionError("ambient group must be infinite")
    if not embeddable(sub, ambient):
        raise DecisionError("subgroup spec does not embed in the ambient spec")
    n = exponent(sub)
    if n == 1:
        return Decision(True)
    for p, b in _prime_factors(n):
        if not contains_cyclic_power_omega(ambient, p**b):
            return Decision(False, _certificate(ambient, p, b))
    return Decision(True)


# ---------------------------------------------------------------------------
# Reduction dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionFlags:
    """Embedding data the structural specs alone cannot carry.

    free_element: an infinite-order element independent of the subgroup is
        available (default: derived from a free summand in the ambient spec;
        a torsion subgroup meets an infinite cyclic subgroup trivially).
    divisible_overlap: the chosen quasicyclic summand of the ambient meets
        the subgroup in a cyclic group of this exponent (0 = trivially).
    layer_heights: constant height in the ambient of the generators of each
        (prime, exponent) layer of the subgroup.
    unbounded_orders: ("geom", p) marks an unbounded supply of independent
        elements of orders p, p^2, ... in the ambient, data the finite spec
        grammar cannot express; drives the reduced-unbounded constructions.
    """

    free_element: Optional[bool] = None
    divisible_overlap: int = 0
    layer_heights: Optional[Mapping[tuple[int, int], int]] = field(default=None)
    unbounded_orders: Optional[tuple[str, int]] = None


@dataclass(frozen=True)
class ReductionCase:
    """Chosen construction: the ambient subgroup to work in plus its recipes."""

    tag: str
    ambient: GroupSpec
    recipes: tuple


def _drop_one_copy(spec: GroupSpec, comp: int) -> GroupSpec:
    comps = list(spec.components)
    kind, mult = comps[comp]
    if mult == 1:
        del comps[comp]
    elif card_is_finite(mult):
        comps[comp] = (kind, mult - 1)
    # an infinite multiplicity survives dropping one copy
    return GroupSpec(tuple(comps))


def _remove_cyclic(spec: GroupSpec, p: int, a: int) -> GroupSpec:
    for c, (kind, _) in enumerate(spec.components):
        if isinstance(kind, Cyclic) and kind.p == p and kind.a == a:
            return _drop_one_copy(spec, c)
    raise DecisionError(
        f"divisible_overlap={a} but the subgroup has no Z({p}^{a}) summand"
    )


def _height_of_layer(flags: ReductionFlags, p: int, a: int) -> int:
    if flags.layer_heights is None:
        return 0
    return flags.layer_heights.get((p, a), 0)


def classify_reduction(
    ambient: GroupSpec,
    sub: GroupSpec,
    flags: ReductionFlags | None = None,
) -> ReductionCase:
    """Pick the first applicable construction, in the standard case order.

    Raises :class:`NotRealizableError` when the ambient group is bounded and
    the membership criterion fails.
    """
    flags = flags or ReductionFlags()
    if not sub.is_torsion():
        raise DecisionError("subgroup must be torsion")

    if exponent(sub) is INF:
        # (1) unbounded subgroup with a divisible summand: work inside the
        # subgroup itself, realizing the whole group as the common kernel
        for c, (kind, _) in enumerate(sub.components):
            if isinstance(kind, Prufer):
                rest = _drop_one_copy(sub, c)
                return ReductionCase(
                    tag="divisible-summand",
                    ambient=sub,
                    recipes=(seq.PruferTripleRecipe(p=kind.p, subgroup=rest),),
                )
        # (2) unbounded torsion without a divisible summand is not expressible
        # as a finite component list; an explicit order rule can still land here
        if flags.unbounded_orders is not None:
            _, p = flags.unbounded_orders
            recipe = seq.CyclicLadderRecipe.with_geometric_tail((), (), p, 1)
            return ReductionCase("reduced-unbounded", recipe.ambient, (recipe,))
        raise DecisionError(
            "unbounded torsion subgroup without a divisible summand needs an "
            "unbounded_orders flag"
        )

    if exponent(ambient) is INF:
        has_free = any(isinstance(k, FreeZ) for k, _ in ambient.components)
        free_ok = flags.free_element if flags.free_element is not None else has_free
        if free_ok:
            # (3) a free generator one step outside the subgroup
            recipe = seq.FreeAnchorRecipe(p=2, subgroup=sub, eps_rule="zero-at-blocks")
            return ReductionCase("independent-free-element", recipe.ambient, (recipe,))
        for kind, _ in ambient.components:
            if isinstance(kind, Prufer):
                # (4) a quasicyclic summand of the ambient hosts the anchor
                p = kind.p
                k = flags.divisible_overlap
                if k == 0:
                    recipe = seq.PruferPairRecipe(p=p, subgroup=sub)
                else:
                    recipe = seq.PruferPairRecipe(
                        p=p,
                        subgroup=_remove_cyclic(sub, p, k),
                        anchor=Fraction(1, p**k),
                    )
                return ReductionCase("divisible-ambient", recipe.ambient, (recipe,))
        # (5) unbounded ambient with neither free nor divisible summands:
        # again only expressible through an explicit order rule
        if flags.unbounded_orders is not None:
            return _bounded_heights_case(sub, flags)
        raise DecisionError(
            "unbounded ambient without free or divisible summands needs an "
            "unbounded_orders flag"
        )

    return _bounded_dispatch(ambient, sub, flags)


def _bounded_heights_case(sub: GroupSpec, flags: ReductionFlags) -> ReductionCase:
    """Bounded subgroup inside an unbounded reduced ambient.

    Finite layers ride as the prefix of one ladder whose geometric tail
    (targets zero) supplies the unbounded orders; each infinite layer becomes
    its own constant ladder.  Heights, when given, lift every generator.
    """
    profile = ulm_profile(sub)
    prefix_orders: list[int] = []
    prefix_targets: list[int] = []
    parts = []
    for p in profile.primes():
        for a, k in profile.layers_for(p):
            b = _height_of_layer(flags, p, a)
            if card_is_finite(k):
                prefix_orders.extend([p ** (a + b)] * k)
                prefix_targets.extend([p**b] * k)
            else:
                parts.append(seq.CyclicLadderRecipe.constant(p ** (a + b), p**b))
    _, gp = flags.unbounded_orders
    main = seq.CyclicLadderRecipe.with_geometric_tail(
        tuple(prefix_orders), tuple(prefix_targets), gp, 0
    )
    parts.insert(0, main)
    ambient_spec = GroupSpec(
        tuple((kind, mult) for r in parts for kind, mult in r.ambient.components)
    )
    return ReductionCase("bounded-heights", ambient_spec, tuple(parts))


def _bounded_dispatch(
    ambient: GroupSpec, sub: GroupSpec, flags: ReductionFlags
) -> ReductionCase:
    decision = nr_membership(ambient, sub)
    if not decision:
        raise NotRealizableError(decision.certificate)
    if sub.is_trivial():
        # any infinite layer of the ambient hosts a ladder with zero targets
        profile = ulm_profile(ambient)
        for p in profile.primes():
            for a, k in profile.layers_for(p):
                if not card_is_finite(k):
                    recipe = seq.CyclicLadderRecipe.constant(p**a, 0)
                    return ReductionCase("trivial-target", recipe.ambient, (recipe,))
        raise AssertionError("infinite bounded spec must have an infinite layer")

    profile = ulm_profile(sub)
    first_tag: str | None = None
    parts: list = []
    for p in profile.primes():
        tag, recipes = _bounded_prime_part(p, profile.layers_for(p), flags)
        if first_tag is None:
            first_tag = tag
        parts.extend(recipes)
    ambient_spec = GroupSpec(
        tuple((kind, mult) for r in parts for kind, mult in r.ambient.components)
    )
    return ReductionCase(first_tag, ambient_spec, tuple(parts))


def _bounded_prime_part(
    p: int,
    layers: tuple[tuple[int, Cardinality], ...],
    flags: ReductionFlags,
):
    """One prime of the bounded dispatch; returns (tag, ladder recipes)."""
    a_n, k_n = layers[-1]
    finite_layers = [(a, k) for a, k in layers if card_is_finite(k)]
    infinite_layers = [(a, k) for a, k in layers if not card_is_finite(k)]
    prefix = [p**a for a, k in finite_layers for _ in range(k)]

    if not card_is_finite(k_n):
        # top layer infinite: every generator is its own target; the finite
        # layers ride as the prefix of the top-order ladder
        main = seq.CyclicLadderRecipe.with_prefix(
            prefix, [1] * len(prefix), p**a_n, 1
        )
        others = [
            seq.CyclicLadderRecipe.constant(p**a, 1)
            for a, _ in infinite_layers
            if a != a_n
        ]
        return "top-layer-infinite", [main, *others]

    # top layer finite: does some infinite layer lift to the top order?
    lifted = None
    for a, k in infinite_layers:
        if _height_of_layer(flags, p, a) >= a_n - a:
            lifted = a
            break

    if lifted is None:
        # sparse lifts: an independent top-order tail with zero targets is
        # appended behind the finite layers (it exists by the membership
        # criterion, which was checked before dispatching)
        main = seq.CyclicLadderRecipe.with_prefix(
            prefix, [1] * len(prefix), p**a_n, 0
        )
        others = [
            seq.CyclicLadderRecipe.constant(p**a, 1) for a, _ in infinite_layers
        ]
        return "top-layer-finite-sparse-lifts", [main, *others]

    # dense lifts: a whole infinite layer lifts to the top order and carries
    # its own generators as targets
    main = seq.CyclicLadderRecipe.with_prefix(
        prefix, [1] * len(prefix), p**a_n, p ** (a_n - lifted)
    )
    others = [
        seq.CyclicLadderRecipe.constant(p**a, 1)
        for a, _ in infinite_layers
        if a != lifted
    ]
    return "top-layer-finite-dense-lifts", [main, *others]
