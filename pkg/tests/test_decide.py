import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tseqlab.decide import (
    DecisionError,
    NotRealizableError,
    admits_minap,
    classify_reduction,
    contains_cyclic_power_omega,
    embeddable,
    exponent,
    leading_invariants,
    nr_membership,
    ulm_profile,
    ReductionFlags,
)
from tseqlab.groups import (
    ALEPH,
    Cyclic,
    FreeZ,
    GroupSpec,
    OMEGA,
    Prufer,
    TRIVIAL_SPEC,
    group_spec,
    parse_group_spec,
)

S = parse_group_spec


def test_exponent_examples():
    assert exponent(S("Z(2)^w + Z(8)^3")) == 8
    assert exponent(S("Z(4) + Z(9)")) == 36
    assert exponent(S("Z(5^inf)")) == math.inf
    assert exponent(S("Z")) == math.inf
    assert exponent(TRIVIAL_SPEC) == 1


def test_leading_invariants_examples():
    assert leading_invariants(S("Z(2)^w + Z(4)^3")) == {2: 3}
    assert leading_invariants(S("Z(2)^w")) == {2: OMEGA}
    assert leading_invariants(S("Z(2)^5 + Z(9)^w")) == {2: 5, 3: OMEGA}
    with pytest.raises(DecisionError):
        leading_invariants(S("Z(5^inf)"))


def test_ulm_profile_merges_layers():
    profile = ulm_profile(S("Z(4)^2 + Z(4)^3 + Z(2)"))
    assert profile.layers_for(2) == ((1, 1), (2, 5))
    profile = ulm_profile(S("Z(4)^2 + Z(4)^w"))
    assert profile.layers_for(2) == ((2, OMEGA),)


def test_admits_minap_examples():
    assert admits_minap(S("Z(2)^w + Z(4)^w")).admissible
    assert admits_minap(S("Z(3)^w")).admissible
    verdict = admits_minap(S("Z(2)^w + Z(4)^3"))
    assert not verdict.admissible
    cert = verdict.certificate
    assert cert.prime == 2
    assert cert.multiplier == 2
    assert cert.image == S("Z(2)^3")


def test_admits_minap_certificate_middle_layer_infinite():
    # the image must stay finite even when middle layers are infinite
    verdict = admits_minap(S("Z(4)^w + Z(8)"))
    assert not verdict.admissible
    assert verdict.certificate.multiplier == 4
    assert verdict.certificate.image == S("Z(2)")


def test_admits_minap_domain_errors():
    with pytest.raises(DecisionError):
        admits_minap(S("Z(2)^3"))  # finite
    with pytest.raises(DecisionError):
        admits_minap(S("Z(5^inf)"))  # unbounded


def test_contains_cyclic_power_omega_examples():
    assert contains_cyclic_power_omega(S("Z(2)^w + Z(8)^w"), 4)
    assert not contains_cyclic_power_omega(S("Z(2)^w + Z(4)"), 4)
    assert contains_cyclic_power_omega(S("Z(2)^w + Z(3)^w"), 6)
    with pytest.raises(DecisionError):
        contains_cyclic_power_omega(S("Z(2)^w"), 1)


def test_contains_prufer_counts_per_copy():
    # one quasicyclic copy gives only one independent element per order
    assert not contains_cyclic_power_omega(S("Z(2^inf)"), 2)
    assert contains_cyclic_power_omega(S("Z(2^inf)^w"), 8)
    # free summands are torsion free and contribute nothing
    assert not contains_cyclic_power_omega(S("Z^w"), 2)


def test_embeddable():
    assert embeddable(S("Z(4)"), S("Z(2)^w + Z(4)"))
    assert embeddable(S("Z(2)^3"), S("Z(4)^w"))
    assert not embeddable(S("Z(4)"), S("Z(2)^w"))
    assert not embeddable(S("Z(4)^2"), S("Z(4) + Z(2)^w"))
    assert embeddable(TRIVIAL_SPEC, S("Z(2)^w"))


def test_nr_membership_examples():
    assert not nr_membership(S("Z(2)^w + Z(4)"), S("Z(4)"))
    assert nr_membership(S("Z(4)^w"), S("Z(2)"))
    assert nr_membership(S("Z(2)^w"), TRIVIAL_SPEC)
    with pytest.raises(DecisionError):
        nr_membership(S("Z(4)^w"), S("Z(8)"))  # not embeddable
    with pytest.raises(DecisionError):
        nr_membership(S("Z(5^inf)"), S("Z(5)"))  # unbounded ambient


def test_nr_membership_certificate():
    verdict = nr_membership(S("Z(2)^w + Z(8)^2"), S("Z(8)"))
    assert not verdict.admissible
    cert = verdict.certificate
    assert cert.prime == 2 and cert.threshold == 3
    assert cert.multiplier == 4
    assert cert.image == S("Z(2)^2")


BOUNDED_SPECS = [
    "Z(2)^w",
    "Z(2)^w + Z(4)^3",
    "Z(2)^w + Z(4)^w",
    "Z(4)^w + Z(8)",
    "Z(3)^w + Z(9)^w + Z(2)^5",
    "Z(2)^5 + Z(9)^w",
    "Z(8)^w + Z(2)^3",
    "Z(25)^w + Z(5)",
]


@given(st.sampled_from(BOUNDED_SPECS))
def test_minap_matches_self_membership(text):
    spec = S(text)
    assert admits_minap(spec).admissible == nr_membership(spec, spec).admissible


@given(st.sampled_from(BOUNDED_SPECS), st.sampled_from(["Z(2)", "Z(4)", "Z(3)", "Z(8)"]))
def test_membership_monotone_under_exponent_division(g_text, h_text):
    ambient, sub = S(g_text), S(h_text)
    if not embeddable(sub, ambient):
        return
    if nr_membership(ambient, sub).admissible:
        n = exponent(sub)
        for d_text in ["Z(2)", "Z(3)", "Z(4)"]:
            smaller = S(d_text)
            if n % exponent(smaller) == 0 and embeddable(smaller, ambient):
                assert nr_membership(ambient, smaller).admissible


# -- reduction dispatch -------------------------------------------------------

def test_classify_divisible_summand():
    sub = S("Z(2^inf) + Z(3)")
    case = classify_reduction(S("Z(2^inf) + Z(3) + Z(5)^w"), sub)
    assert case.tag == "divisible-summand"
    assert case.ambient == sub
    (recipe,) = case.recipes
    assert recipe.tag == "prufer-triple"
    assert recipe.p == 2
    assert recipe.subgroup == S("Z(3)")


def test_classify_independent_free_element():
    case = classify_reduction(S("Z + Z(4)"), S("Z(4)"))
    assert case.tag == "independent-free-element"
    (recipe,) = case.recipes
    assert recipe.tag == "free-anchor"
    assert recipe.eps_rule == "zero-at-blocks"
    assert case.ambient == recipe.ambient
    assert case.ambient.components[0][0] == FreeZ()


def test_classify_divisible_ambient():
    case = classify_reduction(S("Z(3^inf) + Z(2)^w"), S("Z(2)^3"))
    assert case.tag == "divisible-ambient"
    (recipe,) = case.recipes
    assert recipe.tag == "prufer-pair"
    assert recipe.anchor == 0
    overlap = classify_reduction(
        S("Z(3^inf) + Z(2)^w"),
        S("Z(9) + Z(2)^3"),
        ReductionFlags(divisible_overlap=2),
    )
    (r2,) = overlap.recipes
    assert r2.anchor.denominator == 9
    assert r2.subgroup == S("Z(2)^3")


def test_classify_bounded_dispatch():
    case = classify_reduction(S("Z(4)^w"), S("Z(2)^3"))
    assert case.tag == "top-layer-finite-sparse-lifts"
    (main,) = case.recipes
    assert main.orders.prefix == (2, 2, 2)
    assert main.targets.prefix == (1, 1, 1)
    assert main.targets.tail == 0

    case = classify_reduction(S("Z(4)^w"), S("Z(4)^w"))
    assert case.tag == "top-layer-infinite"
    (main,) = case.recipes
    assert main.targets.tail == 1

    case = classify_reduction(
        S("Z(4)^w"),
        S("Z(2)^w + Z(4)"),
        ReductionFlags(layer_heights={(2, 1): 1}),
    )
    assert case.tag == "top-layer-finite-dense-lifts"
    main = case.recipes[0]
    assert main.orders.tail_param == 4 and main.targets.tail == 2


def test_classify_bounded_failure_raises_certificate():
    with pytest.raises(NotRealizableError) as info:
        classify_reduction(S("Z(2)^w + Z(4)"), S("Z(4)"))
    assert info.value.certificate.prime == 2


def test_classify_trivial_subgroup():
    case = classify_reduction(S("Z(2)^w + Z(4)"), TRIVIAL_SPEC)
    assert case.tag == "trivial-target"
    (recipe,) = case.recipes
    assert recipe.targets.tail == 0


def test_classify_reduced_unbounded_needs_flags():
    sub = S("Z(2^inf)")
    # fine: case 1 applies regardless of the ambient's own shape
    case = classify_reduction(S("Z(2^inf) + Z(2)^w"), sub)
    assert case.tag == "divisible-summand"
    with pytest.raises(DecisionError):
        classify_reduction(S("Z + Z(3)"), S("Z"))  # non-torsion subgroup


def test_classify_bounded_heights_case():
    flags = ReductionFlags(free_element=False, unbounded_orders=("geom", 2))
    case = classify_reduction(S("Z + Z(9)^w"), S("Z(9)^w + Z(3)^2"), flags)
    assert case.tag == "bounded-heights"
    main = case.recipes[0]
    assert main.variant == "b"
    assert main.orders.prefix == (3, 3)
    assert main.targets.tail == 0
    # the infinite layer keeps itself
    assert any(r.variant == "a" and r.targets.tail == 1 for r in case.recipes[1:])


def test_classify_multi_prime_bounded():
    case = classify_reduction(S("Z(4)^w + Z(9)^w"), S("Z(2)^w + Z(9)^w"))
    assert case.tag == "top-layer-infinite"
    assert len(case.recipes) == 2
