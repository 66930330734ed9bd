import math
import random
from fractions import Fraction

import pytest

from tseqlab.characters import (
    CHARACTER_LIMIT,
    Character,
    CircleValue,
    ExpectedSubgroup,
    PadicInt,
    PadicMultipleReport,
    PrecisionError,
    RefusalError,
    annihilator,
    character,
    convergence_scan,
    enumerate_characters,
    format_character,
    pair,
    padic_multiple_check,
    padic_unit,
    parse_character,
    radical_report,
    tail_kernel_scan,
    tail_membership,
    trivial_character,
    truncate_element,
    windowed_radical_report,
)
from tseqlab.groups import (
    Cyclic,
    GroupError,
    GroupSpec,
    OMEGA,
    element,
    group_spec,
    iter_elements,
    parse_group_spec,
    subgroup_closure,
    zero,
)
from tseqlab.sequences import CyclicLadderRecipe, FreeAnchorRecipe, PruferPairRecipe

S = parse_group_spec


class ConstantRecipe:
    min_index = 1
    tag = "constant-fixture"

    def __init__(self, spec, value):
        self.ambient = spec
        self._value = value

    def term(self, idx):
        return self._value

    def describe(self):
        return "constant-fixture{}"


# -- pairing ---------------------------------------------------------------------

def test_pair_prufer_unit():
    spec = S("Z(3^inf)")
    chi = character(spec, {(0, 0): padic_unit(3, 30)})
    lam = element(spec, {(0, 0): Fraction(1, 3)})
    assert pair(chi, lam).frac == Fraction(1, 3)


def test_pair_prufer_multiple():
    spec = S("Z(3^inf)")
    chi = character(spec, {(0, 0): PadicInt.from_int(3, 3, 30)})
    lam = element(spec, {(0, 0): Fraction(1, 9)})
    assert pair(chi, lam).frac == Fraction(1, 3)


def test_pair_zero_element():
    spec = S("Z(3^inf)")
    chi = character(spec, {(0, 0): padic_unit(3, 10)})
    assert pair(chi, zero(spec)).is_zero_angle


def test_pair_cyclic_and_free():
    spec = S("Z + Z(8)")
    chi = character(spec, {(0, 0): Fraction(1, 3), (1, 0): 3})
    g = element(spec, {(0, 0): 2, (1, 0): 2})
    assert pair(chi, g).frac == (Fraction(2, 3) + Fraction(6, 8)) % 1


def test_pair_precision_shortfall():
    spec = S("Z(2^inf)")
    chi = character(spec, {(0, 0): PadicInt.from_int(1, 2, 1)})
    g = element(spec, {(0, 0): Fraction(1, 8)})
    with pytest.raises(PrecisionError) as info:
        pair(chi, g)
    assert info.value.required == 3


def test_pair_inexact_fallback():
    spec = S("Z")
    chi = character(spec, {(0, 0): CircleValue.inexact(0.333333333333)})
    g = element(spec, {(0, 0): 3})
    angle = pair(chi, g)
    assert not angle.is_exact
    assert 0 < float(angle.deviation()) < 0.01


def test_bilinearity_random():
    rng = random.Random(7)
    spec = S("Z(4)^2 + Z(9)")
    chars = enumerate_characters(spec)
    elems = list(iter_elements(spec))
    for _ in range(200):
        chi, psi = rng.choice(chars), rng.choice(chars)
        g, h = rng.choice(elems), rng.choice(elems)
        lhs = pair(chi, g + h).frac
        rhs = (pair(chi, g).frac + pair(chi, h).frac) % 1
        assert lhs == rhs
        lhs2 = pair(chi + psi, g).frac
        rhs2 = (pair(chi, g).frac + pair(psi, g).frac) % 1
        assert lhs2 == rhs2


# -- character plumbing -----------------------------------------------------------

def test_character_text_roundtrip():
    spec = S("Z + Z(8) + Z(3^inf)")
    chi = character(
        spec,
        {
            (0, 0): Fraction(1, 3),
            (1, 0): 5,
            (2, 0): PadicInt(3, (1, 0, 2)),
        },
    )
    text = format_character(chi)
    assert parse_character(text, spec) == chi
    assert parse_character("trivial", spec) == trivial_character(spec)


def test_character_addition():
    spec = S("Z(4) + Z(2^inf)")
    a = character(spec, {(0, 0): 3, (1, 0): PadicInt.from_int(1, 2, 8)})
    b = character(spec, {(0, 0): 1, (1, 0): PadicInt.from_int(1, 2, 8)})
    total = a + b
    assert total.value_at((0, 0)) is None  # 3 + 1 = 0 mod 4
    assert total.value_at((1, 0)) == PadicInt.from_int(2, 2, 8)


def test_padic_digits():
    x = PadicInt.from_int(7, 3, 5)
    assert x.digits == (1, 2, 0, 0, 0)
    assert x.residue(2) == 7
    assert str(x) == "12000"
    y = PadicInt.from_int(-1, 3, 4)
    assert y.digits == (2, 2, 2, 2)


def test_finite_duality_counts():
    for text in ["Z(4)", "Z(2)^3", "Z(4) + Z(9)"]:
        spec = S(text)
        chars = enumerate_characters(spec)
        assert len(chars) == spec.size()
        assert len(set(chars)) == len(chars)
        # full character set separates points: its common kernel is trivial
        assert annihilator(chars, spec) == ()


def test_annihilator_trivial_character_gives_whole_group():
    spec = S("Z(4) + Z(2)")
    gens = annihilator([trivial_character(spec)], spec)
    assert len(subgroup_closure(gens, spec)) == spec.size()


def test_double_annihilator_identity():
    rng = random.Random(13)
    for _ in range(30):
        spec = rng.choice([S("Z(4)^2"), S("Z(2)^3 + Z(4)"), S("Z(8) + Z(2)"),
                           S("Z(9) + Z(3)"), S("Z(2)^2 + Z(3)^2")])
        elems = [g for g in iter_elements(spec) if not g.is_zero]
        gens = rng.sample(elems, k=min(2, len(elems)))
        wanted = subgroup_closure(gens, spec)
        chars = [
            chi
            for chi in enumerate_characters(spec)
            if all(pair(chi, g).is_zero_angle for g in wanted)
        ]
        recovered = subgroup_closure(annihilator(chars, spec), spec)
        assert recovered == wanted


def test_enumeration_refusal():
    big = GroupSpec(((Cyclic(2, 1), 17),))
    assert big.size() == 2 * CHARACTER_LIMIT
    with pytest.raises(RefusalError) as info:
        enumerate_characters(big)
    assert info.value.limit == CHARACTER_LIMIT


# -- scanning ----------------------------------------------------------------------

def test_convergence_scan_trivial_character():
    recipe = FreeAnchorRecipe(p=2, subgroup=S("Z(3)"))
    report = convergence_scan(recipe, trivial_character(recipe.ambient), (40, 52))
    assert report.max_deviation == 0.0


def test_convergence_scan_shrinking_prufer():
    recipe = PruferPairRecipe(p=2, subgroup=S("Z(3)"))
    chi = character(recipe.ambient, {(0, 0): PadicInt.from_int(3, 2, 40)})
    report = convergence_scan(recipe, chi, (40, 60), stride=2)
    evens = report.entries
    assert all(e.index % 2 == 0 for e in evens)
    assert evens[-1].deviation < 1e-5
    assert all(a.deviation >= b.deviation for a, b in zip(evens, evens[1:]))


def test_convergence_scan_non_dyadic_angle_stays_away():
    recipe = FreeAnchorRecipe(p=2, subgroup=S("Z(3)"))
    chi = character(recipe.ambient, {(0, 0): Fraction(1, 3)})
    report = convergence_scan(recipe, chi, (40, 52))
    evens = [e for e in report.entries if e.index % 2 == 0]
    floor = 2 * math.sin(math.pi / 3) - 1e-9
    assert all(e.deviation >= floor for e in evens)
    assert report.max_deviation >= floor


def test_tail_membership_verdicts():
    recipe = FreeAnchorRecipe(p=2, subgroup=S("Z(3)"), eps_rule="zero-at-blocks")
    amb = recipe.ambient
    assert (
        tail_membership(recipe, trivial_character(amb), 9, 40, 1e-6).verdict
        == "member-in-window"
    )
    dyadic = character(amb, {(0, 0): Fraction(1, 4)})
    assert tail_membership(recipe, dyadic, 9, 40, 1e-6).verdict == "member-in-window"
    hostile = character(amb, {(1, 0): 1})
    report = tail_membership(recipe, hostile, 9, 40, 1e-6)
    assert report.verdict == "rejected"
    assert report.witness == 9  # n = 5 pairs e_2 against the nonzero dual
    thirds = character(amb, {(0, 0): Fraction(1, 3)})
    assert tail_membership(recipe, thirds, 9, 40, 1e-6).verdict == "rejected"


def test_tail_membership_inconclusive_on_inexact():
    recipe = FreeAnchorRecipe(p=2, subgroup=S("Z(3)"))
    chi = character(recipe.ambient, {(0, 0): CircleValue.inexact(0.1234567)})
    report = tail_membership(recipe, chi, 9, 10, 10.0)
    assert report.verdict == "inconclusive"


# -- finite truncation pipeline ------------------------------------------------------

def test_truncate_element_drops_out_of_range():
    amb = S("Z(4)^w")
    trunc = S("Z(4)^3")
    g = element(amb, {(0, 1): 2, (0, 7): 1})
    assert truncate_element(g, trunc) == element(trunc, {(0, 1): 2})


def test_tail_kernel_scan_constant_sequence():
    spec = S("Z(2)^2")
    fix = ConstantRecipe(spec, element(spec, {(0, 0): 1}))
    scan = tail_kernel_scan(spec, fix, tail=1, stabilization=10)
    assert len(scan.kept) == 2  # chi with chi(e0) = 1: half of the 4
    assert scan.stable
    for chi in scan.kept:
        assert pair(chi, element(spec, {(0, 0): 1})).is_zero_angle


def test_tail_kernel_scan_zero_sequence_keeps_all():
    spec = S("Z(2)^2")
    fix = ConstantRecipe(spec, zero(spec))
    scan = tail_kernel_scan(spec, fix, tail=1, stabilization=5)
    assert len(scan.kept) == 4


def test_radical_report_ladder_match():
    recipe = CyclicLadderRecipe.constant(order=4, target=2)
    trunc = S("Z(4)^3")
    expected = ExpectedSubgroup(
        kind="generators",
        generators=tuple(
            element(trunc, {(0, j): 2}) for j in range(3)
        ),
    )
    report = radical_report(recipe, trunc, tail=30, stabilization=60,
                            expected=expected)
    assert report.verdict == "match"
    assert report.stable
    assert report.kept_count == 8  # index-2 subgroup per coordinate
    assert [str(g) for g in report.annihilator_generators] == [
        "2*e(0,0)",
        "2*e(0,1)",
        "2*e(0,2)",
    ]
    assert report.subgroup_size == 8


def test_radical_report_mismatch_has_witness():
    recipe = CyclicLadderRecipe.constant(order=4, target=2)
    trunc = S("Z(4)^3")
    wrong = ExpectedSubgroup(kind="trivial")
    report = radical_report(recipe, trunc, tail=30, stabilization=60, expected=wrong)
    assert report.verdict == "mismatch"
    assert report.mismatch_witness is not None


def test_radical_report_spec_expectation():
    recipe = CyclicLadderRecipe.constant(order=4, target=2)
    trunc = S("Z(4)^3")
    expected = ExpectedSubgroup(kind="spec", spec=S("Z(2)^3"))
    report = radical_report(recipe, trunc, tail=30, stabilization=60,
                            expected=expected)
    assert report.verdict == "match"


def test_radical_report_whole_group_negative_control():
    recipe = CyclicLadderRecipe.constant(order=4, target=1)
    trunc = S("Z(4)^3")
    report = radical_report(
        recipe, trunc, tail=30, stabilization=60,
        expected=ExpectedSubgroup(kind="whole"),
    )
    assert report.verdict == "match"
    assert report.kept_count == 1
    assert report.subgroup_size == 64


def test_windowed_radical_consistency():
    recipe = FreeAnchorRecipe(p=2, subgroup=S("Z(3)"), eps_rule="zero-at-blocks")
    amb = recipe.ambient
    probes = [
        (trivial_character(amb), True),
        (character(amb, {(0, 0): Fraction(1, 4)}), True),
        (character(amb, {(1, 0): 1}), False),
        (character(amb, {(0, 0): Fraction(1, 3)}), False),
    ]
    report = windowed_radical_report(recipe, probes, tail=9, length=40,
                                     tolerance=1e-6)
    assert report.consistent
    verdicts = [o.verdict for o in report.outcomes]
    assert verdicts == [
        "member-in-window",
        "member-in-window",
        "rejected",
        "rejected",
    ]


# -- p-adic multiple check -------------------------------------------------------------

def test_padic_multiple_examples():
    x = PadicInt.from_int(7, 3, 30)
    report = padic_multiple_check(x, (1, 30), 10)
    assert report.found and report.witness == 7
    unit = padic_unit(5, 30)
    assert padic_multiple_check(unit, (1, 30), 10).witness == 1
    neg = PadicInt.from_int(-4, 2, 30)
    assert padic_multiple_check(neg, (1, 30), 10).witness == -4


def test_padic_multiple_rejects_random_patterns():
    rng = random.Random(99)
    digits = tuple(rng.randrange(2) for _ in range(25))
    x = PadicInt(2, digits)
    # make sure the sample is not accidentally a small multiple
    if padic_multiple_check(x, (1, 25), 10**6).found:
        pytest.skip("unlucky sample")
    report = padic_multiple_check(x, (1, 25), 10**6)
    assert not report.found


def test_padic_multiple_precision_guard():
    x = PadicInt.from_int(3, 2, 10)
    with pytest.raises(PrecisionError):
        padic_multiple_check(x, (1, 11), 10)
