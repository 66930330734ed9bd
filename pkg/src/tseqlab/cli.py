"""Command-line entry point.

Five commands: ``decide`` (admissibility of a group / subgroup pair),
``build-seq`` (dump sequence terms), ``verify-tseq`` (windowed exclusion
runs), ``radical`` (finite-truncation common-kernel pipeline) and ``pair``
(a single character/element pairing).

Structured output is a JSON envelope {command, config, result} with sorted
keys and every integer rendered as a decimal string, so identical
invocations are byte-identical and nothing is lost across tools.  Exit
codes: 0 success/verified, 1 collision or mismatch, 2 usage error,
3 resource refusal.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click
import mpmath

from .groups import (
    GroupError,
    GroupSpec,
    INF,
    format_group_spec,
    parse_element,
    parse_group_spec,
)
from .decide import (
    DecisionError,
    NotRealizableError,
    ObstructionCertificate,
    ReductionFlags,
    admits_minap,
    classify_reduction,
    exponent,
    nr_membership,
)
from .exclusion import (
    Combination,
    ExclusionQuery,
    ExclusionReport,
    QueryError,
    excludes,
)
from .characters import (
    ExpectedSubgroup,
    RadicalReport,
    RefusalError,
    pair as pair_value,
    parse_character,
    radical_report,
)
from .sequences import RecipeError, parse_recipe
from . import __version__


def _s(n) -> str:
    """Integers ride as decimal strings in structured output."""
    return str(int(n))


def emit(command: str, config: dict, result: dict, fmt: str, human_lines):
    if fmt == "structured":
        envelope = {"command": command, "config": config, "result": result}
        click.echo(json.dumps(envelope, sort_keys=True, indent=2))
    else:
        for line in human_lines:
            click.echo(line)


def parse_structured(text: str) -> dict:
    """Inverse of the structured emitter."""
    return json.loads(text)


class CliFailure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _usage(err: Exception) -> CliFailure:
    return CliFailure(str(err), 2)


def _config(**kw) -> dict:
    return {k: v for k, v in kw.items() if v is not None}


@click.group()
@click.version_option(version=__version__)
def main():
    """Exact null-sequence constructions, exclusion windows, and
    dual-group common kernels on countable Abelian groups."""


# ---------------------------------------------------------------------------
# decide
# ---------------------------------------------------------------------------

def _certificate_payload(cert: ObstructionCertificate | None):
    if cert is None:
        return None
    return {
        "prime": _s(cert.prime),
        "threshold": _s(cert.threshold),
        "multiplier": _s(cert.multiplier),
        "image": format_group_spec(cert.image),
    }


def _case_payload(case) -> dict:
    return {
        "tag": case.tag,
        "ambient": format_group_spec(case.ambient),
        "recipes": [r.describe() for r in case.recipes],
    }


@main.command("decide")
@click.argument("g_spec")
@click.option("--H", "h_spec", default=None, help="Subgroup spec to realize.")
@click.option("--free-element/--no-free-element", "free_element", default=None,
              help="Override the independent-infinite-order-element flag.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]),
              default="human")
@click.option("--seed", default=0, show_default=True)
def cmd_decide(g_spec, h_spec, free_element, fmt, seed):
    """Admissibility decision with certificate and construction recipe."""
    try:
        ambient = parse_group_spec(g_spec)
        sub = parse_group_spec(h_spec) if h_spec else None
    except GroupError as err:
        raise _usage(err)
    flags = ReductionFlags(free_element=free_element)
    kind = "nr-membership" if sub is not None else "minap"
    try:
        if exponent(ambient) == INF:
            target = sub if sub is not None else ambient
            case = classify_reduction(ambient, target, flags)
            admissible, certificate = True, None
        else:
            decision = (
                nr_membership(ambient, sub) if sub is not None
                else admits_minap(ambient)
            )
            admissible, certificate = decision.admissible, decision.certificate
            case = None
            if admissible:
                case = classify_reduction(ambient, sub if sub is not None else ambient,
                                          flags)
    except NotRealizableError as err:
        admissible, certificate, case = False, err.certificate, None
    except DecisionError as err:
        raise _usage(err)

    result = {
        "kind": kind,
        "G": format_group_spec(ambient),
        "H": format_group_spec(sub) if sub is not None else None,
        "admissible": admissible,
        "certificate": _certificate_payload(certificate),
        "case": _case_payload(case) if case is not None else None,
    }
    lines = [f"decision: {'YES' if admissible else 'NO'}"]
    if certificate:
        lines.append(
            f"obstruction: p={certificate.prime}, multiply by "
            f"{certificate.multiplier} (finite image {certificate.image})"
        )
    if case:
        lines.append(f"case: {case.tag} on {case.ambient}")
        for r in case.recipes:
            lines.append(f"  recipe: {r.describe()}")
    config = _config(command="decide", G=g_spec, H=h_spec, seed=_s(seed),
                     format=fmt)
    emit("decide", config, result, fmt, lines)


def decide_result_from_payload(payload: dict) -> dict:
    return payload  # already plain data; parse specs on demand


# ---------------------------------------------------------------------------
# build-seq
# ---------------------------------------------------------------------------

@main.command("build-seq")
@click.option("--recipe", "recipe_text", required=True)
@click.option("--from", "start", type=int, required=True)
@click.option("--to", "stop", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]),
              default="human")
@click.option("--seed", default=0, show_default=True)
def cmd_build_seq(recipe_text, start, stop, fmt, seed):
    """Dump terms (n, d_n) of a recipe for n in [FROM, TO]."""
    try:
        recipe = parse_recipe(recipe_text)
        terms = []
        for idx in range(start, stop + 1):
            terms.append((idx, str(recipe.term(idx))))
    except (GroupError, RecipeError) as err:
        raise _usage(err)
    result = {
        "recipe": recipe.describe(),
        "from": _s(start),
        "to": _s(stop),
        "terms": [[_s(i), text] for i, text in terms],
    }
    lines = [f"{i}\t{text}" for i, text in terms]
    config = _config(command="build-seq", recipe=recipe_text, seed=_s(seed),
                     format=fmt, start=_s(start), stop=_s(stop))
    emit("build-seq", config, result, fmt, lines)


def build_seq_result_from_payload(payload: dict) -> list[tuple[int, str]]:
    return [(int(i), text) for i, text in payload["terms"]]


# ---------------------------------------------------------------------------
# verify-tseq
# ---------------------------------------------------------------------------

def exclusion_report_payload(report: ExclusionReport) -> dict:
    witness = None
    if report.witness is not None:
        witness = [[_s(r), _s(c)] for r, c in report.witness.terms]
    return {
        "target": str(report.target),
        "k": _s(report.query.k),
        "m": _s(report.query.m),
        "cap": _s(report.query.cap),
        "recipe": report.query.recipe.describe(),
        "verdict": report.verdict,
        "witness": witness,
        "combinations_checked": _s(report.combinations_checked),
    }


def exclusion_report_from_payload(payload: dict) -> ExclusionReport:
    recipe = parse_recipe(payload["recipe"])
    query = ExclusionQuery(
        recipe=recipe,
        k=int(payload["k"]),
        m=int(payload["m"]),
        cap=int(payload["cap"]),
    )
    target = parse_element(payload["target"], recipe.ambient)
    witness = None
    if payload["witness"] is not None:
        witness = Combination(
            tuple((int(r), int(c)) for r, c in payload["witness"])
        )
    return ExclusionReport(
        target=target,
        query=query,
        verdict=payload["verdict"],
        witness=witness,
        combinations_checked=int(payload["combinations_checked"]),
        elapsed=0.0,
    )


@main.command("verify-tseq")
@click.option("--recipe", "recipe_text", required=True)
@click.option("--target", "targets", multiple=True, required=True,
              help="Element text; repeatable.")
@click.option("--k", type=int, default=0, show_default=True)
@click.option("--m", "m_start", type=int, default=None,
              help="Window start; defaults to the recipe's guaranteed bound.")
@click.option("--cap", type=int, default=None,
              help="Window cap; defaults to start + 12.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]),
              default="human")
@click.option("--seed", default=0, show_default=True)
def cmd_verify_tseq(recipe_text, targets, k, m_start, cap, fmt, seed):
    """Exclusion runs for each target; exit 1 on any collision."""
    try:
        recipe = parse_recipe(recipe_text)
        reports = []
        for text in targets:
            target = parse_element(text, recipe.ambient)
            m = m_start if m_start is not None else recipe.min_index_bound(target, k)
            query = ExclusionQuery(
                recipe=recipe, k=k, m=m, cap=cap if cap is not None else m + 12
            )
            reports.append(excludes(target, query))
    except (GroupError, QueryError, RecipeError) as err:
        raise _usage(err)
    result = {"reports": [exclusion_report_payload(r) for r in reports]}
    lines = []
    for r in reports:
        lines.append(
            f"{r.target}  [{r.query.m}, {r.query.cap}] k={r.query.k}  "
            f"{r.verdict}  ({r.combinations_checked} combinations, "
            f"{r.elapsed:.3f}s)"
        )
        if r.witness is not None:
            lines.append(f"  witness: {r.witness.terms}")
    config = _config(command="verify-tseq", recipe=recipe_text, k=_s(k),
                     m=_s(m_start) if m_start is not None else None,
                     cap=_s(cap) if cap is not None else None,
                     seed=_s(seed), format=fmt, targets=list(targets))
    emit("verify-tseq", config, result, fmt, lines)
    if any(not r.excluded for r in reports):
        sys.exit(1)


# ---------------------------------------------------------------------------
# radical
# ---------------------------------------------------------------------------

def parse_expected(text: str, trunc: GroupSpec) -> ExpectedSubgroup:
    text = text.strip()
    if text == "whole":
        return ExpectedSubgroup(kind="whole")
    if text == "trivial":
        return ExpectedSubgroup(kind="trivial")
    if text.startswith("spec:"):
        return ExpectedSubgroup(kind="spec", spec=parse_group_spec(text[5:]))
    if text.startswith("gens:"):
        gens = tuple(
            parse_element(chunk.strip(), trunc)
            for chunk in text[5:].split(";")
            if chunk.strip()
        )
        return ExpectedSubgroup(kind="generators", generators=gens)
    raise GroupError(
        "expected one of: whole | trivial | spec:<group-spec> | "
        "gens:<element>;<element>;..."
    )


def radical_report_payload(report: RadicalReport) -> dict:
    return {
        "recipe": report.recipe_text,
        "trunc": format_group_spec(report.trunc),
        "tail": _s(report.tail),
        "stabilization": _s(report.stabilization),
        "stable": report.stable,
        "distinct_terms": _s(report.distinct_terms),
        "kept_count": _s(report.kept_count),
        "kept_listed": _s(report.kept_listed),
        "kept": [str(chi) for chi in report.kept],
        "annihilator_generators": [str(g) for g in report.annihilator_generators],
        "subgroup_size": _s(report.subgroup_size),
        "expected": report.expected,
        "verdict": report.verdict,
        "mismatch_witness": (
            str(report.mismatch_witness)
            if report.mismatch_witness is not None
            else None
        ),
    }


def radical_report_from_payload(payload: dict) -> RadicalReport:
    trunc = parse_group_spec(payload["trunc"])
    kept = tuple(parse_character(t, trunc) for t in payload["kept"])
    witness = payload["mismatch_witness"]
    return RadicalReport(
        recipe_text=payload["recipe"],
        trunc=trunc,
        tail=int(payload["tail"]),
        stabilization=int(payload["stabilization"]),
        stable=payload["stable"],
        distinct_terms=int(payload["distinct_terms"]),
        kept_count=int(payload["kept_count"]),
        kept=kept,
        kept_listed=int(payload["kept_listed"]),
        annihilator_generators=tuple(
            parse_element(t, trunc) for t in payload["annihilator_generators"]
        ),
        subgroup_size=int(payload["subgroup_size"]),
        expected=payload["expected"],
        verdict=payload["verdict"],
        mismatch_witness=(
            parse_element(witness, trunc) if witness is not None else None
        ),
    )


@main.command("radical")
@click.option("--recipe", "recipe_text", required=True)
@click.option("--trunc", "trunc_text", required=True,
              help="Finite truncation of the recipe's ambient group.")
@click.option("--tail", type=int, required=True)
@click.option("--window", "stabilization", type=int, required=True,
              help="Stabilization window; the scan re-checks at twice this.")
@click.option("--expected", "expected_text", required=True)
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]),
              default="human")
@click.option("--seed", default=0, show_default=True)
def cmd_radical(recipe_text, trunc_text, tail, stabilization, expected_text,
                fmt, seed):
    """Common kernel of the surviving characters on a finite truncation."""
    try:
        recipe = parse_recipe(recipe_text)
        trunc = parse_group_spec(trunc_text)
        expected = parse_expected(expected_text, trunc)
    except (GroupError, RecipeError) as err:
        raise _usage(err)
    try:
        report = radical_report(recipe, trunc, tail, stabilization, expected)
    except RefusalError as err:
        click.echo(f"refused: {err}", err=True)
        sys.exit(3)
    except (GroupError, RecipeError) as err:
        raise _usage(err)
    result = radical_report_payload(report)
    lines = [
        f"truncation {report.trunc}, tail {report.tail}, "
        f"window {report.stabilization} (stable: {report.stable})",
        f"kept characters: {report.kept_count}",
        "annihilator generators: "
        + (", ".join(str(g) for g in report.annihilator_generators) or "(none)"),
        f"subgroup size: {report.subgroup_size}",
        f"expected: {report.expected}",
        f"verdict: {report.verdict}",
    ]
    if report.mismatch_witness is not None:
        lines.append(f"witness: {report.mismatch_witness}")
    config = _config(command="radical", recipe=recipe_text, trunc=trunc_text,
                     tail=_s(tail), window=_s(stabilization),
                     expected=expected_text, seed=_s(seed), format=fmt)
    emit("radical", config, result, fmt, lines)
    if report.verdict != "match":
        sys.exit(1)


# ---------------------------------------------------------------------------
# pair
# ---------------------------------------------------------------------------

@main.command("pair")
@click.option("--spec", "spec_text", required=True)
@click.option("--char", "char_text", required=True)
@click.option("--elem", "elem_text", required=True)
@click.option("--precision", type=int, default=30, show_default=True,
              help="Decimal digits for inexact angles.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]),
              default="human")
@click.option("--seed", default=0, show_default=True)
def cmd_pair(spec_text, char_text, elem_text, precision, fmt, seed):
    """Exact pairing angle of a character with an element."""
    try:
        spec = parse_group_spec(spec_text)
        chi = parse_character(char_text, spec)
        g = parse_element(elem_text, spec)
        with mpmath.workdps(precision):
            angle = pair_value(chi, g)
            if angle.is_exact:
                text = str(angle.frac)
            else:
                text = mpmath.nstr(angle.approx, precision)
    except GroupError as err:
        raise _usage(err)
    result = {
        "spec": format_group_spec(spec),
        "character": str(chi),
        "element": str(g),
        "angle": text,
        "exact": angle.is_exact,
    }
    config = _config(command="pair", spec=spec_text, char=char_text,
                     elem=elem_text, precision=_s(precision), seed=_s(seed),
                     format=fmt)
    emit("pair", config, result, fmt, [f"angle: {text}"])


def pair_result_from_payload(payload: dict):
    if payload["exact"]:
        return Fraction(payload["angle"])
    return payload["angle"]


if __name__ == "__main__":
    main()
