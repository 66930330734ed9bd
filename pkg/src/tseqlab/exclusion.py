"""Windowed brute-force verification of the exclusion criterion.

A sequence is a valid null sequence for some Hausdorff group topology when
every nonzero target g avoids the set of short signed combinations

    n_1 * d_{r_1} + ... + n_s * d_{r_s},   m <= r_1 < ... < r_s,
    n_i nonzero integers, |n_1| + ... + |n_s| <= k + 1,

together with 0.  That set is infinite; this module enumerates the finite
window m <= r_i <= cap exhaustively and reports a verdict that is definitive
within the window only.  Elements are compared structurally, so a verdict is
exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Iterator, Optional

from .groups import Element, GroupError
from .sequences import marker_int


class QueryError(GroupError):
    """Invalid window parameters or target."""


@dataclass(frozen=True)
class ExclusionQuery:
    """Window [m, cap] with weight budget k+1 over one recipe's sequence."""

    recipe: object
    k: int
    m: int
    cap: int

    def __post_init__(self):
        if self.k < 0:
            raise QueryError("k must be >= 0")
        if self.m > self.cap:
            raise QueryError("window start exceeds its cap")
        if self.m < self.recipe.min_index:
            raise QueryError(
                f"window start {self.m} below the recipe's first index "
                f"{self.recipe.min_index}"
            )


@dataclass(frozen=True)
class Combination:
    """Strictly increasing indices with nonzero coefficients; () encodes 0."""

    terms: tuple[tuple[int, int], ...]

    def weight(self) -> int:
        return sum(abs(c) for _, c in self.terms)


@dataclass(frozen=True)
class ExclusionReport:
    target: Element
    query: ExclusionQuery
    verdict: str  # "excluded-in-window" | "collision-found"
    witness: Optional[Combination]
    combinations_checked: int
    elapsed: float

    @property
    def excluded(self) -> bool:
        return self.verdict == "excluded-in-window"


def _coefficient_vectors(size: int, budget: int) -> Iterator[tuple[int, ...]]:
    """All nonzero-coefficient tuples with total |.| <= budget, ordered
    lexicographically with the natural integer order."""
    domain = [c for c in range(-budget, budget + 1) if c != 0]
    for vec in product(domain, repeat=size):
        if sum(abs(c) for c in vec) <= budget:
            yield vec


def _index_subsets(lo: int, hi: int, max_size: int) -> Iterator[tuple[int, ...]]:
    """Nonempty subsets of [lo, hi] in lexicographic order as tuples."""

    def walk(start: int, prefix: tuple[int, ...]):
        for r in range(start, hi + 1):
            chosen = prefix + (r,)
            yield chosen
            if len(chosen) < max_size:
                yield from walk(r + 1, chosen)

    yield from walk(lo, ())


def enumerate_combinations(query: ExclusionQuery) -> Iterator[Combination]:
    """Every nonempty combination of the window, each exactly once,
    ordered lexicographically by index set and then by coefficients."""
    budget = query.k + 1
    for indices in _index_subsets(query.m, query.cap, budget):
        for vec in _coefficient_vectors(len(indices), budget):
            yield Combination(tuple(zip(indices, vec)))


def combination_count(query: ExclusionQuery) -> int:
    """Closed-form count of the nonempty combinations of the window."""
    budget = query.k + 1
    span = query.cap - query.m + 1
    total = 0
    for s in range(1, min(budget, span) + 1):
        weights = sum(comb(w - 1, s - 1) for w in range(s, budget + 1))
        total += comb(span, s) * weights * 2**s
    return total


def evaluate(combination: Combination, recipe) -> Element:
    """Instantiate the formal sum via exact element arithmetic."""
    terms = [recipe.term(r).times(c) for r, c in combination.terms]
    if not terms:
        from .groups import zero

        return zero(recipe.ambient)
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def excludes(target: Element, query: ExclusionQuery) -> ExclusionReport:
    """Scan the whole window; the verdict is definitive within it.

    The mandated element 0 always belongs to the combination set, which is
    why only nonzero targets are meaningful.
    """
    if target.is_zero:
        raise QueryError("the exclusion criterion concerns nonzero targets")
    if target.spec != query.recipe.ambient:
        raise QueryError("target lives outside the recipe's ambient group")
    started = time.perf_counter()
    cache = {idx: query.recipe.term(idx) for idx in range(query.m, query.cap + 1)}
    checked = 0
    witness = None
    budget = query.k + 1
    for indices in _index_subsets(query.m, query.cap, budget):
        for vec in _coefficient_vectors(len(indices), budget):
            checked += 1
            total = cache[indices[0]].times(vec[0])
            for r, c in zip(indices[1:], vec[1:]):
                total = total + cache[r].times(c)
            if total == target:
                witness = Combination(tuple(zip(indices, vec)))
                break
        if witness is not None:
            break
    elapsed = time.perf_counter() - started
    if witness is None:
        return ExclusionReport(
            target, query, "excluded-in-window", None, checked, elapsed
        )
    return ExclusionReport(target, query, "collision-found", witness, checked, elapsed)


def default_window(recipe, target: Element, k: int, span: int = 12) -> ExclusionQuery:
    """Window starting at the recipe's guaranteed-clean index, spanning
    ``span`` further indices (marker magnitudes near the start already
    dominate any fixed target, so short windows are meaningful)."""
    m = recipe.min_index_bound(target, k)
    return ExclusionQuery(recipe=recipe, k=k, m=m, cap=m + span)


def bound_chain_check(
    p: int, k: int, indices: tuple[int, ...], coefficients: tuple[int, ...]
) -> bool:
    """Exact verification of the marker-sum bound chain

        |sum l_i * marker_int(p, r_i)| <= (k+1) * marker_int(p, r_v)
                                       <= (k+1) * p^(r_v^3 + 1),

    with the outer comparison strict.  The middle link degenerates to
    equality only for a single index at full budget.
    """
    if len(indices) != len(coefficients) or not indices:
        raise QueryError("need matching nonempty index/coefficient lists")
    if list(indices) != sorted(set(indices)) or indices[0] < 1:
        raise QueryError("indices must be strictly increasing and positive")
    if sum(abs(c) for c in coefficients) > k + 1:
        raise QueryError("coefficient weight exceeds the budget")
    if any(c == 0 for c in coefficients):
        raise QueryError("coefficients must be nonzero")
    top = indices[-1]
    total = abs(sum(c * marker_int(p, r) for r, c in zip(indices, coefficients)))
    mid = (k + 1) * marker_int(p, top)
    outer = (k + 1) * p ** (top**3 + 1)
    return total <= mid <= outer and total < outer
