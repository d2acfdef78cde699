"""Exact welfarist optimization.

:func:`maximizers` returns the full set of welfare-maximizing allocations by
exhausting all ``n^m`` allocations. Utilities are rescaled to integers by a
common denominator so that the per-allocation utility vectors can be built
with numpy; welfare is then evaluated once per *distinct* utility vector, with
the same exact arithmetic as :func:`welfarist.welfare.evaluate`.

:func:`solve_one` returns a single maximizer, optionally by branch and bound.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .model import (
    DEFAULT_CAP,
    Allocation,
    Profile,
    UtilityVector,
    allocation_at,
    check_cap,
    utility_vector,
)
from .welfare import (
    Backend,
    ExtendedValue,
    MnwKey,
    Ordering,
    WelfareExpr,
    compare_values,
    evaluate,
    exact_raw,
    mnw_key,
)

CHUNK_SIZE = 1 << 16
_INT64_SAFE = 1 << 62

Score = Union[ExtendedValue, MnwKey]


@dataclass(frozen=True)
class MaximizerSet:
    """All allocations attaining the optimum, in enumeration order.

    ``tolerance_ties`` is set when the float backend merged values that are
    only equal up to the comparison tolerance.
    """

    welfare_value: Score
    allocations: tuple[Allocation, ...]
    utility_vectors: tuple[UtilityVector, ...]
    exhaustive: bool = True
    backend: Backend = Backend.EXACT
    tolerance_ties: bool = False

    def __len__(self):
        return len(self.allocations)

    def __contains__(self, alloc):
        return alloc in self.allocations

    def as_set(self) -> frozenset[Allocation]:
        return frozenset(self.allocations)


class Strategy(str, enum.Enum):
    BRUTE = "brute"
    BRANCH_BOUND = "bb"


class UnsupportedWelfareError(ValueError):
    pass


# -- scoring rules -------------------------------------------------------------


class _WelfareRule:
    def __init__(self, f: WelfareExpr):
        self.f = f
        self.backend = Backend.EXACT if f.rational_closed else Backend.FLOAT

    def score_rows(self, rows: np.ndarray, denom: int) -> list[tuple[Score, int]]:
        """``(score, position)`` for the rows of ``rows / denom`` that attain
        the best score (up to tolerance on the float backend)."""
        if denom == 1:
            vectors = [[int(v) for v in row] for row in rows]
        else:
            vectors = [[Fraction(int(v), denom) for v in row] for row in rows]
        if self.backend is Backend.EXACT:
            raw = [exact_raw(self.f, vec) for vec in vectors]
            top = max(raw)
            keep = [k for k, v in enumerate(raw) if v == top]
            best = evaluate(self.f, vectors[keep[0]])
            return [(best, k) for k in keep]
        values = [evaluate(self.f, vec, self.backend) for vec in vectors]
        best = max(values)
        return [(v, k) for k, v in enumerate(values) if self.same(v, best)]

    def same(self, a: Score, b: Score) -> bool:
        return compare_values(a, b).ordering is Ordering.EQUAL


class _MnwRule:
    backend = Backend.EXACT

    def score_rows(self, rows: np.ndarray, denom: int) -> list[tuple[Score, int]]:
        positive = rows > 0
        counts = positive.sum(axis=1)
        best_count = int(counts.max())
        top = np.nonzero(counts == best_count)[0]
        sub = rows[top]
        peak = int(sub.max()) if sub.size else 0
        if peak == 0 or peak ** rows.shape[1] < _INT64_SAFE:
            products = np.where(sub > 0, sub, 1).prod(axis=1)
            best_product = int(products.max())
            keep = top[products == best_product]
        else:
            products = [math.prod(int(v) for v in row if v > 0) for row in sub]
            best_product = max(products)
            keep = top[[p == best_product for p in products]]
        key = MnwKey(best_count, Fraction(best_product, denom**best_count))
        return [(key, int(k)) for k in keep]

    def same(self, a: Score, b: Score) -> bool:
        return a == b


# -- enumeration -----------------------------------------------------------------


def integer_matrix(profile: Profile) -> tuple[list[list[int]], int]:
    """Utilities scaled by the lcm of all denominators, and that lcm."""
    denom = 1
    for row in profile.utilities:
        for u in row:
            denom = math.lcm(denom, u.denominator)
    return [[int(u * denom) for u in row] for row in profile.utilities], denom


def _owner_digits(start: int, stop: int, n: int, m: int) -> np.ndarray:
    index = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, m), dtype=np.int64)
    for g in range(m - 1, -1, -1):
        index, digits[:, g] = np.divmod(index, n)
    return digits


def _chunk_rows(ints: list[list[int]], n: int, m: int, start: int, stop: int):
    """Distinct integer utility vectors in ``[start, stop)`` and, for each
    allocation, the position of its vector."""
    if max((sum(row) for row in ints), default=0) < _INT64_SAFE:
        mat = np.array(ints, dtype=np.int64).reshape(n, m)
        digits = _owner_digits(start, stop, n, m)
        owned = mat[digits, np.arange(m)]
        rows = np.stack([(owned * (digits == i)).sum(axis=1) for i in range(n)], axis=1)
        return np.unique(rows, axis=0, return_inverse=True)
    # Python ints when sums could overflow int64.
    seen: dict[tuple[int, ...], int] = {}
    inverse = []
    for t in range(start, stop):
        owners = allocation_at(t, n, m).owners()
        vec = [0] * n
        for g, i in enumerate(owners):
            vec[i] += ints[i][g]
        inverse.append(seen.setdefault(tuple(vec), len(seen)))
    rows = np.empty((len(seen), n), dtype=object)
    for vec, k in seen.items():
        rows[k] = vec
    return rows, np.array(inverse, dtype=np.int64)


def _scan_range(profile: Profile, rule, start: int, stop: int) -> list[tuple[Score, tuple, np.ndarray]]:
    """Best groups ``(score, integer vector, allocation indices)`` in a range."""
    ints, denom = integer_matrix(profile)
    groups = []
    for lo in range(start, stop, CHUNK_SIZE):
        hi = min(lo + CHUNK_SIZE, stop)
        rows, inverse = _chunk_rows(ints, profile.n, profile.m, lo, hi)
        inverse = np.asarray(inverse).reshape(-1)
        for score, k in rule.score_rows(rows, denom):
            members = lo + np.nonzero(inverse == k)[0]
            groups.append((score, tuple(int(v) for v in rows[k]), members))
        groups = _merge(groups, rule)
    return groups


def _merge(groups, rule):
    if not groups:
        return groups
    best = max(score for score, _, _ in groups)
    return [grp for grp in groups if rule.same(grp[0], best)]


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _exhaust(profile: Profile, rule, cap: int | None, workers: int) -> MaximizerSet:
    total = check_cap(profile.n, profile.m, cap)
    if workers > 1 and total > CHUNK_SIZE:
        ranges = _split(total, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_scan_range, *zip(*[(profile, rule, lo, hi) for lo, hi in ranges]))
            groups = [grp for part in parts for grp in part]
    else:
        groups = _scan_range(profile, rule, 0, total)
    groups = _merge(groups, rule)
    best = max(score for score, _, _ in groups)
    _, denom = integer_matrix(profile)
    members = sorted(
        (int(t), tuple(Fraction(v, denom) for v in vec)) for _, vec, idx in groups for t in idx
    )
    tolerance_ties = rule.backend is Backend.FLOAT and any(score != best for score, _, _ in groups)
    return MaximizerSet(
        welfare_value=best,
        allocations=tuple(allocation_at(t, profile.n, profile.m) for t, _ in members),
        utility_vectors=tuple(vec for _, vec in members),
        exhaustive=True,
        backend=rule.backend,
        tolerance_ties=tolerance_ties,
    )


def maximizers(profile: Profile, f: WelfareExpr, cap: int | None = DEFAULT_CAP, workers: int = 1) -> MaximizerSet:
    """Every allocation maximizing ``f`` over the utility vectors of ``profile``.

    Ties are decided exactly for rational-closed ``f``; otherwise values equal
    up to the float tolerance are all included and ``tolerance_ties`` is set
    when that merged distinct values.
    """
    return _exhaust(profile, _WelfareRule(f), cap, workers)


def mnw_maximizers(profile: Profile, cap: int | None = DEFAULT_CAP, workers: int = 1) -> MaximizerSet:
    """Maximum Nash welfare allocations with the lexicographic tie-break: first
    maximize the number of agents with positive utility, then the product of
    those utilities."""
    return _exhaust(profile, _MnwRule(), cap, workers)


# -- single answers ------------------------------------------------------------------

BRANCH_BOUND_FAMILIES = ("nash", "lognash", "util")


def _branch_and_bound(profile: Profile, family: str) -> list[int]:
    n, m = profile.n, profile.m
    U = profile.utilities
    remaining = [[sum(row[g:], Fraction(0)) for g in range(m + 1)] for row in U]
    top_remaining = [sum((max(U[i][h] for i in range(n)) for h in range(g, m)), Fraction(0)) for g in range(m + 1)]
    utilitarian = family == "util"

    current = [Fraction(0)] * n
    owners = [0] * m
    best: list = [None, None]  # objective, owners

    def objective():
        return sum(current) if utilitarian else math.prod(current)

    def bound(g):
        if utilitarian:
            return sum(current) + top_remaining[g]
        return math.prod(current[i] + remaining[i][g] for i in range(n))

    def descend(g):
        if g == m:
            value = objective()
            if best[0] is None or value > best[0]:
                best[0], best[1] = value, list(owners)
            return
        # ``<=``: an equal bound cannot improve on the incumbent
        if best[0] is not None and bound(g) <= best[0]:
            return
        for i in range(n):
            owners[g] = i
            current[i] += U[i][g]
            descend(g + 1)
            current[i] -= U[i][g]

    descend(0)
    return best[1]


def solve_one(
    profile: Profile,
    f: WelfareExpr,
    strategy: Strategy | str = Strategy.BRUTE,
    cap: int | None = DEFAULT_CAP,
) -> Allocation:
    """One maximizer of ``f``: the first in enumeration order.

    ``BRANCH_BOUND`` supports ``prod(u)``, ``sum(log(u))`` and ``sum(u)``. Both
    strategies return the same allocation.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.BRUTE:
        return maximizers(profile, f, cap).allocations[0]
    family = f.family
    if family not in BRANCH_BOUND_FAMILIES:
        raise UnsupportedWelfareError(
            f"branch and bound supports prod(u), sum(log(u)) and sum(u), not {f}"
        )
    owners = _branch_and_bound(profile, family)
    return Allocation.from_owners(owners, profile.n)


def welfare_of(profile: Profile, f: WelfareExpr, alloc: Allocation) -> ExtendedValue:
    return evaluate(f, utility_vector(profile, alloc))


def mnw_key_of(profile: Profile, alloc: Allocation) -> MnwKey:
    return mnw_key(utility_vector(profile, alloc))
