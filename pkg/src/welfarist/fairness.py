"""Envy and EF1 (envy-freeness up to one good) with auditable witnesses."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Allocation, Profile, bundle_utility


@dataclass(frozen=True)
class Ef1Violation:
    """Agent ``envious`` still envies ``envied`` after removing any single good.

    ``best_good`` is the good whose removal helps most (the one ``envious``
    values highest) and ``residual_envy`` the envy left after removing it.
    """

    envious: int
    envied: int
    best_good: int
    residual_envy: Fraction


@dataclass(frozen=True)
class Ef1Report:
    violations: tuple[Ef1Violation, ...]

    @property
    def holds(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.holds


def envy_amount(profile: Profile, alloc: Allocation, i: int, j: int) -> Fraction:
    """``u_i(A_j) - u_i(A_i)``; positive means ``i`` envies ``j``."""
    return bundle_utility(profile, i, alloc.bundles[j]) - bundle_utility(profile, i, alloc.bundles[i])


def is_ef1(profile: Profile, alloc: Allocation) -> Ef1Report:
    alloc.validate(profile.n, profile.m)
    violations = []
    for i in range(profile.n):
        row = profile.utilities[i]
        own = bundle_utility(profile, i, alloc.bundles[i])
        for j, bundle in enumerate(alloc.bundles):
            if i == j or not bundle:
                continue
            # removing the good i values most leaves the least for i to envy
            best = max(sorted(bundle), key=lambda g: row[g])
            residual = bundle_utility(profile, i, bundle) - row[best] - own
            if residual > 0:
                violations.append(Ef1Violation(i, j, best, residual))
    return Ef1Report(tuple(violations))


def is_envy_free(profile: Profile, alloc: Allocation) -> bool:
    return all(
        envy_amount(profile, alloc, i, j) <= 0
        for i in range(profile.n)
        for j in range(profile.n)
    )
