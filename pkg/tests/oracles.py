"""Independent reference implementations used to check the library.

Nothing here goes through the library's enumeration, evaluator or EF1 code.
"""
import itertools
from fractions import Fraction


def all_owner_tuples(n, m):
    return list(itertools.product(range(n), repeat=m))


def bundles_of(owners, n):
    return tuple(frozenset(g for g, o in enumerate(owners) if o == i) for i in range(n))


def utilities_of(matrix, owners, n):
    vec = [Fraction(0)] * n
    for g, i in enumerate(owners):
        vec[i] += Fraction(matrix[i][g])
    return tuple(vec)


def brute_maximizers(matrix, score):
    """All bundle tuples maximizing ``score(utility vector)``, plus the optimum."""
    n, m = len(matrix), len(matrix[0]) if matrix else 0
    scored = [(score(utilities_of(matrix, o, n)), o) for o in all_owner_tuples(n, m)]
    best = max(s for s, _ in scored)
    return best, {bundles_of(o, n) for s, o in scored if s == best}


def mnw_score(vec):
    positive = [v for v in vec if v > 0]
    prod = Fraction(1)
    for v in positive:
        prod *= v
    return (len(positive), prod)


def ef1_direct(matrix, bundles):
    """Literal quantifier expansion of EF1 over ordered pairs."""
    n = len(bundles)

    def value(i, goods):
        return sum((Fraction(matrix[i][g]) for g in goods), Fraction(0))

    for i in range(n):
        for j in range(n):
            if i == j or not bundles[j]:
                continue
            if not any(value(i, bundles[i]) >= value(i, bundles[j] - {g}) for g in bundles[j]):
                return False
    return True
