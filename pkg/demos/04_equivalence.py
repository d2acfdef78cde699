"""
Which rules coincide with MNW
=============================

Compare the maximizer set of several welfare functions with the MNW set on
random profiles. Monotone transforms of the product agree; sums do not.
"""

from welfarist import parse_welfare
from welfarist.lab import equivalence_with_mnw, zero_domination_check

for text in ["prod(u)", "prod(u)^3", "sum(log(u))", "sum(u)", "min(u)"]:
    result = equivalence_with_mnw(parse_welfare(text), trials=40, seed=1, n=3, m=5)
    print(f"{text:12s} agrees with MNW: {result.passed}")

# product rules rank any all-positive vector above one with a zero
for text in ["prod(u)", "sum(log(u))", "sum(u)"]:
    passed, witness = zero_domination_check(parse_welfare(text), n=3, trials=500, seed=2)
    print(f"{text:12s} zero-dominating: {passed}")
