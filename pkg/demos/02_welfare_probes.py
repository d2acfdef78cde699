"""
Probing welfare functions
=========================

The exchange probe compares f at two points that share the product of
coordinates 0 and i. Functions of the product alone come out EQUAL
everywhere; anything else shows a witness quickly.
"""

from welfarist import parse_welfare
from welfarist.lab import ProbePoint, probe_exchange, scan_exchange

p = ProbePoint((1, 2), k=1, i=1)
for text in ["prod(u)", "sum(log(u))", "sum(u)", "min(u)", "sum(u^2)"]:
    outcome = probe_exchange(parse_welfare(text), p)
    print(f"{text:14s} {outcome.verdict.value:12s} {outcome.left} vs {outcome.right}")

# scanning a grid stops at the first failure
grid = ["1/2", 1, 2, 3]
for text in ["prod(u)^3", "sum(u^(1/2))"]:
    result = scan_exchange(parse_welfare(text), n=3, grid=grid, k_max=3)
    where = "" if result.passed else f" at x={[str(v) for v in result.failure.point.x]}"
    print(f"{text}: passed={result.passed} after {result.checked} probes{where}")
