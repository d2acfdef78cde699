"""
Refuting EF1 with a gadget profile
==================================

When a welfare function breaks the exchange identity at some point, a small
profile can be built on which every maximizer of that function violates EF1.
"""

from welfarist import parse_welfare
from welfarist.lab import ProbePoint, find_epsilon, refute_at

point = ProbePoint((1, 2), k=1, i=1)

for text in ["sum(u)", "min(u)"]:
    f = parse_welfare(text)
    eps = find_epsilon(f, point)
    report = refute_at(f, point)
    print(f"{text}: epsilon={eps.epsilon} swapped={eps.swapped}")
    for row in report.profile.utilities:
        print("   ", [str(v) for v in row])
    for vec, flag in zip(report.maximizer_set.utility_vectors, report.ef1_flags):
        print("    maximizer", [str(v) for v in vec], "EF1:", flag.holds)
    print("    refuted:", report.refuted)

# the full audit is available as JSON
print(refute_at(parse_welfare("sum(u)"), point).to_json())
