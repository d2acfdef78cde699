"""
Maximum Nash welfare and EF1
============================

Draw a few small random profiles, compute every MNW allocation exactly and
audit each one for envy-freeness up to one good.
"""

import random

from welfarist import Profile, is_ef1, mnw_maximizers, utility_vector
from welfarist.model import random_profile

rng = random.Random(0)

for trial in range(5):
    profile = random_profile(rng, n=3, m=5)
    found = mnw_maximizers(profile)
    print(f"profile {trial}: {len(found)} MNW allocation(s)")
    for alloc in found.allocations:
        vec = utility_vector(profile, alloc)
        owners = alloc.owners()
        print("  owners", owners, "utilities", [str(v) for v in vec], "EF1:", is_ef1(profile, alloc).holds)

# A degenerate profile: agent 2 values nothing, so no allocation is all-positive.
# The tie-break maximizes the number of positive agents first.
flat = Profile.from_matrix([[3, 1, 0], [0, 2, 2], [0, 0, 0]])
best = mnw_maximizers(flat)
print("degenerate profile key:", best.welfare_value)
