"""Welfarist allocation rules for indivisible goods.

Exact maximum Nash welfare and general welfarist maximizer sets, EF1 audits,
and probes that test whether a welfare function behaves like a function of the
product of utilities.
"""
from .fairness import Ef1Report, Ef1Violation, envy_amount, is_ef1
from .model import (
    Allocation,
    CapacityError,
    Profile,
    ProfileFormatError,
    bundle_utility,
    enumerate_allocations,
    parse_allocation,
    parse_profile,
    serialize_allocation,
    serialize_profile,
    utility_vector,
)
from .solver import MaximizerSet, Strategy, maximizers, mnw_maximizers, solve_one
from .welfare import (
    NEG_INFINITY,
    ComparisonResult,
    ExtendedValue,
    MnwKey,
    Ordering,
    WelfareExpr,
    compare,
    evaluate,
    mnw_key,
    parse_welfare,
)

__version__ = "0.1.0"
