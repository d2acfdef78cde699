"""Numeric probes and counterexample profiles for welfare functions.

These tools check, on concrete inputs, whether ``f`` depends on utilities only
through their product and ranks all-positive vectors above vectors with a
zero:

* :func:`probe_exchange` / :func:`scan_exchange` check the exchange identity
  ``f(.., (k+1)x_1, .., k x_i, ..) == f(.., k x_1, .., (k+1) x_i, ..)``.
* :func:`probe_constant_curve` checks that ``f`` is constant when the product
  of coordinates ``0`` and ``i`` is held fixed.
* :func:`product_dependence_check` looks for equal-product pairs with
  different welfare.
* :func:`find_epsilon`, :func:`build_gadget` and :func:`refute_ef1_existence`
  turn a failed exchange probe into a profile with ``k*n + 1`` goods on which
  no welfare maximizer is EF1.

Agent and coordinate indices are 0-based; the exchange partner ``i`` is any
index other than 0. A PASS from the scans is evidence on a finite grid, not a
proof.
"""
from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .fairness import Ef1Report, is_ef1
from .model import (
    DEFAULT_CAP,
    Allocation,
    Profile,
    check_cap,
    enumerate_allocations,
    profile_to_dict,
    random_profile,
    to_rational,
)
from .solver import MaximizerSet, maximizers, mnw_maximizers
from .welfare import (
    ComparisonResult,
    ExtendedValue,
    Ordering,
    WelfareExpr,
    compare,
)

EPSILON_HALVINGS = 64


class Verdict(enum.Enum):
    EQUAL = "EQUAL"
    LEFT_LESS = "LEFT_LESS"
    LEFT_GREATER = "LEFT_GREATER"


_VERDICT = {
    Ordering.EQUAL: Verdict.EQUAL,
    Ordering.LESS: Verdict.LEFT_LESS,
    Ordering.GREATER: Verdict.LEFT_GREATER,
}


class EpsilonNotFound(RuntimeError):
    """No epsilon in the halving sequence satisfied the strict inequality."""


@dataclass(frozen=True)
class ProbePoint:
    x: tuple[Fraction, ...]
    k: int
    i: int

    def __post_init__(self):
        x = tuple(to_rational(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if len(x) < 2:
            raise ValueError("probe points need at least 2 coordinates")
        if any(v <= 0 for v in x):
            raise ValueError("probe coordinates must be positive")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError("k must be a positive integer")
        if not 1 <= self.i < len(x):
            raise ValueError(f"i must be in 1..{len(x) - 1} (0-based, not the first agent)")

    @property
    def n(self) -> int:
        return len(self.x)

    def sides(self, shift: Fraction = Fraction(0)):
        """The two vectors of the exchange identity, ``shift`` subtracted from
        the first coordinate on both sides."""
        k, i = self.k, self.i
        left, right = list(self.x), list(self.x)
        left[0], left[i] = (k + 1) * self.x[0] - shift, k * self.x[i]
        right[0], right[i] = k * self.x[0] - shift, (k + 1) * self.x[i]
        return tuple(left), tuple(right)

    def swapped(self) -> ProbePoint:
        x = list(self.x)
        x[0], x[self.i] = x[self.i], x[0]
        return ProbePoint(tuple(x), self.k, self.i)


@dataclass(frozen=True)
class ProbeOutcome:
    verdict: Verdict
    left: ExtendedValue
    right: ExtendedValue
    point: ProbePoint
    comparison: ComparisonResult

    @property
    def equal(self) -> bool:
        return self.verdict is Verdict.EQUAL


def probe_exchange(f: WelfareExpr, p: ProbePoint) -> ProbeOutcome:
    left, right = p.sides()
    result = compare(f, left, right)
    return ProbeOutcome(_VERDICT[result.ordering], result.left, result.right, p, result)


@dataclass(frozen=True)
class ScanResult:
    passed: bool
    checked: int
    failure: ProbeOutcome | None = None


def scan_exchange(f: WelfareExpr, n: int, grid: Iterable, k_max: int) -> ScanResult:
    """Probe every point with coordinates from ``grid``, ``k <= k_max`` and
    every partner ``i``; stop at the first non-EQUAL outcome."""
    values = sorted({to_rational(v) for v in grid})
    if not values or values[0] <= 0:
        raise ValueError("grid must be nonempty and positive")
    checked = 0
    for x in itertools.product(values, repeat=n):
        for k in range(1, k_max + 1):
            for i in range(1, n):
                outcome = probe_exchange(f, ProbePoint(x, k, i))
                checked += 1
                if not outcome.equal:
                    return ScanResult(False, checked, outcome)
    return ScanResult(True, checked)


def probe_constant_curve(
    f: WelfareExpr, i: int, fixed: Sequence, z, x, y
) -> ComparisonResult:
    """Compare ``f`` at (coordinate 0 = x, coordinate i = z/x) with
    (coordinate 0 = y, coordinate i = z/y); ``fixed`` fills the other
    coordinates in order."""
    fixed = [to_rational(v) for v in fixed]
    z, x, y = to_rational(z), to_rational(x), to_rational(y)
    if min([z, x, y, *fixed], default=1) <= 0:
        raise ValueError("all inputs must be positive")
    n = len(fixed) + 2
    if not 1 <= i < n:
        raise ValueError(f"i must be in 1..{n - 1}")

    def point(first):
        rest = iter(fixed)
        vec = [next(rest) if c not in (0, i) else None for c in range(n)]
        vec[0], vec[i] = first, z / first
        return vec

    return compare(f, point(x), point(y))


@dataclass(frozen=True)
class DependenceResult:
    passed: bool
    trials: int
    x: tuple[Fraction, ...] | None = None
    y: tuple[Fraction, ...] | None = None
    comparison: ComparisonResult | None = None


def _random_positive(rng: random.Random, hi: int = 12) -> Fraction:
    return Fraction(rng.randint(1, hi), rng.randint(1, hi))


def product_dependence_check(f: WelfareExpr, n: int, trials: int, seed: int) -> DependenceResult:
    """Look for ``x, y`` with equal products but different welfare.

    ``y`` is ``x`` with one coordinate multiplied by a random rational ``r``
    and another divided by ``r``, so the products agree exactly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    for _ in range(trials):
        x = [_random_positive(rng) for _ in range(n)]
        a, b = rng.sample(range(n), 2)
        r = _random_positive(rng)
        y = list(x)
        y[a] *= r
        y[b] /= r
        result = compare(f, x, y)
        if result.ordering is not Ordering.EQUAL:
            return DependenceResult(False, trials, tuple(x), tuple(y), result)
    return DependenceResult(True, trials)


@dataclass(frozen=True)
class GadgetSpec:
    """Parameters of the counterexample profile.

    ``x`` is the probe point *after* any direction swap; ``i`` is the agent
    that shares the ``x_j`` valuation with agent 0. ``diagnostic`` permits
    ``epsilon == 0`` to show what happens without the perturbation.
    """

    x: tuple[Fraction, ...]
    k: int
    i: int
    epsilon: Fraction
    swapped: bool = False
    diagnostic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(to_rational(v) for v in self.x))
        object.__setattr__(self, "epsilon", to_rational(self.epsilon))
        ProbePoint(self.x, self.k, self.i)
        low_ok = self.epsilon >= 0 if self.diagnostic else self.epsilon > 0
        if not (low_ok and self.epsilon < self.x[0]):
            raise ValueError(f"epsilon must lie in (0, x_1) = (0, {self.x[0]}), got {self.epsilon}")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return self.k * self.n + 1

    @property
    def point(self) -> ProbePoint:
        return ProbePoint(self.x, self.k, self.i)


@dataclass(frozen=True)
class EpsilonResult:
    epsilon: Fraction
    swapped: bool
    point: ProbePoint  # normalized, after any swap

    def spec(self) -> GadgetSpec:
        p = self.point
        return GadgetSpec(p.x, p.k, p.i, self.epsilon, self.swapped)


def find_epsilon(f: WelfareExpr, p: ProbePoint) -> EpsilonResult:
    """Smallest-effort ``epsilon`` in ``x_1/2, x_1/4, ...`` with
    ``f((k+1)x_1 - eps, k x_i) < f(k x_1 - eps, (k+1) x_i)`` (other
    coordinates unchanged).

    When the probe is LEFT_GREATER the values of coordinates 0 and ``i`` are
    exchanged first and ``swapped`` is set.
    """
    outcome = probe_exchange(f, p)
    if outcome.equal:
        raise ValueError("exchange probe is EQUAL at this point; nothing to refute")
    swapped = outcome.verdict is Verdict.LEFT_GREATER
    if swapped:
        p = p.swapped()
    eps = p.x[0]
    for _ in range(EPSILON_HALVINGS):
        eps /= 2
        left, right = p.sides(eps)
        if compare(f, left, right).ordering is Ordering.LESS:
            return EpsilonResult(eps, swapped, p)
    raise EpsilonNotFound(
        f"no epsilon down to x_1/2^{EPSILON_HALVINGS} satisfies the strict inequality at {p}; "
        "f may be discontinuous here or the gap is below the float tolerance"
    )


def build_gadget(spec: GadgetSpec, n: int | None = None) -> Profile:
    """Profile with goods ``g1..g_{kn}`` (the block) plus one extra good.

    Block goods are worth ``x_j`` to agents 0 and ``i`` and ``x_j / k`` to
    everyone else. The extra good is worth ``x_1 - epsilon`` to agent 0 and
    nothing to the rest.
    """
    if n is not None and n != spec.n:
        raise ValueError(f"n = {n} does not match the {spec.n} coordinates of x")
    n, k, x = spec.n, spec.k, spec.x
    rows = []
    for j in range(n):
        block = x[j] if j in (0, spec.i) else x[j] / k
        extra = x[0] - spec.epsilon if j == 0 else Fraction(0)
        rows.append([block] * (k * n) + [extra])
    return Profile.from_matrix(rows)


@dataclass(frozen=True)
class GadgetReport:
    spec: GadgetSpec
    profile: Profile
    maximizer_set: MaximizerSet
    ef1_flags: tuple[Ef1Report, ...]
    probe: ProbeOutcome | None = None

    @property
    def refuted(self) -> bool:
        """True iff some allocation maximizes welfare and none of them is EF1."""
        return bool(self.ef1_flags) and not any(r.holds for r in self.ef1_flags)

    def to_dict(self) -> dict:
        spec = self.spec
        doc = {
            "spec": {
                "x": [str(v) for v in spec.x],
                "k": spec.k,
                "i": spec.i + 1,
                "epsilon": str(spec.epsilon),
                "swapped": spec.swapped,
                "m": spec.m,
            },
            "profile": profile_to_dict(self.profile),
            "welfare_value": str(self.maximizer_set.welfare_value),
            "backend": self.maximizer_set.backend.value,
            "maximizers": [
                _audit_dict(self.profile, alloc, vec, report)
                for alloc, vec, report in zip(
                    self.maximizer_set.allocations, self.maximizer_set.utility_vectors, self.ef1_flags
                )
            ],
            "refuted": self.refuted,
        }
        if self.probe is not None:
            doc["probe"] = outcome_to_dict(self.probe)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _audit_dict(profile: Profile, alloc: Allocation, vec, report: Ef1Report) -> dict:
    names = profile.good_names
    agents = profile.agent_names
    return {
        "bundles": [[names[g] for g in sorted(b)] for b in alloc.bundles],
        "utilities": [str(v) for v in vec],
        "ef1": report.holds,
        "violations": [
            {
                "envious": agents[v.envious],
                "envied": agents[v.envied],
                "best_removable_good": names[v.best_good],
                "residual_envy": str(v.residual_envy),
            }
            for v in report.violations
        ],
    }


def outcome_to_dict(outcome: ProbeOutcome) -> dict:
    p = outcome.point
    doc = {
        "x": [str(v) for v in p.x],
        "k": p.k,
        "i": p.i + 1,
        "verdict": outcome.verdict.value,
        "left": str(outcome.left),
        "right": str(outcome.right),
        "backend": outcome.comparison.backend.value,
    }
    if outcome.comparison.tolerance is not None:
        doc["tolerance"] = str(outcome.comparison.tolerance)
    return doc


def refute_ef1_existence(
    f: WelfareExpr,
    spec: GadgetSpec,
    n: int | None = None,
    cap: int | None = DEFAULT_CAP,
    probe: ProbeOutcome | None = None,
) -> GadgetReport:
    """Build the gadget for ``spec`` and audit every welfare maximizer for EF1."""
    profile = build_gadget(spec, n)
    found = maximizers(profile, f, cap)
    flags = tuple(is_ef1(profile, alloc) for alloc in found.allocations)
    return GadgetReport(spec, profile, found, flags, probe)


def refute_at(f: WelfareExpr, p: ProbePoint, cap: int | None = DEFAULT_CAP) -> GadgetReport:
    """Probe, search epsilon, build and audit in one go."""
    outcome = probe_exchange(f, p)
    eps = find_epsilon(f, p)
    return refute_ef1_existence(f, eps.spec(), cap=cap, probe=outcome)


@dataclass(frozen=True)
class PigeonholeResult:
    passed: bool
    checked: int
    ef1_count: int
    witness: Allocation | None = None


def check_gadget_pigeonhole(spec: GadgetSpec, n: int | None = None, cap: int | None = DEFAULT_CAP) -> PigeonholeResult:
    """Every EF1 allocation of the gadget gives each agent exactly ``k`` block goods."""
    profile = build_gadget(spec, n)
    check_cap(profile.n, profile.m, cap)
    block = spec.k * spec.n
    checked = ef1_count = 0
    for alloc in enumerate_allocations(profile.n, profile.m, cap):
        checked += 1
        if not is_ef1(profile, alloc).holds:
            continue
        ef1_count += 1
        if any(sum(1 for g in b if g < block) != spec.k for b in alloc.bundles):
            return PigeonholeResult(False, checked, ef1_count, alloc)
    return PigeonholeResult(True, checked, ef1_count)


@dataclass(frozen=True)
class EquivalenceResult:
    passed: bool
    trials: int
    witness: Profile | None = None
    welfare_set: MaximizerSet | None = None
    mnw_set: MaximizerSet | None = None


def equivalence_with_mnw(
    f: WelfareExpr, trials: int, seed: int, n: int, m: int, cap: int | None = DEFAULT_CAP
) -> EquivalenceResult:
    """Compare the maximizer set of ``f`` with the MNW set on random integer
    profiles (utilities in [0, 10]) that admit an all-positive allocation."""
    rng = random.Random(seed)
    for _ in range(trials):
        profile = random_profile(rng, n, m)
        mine = maximizers(profile, f, cap)
        mnw = mnw_maximizers(profile, cap)
        if mine.as_set() != mnw.as_set():
            return EquivalenceResult(False, trials, profile, mine, mnw)
    return EquivalenceResult(True, trials)


def zero_domination_check(
    f: WelfareExpr, n: int, trials: int, seed: int
) -> tuple[bool, tuple | None]:
    """``f(x) > f(y)`` for random strictly positive ``x`` and random ``y``
    with at least one zero coordinate. Returns ``(passed, witness)``."""
    rng = random.Random(seed)
    for _ in range(trials):
        x = [_random_positive(rng) for _ in range(n)]
        y = [Fraction(rng.randint(0, 12), rng.randint(1, 12)) for _ in range(n)]
        for c in rng.sample(range(n), rng.randint(1, n)):
            y[c] = Fraction(0)
        result = compare(f, x, y)
        if result.ordering is not Ordering.GREATER:
            return False, (tuple(x), tuple(y), result)
    return True, None


def gm_placement(report: GadgetReport) -> bool:
    """Whether the extra good sits in agent 0's bundle in every maximizer."""
    extra = report.profile.m - 1
    return all(extra in alloc.bundles[0] for alloc in report.maximizer_set.allocations)


def with_epsilon(spec: GadgetSpec, epsilon, diagnostic: bool = False) -> GadgetSpec:
    return replace(spec, epsilon=to_rational(epsilon), diagnostic=diagnostic)
