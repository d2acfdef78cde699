"""Profiles, allocations and allocation enumeration.

Utilities are exact nonnegative rationals (``fractions.Fraction``). Agents and
goods are addressed by 0-based index; names only matter when reading or
writing documents.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

DEFAULT_CAP = 10**8

UtilityVector = tuple[Fraction, ...]


class CapacityError(RuntimeError):
    """Raised when an exhaustive search would exceed the enumeration cap."""


class ProfileFormatError(ValueError):
    """Malformed profile or allocation document.

    ``location`` points at the offending element, e.g. ``utilities[1][2]`` or
    ``line 3 column 5``.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def to_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"3"``, ``"0.25"``, ints or Fractions. Floats are rejected."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}; pass a string or Fraction")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class Profile:
    agent_names: tuple[str, ...]
    good_names: tuple[str, ...]
    utilities: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "agent_names", tuple(self.agent_names))
        object.__setattr__(self, "good_names", tuple(self.good_names))
        rows = tuple(tuple(to_rational(u) for u in row) for row in self.utilities)
        object.__setattr__(self, "utilities", rows)
        if len(self.agent_names) < 2:
            raise ValueError("a profile needs at least 2 agents")
        if len(set(self.agent_names)) != len(self.agent_names):
            raise ValueError("agent names must be distinct")
        if len(set(self.good_names)) != len(self.good_names):
            raise ValueError("good names must be distinct")
        if len(rows) != len(self.agent_names):
            raise ValueError(f"expected {len(self.agent_names)} utility rows, got {len(rows)}")
        for i, row in enumerate(rows):
            if len(row) != len(self.good_names):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(self.good_names)}")
            for g, u in enumerate(row):
                if u < 0:
                    raise ValueError(f"negative utility {u} for agent {i}, good {g}")

    @classmethod
    def from_matrix(cls, utilities: Sequence[Sequence]) -> Profile:
        """Build a profile with default names ``a1..an`` and ``g1..gm``."""
        n = len(utilities)
        m = len(utilities[0]) if n else 0
        return cls(
            tuple(f"a{i + 1}" for i in range(n)),
            tuple(f"g{g + 1}" for g in range(m)),
            tuple(tuple(row) for row in utilities),
        )

    @property
    def n(self) -> int:
        return len(self.agent_names)

    @property
    def m(self) -> int:
        return len(self.good_names)

    def value(self, agent: int, good: int) -> Fraction:
        return self.utilities[agent][good]

    def scaled(self, agent: int, factor) -> Profile:
        """Copy with one agent's row multiplied by ``factor``."""
        factor = to_rational(factor)
        rows = list(self.utilities)
        rows[agent] = tuple(u * factor for u in rows[agent])
        return Profile(self.agent_names, self.good_names, tuple(rows))


@dataclass(frozen=True)
class Allocation:
    """Ordered partition of goods into one bundle per agent (empty bundles allowed)."""

    bundles: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @classmethod
    def from_owners(cls, owners: Sequence[int], n: int) -> Allocation:
        """``owners[g]`` is the agent receiving good ``g``."""
        bundles = [set() for _ in range(n)]
        for g, i in enumerate(owners):
            bundles[i].add(g)
        return cls(tuple(bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def owners(self) -> list[int]:
        m = sum(len(b) for b in self.bundles)
        owners = [-1] * m
        for i, bundle in enumerate(self.bundles):
            for g in bundle:
                owners[g] = i
        return owners

    def validate(self, n: int, m: int) -> None:
        if len(self.bundles) != n:
            raise ValueError(f"allocation has {len(self.bundles)} bundles, expected {n}")
        seen: set[int] = set()
        for i, bundle in enumerate(self.bundles):
            for g in bundle:
                if not 0 <= g < m:
                    raise ValueError(f"bundle {i} contains unknown good index {g}")
                if g in seen:
                    raise ValueError(f"good {g} appears in more than one bundle")
                seen.add(g)
        if len(seen) != m:
            missing = sorted(set(range(m)) - seen)
            raise ValueError(f"goods {missing} are not allocated")

    def index(self) -> int:
        """Position of this allocation in :func:`enumerate_allocations` order."""
        n = self.n
        t = 0
        for i in self.owners():
            t = t * n + i
        return t

    def __repr__(self):
        inner = ", ".join("{" + ",".join(str(g) for g in sorted(b)) + "}" for b in self.bundles)
        return f"Allocation({inner})"


def bundle_utility(profile: Profile, agent: int, bundle) -> Fraction:
    if not 0 <= agent < profile.n:
        raise IndexError(f"agent index {agent} out of range for {profile.n} agents")
    row = profile.utilities[agent]
    total = Fraction(0)
    for g in bundle:
        if not 0 <= g < profile.m:
            raise IndexError(f"good index {g} out of range for {profile.m} goods")
        total += row[g]
    return total


def utility_vector(profile: Profile, alloc: Allocation) -> UtilityVector:
    alloc.validate(profile.n, profile.m)
    return tuple(bundle_utility(profile, i, b) for i, b in enumerate(alloc.bundles))


def allocation_count(n: int, m: int) -> int:
    return n**m


def allocation_at(index: int, n: int, m: int) -> Allocation:
    """Inverse of :meth:`Allocation.index`: good 0 is the most significant base-n digit."""
    owners = [0] * m
    for g in range(m - 1, -1, -1):
        index, owners[g] = divmod(index, n)
    return Allocation.from_owners(owners, n)


def check_cap(n: int, m: int, cap: int | None = DEFAULT_CAP) -> int:
    total = allocation_count(n, m)
    if cap is not None and total > cap:
        raise CapacityError(f"{n}^{m} = {total} allocations exceeds the cap of {cap}")
    return total


def enumerate_allocations(
    n: int, m: int, cap: int | None = DEFAULT_CAP, start: int = 0, stop: int | None = None
) -> Iterator[Allocation]:
    """Yield every allocation of ``m`` goods to ``n`` agents exactly once.

    The order is a base-n counter over the goods (good 0 most significant), so
    ``start``/``stop`` slice the stream by allocation index for partitioned
    consumption.
    """
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    total = check_cap(n, m, cap)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    owners = allocation_at(start, n, m).owners()
    for _ in range(start, stop):
        yield Allocation.from_owners(owners, n)
        g = m - 1
        while g >= 0:
            owners[g] += 1
            if owners[g] < n:
                break
            owners[g] = 0
            g -= 1


def admits_positive_allocation(profile: Profile) -> bool:
    """Whether some allocation gives every agent strictly positive utility.

    Equivalent to a matching that saturates the agents in the bipartite graph
    of positively valued (agent, good) pairs.
    """
    match_of_good: dict[int, int] = {}

    def augment(i: int, visited: set[int]) -> bool:
        for g, u in enumerate(profile.utilities[i]):
            if u > 0 and g not in visited:
                visited.add(g)
                if g not in match_of_good or augment(match_of_good[g], visited):
                    match_of_good[g] = i
                    return True
        return False

    return all(augment(i, set()) for i in range(profile.n))


def random_profile(
    rng: random.Random,
    n: int,
    m: int,
    low: int = 0,
    high: int = 10,
    require_positive: bool = True,
    max_tries: int = 10_000,
) -> Profile:
    """Integer utilities uniform in ``[low, high]``, rejection-sampled until some
    allocation gives every agent positive utility (when ``require_positive``)."""
    for _ in range(max_tries):
        p = Profile.from_matrix([[rng.randint(low, high) for _ in range(m)] for _ in range(n)])
        if not require_positive or admits_positive_allocation(p):
            return p
    raise RuntimeError(f"no profile admitting a positive allocation after {max_tries} draws")


# -- documents ---------------------------------------------------------------


def _rational_text(q: Fraction) -> str:
    return str(q)


def profile_to_dict(profile: Profile) -> dict:
    return {
        "agents": list(profile.agent_names),
        "goods": list(profile.good_names),
        "utilities": [[_rational_text(u) for u in row] for row in profile.utilities],
    }


def serialize_profile(profile: Profile) -> bytes:
    return (json.dumps(profile_to_dict(profile), indent=2) + "\n").encode()


def _load_json(text) -> object:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def _names(doc: dict, key: str) -> list[str]:
    names = doc.get(key)
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise ProfileFormatError("expected a list of strings", key)
    for k, name in enumerate(names):
        if name in names[:k]:
            raise ProfileFormatError(f"duplicate name {name!r}", f"{key}[{k}]")
    return names


def profile_from_dict(doc) -> Profile:
    if not isinstance(doc, dict):
        raise ProfileFormatError("expected an object with agents, goods, utilities")
    agents = _names(doc, "agents")
    goods = _names(doc, "goods")
    if len(agents) < 2:
        raise ProfileFormatError("at least 2 agents required", "agents")
    rows = doc.get("utilities")
    if not isinstance(rows, list) or len(rows) != len(agents):
        raise ProfileFormatError(f"expected {len(agents)} rows", "utilities")
    matrix = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(goods):
            raise ProfileFormatError(f"expected {len(goods)} entries", f"utilities[{i}]")
        parsed = []
        for g, cell in enumerate(row):
            where = f"utilities[{i}][{g}]"
            if isinstance(cell, bool) or not isinstance(cell, (str, int)):
                raise ProfileFormatError(f"expected a rational string, got {cell!r}", where)
            try:
                q = Fraction(str(cell).strip())
            except (ValueError, ZeroDivisionError):
                raise ProfileFormatError(f"not a rational: {cell!r}", where) from None
            if q < 0:
                raise ProfileFormatError(f"negative utility {cell!r}", where)
            parsed.append(q)
        matrix.append(tuple(parsed))
    return Profile(tuple(agents), tuple(goods), tuple(matrix))


def parse_profile(text) -> Profile:
    return profile_from_dict(_load_json(text))


def allocation_to_dict(alloc: Allocation, profile: Profile) -> dict:
    return {"bundles": [[profile.good_names[g] for g in sorted(b)] for b in alloc.bundles]}


def serialize_allocation(alloc: Allocation, profile: Profile) -> bytes:
    return (json.dumps(allocation_to_dict(alloc, profile)) + "\n").encode()


def parse_allocation(text, profile: Profile) -> Allocation:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("bundles"), list):
        raise ProfileFormatError("expected an object with a bundles list")
    bundles = doc["bundles"]
    if len(bundles) != profile.n:
        raise ProfileFormatError(f"expected {profile.n} bundles", "bundles")
    index = {name: g for g, name in enumerate(profile.good_names)}
    seen: set[str] = set()
    parsed = []
    for i, bundle in enumerate(bundles):
        if not isinstance(bundle, list):
            raise ProfileFormatError("expected a list of good names", f"bundles[{i}]")
        goods = set()
        for k, name in enumerate(bundle):
            where = f"bundles[{i}][{k}]"
            if name not in index:
                raise ProfileFormatError(f"unknown good {name!r}", where)
            if name in seen:
                raise ProfileFormatError(f"good {name!r} allocated twice", where)
            seen.add(name)
            goods.add(index[name])
        parsed.append(frozenset(goods))
    missing = [name for name in profile.good_names if name not in seen]
    if missing:
        raise ProfileFormatError(f"goods not allocated: {missing}", "bundles")
    return Allocation(tuple(parsed))
