"""Shared fixtures and brute-force oracles.

The oracles here work on plain frozensets and enumerate definitions directly;
they share no code with the bitmask paths in the package.
"""

import itertools
import math
from fractions import Fraction

import pytest

from sunflowers.family import SetFamily, complete_family, from_lists, generate_random_family, spread_check

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- oracles -------------------------------------------------------------------


def brute_chi(sets, x, W):
    """(value, witness) straight from the definition; x and witness are 1-based."""
    W = frozenset(W)
    allowed = sets[x - 1] | W
    cands = [(len(s - W), y) for y, s in enumerate(sets, start=1) if s <= allowed]
    size, y = min(cands)
    return sets[y - 1] - W, y


def brute_superset_count(sets, Z):
    return sum(1 for s in sets if frozenset(Z) <= s)


def brute_all_counts(family: SetFamily):
    """count(Z) for every non-empty Z ⊆ [n] with |Z| <= k, enumerated over the ground set."""
    out = {}
    for size in range(1, family.k + 1):
        for Z in itertools.combinations(range(1, family.n + 1), size):
            out[Z] = brute_superset_count(family.sets, Z)
    return out


def brute_has_sunflower(sets, p, distinct=True):
    for combo in itertools.combinations(range(len(sets)), p):
        members = [sets[i] for i in combo]
        if distinct and len(set(members)) < p:
            continue
        inters = {a & b for a, b in itertools.combinations(members, 2)}
        if len(inters) == 1:
            return True
    return False


def brute_chi_expectation(family: SetFamily, w: int) -> Fraction:
    total = 0
    for W in itertools.combinations(range(1, family.n + 1), w):
        for x in range(1, len(family) + 1):
            total += len(brute_chi(family.sets, x, W)[0])
    return Fraction(total, len(family) * math.comb(family.n, w))


def spread_family(n, k, ell, r, start_seed=0):
    """First seeded family of ell distinct k-sets of [n] that is r-spread."""
    for seed in range(start_seed, start_seed + 10_000):
        fam = generate_random_family(n, k, ell, seed, distinct=True)
        if spread_check(fam, r).spread:
            return fam, seed
    raise RuntimeError("no spread family found")


# -- fixtures -----------------------------------------------------------------------


@pytest.fixture
def tri():
    return from_lists(3, 2, [[1, 2], [1, 3], [2, 3]])


@pytest.fixture
def k4():
    return complete_family(4, 2)
