"""Sunflower recognition and extraction.

Two extractors are provided: the classical Erdős–Rado recursion (greedy
disjoint subfamily, else recurse on the link of a popular element) and the
spread-based induction, which recurses on the link of a spreadness witness and,
once the family is spread and large enough, looks for p disjoint members by
sampling random partitions of the ground set.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

from .chi import covers_mask
from .family import (
    SetFamily,
    SpreadParams,
    containing,
    exceeds_power,
    link,
    mask_of,
    r_threshold,
    spread_check,
)


@dataclass(frozen=True)
class Sunflower:
    core: frozenset[int]
    petals: tuple[int, ...]


@dataclass(frozen=True)
class PartitionSample:
    parts: tuple[frozenset[int], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(part) for part in self.parts)


def is_sunflower(family: SetFamily, indices: Sequence[int]) -> frozenset[int] | None:
    """Common pairwise intersection of the chosen members, or None if they differ."""
    if len(indices) < 2:
        raise ValueError("a sunflower check needs at least two indices")
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate indices in {list(indices)}")
    members = [family[i] for i in indices]
    core = members[0] & members[1]
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            if members[a] & members[b] != core:
                return None
    return core


# -- Erdős–Rado ---------------------------------------------------------------


def greedy_disjoint(family: SetFamily) -> list[int]:
    """Maximal pairwise-disjoint subfamily, scanning members in index order."""
    chosen, used = [], 0
    for i, s in enumerate(family.masks, start=1):
        if not s & used:
            chosen.append(i)
            used |= s
    return chosen


def find_sunflower_erdos_rado(family: SetFamily, p: int) -> Sunflower | None:
    if p < 2:
        raise ValueError("p must be at least 2")
    if family.has_repeats():
        raise ValueError("the Erdős–Rado extractor needs distinct sets")
    return _erdos_rado(family, list(range(1, len(family) + 1)), p)


def _erdos_rado(family: SetFamily, idx: list[int], p: int) -> Sunflower | None:
    if len(family) < p:
        return None
    chosen = greedy_disjoint(family)
    if len(chosen) >= p:
        return Sunflower(frozenset(), tuple(idx[i - 1] for i in chosen[:p]))
    union = frozenset().union(*(family[i] for i in chosen))
    if not union:
        return None
    popularity = Counter(e for s in family.sets for e in s if e in union)
    # most popular element, smallest element on ties
    e = min(union, key=lambda e: (-popularity[e], e))
    sub_idx = [idx[i - 1] for i in containing(family, {e})]
    found = _erdos_rado(link(family, {e}), sub_idx, p)
    if found is None:
        return None
    return Sunflower(found.core | {e}, found.petals)


# -- random partitions ---------------------------------------------------------


def sample_partition(n: int, p: int, seed: int | None = None, rng: random.Random | None = None) -> PartitionSample:
    """Random permutation of [n] cut into p blocks; the first n mod p blocks get one extra."""
    if p < 1 or n < p:
        raise ValueError(f"cannot partition [{n}] into {p} parts of size >= 1")
    if rng is None:
        rng = random.Random(seed)
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    q, extra = divmod(n, p)
    parts, start = [], 0
    for i in range(p):
        size = q + (i < extra)
        parts.append(frozenset(perm[start:start + size]))
        start += size
    return PartitionSample(tuple(parts))


def covered_by_partition(family: SetFamily, sample: PartitionSample) -> list[int] | None:
    """One member inside each part (smallest index per part), or None."""
    ys = []
    for part in sample.parts:
        y = covers_mask(family.masks, mask_of(part))
        if y is None:
            return None
        ys.append(y)
    return ys


def find_disjoint_by_partition(
    family: SetFamily, p: int, max_iters: int, seed: int
) -> list[int] | None:
    """Sample up to max_iters partitions; return p members, one inside each part."""
    if family.k == 0:
        raise ValueError("members must be non-empty to be separated by a partition")
    rng = random.Random(seed)
    for _ in range(max_iters):
        ys = covered_by_partition(family, sample_partition(family.n, p, rng=rng))
        if ys is not None:
            masks = [family.masks[y - 1] for y in ys]
            assert all(not a & b for i, a in enumerate(masks) for b in masks[i + 1:])
            return ys
    return None


# -- spread induction ----------------------------------------------------------


def find_sunflower_spread(
    family: SetFamily,
    p: int,
    params: SpreadParams | None = None,
    max_iters: int = 1000,
    seed: int = 0,
    allow_repeats: bool = False,
) -> Sunflower | None:
    """Induction on k: recurse on the link of a spreadness witness, else split by partitions.

    Repeated members are collapsed to their first occurrence unless
    ``allow_repeats`` is set and some member repeats at least p times, in which
    case those copies are returned as a degenerate sunflower.
    """
    params = replace(params, p=p) if params is not None else SpreadParams(p=p)
    if allow_repeats:
        groups: dict[frozenset[int], list[int]] = {}
        for i, s in enumerate(family.sets, start=1):
            groups.setdefault(s, []).append(i)
        for s, where in groups.items():
            if len(where) >= p:
                return Sunflower(s, tuple(where[:p]))
    idx, seen = [], set()
    for i, s in enumerate(family.sets, start=1):
        if s not in seen:
            seen.add(s)
            idx.append(i)
    distinct = SetFamily(family.n, family.k, tuple(family[i] for i in idx))
    return _spread(distinct, idx, params, max_iters, seed)


def _spread(family: SetFamily, idx: list[int], params: SpreadParams, max_iters: int, seed: int):
    p, k = params.p, family.k
    if len(family) < p or k == 0:
        return None
    if k == 1:
        return Sunflower(frozenset(), tuple(idx[:p]))
    r = r_threshold(params, k)
    report = spread_check(family, r)
    if not report.spread:
        Z = report.Z
        sub_idx = [idx[i - 1] for i in containing(family, Z)]
        found = _spread(link(family, Z), sub_idx, params, max_iters, seed)
        if found is None:
            return None
        return Sunflower(found.core | Z, found.petals)
    if not exceeds_power(len(family), r, k):
        return None
    ys = find_disjoint_by_partition(family, p, max_iters, seed)
    if ys is None:
        return None
    return Sunflower(frozenset(), tuple(sorted(idx[y - 1] for y in ys)))
