"""The residual operator chi(x, W) over a set family.

chi(x, W) = S_y - W where y ranges over members with S_y ⊆ S_x ∪ W, minimizes
|S_y - W|, and is the smallest such index on ties.  Scanning candidates in
ascending index order and keeping only strict improvements gives that
tie-break directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .family import SetFamily, elements_of, mask_of


@dataclass(frozen=True)
class ChiResult:
    value: frozenset[int]
    witness: int

    @property
    def size(self) -> int:
        return len(self.value)


def chi_mask(masks: tuple[int, ...], x: int, w_mask: int) -> tuple[int, int]:
    """Bitmask core of chi: returns (residual mask, 1-based witness)."""
    allowed = masks[x - 1] | w_mask
    best_y = 0
    best_size = None
    best_res = 0
    for y, s in enumerate(masks, start=1):
        if s & ~allowed:
            continue
        res = s & ~w_mask
        size = res.bit_count()
        if best_size is None or size < best_size:
            best_y, best_size, best_res = y, size, res
            if size == 0:
                break
    return best_res, best_y


def chi(family: SetFamily, x: int, W: Iterable[int]) -> ChiResult:
    if not 1 <= x <= len(family):
        raise IndexError(f"x={x} outside 1..{len(family)}")
    res, y = chi_mask(family.masks, x, mask_of(W))
    return ChiResult(frozenset(elements_of(res)), y)


def covers(family: SetFamily, W: Iterable[int]) -> int | None:
    """Smallest index y with S_y ⊆ W, or None."""
    w = mask_of(W)
    for y, s in enumerate(family.masks, start=1):
        if not s & ~w:
            return y
    return None


def covers_mask(masks: tuple[int, ...], w_mask: int) -> int | None:
    for y, s in enumerate(masks, start=1):
        if not s & ~w_mask:
            return y
    return None


def chi_profile(family: SetFamily, W: Iterable[int]) -> list[ChiResult]:
    W = frozenset(W)
    return [chi(family, x, W) for x in range(1, len(family) + 1)]


def chi_sizes(masks: tuple[int, ...], w_mask: int) -> list[int]:
    """|chi(x, W)| for every x; zero everywhere as soon as W covers a member."""
    if covers_mask(masks, w_mask) is not None:
        return [0] * len(masks)
    return [chi_mask(masks, x, w_mask)[0].bit_count() for x in range(1, len(masks) + 1)]
