"""Prefix-free codes over bit strings and the field primitives used by the encoder.

Bit strings are plain ``str`` objects over the alphabet ``"01"``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class NotPrefixFreeError(ValueError):
    pass


class DecodeError(ValueError):
    """Truncated input or an out-of-range field while decoding."""


@dataclass(frozen=True)
class PrefixCode:
    words: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        for w in self.words:
            if w.strip("01"):
                raise ValueError(f"not a binary word: {w!r}")

    @property
    def t(self) -> int:
        return len(self.words)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.words)


@dataclass(frozen=True)
class PrefixCheck:
    ok: bool
    witness: tuple[int, int] | None = None


def first_prefix_pair(words: Sequence[str]) -> tuple[int, int] | None:
    """Lexicographically first 1-based pair i < j where one word prefixes the other."""
    # A violation exists iff some word prefixes its successor in sorted order.
    order = sorted(range(len(words)), key=lambda i: words[i])
    if all(not words[b].startswith(words[a]) for a, b in zip(order, order[1:])):
        return None
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if words[j].startswith(words[i]) or words[i].startswith(words[j]):
                return (i + 1, j + 1)
    raise AssertionError("unreachable")


def check_prefix_free(code: PrefixCode) -> PrefixCheck:
    pair = first_prefix_pair(code.words)
    return PrefixCheck(pair is None, pair)


def _require_prefix_free(code: PrefixCode) -> None:
    pair = first_prefix_pair(code.words)
    if pair is not None:
        raise NotPrefixFreeError(f"word {pair[0]} and word {pair[1]} are prefix-related")


def kraft_sum(code: PrefixCode) -> Fraction:
    _require_prefix_free(code)
    return sum((Fraction(1, 2**n) for n in code.lengths), Fraction(0))


@dataclass(frozen=True)
class ConverseReport:
    mean_length: Fraction
    bound: float
    holds: bool


def shannon_converse_check(code: PrefixCode) -> ConverseReport:
    """Mean length against log2 t, decided exactly as 2^(sum of lengths) >= t^t."""
    _require_prefix_free(code)
    t = code.t
    if t == 0:
        raise ValueError("empty code")
    total = sum(code.lengths)
    holds = (1 << total) >= t**t
    return ConverseReport(Fraction(total, t), math.log2(t), holds)


def random_prefix_code(t: int, seed: int) -> PrefixCode:
    """t leaves drawn from a random binary tree (complete or not), in random order."""
    if t < 1:
        raise ValueError("t must be positive")
    rng = random.Random(seed)
    if t == 1 and rng.random() < 0.5:
        return PrefixCode(("",))
    leaves = ["0", "1"]
    target = t + rng.randint(0, t)
    while len(leaves) < target:
        w = leaves.pop(rng.randrange(len(leaves)))
        leaves += [w + "0", w + "1"]
    words = rng.sample(leaves, t)
    return PrefixCode(tuple(words))


# -- field primitives ----------------------------------------------------------


def unary_encode(m: int) -> str:
    if m < 0:
        raise ValueError("unary code needs m >= 0")
    return "0" * m + "1"


def unary_decode(bits: str, pos: int = 0) -> tuple[int, int]:
    """Returns (m, position after the terminating 1)."""
    end = bits.find("1", pos)
    if end < 0:
        raise DecodeError("unary field has no terminating 1")
    return end - pos, end + 1


def fixed_width(total: int) -> int:
    """Bits needed to write any of ``total`` values: ceil(log2 total)."""
    if total < 1:
        raise ValueError("nothing to encode among zero candidates")
    return (total - 1).bit_length()


def encode_fixed(value: int, total: int) -> str:
    if not 0 <= value < total:
        raise ValueError(f"value {value} outside 0..{total - 1}")
    width = fixed_width(total)
    return format(value, f"0{width}b") if width else ""


def bitmap_encode(subset: Iterable[int], over: Sequence[int]) -> str:
    subset = set(subset)
    if not subset <= set(over):
        raise ValueError("bitmap subset not contained in its reference set")
    return "".join("1" if e in subset else "0" for e in over)


def subset_total(size: int, lo: int, hi: int) -> int:
    return sum(math.comb(size, s) for s in range(max(lo, 0), min(hi, size) + 1))


def rank_subset(ground: Sequence[int], lo: int, hi: int, S: Iterable[int]) -> int:
    """Rank of S among subsets of ``ground`` with size in [lo, hi], size-major then lexicographic."""
    pos = {e: i for i, e in enumerate(ground)}
    S = set(S)
    if not S <= pos.keys():
        raise ValueError("subset is not inside the ground sequence")
    s, N = len(S), len(ground)
    if not lo <= s <= hi:
        raise ValueError(f"subset size {s} outside [{lo}, {hi}]")
    rank = subset_total(N, lo, s - 1)
    prev = -1
    for i, c in enumerate(sorted(pos[e] for e in S)):
        for j in range(prev + 1, c):
            rank += math.comb(N - 1 - j, s - 1 - i)
        prev = c
    return rank


def unrank_subset(ground: Sequence[int], lo: int, hi: int, rank: int) -> frozenset[int]:
    N = len(ground)
    if rank < 0:
        raise ValueError("negative rank")
    for s in range(max(lo, 0), min(hi, N) + 1):
        block = math.comb(N, s)
        if rank < block:
            break
        rank -= block
    else:
        raise ValueError("rank exceeds the number of eligible subsets")
    out, j = [], 0
    for i in range(s):
        while True:
            block = math.comb(N - 1 - j, s - 1 - i)
            if rank < block:
                break
            rank -= block
            j += 1
        out.append(ground[j])
        j += 1
    return frozenset(out)


class BitReader:
    """Sequential reader over a bit string; every underrun raises DecodeError."""

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def read(self, width: int) -> str:
        if self.pos + width > len(self.bits):
            raise DecodeError(f"truncated: wanted {width} bits at position {self.pos}")
        chunk = self.bits[self.pos:self.pos + width]
        self.pos += width
        return chunk

    def read_unary(self) -> int:
        m, self.pos = unary_decode(self.bits, self.pos)
        return m

    def read_fixed(self, total: int) -> int:
        width = fixed_width(total)
        value = int(self.read(width), 2) if width else 0
        if value >= total:
            raise DecodeError(f"field value {value} outside 0..{total - 1}")
        return value

    def read_bitmap(self, over: Sequence[int]) -> frozenset[int]:
        chunk = self.read(len(over))
        return frozenset(e for e, b in zip(over, chunk) if b == "1")

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.bits)
