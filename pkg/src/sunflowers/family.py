"""Set families over a ground set [n], their file format, generators and spreadness.

Elements are the integers 1..n.  Member indices are 1-based everywhere in the
public API so that witnesses and petals line up with the family file and the
CLI output.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath

MAX_GROUND = 256
MAX_SETS = 1 << 20
LOG_DENOMINATOR = 1 << 20


class BudgetExceeded(ValueError):
    """An exhaustive computation would exceed its configured size budget."""


class FamilyFormatError(ValueError):
    """Raised for a malformed family file; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction or a string like ``"19/10"`` or ``"1.9"``.

    Floats are refused: a binary float is never an exact stand-in for a
    decimal written by the user.
    """
    if isinstance(value, float):
        raise TypeError("pass rationals as int, Fraction or str, not float")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    return Fraction(value)


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << e
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return tuple(out)


def parse_subset(text: str) -> frozenset[int]:
    """Parse ``"1,2,5"`` (or an empty string) into a set of elements."""
    text = text.strip().strip("{}")
    if not text:
        return frozenset()
    try:
        return frozenset(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"not a comma-separated list of integers: {text!r}") from exc


@dataclass(frozen=True)
class SetFamily:
    """An ordered sequence of k-subsets of [n]; repeats are allowed."""

    n: int
    k: int
    sets: tuple[frozenset[int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if self.n < 0 or self.k < 0:
            raise ValueError("n and k must be non-negative")
        if self.n > MAX_GROUND:
            raise ValueError(f"ground set of size {self.n} exceeds the bound {MAX_GROUND}")
        for i, s in enumerate(self.sets, start=1):
            if len(s) != self.k:
                raise ValueError(f"set {i} has size {len(s)} ≠ k={self.k}")
            for e in s:
                if not 1 <= e <= self.n:
                    raise ValueError(f"set {i}: element {e} outside 1..{self.n}")

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, index: int) -> frozenset[int]:
        """Member by 1-based index."""
        if not 1 <= index <= len(self.sets):
            raise IndexError(f"index {index} outside 1..{len(self.sets)}")
        return self.sets[index - 1]

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(s) for s in self.sets)

    @property
    def ground(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    def has_repeats(self) -> bool:
        return len(set(self.sets)) < len(self.sets)

    def with_ground(self, n: int) -> SetFamily:
        """Same members, viewed over a larger ground set."""
        return SetFamily(n, self.k, self.sets)

    def digest(self) -> str:
        return hashlib.sha256(serialize_family(self).encode()).hexdigest()[:12]


# -- file format -------------------------------------------------------------

_INNER_LIST = re.compile(r"\[[^\[\]]*\]")


def _set_lines(text: str) -> list[int]:
    start = text.find('"sets"')
    if start < 0:
        return []
    bracket = text.find("[", start)
    return [text.count("\n", 0, m.start()) + 1 for m in _INNER_LIST.finditer(text, bracket + 1)]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_family(text: str) -> SetFamily:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FamilyFormatError(exc.msg, exc.lineno) from exc
    if not isinstance(data, dict):
        raise FamilyFormatError("expected a JSON object with keys n, k, sets", 1)
    for key in ("n", "k", "sets"):
        if key not in data:
            raise FamilyFormatError(f"missing key {key!r}", 1)
    n, k, raw = data["n"], data["k"], data["sets"]
    if not _is_int(n) or n < 0:
        raise FamilyFormatError("n must be a non-negative integer", 1)
    if not _is_int(k) or k < 0:
        raise FamilyFormatError("k must be a non-negative integer", 1)
    if n > MAX_GROUND:
        raise FamilyFormatError(f"n={n} exceeds the supported bound {MAX_GROUND}", 1)
    if not isinstance(raw, list):
        raise FamilyFormatError("sets must be a list of lists", 1)
    lines = _set_lines(text)
    sets = []
    for i, s in enumerate(raw):
        lineno = lines[i] if i < len(lines) else None
        if not isinstance(s, list) or not all(_is_int(e) for e in s):
            raise FamilyFormatError(f"set {i + 1} is not a list of integers", lineno)
        for e in s:
            if e > n:
                raise FamilyFormatError(f"element {e} exceeds n={n}", lineno)
            if e < 1:
                raise FamilyFormatError(f"element {e} is below 1", lineno)
        if any(a >= b for a, b in zip(s, s[1:])):
            raise FamilyFormatError(f"set {i + 1} is not strictly increasing", lineno)
        if len(s) != k:
            raise FamilyFormatError(f"set size {len(s)} ≠ k={k}", lineno)
        sets.append(frozenset(s))
    return SetFamily(n, k, tuple(sets))


def serialize_family(family: SetFamily) -> str:
    """Canonical text form: one member per line, file order preserved."""
    rows = [json.dumps(sorted(s)) for s in family.sets]
    head = f'{{"n": {family.n}, "k": {family.k}, "sets": ['
    if not rows:
        return head + "]}\n"
    return head + "\n" + ",\n".join("  " + row for row in rows) + "\n]}\n"


def load_family(path) -> SetFamily:
    with open(path, encoding="utf-8") as fh:
        return parse_family(fh.read())


# -- generators --------------------------------------------------------------


def generate_extremal(p: int, k: int, max_sets: int = MAX_SETS) -> SetFamily:
    """All transversals of k blocks of size p-1; (p-1)^k sets, no p-sunflower."""
    if p < 2 or k < 1:
        raise ValueError("need p >= 2 and k >= 1")
    count = (p - 1) ** k
    if count > max_sets:
        raise OverflowError(f"(p-1)^k = {count} exceeds the set budget {max_sets}")
    blocks = [range(b * (p - 1) + 1, (b + 1) * (p - 1) + 1) for b in range(k)]
    return SetFamily(k * (p - 1), k, tuple(frozenset(t) for t in itertools.product(*blocks)))


def generate_random_family(
    n: int, k: int, ell: int, seed: int, distinct: bool = False
) -> SetFamily:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if ell < 0 or ell > MAX_SETS:
        raise ValueError(f"set count must lie in 0..{MAX_SETS}")
    if distinct and ell > math.comb(n, k):
        raise ValueError(f"cannot draw {ell} distinct {k}-subsets of [{n}]: only {math.comb(n, k)} exist")
    rng = random.Random(seed)
    ground = range(1, n + 1)
    sets: list[frozenset[int]] = []
    seen: set[frozenset[int]] = set()
    while len(sets) < ell:
        s = frozenset(rng.sample(ground, k))
        if distinct:
            if s in seen:
                continue
            seen.add(s)
        sets.append(s)
    return SetFamily(n, k, tuple(sets))


# -- restriction -------------------------------------------------------------


def containing(family: SetFamily, Z: Iterable[int]) -> list[int]:
    """1-based indices of the members that contain Z."""
    Z = frozenset(Z)
    return [i for i, s in enumerate(family.sets, start=1) if Z <= s]


def link(family: SetFamily, Z: Iterable[int]) -> SetFamily:
    """The family {S - Z : Z ⊆ S} in original order, with k' = k - |Z|."""
    Z = frozenset(Z)
    if not Z:
        raise ValueError("Z must be non-empty")
    if len(Z) > family.k:
        raise ValueError(f"|Z|={len(Z)} exceeds k={family.k}")
    return SetFamily(family.n, family.k - len(Z), tuple(s - Z for s in family.sets if Z <= s))


# -- spreadness --------------------------------------------------------------


def superset_counts(family: SetFamily) -> Counter:
    """count[Z] = #{i : Z ⊆ S_i} for every non-empty Z inside some member."""
    counts: Counter = Counter()
    for s in family.sets:
        items = sorted(s)
        for size in range(1, len(items) + 1):
            for Z in itertools.combinations(items, size):
                counts[Z] += 1
    return counts


def _root_cmp(c1: int, d1: int, c2: int, d2: int) -> int:
    """Sign of c1^(1/d1) - c2^(1/d2); d = 0 means +inf when c >= 2 and 1 otherwise."""
    inf1 = d1 == 0 and c1 >= 2
    inf2 = d2 == 0 and c2 >= 2
    if inf1 or inf2:
        return inf1 - inf2
    if d1 == 0:
        c1, d1 = 1, 1
    if d2 == 0:
        c2, d2 = 1, 1
    a, b = c1**d2, c2**d1
    return (a > b) - (a < b)


def _best_subset(family: SetFamily, counts, candidates) -> tuple[tuple[int, ...], int] | None:
    # Order: largest count^(1/d), then smallest |Z|, then lexicographic Z.
    best = None
    for Z in candidates:
        c = counts[Z]
        d = family.k - len(Z)
        if best is None:
            best = (Z, c)
            continue
        bZ, bc = best
        cmp = _root_cmp(c, d, bc, family.k - len(bZ))
        if cmp > 0 or (cmp == 0 and (len(Z), Z) < (len(bZ), bZ)):
            best = (Z, c)
    return best


def exceeds_power(count: int, r: Fraction, d: int) -> bool:
    """Exact test of count > r^d."""
    return count * r.denominator**d > r.numerator**d


@dataclass(frozen=True)
class SpreadReport:
    verdict: str
    Z: frozenset[int] | None = None
    count: int | None = None

    @property
    def spread(self) -> bool:
        return self.verdict == "spread"


def spread_check(family: SetFamily, r) -> SpreadReport:
    r = as_fraction(r)
    if r <= 1:
        raise ValueError("r must exceed 1")
    counts = superset_counts(family)
    violating = [Z for Z, c in counts.items() if exceeds_power(c, r, family.k - len(Z))]
    if not violating:
        return SpreadReport("spread")
    Z, c = _best_subset(family, counts, violating)
    return SpreadReport("violated", frozenset(Z), c)


@dataclass(frozen=True)
class SpreadNumber:
    """The least r making the family r-spread, as count^(1/d) with its witness Z."""

    count: int
    d: int
    Z: frozenset[int] | None = None
    infinite: bool = False

    @property
    def value(self) -> float:
        if self.infinite:
            return math.inf
        return self.count ** (1.0 / self.d)

    def at_most(self, r) -> bool:
        """Exactly: is the spread number <= r?"""
        if self.infinite:
            return False
        return not exceeds_power(self.count, as_fraction(r), self.d)

    def __str__(self) -> str:
        if self.infinite:
            return "inf"
        return f"{self.count}^(1/{self.d}) ≈ {self.value:.6g}"


def spread_number(family: SetFamily) -> SpreadNumber:
    counts = superset_counts(family)
    if family.k > 0:
        dup = sorted(Z for Z, c in counts.items() if len(Z) == family.k and c >= 2)
        if dup:
            return SpreadNumber(counts[dup[0]], 0, frozenset(dup[0]), infinite=True)
    elif len(family) >= 2:
        return SpreadNumber(len(family), 0, frozenset(), infinite=True)
    best = _best_subset(family, counts, [Z for Z in counts if len(Z) < family.k])
    if best is None:
        return SpreadNumber(1, 1)
    Z, c = best
    return SpreadNumber(c, family.k - len(Z), frozenset(Z))


# -- thresholds --------------------------------------------------------------


@dataclass(frozen=True)
class SpreadParams:
    """Petal count and the scaling constants of the threshold formulas.

    The constants are existential; the defaults only make desk-scale demos run.
    alpha = beta = 1 is accepted as a boundary value.  ``gamma`` is accepted up to 1 so experiments can probe outside the
    ``gamma < 1/2`` regime; :attr:`in_paper_regime` flags that case.
    """

    p: int = 3
    alpha: Fraction = Fraction(4)
    beta: Fraction = Fraction(2)
    gamma: Fraction = Fraction(1, 4)
    epsilon: Fraction = Fraction(1, 4)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "epsilon"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.alpha < 1 or self.beta < 1:
            raise ValueError("alpha and beta must be at least 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < self.epsilon < Fraction(1, 2):
            raise ValueError("epsilon must lie in (0, 1/2)")

    @property
    def in_paper_regime(self) -> bool:
        return self.gamma < Fraction(1, 2)


def _log2_exact(x: Fraction) -> int | None:
    num, den = x.numerator, x.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        return num.bit_length() - den.bit_length()
    return None


def ceil_log_product(coef: Fraction, x: Fraction, denominator: int = LOG_DENOMINATOR) -> Fraction:
    """Smallest multiple of 1/denominator that is >= coef * log2(x)."""
    exact = _log2_exact(x)
    if exact is not None:
        return Fraction(math.ceil(coef * exact * denominator), denominator)
    with mpmath.workprec(256):
        val = mpmath.mpf(coef.numerator) / coef.denominator
        val *= mpmath.log(mpmath.mpf(x.numerator) / x.denominator, 2)
        return Fraction(int(mpmath.ceil(val * denominator)), denominator)


def r_threshold(params: SpreadParams, k: int, form: str = "theorem") -> Fraction:
    """Rational upper bound on alpha*p*log2(pk) ("theorem") or beta/gamma*log2(k/eps) ("lemma")."""
    if form == "theorem":
        x = Fraction(params.p * k)
        if x < 2:
            raise ValueError("theorem form needs p*k >= 2")
        return ceil_log_product(params.alpha * params.p, x)
    if form == "lemma":
        if k < 1:
            raise ValueError("lemma form needs k >= 1")
        x = Fraction(k) / params.epsilon
        if x <= 1:
            raise ValueError("lemma form needs k/epsilon > 1")
        return ceil_log_product(params.beta / params.gamma, x)
    raise ValueError(f"unknown form {form!r}")


def complete_family(n: int, k: int) -> SetFamily:
    """Every k-subset of [n], in lexicographic order."""
    return SetFamily(n, k, tuple(frozenset(c) for c in itertools.combinations(range(1, n + 1), k)))


def from_lists(n: int, k: int, sets: Sequence[Iterable[int]]) -> SetFamily:
    return SetFamily(n, k, tuple(frozenset(s) for s in sets))
