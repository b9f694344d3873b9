"""A decodable two-case encoding of pairs (x, V) for a fixed conditioning set U.

For W = U ∪ V, each pair is written either as

* case 0: ``0 | unary |chi(x,U)| | rank of V ∪ chi(x,U) | bitmap of chi(x,U) ∩ chi(j,U)
  | unary |chi(x,W)| | rank of x in tau | bitmap of V ∩ chi(x,U)``, or
* case 1: ``1 | rank of x | bitmap of A | rank of V among the violating V'``,

where case 1 is taken when some A ⊆ chi(x,U) with |A| = |chi(x,W)| has
|tau(A, x, V)| > phi(x, V).  Every fixed-width field is sized by a candidate
count the decoder can recompute from what it has already read, so the code
is self-delimiting; :func:`audit` encodes every pair, decodes it back, scans
the whole codebook for prefix relations and does the length accounting.
"""

from __future__ import annotations

import csv
import functools
import itertools
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .chi import chi_mask
from .coding import (
    BitReader,
    DecodeError,
    bitmap_encode,
    encode_fixed,
    first_prefix_pair,
    rank_subset,
    subset_total,
    unary_encode,
    unrank_subset,
)
from .family import BudgetExceeded, SetFamily, as_fraction, elements_of, mask_of

DEFAULT_PAIR_BUDGET = 200_000

CASE0_FIELDS = ("case", "a", "b", "c", "c_prime", "d", "e")
CASE1_FIELDS = ("case", "a", "b", "c")


class ParameterWarning(UserWarning):
    """The instance sits outside the side conditions the contraction argument assumes."""


@dataclass(frozen=True)
class AuditConfig:
    U: frozenset[int]
    v: int
    rho: Fraction
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "U", frozenset(self.U))
        object.__setattr__(self, "rho", as_fraction(self.rho))
        object.__setattr__(self, "r", as_fraction(self.r))
        if self.v < 1:
            raise ValueError("v must be at least 1")
        if self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if self.r <= 0:
            raise ValueError("r must be positive")


@dataclass
class EncodedPair:
    x: int
    V: frozenset[int]
    case: int
    fields: dict[str, str]
    chi_u: int
    chi_w: int
    phi: Fraction
    tau_size: int | None = None

    @property
    def bits(self) -> str:
        return "".join(self.fields.values())


class Encoder:
    """Precomputed chi(y, U) for a family and config, plus the encode/decode schedule."""

    def __init__(self, family: SetFamily, config: AuditConfig):
        if len(family) < 1:
            raise ValueError("the family must have at least one member")
        if not config.U <= set(family.ground):
            raise ValueError("U must be a subset of the ground set")
        self.family = family
        self.config = config
        self.n, self.k, self.ell = family.n, family.k, len(family)
        self.u_mask = mask_of(config.U)
        self.ground = tuple(e for e in family.ground if e not in config.U)
        self.g_mask = mask_of(self.ground)
        if config.v > len(self.ground):
            raise ValueError(f"v={config.v} exceeds |[n] - U| = {len(self.ground)}")
        self.chi_u = tuple(chi_mask(family.masks, x, self.u_mask)[0] for x in range(1, self.ell + 1))
        self.chi_u_size = tuple(c.bit_count() for c in self.chi_u)
        self._violating_cache: dict[tuple[int, int], list[int]] = {}

    # -- the analytic quantities -------------------------------------------

    def phi(self, m: int, s: int) -> Fraction:
        """r^k (rho v/n)^m (v r/n)^(-s)."""
        c = self.config
        return c.r**self.k * (c.rho * c.v / self.n) ** m * (c.v * c.r / self.n) ** (-s)

    def tau(self, a_mask: int, t_mask: int, m: int) -> list[int]:
        """Indices y with A ⊆ chi(y,U) ⊆ T and |chi(y,U)| = m, where T = V ∪ chi(x,U)."""
        return [
            y
            for y, (cy, size) in enumerate(zip(self.chi_u, self.chi_u_size), start=1)
            if size == m and not a_mask & ~cy and not cy & ~t_mask
        ]

    def chi_w(self, x: int, v_mask: int) -> int:
        return chi_mask(self.family.masks, x, self.u_mask | v_mask)[0]

    def _first_violating_a(self, x: int, v_mask: int, s: int, phi: Fraction) -> int | None:
        cx = self.chi_u[x - 1]
        t_mask = v_mask | cx
        m = self.chi_u_size[x - 1]
        for combo in itertools.combinations(elements_of(cx), s):
            a_mask = mask_of(combo)
            if len(self.tau(a_mask, t_mask, m)) > phi:
                return a_mask
        return None

    def _minimizer_j(self, t_mask: int) -> int | None:
        best, best_size = None, None
        for y, (cy, size) in enumerate(zip(self.chi_u, self.chi_u_size), start=1):
            if not cy & ~t_mask and (best_size is None or size < best_size):
                best, best_size = y, size
        return best

    def violating_vs(self, x: int, a_mask: int) -> list[int]:
        """All V' (as masks, lexicographic) with |tau(A, x, V')| > phi at |chi(x,W)| = |A|."""
        key = (x, a_mask)
        if key not in self._violating_cache:
            cx = self.chi_u[x - 1]
            m = self.chi_u_size[x - 1]
            phi = self.phi(m, a_mask.bit_count())
            out = []
            for combo in itertools.combinations(self.ground, self.config.v):
                vm = mask_of(combo)
                if len(self.tau(a_mask, vm | cx, m)) > phi:
                    out.append(vm)
            self._violating_cache[key] = out
        return self._violating_cache[key]

    # -- encoding -----------------------------------------------------------

    def encode(self, x: int, V: Iterable[int]) -> EncodedPair:
        V = frozenset(V)
        if not 1 <= x <= self.ell:
            raise IndexError(f"x={x} outside 1..{self.ell}")
        if len(V) != self.config.v:
            raise ValueError(f"|V|={len(V)} but v={self.config.v}")
        if V & self.config.U:
            raise ValueError("V intersects U")
        v_mask = mask_of(V)
        if v_mask & ~self.g_mask:
            raise ValueError("V is not inside the ground set")
        cx = self.chi_u[x - 1]
        m = self.chi_u_size[x - 1]
        s = self.chi_w(x, v_mask).bit_count()
        phi = self.phi(m, s)
        cx_elems = elements_of(cx)
        violating = self._first_violating_a(x, v_mask, s, phi)

        if violating is not None:
            calv = self.violating_vs(x, violating)
            fields = {
                "case": "1",
                "a": encode_fixed(x - 1, self.ell),
                "b": bitmap_encode(elements_of(violating), cx_elems),
                "c": encode_fixed(calv.index(v_mask), len(calv)),
            }
            return EncodedPair(x, V, 1, fields, m, s, phi)

        t_mask = v_mask | cx
        G = self.ground
        j = self._minimizer_j(t_mask)
        assert j is not None and self.chi_u_size[j - 1] <= m, "x itself is a candidate for j"
        cj_elems = elements_of(self.chi_u[j - 1])
        inter = elements_of(cx & self.chi_u[j - 1])
        assert s <= len(inter), f"|chi(x,W)|={s} exceeds |chi(j,U) ∩ chi(x,U)|={len(inter)}"
        a_mask = mask_of(inter[:s])
        tau = self.tau(a_mask, t_mask, m)
        assert x in tau, "x must belong to its own tau set"
        fields = {
            "case": "0",
            "a": unary_encode(m),
            "b": encode_fixed(
                rank_subset(G, self.config.v, self.config.v + m, elements_of(t_mask)),
                subset_total(len(G), self.config.v, self.config.v + m),
            ),
            "c": bitmap_encode(inter, cj_elems),
            "c_prime": unary_encode(s),
            "d": encode_fixed(tau.index(x), len(tau)),
            "e": bitmap_encode(elements_of(v_mask & cx), cx_elems),
        }
        return EncodedPair(x, V, 0, fields, m, s, phi, len(tau))

    # -- decoding -----------------------------------------------------------

    def decode(self, bits: str) -> tuple[int, frozenset[int]]:
        reader = BitReader(bits)
        case = reader.read(1)
        if case == "1":
            x = reader.read_fixed(self.ell) + 1
            cx = self.chi_u[x - 1]
            a_mask = mask_of(reader.read_bitmap(elements_of(cx)))
            calv = self.violating_vs(x, a_mask)
            if not calv:
                raise DecodeError("no violating V for the decoded (x, A)")
            v_mask = calv[reader.read_fixed(len(calv))]
        else:
            v = self.config.v
            m = reader.read_unary()
            if m > self.k:
                raise DecodeError(f"|chi(x,U)|={m} exceeds k={self.k}")
            total = subset_total(len(self.ground), v, v + m)
            if total == 0:
                raise DecodeError("no eligible sets for V ∪ chi(x,U)")
            t_mask = mask_of(unrank_subset(self.ground, v, v + m, reader.read_fixed(total)))
            j = self._minimizer_j(t_mask)
            if j is None:
                raise DecodeError("no member residual fits inside the decoded set")
            inter = sorted(reader.read_bitmap(elements_of(self.chi_u[j - 1])))
            s = reader.read_unary()
            if s > len(inter):
                raise DecodeError("|chi(x,W)| larger than the decoded intersection")
            tau = self.tau(mask_of(inter[:s]), t_mask, m)
            if not tau:
                raise DecodeError("empty tau set")
            x = tau[reader.read_fixed(len(tau))]
            cx = self.chi_u[x - 1]
            v_mask = (t_mask & ~cx) | mask_of(reader.read_bitmap(elements_of(cx)))
            if v_mask.bit_count() != v:
                raise DecodeError("decoded V has the wrong size")
        if not reader.exhausted:
            raise DecodeError(f"{len(bits) - reader.pos} trailing bits")
        return x, frozenset(elements_of(v_mask))

    def decode_checked(self, bits: str) -> tuple[int, frozenset[int]]:
        """Decode, then re-encode and insist on the same bits (catches config mismatch)."""
        x, V = self.decode(bits)
        if self.encode(x, V).bits != bits:
            raise DecodeError("re-encoding the decoded pair gives different bits")
        return x, V

    def pairs(self) -> Iterable[tuple[int, frozenset[int]]]:
        for x in range(1, self.ell + 1):
            for combo in itertools.combinations(self.ground, self.config.v):
                yield x, frozenset(combo)

    @property
    def pair_count(self) -> int:
        return self.ell * math.comb(len(self.ground), self.config.v)


@functools.lru_cache(maxsize=64)
def get_encoder(family: SetFamily, config: AuditConfig) -> Encoder:
    return Encoder(family, config)


def phi(family: SetFamily, config: AuditConfig, x: int, a_size: int) -> Fraction:
    enc = get_encoder(family, config)
    return enc.phi(enc.chi_u_size[x - 1], a_size)


def tau(family: SetFamily, config: AuditConfig, A: Iterable[int], x: int, V: Iterable[int]) -> list[int]:
    enc = get_encoder(family, config)
    a_mask, cx = mask_of(A), enc.chi_u[x - 1]
    if a_mask & ~cx:
        raise ValueError("A must be a subset of chi(x,U)")
    return enc.tau(a_mask, mask_of(V) | cx, enc.chi_u_size[x - 1])


def encode_pair(family: SetFamily, config: AuditConfig, x: int, V: Iterable[int]) -> str:
    return get_encoder(family, config).encode(x, V).bits


def decode_pair(family: SetFamily, config: AuditConfig, bits: str, verify: bool = True):
    enc = get_encoder(family, config)
    return enc.decode_checked(bits) if verify else enc.decode(bits)


def count_tally(
    family: SetFamily, config: AuditConfig, A: Iterable[int], B: Iterable[int], x: int, V: Iterable[int]
) -> int:
    """N(A,B,x,V): members of tau(A,x,V) whose chi(y,U) meets chi(x,U) exactly in B."""
    enc = get_encoder(family, config)
    a_mask, b_mask, cx = mask_of(A), mask_of(B), enc.chi_u[x - 1]
    if a_mask & ~b_mask or b_mask & ~cx:
        raise ValueError("need A ⊆ B ⊆ chi(x,U)")
    ys = enc.tau(a_mask, mask_of(V) | cx, enc.chi_u_size[x - 1])
    return sum(1 for y in ys if enc.chi_u[y - 1] & cx == b_mask)


def tally_bound(family: SetFamily, config: AuditConfig, B: Iterable[int], x: int) -> Fraction:
    """r^(k-|B|) (v/(n-u-k))^(|chi(x,U)|-|B|)."""
    enc = get_encoder(family, config)
    b = len(frozenset(B))
    room = enc.n - len(config.U) - enc.k
    if room <= 0:
        raise ValueError("n - u - k must be positive")
    return config.r ** (enc.k - b) * Fraction(config.v, room) ** (enc.chi_u_size[x - 1] - b)


@dataclass(frozen=True)
class TallySample:
    mean_tally: float
    mean_bound: float
    trials: int


def sample_tally(
    family: SetFamily, config: AuditConfig, A: Iterable[int], x: int, trials: int, seed: int
) -> TallySample:
    """Average N(A,B,x,V) over uniform B with A ⊆ B ⊆ chi(x,U) and uniform V, with the bound averaged alongside."""
    enc = get_encoder(family, config)
    A = frozenset(A)
    cx = frozenset(elements_of(enc.chi_u[x - 1]))
    if not A <= cx:
        raise ValueError("A must be a subset of chi(x,U)")
    free = sorted(cx - A)
    rng = random.Random(seed)
    tally = bound = 0
    for _ in range(trials):
        B = A | {e for e in free if rng.random() < 0.5}
        V = rng.sample(enc.ground, config.v)
        tally += count_tally(family, config, A, B, x, V)
        bound += tally_bound(family, config, B, x)
    return TallySample(tally / trials, float(bound) / trials, trials)


# -- audit --------------------------------------------------------------------


@dataclass
class PairRecord:
    x: int
    V: tuple[int, ...]
    case: int
    total_bits: int
    field_bits: dict[str, int]
    chi_u: int
    chi_w: int


@dataclass
class AuditReport:
    pair_count: int
    records: list[PairRecord]
    prefix_free: bool
    prefix_witness: tuple[int, int] | None
    round_trip: bool
    decode_failures: list[tuple[int, tuple[int, ...], str]]
    mean_length: Fraction
    log_pairs: float
    converse_holds: bool
    contraction: tuple[Fraction, Fraction]
    regression: dict[str, float]
    case_counts: dict[int, int]
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.prefix_free and self.round_trip and self.converse_holds

    def summary(self) -> str:
        ew, eu = self.contraction
        lines = [
            f"pairs: {self.pair_count}",
            f"cases: 0 -> {self.case_counts.get(0, 0)}, 1 -> {self.case_counts.get(1, 0)}",
            f"prefix-free: {'yes' if self.prefix_free else f'no {self.prefix_witness}'}",
            f"round trip: {'ok' if self.round_trip else f'{len(self.decode_failures)} failures'}",
            f"mean length: {self.mean_length} ≈ {float(self.mean_length):.4f} bits",
            f"log2(pairs): {self.log_pairs:.4f}  converse holds: {self.converse_holds}",
            f"E|chi(X,W)| = {ew} ≈ {float(ew):.4f}, E|chi(X,U)| = {eu} ≈ {float(eu):.4f}",
            "excess length ≈ {intercept:.3f} + {chi_u:.3f}*|chi(X,U)| + {chi_w:.3f}*|chi(X,W)|".format(
                **self.regression
            ),
        ]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        names = CASE0_FIELDS
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["x", "V", "case", "total_bits", *(f"bits_{f}" for f in names), "chi_u", "chi_w"])
            for rec in self.records:
                out.writerow(
                    [rec.x, ",".join(map(str, rec.V)), rec.case, rec.total_bits]
                    + [rec.field_bits.get(f, "") for f in names]
                    + [rec.chi_u, rec.chi_w]
                )


def side_conditions(family: SetFamily, config: AuditConfig) -> list[str]:
    n, k, u = family.n, family.k, len(config.U)
    out = []
    if 3 * (n - u - k) < n:
        out.append(f"n - u - k = {n - u - k} < n/3")
    if n <= 6 * k:
        out.append(f"n/k = {Fraction(n, k) if k else 'inf'} <= 6")
    return out


def excess_regression(records: list[PairRecord], log_pairs: float) -> dict[str, float]:
    """Least squares of (length - log2 pairs) on 1, |chi(X,U)|, |chi(X,W)|.

    A regressor that is constant over the audit is absorbed by the intercept
    and reported as nan.
    """
    y = np.array([r.total_bits for r in records], dtype=float) - log_pairs
    cols = {"chi_u": [r.chi_u for r in records], "chi_w": [r.chi_w for r in records]}
    varying = [name for name, col in cols.items() if len(set(col)) > 1]
    design = np.column_stack([np.ones(len(records))] + [cols[name] for name in varying])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    out = {"intercept": float(coef[0]), "chi_u": math.nan, "chi_w": math.nan}
    out.update({name: float(c) for name, c in zip(varying, coef[1:])})
    return out


def audit(family: SetFamily, config: AuditConfig, budget: int = DEFAULT_PAIR_BUDGET) -> AuditReport:
    enc = get_encoder(family, config)
    if enc.pair_count > budget:
        raise BudgetExceeded(f"{enc.pair_count} pairs exceed the budget {budget}")
    if enc.pair_count == 0:
        raise ValueError("no (x, V) pairs: v exceeds |[n] - U|")
    notes = side_conditions(family, config)
    for note in notes:
        warnings.warn(note, ParameterWarning, stacklevel=2)

    records, words, failures = [], [], []
    sum_w = sum_u = 0
    for x, V in enc.pairs():
        pair = enc.encode(x, V)
        bits = pair.bits
        words.append(bits)
        try:
            if enc.decode(bits) != (x, V):
                failures.append((x, tuple(sorted(V)), "decoded to a different pair"))
        except DecodeError as exc:
            failures.append((x, tuple(sorted(V)), str(exc)))
        records.append(
            PairRecord(
                x,
                tuple(sorted(V)),
                pair.case,
                len(bits),
                {name: len(f) for name, f in pair.fields.items()},
                pair.chi_u,
                pair.chi_w,
            )
        )
        sum_w += pair.chi_w
        sum_u += pair.chi_u

    count = len(words)
    total = sum(len(w) for w in words)
    witness = first_prefix_pair(words)
    regression = excess_regression(records, math.log2(count))
    case_counts: dict[int, int] = {}
    for r in records:
        case_counts[r.case] = case_counts.get(r.case, 0) + 1
    return AuditReport(
        pair_count=count,
        records=records,
        prefix_free=witness is None,
        prefix_witness=witness,
        round_trip=not failures,
        decode_failures=failures,
        mean_length=Fraction(total, count),
        log_pairs=math.log2(count),
        converse_holds=(1 << total) >= count**count,
        contraction=(Fraction(sum_w, count), Fraction(sum_u, count)),
        regression=regression,
        case_counts=case_counts,
        warnings=notes,
    )
