"""Exact enumerators, seeded Monte Carlo estimators and brute-force oracles.

Stochastic estimators split their trials into fixed-size chunks, each driven by
its own sub-seed spawned from the caller's seed.  The chunking never depends
on the worker count, so results are identical for any ``threads`` value.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .chi import chi_mask, chi_sizes, covers_mask
from .family import BudgetExceeded, SetFamily, SpreadParams, as_fraction, mask_of, r_threshold
from .finder import Sunflower, covered_by_partition, sample_partition

ENUM_BUDGET = 5_000_000
TUPLE_BUDGET = 2_000_000
DISJOINT_BUDGET = 64
CHUNK = 1024
Z95 = 1.959963984540054


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    halfwidth: float
    trials: int
    interval: tuple[float, float] | None = None


@dataclass(frozen=True)
class ExperimentRecord:
    statistic: str
    m_or_w: int | None
    value: Fraction | float
    ci_halfwidth: float | None
    trials: int | None
    seed: int | None
    family_hash: str
    note: str = ""

    @property
    def exact(self) -> bool:
        return self.ci_halfwidth is None


# -- parallel plumbing ---------------------------------------------------------


def _sub_seeds(seed: int, chunks: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(chunks)]


def _run_chunks(worker: Callable, args: tuple, trials: int, seed: int, threads: int | None):
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sizes = [CHUNK] * (trials // CHUNK) + ([trials % CHUNK] if trials % CHUNK else [])
    jobs = [(args, size, sub) for size, sub in zip(sizes, _sub_seeds(seed, len(sizes)))]
    if threads and threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(worker, jobs))
    else:
        parts = [worker(job) for job in jobs]
    return sum(s for s, _ in parts), sum(q for _, q in parts)


def _estimate(total: int, total_sq: int, trials: int) -> Estimate:
    mean = total / trials
    if trials > 1:
        var = (total_sq - total * total / trials) / (trials - 1)
        se = math.sqrt(max(var, 0.0) / trials)
    else:
        se = 0.0
    return Estimate(mean, se, Z95 * se, trials, (mean - Z95 * se, mean + Z95 * se))


# -- chi expectation -------------------------------------------------------------


def _check_w(family: SetFamily, w: int) -> None:
    if not 0 <= w <= family.n:
        raise ValueError(f"w={w} outside 0..{family.n}")
    if len(family) < 1:
        raise ValueError("empty family")


def exact_chi_expectation(family: SetFamily, w: int, budget: int = ENUM_BUDGET) -> Fraction:
    """Mean of |chi(X,W)| over uniform X and uniform W of size exactly w."""
    _check_w(family, w)
    work = math.comb(family.n, w) * len(family)
    if work > budget:
        raise BudgetExceeded(f"C(n,w)*ell = {work} exceeds the budget {budget}")
    total = 0
    for W in itertools.combinations(family.ground, w):
        total += sum(chi_sizes(family.masks, mask_of(W)))
    return Fraction(total, work)


def _chi_chunk(job):
    (masks, n, w), size, sub = job
    rng = random.Random(sub)
    ground = range(1, n + 1)
    s = q = 0
    for _ in range(size):
        x = rng.randrange(len(masks)) + 1
        c = chi_mask(masks, x, mask_of(rng.sample(ground, w)))[0].bit_count()
        s += c
        q += c * c
    return s, q


def estimate_chi_expectation(
    family: SetFamily, w: int, trials: int, seed: int, threads: int | None = 1
) -> Estimate:
    _check_w(family, w)
    total, total_sq = _run_chunks(_chi_chunk, (family.masks, family.n, w), trials, seed, threads)
    return _estimate(total, total_sq, trials)


# -- coverage ------------------------------------------------------------------


def exact_coverage(family: SetFamily, w: int, budget: int = ENUM_BUDGET) -> Fraction:
    _check_w(family, w)
    count = math.comb(family.n, w)
    if count * len(family) > budget:
        raise BudgetExceeded(f"C(n,w)*ell = {count * len(family)} exceeds the budget {budget}")
    hits = sum(
        covers_mask(family.masks, mask_of(W)) is not None
        for W in itertools.combinations(family.ground, w)
    )
    return Fraction(hits, count)


def _coverage_chunk(job):
    (masks, n, w), size, sub = job
    rng = random.Random(sub)
    ground = range(1, n + 1)
    hits = sum(covers_mask(masks, mask_of(rng.sample(ground, w))) is not None for _ in range(size))
    return hits, hits


def coverage_probability(
    family: SetFamily,
    w: int,
    exact: bool = False,
    trials: int | None = None,
    seed: int | None = None,
    binomial: bool = False,
    threads: int | None = 1,
    budget: int = ENUM_BUDGET,
) -> Fraction | Estimate:
    """Pr[some member lies inside a uniform w-set]: exact rational or seeded estimate.

    With ``binomial`` the interval is Clopper–Pearson instead of the normal
    approximation.
    """
    if exact:
        return exact_coverage(family, w, budget)
    if trials is None or seed is None:
        raise ValueError("sampling mode needs trials and seed")
    _check_w(family, w)
    hits, _ = _run_chunks(_coverage_chunk, (family.masks, family.n, w), trials, seed, threads)
    est = _estimate(hits, hits, trials)
    if binomial:
        lo = stats.beta.ppf(0.025, hits, trials - hits + 1) if hits > 0 else 0.0
        hi = stats.beta.ppf(0.975, hits + 1, trials - hits) if hits < trials else 1.0
        est = Estimate(est.mean, est.stderr, (hi - lo) / 2, trials, (float(lo), float(hi)))
    return est


# -- contraction schedule ----------------------------------------------------------


def schedule_sizes(n: int, r: Fraction, kappa: Fraction, m_max: int) -> list[int]:
    """|W| = ceil(kappa m n / r) for m = 0..m_max."""
    sizes = [math.ceil(kappa * m * n / r) for m in range(m_max + 1)]
    if sizes and sizes[-1] > n:
        raise ValueError(f"schedule size {sizes[-1]} at m={m_max} exceeds n={n}")
    return sizes


def contraction_schedule(
    family: SetFamily,
    params: SpreadParams,
    kappa,
    m_max: int,
    seed: int,
    trials: int = 10_000,
    r=None,
    budget: int = ENUM_BUDGET,
    threads: int | None = 1,
) -> list[ExperimentRecord]:
    """E|chi(X,W)| along the induction schedule, with the ratio to the previous level.

    ``r`` defaults to the lemma-form threshold for (beta, gamma, epsilon, k).
    Levels small enough are enumerated exactly, the rest are estimated.
    """
    kappa = as_fraction(kappa)
    r = as_fraction(r) if r is not None else r_threshold(params, family.k, form="lemma")
    sizes = schedule_sizes(family.n, r, kappa, m_max)
    note = "" if params.in_paper_regime else "outside paper regime"
    digest = family.digest()
    subs = _sub_seeds(seed, len(sizes))
    out: list[ExperimentRecord] = []
    prev = None
    for m, w in enumerate(sizes):
        if math.comb(family.n, w) * len(family) <= budget:
            value = exact_chi_expectation(family, w, budget)
            rec = ExperimentRecord("chi_expectation", m, value, None, None, seed, digest, note)
            current = value
        else:
            est = estimate_chi_expectation(family, w, trials, subs[m], threads)
            rec = ExperimentRecord("chi_expectation", m, est.mean, est.halfwidth, trials, seed, digest, note)
            current = est.mean
        out.append(rec)
        out.append(ExperimentRecord("schedule_size", m, w, None, None, seed, digest, note))
        if prev is not None and prev != 0:
            ratio = current / prev
            out.append(ExperimentRecord("ratio_to_previous", m, ratio, None, None, seed, digest, note))
        prev = current
    return out


# -- partitions ----------------------------------------------------------------------


def _partition_chunk(job):
    (family, p), size, sub = job
    rng = random.Random(sub)
    hits = sum(
        covered_by_partition(family, sample_partition(family.n, p, rng=rng)) is not None
        for _ in range(size)
    )
    return hits, hits


def partition_success_rate(
    family: SetFamily, p: int, trials: int, seed: int, threads: int | None = 1
) -> Estimate:
    """Fraction of random p-partitions in which every part contains a member."""
    if family.n < p:
        raise ValueError(f"n={family.n} < p={p}")
    hits, _ = _run_chunks(_partition_chunk, (family, p), trials, seed, threads)
    return _estimate(hits, hits, trials)


# -- oracles -------------------------------------------------------------------------


def brute_force_sunflowers(
    family: SetFamily, p: int, distinct: bool = True, budget: int = TUPLE_BUDGET
) -> list[Sunflower]:
    """Every p-tuple of indices whose members pairwise meet in one common core."""
    if p < 2:
        raise ValueError("p must be at least 2")
    if math.comb(len(family), p) > budget:
        raise BudgetExceeded(f"C(ell,p) = {math.comb(len(family), p)} exceeds the budget {budget}")
    masks = family.masks
    found = []
    for combo in itertools.combinations(range(len(masks)), p):
        ms = [masks[i] for i in combo]
        if distinct and len(set(ms)) < p:
            continue
        core = ms[0] & ms[1]
        if all(a & b == core for a, b in itertools.combinations(ms, 2)):
            found.append(Sunflower(family[combo[0] + 1] & family[combo[1] + 1], tuple(i + 1 for i in combo)))
    return found


def max_disjoint(family: SetFamily, budget: int = DISJOINT_BUDGET) -> list[int]:
    """Maximum pairwise-disjoint index set, lexicographically smallest among maxima."""
    if len(family) > budget:
        raise BudgetExceeded(f"ell = {len(family)} exceeds the backtracking budget {budget}")
    masks = family.masks
    ell = len(masks)
    best: list[int] = []
    chosen: list[int] = []

    # Include-first DFS meets equal-size sets in lexicographic order, so only
    # strictly larger sets replace the incumbent.
    def search(i: int, used: int) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = chosen.copy()
        if i == ell or len(chosen) + (ell - i) <= len(best):
            return
        if not masks[i] & used:
            chosen.append(i + 1)
            search(i + 1, used | masks[i])
            chosen.pop()
        search(i + 1, used)

    search(0, 0)
    return best


# -- output ----------------------------------------------------------------------------


def format_value(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records: Sequence[ExperimentRecord], fh) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(["statistic", "m_or_w", "value", "ci_halfwidth", "trials", "seed"])
    for rec in records:
        out.writerow(
            [
                rec.statistic,
                "" if rec.m_or_w is None else rec.m_or_w,
                format_value(rec.value),
                "" if rec.ci_halfwidth is None else repr(rec.ci_halfwidth),
                "" if rec.trials is None else rec.trials,
                "" if rec.seed is None else rec.seed,
            ]
        )
