import itertools
from fractions import Fraction

import pytest

from conftest import brute_has_sunflower
from sunflowers.family import (
    SetFamily,
    SpreadParams,
    complete_family,
    from_lists,
    generate_extremal,
    generate_random_family,
    link,
    spread_check,
)
from sunflowers.finder import (
    find_disjoint_by_partition,
    find_sunflower_erdos_rado,
    find_sunflower_spread,
    greedy_disjoint,
    is_sunflower,
    sample_partition,
)

SMALL_ALPHA = Fraction(101, 100)


def singletons(n):
    return from_lists(n, 1, [[i] for i in range(1, n + 1)])


def test_is_sunflower_examples():
    assert is_sunflower(from_lists(4, 2, [[1, 2], [1, 3], [1, 4]]), [1, 2, 3]) == frozenset({1})
    assert is_sunflower(from_lists(6, 2, [[1, 2], [3, 4], [5, 6]]), [1, 2, 3]) == frozenset()
    assert is_sunflower(from_lists(3, 2, [[1, 2], [2, 3], [1, 3]]), [1, 2, 3]) is None


@pytest.mark.parametrize("indices", [[1, 1], [1, 4], [1]])
def test_is_sunflower_rejects(indices, tri):
    with pytest.raises((ValueError, IndexError)):
        is_sunflower(tri, indices)


# -- Erdős–Rado -------------------------------------------------------------------


def test_erdos_rado_nine_pairs():
    for seed in range(20):
        fam = generate_random_family(8, 2, 9, seed, distinct=True)
        found = find_sunflower_erdos_rado(fam, 3)
        assert found is not None
        assert is_sunflower(fam, found.petals) == found.core


def test_erdos_rado_two_singletons():
    found = find_sunflower_erdos_rado(from_lists(2, 1, [[1], [2]]), 2)
    assert found.core == frozenset() and found.petals == (1, 2)


def test_erdos_rado_extremal_none():
    fam = generate_extremal(3, 2)
    assert not brute_has_sunflower(fam.sets, 3)
    assert find_sunflower_erdos_rado(fam, 3) is None


def test_erdos_rado_rejects_repeats():
    with pytest.raises(ValueError):
        find_sunflower_erdos_rado(from_lists(3, 2, [[1, 2], [1, 2]]), 2)


def test_erdos_rado_complete_for_3_2():
    # every family of more than (3-1)^2 * 2! = 8 distinct 2-sets has a 3-sunflower
    for n in (6, 7):
        for seed in range(40):
            ell = 9 + seed % 6
            fam = generate_random_family(n, 2, ell, seed, distinct=True)
            assert brute_has_sunflower(fam.sets, 3)
            found = find_sunflower_erdos_rado(fam, 3)
            assert found is not None and is_sunflower(fam, found.petals) == found.core


def test_greedy_disjoint_is_maximal():
    fam = generate_random_family(9, 3, 10, seed=4, distinct=True)
    chosen = greedy_disjoint(fam)
    used = frozenset().union(*(fam[i] for i in chosen))
    assert all(fam[i] & used for i in range(1, len(fam) + 1) if i not in chosen)


# -- partitions --------------------------------------------------------------------


def test_partition_even():
    part = sample_partition(6, 3, seed=0)
    assert part.sizes == (2, 2, 2)
    assert frozenset().union(*part.parts) == frozenset(range(1, 7))


def test_partition_remainder():
    assert sample_partition(7, 3, seed=0).sizes == (3, 2, 2)


def test_partition_seeded():
    assert sample_partition(10, 3, seed=11) == sample_partition(10, 3, seed=11)


def test_partition_too_small():
    with pytest.raises(ValueError):
        sample_partition(2, 3, seed=0)


@pytest.mark.parametrize("n,p", [(5, 2), (9, 4), (10, 3), (12, 5)])
def test_partition_validity(n, p):
    for seed in range(30):
        parts = sample_partition(n, p, seed=seed).parts
        assert sum(len(x) for x in parts) == n
        assert frozenset().union(*parts) == frozenset(range(1, n + 1))
        assert all(len(x) >= n // p for x in parts)


def test_disjoint_singletons_first_sample():
    assert find_disjoint_by_partition(singletons(6), 3, max_iters=1, seed=0) is not None


def test_disjoint_impossible():
    assert find_disjoint_by_partition(from_lists(3, 2, [[1, 2], [1, 3]]), 2, 200, seed=0) is None


def test_disjoint_complete_family():
    fam = complete_family(8, 2)
    ys = find_disjoint_by_partition(fam, 3, max_iters=100, seed=5)
    assert ys is not None and len(ys) == 3
    for a, b in itertools.combinations(ys, 2):
        assert not fam[a] & fam[b]


# -- spread induction ------------------------------------------------------------------


def test_spread_singletons():
    params = SpreadParams(p=3, alpha=SMALL_ALPHA)
    found = find_sunflower_spread(singletons(15), 3, params, seed=0)
    assert found.core == frozenset() and len(found.petals) == 3


def test_spread_recurses_on_witness():
    fam = from_lists(9, 2, [[9, i] for i in range(1, 9)])
    found = find_sunflower_spread(fam, 3, SpreadParams(p=3, alpha=SMALL_ALPHA), seed=0)
    assert found is not None and found.core == frozenset({9})
    assert is_sunflower(fam, found.petals) == frozenset({9})


def test_spread_extremal_none():
    assert find_sunflower_spread(generate_extremal(3, 2), 3, SpreadParams(p=3), seed=0) is None


def test_spread_repeats():
    fam = from_lists(4, 2, [[1, 2], [1, 2], [1, 2], [3, 4]])
    assert find_sunflower_spread(fam, 3, seed=0) is None
    found = find_sunflower_spread(fam, 3, seed=0, allow_repeats=True)
    assert found.petals == (1, 2, 3) and found.core == frozenset({1, 2})


def test_spread_partition_branch():
    # 4-regular circulant on [10]: 20 edges > r^2 = 16 with r = 1*2*log2(4) = 4, and 4-spread
    fam = from_lists(10, 2, [[i, (i + d - 1) % 10 + 1] for i in range(1, 11) for d in (1, 2)])
    params = SpreadParams(p=2, alpha=1)
    assert spread_check(fam, 4).spread
    found = find_sunflower_spread(fam, 2, params, max_iters=50, seed=3)
    assert found is not None and found.core == frozenset()
    assert is_sunflower(fam, found.petals) == frozenset()


def test_soundness_battery():
    for seed in range(150):
        n, k = 5 + seed % 5, 1 + seed % 3
        fam = generate_random_family(n, k, 4 + seed % 9, seed)
        for p in (2, 3):
            found = find_sunflower_spread(fam, p, SpreadParams(p=p, alpha=SMALL_ALPHA), max_iters=30, seed=seed)
            if found is not None:
                assert is_sunflower(fam, found.petals) == found.core
                assert len({fam[i] for i in found.petals}) == p
            if not fam.has_repeats():
                er = find_sunflower_erdos_rado(fam, p)
                if er is not None:
                    assert is_sunflower(fam, er.petals) == er.core


def test_core_reattachment():
    fam = from_lists(7, 3, [[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6]])
    sub = link(fam, {1})
    core = is_sunflower(sub, [1, 2, 3])
    assert core == frozenset()
    assert is_sunflower(fam, [1, 2, 3]) == core | {1}
