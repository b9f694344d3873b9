import itertools
import math
import random
import warnings
from fractions import Fraction

import mpmath
import pytest

from conftest import brute_chi, spread_family
from sunflowers.audit import (
    AuditConfig,
    Encoder,
    ParameterWarning,
    audit,
    count_tally,
    decode_pair,
    encode_pair,
    phi,
    sample_tally,
    side_conditions,
    tally_bound,
    tau,
)
from sunflowers.coding import DecodeError
from sunflowers.family import BudgetExceeded, from_lists, generate_extremal, generate_random_family

SWEEP_FAMILY = generate_random_family(8, 2, 8, seed=1, distinct=True)


def cfg(U=(), v=3, rho=2, r=2):
    return AuditConfig(frozenset(U), v, rho, r)


def agrees_with_log_route(value, r, k, rho, v, n, m, s):
    # second route: evaluate the exponent sum in log space, then exponentiate
    with mpmath.workdps(60):
        r, rho, value = (mpmath.mpf(q.numerator) / q.denominator for q in (Fraction(r), Fraction(rho), value))
        lg = k * mpmath.log(r, 2) + m * mpmath.log(rho * v / n, 2) - s * mpmath.log(v * r / n, 2)
        return abs(value / mpmath.power(2, lg) - 1) < mpmath.mpf(10) ** -40


# -- phi / tau -------------------------------------------------------------------


def test_phi_example():
    fam = from_lists(8, 2, [[1, 2], [3, 4]])
    config = AuditConfig(frozenset({1}), 2, 2, 4)
    assert phi(fam, config, 1, 0) == 8


def test_phi_cancels_when_rho_equals_r():
    fam = generate_random_family(8, 2, 5, seed=2, distinct=True)
    config = cfg(rho=3, r=3)
    for x in range(1, 6):
        m = Encoder(fam, config).chi_u_size[x - 1]
        assert phi(fam, config, x, m) == 9


def test_phi_against_log_route():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(6, 12)
        k = rng.randint(1, 3)
        fam = generate_random_family(n, k, rng.randint(1, 6), seed=rng.randrange(1000))
        U = frozenset(rng.sample(range(1, n + 1), rng.randint(0, 2)))
        config = AuditConfig(U, rng.randint(1, 3), Fraction(rng.randint(3, 40), rng.randint(1, 3)), Fraction(rng.randint(3, 40), rng.randint(1, 3)))
        x = rng.randint(1, len(fam))
        m = len(brute_chi(fam.sets, x, U)[0])
        s = rng.randint(0, m)
        got = phi(fam, config, x, s)
        direct = config.r**k * Fraction(config.rho * config.v, n) ** m / Fraction(config.v * config.r, n) ** s
        assert got == direct
        assert agrees_with_log_route(got, config.r, k, config.rho, config.v, n, m, s)


def test_tau_self_membership():
    fam = SWEEP_FAMILY
    config = cfg()
    for x in range(1, len(fam) + 1):
        cx = brute_chi(fam.sets, x, ())[0]
        assert x in tau(fam, config, cx, x, {})


def test_tau_full_v():
    fam = generate_random_family(8, 2, 8, seed=4)
    config = cfg(U={1})
    V = set(range(2, 9))
    sizes = [len(brute_chi(fam.sets, y, {1})[0]) for y in range(1, 9)]
    for x in range(1, 9):
        expected = [y for y in range(1, 9) if sizes[y - 1] == sizes[x - 1]]
        assert tau(fam, config, (), x, V) == expected


def test_tau_extremal_hand_filter():
    fam = generate_extremal(3, 2)
    config = AuditConfig(frozenset(), 2, 4, 2)
    # S_y ⊆ V ∪ S_1 = {1,2,3} with |S_y| = 2: {1,3} and {2,3}
    assert tau(fam, config, (), 1, {2, 3}) == [1, 3]
    brute = [y for y in range(1, 5) if fam[y] <= {1, 2, 3}]
    assert tau(fam, config, (), 1, {2, 3}) == brute


def test_tau_requires_subset():
    with pytest.raises(ValueError):
        tau(generate_extremal(3, 2), AuditConfig(frozenset(), 2, 4, 2), {4}, 1, {2, 3})


# -- encode / decode --------------------------------------------------------------


def all_pairs(fam, config):
    ground = [e for e in range(1, fam.n + 1) if e not in config.U]
    for x in range(1, len(fam) + 1):
        for V in itertools.combinations(ground, config.v):
            yield x, frozenset(V)


@pytest.mark.parametrize("U", [(), (1, 2)])
@pytest.mark.parametrize("rho", [2, 4])
def test_exhaustive_round_trip_and_prefix_scan(U, rho):
    fam, config = SWEEP_FAMILY, cfg(U=U, rho=rho)
    words = {}
    for x, V in all_pairs(fam, config):
        bits = encode_pair(fam, config, x, V)
        assert decode_pair(fam, config, bits) == (x, V)
        words[(x, V)] = bits
    assert len(words) == 8 * math.comb(8 - len(U), 3)
    ws = list(words.values())
    for a, b in itertools.permutations(ws, 2):
        assert not b.startswith(a)


def test_case_zero_when_w_covers():
    fam, config = SWEEP_FAMILY, cfg()
    enc = Encoder(fam, config)
    seen = 0
    for x, V in all_pairs(fam, config):
        pair = enc.encode(x, V)
        if pair.case == 0 and pair.chi_w == 0:
            seen += 1
            assert pair.fields["c_prime"] == "1"
            assert any(fam[y] <= V for y in range(1, len(fam) + 1))
    assert seen > 0


def test_case_zero_invariants():
    fam, config = SWEEP_FAMILY, cfg(rho=4)
    enc = Encoder(fam, config)
    for x, V in all_pairs(fam, config):
        pair = enc.encode(x, V)
        if pair.case:
            continue
        # j minimality and the |chi(x,W)| <= |chi(j,U) ∩ chi(x,U)| claim, recomputed by brute force
        W = frozenset(V) | config.U
        cu = [brute_chi(fam.sets, y, config.U)[0] for y in range(1, len(fam) + 1)]
        T = V | cu[x - 1]
        j = min((len(c), y) for y, c in enumerate(cu, start=1) if c <= T)[1]
        assert len(cu[j - 1]) <= len(cu[x - 1])
        assert len(brute_chi(fam.sets, x, W)[0]) <= len(cu[j - 1] & cu[x - 1])


def test_both_cases_occur():
    fam = SWEEP_FAMILY
    cases = {Encoder(fam, cfg(rho=2)).encode(x, V).case for x, V in all_pairs(fam, cfg(rho=2))}
    assert cases == {0, 1}


def test_truncation_errors():
    fam, config = SWEEP_FAMILY, cfg()
    for x, V in all_pairs(fam, config):
        bits = encode_pair(fam, config, x, V)
        with pytest.raises(DecodeError):
            decode_pair(fam, config, bits[:-1])


def test_trailing_bits_error():
    fam, config = SWEEP_FAMILY, cfg()
    bits = encode_pair(fam, config, 1, {3, 4, 5})
    with pytest.raises(DecodeError):
        decode_pair(fam, config, bits + "0", verify=False)


def test_config_mismatch_is_flagged():
    fam = SWEEP_FAMILY
    c2, c4 = cfg(rho=2), cfg(rho=4)
    differing = 0
    for x, V in all_pairs(fam, c2):
        bits = encode_pair(fam, c2, x, V)
        if bits != encode_pair(fam, c4, x, V):
            differing += 1
        try:
            got = decode_pair(fam, c4, bits)
        except DecodeError:
            continue
        # accepted only when the bits are also the rho=4 codeword of the decoded pair
        assert encode_pair(fam, c4, *got) == bits
    assert differing > 0


def test_encode_rejects_bad_v():
    fam, config = SWEEP_FAMILY, cfg(U=(1, 2))
    with pytest.raises(ValueError):
        encode_pair(fam, config, 1, {3, 4})
    with pytest.raises(ValueError):
        encode_pair(fam, config, 1, {1, 3, 4})


# -- tallies ------------------------------------------------------------------------


def test_tally_self_count():
    fam, config = SWEEP_FAMILY, cfg()
    for x, V in all_pairs(fam, config):
        cx = brute_chi(fam.sets, x, ())[0]
        assert count_tally(fam, config, (), cx, x, V) >= 1


def test_tally_partitions_tau():
    fam, config = SWEEP_FAMILY, cfg(U=(1,))
    for x, V in itertools.islice(all_pairs(fam, config), 0, None, 7):
        cx = sorted(brute_chi(fam.sets, x, {1})[0])
        for a_size in range(len(cx) + 1):
            for A in itertools.combinations(cx, a_size):
                rest = [e for e in cx if e not in A]
                total = sum(
                    count_tally(fam, config, A, set(A) | set(extra), x, V)
                    for s in range(len(rest) + 1)
                    for extra in itertools.combinations(rest, s)
                )
                assert total == len(tau(fam, config, A, x, V))


def test_tally_average_below_bound():
    r = 3
    fam, _ = spread_family(8, 2, 8, r)
    config = cfg(v=3, rho=4, r=r)
    assert 3 * (8 - 0 - 2) >= 8
    for x in (1, 4, 7):
        sample = sample_tally(fam, config, (), x, trials=10_000, seed=x)
        assert sample.mean_tally < sample.mean_bound
        # exact expectation over all B and V, as a cross-check of the sampled comparison
        cx = sorted(brute_chi(fam.sets, x, ())[0])
        Bs = [set(c) for s in range(len(cx) + 1) for c in itertools.combinations(cx, s)]
        Vs = list(itertools.combinations(range(1, 9), 3))
        exact = Fraction(sum(count_tally(fam, config, (), B, x, V) for B in Bs for V in Vs), len(Bs) * len(Vs))
        bound = sum(tally_bound(fam, config, B, x) for B in Bs) / len(Bs)
        assert exact <= bound


# -- audit ---------------------------------------------------------------------------


def test_audit_mean_length_and_flags():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = audit(SWEEP_FAMILY, cfg())
    assert any(issubclass(w.category, ParameterWarning) for w in caught)
    assert rep.prefix_free and rep.round_trip and rep.converse_holds
    assert rep.mean_length >= rep.log_pairs
    assert rep.pair_count == 8 * 56


def test_audit_nothing_to_prove():
    fam = from_lists(8, 2, [[1, 2], [3, 4], [5, 6]])
    rep = audit(fam, cfg(U=(1, 2)))
    assert rep.contraction == (0, 0)
    assert rep.ok


def test_audit_extremal_golden():
    fam = generate_extremal(3, 2)
    config = AuditConfig(frozenset(), 2, 4, 2)
    rep = audit(fam, config)
    # brute force over all (x, V) with the definition-level chi
    pairs = [(x, V) for x in range(1, 5) for V in itertools.combinations(range(1, 5), 2)]
    ew = Fraction(sum(len(brute_chi(fam.sets, x, V)[0]) for x, V in pairs), len(pairs))
    eu = Fraction(sum(len(brute_chi(fam.sets, x, ())[0]) for x, V in pairs), len(pairs))
    assert rep.contraction == (ew, eu) == (Fraction(1, 3), Fraction(2))
    assert rep.prefix_free and rep.round_trip


def test_audit_budget():
    with pytest.raises(BudgetExceeded):
        audit(SWEEP_FAMILY, cfg(), budget=10)


def test_audit_csv(tmp_path):
    rep = audit(generate_extremal(3, 2), AuditConfig(frozenset(), 2, 4, 2))
    out = tmp_path / "audit.csv"
    rep.write_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("x,V,case,total_bits,bits_case")
    assert lines[0].endswith("chi_u,chi_w")
    assert len(lines) == 1 + rep.pair_count


def test_side_conditions():
    assert side_conditions(generate_random_family(30, 2, 3, seed=0), cfg()) == []
    assert len(side_conditions(SWEEP_FAMILY, cfg(U=(1, 2, 3, 4)))) == 2
