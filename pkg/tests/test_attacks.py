import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from y00sim.attacks import (
    DegenerateEstimateWarning,
    Transcript,
    binarization_attack,
    binarization_ber_asymptotic,
    binarization_ber_oracle,
    binarize,
    heterodyne_keyed_decode,
    keystream_parity_table,
    ktilde,
    search_complexity,
    seed_recovery_bruteforce,
    simulate_transcript,
)
from y00sim.constellation import Constellation, amplitudes, encode
from y00sim.errors import DomainError, ResourceLimitError
from y00sim.keystream import (
    LfsrSpec,
    LfsrStream,
    SeedKey,
    bits_to_bases,
    running_key_sequence,
)
from y00sim.measurement import RngStream, heterodyne_error

SEARCH_SPEC = LfsrSpec(16, (16, 14, 13, 11))


def closed_form_binarization(M, alpha0):
    """Independent oracle: average of the normal upper tail over bases."""
    r = np.arange(M // 2)
    return float(np.mean(stats.norm.sf(math.sqrt(2) * alpha0 * np.abs(np.sin(2 * np.pi * r / M)))))


def random_bits(seed, n):
    return RngStream(seed, 0).generator().integers(0, 2, size=n, dtype=np.uint8)


@pytest.mark.parametrize("y, bit", [(1 + 2j, 0), (1 - 0.1j, 1), (-3 + 0j, 0)])
def test_binarize_examples(y, bit):
    assert binarize(y) == bit


def test_ktilde_examples():
    c = Constellation(16, 1.0)
    assert ktilde(1) == 1 and ktilde(2) == 0 and ktilde(0) == 0
    # noise-free check behind the rule: x = 0 in basis 1 lands in the lower half plane
    assert binarize(amplitudes(c, encode(c, 0, 1))) == 1


@pytest.mark.parametrize("M", [4, 8, 16, 128, 1024, 4096])
def test_noise_free_binarization_is_exact(M):
    c = Constellation(M, 1.0)
    r = np.repeat(np.arange(1, M // 2), 2)
    x = np.tile(np.array([0, 1], dtype=np.uint8), M // 2 - 1)
    assert binarization_attack(Transcript.noise_free(c, x, r)).errors == 0


@given(st.integers(min_value=2, max_value=12).map(lambda k: 1 << k),
       st.floats(min_value=0.0, max_value=300.0))
def test_binarization_oracle_matches_closed_form(M, alpha0):
    assert binarization_ber_oracle(M, alpha0) == pytest.approx(
        closed_form_binarization(M, alpha0), rel=1e-7, abs=1e-14)


def test_binarization_oracle_limits():
    assert binarization_ber_oracle(128, 0.0) == pytest.approx(0.5)
    # only the on-axis basis keeps contributing as alpha0 grows
    assert binarization_ber_oracle(128, 1e4) == pytest.approx(0.5 / 64, rel=1e-9)


@pytest.mark.slow
def test_binarization_monte_carlo_alpha200():
    n = 10**7
    c = Constellation(128, 200.0)
    spec = LfsrSpec.default(32)
    r = bits_to_bases(LfsrStream(spec, SeedKey.from_int(0xC0FFEE, 32)).bits(6 * n), c)
    t = simulate_transcript(c, random_bits(4, n), r, master_seed=4)
    est = binarization_attack(t)
    oracle = binarization_ber_oracle(128, 200.0)
    assert est.within(oracle, 3.0), (est.p_hat, oracle)
    approx = binarization_ber_asymptotic(200.0)
    assert max(est.p_hat / approx, approx / est.p_hat) <= 5


def test_asymptotic_estimate():
    assert binarization_ber_asymptotic(200.0) == pytest.approx(3.18e-3, rel=1e-3)
    assert binarization_ber_asymptotic(2 / (math.pi * 0.01)) == pytest.approx(0.01, rel=1e-12)
    assert binarization_ber_asymptotic(1e300) < 1e-299
    with pytest.raises(DomainError):
        binarization_ber_asymptotic(0.0)


def test_keyed_decode_large_signal_is_error_free():
    c = Constellation(4096, 200.0)
    n = 10**6
    r = RngStream(8, 0).generator().integers(0, c.n_bases, size=n)
    t = simulate_transcript(c, random_bits(8, n), r, master_seed=8)
    assert heterodyne_keyed_decode(t, True).errors == 0
    assert np.array_equal(t.b_bob, t.x)


def test_keyed_decode_without_signal_is_coin_flip():
    c = Constellation(16, 0.0)
    n = 10**5
    r = RngStream(9, 0).generator().integers(0, 8, size=n)
    est = heterodyne_keyed_decode(simulate_transcript(c, random_bits(9, n), r, 9), True)
    assert est.within(0.5, 4.0)


@pytest.mark.slow
def test_keyed_decode_at_S4():
    c = Constellation.from_photon_number(16, 4.0)
    n = 10**7
    r = RngStream(10, 0).generator().integers(0, 8, size=n)
    est = heterodyne_keyed_decode(simulate_transcript(c, random_bits(10, n), r, 10), True)
    assert est.within(heterodyne_error(4.0), 3.0)
    assert heterodyne_error(4.0) == pytest.approx(2.3e-3, rel=0.02)


def test_unkeyed_decode_noise_free():
    c = Constellation(32, 10.0)
    x = np.tile([0, 1], 16).astype(np.uint8)
    r = np.repeat(np.arange(16), 2)
    assert heterodyne_keyed_decode(Transcript.noise_free(c, x, r), False).errors == 0


def test_transcript_validation():
    c = Constellation(8, 1.0)
    with pytest.raises(DomainError):
        Transcript(c, [0, 1], [0], [0], [0j], [0])
    with pytest.raises(DomainError):
        Transcript(c, [0], [1], [0], [0j], [0])
    with pytest.raises(DomainError):
        binarization_attack(Transcript.noise_free(c, [], []))


@settings(deadline=None, max_examples=15)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**40))
def test_transcript_worker_invariant(workers, seed):
    c = Constellation(64, 3.0)
    n = 5000
    r = RngStream(seed, 1).generator().integers(0, 32, size=n)
    x = random_bits(seed, n)
    a = simulate_transcript(c, x, r, seed, workers=1, block=512)
    b = simulate_transcript(c, x, r, seed, workers=workers, block=512)
    assert a == b


def test_eve_noise_does_not_depend_on_alpha0():
    n = 1000
    r = np.zeros(n, dtype=np.int64)
    x = np.zeros(n, dtype=np.uint8)
    t1 = simulate_transcript(Constellation(8, 1.0), x, r, 3)
    t2 = simulate_transcript(Constellation(8, 5.0), x, r, 3)
    assert np.allclose(t1.y_eve - 1.0, t2.y_eve - 5.0)


def naive_parity(seed, n, c):
    bases = running_key_sequence(SeedKey.from_int(seed, 16), SEARCH_SPEC, n, c)
    return bases & 1


def test_parity_table_matches_running_key():
    c = Constellation(8, 1.0)
    table = keystream_parity_table(SEARCH_SPEC, c, 64, 1, 200)
    for seed in (1, 2, 77, 199):
        assert np.array_equal(table[seed - 1], naive_parity(seed, 64, c))


@pytest.mark.parametrize("trial", range(3))
def test_noise_free_search_finds_unique_seed(trial):
    c = Constellation(8, 1.0)
    gen = RngStream(31, trial).generator()
    seed = int(gen.integers(1, 1 << 16))
    x = gen.integers(0, 2, size=64, dtype=np.uint8)
    l = x ^ naive_parity(seed, 64, c)
    ranking = seed_recovery_bruteforce(l, x, SEARCH_SPEC, c)
    assert len(ranking) == (1 << 16) - 1
    assert ranking.rank_of(seed) == 1
    assert ranking.scores[0] == 64 > ranking.scores[1]


def test_binarized_noise_free_outcomes_reveal_key_parity():
    # encode, exact amplitudes, binarize: the observation the seed search consumes
    c = Constellation(8, 1.0)
    seed = 0xBEEF
    n = 64
    r = running_key_sequence(SeedKey.from_int(seed, 16), SEARCH_SPEC, n, c)
    x = random_bits(5, n)
    keep = r != 0
    l = binarize(amplitudes(c, encode(c, x, r)))
    assert np.array_equal(l[keep], (x ^ ktilde(r))[keep])


def test_coin_flip_observations_give_uniform_rank():
    c = Constellation(8, 1.0)
    gen = RngStream(32, 0).generator()
    ranks = []
    for _ in range(100):
        seed = int(gen.integers(1, 1 << 16))
        x = gen.integers(0, 2, size=64, dtype=np.uint8)
        l = gen.integers(0, 2, size=64, dtype=np.uint8)
        ranks.append(seed_recovery_bruteforce(l, x, SEARCH_SPEC, c).rank_of(seed))
    u = (np.array(ranks) - 0.5) / ((1 << 16) - 1)
    assert stats.kstest(u, "uniform").pvalue > 0.001


def test_ranking_is_deterministic_across_workers():
    c = Constellation(8, 1.0)
    gen = RngStream(33, 0).generator()
    x = gen.integers(0, 2, size=40, dtype=np.uint8)
    l = gen.integers(0, 2, size=40, dtype=np.uint8)
    a = seed_recovery_bruteforce(l, x, SEARCH_SPEC, c, workers=1)
    b = seed_recovery_bruteforce(l, x, SEARCH_SPEC, c, workers=4)
    assert np.array_equal(a.seeds, b.seeds) and np.array_equal(a.scores, b.scores)
    # ties resolve to ascending seed value
    same = a.scores[:-1] == a.scores[1:]
    assert np.all(a.seeds[:-1][same] < a.seeds[1:][same])


def test_search_size_limit():
    with pytest.raises(ResourceLimitError):
        seed_recovery_bruteforce([0], [0], LfsrSpec.default(25), Constellation(8, 1.0))


def test_complexity_reference_values():
    c1 = search_complexity(4096, 200.0, 4400, 1)
    assert c1 == pytest.approx(881.8, abs=0.1)
    assert c1 >= 480
    assert search_complexity(4096, 200.0, 4400, 2) - c1 == pytest.approx(400.0, abs=1e-9)


def test_complexity_direct_formula():
    # log2 of (lam M / (sqrt(2) pi alpha0)) ** (klen / log2(M/2)), via numpy
    for M, a, k, lam in [(4096, 200.0, 4400, 1), (256, 3.0, 64, 2), (64, 1.0, 30, 1)]:
        want = k / np.log2(M / 2) * np.log2(lam * M / (np.sqrt(2) * np.pi * a))
        assert search_complexity(M, a, k, lam) == pytest.approx(want, rel=1e-12)


def test_complexity_degenerate_boundary():
    with pytest.warns(DegenerateEstimateWarning):
        v = search_complexity(4096, 4096 / (math.sqrt(2) * math.pi), 4400, 1)
    assert v == pytest.approx(0.0, abs=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        search_complexity(4096, 200.0, 4400, 1)


@pytest.mark.parametrize("args", [(6, 1.0, 10, 1), (8, 0.0, 10, 1), (8, 1.0, 10, 3),
                                  (4096, 1.0, 5, 1)])
def test_complexity_rejects_bad_input(args):
    with pytest.raises(DomainError):
        search_complexity(*args)
