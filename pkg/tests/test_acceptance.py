"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test logs a ``[PASS]``/``[FAIL]`` line (collected in the terminal
summary) before asserting.  Reference values are recomputed here from
independent oracles (scipy special functions, closed forms) rather than
read back from the package's own report.
"""

import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest
from scipy import stats

from y00sim.attacks import (
    Transcript,
    binarization_attack,
    binarization_ber_asymptotic,
    binarization_ber_oracle,
    keystream_parity_table,
    search_complexity,
    seed_recovery_bruteforce,
    simulate_transcript,
)
from y00sim.constellation import Constellation
from y00sim.harness import cli
from y00sim.harness.pipeline import data_bits
from y00sim.harness.reproduce import ADVANTAGE_S_GRID, DEFAULT_MASTER_SEED
from y00sim.infotheory import (
    TinyCipherSpec,
    binary_entropy,
    exact_cipher_entropies,
    key_rate,
    posterior_bit_entropy,
    privacy_amplify,
    random_tiny_spec,
    toeplitz_matrix,
)
from y00sim.keystream import LfsrSpec, LfsrStream, SeedKey, bits_to_bases
from y00sim.measurement import (
    RngStream,
    helstrom_error,
    heterodyne_ber_mc,
    heterodyne_error,
    phase_error,
)

SEED = DEFAULT_MASTER_SEED

pytestmark = pytest.mark.acceptance


def within_order(value, ref):
    return abs(math.log10(value / ref)) <= 1.0


def z_score(errors, trials, p):
    return (errors / trials - p) / math.sqrt(p * (1 - p) / trials)


def test_criterion_01_receiver_table(record):
    S = 7.0
    rows = [
        ("Helstrom", helstrom_error(S, "asymptotic"), 0.25 * math.exp(-4 * S), 1.7e-13, 1e-12),
        ("heterodyne", heterodyne_error(S, "asymptotic"), 0.5 * math.exp(-S), 4.6e-4, 1e-3),
        ("phase", phase_error(S), 0.5 * math.exp(-2 * S), 4.1e-7, 1e-6),
    ]
    ok = True
    parts = []
    for name, got, closed, quoted, order in rows:
        # the quoted figures carry two digits, so 2.5% covers their rounding
        good = (got == pytest.approx(closed, rel=1e-14)
                and abs(got - quoted) <= 0.025 * quoted and within_order(got, order))
        ok &= good
        parts.append(f"{name} {got:.4g}")
    assert record(1, ok, "S=7 asymptotic " + ", ".join(parts))


def test_criterion_02_heterodyne_monte_carlo(record):
    t0 = time.perf_counter()
    zs = {}
    for k, S in enumerate((1.0, 2.0, 4.0)):
        est = heterodyne_ber_mc(S, 10**7, SEED ^ (k + 1))
        zs[S] = z_score(est.errors, est.trials, stats.norm.sf(math.sqrt(2 * S)))
    grid = np.linspace(1.0, 10.0, 901)
    ratios = np.array([0.5 * math.exp(-s) / stats.norm.sf(math.sqrt(2 * s)) for s in grid])
    elapsed = time.perf_counter() - t0
    ok = all(abs(z) <= 3 for z in zs.values()) and np.all((ratios >= 0.1) & (ratios <= 10))
    ok &= elapsed <= 60
    zs_txt = ", ".join(f"S={S:g} z={z:+.2f}" for S, z in zs.items())
    assert record(2, ok, f"{zs_txt}; asymptotic/exact in [{ratios.min():.2f}, "
                  f"{ratios.max():.2f}] over S in [1,10]; {elapsed:.1f} s")


def test_criterion_03_binarization(record):
    t0 = time.perf_counter()
    worst = 0
    for k in range(2, 13):
        M = 1 << k
        c = Constellation(M, 1.0)
        r = np.repeat(np.arange(1, M // 2), 2)
        x = np.tile(np.array([0, 1], dtype=np.uint8), M // 2 - 1)
        worst = max(worst, binarization_attack(Transcript.noise_free(c, x, r)).errors)

    n = 10**7
    spec = LfsrSpec.default(32)
    seed = SeedKey.random(32, RngStream(SEED, 3).generator())
    x = data_bits(SEED, n)
    zs, factors = {}, {}
    bases = None
    for alpha0 in (10.0, 50.0, 200.0):
        c = Constellation(128, alpha0)
        if bases is None:
            bases = bits_to_bases(LfsrStream(spec, seed).bits(n * c.bits_per_basis), c)
        est = binarization_attack(simulate_transcript(c, x, bases, SEED))
        rr = np.arange(64)
        oracle = float(np.mean(stats.norm.sf(
            math.sqrt(2) * alpha0 * np.abs(np.sin(2 * np.pi * rr / 128)))))
        assert binarization_ber_oracle(128, alpha0) == pytest.approx(oracle, rel=1e-7)
        zs[alpha0] = z_score(est.errors, est.trials, oracle)
        approx = 2 / (math.pi * alpha0)
        factors[alpha0] = max(est.p_hat / approx, approx / est.p_hat)
    at_63 = binarization_ber_asymptotic(63.7)
    elapsed = time.perf_counter() - t0
    ok = (worst == 0 and all(abs(z) <= 3 for z in zs.values())
          and all(f <= 5 for f in factors.values()) and abs(at_63 - 0.01) <= 1e-4
          and elapsed <= 180)
    detail = ", ".join(f"a0={a:g} z={zs[a]:+.2f} x{factors[a]:.2f}" for a in zs)
    assert record(3, ok, f"noise-free errors {worst}; {detail}; 2/(pi*63.7)={at_63:.5f}; "
                  f"{elapsed:.1f} s")


def test_criterion_04_complexity(record):
    c1 = search_complexity(4096, 200.0, 4400, 1)
    c2 = search_complexity(4096, 200.0, 4400, 2)
    direct = 4400 / 11 * math.log2(4096 / (math.sqrt(2) * math.pi * 200.0))
    ok = (abs(c1 - 881.8) <= 0.1 and c1 >= 480 and abs((c2 - c1) - 400) <= 1e-9
          and c1 == pytest.approx(direct, rel=1e-12))
    assert record(4, ok, f"log2 C = {c1:.3f}, lambda=2 adds {c2 - c1:.6f}")


def test_criterion_05_key_rates(record):
    raw = 1e9
    p_bob = helstrom_error(7.0)
    claims = [(0.01, 1e7), (0.5 * math.exp(-7), 1e6), (0.5 * math.exp(-14), 1e3)]
    ok = True
    parts = []
    for p_eve, claim in claims:
        kr = key_rate(p_bob, p_eve, raw, "paper_heuristic")
        ok &= kr.advantage and claim / 3 <= kr.rate <= claim * 3
        parts.append(f"{kr.rate:.4g}")
    exact_10m = key_rate(p_bob, 0.01, raw, "paper_heuristic").rate
    ok &= exact_10m == pytest.approx(1e7, rel=1e-12)
    ck = key_rate(p_bob, 0.01, raw, "ck").rate
    ck_oracle = (stats.entropy([0.01, 0.99], base=2) - binary_entropy(p_bob)) * raw
    ok &= abs(ck - 80.8e6) <= 0.5e6 and ck == pytest.approx(ck_oracle, rel=1e-9)
    ok &= ck > exact_10m
    assert record(5, ok, f"heuristic rates {', '.join(parts)} bits/s; CK at 1% = "
                  f"{ck / 1e6:.2f} Mbps (above the 10 Mbps error-count figure)")


def test_criterion_06_shannon_limit(record):
    t0 = time.perf_counter()
    gen = RngStream(SEED, 4 << 56 | 6).generator()
    gaps = []
    for _ in range(100):
        rep = exact_cipher_entropies(random_tiny_spec(gen))
        gaps.append(rep.h_x_given_y - rep.h_k)
    otp = exact_cipher_entropies(TinyCipherSpec(M=4, klen=1, n=1, sectors=2))
    elapsed = time.perf_counter() - t0
    ok = (max(gaps) <= 1e-9 and abs(otp.h_x_given_y - 1.0) <= 1e-9 and otp.h_k == 1.0
          and elapsed <= 300)
    assert record(6, ok, f"max H(X|Y)-H(K) over 100 instances = {max(gaps):.3g}; "
                  f"one-time pad H(X|Y) = {otp.h_x_given_y:.12f}; {elapsed:.1f} s")


def test_criterion_07_random_cipher(record):
    t0 = time.perf_counter()
    het = exact_cipher_entropies(TinyCipherSpec(M=4, klen=2, n=2, sectors=4,
                                                noise="heterodyne", alpha0=1.0))
    gen = RngStream(SEED, 4 << 56 | 7).generator()
    values = {exact_cipher_entropies(random_tiny_spec(gen)).h_y_given_xk for _ in range(100)}
    elapsed = time.perf_counter() - t0
    ok = het.h_y_given_xk > 0.1 and values == {0.0} and elapsed <= 120
    assert record(7, ok, f"heterodyne H(Y|X,K) = {het.h_y_given_xk:.4f} bits; noiseless "
                  f"values {sorted(values)}; {elapsed:.1f} s")


def test_criterion_08_posterior_entropy(record):
    t0 = time.perf_counter()
    h_bright = posterior_bit_entropy(Constellation(4096, 200.0), True)
    gaps = []
    for S in ADVANTAGE_S_GRID:
        c = Constellation.from_photon_number(32, S)
        gaps.append(posterior_bit_entropy(c, False) - posterior_bit_entropy(c, True))
    elapsed = time.perf_counter() - t0
    worst = min(gaps)
    ok = h_bright < 1e-6 and worst > 0 and elapsed <= 120
    assert record(8, ok, f"keyed H at alpha0=200 = {h_bright:.3g}; min advantage "
                  f"{worst:.4f} bits over {len(gaps)} points S=1..50 (step 0.5), "
                  f"at S={ADVANTAGE_S_GRID[gaps.index(worst)]:g}; {elapsed:.1f} s")


def _rank1_hits(noise, tag):
    spec = LfsrSpec(16, (16, 14, 13, 11))
    c = Constellation(8, 1.0)
    gen = RngStream(SEED, 4 << 56 | tag).generator()
    table = keystream_parity_table(spec, c, 64)
    hits = 0
    for _ in range(100):
        seed = int(gen.integers(1, 1 << 16))
        x = gen.integers(0, 2, size=64, dtype=np.uint8)
        l = x ^ table[seed - 1]
        if noise:
            l = l ^ (gen.random(64) < noise).astype(np.uint8)
        hits += seed_recovery_bruteforce(l, x, spec, c).rank_of(seed) == 1
    return hits


def test_criterion_09_seed_recovery(record):
    t0 = time.perf_counter()
    clean = _rank1_hits(0.0, 109)
    noisy = _rank1_hits(0.3, 110)
    elapsed = time.perf_counter() - t0
    ok = clean == 100 and noisy < clean and elapsed <= 180
    assert record(9, ok, f"rank-1 recovery {clean}/100 noise-free, {noisy}/100 at 30% "
                  f"noise; {elapsed:.1f} s")


@pytest.mark.slow
def test_criterion_10_determinism(record):
    outputs = {}
    codes = {}
    for workers in (1, 4, 8):
        buf = io.StringIO()
        with redirect_stdout(buf):
            codes[workers] = cli.main(["--workers", str(workers), "reproduce-paper"])
        outputs[workers] = buf.getvalue().encode()
    same = outputs[1] == outputs[4] == outputs[8]
    ok = same and set(codes.values()) == {0}
    assert record(10, ok, f"reproduce-paper bytes identical across 1/4/8 workers: {same} "
                  f"({len(outputs[1])} bytes); exit codes {codes}")


def test_criterion_11_privacy_amplification(record):
    hand = privacy_amplify([1, 0, 1], 2, [1, 1, 0, 1]).tolist()
    gen = RngStream(SEED, 4 << 56 | 111).generator()
    n, k = 64, 16
    seed = gen.integers(0, 2, size=n + k - 1, dtype=np.uint8)
    linear = all(
        np.array_equal(privacy_amplify(a ^ b, k, seed),
                       privacy_amplify(a, k, seed) ^ privacy_amplify(b, k, seed))
        for a, b in (gen.integers(0, 2, size=(2, n), dtype=np.uint8) for _ in range(500))
    )
    trials = 10**5
    X = gen.integers(0, 2, size=(trials, n), dtype=np.int64)
    T = toeplitz_matrix(seed, n, k).astype(np.int64)
    ones = ((X @ T.T) % 2).sum(axis=0)
    z = (ones / trials - 0.5) / math.sqrt(0.25 / trials)
    spot = all(np.array_equal(privacy_amplify(X[i], k, seed), (T @ X[i]) % 2)
               for i in range(200))
    ok = hand == [0, 1] and linear and spot and np.max(np.abs(z)) <= 5
    assert record(11, ok, f"2x3 example -> {''.join(map(str, hand))}; linearity over 500 "
                  f"pairs {linear}; max output-bit bias {np.max(np.abs(z)):.2f} sigma")
