"""End-to-end runs: encode, measure, attack, privacy-amplify."""

from __future__ import annotations

import math

import numpy as np

from ..attacks import (
    SUBSTREAM_DATA,
    Transcript,
    binarization_attack,
    heterodyne_keyed_decode,
    simulate_transcript,
)
from ..constellation import Constellation
from ..errors import DomainError
from ..infotheory import binary_entropy, key_rate, posterior_bit_entropy, privacy_amplify
from ..keystream import LfsrStream, bits_to_bases
from ..measurement import (
    DEFAULT_BLOCK,
    BerEstimate,
    RngStream,
    block_sizes,
    helstrom_error,
    heterodyne_error,
    map_blocks,
)
from .config import ExperimentConfig
from .report import Report

SUBSTREAM_HASH = 6 << 56


def data_bits(master_seed: int, n: int, workers: int = 1, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """Uniform data bits; block ``i`` comes from substream ``SUBSTREAM_DATA | i``."""
    def run(item):
        i, size = item
        return RngStream(master_seed, SUBSTREAM_DATA | i).generator().integers(
            0, 2, size=size, dtype=np.uint8)

    parts = map_blocks(run, block_sizes(n, block), workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def run_transcript(cfg: ExperimentConfig, x=None) -> Transcript:
    """Simulate ``cfg.n`` qumodes.  ``x`` supplies data bits instead of uniform ones."""
    cfg.validate()
    c = cfg.constellation
    if x is None:
        x = data_bits(cfg.master_seed, cfg.n, cfg.workers)
    else:
        x = np.asarray(x, dtype=np.uint8)
        if x.size != cfg.n:
            raise DomainError(f"supplied {x.size} data bits for n = {cfg.n}")
    stream = LfsrStream(cfg.lfsr_spec, cfg.seed_key())
    r = bits_to_bases(stream.bits(cfg.n * c.bits_per_basis), c)
    t = simulate_transcript(c, x, r, cfg.master_seed, cfg.workers)
    t.meta["config"] = cfg.to_dict(echo=True)
    return t


def attack_report(cfg: ExperimentConfig, t: Transcript) -> Report:
    report = Report("attack", cfg.to_dict(echo=True))
    bob = BerEstimate(int(np.count_nonzero(t.b_bob != t.x)), t.n)
    report.add("bob_ber", bob.as_dict(), provenance="monte-carlo",
               expected=f"{helstrom_error(cfg.alpha0 ** 2):.3g}")
    if cfg.attack == "binarize":
        report.add("binarization_ber", binarization_attack(t).as_dict(), provenance="monte-carlo")
    elif cfg.attack == "keyed":
        report.add("heterodyne_keyed_ber", heterodyne_keyed_decode(t, True).as_dict(),
                   provenance="monte-carlo",
                   expected=f"{heterodyne_error(cfg.alpha0 ** 2):.3g}")
    elif cfg.attack == "unkeyed":
        report.add("heterodyne_state_error", heterodyne_keyed_decode(t, False).as_dict(),
                   provenance="monte-carlo")
    return report


def advantage_entropies(S: float, M: int):
    """``(H(X|Y_E,K), H(X|Y_B,K))`` per qumode for heterodyne Eve and keyed Bob."""
    eve = posterior_bit_entropy(Constellation.from_photon_number(M, S), key_known=True)
    bob = binary_entropy(helstrom_error(S))
    return eve, bob


def run_keygen(cfg: ExperimentConfig) -> Report:
    """Raw-bit exchange followed by privacy amplification.

    Refuses, with the reason in the report, unless the keyed advantage
    ``H(X|Y_E,K) > H(X|Y_B,K)`` holds at the configured photon number.
    In ``analytic`` mode nothing is sampled: the injected ``p_eve`` and the
    Helstrom rate for Bob give the secret-key rate at ``raw_rate``.
    """
    cfg.validate()
    S = cfg.alpha0 ** 2
    kg = cfg.keygen
    report = Report("keygen", cfg.to_dict(echo=True))
    eve_h, bob_h = advantage_entropies(S, cfg.M)
    report.add("H(X|Y_E,K)", eve_h, "bits", "quadrature")
    report.add("H(X|Y_B,K)", bob_h, "bits", "formula")

    if kg.mode == "analytic":
        p_bob = helstrom_error(S)
        kr = key_rate(p_bob, kg.p_eve, kg.raw_rate, kg.method)
        report.add("p_bob", p_bob, provenance="formula")
        report.add("p_eve", kg.p_eve, provenance="formula", note="injected")
        report.add("advantage", kr.advantage)
        report.add("secret_rate", kr.rate, "bits/s", "formula", note=kg.method)
        report.add("refused", not kr.advantage)
        return report

    if not eve_h > bob_h:
        report.add("refused", True, note="no keyed advantage: Eve's conditional entropy does "
                   "not exceed Bob's, so privacy amplification cannot leave a secret key")
        return report

    t = run_transcript(cfg)
    if t.n == 0:
        raise DomainError("key generation needs n >= 1")
    bob = BerEstimate(int(np.count_nonzero(t.b_bob != t.x)), t.n)
    eve = heterodyne_keyed_decode(t, key_known=True)
    report.add("raw_bits", t.n, "bits", "monte-carlo")
    report.add("p_bob", bob.as_dict(), provenance="monte-carlo")
    report.add("p_eve", eve.as_dict(), provenance="monte-carlo",
               note="heterodyne outcome decoded with the key")
    kr = key_rate(bob.p_hat, eve.p_hat, float(t.n), kg.method)
    if not kr.advantage:
        report.add("refused", True, note="measured Bob error rate is not below Eve's")
        return report
    out_len = int(math.floor(kr.rate))
    hash_seed = RngStream(cfg.master_seed, SUBSTREAM_HASH).generator().integers(
        0, 2, size=t.n + out_len - 1 if out_len else 0, dtype=np.uint8)
    alice_key = privacy_amplify(t.x, out_len, hash_seed)
    bob_key = privacy_amplify(t.b_bob, out_len, hash_seed)
    report.add("secret_bits", out_len, "bits", "monte-carlo", note=kg.method)
    report.add("secret_fraction", out_len / t.n, provenance="monte-carlo")
    report.add("secret_rate", out_len / t.n * kg.raw_rate, "bits/s", "monte-carlo",
               note=f"scaled to raw_rate={kg.raw_rate!r}")
    agree = bool(np.array_equal(alice_key, bob_key))
    report.add("keys_agree", agree, provenance="monte-carlo",
               note="" if agree else "no error correction is run, so Bob's raw errors "
               "carry into his hashed key")
    report.add("refused", False)
    return report
