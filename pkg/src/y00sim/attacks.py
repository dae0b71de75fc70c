"""Eavesdropper attacks on a Y-00 transcript.

The binarization attack collapses each heterodyne outcome to the half-plane
bit ``l = 1 if Im(y) < 0 else 0``.  Without noise ``l = x XOR ktilde(r)``
where ``ktilde(r) = r mod 2`` under the interleaved mapping, so the cipher
reduces to a stream cipher whose ciphertext bits are corrupted whenever the
noise pushes an outcome across the horizontal axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .constellation import Constellation, amplitudes, encode
from .errors import DomainError, ResourceLimitError
from .keystream import LfsrSpec, lfsr_sequences
from .measurement import (
    DEFAULT_BLOCK,
    BerEstimate,
    RngStream,
    block_sizes,
    bob_decide,
    heterodyne_sample,
    known_basis_decision,
    map_blocks,
)

__all__ = [
    "Transcript",
    "BerEstimate",
    "DegenerateEstimateWarning",
    "SeedRanking",
    "simulate_transcript",
    "binarize",
    "ktilde",
    "binarization_attack",
    "binarization_ber_oracle",
    "binarization_ber_asymptotic",
    "heterodyne_keyed_decode",
    "keystream_parity_table",
    "seed_recovery_bruteforce",
    "search_complexity",
    "SUBSTREAM_EVE",
    "SUBSTREAM_BOB",
]

# High byte of a substream id names its purpose; low bits index the block.
SUBSTREAM_DATA = 1 << 56
SUBSTREAM_EVE = 2 << 56
SUBSTREAM_BOB = 3 << 56
SUBSTREAM_TRIAL = 4 << 56

MAX_SEARCH_KLEN = 24


class DegenerateEstimateWarning(UserWarning):
    """The complexity estimate's base is <= 1 and carries no meaning."""


@dataclass
class Transcript:
    """Per-qumode record of one run.

    ``y_eve`` holds Eve's heterodyne outcomes; ``b_bob`` Bob's decisions.
    """

    constellation: Constellation
    x: np.ndarray
    r: np.ndarray
    ell: np.ndarray
    y_eve: np.ndarray
    b_bob: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.uint8)
        self.r = np.asarray(self.r, dtype=np.int64)
        self.ell = np.asarray(self.ell, dtype=np.int64)
        self.y_eve = np.asarray(self.y_eve, dtype=np.complex128)
        self.b_bob = np.asarray(self.b_bob, dtype=np.uint8)
        n = self.x.size
        for name in ("r", "ell", "y_eve", "b_bob"):
            if getattr(self, name).size != n:
                raise DomainError(f"transcript field {name} has length "
                                  f"{getattr(self, name).size}, expected {n}")
        if n and not np.array_equal(self.ell, encode(self.constellation, self.x, self.r)):
            raise DomainError("transcript states do not match encode(x, r)")

    @property
    def n(self) -> int:
        return int(self.x.size)

    @classmethod
    def noise_free(cls, c: Constellation, x, r) -> "Transcript":
        """Transcript whose outcomes are the exact state amplitudes."""
        ell = encode(c, np.asarray(x, dtype=np.uint8), np.asarray(r, dtype=np.int64))
        ell = np.atleast_1d(ell)
        return cls(c, x, r, ell, amplitudes(c, ell), np.asarray(x, dtype=np.uint8))

    def __eq__(self, other):
        if not isinstance(other, Transcript):
            return NotImplemented
        return (
            self.constellation == other.constellation
            and all(np.array_equal(getattr(self, f), getattr(other, f))
                    for f in ("x", "r", "ell", "y_eve", "b_bob"))
        )


def simulate_transcript(
    c: Constellation,
    x,
    r,
    master_seed: int,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
) -> Transcript:
    """Send ``x`` in bases ``r``; sample Eve's heterodyne and Bob's receiver.

    Noise for block ``i`` comes from substreams ``SUBSTREAM_EVE | i`` and
    ``SUBSTREAM_BOB | i`` only, so outcomes are identical for any worker
    count and Eve's noise draws do not depend on ``alpha0``.
    """
    x = np.asarray(x, dtype=np.uint8)
    r = np.asarray(r, dtype=np.int64)
    if x.shape != r.shape or x.ndim != 1:
        raise DomainError("x and r must be 1-D sequences of equal length")
    ell = np.asarray(encode(c, x, r), dtype=np.int64).reshape(x.shape)
    amp = amplitudes(c, ell)
    y = np.empty(x.size, dtype=np.complex128)
    bob = np.empty(x.size, dtype=np.uint8)
    blocks = block_sizes(x.size, block)

    def run(item):
        i, size = item
        lo = i * block
        sl = slice(lo, lo + size)
        y[sl] = heterodyne_sample(amp[sl], RngStream(master_seed, SUBSTREAM_EVE | i))
        bob[sl] = bob_decide(x[sl], c.S, RngStream(master_seed, SUBSTREAM_BOB | i))

    map_blocks(run, blocks, workers)
    return Transcript(c, x, r, ell, y, bob)


def binarize(y):
    """Half-plane bit of outcome(s) ``y``: 0 if ``Im(y) >= 0`` else 1."""
    out = (np.imag(np.asarray(y)) < 0).astype(np.uint8)
    if out.ndim == 0:
        return int(out)
    return out


def ktilde(r):
    """Running-key bit that flips the half-plane bit for basis ``r``.

    Basis 0 sits on the decision axis, so its noise-free half-plane bit is
    a tie; callers that need exactness should mask ``r == 0``.
    """
    out = np.asarray(r) & 1
    if out.ndim == 0:
        return int(out)
    return out.astype(np.uint8)


def _require_nonempty(t: Transcript):
    if t.n == 0:
        raise DomainError("empty transcript")


def binarization_attack(t: Transcript) -> BerEstimate:
    """Rate at which ``binarize(y) != x XOR ktilde(r)`` over the transcript."""
    _require_nonempty(t)
    l = binarize(t.y_eve)
    wrong = l != (t.x ^ ktilde(t.r))
    return BerEstimate(int(np.count_nonzero(wrong)), t.n)


def _crossing_probability(a: float) -> float:
    # P(u > |a|) for u ~ N(0, 1/2), by adaptive quadrature of the density
    a = abs(a)
    if a > 40:
        return 0.0
    val, _ = integrate.quad(lambda u: math.exp(-u * u) / math.sqrt(math.pi), a, np.inf,
                            epsabs=1e-15, epsrel=1e-10)
    return val


def binarization_ber_oracle(M: int, alpha0: float) -> float:
    """Expected binarization error rate for uniformly chosen bases.

    Each basis ``r`` contributes the probability that the imaginary
    quadrature noise exceeds ``alpha0 * |sin(2 pi r / M)|``.
    """
    n_bases = M // 2
    probs = [_crossing_probability(alpha0 * math.sin(2 * math.pi * r / M))
             for r in range(n_bases)]
    return math.fsum(probs) / n_bases


def binarization_ber_asymptotic(alpha0: float) -> float:
    """Order-of-magnitude binarization error ``2 / (pi alpha0)``."""
    if not alpha0 > 0:
        raise DomainError(f"alpha0 must be > 0, got {alpha0}")
    return 2.0 / (math.pi * alpha0)


def heterodyne_keyed_decode(t: Transcript, key_known: bool = True) -> BerEstimate:
    """Decode Eve's heterodyne outcomes.

    With the key, each outcome is decided between the two states of its
    basis and the bit error rate is returned.  Without it, the nearest of
    all ``M`` states is chosen and the state-identification error rate is
    returned.
    """
    _require_nonempty(t)
    c = t.constellation
    if key_known:
        wrong = known_basis_decision(t.y_eve, c, t.r) != t.x
    else:
        step = 2 * np.pi / c.M
        ell_hat = np.rint(np.angle(t.y_eve) / step).astype(np.int64) % c.M
        wrong = ell_hat != t.ell
    return BerEstimate(int(np.count_nonzero(wrong)), t.n)


@dataclass(frozen=True)
class SeedRanking:
    """Candidate seeds ordered by agreement score, best first."""

    seeds: np.ndarray
    scores: np.ndarray
    n: int

    def rank_of(self, seed: int) -> int:
        """1-based rank of ``seed``."""
        hits = np.flatnonzero(self.seeds == seed)
        if not hits.size:
            raise KeyError(seed)
        return int(hits[0]) + 1

    def top(self, k: int = 1):
        return list(zip(self.seeds[:k].tolist(), self.scores[:k].tolist()))

    def __len__(self):
        return int(self.seeds.size)


_SEARCH_CHUNK = 1 << 15


@lru_cache(maxsize=64)
def _parity_chunk(spec: LfsrSpec, bits_per_basis: int, n: int, lo: int, hi: int) -> np.ndarray:
    seeds = np.arange(lo, hi, dtype=np.int64)
    seq = lfsr_sequences(spec, seeds, n * bits_per_basis)
    # LSB of each MSB-first basis chunk is r mod 2
    out = seq[:, bits_per_basis - 1::bits_per_basis]
    out.setflags(write=False)
    return out


def keystream_parity_table(spec: LfsrSpec, c: Constellation, n: int, lo: int = 1, hi=None):
    """``ktilde`` sequences of length ``n`` for seeds ``lo..hi-1``."""
    hi = (1 << spec.degree) if hi is None else hi
    return _parity_chunk(spec, c.bits_per_basis, n, lo, hi)


def seed_recovery_bruteforce(
    l,
    x,
    spec: LfsrSpec,
    c: Constellation,
    workers: int = 1,
) -> SeedRanking:
    """Known-plaintext exhaustive search over all non-zero LFSR seeds.

    Each seed predicts ``x XOR ktilde(r)``; its score is the number of
    positions agreeing with the observed half-plane bits ``l``.  Ties are
    broken by ascending seed value.
    """
    if spec.degree > MAX_SEARCH_KLEN:
        raise ResourceLimitError(
            f"|K| = {spec.degree} exceeds the desk-scale search limit of {MAX_SEARCH_KLEN}"
        )
    l = np.asarray(l, dtype=np.uint8)
    x = np.asarray(x, dtype=np.uint8)
    if l.shape != x.shape or l.ndim != 1:
        raise DomainError("l and x must be 1-D sequences of equal length")
    n = l.size
    target = l ^ x
    top = 1 << spec.degree
    chunks = [(lo, min(lo + _SEARCH_CHUNK, top)) for lo in range(1, top, _SEARCH_CHUNK)]

    def score(chunk):
        lo, hi = chunk
        table = _parity_chunk(spec, c.bits_per_basis, n, lo, hi)
        return n - np.count_nonzero(table != target, axis=1)

    scores = np.concatenate(map_blocks(score, chunks, workers)).astype(np.int64)
    seeds = np.arange(1, top, dtype=np.int64)
    order = np.lexsort((seeds, -scores))
    return SeedRanking(seeds[order], scores[order], n)


def search_complexity(M: int, alpha0: float, klen: float, lam: int = 1) -> float:
    """``log2`` of the brute-force running-key search complexity.

    ``lam`` is 2 for ciphertext-only (random data) and 1 for known
    plaintext.  When ``lam * M / (sqrt(2) pi alpha0) <= 1`` the estimate is
    meaningless; a :class:`DegenerateEstimateWarning` is issued and the
    (non-positive) value returned anyway.
    """
    if M < 4 or M & (M - 1):
        raise DomainError(f"M must be a power of two >= 4, got {M}")
    if not alpha0 > 0:
        raise DomainError(f"alpha0 must be > 0, got {alpha0}")
    if lam not in (1, 2):
        raise DomainError(f"lambda must be 1 or 2, got {lam}")
    bits_per_basis = math.log2(M // 2)
    if klen < bits_per_basis:
        raise DomainError(f"klen {klen} < log2(M/2) = {bits_per_basis}")
    base = lam * M / (math.sqrt(2.0) * math.pi * alpha0)
    if base <= 1.0 + 1e-12:
        warnings.warn(
            f"complexity base {base:.6g} <= 1; the estimate is degenerate",
            DegenerateEstimateWarning,
            stacklevel=2,
        )
    return klen / bits_per_basis * math.log2(base)
