"""Running-key generation: the ENC box that expands a seed key into bases.

The default ENC box is a Fibonacci LFSR.  ``LfsrSpec(degree, taps)`` names
the connection polynomial by its nonzero exponents, e.g. ``x^4 + x + 1`` is
``LfsrSpec(4, (4, 1))``; the constant term is implicit.  The output sequence
obeys

    s[k + degree] = XOR of s[k + t] over t in {0} | {taps below degree}

and the register holds the next ``degree`` output bits, so the first
``|K|`` running-key bits are the seed bits themselves, in order.

Basis indices are read from the running key ``log2(M/2)`` bits at a time,
most significant bit first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .constellation import Constellation
from .errors import ConfigError, DomainError

__all__ = [
    "DEFAULT_TAPS",
    "LfsrSpec",
    "SeedKey",
    "KeystreamGenerator",
    "LfsrStream",
    "CyclicKeyStream",
    "lfsr_next_bit",
    "next_basis",
    "bits_to_bases",
    "running_key_sequence",
    "lfsr_sequences",
]

# Lowest-weight primitive polynomial per degree (smallest taps first among
# trinomials, then pentanomials).  Checked by tests/test_keystream.py.
DEFAULT_TAPS = {
    3: (3, 1), 4: (4, 1), 5: (5, 2), 6: (6, 1), 7: (7, 1), 8: (8, 7, 2, 1),
    9: (9, 4), 10: (10, 3), 11: (11, 2), 12: (12, 8, 2, 1), 13: (13, 5, 2, 1),
    14: (14, 12, 2, 1), 15: (15, 1), 16: (16, 12, 3, 1), 17: (17, 3),
    18: (18, 7), 19: (19, 5, 2, 1), 20: (20, 3), 21: (21, 2), 22: (22, 1),
    23: (23, 5), 24: (24, 7, 2, 1), 25: (25, 3), 26: (26, 6, 2, 1),
    27: (27, 5, 2, 1), 28: (28, 3), 29: (29, 2), 30: (30, 23, 2, 1),
    31: (31, 3), 32: (32, 22, 2, 1), 33: (33, 13), 34: (34, 27, 2, 1),
    35: (35, 2), 36: (36, 11), 37: (37, 9, 2, 1), 38: (38, 13, 3, 1),
    39: (39, 4), 40: (40, 35, 2, 1), 41: (41, 3), 42: (42, 29, 2, 1),
    43: (43, 12, 2, 1), 44: (44, 38, 3, 1), 45: (45, 4, 3, 1),
    46: (46, 9, 3, 1), 47: (47, 5), 48: (48, 28, 3, 1), 49: (49, 9),
    50: (50, 16, 2, 1), 51: (51, 28, 2, 1), 52: (52, 3), 53: (53, 6, 2, 1),
    54: (54, 17, 2, 1), 55: (55, 24), 56: (56, 42, 2, 1), 57: (57, 7),
    58: (58, 19), 59: (59, 24, 2, 1), 60: (60, 1), 61: (61, 5, 2, 1),
    62: (62, 28, 3, 1), 63: (63, 1), 64: (64, 11, 2, 1),
}

# Upper bound on elements materialised per extension step.
_MAX_BLOCK_ELEMS = 1 << 24


@dataclass(frozen=True)
class LfsrSpec:
    degree: int
    taps: tuple

    def __post_init__(self):
        taps = tuple(sorted({int(t) for t in self.taps}, reverse=True))
        object.__setattr__(self, "taps", taps)
        if self.degree < 3:
            raise ConfigError(f"LFSR degree must be >= 3, got {self.degree}", ["lfsr.degree"])
        if not taps:
            raise ConfigError("LFSR taps must be nonempty", ["lfsr.taps"])
        if taps[0] != self.degree:
            raise ConfigError(
                f"highest tap must equal the degree ({self.degree}), got {taps[0]}",
                ["lfsr.taps"],
            )
        if taps[-1] < 1:
            raise ConfigError("taps must be positive exponents", ["lfsr.taps"])

    @classmethod
    def default(cls, degree: int) -> "LfsrSpec":
        try:
            return cls(degree, DEFAULT_TAPS[degree])
        except KeyError:
            raise ConfigError(
                f"no default polynomial for degree {degree}; pass taps explicitly",
                ["lfsr.taps"],
            ) from None

    @property
    def feedback(self) -> tuple:
        """Sequence offsets XORed to form ``s[k + degree]``, ascending."""
        return (0,) + tuple(sorted(t for t in self.taps if t < self.degree))

    @property
    def period(self) -> int:
        """Period for a primitive connection polynomial."""
        return (1 << self.degree) - 1


@dataclass(frozen=True)
class SeedKey:
    """A ``|K|``-bit secret; ``bits[0]`` is the first bit fed to the ENC box."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise DomainError("seed bits must be 0 or 1")
        if not bits:
            raise DomainError("seed key must have at least one bit")
        object.__setattr__(self, "bits", bits)

    @property
    def klen(self) -> int:
        return len(self.bits)

    @classmethod
    def from_int(cls, value: int, klen: int) -> "SeedKey":
        if value < 0 or value >> klen:
            raise DomainError(f"seed value {value} does not fit in {klen} bits")
        return cls(tuple((value >> (klen - 1 - i)) & 1 for i in range(klen)))

    @classmethod
    def from_hex(cls, text: str, klen: int | None = None) -> "SeedKey":
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        value = int(text, 16)
        if klen is None:
            klen = 4 * len(text)
        return cls.from_int(value, klen)

    @classmethod
    def random(cls, klen: int, rng: np.random.Generator, nonzero: bool = True) -> "SeedKey":
        while True:
            bits = tuple(int(b) for b in rng.integers(0, 2, size=klen))
            if not nonzero or any(bits):
                return cls(bits)

    def to_int(self) -> int:
        return int("".join(map(str, self.bits)), 2)

    def to_hex(self) -> str:
        return format(self.to_int(), "0{}x".format(math.ceil(self.klen / 4)))

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)


def _extend(seq: np.ndarray, spec: LfsrSpec, total: int) -> np.ndarray:
    """Extend LFSR output ``seq[..., :L]`` (``L >= degree``) to length ``total``.

    Uses ``p(x)**(2**j) == p(x**(2**j))`` over GF(2): the sequence also obeys
    the recurrence with every offset scaled by ``2**j``, which lets whole
    blocks of ``(degree - max feedback) * 2**j`` bits be produced at once.
    """
    d = spec.degree
    fb = spec.feedback
    gap = d - fb[-1]
    batch = int(np.prod(seq.shape[:-1], dtype=np.int64))
    have = min(seq.shape[-1], total)
    out = np.empty(seq.shape[:-1] + (total,), dtype=np.uint8)
    out[..., :have] = seq[..., :have]
    while have < total:
        stride = 1
        while d * stride * 2 <= have and gap * stride * 2 * max(batch, 1) <= _MAX_BLOCK_ELEMS:
            stride *= 2
        block = min(gap * stride, total - have)
        start = have - d * stride
        acc = out[..., start:start + block].copy()
        for t in fb[1:]:
            lo = start + t * stride
            acc ^= out[..., lo:lo + block]
        out[..., have:have + block] = acc
        have += block
    return out


class KeystreamGenerator(Protocol):
    """Anything that turns a seed into a reproducible bit stream."""

    def bits(self, count: int) -> np.ndarray: ...

    def clone(self) -> "KeystreamGenerator": ...


class LfsrStream:
    """Mutable running-key stream; one consumer at a time, use :meth:`clone` to fork."""

    def __init__(self, spec: LfsrSpec, seed: SeedKey):
        if seed.klen != spec.degree:
            raise ConfigError(
                f"seed length {seed.klen} does not match LFSR degree {spec.degree}",
                ["seed", "lfsr.degree"],
            )
        if not any(seed.bits):
            raise ConfigError("all-zero LFSR seed yields a constant stream", ["seed"])
        self.spec = spec
        self.state = seed.as_array()
        self.emitted = 0

    def bits(self, count: int) -> np.ndarray:
        if count < 0:
            raise DomainError("bit count must be >= 0")
        d = self.spec.degree
        seq = _extend(self.state, self.spec, count + d)
        self.state = seq[count:].copy()
        self.emitted += count
        return seq[:count]

    def next_bit(self) -> int:
        return int(self.bits(1)[0])

    def clone(self) -> "LfsrStream":
        other = object.__new__(LfsrStream)
        other.spec = self.spec
        other.state = self.state.copy()
        other.emitted = self.emitted
        return other


class CyclicKeyStream:
    """Repeats the seed bits verbatim.

    Used for tiny exhaustive cipher instances, where keys must range over
    all ``2**|K|`` values (including zero) and ``n * log2(M/2) <= |K|``
    gives one-time-pad key use.
    """

    def __init__(self, seed: SeedKey):
        self.seed = seed.as_array()
        self.emitted = 0

    def bits(self, count: int) -> np.ndarray:
        idx = (self.emitted + np.arange(count)) % self.seed.size
        self.emitted += count
        return self.seed[idx]

    def clone(self) -> "CyclicKeyStream":
        other = CyclicKeyStream.__new__(CyclicKeyStream)
        other.seed = self.seed
        other.emitted = self.emitted
        return other


def lfsr_next_bit(stream: LfsrStream) -> int:
    return stream.next_bit()


def bits_to_bases(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Group running-key bits into basis indices, MSB first.

    The trailing axis must be a multiple of ``c.bits_per_basis``.
    """
    w = c.bits_per_basis
    bits = np.asarray(bits, dtype=np.int64)
    shaped = bits.reshape(bits.shape[:-1] + (-1, w))
    weights = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
    return shaped @ weights


def next_basis(stream: KeystreamGenerator, c: Constellation) -> int:
    return int(bits_to_bases(stream.bits(c.bits_per_basis), c)[0])


def running_key_sequence(seed: SeedKey, spec: LfsrSpec, n: int, c: Constellation) -> np.ndarray:
    """Basis index for each of ``n`` qumodes."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if seed.klen < c.bits_per_basis:
        raise ConfigError(
            f"seed length {seed.klen} < log2(M/2) = {c.bits_per_basis}", ["seed"]
        )
    stream = LfsrStream(spec, seed)
    return bits_to_bases(stream.bits(n * c.bits_per_basis), c)


def lfsr_sequences(spec: LfsrSpec, seeds: np.ndarray, length: int) -> np.ndarray:
    """Output sequences for many seeds at once.

    ``seeds`` holds integer seed values (MSB-first bit strings, as in
    :meth:`SeedKey.to_int`).  Returns a ``(len(seeds), length)`` uint8 array.
    """
    d = spec.degree
    seeds = np.asarray(seeds, dtype=np.int64)
    shifts = np.arange(d - 1, -1, -1, dtype=np.int64)
    regs = ((seeds[:, None] >> shifts) & 1).astype(np.uint8)
    return _extend(regs, spec, max(length, d))[:, :length]
