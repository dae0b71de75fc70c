"""Coherent-state ring constellation and the interleaved bit/basis mapping.

State ``l`` of an ``M``-point ring has amplitude ``alpha0 * exp(2j*pi*l/M)``.
The ``M/2`` bases pair state ``r`` with its antipode ``r + M/2``.  Logical
bits are assigned with the parity rule

    l = r + (b XOR (r mod 2)) * M/2

so that neighbouring states on the ring carry opposite bits everywhere except
across the two seams at ``M/2 - 1 -> M/2`` and ``M - 1 -> 0``.  A ring of
antipodal pairs cannot alternate all the way round when ``M/2`` is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Constellation",
    "state_amplitude",
    "amplitudes",
    "encode",
    "decode",
]


@dataclass(frozen=True)
class Constellation:
    """An ``M``-state ring of coherent states with amplitude ``alpha0``.

    ``alpha0`` is in quadrature units where the vacuum has variance 1/2 per
    quadrature, so the mean photon number is ``S = alpha0**2``.
    """

    M: int
    alpha0: float

    def __post_init__(self):
        M = self.M
        if isinstance(M, bool) or int(M) != M:
            raise DomainError(f"M must be an integer, got {M!r}")
        M = int(M)
        if M < 4 or M & (M - 1):
            raise DomainError(f"M must be a power of two >= 4, got {M}")
        object.__setattr__(self, "M", M)
        alpha0 = float(self.alpha0)
        if not math.isfinite(alpha0) or alpha0 < 0:
            raise DomainError(f"alpha0 must be finite and >= 0, got {self.alpha0!r}")
        object.__setattr__(self, "alpha0", alpha0)

    @classmethod
    def from_photon_number(cls, M: int, S: float) -> "Constellation":
        if S < 0:
            raise DomainError(f"mean photon number must be >= 0, got {S}")
        return cls(M, math.sqrt(S))

    @property
    def S(self) -> float:
        return self.alpha0 * self.alpha0

    @property
    def n_bases(self) -> int:
        return self.M // 2

    @property
    def bits_per_basis(self) -> int:
        """Running-key bits consumed per qumode, ``log2(M/2)``."""
        return self.n_bases.bit_length() - 1

    def angle(self, ell):
        return 2.0 * np.pi * np.asarray(ell) / self.M


def _check_index(c: Constellation, ell):
    arr = np.asarray(ell)
    if arr.size and (arr.min() < 0 or arr.max() >= c.M):
        raise DomainError(f"state index out of range [0, {c.M})")
    return arr


def state_amplitude(c: Constellation, ell: int) -> complex:
    """Complex amplitude of state ``ell``; real part is the in-phase quadrature."""
    if not 0 <= ell < c.M:
        raise DomainError(f"state index {ell} out of range [0, {c.M})")
    theta = 2.0 * math.pi * ell / c.M
    return complex(c.alpha0 * math.cos(theta), c.alpha0 * math.sin(theta))


def amplitudes(c: Constellation, ell) -> np.ndarray:
    """Vectorised :func:`state_amplitude` returning a complex array."""
    theta = c.angle(_check_index(c, ell))
    return c.alpha0 * (np.cos(theta) + 1j * np.sin(theta))


def encode(c: Constellation, b, r):
    """Map data bit(s) ``b`` sent in basis ``r`` to state index(es).

    Accepts scalars or equal-shape integer arrays.
    """
    b_arr = np.asarray(b)
    r_arr = np.asarray(r)
    if b_arr.size and not np.all((b_arr == 0) | (b_arr == 1)):
        raise DomainError("data bits must be 0 or 1")
    if r_arr.size and (r_arr.min() < 0 or r_arr.max() >= c.n_bases):
        raise DomainError(f"basis index out of range [0, {c.n_bases})")
    half = c.n_bases
    ell = r_arr + ((b_arr ^ (r_arr & 1)) * half)
    if ell.ndim == 0:
        return int(ell)
    return ell.astype(np.int64)


def decode(c: Constellation, ell):
    """Inverse of :func:`encode`: returns ``(bit, basis)``."""
    arr = _check_index(c, ell)
    half = c.n_bases
    r = arr % half
    b = (arr // half) ^ (r & 1)
    if arr.ndim == 0:
        return int(b), int(r)
    return b.astype(np.uint8), r.astype(np.int64)
