"""Receiver models: heterodyne sampling for Eve, analytic error rates for all.

Units: a coherent state with amplitude ``alpha`` gives heterodyne outcomes
``y = alpha + n`` with ``n`` complex normal, variance 1/2 per quadrature,
i.e. outcome density ``exp(-|y - alpha|**2) / pi``.  With ``S = alpha0**2``
the known-basis heterodyne error is ``Q(sqrt(2 S))`` whose exponential
envelope is ``exp(-S) / 2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .constellation import Constellation, amplitudes, decode, encode
from .errors import DomainError

__all__ = [
    "RngStream",
    "BerEstimate",
    "heterodyne_sample",
    "helstrom_error",
    "heterodyne_error",
    "phase_error",
    "bob_decide",
    "known_basis_decision",
    "heterodyne_ber_mc",
    "normal_tail",
    "map_blocks",
    "block_sizes",
    "DEFAULT_BLOCK",
]

DEFAULT_BLOCK = 1 << 20
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class RngStream:
    """Counter-based random substream.

    Draws are a pure function of ``(master_seed, substream_id)`` and the
    draw position: the pair forms the 128-bit Philox key.
    """

    master_seed: int
    substream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "substream_id"):
            v = getattr(self, name)
            if not 0 <= v < 1 << 64:
                raise DomainError(f"{name} must fit in an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        key = self.master_seed | (self.substream_id << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, substream_id: int) -> "RngStream":
        return RngStream(self.master_seed, substream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class BerEstimate:
    """Error count over ``trials`` with a 95% Wilson score half-width."""

    errors: int
    trials: int

    def __post_init__(self):
        if not 0 <= self.errors <= self.trials:
            raise DomainError(f"need 0 <= errors <= trials, got {self.errors}/{self.trials}")

    @property
    def p_hat(self) -> float:
        return self.errors / self.trials if self.trials else float("nan")

    @property
    def ci95(self) -> float:
        n = self.trials
        if n == 0:
            return float("nan")
        p = self.p_hat
        z2 = _Z95 * _Z95
        return _Z95 / (1 + z2 / n) * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))

    def sigma(self, p: float) -> float:
        """Binomial standard deviation of ``p_hat`` under true rate ``p``."""
        return math.sqrt(p * (1 - p) / self.trials)

    def within(self, p: float, nsigma: float = 3.0) -> bool:
        return abs(self.p_hat - p) <= nsigma * self.sigma(p)

    def __add__(self, other: "BerEstimate") -> "BerEstimate":
        return BerEstimate(self.errors + other.errors, self.trials + other.trials)

    def as_dict(self) -> dict:
        return {
            "errors": self.errors,
            "trials": self.trials,
            "p_hat": self.p_hat,
            "ci95": self.ci95,
        }


def normal_tail(x):
    """Standard normal upper tail ``Q(x)``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def heterodyne_sample(a, rng, size=None):
    """Heterodyne outcome(s) for coherent amplitude(s) ``a``.

    ``a`` may be a complex scalar or array; ``size`` broadcasts a scalar.
    Noise is drawn as a trailing pair axis ``(re, im)`` of standard normals
    scaled by ``sqrt(1/2)``, so outcomes for a given generator state do not
    depend on ``a``.
    """
    gen = _as_generator(rng)
    a = np.asarray(a, dtype=complex)
    if size is not None:
        size = (size,) if np.isscalar(size) else tuple(size)
    shape = a.shape if size is None else np.broadcast_shapes(a.shape, size)
    z = gen.standard_normal(shape + (2,)) * math.sqrt(0.5)
    y = a + (z[..., 0] + 1j * z[..., 1])
    if y.ndim == 0:
        return complex(y)
    return y


def _check_S(S):
    if S < 0 or not math.isfinite(S):
        raise DomainError(f"mean photon number must be finite and >= 0, got {S}")


def helstrom_error(S: float, form: str = "exact") -> float:
    """Optimal error for discriminating ``|alpha>`` from ``|-alpha>``, ``S = |alpha|**2``."""
    _check_S(S)
    e = math.exp(-4.0 * S)
    if form == "exact":
        # (1 - sqrt(1 - e)) / 2 written without cancellation
        return 0.5 * e / (1.0 + math.sqrt(1.0 - e))
    if form == "asymptotic":
        return 0.25 * e
    raise DomainError(f"unknown form {form!r}")


def heterodyne_error(S: float, form: str = "exact") -> float:
    _check_S(S)
    if form == "exact":
        return 0.5 * math.erfc(math.sqrt(S))
    if form == "asymptotic":
        return 0.5 * math.exp(-S)
    raise DomainError(f"unknown form {form!r}")


def phase_error(S: float) -> float:
    """Error rate of the optimal phase measurement (analytic only)."""
    _check_S(S)
    return 0.5 * math.exp(-2.0 * S)


def bob_decide(b_true, S: float, rng):
    """Bob's keyed optimal receiver: flip each bit with the exact Helstrom rate."""
    p = helstrom_error(S, "exact")
    gen = _as_generator(rng)
    b = np.asarray(b_true, dtype=np.uint8)
    flips = gen.random(b.shape) < p
    out = b ^ flips.astype(np.uint8)
    if out.ndim == 0:
        return int(out)
    return out


def known_basis_decision(y, c: Constellation, r):
    """Decide the bit from outcome(s) ``y`` given basis ``r``.

    Picks whichever of the two basis states is nearer, i.e. the sign of the
    projection of ``y`` on the direction of state ``r``.
    """
    theta = 2.0 * np.pi * np.asarray(r) / c.M
    proj = np.real(np.asarray(y) * np.exp(-1j * theta))
    ell = np.where(proj >= 0, r, np.asarray(r) + c.n_bases)
    b, _ = decode(c, ell)
    return b


def map_blocks(fn, blocks, workers: int = 1):
    """Apply ``fn`` to each block, returning results in block order.

    Result order, and therefore any reduction over it, is independent of
    ``workers``.
    """
    blocks = list(blocks)
    if workers <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def block_sizes(total: int, block: int = DEFAULT_BLOCK):
    """``(block_id, size)`` pairs covering ``total`` draws."""
    return [(i, min(block, total - start)) for i, start in enumerate(range(0, total, block))]


def heterodyne_ber_mc(
    S: float,
    trials: int,
    master_seed: int,
    M: int = 16,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
) -> BerEstimate:
    """Known-basis heterodyne bit-error rate by direct outcome sampling.

    Each block draws random bits and bases, samples Eve's outcome and
    decodes with the correct basis.  Block ``i`` uses substream ``i``.
    """
    _check_S(S)
    c = Constellation.from_photon_number(M, S)

    def run(item):
        block_id, size = item
        gen = RngStream(master_seed, block_id).generator()
        b = gen.integers(0, 2, size=size, dtype=np.uint8)
        r = gen.integers(0, c.n_bases, size=size)
        y = heterodyne_sample(amplitudes(c, encode(c, b, r)), gen)
        return int(np.count_nonzero(known_basis_decision(y, c, r) != b))

    errors = map_blocks(run, block_sizes(trials, block), workers)
    return BerEstimate(int(sum(errors)), trials)
