"""Information-theoretic audits of Y-00 instances.

Exact conditional entropies for tiny cipher instances by full enumeration,
per-qumode posterior bit entropy by 2D quadrature over the heterodyne
outcome plane, key-rate calculators and Toeplitz-hash privacy
amplification.

Measurement outcomes are quantized to ``sectors`` equal angular wedges;
wedge ``k`` covers angles ``[2 pi k / sectors, 2 pi (k+1) / sectors)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import cubature
from scipy.signal import fftconvolve
from scipy.special import expit, logsumexp

from .constellation import Constellation, amplitudes, decode, encode
from .errors import DomainError, QuadratureError, ResourceLimitError
from .keystream import LfsrSpec, bits_to_bases, lfsr_sequences
from .measurement import RngStream, heterodyne_sample

__all__ = [
    "TinyCipherSpec",
    "EntropyReport",
    "KeyRate",
    "binary_entropy",
    "entropy_bits",
    "key_rate",
    "privacy_amplify",
    "toeplitz_matrix",
    "sector_probabilities",
    "sector_matrix",
    "exact_cipher_entropies",
    "random_tiny_spec",
    "posterior_bit_entropy",
    "posterior_bit_entropy_mc",
]

QUAD_ATOL = 1e-9
ENUMERATION_BUDGET = 10**8
_LN2 = math.log(2.0)
# radial extent beyond alpha0 where the outcome density is below exp(-144)
_R_PAD = 12.0


def binary_entropy(p):
    """Binary entropy in bits; ``h(0) = h(1) = 0``."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise DomainError("probability must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1 - arr) * np.log1p(-arr) / _LN2
    h = np.where((arr == 0.0) | (arr == 1.0), 0.0, h)
    if h.ndim == 0:
        return float(h)
    return h


def entropy_bits(p) -> float:
    """Shannon entropy of a probability array; terms below 1e-300 count as 0."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log2(p)))


def _h_from_logit(z):
    # binary entropy of expit(z) in bits, stable for large |z|
    a = np.abs(z)
    q = expit(-a)
    return (q * a + np.log1p(np.exp(-a))) / _LN2


@dataclass(frozen=True)
class KeyRate:
    rate: float
    advantage: bool
    method: str


def key_rate(p_bob: float, p_eve: float, raw_rate: float, method: str = "paper_heuristic") -> KeyRate:
    """Secret-key rate after privacy amplification.

    ``paper_heuristic`` keeps one secret bit per error Eve makes
    (``p_eve * raw_rate``).  ``ck`` is the wiretap rate
    ``h(p_eve) - h(p_bob)`` for the two induced binary symmetric channels.
    Without an advantage (``p_bob >= p_eve``) the rate is 0 and
    ``advantage`` is False.
    """
    for name, p in (("p_bob", p_bob), ("p_eve", p_eve)):
        if not 0 <= p <= 1:
            raise DomainError(f"{name} must lie in [0, 1], got {p}")
    if not raw_rate > 0:
        raise DomainError(f"raw_rate must be > 0, got {raw_rate}")
    if method not in ("paper_heuristic", "ck"):
        raise DomainError(f"unknown key-rate method {method!r}")
    if p_bob >= p_eve:
        return KeyRate(0.0, False, method)
    if method == "paper_heuristic":
        rate = p_eve * raw_rate
    else:
        rate = max(0.0, binary_entropy(p_eve) - binary_entropy(p_bob)) * raw_rate
    return KeyRate(rate, True, method)


def _as_bits(bits, name):
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or np.any(arr > 1):
        raise DomainError(f"{name} must be a 1-D 0/1 sequence")
    return arr


def toeplitz_matrix(hash_seed, in_len: int, out_len: int) -> np.ndarray:
    """``T[i, j] = hash_seed[j - i + out_len - 1]``.

    ``hash_seed`` runs along the diagonals from the bottom-left corner to
    the top-right one.
    """
    h = _as_bits(hash_seed, "hash_seed")
    i = np.arange(out_len)[:, None]
    j = np.arange(in_len)[None, :]
    return h[j - i + out_len - 1]


_PA_DIRECT_LIMIT = 1 << 22
_PA_BLOCK = 1 << 18


def privacy_amplify(bits, out_len: int, hash_seed) -> np.ndarray:
    """Compress ``bits`` to ``out_len`` bits with a Toeplitz hash over GF(2).

    Computes ``T @ bits mod 2`` with ``T`` from :func:`toeplitz_matrix`
    without forming ``T``; large inputs go through blockwise FFT
    correlation whose per-block sums stay small enough to round exactly.
    """
    b = _as_bits(bits, "bits")
    n = b.size
    if out_len < 0 or out_len > n:
        raise DomainError(f"out_len must lie in [0, {n}], got {out_len}")
    if out_len == 0:
        return np.zeros(0, dtype=np.uint8)
    h = _as_bits(hash_seed, "hash_seed")
    if h.size != n + out_len - 1:
        raise DomainError(f"hash_seed must have {n + out_len - 1} bits, got {h.size}")
    # c[k] = sum_j h[j + k] b[j]; output bit i is c[out_len - 1 - i]
    if n * out_len <= _PA_DIRECT_LIMIT:
        c = np.correlate(h.astype(np.int64), b.astype(np.int64), mode="valid") & 1
    else:
        c = np.zeros(out_len, dtype=np.uint8)
        for lo in range(0, n, _PA_BLOCK):
            bb = b[lo:lo + _PA_BLOCK].astype(float)
            hh = h[lo:lo + bb.size + out_len - 1].astype(float)
            raw = fftconvolve(hh, bb[::-1], mode="valid")
            ints = np.rint(raw)
            if np.max(np.abs(raw - ints), initial=0.0) > 0.25:
                raise ArithmeticError("FFT correlation lost integer precision")
            c ^= (ints.astype(np.int64) & 1).astype(np.uint8)
    return c[::-1].astype(np.uint8)


# -- quantized outcome channel ----------------------------------------------

def _check_converged(res, what, **diag):
    if res.status != "converged":
        raise QuadratureError(
            f"{what}: cubature did not converge",
            dict(diag, error=np.max(res.error), subdivisions=res.subdivisions),
        )


@lru_cache(maxsize=128)
def _sector_matrix(M: int, alpha0: float, sectors: int) -> np.ndarray:
    c = Constellation(M, alpha0)
    amp = amplitudes(c, np.arange(M))
    ax, ay = amp.real, amp.imag
    rmax = alpha0 + _R_PAD

    def density(pts):
        rho = pts[:, 0:1]
        phi = pts[:, 1:2]
        yx, yy = rho * np.cos(phi), rho * np.sin(phi)
        d2 = (yx - ax) ** 2 + (yy - ay) ** 2
        return rho * np.exp(-d2) / np.pi

    out = np.empty((M, sectors))
    for k in range(sectors):
        lo = 2 * np.pi * k / sectors
        hi = 2 * np.pi * (k + 1) / sectors
        res = cubature(density, [0.0, lo], [rmax, hi], atol=QUAD_ATOL, rtol=1e-10)
        _check_converged(res, "sector probability", M=M, alpha0=alpha0, sector=k)
        out[:, k] = res.estimate
    out.setflags(write=False)
    return out


def sector_matrix(c: Constellation, sectors: int) -> np.ndarray:
    """Row ``l`` is the outcome-sector distribution of state ``l``."""
    if not 1 <= sectors:
        raise DomainError("sectors must be >= 1")
    return _sector_matrix(c.M, c.alpha0, int(sectors))


def sector_probabilities(c: Constellation, sectors: int, ell: int) -> np.ndarray:
    """Probability that a heterodyne outcome for state ``ell`` lands in each sector."""
    if not 0 <= ell < c.M:
        raise DomainError(f"state index {ell} out of range [0, {c.M})")
    return np.array(sector_matrix(c, sectors)[ell])


def noiseless_channel(c: Constellation, sectors: int) -> np.ndarray:
    """One-hot channel: the sector containing each exact state."""
    W = np.zeros((c.M, sectors))
    W[np.arange(c.M), (np.arange(c.M) * sectors) // c.M] = 1.0
    return W


# -- tiny cipher enumeration ------------------------------------------------

@dataclass(frozen=True)
class TinyCipherSpec:
    """A cipher instance small enough to enumerate ``(K, X_n, Y_n)`` exactly.

    ``enc='cyclic'`` repeats the key bits as running key and draws the key
    uniformly from all ``2**klen`` values; ``enc='lfsr'`` uses a degree
    ``klen`` LFSR over the nonzero keys.  ``prior`` lists ``P(x)`` for
    ``x = 0 .. 2**n - 1`` with ``x_1`` as the most significant bit.
    """

    M: int = 4
    klen: int = 2
    n: int = 2
    sectors: int = 4
    noise: str = "noiseless"
    alpha0: float = 0.0
    prior: tuple | None = None
    enc: str = "cyclic"
    taps: tuple | None = None

    def __post_init__(self):
        if self.M not in (4, 8):
            raise DomainError(f"tiny cipher M must be 4 or 8, got {self.M}")
        if not 1 <= self.klen <= 12:
            raise DomainError(f"klen must lie in [1, 12], got {self.klen}")
        if not 1 <= self.n <= 4:
            raise DomainError(f"n must lie in [1, 4], got {self.n}")
        if not 2 <= self.sectors <= 8:
            raise DomainError(f"sectors must lie in [2, 8], got {self.sectors}")
        if self.noise not in ("noiseless", "heterodyne"):
            raise DomainError(f"unknown noise model {self.noise!r}")
        if self.enc not in ("cyclic", "lfsr"):
            raise DomainError(f"unknown ENC box {self.enc!r}")
        if self.enc == "lfsr" and self.klen < 3:
            raise DomainError("an LFSR ENC box needs klen >= 3")
        if self.klen < self.constellation.bits_per_basis:
            raise DomainError("klen must be >= log2(M/2)")
        if self.prior is not None:
            p = np.asarray(self.prior, dtype=float)
            if p.shape != (1 << self.n,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                raise DomainError("prior must be a distribution over 2**n data words")
            object.__setattr__(self, "prior", tuple(float(v) for v in p))
        if self.taps is not None:
            object.__setattr__(self, "taps", tuple(self.taps))

    @property
    def constellation(self) -> Constellation:
        return Constellation(self.M, self.alpha0)

    @property
    def enumeration_size(self) -> int:
        return (1 << self.klen) * (1 << self.n) * self.sectors ** self.n

    def lfsr_spec(self) -> LfsrSpec:
        return LfsrSpec(self.klen, self.taps) if self.taps else LfsrSpec.default(self.klen)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EntropyReport:
    h_x_given_y: float
    h_k_given_y: float
    h_y_given_xk: float
    h_k: float
    h_x: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return asdict(self)


def _key_bases(spec: TinyCipherSpec, c: Constellation):
    need = spec.n * c.bits_per_basis
    if spec.enc == "cyclic":
        keys = np.arange(1 << spec.klen, dtype=np.int64)
        shifts = spec.klen - 1 - (np.arange(need) % spec.klen)
        bits = (keys[:, None] >> shifts[None, :]) & 1
    else:
        keys = np.arange(1, 1 << spec.klen, dtype=np.int64)
        bits = lfsr_sequences(spec.lfsr_spec(), keys, need)
    return bits_to_bases(bits, c)


def _clamp(v):
    return 0.0 if -1e-12 < v < 0 else v


def exact_cipher_entropies(spec: TinyCipherSpec) -> EntropyReport:
    """Exact ``H(X|Y)``, ``H(K|Y)``, ``H(Y|X,K)`` and ``H(K)`` by enumeration.

    ``Y`` is the sequence of outcome sectors.  Under ``noiseless`` each
    state lands deterministically in the sector containing it; under
    ``heterodyne`` sector probabilities come from quadrature.
    """
    if spec.enumeration_size > ENUMERATION_BUDGET:
        raise ResourceLimitError(
            f"enumeration size {spec.enumeration_size} exceeds {ENUMERATION_BUDGET}"
        )
    c = spec.constellation
    s, n = spec.sectors, spec.n
    W = noiseless_channel(c, s) if spec.noise == "noiseless" else sector_matrix(c, s)
    row_entropy = np.array([entropy_bits(w) for w in W])

    R = _key_bases(spec, c)                       # (Nk, n)
    nk = R.shape[0]
    xs = np.arange(1 << n)
    X = (xs[:, None] >> np.arange(n - 1, -1, -1)) & 1   # (Nx, n)
    px = np.full(1 << n, 1.0 / (1 << n)) if spec.prior is None else np.array(spec.prior)
    pk = 1.0 / nk

    L = encode(c, np.broadcast_to(X[None], (nk,) + X.shape),
               np.broadcast_to(R[:, None, :], (nk,) + X.shape))   # (Nk, Nx, n)

    h_y_given_xk = float(np.sum(pk * px[None, :] * row_entropy[L].sum(axis=2)))

    ny = s ** n
    chunk = max(1, (1 << 22) // ((1 << n) * ny))
    p_xy = np.zeros((1 << n, ny))
    h_ky = 0.0
    for lo in range(0, nk, chunk):
        Lc = L[lo:lo + chunk]
        P = W[Lc[..., 0]]
        for i in range(1, n):
            P = (P[..., :, None] * W[Lc[..., i]][..., None, :]).reshape(P.shape[:2] + (-1,))
        J = P * (pk * px)[None, :, None]
        p_xy += J.sum(axis=0)
        h_ky += entropy_bits(J.sum(axis=1))
    p_y = p_xy.sum(axis=0)
    h_y = entropy_bits(p_y)
    return EntropyReport(
        h_x_given_y=_clamp(entropy_bits(p_xy) - h_y),
        h_k_given_y=_clamp(h_ky - h_y),
        h_y_given_xk=h_y_given_xk,
        h_k=math.log2(nk),
        h_x=entropy_bits(px),
    )


def random_tiny_spec(rng: np.random.Generator, noise: str = "noiseless",
                     alpha0: float = 1.0) -> TinyCipherSpec:
    """Draw a random valid instance within the enumeration budget."""
    while True:
        M = int(rng.choice([4, 8]))
        klen = int(rng.integers(1, 13))
        n = int(rng.integers(1, 5))
        sectors = int(rng.integers(2, 9))
        enc = "lfsr" if klen >= 3 and rng.random() < 0.5 else "cyclic"
        prior = None
        if rng.random() < 0.5:
            w = rng.random(1 << n) ** 3
            prior = tuple(w / w.sum())
        try:
            spec = TinyCipherSpec(M, klen, n, sectors, noise,
                                  alpha0 if noise != "noiseless" else 0.0, prior, enc)
        except DomainError:
            continue
        # keep the random draws fast: well inside the hard budget
        if spec.enumeration_size <= 1 << 22:
            return spec


# -- posterior bit entropy --------------------------------------------------

def _bit_masks(c: Constellation):
    bits, _ = decode(c, np.arange(c.M))
    return bits == 0, bits == 1


def _posterior_known(alpha0: float):
    # Basis-0 frame: states at +alpha0 (bit 0) and -alpha0 (bit 1).  The
    # integrand is the +alpha0 half of the mixture; the other half is its
    # mirror image with the same posterior entropy.
    def f(pts):
        u, v = pts[:, 0], pts[:, 1]
        dens = np.exp(-((u - alpha0) ** 2 + v ** 2)) / np.pi
        return dens * _h_from_logit(4.0 * alpha0 * u)

    a = [alpha0 - _R_PAD, -_R_PAD]
    b = [alpha0 + _R_PAD, _R_PAD]
    return f, a, b


def _posterior_unknown(c: Constellation):
    alpha0 = c.alpha0
    theta = c.angle(np.arange(c.M))
    m0, m1 = _bit_masks(c)

    def f(pts):
        rho = pts[:, 0:1]
        phi = pts[:, 1:2]
        # log-density exponents relative to the common exp(-rho^2 - alpha0^2)
        g = 2.0 * rho * alpha0 * np.cos(phi - theta[None, :])
        lse_all = logsumexp(g, axis=1)
        z = logsumexp(g[:, m0], axis=1) - logsumexp(g[:, m1], axis=1)
        r = rho[:, 0]
        dens = np.exp(lse_all - r * r - alpha0 * alpha0) / (c.M * np.pi)
        return 2.0 * r * dens * _h_from_logit(z)

    # half-turn maps bit b to 1 - b, leaving the posterior entropy unchanged
    a = [max(0.0, alpha0 - _R_PAD), 0.0]
    b = [alpha0 + _R_PAD, np.pi]
    return f, a, b


def posterior_bit_entropy(c: Constellation, key_known: bool) -> float:
    """Per-qumode ``H(X|Y)`` in bits for Eve's heterodyne outcome.

    With the key the outcome is judged against the two states of the true
    basis; every basis is a rotation of basis 0, so its value is the
    average.  Without the key the bit posterior is taken over the whole
    ``M``-state mixture.
    """
    f, a, b = _posterior_known(c.alpha0) if key_known else _posterior_unknown(c)
    res = cubature(f, a, b, atol=QUAD_ATOL, rtol=1e-9, max_subdivisions=100000)
    _check_converged(res, "posterior entropy", M=c.M, alpha0=c.alpha0, key_known=key_known)
    return float(min(1.0, max(0.0, res.estimate)))


def posterior_bit_entropy_mc(c: Constellation, key_known: bool, samples: int,
                             master_seed: int) -> tuple:
    """Monte Carlo estimate ``(mean, standard error)`` of the posterior entropy."""
    gen = RngStream(master_seed, 0).generator()
    ell = gen.integers(0, c.M, size=samples)
    y = heterodyne_sample(amplitudes(c, ell), gen)
    if key_known:
        _, r = decode(c, ell)
        u = np.real(y * np.exp(-1j * c.angle(r)))
        h = _h_from_logit(4.0 * c.alpha0 * u)
    else:
        theta = c.angle(np.arange(c.M))
        m0, m1 = _bit_masks(c)
        g = 2.0 * c.alpha0 * np.real(y[:, None] * np.exp(-1j * theta[None, :]))
        h = _h_from_logit(logsumexp(g[:, m0], axis=1) - logsumexp(g[:, m1], axis=1))
    return float(h.mean()), float(h.std(ddof=1) / math.sqrt(samples))
