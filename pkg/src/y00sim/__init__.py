"""Simulation toolkit for keyed M-ary phase-shift stream ciphers on coherent states.

Submodules:

``constellation``  ring of coherent states and the bit/basis interleaving
``keystream``      LFSR running keys and basis extraction
``measurement``    receiver error models and reproducible sampling
``attacks``        binarization, heterodyne decoding and seed search
``infotheory``     entropies, key rates and Toeplitz privacy amplification
``harness``        configuration, pipelines, reports and the CLI
"""

from .attacks import (
    SeedRanking,
    Transcript,
    binarization_attack,
    heterodyne_keyed_decode,
    search_complexity,
    seed_recovery_bruteforce,
    simulate_transcript,
)
from .constellation import Constellation, decode, encode
from .errors import ConfigError, DomainError, QuadratureError, ResourceLimitError
from .infotheory import (
    TinyCipherSpec,
    exact_cipher_entropies,
    key_rate,
    posterior_bit_entropy,
    privacy_amplify,
)
from .keystream import LfsrSpec, LfsrStream, SeedKey, running_key_sequence
from .measurement import (
    BerEstimate,
    RngStream,
    helstrom_error,
    heterodyne_error,
    heterodyne_sample,
    phase_error,
)

__version__ = "0.1.0"

__all__ = [
    "BerEstimate", "ConfigError", "Constellation", "DomainError", "LfsrSpec", "LfsrStream",
    "QuadratureError", "ResourceLimitError", "RngStream", "SeedKey", "SeedRanking",
    "TinyCipherSpec", "Transcript", "binarization_attack", "decode", "encode",
    "exact_cipher_entropies", "helstrom_error", "heterodyne_error", "heterodyne_keyed_decode",
    "heterodyne_sample", "key_rate", "phase_error", "posterior_bit_entropy", "privacy_amplify",
    "running_key_sequence", "search_complexity", "seed_recovery_bruteforce",
    "simulate_transcript",
]
