"""Experiment configuration: one JSON document, overridable from the CLI.

Precedence, lowest to highest: built-in defaults, the ``--config`` file,
command-line flags.  Worker count additionally honours ``Y00SIM_WORKERS``
when neither the file nor ``--workers`` sets it.

Example document::

    {
      "constellation": {"M": 4096, "alpha0": 200.0},
      "lfsr": {"degree": 32, "taps": [32, 22, 2, 1]},
      "seed": "1d2c3b4a",
      "n": 100000,
      "attack": "binarize",
      "master_seed": 1,
      "workers": 4,
      "keygen": {"method": "paper_heuristic", "mode": "simulate"},
      "output": {"transcript": "run.csv", "report": "report.json", "format": "json"}
    }
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from ..constellation import Constellation
from ..errors import ConfigError
from ..keystream import DEFAULT_TAPS, LfsrSpec, SeedKey
from ..measurement import RngStream

ATTACKS = ("binarize", "keyed", "unkeyed", "none")
KEYGEN_METHODS = ("paper_heuristic", "ck")
KEYGEN_MODES = ("simulate", "analytic")
WORKERS_ENV = "Y00SIM_WORKERS"

# substream reserved for drawing a seed key when none is configured
SUBSTREAM_SEEDKEY = 5 << 56


@dataclass(frozen=True)
class KeygenConfig:
    method: str = "paper_heuristic"
    mode: str = "simulate"
    p_eve: float | None = None
    raw_rate: float = 1e9


@dataclass(frozen=True)
class OutputConfig:
    transcript: str | None = None
    report: str | None = None
    format: str = "json"


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 128
    alpha0: float = 200.0
    lfsr_degree: int = 32
    lfsr_taps: tuple | None = None
    seed: str | None = None
    n: int = 1000
    attack: str = "binarize"
    master_seed: int = 0
    workers: int = 1
    keygen: KeygenConfig = field(default_factory=KeygenConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "ExperimentConfig":
        """Check every field; raise one :class:`ConfigError` naming all bad ones."""
        bad = []
        msgs = []

        def fail(fieldname, msg):
            bad.append(fieldname)
            msgs.append(f"{fieldname}: {msg}")

        M = self.M
        if not isinstance(M, int) or M < 4 or M & (M - 1):
            fail("constellation.M", f"must be a power of two >= 4, got {M!r}")
        if not isinstance(self.alpha0, (int, float)) or not self.alpha0 >= 0:
            fail("constellation.alpha0", f"must be >= 0, got {self.alpha0!r}")
        if not isinstance(self.lfsr_degree, int) or self.lfsr_degree < 3:
            fail("lfsr.degree", f"must be an integer >= 3, got {self.lfsr_degree!r}")
        elif self.lfsr_taps is None and self.lfsr_degree not in DEFAULT_TAPS:
            fail("lfsr.taps", f"no default polynomial for degree {self.lfsr_degree}")
        elif self.lfsr_taps is not None:
            try:
                LfsrSpec(self.lfsr_degree, tuple(self.lfsr_taps))
            except ConfigError as exc:
                fail("lfsr.taps", str(exc))
        if isinstance(M, int) and M >= 4 and isinstance(self.lfsr_degree, int):
            if self.lfsr_degree < (M // 2).bit_length() - 1:
                fail("lfsr.degree", "seed key length must be >= log2(M/2)")
        if self.seed is not None:
            try:
                key = SeedKey.from_hex(self.seed, self.lfsr_degree)
                if not any(key.bits):
                    fail("seed", "all-zero seed yields a constant running key")
            except (ValueError, TypeError) as exc:
                fail("seed", f"not a {self.lfsr_degree}-bit hex string ({exc})")
        if not isinstance(self.n, int) or self.n < 0:
            fail("n", f"must be an integer >= 0, got {self.n!r}")
        if self.attack not in ATTACKS:
            fail("attack", f"must be one of {ATTACKS}, got {self.attack!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 1 << 64:
            fail("master_seed", "must be an unsigned 64-bit integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            fail("workers", f"must be an integer >= 1, got {self.workers!r}")
        kg = self.keygen
        if kg.method not in KEYGEN_METHODS:
            fail("keygen.method", f"must be one of {KEYGEN_METHODS}")
        if kg.mode not in KEYGEN_MODES:
            fail("keygen.mode", f"must be one of {KEYGEN_MODES}")
        if kg.p_eve is not None and not 0 <= kg.p_eve <= 0.5:
            fail("keygen.p_eve", "must lie in [0, 1/2]")
        if kg.mode == "analytic" and kg.p_eve is None:
            fail("keygen.p_eve", "analytic mode needs an injected p_eve")
        if not kg.raw_rate > 0:
            fail("keygen.raw_rate", "must be > 0")
        if self.output.format not in ("csv", "json"):
            fail("output.format", "must be csv or json")
        if bad:
            raise ConfigError("; ".join(msgs), bad)
        return self

    @property
    def constellation(self) -> Constellation:
        return Constellation(self.M, self.alpha0)

    @property
    def lfsr_spec(self) -> LfsrSpec:
        if self.lfsr_taps is None:
            return LfsrSpec.default(self.lfsr_degree)
        return LfsrSpec(self.lfsr_degree, tuple(self.lfsr_taps))

    def seed_key(self) -> SeedKey:
        if self.seed is not None:
            return SeedKey.from_hex(self.seed, self.lfsr_degree)
        gen = RngStream(self.master_seed, SUBSTREAM_SEEDKEY).generator()
        return SeedKey.random(self.lfsr_degree, gen)

    def to_dict(self, echo: bool = False) -> dict:
        """Nested JSON form.  ``echo=True`` drops ``workers``, which never
        affects results, so reports stay identical across worker counts."""
        out = {
            "constellation": {"M": self.M, "alpha0": float(self.alpha0)},
            "lfsr": {
                "degree": self.lfsr_degree,
                "taps": list(self.lfsr_spec.taps) if echo or self.lfsr_taps is not None else None,
            },
            "seed": self.seed_key().to_hex() if echo else self.seed,
            "n": self.n,
            "attack": self.attack,
            "master_seed": self.master_seed,
            "keygen": {
                "method": self.keygen.method,
                "mode": self.keygen.mode,
                "p_eve": self.keygen.p_eve,
                "raw_rate": float(self.keygen.raw_rate),
            },
            "output": {
                "transcript": self.output.transcript,
                "report": self.output.report,
                "format": self.output.format,
            },
        }
        if not echo:
            out["workers"] = self.workers
        if out["lfsr"]["taps"] is None:
            del out["lfsr"]["taps"]
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {"constellation", "lfsr", "seed", "n", "attack", "master_seed",
                 "workers", "keygen", "output"}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {unknown}", unknown)
        base = cls()
        con = doc.get("constellation", {})
        lfsr = doc.get("lfsr", {})
        kg = doc.get("keygen", {})
        out = doc.get("output", {})
        taps = lfsr.get("taps")
        return cls(
            M=con.get("M", base.M),
            alpha0=con.get("alpha0", base.alpha0),
            lfsr_degree=lfsr.get("degree", base.lfsr_degree),
            lfsr_taps=tuple(taps) if taps is not None else None,
            seed=doc.get("seed"),
            n=doc.get("n", base.n),
            attack=doc.get("attack", base.attack),
            master_seed=doc.get("master_seed", base.master_seed),
            workers=doc.get("workers", _env_workers(base.workers)),
            keygen=KeygenConfig(
                method=kg.get("method", "paper_heuristic"),
                mode=kg.get("mode", "simulate"),
                p_eve=kg.get("p_eve"),
                raw_rate=kg.get("raw_rate", 1e9),
            ),
            output=OutputConfig(
                transcript=out.get("transcript"),
                report=out.get("report"),
                format=out.get("format", "json"),
            ),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})", ["config"]) from None
        return cls.from_dict(doc)

    def override(self, **changes) -> "ExperimentConfig":
        """Apply non-None overrides; dotted keygen/output fields use ``keygen_*``/``output_*``."""
        flat = {k: v for k, v in changes.items() if v is not None}
        kg = {k[7:]: flat.pop(k) for k in list(flat) if k.startswith("keygen_")}
        out = {k[7:]: flat.pop(k) for k in list(flat) if k.startswith("output_")}
        cfg = replace(self, **flat)
        if kg:
            cfg = replace(cfg, keygen=replace(cfg.keygen, **kg))
        if out:
            cfg = replace(cfg, output=replace(cfg.output, **out))
        return cfg


def _env_workers(default: int) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}", ["workers"]) from None
