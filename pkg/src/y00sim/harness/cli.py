"""Command-line front end.

Exit codes: 0 success, 1 validation error (including a refused key
generation), 2 resource limit, 3 acceptance failure (``reproduce-paper``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from ..attacks import (
    binarization_attack,
    binarization_ber_oracle,
    binarization_ber_asymptotic,
    heterodyne_keyed_decode,
    keystream_parity_table,
    search_complexity,
    seed_recovery_bruteforce,
)
from ..constellation import Constellation
from ..errors import ConfigError, DomainError, QuadratureError, ResourceLimitError
from ..infotheory import (
    TinyCipherSpec,
    exact_cipher_entropies,
    key_rate,
    posterior_bit_entropy,
    privacy_amplify,
)
from ..keystream import LfsrSpec
from ..measurement import (
    RngStream,
    helstrom_error,
    heterodyne_ber_mc,
    heterodyne_error,
    phase_error,
)
from .config import WORKERS_ENV, ExperimentConfig
from .reproduce import DEFAULT_MASTER_SEED, reproduce_paper
from .pipeline import run_keygen, run_transcript
from .transcript_io import write_transcript

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_ACCEPTANCE = 0, 1, 2, 3


def _emit(rows, fmt, stream=None):
    """Write a list of flat dicts as CSV (header + rows) or a JSON list."""
    stream = stream or sys.stdout
    if isinstance(rows, dict):
        rows = [rows]
    if fmt == "json":
        stream.write(json.dumps(rows, indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    stream.write(buf.getvalue())


def _global_options(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="experiment config JSON")
    parser.add_argument("--seed", type=int, default=d(None), help="master seed (u64)")
    parser.add_argument("--workers", type=int, default=d(None),
                        help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    parser.add_argument("--out", choices=("csv", "json"), default=d(None),
                        help="output format (default csv; reports default json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="y00sim", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber", parents=[common], help="receiver bit-error rates")
    p.add_argument("mode", nargs="?", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--model", choices=("helstrom", "heterodyne", "phase"), default="heterodyne")
    p.add_argument("--S", type=float, required=True, help="mean photon number")
    p.add_argument("--form", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--trials", type=int, default=10**6)

    p = sub.add_parser("attack", parents=[common], help="eavesdropper attacks")
    asub = p.add_subparsers(dest="attack", required=True)
    a = asub.add_parser("binarize", parents=[common])
    a.add_argument("--M", type=int)
    a.add_argument("--alpha0", type=float)
    a.add_argument("--n", type=int)
    a = asub.add_parser("heterodyne", parents=[common])
    a.add_argument("--M", type=int)
    a.add_argument("--alpha0", type=float)
    a.add_argument("--n", type=int)
    a.add_argument("--key-known", action=argparse.BooleanOptionalAction, default=True)
    a = asub.add_parser("keysearch", parents=[common])
    a.add_argument("--klen", type=int, default=16)
    a.add_argument("--taps", type=lambda s: tuple(int(t) for t in s.split(",")), default=None,
                   help="comma-separated exponents, e.g. 16,14,13,11")
    a.add_argument("--M", type=int, default=8)
    a.add_argument("--n", type=int, default=64)
    a.add_argument("--noise", type=float, default=0.0, help="bit-flip rate on l")
    a.add_argument("--top", type=int, default=10)
    a = asub.add_parser("complexity", parents=[common])
    a.add_argument("--M", type=int, default=4096)
    a.add_argument("--alpha0", type=float, default=200.0)
    a.add_argument("--klen", type=float, default=4400)
    a.add_argument("--lambda", dest="lam", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("entropy", parents=[common], help="entropy audits")
    esub = p.add_subparsers(dest="entropy", required=True)
    e = esub.add_parser("exact", parents=[common],
                        help="tiny-cipher enumeration; --config holds the instance")
    for name, typ in (("M", int), ("klen", int), ("n", int), ("sectors", int),
                      ("alpha0", float)):
        e.add_argument(f"--{name}", type=typ)
    e.add_argument("--noise", choices=("noiseless", "heterodyne"))
    e.add_argument("--enc", choices=("cyclic", "lfsr"))
    e = esub.add_parser("posterior", parents=[common])
    e.add_argument("--M", type=int, default=32)
    e.add_argument("--alpha0", type=float, required=True)
    e.add_argument("--key-known", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("keyrate", parents=[common], help="secret-key rate")
    p.add_argument("--pe", type=float, required=True)
    p.add_argument("--pb", type=float, default=0.0)
    p.add_argument("--raw", type=float, default=1e9)
    p.add_argument("--method", choices=("paper_heuristic", "ck"), default="paper_heuristic")

    p = sub.add_parser("pa", parents=[common], help="Toeplitz privacy amplification")
    p.add_argument("--in", dest="infile", required=True, help="file of 0/1 characters")
    p.add_argument("--outlen", type=int, required=True)
    p.add_argument("--hashseed", required=True,
                   help="hex; its leading in+outlen-1 bits are used")

    p = sub.add_parser("transcript", parents=[common], help="simulate and save a transcript")
    p.add_argument("--M", type=int)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--path", help="output file (format chosen by size unless --format)")
    p.add_argument("--format", choices=("csv", "binary"))

    p = sub.add_parser("keygen", parents=[common], help="key generation with privacy amplification")
    p.add_argument("--M", type=int)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--method", choices=("paper_heuristic", "ck"))
    p.add_argument("--mode", choices=("simulate", "analytic"))
    p.add_argument("--pe", type=float, help="inject Eve's error rate (analytic mode)")
    p.add_argument("--raw", type=float, help="raw bit rate, bits/s")

    sub.add_parser("reproduce-paper", parents=[common], help="full acceptance table")
    return parser


def _experiment(args, **overrides) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig.from_dict({})
    cfg = cfg.override(master_seed=args.seed, workers=args.workers, **overrides)
    return cfg.validate()


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    return int(os.environ.get(WORKERS_ENV, "1"))


def cmd_ber(args, fmt):
    if args.mode == "mc":
        if args.model != "heterodyne":
            raise DomainError("only the heterodyne receiver has a sampling model")
        seed = args.seed if args.seed is not None else 0
        est = heterodyne_ber_mc(args.S, args.trials, seed, workers=_workers(args))
        row = {"model": args.model, "S": args.S, "trials": est.trials, "errors": est.errors,
               "p_hat": est.p_hat, "ci95": est.ci95, "exact": heterodyne_error(args.S)}
    else:
        if args.model == "helstrom":
            value = helstrom_error(args.S, args.form)
        elif args.model == "heterodyne":
            value = heterodyne_error(args.S, args.form)
        else:
            value = phase_error(args.S)
        row = {"model": args.model, "S": args.S, "form": args.form, "p_b": value}
    _emit(row, fmt)


def cmd_attack(args, fmt):
    if args.attack == "complexity":
        log2c = search_complexity(args.M, args.alpha0, args.klen, args.lam)
        _emit({"M": args.M, "alpha0": args.alpha0, "klen": args.klen, "lambda": args.lam,
               "log2_C": log2c}, fmt)
        return
    if args.attack == "keysearch":
        spec = LfsrSpec(args.klen, args.taps) if args.taps else LfsrSpec.default(args.klen)
        c = Constellation(args.M, 1.0)
        gen = RngStream(args.seed or 0, 0).generator()
        seed = int(gen.integers(1, 1 << spec.degree))
        x = gen.integers(0, 2, size=args.n, dtype=np.uint8)
        l = x ^ keystream_parity_table(spec, c, args.n, seed, seed + 1)[0]
        l = l ^ (gen.random(args.n) < args.noise).astype(np.uint8)
        ranking = seed_recovery_bruteforce(l, x, spec, c, _workers(args))
        rows = [{"rank": i + 1, "seed": s, "score": sc, "n": args.n, "true_seed": s == seed}
                for i, (s, sc) in enumerate(ranking.top(args.top))]
        rank = ranking.rank_of(seed)
        if rank > args.top:
            rows.append({"rank": rank, "seed": seed, "score": int(ranking.scores[rank - 1]),
                         "n": args.n, "true_seed": True})
        _emit(rows, fmt)
        return
    cfg = _experiment(args, M=args.M, alpha0=args.alpha0, n=args.n)
    t = run_transcript(cfg)
    if args.attack == "binarize":
        est = binarization_attack(t)
        row = {"M": cfg.M, "alpha0": cfg.alpha0, "n": cfg.n, "seed": cfg.master_seed}
        row.update(est.as_dict())
        row["oracle"] = binarization_ber_oracle(cfg.M, cfg.alpha0)
        if cfg.alpha0 > 0:
            row["approx"] = binarization_ber_asymptotic(cfg.alpha0)
    else:
        est = heterodyne_keyed_decode(t, args.key_known)
        row = {"M": cfg.M, "alpha0": cfg.alpha0, "n": cfg.n, "seed": cfg.master_seed,
               "key_known": args.key_known}
        row.update(est.as_dict())
    _emit(row, fmt)


def cmd_entropy(args, fmt):
    if args.entropy == "posterior":
        c = Constellation(args.M, args.alpha0)
        h = posterior_bit_entropy(c, args.key_known)
        _emit({"M": args.M, "alpha0": args.alpha0, "key_known": args.key_known,
               "h_x_given_y": h}, fmt)
        return
    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        doc = doc.get("tiny_cipher", doc)
    for name in ("M", "klen", "n", "sectors", "alpha0", "noise", "enc"):
        value = getattr(args, name)
        if value is not None:
            doc[name] = value
    if "prior" in doc and doc["prior"] is not None:
        doc["prior"] = tuple(doc["prior"])
    try:
        spec = TinyCipherSpec(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad tiny-cipher config: {exc}", ["tiny_cipher"]) from None
    rep = exact_cipher_entropies(spec)
    out = {"spec": spec.to_dict(), "report": rep.to_dict()}
    if fmt == "csv":
        _emit(rep.to_dict(), fmt)
    else:
        sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")


def cmd_keyrate(args, fmt):
    kr = key_rate(args.pb, args.pe, args.raw, args.method)
    _emit({"p_eve": args.pe, "p_bob": args.pb, "raw": args.raw, "method": kr.method,
           "rate": kr.rate, "advantage": kr.advantage}, fmt)


def _read_bits(path):
    with open(path) as fh:
        text = "".join(fh.read().split())
    if any(ch not in "01" for ch in text):
        raise DomainError(f"{path}: expected only 0/1 characters")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def cmd_pa(args, fmt):
    bits = _read_bits(args.infile)
    need = bits.size + args.outlen - 1 if args.outlen else 0
    hexstr = args.hashseed.lower().removeprefix("0x")
    seed_bits = np.array([int(b) for ch in hexstr for b in format(int(ch, 16), "04b")],
                         dtype=np.uint8)
    if seed_bits.size < need:
        raise DomainError(f"hash seed has {seed_bits.size} bits, need {need}")
    out = privacy_amplify(bits, args.outlen, seed_bits[:need])
    _emit({"in_len": int(bits.size), "out_len": args.outlen,
           "output": "".join(map(str, out.tolist()))}, fmt)


def cmd_transcript(args, fmt):
    cfg = _experiment(args, M=args.M, alpha0=args.alpha0, n=args.n)
    t = run_transcript(cfg)
    path = args.path or cfg.output.transcript
    row = {"n": t.n, "M": cfg.M, "alpha0": cfg.alpha0, "seed": cfg.master_seed,
           "bob_errors": int(np.count_nonzero(t.b_bob != t.x))}
    if path:
        row["format"] = write_transcript(t, path, args.format)
        row["path"] = path
    _emit(row, fmt)


def cmd_keygen(args, fmt):
    cfg = _experiment(args, M=args.M, alpha0=args.alpha0, n=args.n, keygen_method=args.method,
                      keygen_mode=args.mode, keygen_p_eve=args.pe, keygen_raw_rate=args.raw)
    report = run_keygen(cfg)
    sys.stdout.write(report.render(fmt))
    refused = any(r.name == "refused" and r.value for r in report.rows)
    return EXIT_VALIDATION if refused else EXIT_OK


def cmd_reproduce(args, fmt):
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    t0 = time.perf_counter()
    report = reproduce_paper(seed, _workers(args))
    report.runtime = time.perf_counter() - t0
    sys.stdout.write(report.render(fmt))
    print(f"reproduce-paper: {len(report.rows) - len(report.failures)}/{len(report.rows)} rows "
          f"pass in {report.runtime:.1f} s", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


COMMANDS = {
    "ber": cmd_ber,
    "attack": cmd_attack,
    "entropy": cmd_entropy,
    "keyrate": cmd_keyrate,
    "pa": cmd_pa,
    "transcript": cmd_transcript,
    "keygen": cmd_keygen,
    "reproduce-paper": cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report_like = args.command in ("keygen", "reproduce-paper")
    fmt = args.out or ("json" if report_like else "csv")
    try:
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1", ["workers"])
        code = COMMANDS[args.command](args, fmt)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConfigError as exc:
        fields = f" [{', '.join(exc.fields)}]" if exc.fields else ""
        print(f"error: {exc}{fields}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DomainError, QuadratureError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
