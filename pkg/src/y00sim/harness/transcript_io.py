"""On-disk transcript formats.

CSV (``n <= 100000``)::

    # y00sim transcript M=<int> alpha0=<float repr>
    i,x,r,l,y_re,y_im,b_bob
    0,1,37,101,-12.5,183.25,1
    ...

Floats are written with Python's shortest round-trip ``repr``; lines end
with ``\\n``.

Binary (``n > 100000``), all little-endian, no padding::

    header  magic  4s  b"Y00T"
            version u16 (=1)
            M       u32
            alpha0  f64
            n       u64   record count
    record  x u8, r u32, l u32, y_re f64, y_im f64, b_bob u8   (26 bytes)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..attacks import Transcript
from ..constellation import Constellation
from ..errors import DomainError

CSV_MAX_ROWS = 100_000
MAGIC = b"Y00T"
VERSION = 1
HEADER = struct.Struct("<4sHIdQ")
RECORD = np.dtype([
    ("x", "u1"), ("r", "<u4"), ("l", "<u4"),
    ("y_re", "<f8"), ("y_im", "<f8"), ("b_bob", "u1"),
])
assert RECORD.itemsize == 26

CSV_COLUMNS = ("i", "x", "r", "l", "y_re", "y_im", "b_bob")


def default_format(n: int) -> str:
    return "csv" if n <= CSV_MAX_ROWS else "binary"


def transcript_csv(t: Transcript) -> str:
    c = t.constellation
    lines = [f"# y00sim transcript M={c.M} alpha0={c.alpha0!r}", ",".join(CSV_COLUMNS)]
    re = t.y_eve.real.tolist()
    im = t.y_eve.imag.tolist()
    for i, (x, r, l, a, b, bob) in enumerate(zip(t.x.tolist(), t.r.tolist(), t.ell.tolist(),
                                                 re, im, t.b_bob.tolist())):
        lines.append(f"{i},{x},{r},{l},{a!r},{b!r},{bob}")
    return "\n".join(lines) + "\n"


def transcript_bytes(t: Transcript) -> bytes:
    c = t.constellation
    rec = np.empty(t.n, dtype=RECORD)
    rec["x"] = t.x
    rec["r"] = t.r
    rec["l"] = t.ell
    rec["y_re"] = t.y_eve.real
    rec["y_im"] = t.y_eve.imag
    rec["b_bob"] = t.b_bob
    return HEADER.pack(MAGIC, VERSION, c.M, c.alpha0, t.n) + rec.tobytes()


def write_transcript(t: Transcript, path, fmt: str | None = None) -> str:
    """Write ``t``; the format defaults by size.  Returns the format used."""
    fmt = fmt or default_format(t.n)
    path = Path(path)
    if fmt == "csv":
        if t.n > CSV_MAX_ROWS:
            raise DomainError(f"CSV transcripts hold at most {CSV_MAX_ROWS} rows")
        path.write_text(transcript_csv(t))
    elif fmt == "binary":
        path.write_bytes(transcript_bytes(t))
    else:
        raise DomainError(f"unknown transcript format {fmt!r}")
    return fmt


def read_transcript(path) -> Transcript:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        magic, version, M, alpha0, n = HEADER.unpack_from(raw)
        if version != VERSION:
            raise DomainError(f"unsupported transcript version {version}")
        rec = np.frombuffer(raw, dtype=RECORD, count=n, offset=HEADER.size)
        c = Constellation(M, alpha0)
        return Transcript(c, rec["x"], rec["r"].astype(np.int64), rec["l"].astype(np.int64),
                          rec["y_re"] + 1j * rec["y_im"], rec["b_bob"])
    text = raw.decode()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# y00sim transcript"):
        raise DomainError(f"{path}: not a y00sim transcript")
    meta = dict(tok.split("=", 1) for tok in lines[0].split()[3:])
    c = Constellation(int(meta["M"]), float(meta["alpha0"]))
    if lines[1].split(",") != list(CSV_COLUMNS):
        raise DomainError(f"{path}: unexpected CSV columns")
    body = lines[2:]
    if body:
        data = np.array([row.split(",") for row in body])
        x, r, l = (data[:, k].astype(np.int64) for k in (1, 2, 3))
        y = data[:, 4].astype(float) + 1j * data[:, 5].astype(float)
        bob = data[:, 6].astype(np.uint8)
    else:
        x = r = l = bob = np.zeros(0, dtype=np.int64)
        y = np.zeros(0, dtype=complex)
    return Transcript(c, x, r, l, y, bob)
