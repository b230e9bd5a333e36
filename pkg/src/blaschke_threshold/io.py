"""Zero-set cache files and CSV output with a reproducibility header."""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .blaschke import Adaptive, AdaptiveLevel, FiniteRows, ProductSpec, RowSpec, UniformStack
from .construction import WitnessSet
from .errors import CacheError
from .geometry import Point

MAGIC = b"BTZS"
CACHE_VERSION = 1
_KIND_CODES = {FiniteRows: 0, UniformStack: 1, Adaptive: 2}


def _pack_payload(spec: ProductSpec, witness: WitnessSet) -> bytes:
    out = io.BytesIO()
    kind = spec.kind
    out.write(struct.pack("<B", _KIND_CODES[type(kind)]))
    if isinstance(kind, UniformStack):
        out.write(struct.pack("<dddI", kind.alpha, kind.beta, kind.rho, kind.n_levels))
    elif isinstance(kind, Adaptive):
        out.write(struct.pack("<dI", kind.alpha, len(kind.levels)))
        for lev in kind.levels:
            out.write(struct.pack("<IdddI", lev.n, lev.alpha_n, lev.beta_n, lev.rho_n, lev.m_n))
    out.write(struct.pack("<I", len(spec.rows)))
    for r in spec.rows:
        out.write(struct.pack("<dd", r.alpha, r.gamma))
    out.write(struct.pack("<I", len(witness.v)))
    for p in witness.v:
        out.write(struct.pack("<d", p.im))
    return out.getvalue()


def spec_hash(spec: ProductSpec, witness: WitnessSet) -> str:
    return hashlib.sha256(_pack_payload(spec, witness)).hexdigest()[:16]


def dumps(spec: ProductSpec, witness: WitnessSet) -> bytes:
    """Canonical little-endian encoding: magic, version, payload, sha256(payload)."""
    payload = _pack_payload(spec, witness)
    return MAGIC + struct.pack("<I", CACHE_VERSION) + payload + hashlib.sha256(payload).digest()


def loads(data: bytes):
    if len(data) < 8 + 32 or data[:4] != MAGIC:
        raise CacheError("not a zero-set cache file")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != CACHE_VERSION:
        raise CacheError(f"cache format version {version} is not supported (expected {CACHE_VERSION})")
    payload, digest = data[8:-32], data[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise CacheError("cache checksum mismatch")
    try:
        return _unpack_payload(payload)
    except struct.error as exc:
        raise CacheError(f"truncated cache payload: {exc}") from exc


def _unpack_payload(buf: bytes):
    pos = 0

    def take(fmt):
        nonlocal pos
        vals = struct.unpack_from(fmt, buf, pos)
        pos += struct.calcsize(fmt)
        return vals

    (code,) = take("<B")
    if code == 1:
        alpha, beta, rho, n_levels = take("<dddI")
        kind = UniformStack(alpha, beta, rho, n_levels)
    elif code == 2:
        alpha, n = take("<dI")
        kind = Adaptive(tuple(AdaptiveLevel(*take("<IdddI")) for _ in range(n)), alpha)
    elif code == 0:
        kind = FiniteRows()
    else:
        raise CacheError(f"unknown product kind code {code}")
    (n_rows,) = take("<I")
    rows = tuple(RowSpec(*take("<dd")) for _ in range(n_rows))
    (n_v,) = take("<I")
    witness = WitnessSet(tuple(Point(0.0, take("<d")[0]) for _ in range(n_v)))
    if pos != len(buf):
        raise CacheError("trailing bytes in cache payload")
    return ProductSpec(rows, kind), witness


def save_cache(path, spec: ProductSpec, witness: WitnessSet) -> None:
    Path(path).write_bytes(dumps(spec, witness))


def load_cache(path):
    return loads(Path(path).read_bytes())


# ----------------------------------------------------------------- CSV


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if v != v or v in (float("inf"), float("-inf")) else f"{v:.17g}"
    return str(v)


def header_lines(command: str, config: Mapping, spec_digest: str, timestamp: bool = True) -> list[str]:
    lines = [f"blaschke-threshold {__version__}", f"command: {command}"]
    lines += [f"config.{k}: {fmt(config[k])}" for k in sorted(config)]
    lines.append(f"spec_hash: {spec_digest}")
    if timestamp:
        lines.append("timestamp: " + datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"))
    return lines


def write_csv(path, header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comment header (lines starting with '#'), then a plain CSV table."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    """(header lines, column names, rows of strings) from a file written by write_csv."""
    lines = Path(path).read_text().splitlines()
    header = [l[2:] for l in lines if l.startswith("# ")]
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(body))
    return header, rows[0], rows[1:]
