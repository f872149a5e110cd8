"""On-disk cache for the exact coefficient table of F.

Binary layout: magic, format version (u32 LE), valuation (i64 LE), truncation
(i64 LE), coefficient count (u32 LE), then per coefficient two signed
length-prefixed little-endian byte arrays (numerator, denominator), and a
trailing sha256 checksum of everything before it.  Lossless by construction:
big integers round-trip bit for bit.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import tempfile
from pathlib import Path

from gmpy2 import mpq

from .qseries import QSeries

__all__ = ["CoefficientCache", "CacheFormatError", "MAGIC", "FORMAT_VERSION", "default_cache_dir"]

log = logging.getLogger(__name__)

MAGIC = b"MPFC"
FORMAT_VERSION = 1
ENV_CACHE_DIR = "MAASSPART_CACHE_DIR"


class CacheFormatError(RuntimeError):
    pass


def default_cache_dir():
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "maasspart"


def _pack_int(n):
    n = int(n)
    sign = 1 if n < 0 else 0
    mag = abs(n).to_bytes((abs(n).bit_length() + 7) // 8 or 1, "little")
    return struct.pack("<BI", sign, len(mag)) + mag


def _unpack_int(buf, off):
    sign, length = struct.unpack_from("<BI", buf, off)
    off += 5
    mag = int.from_bytes(buf[off : off + length], "little")
    return (-mag if sign else mag), off + length


def serialize(series):
    body = bytearray()
    body += MAGIC
    body += struct.pack("<I", FORMAT_VERSION)
    body += struct.pack("<qq", series.valuation, series.truncation)
    body += struct.pack("<I", len(series.coeffs))
    for c in series.coeffs:
        body += _pack_int(c.numerator)
        body += _pack_int(c.denominator)
    body += hashlib.sha256(body).digest()
    return bytes(body)


def deserialize(buf):
    if len(buf) < 4 + 4 + 16 + 4 + 32 or buf[:4] != MAGIC:
        raise CacheFormatError("bad magic or truncated file")
    payload, digest = buf[:-32], buf[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise CacheFormatError("checksum mismatch")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise CacheFormatError(f"format version {version}, expected {FORMAT_VERSION}")
    valuation, truncation = struct.unpack_from("<qq", buf, 8)
    (count,) = struct.unpack_from("<I", buf, 24)
    off = 28
    coeffs = []
    for _ in range(count):
        num, off = _unpack_int(buf, off)
        den, off = _unpack_int(buf, off)
        coeffs.append(mpq(num, den))
    if off != len(payload):
        raise CacheFormatError("trailing bytes in payload")
    return QSeries(valuation, coeffs, truncation)


class CoefficientCache:
    """Directory of coefficient tables keyed by truncation order; a read at
    order M serves from any stored table with order >= M."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def _path(self, order):
        return self.directory / f"f_coeffs_v{FORMAT_VERSION}_M{order}.bin"

    def read(self, order):
        if not self.directory.is_dir():
            return None
        best = None
        for path in self.directory.glob(f"f_coeffs_v{FORMAT_VERSION}_M*.bin"):
            try:
                stored = int(path.stem.rsplit("M", 1)[1])
            except ValueError:
                continue
            if stored >= order and (best is None or stored < best[0]):
                best = (stored, path)
        if best is None:
            return None
        try:
            series = deserialize(best[1].read_bytes())
        except (CacheFormatError, OSError) as exc:
            log.warning("ignoring unusable cache file %s: %s; rebuilding", best[1], exc)
            return None
        log.info("coefficient cache hit: %s", best[1])
        return series

    def write(self, series):
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(series.truncation)
        data = serialize(series)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)  # atomic on POSIX
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path
