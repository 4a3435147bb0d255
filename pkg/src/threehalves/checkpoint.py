"""Binary checkpoint of one worker's segment.

Layout, all little-endian::

    magic "PW32"            4 bytes
    format version          u16
    k                       u8
    exponent j              u64   (3^j is stored and j is not yet binned)
    j_end                   u64
    limb count              u32
    limbs                   u64 x limb count, least significant first
    histogram total         u64   (range is [j - total, j))
    counts                  u64 x 2^k
    extremes                u64 x 4: min prefix, max prefix, argmin j, argmax j
    waring candidate count  u32
    candidates              (j u64, side u8, leading run u32, status u8) each
    CRC-32                  u32 over every preceding byte
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .histogram import Histogram
from .limb_core import MASK, LimbValue
from .power_stream import Confirmation, ExtremesRecord, PowerState, Side, WaringCandidate

MAGIC = b"PW32"
VERSION = 1

_HEAD = struct.Struct("<4sHBQQI")
_CAND = struct.Struct("<QBIB")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    k: int
    exponent: int
    j_end: int
    value: LimbValue
    histogram: Histogram
    extremes: ExtremesRecord = field(default_factory=ExtremesRecord)
    candidates: list[WaringCandidate] = field(default_factory=list)
    version: int = VERSION

    @property
    def done(self) -> bool:
        return self.exponent >= self.j_end

    def state(self) -> PowerState:
        return PowerState(self.value, self.exponent)

    def to_bytes(self) -> bytes:
        if self.histogram.j_end != self.exponent:
            raise CheckpointError("histogram does not end at the stored exponent")
        parts = [
            _HEAD.pack(MAGIC, self.version, self.k, self.exponent, self.j_end, len(self.value)),
            self.value.limbs.astype("<u8").tobytes(),
            _U64.pack(self.histogram.total),
            self.histogram.counts.astype("<u8").tobytes(),
            self.extremes.to_array().astype("<u8").tobytes(),
            _U32.pack(len(self.candidates)),
        ]
        for c in self.candidates:
            parts.append(_CAND.pack(c.exponent, c.side.value, c.leading_run, c.confirmed.value))
        body = b"".join(parts)
        return body + _U32.pack(zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if len(data) < _HEAD.size + 4:
            raise CheckpointError("checkpoint truncated")
        body, (crc,) = data[:-4], _U32.unpack(data[-4:])
        if zlib.crc32(body) != crc:
            raise CheckpointError("CRC mismatch: checkpoint is corrupt or truncated")
        magic, version, k, j, j_end, nlimbs = _HEAD.unpack_from(body, 0)
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version} (expected {VERSION})")
        pos = _HEAD.size
        try:
            limbs = np.frombuffer(body, dtype="<u8", count=nlimbs, offset=pos).astype(np.uint64)
            pos += 8 * nlimbs
            (total,) = _U64.unpack_from(body, pos)
            pos += 8
            counts = np.frombuffer(body, dtype="<u8", count=1 << k, offset=pos).astype(np.uint64)
            pos += 8 << k
            ext = np.frombuffer(body, dtype="<u8", count=4, offset=pos)
            pos += 32
            (ncand,) = _U32.unpack_from(body, pos)
            pos += 4
            cands = []
            for _ in range(ncand):
                cj, side, run, status = _CAND.unpack_from(body, pos)
                pos += _CAND.size
                cands.append(WaringCandidate(cj, Side(side), run, Confirmation(status)))
        except (ValueError, struct.error) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from exc
        if pos != len(body):
            raise CheckpointError("trailing bytes in checkpoint")
        if np.any(limbs > MASK):
            raise CheckpointError("limb with marker bit set")
        hist = Histogram(k, counts, j - total, j)
        return cls(k, j, j_end, LimbValue(limbs), hist, ExtremesRecord.from_array(ext), cands, version)

    def save(self, path) -> None:
        """Write atomically: a failed write leaves no partial file behind."""
        path = Path(path)
        data = self.to_bytes()
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path) -> "Checkpoint":
        return cls.from_bytes(Path(path).read_bytes())
