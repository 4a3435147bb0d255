"""Non-negative integers stored as 63-bit payload limbs in 64-bit words.

Each ``uint64`` limb holds 63 value bits; the top bit is free so that a
carry or a shifted-out bit shows up as bit 63 of the word after an
addition, without needing wider arithmetic. Limbs are stored
least-significant first and the canonical form has no high zero limbs
(zero is a single zero limb).

The numba kernels at the bottom operate on raw ``uint64`` buffers and are
shared with :mod:`threehalves.power_stream`, whose hot loop multiplies by
three in place.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LIMB_BITS = 63
MASK = np.uint64((1 << LIMB_BITS) - 1)

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U32 = np.uint64(32)
_U62 = np.uint64(62)
_U63 = np.uint64(63)
_LO32 = np.uint64(0xFFFFFFFF)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


class LimbValue:
    """Immutable arbitrary-precision non-negative integer.

    >>> LimbValue.from_int(9).to_int()
    9
    >>> LimbValue.from_int(2**63).limbs.tolist()
    [0, 1]
    """

    __slots__ = ("limbs",)

    def __init__(self, limbs):
        arr = np.array(limbs, dtype=np.uint64).reshape(-1)
        if arr.size == 0:
            arr = np.zeros(1, dtype=np.uint64)
        if np.any(arr > MASK):
            raise ValueError("limb exceeds 63-bit payload")
        arr = arr[: _canonical_length(arr, arr.size)].copy()
        arr.flags.writeable = False
        self.limbs = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "LimbValue":
        # trusted path for kernel outputs that are already canonical
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj.limbs = arr
        return obj

    @classmethod
    def from_int(cls, value: int) -> "LimbValue":
        if value < 0:
            raise ValueError("LimbValue holds non-negative integers only")
        out = []
        while True:
            out.append(value & int(MASK))
            value >>= LIMB_BITS
            if not value:
                break
        return cls(out)

    def to_int(self) -> int:
        acc = 0
        for limb in reversed(self.limbs.tolist()):
            acc = (acc << LIMB_BITS) | limb
        return acc

    def bit_length(self) -> int:
        top = int(self.limbs[-1])
        return (self.limbs.size - 1) * LIMB_BITS + top.bit_length() if top else 0

    def is_zero(self) -> bool:
        return self.limbs.size == 1 and self.limbs[0] == 0

    def __len__(self) -> int:
        return int(self.limbs.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LimbValue):
            return NotImplemented
        return np.array_equal(self.limbs, other.limbs)

    def __hash__(self) -> int:
        return hash(self.limbs.tobytes())

    def __repr__(self) -> str:
        if self.limbs.size <= 2:
            return f"LimbValue({self.to_int()})"
        return f"LimbValue(<{self.limbs.size} limbs, {self.bit_length()} bits>)"


def shift_left_1(v: LimbValue) -> LimbValue:
    """Return ``2*v``, growing by one limb when the top bit shifts out."""
    return LimbValue._wrap(_shl1(v.limbs))


def add(a: LimbValue, b: LimbValue) -> LimbValue:
    return LimbValue._wrap(_add(a.limbs, b.limbs))


def mul(a: LimbValue, b: LimbValue) -> LimbValue:
    """Schoolbook product; only used to seed workers with large powers of 3."""
    return LimbValue._wrap(_mul(a.limbs, b.limbs))


def triple(v: LimbValue) -> LimbValue:
    """``v + (v << 1)`` computed in a single fused pass."""
    buf = np.zeros(v.limbs.size + 1, dtype=np.uint64)
    buf[: v.limbs.size] = v.limbs
    n = _triple_inplace(buf, v.limbs.size)
    return LimbValue._wrap(buf[:n])


def bit(v: LimbValue, i: int) -> int:
    if i < 0:
        return 0
    q, off = divmod(i, LIMB_BITS)
    if q >= v.limbs.size:
        return 0
    return int(v.limbs[q] >> np.uint64(off)) & 1


def extract_bits(v: LimbValue, hi: int, count: int) -> int:
    """Bits ``hi, hi-1, ..., hi-count+1`` packed MSB-first into an int.

    Positions outside ``[0, bit_length)`` read as zero, so windows that run
    below bit 0 are padded on the right.

    >>> extract_bits(LimbValue.from_int(81), 3, 10)
    64
    """
    if not 1 <= count <= 64:
        raise ValueError("count must be in 1..64")
    return int(_extract(v.limbs, v.limbs.size, hi, count))


def low_bits(v: LimbValue, count: int) -> LimbValue:
    """``v mod 2**count``."""
    if count <= 0:
        return LimbValue([0])
    q, off = divmod(count, LIMB_BITS)
    if q >= v.limbs.size:
        return v
    arr = v.limbs[: q + 1].copy()
    arr[q] &= np.uint64((1 << off) - 1)
    return LimbValue(arr)


def power_of_two(e: int) -> LimbValue:
    q, off = divmod(e, LIMB_BITS)
    arr = np.zeros(q + 1, dtype=np.uint64)
    arr[q] = np.uint64(1 << off)
    return LimbValue._wrap(arr)


def compare(a: LimbValue, b: LimbValue) -> int:
    """Three-way comparison: -1, 0 or 1."""
    return int(_compare(a.limbs, b.limbs))


# ---------------------------------------------------------------------------
# numba kernels on raw uint64 buffers
# ---------------------------------------------------------------------------


@njit(cache=True)
def _canonical_length(buf, length):
    while length > 1 and buf[length - 1] == _U0:
        length -= 1
    return length


@njit(cache=True)
def _shl1(src):
    n = src.size
    out = np.zeros(n + 1, dtype=np.uint64)
    shift_in = _U0
    for i in range(n):
        v = src[i]
        out[i] = ((v << _U1) & MASK) | shift_in
        shift_in = v >> _U62
    out[n] = shift_in
    return out[: _canonical_length(out, n + 1)]


@njit(cache=True)
def _add(a, b):
    if a.size < b.size:
        a, b = b, a
    n = a.size
    out = np.zeros(n + 1, dtype=np.uint64)
    carry = _U0
    for i in range(n):
        s = a[i] + carry
        if i < b.size:
            s += b[i]
        carry = s >> _U63
        out[i] = s & MASK
    out[n] = carry
    return out[: _canonical_length(out, n + 1)]


@njit(cache=True)
def _mul63(a, b):
    # 63x63 -> 126-bit product, returned as (high 63 bits, low 63 bits)
    a0 = a & _LO32
    a1 = a >> _U32
    b0 = b & _LO32
    b1 = b >> _U32
    p00 = a0 * b0
    mid = a0 * b1 + a1 * b0 + (p00 >> _U32)
    lo64 = (mid << _U32) | (p00 & _LO32)
    hi64 = a1 * b1 + (mid >> _U32)
    return (hi64 << _U1) | (lo64 >> _U63), lo64 & MASK


@njit(cache=True)
def _mul(a, b):
    na = a.size
    nb = b.size
    out = np.zeros(na + nb, dtype=np.uint64)
    for i in range(na):
        ai = a[i]
        if ai == _U0:
            continue
        carry = _U0
        for j in range(nb):
            hi, lo = _mul63(ai, b[j])
            t = out[i + j] + lo
            c1 = t >> _U63
            t = (t & MASK) + carry
            c2 = t >> _U63
            out[i + j] = t & MASK
            carry = hi + c1 + c2
        # carry <= 2^63 here; fold it into the remaining limbs
        k = i + nb
        while carry != _U0:
            t = out[k] + carry
            out[k] = t & MASK
            carry = t >> _U63
            k += 1
    return out[: _canonical_length(out, na + nb)]


@njit(cache=True)
def _compare(a, b):
    if a.size != b.size:
        return 1 if a.size > b.size else -1
    for i in range(a.size - 1, -1, -1):
        if a[i] != b[i]:
            return 1 if a[i] > b[i] else -1
    return 0


@njit(cache=True)
def _triple_inplace(buf, length):
    """Multiply ``buf[:length]`` by 3 in place; return the new length.

    ``buf`` must have room for one extra limb.
    """
    shift_in = _U0
    carry = _U0
    for i in range(length):
        v = buf[i]
        s = v + (((v << _U1) & MASK) | shift_in) + carry
        shift_in = v >> _U62
        carry = s >> _U63
        buf[i] = s & MASK
    top = shift_in + carry
    if top != _U0:
        buf[length] = top
        length += 1
    return length


@njit(cache=True)
def _window64(buf, length, lo):
    """Bits ``[lo, lo + 64)`` as a uint64; negative ``lo`` pads with zeros."""
    pad = 0
    if lo < 0:
        if lo <= -64:
            return _U0
        pad = -lo
        lo = 0
    q = lo // 63
    off = lo - q * 63
    w = _U0
    if q < length:
        w = buf[q] >> np.uint64(off)
    if q + 1 < length:
        w |= buf[q + 1] << np.uint64(63 - off)
    return w << np.uint64(pad)


@njit(cache=True)
def _extract(buf, length, hi, count):
    w = _window64(buf, length, hi - count + 1)
    if count < 64:
        w &= (_U1 << np.uint64(count)) - _U1
    return w
