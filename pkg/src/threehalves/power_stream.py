"""Stream of (3/2)^j fractional parts read off the binary expansion of 3^j.

After ``j`` multiply-by-3 steps the binary point of (3/2)^j sits ``j`` bits
from the right of 3^j, so the fractional part is simply the low ``j`` bits:
``{(3/2)^j} = (3^j mod 2^j) / 2^j``. The stream never divides; it just
tracks ``j`` alongside the limbs.

Besides binning, two monitors run on each term:

* extremes of the fractional part (64-bit prefix resolution), a surrogate
  for the limsup/liminf gap;
* a cheap screen for ``{(3/2)^j} <= (3/4)^j`` or ``>= 1 - (3/4)^j``, which
  counts the run of identical leading fractional bits. A term within
  ``(3/4)^j`` of 0 has at least ``j*log2(4/3) - 1`` leading zeros (ones
  for the upper side), so anything below that run length is cleared
  without big-integer work. Flagged terms are settled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numba import njit

from .limb_core import (
    LIMB_BITS,
    LimbValue,
    _triple_inplace,
    _window64,
    add,
    compare,
    low_bits,
    mul,
    power_of_two,
)

# log2(4/3) = 0.41503749927..., truncated so the screen stays conservative
LOG2_4_3 = 0.4150374
WARING_MIN_EXPONENT = 8
PREFIX_ONE = 1 << 64

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U63 = np.uint64(63)
_NO_SCREEN = np.int64(1) << np.int64(62)


def limbs_needed(exponent: int) -> int:
    """Buffer size (limbs) that holds 3^exponent plus one spare limb."""
    bits = math.floor(exponent * math.log2(3)) + 2
    return bits // LIMB_BITS + 2


class PowerState:
    """3^j in a growable limb buffer together with the exponent j."""

    __slots__ = ("buf", "length", "exponent")

    def __init__(self, value: LimbValue, exponent: int, capacity: int = 0):
        if exponent < 1:
            raise ValueError("exponent must be >= 1")
        n = len(value)
        self.buf = np.zeros(max(capacity, n + 1, limbs_needed(exponent)), dtype=np.uint64)
        self.buf[:n] = value.limbs
        self.length = n
        self.exponent = exponent

    @property
    def value(self) -> LimbValue:
        return LimbValue._wrap(self.buf[: self.length].copy())

    def reserve(self, exponent: int) -> None:
        """Make sure the buffer can grow up to 3^exponent without reallocating."""
        need = limbs_needed(exponent)
        if need > self.buf.size:
            grown = np.zeros(need, dtype=np.uint64)
            grown[: self.length] = self.buf[: self.length]
            self.buf = grown

    def advance(self) -> None:
        """In-place ``value <- value + (value << 1)``, ``exponent += 1``."""
        if self.length + 1 >= self.buf.size:
            self.reserve(self.exponent + 64 * LIMB_BITS)
        self.length = _triple_inplace(self.buf, self.length)
        self.exponent += 1

    def copy(self) -> "PowerState":
        return PowerState(self.value, self.exponent, capacity=self.buf.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerState):
            return NotImplemented
        return self.exponent == other.exponent and self.value == other.value

    def __repr__(self) -> str:
        return f"PowerState(exponent={self.exponent}, value={self.value!r})"


def new_stream() -> PowerState:
    return PowerState(LimbValue.from_int(3), 1)


def step(s: PowerState) -> PowerState:
    """Return the next state; ``s`` is left untouched."""
    nxt = s.copy()
    nxt.advance()
    return nxt


def frac_prefix64(s: PowerState) -> int:
    """``floor({(3/2)^j} * 2**64)``."""
    return int(_window64(s.buf, s.length, s.exponent - 64))


def bin_index(s: PowerState, k: int) -> int:
    """Top ``k`` fractional bits, i.e. ``floor({(3/2)^j} * 2**k)``."""
    if not 1 <= k <= 64:
        raise ValueError("k must be in 1..64")
    return frac_prefix64(s) >> (64 - k)


# ---------------------------------------------------------------------------
# monitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremesRecord:
    """Smallest and largest 64-bit fraction prefix seen, with their exponents.

    ``argmin_j == 0`` marks an empty record. Ties keep the smaller exponent.
    """

    min_prefix: int = PREFIX_ONE - 1
    max_prefix: int = 0
    argmin_j: int = 0
    argmax_j: int = 0

    @property
    def empty(self) -> bool:
        return self.argmin_j == 0

    @property
    def gap(self) -> int:
        return 0 if self.empty else self.max_prefix - self.min_prefix

    def observe(self, prefix: int, j: int) -> "ExtremesRecord":
        rec = self
        if rec.empty or prefix < rec.min_prefix or (prefix == rec.min_prefix and j < rec.argmin_j):
            rec = replace(rec, min_prefix=prefix, argmin_j=j)
        if rec.argmax_j == 0 or prefix > rec.max_prefix or (prefix == rec.max_prefix and j < rec.argmax_j):
            rec = replace(rec, max_prefix=prefix, argmax_j=j)
        return rec

    def merge(self, other: "ExtremesRecord") -> "ExtremesRecord":
        rec = self
        if not other.empty:
            rec = rec.observe(other.min_prefix, other.argmin_j)
            rec = rec.observe(other.max_prefix, other.argmax_j)
        return rec

    def to_array(self) -> np.ndarray:
        return np.array([self.min_prefix, self.max_prefix, self.argmin_j, self.argmax_j], dtype=np.uint64)

    @classmethod
    def from_array(cls, arr) -> "ExtremesRecord":
        lo, hi, amin, amax = (int(x) for x in arr)
        return cls(lo, hi, amin, amax)


def update_extremes(rec: ExtremesRecord, s: PowerState) -> ExtremesRecord:
    return rec.observe(frac_prefix64(s), s.exponent)


class Side(Enum):
    LOWER = 0
    UPPER = 1


class Confirmation(Enum):
    SCREEN_ONLY = 0
    VIOLATION = 1
    NON_VIOLATION = 2


@dataclass(frozen=True)
class WaringCandidate:
    exponent: int
    side: Side
    leading_run: int
    confirmed: Confirmation = Confirmation.SCREEN_ONLY


def waring_threshold(j: int) -> int:
    return math.ceil(LOG2_4_3 * j - 1)


def leading_run(s: PowerState) -> tuple[int, Side]:
    """Length of the run of equal leading fractional bits and its bit value."""
    run, top = _leading_run(s.buf, s.length, s.exponent, np.uint64(frac_prefix64(s)))
    return int(run), Side(int(top))


def confirm_waring(s: PowerState, side: Side) -> Confirmation:
    """Exact check of ``{x} <= (3/4)^j`` (LOWER) or ``{x} >= 1 - (3/4)^j`` (UPPER).

    With ``f = 3^j mod 2^j``, the lower case is ``f * 2^j <= 3^j`` and the
    upper case is ``4^j <= 3^j + f * 2^j``.
    """
    j = s.exponent
    value = s.value
    scaled = mul(low_bits(value, j), power_of_two(j))
    if side is Side.LOWER:
        hit = compare(scaled, value) <= 0
    else:
        hit = compare(power_of_two(2 * j), add(value, scaled)) <= 0
    return Confirmation.VIOLATION if hit else Confirmation.NON_VIOLATION


def waring_screen(s: PowerState, confirm: bool = True) -> WaringCandidate | None:
    """Screen the current term; ``None`` unless the leading run is long enough."""
    if s.exponent < WARING_MIN_EXPONENT:
        return None
    return _screen_candidate(s, confirm)


def _screen_candidate(s: PowerState, confirm: bool) -> WaringCandidate | None:
    run, side = leading_run(s)
    if run < waring_threshold(s.exponent):
        return None
    status = confirm_waring(s, side) if confirm else Confirmation.SCREEN_ONLY
    return WaringCandidate(s.exponent, side, run, status)


# ---------------------------------------------------------------------------
# hot loop
# ---------------------------------------------------------------------------


@njit(cache=True)
def _clz(x):
    n = 0
    while (x >> _U63) == _U0:
        x <<= _U1
        n += 1
    return n


@njit(cache=True)
def _leading_run(buf, length, j, prefix):
    top = prefix >> _U63
    x = prefix if top == _U0 else ~prefix
    if x != _U0:
        run = _clz(x)
    else:
        run = 64
        pos = j - 64
        while pos > 0:
            w = _window64(buf, length, pos - 64)
            if top != _U0:
                w = ~w
            if w != _U0:
                run += _clz(w)
                break
            run += 64
            pos -= 64
    if run > j:
        run = j
    return run, top


@njit(cache=True)
def _sweep(buf, length, j, j_stop, k, counts, ext, screen_from):
    """Bin exponents ``j .. j_stop-1``, updating counts and extremes in place.

    Stops early, without stepping past ``j``, when the Waring screen flags
    the current term. Returns ``(length, j, flagged)``; on a normal exit the
    buffer holds 3^j_stop.
    """
    shift = np.uint64(64 - k)
    while j < j_stop:
        p = _window64(buf, length, j - 64)
        counts[np.int64(p >> shift)] += _U1
        uj = np.uint64(j)
        if ext[2] == _U0 or p < ext[0]:
            ext[0] = p
            ext[2] = uj
        if ext[3] == _U0 or p > ext[1]:
            ext[1] = p
            ext[3] = uj
        if j >= screen_from:
            run, top = _leading_run(buf, length, j, p)
            if run >= math.ceil(0.4150374 * j - 1.0):
                return length, j, True
        length = _triple_inplace(buf, length)
        j += 1
    return length, j, False


def sweep(
    s: PowerState,
    j_stop: int,
    k: int,
    counts: np.ndarray,
    extremes: ExtremesRecord,
    candidates: list[WaringCandidate] | None = None,
    screen: bool = True,
    confirm: bool = True,
) -> ExtremesRecord:
    """Advance ``s`` to exponent ``j_stop`` binning every term on the way.

    ``counts`` (uint64, length 2**k) is updated in place; flagged Waring
    candidates are settled exactly and appended to ``candidates``.
    """
    if s.exponent > j_stop:
        raise ValueError("stream is already past j_stop")
    s.reserve(j_stop)
    ext = extremes.to_array()
    screen_from = max(WARING_MIN_EXPONENT, 1) if screen else _NO_SCREEN
    while s.exponent < j_stop:
        length, j, flagged = _sweep(s.buf, s.length, s.exponent, j_stop, k, counts, ext, screen_from)
        s.length, s.exponent = int(length), int(j)
        if flagged:
            cand = _screen_candidate(s, confirm)
            if cand is not None and candidates is not None:
                candidates.append(cand)
            s.advance()
    return ExtremesRecord.from_array(ext)
