"""Equal-width bin counts over [0, 1) for a contiguous range of exponents."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

# 2**32 uint64 counters is already 32 GiB
MAX_HIST_BITS = 32


class HistogramError(ValueError):
    pass


@dataclass(eq=False)
class Histogram:
    """``2**k`` uint64 counters covering exponents ``[j_start, j_end)``.

    ``total`` always equals ``j_end - j_start`` and ``counts.sum()``.
    """

    k: int
    counts: np.ndarray
    j_start: int
    j_end: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_HIST_BITS:
            raise HistogramError(f"k must be in 1..{MAX_HIST_BITS}, got {self.k}")
        self.counts = np.asarray(self.counts, dtype=np.uint64)
        if self.counts.shape != (1 << self.k,):
            raise HistogramError(f"expected {1 << self.k} counters, got {self.counts.shape}")
        if self.j_end < self.j_start:
            raise HistogramError("j_end < j_start")
        if int(self.counts.sum()) != self.j_end - self.j_start:
            raise HistogramError("counts do not sum to the exponent range length")

    @classmethod
    def empty(cls, k: int, j_start: int = 1) -> "Histogram":
        if not 1 <= k <= MAX_HIST_BITS:
            raise HistogramError(f"k must be in 1..{MAX_HIST_BITS}, got {k}")
        return cls(k, np.zeros(1 << k, dtype=np.uint64), j_start, j_start)

    @property
    def r(self) -> int:
        return 1 << self.k

    @property
    def total(self) -> int:
        return self.j_end - self.j_start

    @property
    def is_empty(self) -> bool:
        return self.j_end == self.j_start

    def record(self, bin: int) -> None:
        """Count the next exponent ``j_end`` as landing in ``bin``."""
        if not 0 <= bin < self.r:
            raise HistogramError(f"bin {bin} out of range for k={self.k}")
        self.counts[bin] += np.uint64(1)
        self.j_end += 1

    def copy(self) -> "Histogram":
        return Histogram(self.k, self.counts.copy(), self.j_start, self.j_end)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (
            self.k == other.k
            and self.j_start == other.j_start
            and self.j_end == other.j_end
            and np.array_equal(self.counts, other.counts)
        )

    # -- export --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "total": self.total,
            "j_start": self.j_start,
            "j_end": self.j_end,
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Histogram":
        h = cls(int(d["k"]), np.array(d["counts"], dtype=np.uint64), int(d["j_start"]), int(d["j_end"]))
        if "total" in d and int(d["total"]) != h.total:
            raise HistogramError("total field disagrees with counts")
        return h

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Histogram":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """``bin_index,count`` lines after a header, one line per bin."""
        buf = io.StringIO()
        buf.write("bin_index,count\n")
        for i, c in enumerate(self.counts.tolist()):
            buf.write(f"{i},{c}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, j_start: int = 1) -> "Histogram":
        """Rebuild from CSV; the exponent range is not stored there."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["bin_index", "count"]:
            raise HistogramError("missing bin_index,count header")
        body = [r for r in rows[1:] if r]
        n = len(body)
        k = n.bit_length() - 1
        if n == 0 or 1 << k != n:
            raise HistogramError(f"bin count {n} is not a power of two")
        counts = np.zeros(n, dtype=np.uint64)
        for idx, cnt in body:
            counts[int(idx)] = int(cnt)
        total = int(counts.sum())
        return cls(k, counts, j_start, j_start + total)


def merge(a: Histogram, b: Histogram) -> Histogram:
    """Bin-wise sum of two histograms over adjacent exponent ranges.

    Either side may be empty. Overlapping ranges are rejected so a segment
    cannot be counted twice; so are ranges with a gap between them.
    """
    if a.k != b.k:
        raise HistogramError(f"cannot merge k={a.k} with k={b.k}")
    if b.is_empty:
        return a.copy()
    if a.is_empty:
        return b.copy()
    lo, hi = (a, b) if a.j_start <= b.j_start else (b, a)
    if hi.j_start < lo.j_end:
        raise HistogramError(
            f"overlapping ranges [{lo.j_start},{lo.j_end}) and [{hi.j_start},{hi.j_end})"
        )
    if hi.j_start > lo.j_end:
        raise HistogramError(f"gap between exponents {lo.j_end} and {hi.j_start}")
    return Histogram(a.k, a.counts + b.counts, lo.j_start, hi.j_end)


def merge_all(parts) -> Histogram:
    """Merge any number of histograms covering a contiguous range, in any order."""
    parts = sorted((p for p in parts), key=lambda h: (h.j_start, h.j_end))
    if not parts:
        raise HistogramError("nothing to merge")
    out = parts[0]
    for p in parts[1:]:
        out = merge(out, p)
    return out
