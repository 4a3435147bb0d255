"""Built-in reference vectors, checked by ``threehalves selftest``."""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

from .checkpoint import Checkpoint
from .histogram import Histogram, merge
from .limb_core import LimbValue, add, extract_bits, shift_left_1
from .orchestrator import RunConfig, run_segment, seed
from .power_stream import bin_index, new_stream, step
from .stats import bayes_asymptotic_lower_bound, chi_square_pvalue, chi_square_stat, posterior_lower_bound

# binary expansions of 3^1 .. 3^10; 3^6 is 729, whose expansion is easy to
# misprint as 1011011011
POWERS_OF_THREE_BITS = [
    "11",
    "1001",
    "11011",
    "1010001",
    "11110011",
    "1011011001",
    "100010001011",
    "1100110100001",
    "100110011100011",
    "1110011010101001",
]

# top 10 fractional bits of (3/2)^j for j = 1..12, 39, 40
TABLE_BINS = {
    1: 512, 2: 256, 3: 384, 4: 64, 5: 608, 6: 400, 7: 88, 8: 644,
    9: 454, 10: 681, 11: 509, 12: 764, 39: 901, 40: 328,
}

NOTES = [
    "3^6 = 729 = 1011011001 in binary; listings that print 1011011011 are off by two",
]


def _check_powers():
    s = new_stream()
    for expected in POWERS_OF_THREE_BITS:
        if format(s.value.to_int(), "b") != expected:
            return False, f"3^{s.exponent} bits {format(s.value.to_int(), 'b')} != {expected}"
        s = step(s)
    return True, "3^1..3^10 bit patterns"


def _check_shift_add():
    three = LimbValue.from_int(3)
    six = shift_left_1(three)
    ok = six.to_int() == 0b110 and add(six, three).to_int() == 0b1001
    return ok, "110 + 11 = 1001"


def _check_table_bins():
    s = new_stream()
    got = {}
    while s.exponent <= max(TABLE_BINS):
        if s.exponent in TABLE_BINS:
            got[s.exponent] = bin_index(s, 10)
        s.advance()
    bad = {j: (got[j], b) for j, b in TABLE_BINS.items() if got[j] != b}
    return not bad, "k=10 bins for j=1..12,39,40" + (f" mismatches {bad}" if bad else "")


def _check_extract():
    ok = extract_bits(LimbValue.from_int(3), 0, 10) == 512 and extract_bits(LimbValue.from_int(81), 3, 10) == 64
    return ok, "fraction prefix extraction"


def _check_seed():
    return seed(10).value.to_int() == 59049 and seed(13).value.to_int() == 1594323, "seeding 3^10, 3^13"


def _check_segment_merge():
    cfg = RunConfig(n_total=40, k=10, checkpoint_interval=7)
    whole = run_segment(cfg, 1, 41).histogram
    a = run_segment(cfg, 1, 21).histogram
    b = run_segment(cfg, 21, 41).histogram
    return merge(a, b) == whole, "segment [1,21) + [21,41) equals [1,41)"


def _check_checkpoint():
    cfg = RunConfig(n_total=100, k=6, checkpoint_interval=30)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "seg.ckpt"
        res = run_segment(cfg, 1, 101, path)
        back = Checkpoint.load(path)
    return back.histogram == res.histogram and back.done, "checkpoint round trip"


def _check_stats():
    tau = 2.0 * math.log(20.0)
    p, _ = chi_square_pvalue(tau, 2)
    h = Histogram(1, [3, 1], 1, 5)
    b, rho = bayes_asymptotic_lower_bound(2.0, 2)
    ok = (
        abs(p - 0.05) < 1e-12
        and chi_square_stat(h) == 1.0
        and abs(b - math.sqrt(2.0) * math.exp(-0.5)) < 1e-12
        and abs(rho - 1 / math.sqrt(2.0)) < 1e-12
        and posterior_lower_bound(1.0, 0.5) == 0.5
    )
    return ok, "chi-square / Bayes factor reference values"


CHECKS = [
    _check_shift_add,
    _check_powers,
    _check_extract,
    _check_table_bins,
    _check_seed,
    _check_segment_merge,
    _check_checkpoint,
    _check_stats,
]


def run_selftest(echo=print) -> bool:
    all_ok = True
    for check in CHECKS:
        try:
            ok, label = check()
        except Exception as exc:  # a crashing check is a failing check
            ok, label = False, f"{check.__name__}: {exc!r}"
        all_ok &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {label}")
    for note in NOTES:
        echo(f"note  {note}")
    return all_ok
