from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threehalves.limb_core import LimbValue
from threehalves.power_stream import (
    Confirmation,
    ExtremesRecord,
    PowerState,
    Side,
    bin_index,
    confirm_waring,
    frac_prefix64,
    leading_run,
    new_stream,
    step,
    sweep,
    update_extremes,
    waring_screen,
    waring_threshold,
)

MASK128 = (1 << 128) - 1


def frac_oracle(j):
    """Exact fractional part of (3/2)^j."""
    return Fraction(3**j, 2**j) - (3**j // 2**j)


def stream_states(n):
    s = new_stream()
    for _ in range(n):
        yield s
        s = step(s)


def test_new_stream():
    s = new_stream()
    assert s.value.to_int() == 0b11 and s.exponent == 1
    assert bin_index(s, 10) == 512
    assert s.value.bit_length() == 2


def test_step_examples():
    s = step(new_stream())
    assert s.value.to_int() == 0b1001 and s.exponent == 2
    s9 = PowerState(LimbValue.from_int(3**9), 9)
    s10 = step(s9)
    assert format(s10.value.to_int(), "b") == "1110011010101001" and s10.exponent == 10
    assert s9.exponent == 9  # step leaves its input alone
    s6 = step(PowerState(LimbValue.from_int(0b11110011), 5))
    assert s6.value.to_int() == 729 == 0b1011011001


def test_bin_index_table_rows():
    bins = {s.exponent: bin_index(s, 10) for s in stream_states(40)}
    assert bins[5] == 608
    assert bins[39] == 901
    assert bins[40] == 328


def test_frac_prefix64():
    states = list(stream_states(10))
    assert frac_prefix64(states[0]) == 0x8000000000000000
    assert frac_prefix64(states[1]) == 0x4000000000000000
    assert frac_prefix64(states[9]) == 681 << 54 == 0xAA40000000000000


def test_bin_index_rejects_bad_k():
    with pytest.raises(ValueError):
        bin_index(new_stream(), 0)
    with pytest.raises(ValueError):
        bin_index(new_stream(), 65)


def test_value_matches_naive_oracle_to_1000():
    naive = 3
    for s in stream_states(1000):
        assert s.value.to_int() == naive
        naive = naive + naive + naive


def test_bins_match_128bit_oracle():
    for s in stream_states(64):
        j = s.exponent
        low = (3**j & MASK128) & ((1 << j) - 1)
        for k in (1, 5, 10, 17, 64):
            expected = low >> (j - k) if j >= k else low << (k - j)
            assert bin_index(s, k) == expected
            assert bin_index(s, k) < 2**k


def test_bins_match_fraction_oracle_beyond_one_limb():
    s = new_stream()
    for j in range(1, 400):
        if j % 37 == 0:
            assert bin_index(s, 24) == int(frac_oracle(j) * 2**24)
            assert frac_prefix64(s) == int(frac_oracle(j) * 2**64)
        s.advance()


def test_prefix_consistency():
    for s in stream_states(300):
        full = bin_index(s, 64)
        for k in (1, 10, 33, 63):
            assert bin_index(s, k) == full >> (64 - k)


def test_step_deterministic():
    a, b = new_stream(), new_stream()
    for _ in range(500):
        a.advance()
        b = step(b)
    assert a == b
    assert np.array_equal(a.value.limbs, b.value.limbs)


def test_extremes_small():
    s1, s2 = list(stream_states(2))
    rec = update_extremes(ExtremesRecord(), s1)
    assert rec.min_prefix == rec.max_prefix == 1 << 63
    rec = update_extremes(rec, s2)
    assert (rec.min_prefix, rec.argmin_j) == (1 << 62, 2)
    assert (rec.max_prefix, rec.argmax_j) == (1 << 63, 1)


def test_extremes_first_40_against_fraction_oracle():
    rec = ExtremesRecord()
    for s in stream_states(40):
        rec = update_extremes(rec, s)
    fracs = {j: frac_oracle(j) for j in range(1, 41)}
    jmin = min(fracs, key=fracs.get)
    jmax = max(fracs, key=fracs.get)
    assert (rec.argmin_j, rec.argmax_j) == (jmin, jmax)
    assert rec.min_prefix == int(fracs[jmin] * 2**64)
    assert rec.gap >= 2**64 // 3


def test_extremes_tie_keeps_smaller_exponent():
    rec = ExtremesRecord().observe(5, 10).observe(5, 3).observe(5, 7)
    assert rec.argmin_j == 3 and rec.argmax_j == 3


def test_waring_screen_gate_and_row8():
    s4 = PowerState(LimbValue.from_int(81), 4)
    assert waring_screen(s4) is None
    s8 = PowerState(LimbValue.from_int(3**8), 8)
    assert format(3**8 % 2**8, "08b") == "10100001"
    assert leading_run(s8) == (1, Side.UPPER)
    assert waring_threshold(8) == 3
    assert waring_screen(s8) is None


def test_confirm_waring_small_exponents():
    # {(3/2)^2} = 1/4 <= (3/4)^2; {(3/2)^1} = 1/2 >= 1 - 3/4
    s2 = PowerState(LimbValue.from_int(9), 2)
    assert confirm_waring(s2, Side.LOWER) is Confirmation.VIOLATION
    assert confirm_waring(s2, Side.UPPER) is Confirmation.NON_VIOLATION
    s1 = new_stream()
    assert confirm_waring(s1, Side.UPPER) is Confirmation.VIOLATION
    for j in range(1, 30):
        s = PowerState(LimbValue.from_int(3**j), j)
        f = frac_oracle(j)
        bound = Fraction(3, 4) ** j
        assert (confirm_waring(s, Side.LOWER) is Confirmation.VIOLATION) == (f <= bound)
        assert (confirm_waring(s, Side.UPPER) is Confirmation.VIOLATION) == (f >= 1 - bound)


def test_threshold_is_conservative():
    import math

    for j in range(1, 200_000, 7):
        assert waring_threshold(j) <= math.ceil(j * math.log2(4 / 3) - 1)


@settings(max_examples=300, deadline=None)
@given(
    st.integers(min_value=8, max_value=700),
    st.integers(min_value=0, max_value=2**80),
    st.booleans(),
    st.data(),
)
def test_screen_has_no_false_negatives(j, int_part, upper, data):
    # synthetic fractions inside the excluded zone must always be flagged
    limit = 3**j // 2**j  # f * 2^j <= 3^j  <=>  f <= floor(3^j / 2^j)
    f = data.draw(st.integers(min_value=1, max_value=max(limit, 1)))
    if upper:
        f = 2**j - f
    s = PowerState(LimbValue.from_int((int_part << j) | f), j)
    run, side = leading_run(s)
    assert side is (Side.UPPER if upper else Side.LOWER)
    assert run >= waring_threshold(j)


def test_sweep_matches_step_by_step():
    k = 10
    counts = np.zeros(1 << k, dtype=np.uint64)
    s = new_stream()
    rec = sweep(s, 301, k, counts, ExtremesRecord())
    expected = np.zeros(1 << k, dtype=np.uint64)
    ref = ExtremesRecord()
    for t in stream_states(300):
        expected[bin_index(t, k)] += 1
        ref = update_extremes(ref, t)
    assert np.array_equal(counts, expected)
    assert rec == ref
    assert s.exponent == 301 and s.value.to_int() == 3**301


def test_sweep_records_flagged_candidates():
    # screening from j=1 flags early terms and confirms them exactly
    from threehalves.power_stream import _sweep

    s = new_stream()
    counts = np.zeros(4, dtype=np.uint64)
    ext = ExtremesRecord().to_array()
    length, j, flagged = _sweep(s.buf, s.length, 1, 10, 2, counts, ext, 1)
    assert flagged and j == 1


def test_sweep_screen_quiet_in_first_ten_thousand():
    cands = []
    sweep(new_stream(), 10_001, 8, np.zeros(256, dtype=np.uint64), ExtremesRecord(), cands)
    assert cands == []
