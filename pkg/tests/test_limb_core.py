import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import naive_limbs as naive
from threehalves.limb_core import (
    MASK,
    LimbValue,
    add,
    bit,
    compare,
    extract_bits,
    low_bits,
    mul,
    power_of_two,
    shift_left_1,
    triple,
)

values = st.integers(min_value=0, max_value=2**500)


def lv(x):
    return LimbValue.from_int(x)


def assert_canonical(v):
    limbs = v.limbs
    assert limbs.dtype == np.uint64
    assert np.all(limbs <= MASK)
    assert limbs.size == 1 or limbs[-1] != 0


def test_shift_left_examples():
    assert shift_left_1(lv(3)).to_int() == 0b110
    assert shift_left_1(lv(0)) == lv(0)
    out = shift_left_1(lv(2**63 - 1))
    assert out.limbs.tolist() == [2**63 - 2, 1]


def test_add_examples():
    assert add(lv(0b110), lv(0b11)).to_int() == 0b1001
    assert add(lv(12345), lv(0)) == lv(12345)
    assert add(lv(2**63 - 1), lv(1)).limbs.tolist() == [0, 1]


def test_mul_examples():
    assert mul(lv(3), lv(3)).to_int() == 9
    assert mul(lv(987654321987654321), lv(1)) == lv(987654321987654321)
    x = lv(3**20)
    assert mul(x, x).to_int() == 12157665459056928801


def test_mul_power_of_three_against_repeated_triple():
    expected = 1
    for _ in range(40):
        expected = naive.from_limbs(naive.add(naive.double(naive.to_limbs(expected)), naive.to_limbs(expected)))
    assert expected == 12157665459056928801


def test_bit():
    nine = lv(9)
    assert bit(nine, 0) == 1
    assert bit(nine, 1) == 0
    assert bit(nine, 500) == 0
    assert bit(nine, -1) == 0
    v = lv(3**10)
    assert "".join(str(bit(v, i)) for i in range(15, -1, -1)) == "1110011010101001"


def test_bit_across_limb_boundary():
    v = lv(1 << 63 | 1 << 62)
    assert bit(v, 62) == 1 and bit(v, 63) == 1 and bit(v, 64) == 0


def test_extract_bits_examples():
    assert extract_bits(lv(3), 0, 10) == 512
    assert extract_bits(lv(81), 3, 10) == 64
    v = lv(3**300)
    assert extract_bits(v, v.bit_length() - 1, 1) == 1


def test_extract_bits_count_bounds():
    with pytest.raises(ValueError):
        extract_bits(lv(1), 0, 0)
    with pytest.raises(ValueError):
        extract_bits(lv(1), 0, 65)


def test_extract_bits_spanning_three_limbs():
    x = (0b1011 << 124) | (2**63 - 1) << 62 | 0b1101
    v = lv(x)
    for hi in range(0, 130):
        for count in (1, 7, 63, 64):
            expected = 0
            for i in range(hi, hi - count, -1):
                expected = 2 * expected + ((x >> i) & 1 if i >= 0 else 0)
            assert extract_bits(v, hi, count) == expected


def test_zero_is_single_limb():
    assert lv(0).limbs.tolist() == [0]
    assert LimbValue([0, 0, 0]).limbs.tolist() == [0]
    assert lv(0).bit_length() == 0


def test_rejects_marker_bit():
    with pytest.raises(ValueError):
        LimbValue([2**63])
    with pytest.raises(ValueError):
        LimbValue.from_int(-1)


def test_helpers():
    assert low_bits(lv(0b101101), 3).to_int() == 0b101
    assert low_bits(lv(5), 0).to_int() == 0
    assert low_bits(lv(5), 200).to_int() == 5
    assert power_of_two(130).to_int() == 2**130
    assert compare(lv(5), lv(7)) == -1 and compare(lv(2**70), lv(5)) == 1 and compare(lv(9), lv(9)) == 0


def test_outputs_are_immutable():
    v = lv(12)
    with pytest.raises(ValueError):
        v.limbs[0] = 1


@settings(max_examples=400, deadline=None)
@given(values, values)
def test_add_mul_match_naive(a, b):
    A, B = naive.to_limbs(a), naive.to_limbs(b)
    s = add(lv(a), lv(b))
    p = mul(lv(a), lv(b))
    assert s.limbs.tolist() == naive.add(A, B)
    assert p.limbs.tolist() == naive.mul(A, B)
    assert_canonical(s)
    assert_canonical(p)


@settings(max_examples=400, deadline=None)
@given(values)
def test_shift_matches_naive_and_doubling(a):
    d = shift_left_1(lv(a))
    assert d.limbs.tolist() == naive.double(naive.to_limbs(a))
    assert d == add(lv(a), lv(a))
    assert triple(lv(a)) == add(d, lv(a))
    assert_canonical(d)


@settings(max_examples=200, deadline=None)
@given(values, st.integers(min_value=-70, max_value=600), st.integers(min_value=1, max_value=64))
def test_extract_bits_pure_and_total(a, hi, count):
    v = lv(a)
    got = extract_bits(v, hi, count)
    assert got == extract_bits(v, hi, count)
    lo = hi - count + 1
    expected = (a >> lo) if lo >= 0 else (a << -lo)
    assert got == expected & ((1 << count) - 1)


def test_bulk_oracle_equivalence():
    # 10^4 random pairs up to 2^500 against the independent list implementation
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        a = int.from_bytes(rng.bytes(63), "little") >> int(rng.integers(0, 504))
        b = int.from_bytes(rng.bytes(63), "little") >> int(rng.integers(0, 504))
        A, B = naive.to_limbs(a), naive.to_limbs(b)
        assert add(lv(a), lv(b)).limbs.tolist() == naive.add(A, B)
        assert mul(lv(a), lv(b)).limbs.tolist() == naive.mul(A, B)
        assert shift_left_1(lv(a)).limbs.tolist() == naive.double(A)


def test_mul_extreme_limbs():
    top = 2**63 - 1
    x = LimbValue([top] * 5)
    assert mul(x, x).to_int() == x.to_int() ** 2
