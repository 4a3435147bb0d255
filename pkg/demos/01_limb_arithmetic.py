# Limb arithmetic: multiply by 3 as shift-and-add on 63-bit limbs
import numpy as np

from threehalves.limb_core import LimbValue, add, bit, extract_bits, mul, shift_left_1, triple

three = LimbValue.from_int(3)
six = shift_left_1(three)               # 3 << 1
print(format(six.to_int(), "b"), "+", format(three.to_int(), "b"), "=", format(add(six, three).to_int(), "b"))

# each limb holds 63 payload bits; the top bit of the uint64 stays clear
big = LimbValue.from_int(2**63 - 1)
print(big.limbs, "->", triple(big).limbs)  # the carry spills into a second limb

# powers of three, step by step
v = three
for j in range(1, 11):
    print(f"3^{j:<2} = {v.to_int():>6} = {format(v.to_int(), 'b')}")
    v = triple(v)

# a larger one, checked against Python ints
v = three
for _ in range(999):
    v = triple(v)
print("3^1000 has", v.bit_length(), "bits, matches:", v.to_int() == 3**1000)
print("limbs used:", v.limbs.size, "dtype:", v.limbs.dtype)

# pick bits out of the middle
print("bit 0 of 3^1000:", bit(v, 0))
print("bits 100..163:", hex(extract_bits(v, 163, 64)), hex((3**1000 >> 100) & (2**64 - 1)))

# schoolbook product on limbs
a, b = LimbValue.from_int(3**200), LimbValue.from_int(7**150)
print("mul ok:", mul(a, b).to_int() == 3**200 * 7**150)
print(np.array(mul(a, b).limbs[:3]))
