# The top fractional bits of (3/2)^j, read straight off 3^j
from fractions import Fraction

from threehalves.power_stream import bin_index, frac_prefix64, new_stream, step

# 3^j written in binary; the binary point of (3/2)^j sits j places from the right
s = new_stream()
for _ in range(12):
    j = s.exponent
    bits = format(s.value.to_int(), "b")
    whole, frac = bits[:-j] or "0", bits[-j:]
    print(f"j={j:<3} {whole:>5}.{frac:<20} bin(k=10)={bin_index(s, 10)}")
    s = step(s)

# same thing via exact rationals, as a cross-check
for j in (39, 40):
    s = new_stream()
    for _ in range(j - 1):
        s = step(s)
    f = Fraction(3**j, 2**j) % 1
    print(j, bin_index(s, 10), int(f * 1024))

# 64-bit prefix of the fraction, as a float for eyeballing
s = new_stream()
for _ in range(99):
    s = step(s)
print("{(3/2)^100} ~", frac_prefix64(s) / 2**64, float(Fraction(3**100, 2**100) % 1))
