#!/usr/bin/env python3
"""Independent reference for the LFSR bit stream and the permutation generator.

Used only to produce the frozen vectors in tests/test_rpg.cpp. It works on an
explicit bit list driven by the recurrence of x^32 + x^22 + x^2 + x + 1 rather
than on a packed shift register.
"""
import sys


def lfsr_bits(seed, count):
    # a[0..31] are the seed bits, LSB first; a[n+32] = a[n+22]^a[n+2]^a[n+1]^a[n]
    a = [(seed >> i) & 1 for i in range(32)]
    while len(a) < count + 32:
        n = len(a) - 32
        a.append(a[n + 22] ^ a[n + 2] ^ a[n + 1] ^ a[n])
    return a[:count]


def initial_reg():
    return (list(range(0x0B, 0x34)) + list(range(0x3F, 0x38, -1))
            + list(range(0x0A, -1, -1)) + list(range(0x38, 0x33, -1)))


def generate(seed):
    bits = lfsr_bits(seed, 384)
    idx = [int("".join(map(str, bits[6 * i:6 * i + 6])), 2) for i in range(64)]
    reg = initial_reg()
    out = []
    for k in range(64):
        rest = 63 - k
        i = idx[k]
        if k < 12:
            sel = i if i <= 0x28 else i - 0x28
        else:
            sel = i if i <= rest else i & rest
        out.append(reg[sel])
        reg[sel] = reg[rest]
    return out[6:] + out[:6]


if __name__ == "__main__":
    bits = lfsr_bits(1, 384)
    print("lfsr seed=1 384 bits:",
          "".join("%02x" % int("".join(map(str, bits[8 * i:8 * i + 8])), 2) for i in range(48)))
    for s in [int(x, 0) for x in (sys.argv[1:] or ["1", "0x2545F491", "0xDEADBEEF"])]:
        print("perm seed=%#x:" % s, " ".join("%02x" % v for v in generate(s)))
