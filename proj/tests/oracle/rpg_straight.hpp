// Straight-line reference for the permutation generator: the LFSR as a bit
// recurrence over a list, and the two shuffle stages as plain loops over a
// vector. Shares no code with the cycle-stepped model.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

namespace oracle {

/// a[0..31] = seed bits (LSB first); a[n+32] = a[n] ^ a[n+1] ^ a[n+2] ^ a[n+22].
inline std::vector<int> lfsr_bits(uint32_t seed, size_t count) {
  std::vector<int> a(count + 32);
  for (int i = 0; i < 32; ++i) a[i] = (seed >> i) & 1;
  for (size_t n = 0; n + 32 < a.size(); ++n) a[n + 32] = a[n] ^ a[n + 1] ^ a[n + 2] ^ a[n + 22];
  a.resize(count);
  return a;
}

inline const std::array<int, 64> kReg = {
    0x0b, 0x0c, 0x0d, 0x0e, 0x0f, 0x10, 0x11, 0x12, 0x13, 0x14, 0x15, 0x16, 0x17, 0x18, 0x19, 0x1a,
    0x1b, 0x1c, 0x1d, 0x1e, 0x1f, 0x20, 0x21, 0x22, 0x23, 0x24, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a,
    0x2b, 0x2c, 0x2d, 0x2e, 0x2f, 0x30, 0x31, 0x32, 0x33, 0x3f, 0x3e, 0x3d, 0x3c, 0x3b, 0x3a, 0x39,
    0x0a, 0x09, 0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01, 0x00, 0x38, 0x37, 0x36, 0x35, 0x34};

struct Straight {
  std::array<int, 64> perm;
  std::array<int, 64> selections;  // in selection order
};

inline Straight permutation(uint32_t seed) {
  const auto bits = lfsr_bits(seed, 384);
  std::deque<int> fifo;
  for (int i = 0; i < 64; ++i) {
    int v = 0;
    for (int b = 0; b < 6; ++b) v = v * 2 + bits[6 * i + b];
    fifo.push_back(v);
  }
  std::array<int, 64> reg = kReg;
  Straight out{};
  for (int k = 0; k < 64; ++k) {
    const int rest = 63 - k;
    const int idx = fifo.front();
    fifo.pop_front();
    int sel;
    if (k < 12) sel = idx > 0x28 ? idx - 0x28 : idx;
    else sel = idx > rest ? (idx & rest) : idx;
    out.selections[k] = reg[sel];
    fifo.push_back(reg[sel]);
    reg[sel] = reg[rest];
  }
  for (int i = 0; i < 6; ++i) {
    fifo.push_back(fifo.front());
    fifo.pop_front();
  }
  for (int i = 0; i < 64; ++i) out.perm[i] = fifo[i];
  return out;
}

}  // namespace oracle
