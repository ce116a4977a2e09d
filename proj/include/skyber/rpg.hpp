// Random permutation generator: a cycle-stepped behavioral model of the
// LFSR / buffer / FIFO / REG datapath that turns a 32-bit seed into a
// permutation of 0..63 in a fixed 454 cycles.
//
// Schedule per seed:
//   INIT       384 cycles  LFSR emits one bit per cycle; every 6 bits form
//                          an index (MSB first) pushed into the FIFO. REG is
//                          loaded with the designed address permutation.
//   SHUFFLE12   12 cycles  k = 0..11:  idx0 = adjust_idx0(pop), push REG[idx0],
//                          REG[idx0] <- REG[63 - k]
//   SHUFFLE52   52 cycles  k = 12..63: idx1 = adjust_idx1(pop, 63 - k), same
//   SHIFT6       6 cycles  FIFO rotates once per cycle
//   DONE                   FIFO front-to-back is the permutation
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "skyber/common.hpp"

namespace skyber::rpg {

inline constexpr size_t kSize = 64;
inline constexpr unsigned kIndexBits = 6;
inline constexpr unsigned kInitCycles = kSize * kIndexBits;  // 384
inline constexpr unsigned kStageOneRounds = 12;
inline constexpr unsigned kShiftCycles = 6;
inline constexpr unsigned kTotalCycles = kInitCycles + kSize + kShiftCycles;  // 454
/// Largest index reachable in stage one (hex 28).
inline constexpr uint8_t kStageOneLimit = 0x28;

using Permutation64 = std::array<uint8_t, kSize>;

inline bool is_bijection(std::span<const uint8_t> p) {
  std::array<bool, kSize> seen{};
  if (p.size() != kSize) return false;
  for (uint8_t v : p) {
    if (v >= kSize || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

inline constexpr Permutation64 kInitialReg = [] {
  Permutation64 r{};
  size_t i = 0;
  for (int v = 0x0b; v <= 0x33; ++v) r[i++] = uint8_t(v);  // per_a, ascending
  for (int v = 0x3f; v >= 0x39; --v) r[i++] = uint8_t(v);
  for (int v = 0x0a; v >= 0x00; --v) r[i++] = uint8_t(v);
  for (int v = 0x38; v >= 0x34; --v) r[i++] = uint8_t(v);
  return r;
}();

/// Addresses that must not land in output positions 0..5 or 58..63.
inline constexpr std::array<uint8_t, 11> kRestricted{0x07, 0x08, 0x09, 0x0a, 0x39, 0x3a,
                                                     0x3b, 0x3c, 0x3d, 0x3e, 0x3f};

inline constexpr bool is_restricted(uint8_t v) {
  return (v >= 0x07 && v <= 0x0a) || (v >= 0x39 && v <= 0x3f);
}

// Index adjustment. The printed processing schedule writes these ternaries
// with the arms swapped ("> 0x28 ? idx : idx - 0x28"); the adjustment
// equations are followed here instead, since only they keep idx0 <= 0x28
// and idx1 <= rest as the selection step requires.
inline constexpr uint8_t adjust_idx0(uint8_t idx) {
  return idx <= kStageOneLimit ? idx : uint8_t(idx - kStageOneLimit);
}

inline constexpr uint8_t adjust_idx1(uint8_t idx, uint8_t rest) {
  return idx <= rest ? idx : uint8_t(idx & rest);
}

/// 32-bit Fibonacci LFSR, characteristic polynomial x^32 + x^22 + x^2 + x + 1
/// (taps 32,22,2,1; maximal length). Bit i of the state holds sequence
/// element a[n+i]; the output is bit 0 and a[n+32] = a[n] ^ a[n+1] ^ a[n+2] ^ a[n+22].
struct Lfsr {
  uint32_t state;

  explicit Lfsr(uint32_t seed) : state(seed) {
    require(seed != 0, "lfsr: all-zero seed");
  }

  unsigned step() {
    const unsigned out = state & 1u;
    const uint32_t fb = (state ^ (state >> 1) ^ (state >> 2) ^ (state >> 22)) & 1u;
    state = (state >> 1) | (fb << 31);
    return out;
  }
};

enum class Phase : uint8_t { Init, Shuffle12, Shuffle52, Shift6, Done };

/// Cycle-stepped machine state. One call to step() is one clock.
class RpgMachine {
 public:
  explicit RpgMachine(uint32_t seed) : lfsr_(seed), reg_(kInitialReg) {}

  Phase phase() const { return phase_; }
  unsigned cycle() const { return cycle_; }
  unsigned round() const { return k_; }
  uint8_t rest() const { return uint8_t(kSize - 1 - k_); }
  size_t fifo_size() const { return fifo_size_; }
  const Permutation64& reg() const { return reg_; }
  uint32_t lfsr_state() const { return lfsr_.state; }

  void step() {
    switch (phase_) {
      case Phase::Init: {
        buffer_ = uint8_t((buffer_ << 1) | lfsr_.step());
        if (++buffered_ == kIndexBits) {
          push(buffer_ & 0x3f);
          buffer_ = 0;
          buffered_ = 0;
          if (fifo_size_ == kSize) phase_ = Phase::Shuffle12;
        }
        break;
      }
      case Phase::Shuffle12:
      case Phase::Shuffle52: {
        const uint8_t rest_now = rest();
        const uint8_t idx = pop();
        const uint8_t sel = phase_ == Phase::Shuffle12 ? adjust_idx0(idx) : adjust_idx1(idx, rest_now);
        push(reg_[sel]);
        reg_[sel] = reg_[rest_now];
        ++k_;
        if (k_ == kStageOneRounds) phase_ = Phase::Shuffle52;
        if (k_ == kSize) phase_ = Phase::Shift6;
        break;
      }
      case Phase::Shift6:
        push(pop());
        if (++shifted_ == kShiftCycles) phase_ = Phase::Done;
        break;
      case Phase::Done:
        throw ContractViolation("rpg: step() on a finished machine");
    }
    ++cycle_;
  }

  Permutation64 output() const {
    require(phase_ == Phase::Done, "rpg: output() before DONE");
    Permutation64 out{};
    for (size_t i = 0; i < kSize; ++i) out[i] = fifo_[(head_ + i) % kSize];
    return out;
  }

 private:
  void push(uint8_t v) {
    require(fifo_size_ < kSize, "rpg: FIFO overflow");
    fifo_[(head_ + fifo_size_) % kSize] = v;
    ++fifo_size_;
  }

  uint8_t pop() {
    require(fifo_size_ > 0, "rpg: FIFO underflow");
    const uint8_t v = fifo_[head_];
    head_ = (head_ + 1) % kSize;
    --fifo_size_;
    return v;
  }

  Lfsr lfsr_;
  Permutation64 reg_;
  std::array<uint8_t, kSize> fifo_{};
  size_t head_ = 0;
  size_t fifo_size_ = 0;
  uint8_t buffer_ = 0;
  unsigned buffered_ = 0;
  unsigned k_ = 0;
  unsigned shifted_ = 0;
  unsigned cycle_ = 0;
  Phase phase_ = Phase::Init;
};

/// Collects the next 6-bit index from an LFSR (6 cycles, MSB first).
inline uint8_t next_index(Lfsr& lfsr) {
  uint8_t v = 0;
  for (unsigned i = 0; i < kIndexBits; ++i) v = uint8_t((v << 1) | lfsr.step());
  return v;
}

struct Generated {
  Permutation64 perm;
  unsigned cycles;
};

inline Generated generate(uint32_t seed) {
  require(seed != 0, "rpg: seed must be nonzero");
  RpgMachine m(seed);
  while (m.phase() != Phase::Done) m.step();
  return {m.output(), m.cycle()};
}

enum class Range : uint8_t { R00_3F, R40_7F, R00_7F, R80_BF, RC0_FF };

/// Range extension. The 64-wide ranges prefix the 6-bit address with a
/// 2-bit line number ({line, addr}); R00_7F appends one low bit, giving
/// adjacent pairs (2a, 2a+1).
inline std::vector<uint16_t> extend(const Permutation64& p, Range range) {
  std::vector<uint16_t> out;
  if (range == Range::R00_7F) {
    out.reserve(2 * kSize);
    for (uint8_t a : p) {
      out.push_back(uint16_t(2 * a));
      out.push_back(uint16_t(2 * a + 1));
    }
    return out;
  }
  uint16_t line = 0;
  switch (range) {
    case Range::R00_3F: line = 0; break;
    case Range::R40_7F: line = 1; break;
    case Range::R80_BF: line = 2; break;
    case Range::RC0_FF: line = 3; break;
    case Range::R00_7F: break;
  }
  out.reserve(kSize);
  for (uint8_t a : p) out.push_back(uint16_t((line << 6) | a));
  return out;
}

inline Range line_range(unsigned line) {
  static constexpr Range kByLine[4] = {Range::R00_3F, Range::R40_7F, Range::R80_BF, Range::RC0_FF};
  require(line < 4, "rpg: line must be 0..3");
  return kByLine[line];
}

}  // namespace skyber::rpg
