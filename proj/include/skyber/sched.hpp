// Address controller model: the per-decryption order in which the datapath
// visits memory words during PWM, reduction, INTT and the final subtraction.
//
// Memory layout: a polynomial is 64 words of 4 coefficients (two degree-1
// residues per word). PWM words of vector entry `line` live at {line, addr}
// (0x00-0x3f, 0x40-0x7f, 0x80-0xbf, 0xc0-0xff); INTT butterfly group g of a
// stage covers residue-pair addresses 2g and 2g+1 (0x00-0x7f).
//
// Timing (cycles), identical for protected and unprotected schedules:
//   PWM slot        2 cycles (PWM at c, its fused REDUCE at c+1)
//   INTT group      1 cycle, 7 stages x 64 groups
//   SUB slot        2 cycles
// The RPG runs alongside the datapath, so shuffling adds no cycles.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/kem.hpp"
#include "skyber/ring.hpp"
#include "skyber/rpg.hpp"

namespace skyber::sched {

enum class Op : uint8_t { Pwm, Reduce, Sub, Butterfly };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Pwm: return "PWM";
    case Op::Reduce: return "REDUCE";
    case Op::Sub: return "SUB";
    case Op::Butterfly: return "BUTTERFLY";
  }
  return "?";
}

struct ScheduleEvent {
  uint32_t cycle = 0;
  Op op = Op::Pwm;
  uint8_t line = 0;
  uint16_t word_addr = 0;  // {line, word} for PWM/REDUCE, word for SUB, group for BUTTERFLY
  int8_t stage = -1;       // INTT stage for BUTTERFLY, -1 otherwise

  uint8_t word() const { return uint8_t(word_addr & 0x3f); }

  friend bool operator==(const ScheduleEvent&, const ScheduleEvent&) = default;
};

/// Pipeline delays (in slots) of the delayed permutation taps.
struct DelayConfig {
  unsigned r1 = 1;
  unsigned r12 = 12;
};

inline constexpr unsigned kInttStages = unsigned(ring::kLayers);
/// Base permutations per protected decryption: PWM, each INTT stage, SUB.
inline constexpr size_t kSeedsPerDecryption = 1 + kInttStages + 1;

/// How much of a decryption a schedule covers. Points 1 and 2 leak only
/// during PWM, so trace synthesis for them can stop after that phase and
/// skip the RPG runs of the later phases. A PWM-only schedule is the exact
/// prefix of the full schedule built from the same seeds.
enum class Extent : uint8_t { Full, PwmOnly };

struct Schedule {
  kem::KemParams params = kem::kKyber768;
  bool is_protected = false;
  Extent extent = Extent::Full;
  std::vector<ScheduleEvent> events;
  std::vector<uint32_t> rpg_seeds;  // provenance; empty when unprotected
  DelayConfig delays;
  uint32_t total_cycles = 0;
};

/// Finite supply of nonzero RPG seeds.
class SeedStream {
 public:
  explicit SeedStream(std::vector<uint32_t> seeds) : seeds_(std::move(seeds)) {}

  /// `count` seeds drawn from xoshiro256** seeded with `master`.
  static SeedStream from_master(uint64_t master, size_t count = kSeedsPerDecryption) {
    Xoshiro256 rng(master);
    std::vector<uint32_t> s(count);
    for (auto& v : s) v = rng.nonzero_u32();
    return SeedStream(std::move(s));
  }

  uint32_t next() {
    if (pos_ >= seeds_.size()) throw ContractViolation("sched: RPG seed stream exhausted");
    return seeds_[pos_++];
  }

  size_t remaining() const { return seeds_.size() - pos_; }

 private:
  std::vector<uint32_t> seeds_;
  size_t pos_ = 0;
};

namespace detail {

inline rpg::Permutation64 identity() {
  rpg::Permutation64 p{};
  for (size_t i = 0; i < p.size(); ++i) p[i] = uint8_t(i);
  return p;
}

/// `order(phase_index)` returns the base permutation for that phase:
/// 0 = PWM, 1..7 = INTT stages, 8 = SUB.
template <class OrderFn>
Schedule build(const kem::KemParams& params, Extent extent, OrderFn&& order) {
  Schedule s;
  s.params = params;
  s.extent = extent;
  s.events.reserve(params.k * 64 * 2 + kInttStages * 64 + 64);
  uint32_t c = 0;

  const rpg::Permutation64 pwm = order(0);
  for (unsigned line = 0; line < params.k; ++line) {
    const auto addrs = rpg::extend(pwm, rpg::line_range(line));
    for (uint16_t a : addrs) {
      s.events.push_back({c, Op::Pwm, uint8_t(line), a, -1});
      s.events.push_back({c + 1, Op::Reduce, uint8_t(line), a, -1});
      c += 2;
    }
  }
  if (extent == Extent::PwmOnly) {
    s.total_cycles = c;
    return s;
  }
  for (unsigned st = 0; st < kInttStages; ++st) {
    const rpg::Permutation64 p = order(1 + st);
    for (uint8_t g : p) s.events.push_back({c++, Op::Butterfly, 0, g, int8_t(st)});
  }
  const rpg::Permutation64 sub = order(1 + kInttStages);
  for (uint8_t w : sub) {
    s.events.push_back({c, Op::Sub, 0, w, -1});
    c += 2;
  }
  s.total_cycles = c;
  return s;
}

}  // namespace detail

inline Schedule build_unprotected(const kem::KemParams& params, Extent extent = Extent::Full) {
  const auto id = detail::identity();
  return detail::build(params, extent, [&](size_t) { return id; });
}

inline Schedule build_protected(const kem::KemParams& params, SeedStream& seeds, Extent extent = Extent::Full) {
  std::vector<uint32_t> used;
  used.reserve(kSeedsPerDecryption);
  Schedule s = detail::build(params, extent, [&](size_t) {
    used.push_back(seeds.next());
    return rpg::generate(used.back()).perm;
  });
  s.is_protected = true;
  s.rpg_seeds = std::move(used);
  return s;
}

inline uint32_t cycle_count(const Schedule& s) { return s.total_cycles; }

/// RPG cycles to produce every base permutation of a protected schedule
/// back to back on a single generator.
inline uint32_t rpg_cycles(const Schedule& s) { return uint32_t(s.rpg_seeds.size()) * rpg::kTotalCycles; }

// ---------------------------------------------------------------------------
// Memory port views. Each is the extended address stream of one phase's base
// order, delayed by a pipeline depth in slots (std::nullopt while the
// pipeline fills).
//
//   pwm_read    {line, addr}          delay 0    operand fetch
//   pwm_write   addr (00-3f)          delay r1   accumulator write-back
//   intt_read   (2a, 2a+1) (00-7f)    delay 0
//   intt_write  (2a, 2a+1) (00-7f)    delay r12
//   sub_read_v  addr | 0x40 (40-7f)   delay 0    v sits in the upper bank
//   sub_write   addr (00-3f)          delay r1

enum class Port : uint8_t { PwmRead, PwmWrite, InttRead, InttWrite, SubReadV, SubWrite };

using AddressStream = std::vector<std::optional<uint16_t>>;

inline AddressStream port_view(const Schedule& s, Port port, unsigned stage = 0) {
  const bool pwm = port == Port::PwmRead || port == Port::PwmWrite;
  const bool intt = port == Port::InttRead || port == Port::InttWrite;
  unsigned delay = 0;
  if (port == Port::PwmWrite || port == Port::SubWrite) delay = s.delays.r1;
  if (port == Port::InttWrite) delay = s.delays.r12;
  require(!intt || stage < kInttStages, "port_view: INTT stage out of range");

  AddressStream out(delay * (intt ? 2 : 1), std::nullopt);
  for (const auto& e : s.events) {
    if (pwm && e.op == Op::Pwm) {
      out.push_back(port == Port::PwmRead ? e.word_addr : uint16_t(e.word()));
    } else if (intt && e.op == Op::Butterfly && unsigned(e.stage) == stage) {
      out.push_back(uint16_t(2 * e.word_addr));
      out.push_back(uint16_t(2 * e.word_addr + 1));
    } else if (!pwm && !intt && e.op == Op::Sub) {
      out.push_back(port == Port::SubReadV ? uint16_t(0x40 | e.word_addr) : e.word_addr);
    }
  }
  return out;
}

/// Debug dump: CSV with columns cycle,op,line,word_addr,stage.
inline void write_csv(std::ostream& os, const Schedule& s) {
  os << "cycle,op,line,word_addr,stage\n";
  for (const auto& e : s.events)
    os << e.cycle << ',' << op_name(e.op) << ',' << unsigned(e.line) << ',' << e.word_addr << ','
       << int(e.stage) << '\n';
}

}  // namespace skyber::sched
