// Decryption driven by an explicit schedule, exposing the register values at
// the three leakage points in schedule order:
//   point 1  raw 24-bit product register    s_hat[4w] * u_hat[4w]       (PWM)
//   point 2  12-bit reduced-product register barrett(point 1 value)       (REDUCE)
//   point 3  12-bit subtraction register     v[4w] - INTT(...)[4w] mod q (SUB)
// Each event exposes the word's leading lane; the other lanes of the word are
// computed but not observed.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "skyber/kem.hpp"
#include "skyber/ring.hpp"
#include "skyber/sched.hpp"

namespace skyber::kem {

enum class LeakPoint : uint8_t { None = 0, Point1 = 1, Point2 = 2, Point3 = 3 };

/// Register width in bits (the CPA predictor must use the same widths).
inline constexpr unsigned register_width(LeakPoint p) {
  return p == LeakPoint::Point1 ? 24u : p == LeakPoint::None ? 0u : 12u;
}

inline constexpr LeakPoint leak_point_of(sched::Op op) {
  switch (op) {
    case sched::Op::Pwm: return LeakPoint::Point1;
    case sched::Op::Reduce: return LeakPoint::Point2;
    case sched::Op::Sub: return LeakPoint::Point3;
    case sched::Op::Butterfly: return LeakPoint::None;
  }
  return LeakPoint::None;
}

struct TracedEvent {
  sched::ScheduleEvent event;
  LeakPoint point = LeakPoint::None;
  uint32_t value = 0;  // register value (butterflies: low output coefficient)
};

struct TracedDecryption {
  Message message{};    // valid only when complete
  bool complete = true;  // false for a PWM-only schedule
  std::vector<TracedEvent> events;
};

/// Register value observed at point 1 for secret coefficient s and public
/// NTT-domain coefficient u.
inline constexpr uint32_t point1_value(uint16_t s, uint16_t u) { return uint32_t(s) * u; }
inline constexpr uint32_t point2_value(uint16_t s, uint16_t u) { return ring::barrett(uint32_t(s) * u); }

inline TracedDecryption decrypt_traced(const KeyPair& sk, const Ciphertext& ct, const sched::Schedule& s) {
  using sched::Op;
  const KemParams& params = sk.params;
  require(params == ct.params && params == s.params, "decrypt_traced: parameter mismatch");
  require(sk.s_hat.size() == params.k && ct.u.size() == params.k, "decrypt_traced: k mismatch");
  const size_t pwm_events = params.k * 64 * 2;
  const size_t expected =
      s.extent == sched::Extent::Full ? pwm_events + sched::kInttStages * 64 + 64 : pwm_events;
  require(s.events.size() == expected, "decrypt_traced: schedule length does not match parameters");

  PolyVec u_hat = detail::ntt_all(ct.u);
  std::array<uint16_t, ring::kN> acc{};
  std::array<uint16_t, ring::kN> w_out{};
  std::vector<ring::WordProducts> pending(params.k * 64);
  std::vector<uint8_t> state(params.k * 64, 0);  // 0 idle, 1 multiplied, 2 accumulated
  std::array<uint8_t, 64> sub_done{};
  size_t reduced = 0;
  int stage = 0;
  unsigned stage_groups = 0;
  std::array<uint8_t, 64> group_done{};
  bool in_intt = false;
  bool in_sub = false;

  TracedDecryption out;
  out.events.reserve(s.events.size());

  for (const auto& e : s.events) {
    TracedEvent te{e, leak_point_of(e.op), 0};
    const size_t w = e.word();
    switch (e.op) {
      case Op::Pwm: {
        require(!in_intt && !in_sub && e.line < params.k, "decrypt_traced: misplaced PWM event");
        const size_t slot = e.line * 64 + w;
        require(state[slot] == 0, "decrypt_traced: PWM word visited twice");
        pending[slot] = ring::basemul_word(
            std::span<const uint16_t, 4>(sk.s_hat[e.line].coeffs.data() + 4 * w, 4),
            std::span<const uint16_t, 4>(u_hat[e.line].coeffs.data() + 4 * w, 4), w);
        state[slot] = 1;
        te.value = pending[slot].raw[0];
        break;
      }
      case Op::Reduce: {
        require(!in_intt && !in_sub && e.line < params.k, "decrypt_traced: misplaced REDUCE event");
        const size_t slot = e.line * 64 + w;
        require(state[slot] == 1, "decrypt_traced: REDUCE before its PWM");
        for (size_t i = 0; i < 4; ++i) acc[4 * w + i] = ring::add_mod(acc[4 * w + i], pending[slot].out[i]);
        state[slot] = 2;
        ++reduced;
        te.value = ring::barrett(pending[slot].raw[0]);
        break;
      }
      case Op::Butterfly: {
        require(!in_sub && reduced == params.k * 64, "decrypt_traced: INTT before PWM completed");
        require(e.stage >= 0 && e.stage < int(sched::kInttStages) && e.word_addr < 64,
                "decrypt_traced: bad butterfly event");
        if (!in_intt) in_intt = true;
        if (e.stage != stage) {
          require(e.stage == stage + 1 && stage_groups == 64, "decrypt_traced: INTT stages out of order");
          stage = e.stage;
          stage_groups = 0;
          group_done.fill(0);
        }
        require(!group_done[e.word_addr], "decrypt_traced: butterfly group visited twice");
        group_done[e.word_addr] = 1;
        ++stage_groups;
        ring::intt_group(acc, unsigned(e.stage), e.word_addr);
        te.value = acc[ring::butterfly_low_index(unsigned(e.stage), 2u * e.word_addr)];
        break;
      }
      case Op::Sub: {
        require(in_intt && stage == int(sched::kInttStages) - 1 && stage_groups == 64,
                "decrypt_traced: SUB before INTT completed");
        require(w == e.word_addr && !sub_done[w], "decrypt_traced: bad SUB event");
        in_sub = true;
        sub_done[w] = 1;
        // INTT scaling by 128^-1 is folded into the subtraction stage.
        for (size_t i = 0; i < 4; ++i)
          w_out[4 * w + i] = ring::sub_mod(ct.v.coeffs[4 * w + i], ring::mul_mod(acc[4 * w + i], ring::kInvScale));
        te.value = w_out[4 * w];
        break;
      }
    }
    out.events.push_back(te);
  }

  if (s.extent == sched::Extent::PwmOnly) {
    out.complete = false;
    return out;
  }
  Poly diff;
  diff.coeffs = w_out;
  out.message = message_from_poly(diff);
  return out;
}

}  // namespace skyber::kem
