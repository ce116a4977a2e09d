// Arithmetic in R_q = Z_q[X]/(X^256 + 1), q = 3329.
//
// Coefficients are kept in plain [0, q) form everywhere (no Montgomery
// domain), so every value a datapath register would hold is directly
// observable and checkable against a wide-integer oracle.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "skyber/common.hpp"

namespace skyber::ring {

inline constexpr int32_t kQ = 3329;
inline constexpr size_t kN = 256;
/// 7-layer NTT: 128 degree-1 residues.
inline constexpr size_t kLayers = 7;
/// 17 is a primitive 256-th root of unity mod q.
inline constexpr int32_t kZeta = 17;
/// 128^-1 mod q, the INTT scaling factor.
inline constexpr int32_t kInvScale = 3303;

enum class Domain : uint8_t { Time, Ntt };

struct Poly {
  std::array<uint16_t, kN> coeffs{};
  Domain domain = Domain::Time;

  friend bool operator==(const Poly&, const Poly&) = default;
};

using PolyVec = std::vector<Poly>;

// Barrett reduction, the single reduction used for every product in the
// datapath (including the reduced-product register that is leakage point 2):
//   m = floor(2^26 / q) = 20158, t = (x * m) >> 26, r = x - t*q in [0, 2q),
//   followed by one masked conditional subtraction of q.
// 2^26 - m*q = 2882 < q, so the quotient estimate is short by at most one
// for every x < 2^26.
inline constexpr uint32_t kBarrettShift = 26;
inline constexpr uint64_t kBarrettFactor = (uint64_t{1} << kBarrettShift) / kQ;
inline constexpr uint32_t kReduceBound = uint32_t{1} << kBarrettShift;

inline constexpr uint16_t barrett(uint32_t x) {
  const uint32_t t = uint32_t((uint64_t(x) * kBarrettFactor) >> kBarrettShift);
  int32_t r = int32_t(x - t * uint32_t(kQ)) - kQ;
  r += (r >> 31) & kQ;
  return uint16_t(r);
}

/// Checked form of barrett(): input must lie in [0, 2^26).
inline uint16_t reduce(int64_t x) {
  require(x >= 0 && x < int64_t(kReduceBound), "reduce: input outside [0, 2^26)");
  return barrett(uint32_t(x));
}

inline constexpr uint16_t add_mod(uint16_t a, uint16_t b) {
  int32_t r = int32_t(a) + b - kQ;
  r += (r >> 31) & kQ;
  return uint16_t(r);
}

inline constexpr uint16_t sub_mod(uint16_t a, uint16_t b) {
  int32_t r = int32_t(a) - b;
  r += (r >> 31) & kQ;
  return uint16_t(r);
}

inline constexpr uint16_t mul_mod(uint16_t a, uint16_t b) { return barrett(uint32_t(a) * b); }

inline constexpr uint8_t bitrev7(uint8_t x) {
  uint8_t r = 0;
  for (int i = 0; i < 7; ++i) r |= uint8_t(((x >> i) & 1) << (6 - i));
  return r;
}

struct NttTables {
  /// zetas[i] = 17^bitrev7(i) mod q
  std::array<uint16_t, 128> zetas{};

  constexpr NttTables() {
    for (size_t i = 0; i < 128; ++i) {
      uint32_t z = 1;
      for (uint8_t e = 0; e < bitrev7(uint8_t(i)); ++e) z = z * kZeta % kQ;
      zetas[i] = uint16_t(z);
    }
  }
};

inline constexpr NttTables kTables{};

namespace detail {
inline constexpr uint32_t pow_mod(uint32_t base, uint32_t e) {
  uint32_t r = 1;
  for (; e; e >>= 1, base = base * base % kQ)
    if (e & 1) r = r * base % kQ;
  return r;
}
}  // namespace detail

static_assert(detail::pow_mod(kZeta, 128) == kQ - 1, "zeta^128 must be -1");
static_assert(detail::pow_mod(kZeta, 256) == 1);
static_assert(uint32_t(kInvScale) * 128 % kQ == 1);
static_assert(kBarrettFactor == 20158);

inline void expect_domain(const Poly& p, Domain d, const char* op) {
  if (p.domain != d) throw ContractViolation(std::string(op) + ": domain tag mismatch");
}

inline Poly zero(Domain d = Domain::Time) {
  Poly p;
  p.domain = d;
  return p;
}

inline Poly ntt(const Poly& in) {
  expect_domain(in, Domain::Time, "ntt");
  Poly r = in;
  auto& c = r.coeffs;
  size_t k = 1;
  for (size_t len = 128; len >= 2; len >>= 1) {
    for (size_t start = 0; start < kN; start += 2 * len) {
      const uint16_t z = kTables.zetas[k++];
      for (size_t j = start; j < start + len; ++j) {
        const uint16_t t = mul_mod(z, c[j + len]);
        c[j + len] = sub_mod(c[j], t);
        c[j] = add_mod(c[j], t);
      }
    }
  }
  r.domain = Domain::Ntt;
  return r;
}

/// Number of Gentleman-Sande butterflies per INTT stage and the grouping
/// used by the datapath: 64 groups of 2 butterflies.
inline constexpr size_t kButterfliesPerStage = 128;
inline constexpr size_t kGroupsPerStage = 64;

/// Butterfly `b` (0..127) of INTT stage `stage` (0..6, len = 2^(stage+1)).
/// Butterflies of one stage touch disjoint coefficient pairs, so any order
/// within a stage yields the same stage output.
inline constexpr size_t butterfly_low_index(unsigned stage, unsigned b) {
  const size_t len = size_t{2} << stage;
  return (b / len) * 2 * len + b % len;
}

inline void intt_butterfly(std::array<uint16_t, kN>& c, unsigned stage, unsigned b) {
  const size_t len = size_t{2} << stage;
  const size_t block = b / len;
  const size_t j = butterfly_low_index(stage, b);
  const uint16_t z = kTables.zetas[kN / len - 1 - block];
  const uint16_t t = c[j];
  c[j] = add_mod(t, c[j + len]);
  c[j + len] = mul_mod(z, sub_mod(c[j + len], t));
}

inline void intt_group(std::array<uint16_t, kN>& c, unsigned stage, unsigned group) {
  intt_butterfly(c, stage, 2 * group);
  intt_butterfly(c, stage, 2 * group + 1);
}

inline Poly intt(const Poly& in) {
  expect_domain(in, Domain::Ntt, "intt");
  Poly r = in;
  for (unsigned s = 0; s < kLayers; ++s)
    for (unsigned g = 0; g < kGroupsPerStage; ++g) intt_group(r.coeffs, s, g);
  for (auto& x : r.coeffs) x = mul_mod(x, kInvScale);
  r.domain = Domain::Time;
  return r;
}

/// Product of the four coefficients of one memory word (two degree-1
/// residues) as the PWM datapath computes it: every partial product is
/// reduced on its own, then the residues are combined with modular adds.
struct WordProducts {
  std::array<uint32_t, 8> raw{};  // a0b0 a1b1 a0b1 a1b0 for each residue
  std::array<uint16_t, 4> out{};
};

inline WordProducts basemul_word(std::span<const uint16_t, 4> a, std::span<const uint16_t, 4> b,
                                 size_t word) {
  WordProducts w;
  const uint16_t z = kTables.zetas[64 + word];
  const uint16_t zetas[2] = {z, uint16_t(kQ - z)};
  for (size_t r = 0; r < 2; ++r) {
    const uint32_t a0 = a[2 * r], a1 = a[2 * r + 1], b0 = b[2 * r], b1 = b[2 * r + 1];
    w.raw[4 * r + 0] = a0 * b0;
    w.raw[4 * r + 1] = a1 * b1;
    w.raw[4 * r + 2] = a0 * b1;
    w.raw[4 * r + 3] = a1 * b0;
    const uint16_t hi = mul_mod(zetas[r], barrett(w.raw[4 * r + 1]));
    w.out[2 * r] = add_mod(barrett(w.raw[4 * r]), hi);
    w.out[2 * r + 1] = add_mod(barrett(w.raw[4 * r + 2]), barrett(w.raw[4 * r + 3]));
  }
  return w;
}

inline Poly basemul(const Poly& a, const Poly& b) {
  expect_domain(a, Domain::Ntt, "basemul");
  expect_domain(b, Domain::Ntt, "basemul");
  Poly r = zero(Domain::Ntt);
  for (size_t w = 0; w < 64; ++w) {
    auto wp = basemul_word(std::span<const uint16_t, 4>(a.coeffs.data() + 4 * w, 4),
                           std::span<const uint16_t, 4>(b.coeffs.data() + 4 * w, 4), w);
    std::copy(wp.out.begin(), wp.out.end(), r.coeffs.begin() + 4 * w);
  }
  return r;
}

inline Poly add(const Poly& a, const Poly& b) {
  require(a.domain == b.domain, "add: domain tag mismatch");
  Poly r = a;
  for (size_t i = 0; i < kN; ++i) r.coeffs[i] = add_mod(a.coeffs[i], b.coeffs[i]);
  return r;
}

inline Poly sub(const Poly& a, const Poly& b) {
  require(a.domain == b.domain, "sub: domain tag mismatch");
  Poly r = a;
  for (size_t i = 0; i < kN; ++i) r.coeffs[i] = sub_mod(a.coeffs[i], b.coeffs[i]);
  return r;
}

inline constexpr bool supported_bits(unsigned d) {
  return d == 1 || d == 4 || d == 5 || d == 10 || d == 11;
}

/// round(2^d * x / q) mod 2^d, ties rounded up. q is odd, so 2^d x / q is
/// never exactly half-integral and the tie rule never actually fires.
inline uint16_t compress(uint16_t x, unsigned d) {
  require(supported_bits(d), "compress: unsupported bit width");
  require(x < kQ, "compress: input outside [0, q)");
  const uint64_t num = (uint64_t(x) << (d + 1)) + kQ;
  return uint16_t((num / (2 * kQ)) & ((1u << d) - 1));
}

/// round(q * y / 2^d)
inline uint16_t decompress(uint16_t y, unsigned d) {
  require(supported_bits(d), "decompress: unsupported bit width");
  require(y < (1u << d), "decompress: input wider than d bits");
  return uint16_t((uint32_t(y) * kQ + (1u << (d - 1))) >> d);
}

inline Poly compress_poly(const Poly& p, unsigned d) {
  Poly r = p;
  for (auto& x : r.coeffs) x = compress(x, d);
  return r;
}

inline Poly decompress_poly(const Poly& p, unsigned d) {
  Poly r = p;
  for (auto& x : r.coeffs) x = decompress(x, d);
  return r;
}

/// Centered binomial sample with parameter eta, mapped into [0, q).
template <class Rng>
Poly sample_cbd(Rng& rng, unsigned eta) {
  Poly p;
  for (auto& c : p.coeffs) {
    const uint64_t bits = rng();
    int v = std::popcount(bits & ((1u << eta) - 1)) - std::popcount((bits >> eta) & ((1u << eta) - 1));
    c = uint16_t(v < 0 ? v + kQ : v);
  }
  return p;
}

template <class Rng>
Poly sample_uniform(Rng& rng, Domain d) {
  Poly p;
  p.domain = d;
  for (auto& c : p.coeffs) c = uint16_t(rng.below(kQ));
  return p;
}

}  // namespace skyber::ring
