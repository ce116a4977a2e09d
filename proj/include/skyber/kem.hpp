// Decryption dataflow m = Compress_q(v - INTT(s_hat^T o NTT(u)), 1), plus a
// self-consistent key generation / encryption pair that produces realistic
// (key, ciphertext, message) triples for leakage experiments.
//
// Sampling is driven by xoshiro256** instead of SHAKE, so keys and
// ciphertexts are NOT interoperable with FIPS 203 vectors. Serialized files
// carry the non-interoperable flag.
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/ring.hpp"

namespace skyber::kem {

using ring::Poly;
using ring::PolyVec;

struct KemParams {
  std::string_view name;
  uint8_t id;  // on-disk parameter id
  unsigned k;
  unsigned eta1;
  unsigned eta2;
  unsigned du;
  unsigned dv;

  friend bool operator==(const KemParams& a, const KemParams& b) { return a.id == b.id; }
};

inline constexpr KemParams kKyber512{"kyber512", 1, 2, 3, 2, 10, 4};
inline constexpr KemParams kKyber768{"kyber768", 2, 3, 2, 2, 10, 4};
inline constexpr KemParams kKyber1024{"kyber1024", 3, 4, 2, 2, 11, 5};
inline constexpr std::array<KemParams, 3> kAllParams{kKyber512, kKyber768, kKyber1024};

inline const KemParams& params_by_name(std::string_view name) {
  for (const auto& p : kAllParams)
    if (p.name == name) return p;
  throw ContractViolation("unknown parameter set: " + std::string(name));
}

inline const KemParams& params_by_id(uint8_t id) {
  for (const auto& p : kAllParams)
    if (p.id == id) return p;
  throw FormatError("unknown parameter id " + std::to_string(id));
}

using Seed = std::array<uint8_t, 32>;
using Message = std::array<uint8_t, 32>;

struct KeyPair {
  KemParams params = kKyber768;
  PolyVec s_hat;  // NTT domain
  Seed rho{};     // expands the public matrix
  PolyVec t_hat;  // NTT domain

  friend bool operator==(const KeyPair&, const KeyPair&) = default;
};

struct Ciphertext {
  KemParams params = kKyber768;
  PolyVec u;  // decompressed, time domain
  Poly v;     // decompressed, time domain

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

inline bool message_bit(const Message& m, size_t i) { return (m[i / 8] >> (i % 8)) & 1; }

namespace detail {

inline Poly matrix_entry(const Seed& rho, size_t row, size_t col) {
  Xoshiro256 rng(rho);
  uint64_t skip = row * 8 + col;
  rng.reseed(rng() ^ splitmix64(skip));
  return ring::sample_uniform(rng, ring::Domain::Ntt);
}

inline Poly inner_ntt(const PolyVec& a, const PolyVec& b) {
  Poly acc = ring::zero(ring::Domain::Ntt);
  for (size_t i = 0; i < a.size(); ++i) acc = ring::add(acc, ring::basemul(a[i], b[i]));
  return acc;
}

inline PolyVec ntt_all(PolyVec v) {
  for (auto& p : v) p = ring::ntt(p);
  return v;
}

}  // namespace detail

inline KeyPair keygen(const KemParams& params, std::span<const uint8_t> seed) {
  if (seed.size() != 32) throw ContractViolation("keygen: seed must be 32 bytes");
  Xoshiro256 rng(std::span<const uint8_t, 32>(seed.data(), 32));
  KeyPair kp;
  kp.params = params;
  rng.fill(kp.rho);
  PolyVec s(params.k), e(params.k);
  for (auto& p : s) p = ring::sample_cbd(rng, params.eta1);
  for (auto& p : e) p = ring::sample_cbd(rng, params.eta1);
  kp.s_hat = detail::ntt_all(std::move(s));
  const PolyVec e_hat = detail::ntt_all(std::move(e));
  for (size_t i = 0; i < params.k; ++i) {
    PolyVec row(params.k);
    for (size_t j = 0; j < params.k; ++j) row[j] = detail::matrix_entry(kp.rho, i, j);
    kp.t_hat.push_back(ring::add(detail::inner_ntt(row, kp.s_hat), e_hat[i]));
  }
  return kp;
}

/// A_hat expanded from rho, stored by column: columns[j][i] = A_hat[i][j].
struct PublicMatrix {
  std::vector<PolyVec> columns;
};

inline PublicMatrix expand_matrix(const KeyPair& pk) {
  PublicMatrix a;
  a.columns.assign(pk.params.k, PolyVec(pk.params.k));
  for (size_t j = 0; j < pk.params.k; ++j)
    for (size_t i = 0; i < pk.params.k; ++i) a.columns[j][i] = detail::matrix_entry(pk.rho, i, j);
  return a;
}

/// Encryption with a pre-expanded matrix (for many encryptions under one key).
inline Ciphertext encrypt(const KeyPair& pk, const PublicMatrix& a, const Message& m, std::span<const uint8_t> coins) {
  if (coins.size() != 32) throw ContractViolation("encrypt: coins must be 32 bytes");
  const KemParams& params = pk.params;
  require(a.columns.size() == params.k, "encrypt: matrix does not match parameters");
  Xoshiro256 rng(std::span<const uint8_t, 32>(coins.data(), 32));
  PolyVec r(params.k);
  for (auto& p : r) p = ring::sample_cbd(rng, params.eta1);
  const PolyVec r_hat = detail::ntt_all(std::move(r));

  Ciphertext ct;
  ct.params = params;
  for (size_t j = 0; j < params.k; ++j) {
    Poly uj = ring::intt(detail::inner_ntt(a.columns[j], r_hat));
    uj = ring::add(uj, ring::sample_cbd(rng, params.eta2));
    ct.u.push_back(ring::decompress_poly(ring::compress_poly(uj, params.du), params.du));
  }
  Poly mpoly;
  for (size_t i = 0; i < ring::kN; ++i) mpoly.coeffs[i] = ring::decompress(message_bit(m, i), 1);
  Poly v = ring::intt(detail::inner_ntt(pk.t_hat, r_hat));
  v = ring::add(ring::add(v, ring::sample_cbd(rng, params.eta2)), mpoly);
  ct.v = ring::decompress_poly(ring::compress_poly(v, params.dv), params.dv);
  return ct;
}

inline Ciphertext encrypt(const KeyPair& pk, const Message& m, std::span<const uint8_t> coins) {
  if (coins.size() != 32) throw ContractViolation("encrypt: coins must be 32 bytes");
  return encrypt(pk, expand_matrix(pk), m, coins);
}

inline Message message_from_poly(const Poly& w) {
  Message m{};
  for (size_t i = 0; i < ring::kN; ++i) m[i / 8] |= uint8_t(ring::compress(w.coeffs[i], 1) << (i % 8));
  return m;
}

inline Message decrypt(const KeyPair& sk, const Ciphertext& ct) {
  require(sk.params == ct.params, "decrypt: parameter mismatch between key and ciphertext");
  require(sk.s_hat.size() == sk.params.k && ct.u.size() == ct.params.k, "decrypt: k mismatch");
  const Poly su = ring::intt(detail::inner_ntt(sk.s_hat, detail::ntt_all(ct.u)));
  return message_from_poly(ring::sub(ct.v, su));
}

// ---------------------------------------------------------------------------
// Serialization. 8-byte header: magic (4), u16 version LE, u8 param id,
// u8 flags (bit1 = non-interoperable), then little-endian u16 coefficients.
//   SKKY: s_hat (k polys), rho (32 bytes), t_hat (k polys)
//   SKCT: u (k polys), v

inline constexpr uint16_t kFileVersion = 1;
inline constexpr uint8_t kFlagNonInteroperable = 0x02;

namespace io {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

inline void put_poly(std::vector<uint8_t>& out, const Poly& p) {
  for (uint16_t c : p.coeffs) put_u16(out, c);
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}
  std::span<const uint8_t> take(size_t n) {
    if (pos_ + n > data_.size()) throw FormatError("truncated input");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  uint16_t u16() {
    auto s = take(2);
    return uint16_t(s[0] | (s[1] << 8));
  }
  Poly poly(ring::Domain d) {
    Poly p;
    p.domain = d;
    for (auto& c : p.coeffs) {
      c = u16();
      if (c >= ring::kQ) throw FormatError("coefficient out of range");
    }
    return p;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

inline void put_header(std::vector<uint8_t>& out, std::string_view magic, const KemParams& p) {
  out.insert(out.end(), magic.begin(), magic.end());
  put_u16(out, kFileVersion);
  out.push_back(p.id);
  out.push_back(kFlagNonInteroperable);
}

inline const KemParams& get_header(Reader& r, std::string_view magic) {
  auto m = r.take(4);
  if (std::string_view(reinterpret_cast<const char*>(m.data()), 4) != magic)
    throw FormatError("bad magic, expected " + std::string(magic));
  if (r.u16() != kFileVersion) throw FormatError("unsupported version");
  const KemParams& p = params_by_id(r.take(1)[0]);
  r.take(1);
  return p;
}

}  // namespace io

/// Ciphertext body without header: u then v, LE u16. Also used as the
/// per-trace associated data in trace files.
inline void append_ciphertext_body(std::vector<uint8_t>& out, const Ciphertext& ct) {
  for (const auto& p : ct.u) io::put_poly(out, p);
  io::put_poly(out, ct.v);
}

inline size_t ciphertext_body_size(const KemParams& p) { return (p.k + 1) * ring::kN * 2; }

inline Ciphertext parse_ciphertext_body(const KemParams& params, std::span<const uint8_t> data) {
  io::Reader r(data);
  Ciphertext ct;
  ct.params = params;
  for (unsigned i = 0; i < params.k; ++i) ct.u.push_back(r.poly(ring::Domain::Time));
  ct.v = r.poly(ring::Domain::Time);
  if (!r.done()) throw FormatError("trailing bytes after ciphertext");
  return ct;
}

inline std::vector<uint8_t> serialize(const Ciphertext& ct) {
  std::vector<uint8_t> out;
  io::put_header(out, "SKCT", ct.params);
  append_ciphertext_body(out, ct);
  return out;
}

inline std::vector<uint8_t> serialize(const KeyPair& kp) {
  std::vector<uint8_t> out;
  io::put_header(out, "SKKY", kp.params);
  for (const auto& p : kp.s_hat) io::put_poly(out, p);
  out.insert(out.end(), kp.rho.begin(), kp.rho.end());
  for (const auto& p : kp.t_hat) io::put_poly(out, p);
  return out;
}

inline Ciphertext parse_ciphertext(std::span<const uint8_t> data) {
  io::Reader r(data);
  const KemParams& p = io::get_header(r, "SKCT");
  return parse_ciphertext_body(p, r.take(ciphertext_body_size(p)));
}

inline KeyPair parse_keypair(std::span<const uint8_t> data) {
  io::Reader r(data);
  KeyPair kp;
  kp.params = io::get_header(r, "SKKY");
  for (unsigned i = 0; i < kp.params.k; ++i) kp.s_hat.push_back(r.poly(ring::Domain::Ntt));
  auto rho = r.take(32);
  std::copy(rho.begin(), rho.end(), kp.rho.begin());
  for (unsigned i = 0; i < kp.params.k; ++i) kp.t_hat.push_back(r.poly(ring::Domain::Ntt));
  if (!r.done()) throw FormatError("trailing bytes after key");
  return kp;
}

/// 32-byte seed from a 64-bit value (for CLI and experiment plumbing).
inline Seed seed_from_u64(uint64_t v) {
  Seed s{};
  Xoshiro256 rng(v);
  rng.fill(s);
  return s;
}

}  // namespace skyber::kem
