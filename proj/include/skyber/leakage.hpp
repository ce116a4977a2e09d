// Synthetic side-channel traces: Hamming-distance register model plus
// Gaussian noise, sampled from traced decryptions.
//
// One register per leakage point, cleared to 0 when its phase starts and
// overwritten by every event of that point; each event leaks
// HD(previous value, new value) + N(0, sigma^2).
//
// Randomness per trace i is derived from the master seed alone:
//   trace_seed = derive_seed(master, i)
//   ciphertext stream  derive_seed(trace_seed, 0)
//   RPG seed stream    derive_seed(trace_seed, 1)
//   noise stream       derive_seed(trace_seed, 2)
// so output does not depend on thread count or evaluation order, and a
// protected and an unprotected run with the same master seed see the same
// ciphertexts and the same noise.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/kem.hpp"
#include "skyber/sched.hpp"
#include "skyber/traced.hpp"

namespace skyber::leakage {

using kem::LeakPoint;

/// Noise level (HD units) used by the experiments unless overridden.
/// Calibrated with `skyber pilot`; see README for the calibration table.
inline constexpr double kDefaultNoiseSigma = 48.0;

enum class Target : uint8_t { Point1, Point2, Point3, All };

inline bool target_includes(Target t, LeakPoint p) {
  switch (t) {
    case Target::Point1: return p == LeakPoint::Point1;
    case Target::Point2: return p == LeakPoint::Point2;
    case Target::Point3: return p == LeakPoint::Point3;
    case Target::All: return p != LeakPoint::None;
  }
  return false;
}

struct LeakageConfig {
  Target target = Target::Point2;
  double noise_sigma = kDefaultNoiseSigma;
  uint64_t master_seed = 0;
  unsigned samples_per_event = 1;
};

inline unsigned hd(uint32_t a, uint32_t b, unsigned width) {
  require(width <= 32 && (width == 32 || ((a | b) >> width) == 0), "hd: value wider than register");
  return unsigned(std::popcount(a ^ b));
}

inline size_t samples_per_trace(const kem::KemParams& p, Target t, unsigned per_event = 1) {
  const size_t pwm = p.k * 64;
  size_t events = 0;
  switch (t) {
    case Target::Point1:
    case Target::Point2: events = pwm; break;
    case Target::Point3: events = 64; break;
    case Target::All: events = 2 * pwm + 64; break;
  }
  return events * per_event;
}

/// Noiseless-plus-noise samples for one traced decryption.
inline void leak(const kem::TracedDecryption& td, const LeakageConfig& cfg, Xoshiro256& noise,
                 std::vector<float>& out) {
  require(cfg.noise_sigma >= 0.0, "leak: noise_sigma must be >= 0");
  require(cfg.samples_per_event >= 1, "leak: samples_per_event must be >= 1");
  std::array<uint32_t, 4> reg{};
  std::optional<double> spare;
  auto gauss = [&] {
    if (spare) {
      double v = *spare;
      spare.reset();
      return v;
    }
    auto [a, b] = noise.gaussian_pair();
    spare = b;
    return a;
  };
  for (const auto& e : td.events) {
    if (!target_includes(cfg.target, e.point)) continue;
    auto& r = reg[size_t(e.point)];
    const double h = hd(r, e.value, kem::register_width(e.point));
    r = e.value;
    for (unsigned j = 0; j < cfg.samples_per_event; ++j)
      out.push_back(float(cfg.noise_sigma > 0 ? h + cfg.noise_sigma * gauss() : h));
  }
}

struct TraceSet {
  kem::KemParams params = kem::kKyber768;
  bool is_protected = false;
  bool non_interoperable = true;
  size_t n_samples = 0;
  size_t assoc_len = 0;
  std::vector<uint8_t> assoc;
  std::vector<float> samples;

  size_t size() const { return n_samples ? samples.size() / n_samples : 0; }
  std::span<const float> trace(size_t i) const { return {samples.data() + i * n_samples, n_samples}; }
  std::span<const uint8_t> assoc_of(size_t i) const { return {assoc.data() + i * assoc_len, assoc_len}; }

  void append(std::span<const uint8_t> a, std::span<const float> s) {
    require(a.size() == assoc_len && s.size() == n_samples, "TraceSet: record size mismatch");
    assoc.insert(assoc.end(), a.begin(), a.end());
    samples.insert(samples.end(), s.begin(), s.end());
  }
};

// ---------------------------------------------------------------------------
// Ciphertext and schedule sources.

using CiphertextSource = std::function<kem::Ciphertext(size_t index, uint64_t seed)>;
using ScheduleFactory = std::function<std::shared_ptr<const sched::Schedule>(uint64_t seed, sched::Extent)>;

inline CiphertextSource fixed_ciphertext(kem::Ciphertext ct) {
  auto shared = std::make_shared<const kem::Ciphertext>(std::move(ct));
  return [shared](size_t, uint64_t) { return *shared; };
}

inline CiphertextSource listed_ciphertexts(std::span<const kem::Ciphertext> cts) {
  auto shared = std::make_shared<const std::vector<kem::Ciphertext>>(cts.begin(), cts.end());
  return [shared](size_t i, uint64_t) { return (*shared)[i]; };
}

/// Honest encryption of a random message under `pk`.
inline CiphertextSource honest_ciphertexts(kem::KeyPair pk) {
  auto matrix = std::make_shared<const kem::PublicMatrix>(kem::expand_matrix(pk));
  auto shared = std::make_shared<const kem::KeyPair>(std::move(pk));
  return [shared, matrix](size_t, uint64_t seed) {
    Xoshiro256 rng(seed);
    kem::Message m;
    kem::Seed coins;
    rng.fill(m);
    rng.fill(coins);
    return kem::encrypt(*shared, *matrix, m, coins);
  };
}

/// Uniformly random values in the compressed ciphertext space (attacker-
/// chosen inputs; no validity check exists on the decryption path).
inline CiphertextSource uniform_ciphertexts(const kem::KemParams& params) {
  return [params](size_t, uint64_t seed) {
    Xoshiro256 rng(seed);
    kem::Ciphertext ct;
    ct.params = params;
    ct.u.resize(params.k);
    for (auto& p : ct.u)
      for (auto& c : p.coeffs) c = ring::decompress(uint16_t(rng.below(1u << params.du)), params.du);
    for (auto& c : ct.v.coeffs) c = ring::decompress(uint16_t(rng.below(1u << params.dv)), params.dv);
    return ct;
  };
}

inline ScheduleFactory unprotected_factory(const kem::KemParams& params) {
  auto full = std::make_shared<const sched::Schedule>(sched::build_unprotected(params));
  auto pwm = std::make_shared<const sched::Schedule>(sched::build_unprotected(params, sched::Extent::PwmOnly));
  return [full, pwm](uint64_t, sched::Extent e) { return e == sched::Extent::Full ? full : pwm; };
}

inline ScheduleFactory protected_factory(const kem::KemParams& params) {
  return [params](uint64_t seed, sched::Extent e) {
    auto seeds = sched::SeedStream::from_master(seed);
    return std::make_shared<const sched::Schedule>(sched::build_protected(params, seeds, e));
  };
}

inline ScheduleFactory factory_for(const kem::KemParams& params, bool protect) {
  return protect ? protected_factory(params) : unprotected_factory(params);
}

// ---------------------------------------------------------------------------
// Synthesis.

inline constexpr size_t kChunkTraces = 256;

/// Points 1 and 2 leak only in the PWM phase.
inline bool needs_full_schedule(Target t) { return t == Target::Point3 || t == Target::All; }

struct SynthTrace {
  kem::Ciphertext ct;
  std::vector<float> samples;
};

/// Generates `n_traces` traces and hands them to sink(index, ct, samples) in
/// index order. Work is spread over `threads` workers in fixed-size chunks.
template <class Sink>
void synthesize_stream(const kem::KeyPair& sk, size_t n_traces, const CiphertextSource& cts,
                       const ScheduleFactory& schedules, const LeakageConfig& cfg, unsigned threads,
                       Sink&& sink) {
  require(n_traces > 0, "synthesize: empty ciphertext stream");
  const size_t n_chunks = (n_traces + kChunkTraces - 1) / kChunkTraces;
  const auto extent = needs_full_schedule(cfg.target) ? sched::Extent::Full : sched::Extent::PwmOnly;
  ordered_parallel(
      n_chunks, threads,
      [&](size_t chunk) {
        std::vector<SynthTrace> out;
        const size_t begin = chunk * kChunkTraces;
        const size_t end = std::min(n_traces, begin + kChunkTraces);
        out.reserve(end - begin);
        for (size_t i = begin; i < end; ++i) {
          const uint64_t ts = derive_seed(cfg.master_seed, i);
          SynthTrace t{cts(i, derive_seed(ts, 0)), {}};
          const auto schedule = schedules(derive_seed(ts, 1), extent);
          const auto td = kem::decrypt_traced(sk, t.ct, *schedule);
          Xoshiro256 noise(derive_seed(ts, 2));
          t.samples.reserve(samples_per_trace(sk.params, cfg.target, cfg.samples_per_event));
          leak(td, cfg, noise, t.samples);
          out.push_back(std::move(t));
        }
        return out;
      },
      [&](size_t chunk, std::vector<SynthTrace>&& traces) {
        for (size_t j = 0; j < traces.size(); ++j)
          sink(chunk * kChunkTraces + j, traces[j].ct, std::span<const float>(traces[j].samples));
      });
}

/// Materialized trace set. Associated data is the ciphertext body, or a
/// single class-label byte when `class_label` is given (TVLA sets).
inline TraceSet synthesize(const kem::KeyPair& sk, size_t n_traces, const CiphertextSource& cts,
                           const ScheduleFactory& schedules, const LeakageConfig& cfg, bool is_protected,
                           unsigned threads = 1, std::optional<uint8_t> class_label = std::nullopt) {
  TraceSet ts;
  ts.params = sk.params;
  ts.is_protected = is_protected;
  ts.n_samples = samples_per_trace(sk.params, cfg.target, cfg.samples_per_event);
  ts.assoc_len = class_label ? 1 : kem::ciphertext_body_size(sk.params);
  ts.samples.reserve(n_traces * ts.n_samples);
  ts.assoc.reserve(n_traces * ts.assoc_len);
  std::vector<uint8_t> buf;
  synthesize_stream(sk, n_traces, cts, schedules, cfg, threads,
                    [&](size_t, const kem::Ciphertext& ct, std::span<const float> s) {
                      buf.clear();
                      if (class_label) buf.push_back(*class_label);
                      else kem::append_ciphertext_body(buf, ct);
                      ts.append(buf, s);
                    });
  return ts;
}

inline TraceSet synthesize(const kem::KeyPair& sk, std::span<const kem::Ciphertext> cts,
                           const ScheduleFactory& schedules, const LeakageConfig& cfg, bool is_protected,
                           unsigned threads = 1) {
  require(!cts.empty(), "synthesize: empty ciphertext stream");
  return synthesize(sk, cts.size(), listed_ciphertexts(cts), schedules, cfg, is_protected, threads);
}

// ---------------------------------------------------------------------------
// SKTL trace file: "SKTL", u16 version = 1, u8 param id, u8 flags
// (bit0 protected, bit1 non-interoperable), u32 n_traces, u32 n_samples,
// u32 assoc_len, then per trace assoc_len bytes and n_samples LE f32.

inline constexpr uint16_t kTraceVersion = 1;
inline constexpr size_t kTraceHeaderSize = 20;

struct TraceHeader {
  uint8_t param_id = 0;
  uint8_t flags = 0;
  uint32_t n_traces = 0;
  uint32_t n_samples = 0;
  uint32_t assoc_len = 0;
};

namespace detail {
inline void put_le(std::ostream& os, uint64_t v, size_t bytes) {
  char b[8];
  for (size_t i = 0; i < bytes; ++i) b[i] = char(uint8_t(v >> (8 * i)));
  os.write(b, std::streamsize(bytes));
}
inline uint64_t get_le(std::istream& is, size_t bytes) {
  uint8_t b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), std::streamsize(bytes))) throw FormatError("truncated trace file");
  uint64_t v = 0;
  for (size_t i = 0; i < bytes; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

class TraceWriter {
 public:
  TraceWriter(const std::string& path, const TraceHeader& h) : os_(path, std::ios::binary), h_(h) {
    if (!os_) throw std::runtime_error("cannot open " + path + " for writing");
    os_.write("SKTL", 4);
    detail::put_le(os_, kTraceVersion, 2);
    detail::put_le(os_, h.param_id, 1);
    detail::put_le(os_, h.flags, 1);
    detail::put_le(os_, h.n_traces, 4);
    detail::put_le(os_, h.n_samples, 4);
    detail::put_le(os_, h.assoc_len, 4);
  }

  void write(std::span<const uint8_t> assoc, std::span<const float> samples) {
    require(assoc.size() == h_.assoc_len && samples.size() == h_.n_samples, "TraceWriter: record size mismatch");
    require(written_ < h_.n_traces, "TraceWriter: more traces than declared");
    os_.write(reinterpret_cast<const char*>(assoc.data()), std::streamsize(assoc.size()));
    for (float f : samples) detail::put_le(os_, std::bit_cast<uint32_t>(f), 4);
    ++written_;
  }

  void close() {
    require(written_ == h_.n_traces, "TraceWriter: fewer traces than declared");
    os_.close();
    if (!os_) throw std::runtime_error("trace file write failed");
  }

 private:
  std::ofstream os_;
  TraceHeader h_;
  uint32_t written_ = 0;
};

class TraceReader {
 public:
  explicit TraceReader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw FormatError("cannot open " + path);
    char magic[4] = {};
    if (!is_.read(magic, 4) || std::memcmp(magic, "SKTL", 4) != 0) throw FormatError("bad magic, expected SKTL");
    if (detail::get_le(is_, 2) != kTraceVersion) throw FormatError("unsupported trace file version");
    h_.param_id = uint8_t(detail::get_le(is_, 1));
    h_.flags = uint8_t(detail::get_le(is_, 1));
    h_.n_traces = uint32_t(detail::get_le(is_, 4));
    h_.n_samples = uint32_t(detail::get_le(is_, 4));
    h_.assoc_len = uint32_t(detail::get_le(is_, 4));
    kem::params_by_id(h_.param_id);
  }

  const TraceHeader& header() const { return h_; }

  /// Reads the next record; false once all declared traces are consumed.
  bool next(std::vector<uint8_t>& assoc, std::vector<float>& samples) {
    if (read_ == h_.n_traces) return false;
    assoc.resize(h_.assoc_len);
    if (h_.assoc_len && !is_.read(reinterpret_cast<char*>(assoc.data()), std::streamsize(h_.assoc_len)))
      throw FormatError("truncated trace file");
    samples.resize(h_.n_samples);
    for (auto& f : samples) f = std::bit_cast<float>(uint32_t(detail::get_le(is_, 4)));
    ++read_;
    return true;
  }

 private:
  std::ifstream is_;
  TraceHeader h_;
  uint32_t read_ = 0;
};

inline uint8_t trace_flags(const TraceSet& ts) {
  return uint8_t((ts.is_protected ? 1 : 0) | (ts.non_interoperable ? 2 : 0));
}

inline void write_trace_file(const std::string& path, const TraceSet& ts) {
  TraceWriter w(path, {ts.params.id, trace_flags(ts), uint32_t(ts.size()), uint32_t(ts.n_samples),
                       uint32_t(ts.assoc_len)});
  for (size_t i = 0; i < ts.size(); ++i) w.write(ts.assoc_of(i), ts.trace(i));
  w.close();
}

inline TraceSet read_trace_file(const std::string& path) {
  TraceReader r(path);
  const auto& h = r.header();
  TraceSet ts;
  ts.params = kem::params_by_id(h.param_id);
  ts.is_protected = h.flags & 1;
  ts.non_interoperable = h.flags & 2;
  ts.n_samples = h.n_samples;
  ts.assoc_len = h.assoc_len;
  std::vector<uint8_t> a;
  std::vector<float> s;
  while (r.next(a, s)) ts.append(a, s);
  return ts;
}

}  // namespace skyber::leakage
