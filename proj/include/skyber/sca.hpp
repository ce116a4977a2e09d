// Correlation power analysis against the PWM leakage points.
//
// The attack is extend-and-prune over the leading NTT-domain coefficient of
// consecutive PWM words of vector entry 0. Under the Hamming-distance model
// the register before word w holds the value of word w-1 (0 before word 0),
// so once word w-1 is recovered the prediction for word w depends on a
// single unknown h in [0, q):
//
//   pred_t(h) = HD(prev_t, x(h, u_t)),   x = h*u (point 1) or h*u mod q (point 2)
//
// and every hypothesis is scored by max over samples of |pearson(pred, T[s])|.
//
// Two scoring engines share one interface:
//
//   DirectCpa  evaluates every hypothesis on every trace: O(q * S) per trace.
//              Supports both points; used as the reference.
//   FastCpa    point 2 only. Writing HD(p, x) = HW(p) + sum_b x_b (1 - 2 p_b)
//              and indexing nonzero h and u by discrete logs to base 3 (a
//              primitive root mod q) turns every sum over traces into a
//              cyclic cross-correlation over Z_3328 of bit patterns of 3^i
//              with per-residue accumulators, evaluated with FFTs. Per trace
//              cost is O(12 * S); the q * S table is produced once at the end.
//
// Both accumulators are mergeable. The attack driver feeds them strictly in
// trace order, which fixes the floating-point summation order.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/kem.hpp"
#include "skyber/leakage.hpp"
#include "skyber/ring.hpp"

namespace skyber::sca {

/// Raised when a correlation is undefined (both inputs constant).
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson: length mismatch");
  require(x.size() >= 2, "pearson: need at least two samples");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 && syy == 0) throw UndefinedCorrelation("pearson: both inputs are constant");
  if (sxx == 0 || syy == 0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

enum class CpaTarget : uint8_t { Point1, Point2 };

inline constexpr size_t kHypotheses = size_t(ring::kQ);

/// Register value for hypothesis h against public coefficient u.
inline uint32_t predicted_value(CpaTarget t, uint16_t h, uint16_t u) {
  return t == CpaTarget::Point1 ? kem::point1_value(h, u) : kem::point2_value(h, u);
}

/// rho[h * samples + s], hypotheses 0..q-1.
struct CorrelationMatrix {
  size_t samples = 0;
  std::vector<double> rho;

  double at(size_t h, size_t s) const { return rho[h * samples + s]; }
  std::span<const double> row(size_t h) const { return {rho.data() + h * samples, samples}; }
};

namespace detail {

inline double corr(double n, double c, double p1, double p2, double t1, double t2) {
  const double vp = n * p2 - p1 * p1;
  const double vt = n * t2 - t1 * t1;
  if (!(vp > 0) || !(vt > 0)) return 0.0;
  return std::clamp((n * c - p1 * t1) / std::sqrt(vp * vt), -1.0, 1.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------

class DirectCpa {
 public:
  DirectCpa(CpaTarget target, size_t samples)
      : target_(target), s_(samples), t1_(samples), t2_(samples), p1_(kHypotheses), p2_(kHypotheses),
        c_(kHypotheses * samples) {
    require(samples > 0, "cpa: traces have no samples");
  }

  void add(uint16_t u, uint32_t prev, std::span<const float> trace) {
    require(trace.size() == s_, "cpa: trace length mismatch");
    ++n_;
    for (size_t s = 0; s < s_; ++s) {
      t1_[s] += trace[s];
      t2_[s] += double(trace[s]) * trace[s];
    }
    for (size_t h = 0; h < kHypotheses; ++h) {
      const double pred = std::popcount(prev ^ predicted_value(target_, uint16_t(h), u));
      p1_[h] += pred;
      p2_[h] += pred * pred;
      double* c = c_.data() + h * s_;
      for (size_t s = 0; s < s_; ++s) c[s] += pred * trace[s];
    }
  }

  void merge(const DirectCpa& o) {
    require(o.target_ == target_ && o.s_ == s_, "cpa: merging incompatible accumulators");
    n_ += o.n_;
    for (size_t s = 0; s < s_; ++s) t1_[s] += o.t1_[s], t2_[s] += o.t2_[s];
    for (size_t h = 0; h < kHypotheses; ++h) p1_[h] += o.p1_[h], p2_[h] += o.p2_[h];
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  }

  size_t count() const { return n_; }

  CorrelationMatrix finish() const {
    CorrelationMatrix m{s_, std::vector<double>(kHypotheses * s_)};
    const double n = double(n_);
    for (size_t h = 0; h < kHypotheses; ++h)
      for (size_t s = 0; s < s_; ++s)
        m.rho[h * s_ + s] = detail::corr(n, c_[h * s_ + s], p1_[h], p2_[h], t1_[s], t2_[s]);
    return m;
  }

 private:
  CpaTarget target_;
  size_t s_;
  size_t n_ = 0;
  std::vector<double> t1_, t2_, p1_, p2_, c_;
};

// ---------------------------------------------------------------------------

namespace fft {

inline constexpr size_t kOrder = size_t(ring::kQ) - 1;  // 3328
inline constexpr size_t kSpectrum = kOrder / 2 + 1;
inline constexpr unsigned kGenerator = 3;
inline constexpr unsigned kBits = 12;
inline constexpr unsigned kPairs = kBits * (kBits - 1) / 2;

struct LogTables {
  std::array<uint16_t, kOrder> pow{};    // 3^i mod q
  std::array<uint16_t, ring::kQ> log{};  // log[3^i] = i, log[0] unused

  LogTables() {
    uint32_t x = 1;
    for (size_t i = 0; i < kOrder; ++i) {
      pow[i] = uint16_t(x);
      log[x] = uint16_t(i);
      x = x * kGenerator % ring::kQ;
    }
  }
};

inline const LogTables& tables() {
  static const LogTables t;
  return t;
}

template <class T>
struct FftwFree {
  void operator()(T* p) const { fftw_free(p); }
};
template <class T>
using Buffer = std::unique_ptr<T[], FftwFree<T>>;

inline Buffer<double> real_buffer() { return Buffer<double>(fftw_alloc_real(kOrder)); }
inline Buffer<fftw_complex> complex_buffer(size_t n = 1) { return Buffer<fftw_complex>(fftw_alloc_complex(kSpectrum * n)); }

/// Forward r2c and inverse c2r plans of length 3328. The FFTW planner is not
/// thread-safe, so plans are made once under a lock and then only executed
/// on fresh aligned buffers (fftw_execute_dft_* is thread-safe).
struct Plans {
  fftw_plan forward;
  fftw_plan inverse;

  Plans() {
    auto r = real_buffer();
    auto c = complex_buffer();
    forward = fftw_plan_dft_r2c_1d(int(kOrder), r.get(), c.get(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(int(kOrder), c.get(), r.get(), FFTW_ESTIMATE);
  }
};

inline const Plans& plans() {
  static std::mutex mu;
  std::lock_guard lock(mu);
  static const Plans p;
  return p;
}

/// Spectra of the bit patterns F_b[i] = bit b of 3^i and of their pairwise
/// products, shared by every FastCpa instance.
struct PatternSpectra {
  std::vector<std::complex<double>> single;  // kBits x kSpectrum
  std::vector<std::complex<double>> pair;    // kPairs x kSpectrum

  PatternSpectra() : single(kBits * kSpectrum), pair(kPairs * kSpectrum) {
    const auto& t = tables();
    auto in = real_buffer();
    auto out = complex_buffer();
    auto spectrum = [&](auto&& value, std::complex<double>* dst) {
      for (size_t i = 0; i < kOrder; ++i) in[i] = value(t.pow[i]);
      fftw_execute_dft_r2c(plans().forward, in.get(), out.get());
      for (size_t k = 0; k < kSpectrum; ++k) dst[k] = {out[k][0], out[k][1]};
    };
    size_t pi = 0;
    for (unsigned b = 0; b < kBits; ++b) {
      spectrum([b](uint16_t x) { return double((x >> b) & 1); }, single.data() + b * kSpectrum);
      for (unsigned b2 = b + 1; b2 < kBits; ++b2, ++pi)
        spectrum([b, b2](uint16_t x) { return double((x >> b) & (x >> b2) & 1); }, pair.data() + pi * kSpectrum);
    }
  }
};

inline const PatternSpectra& spectra() {
  static std::mutex mu;
  std::lock_guard lock(mu);
  static const PatternSpectra s;
  return s;
}

}  // namespace fft

class FastCpa {
 public:
  explicit FastCpa(size_t samples)
      : s_(samples),
        t1_(samples),
        t2_(samples),
        k_(samples),
        a_(fft::kOrder * fft::kBits * samples),
        a1_(fft::kOrder * fft::kBits),
        e_(fft::kOrder * fft::kBits),
        pairs_(fft::kOrder * fft::kPairs) {
    require(samples > 0, "cpa: traces have no samples");
  }

  void add(uint16_t u, uint32_t prev, std::span<const float> trace) {
    require(trace.size() == s_, "cpa: trace length mismatch");
    require(u < ring::kQ && prev < (1u << fft::kBits), "cpa: operand out of range");
    ++n_;
    const double c = std::popcount(prev);
    kp_ += c;
    kp2_ += c * c;
    for (size_t s = 0; s < s_; ++s) {
      const double v = trace[s];
      t1_[s] += v;
      t2_[s] += v * v;
      k_[s] += c * v;
    }
    if (u == 0) return;  // x = 0 for every hypothesis: only the constant terms move

    const size_t j = fft::tables().log[u];
    double w[fft::kBits];
    for (unsigned b = 0; b < fft::kBits; ++b) w[b] = ((prev >> b) & 1) ? -1.0 : 1.0;
    double* a = a_.data() + j * fft::kBits * s_;
    for (unsigned b = 0; b < fft::kBits; ++b, a += s_) {
      a1_[j * fft::kBits + b] += w[b];
      e_[j * fft::kBits + b] += 2 * c * w[b] + 1;
      if (w[b] > 0)
        for (size_t s = 0; s < s_; ++s) a[s] += trace[s];
      else
        for (size_t s = 0; s < s_; ++s) a[s] -= trace[s];
    }
    double* e2 = pairs_.data() + j * fft::kPairs;
    for (unsigned b = 0; b < fft::kBits; ++b)
      for (unsigned b2 = b + 1; b2 < fft::kBits; ++b2) *e2++ += w[b] * w[b2];
  }

  void merge(const FastCpa& o) {
    require(o.s_ == s_, "cpa: merging incompatible accumulators");
    n_ += o.n_;
    kp_ += o.kp_;
    kp2_ += o.kp2_;
    auto add_all = [](std::vector<double>& d, const std::vector<double>& src) {
      for (size_t i = 0; i < d.size(); ++i) d[i] += src[i];
    };
    add_all(t1_, o.t1_);
    add_all(t2_, o.t2_);
    add_all(k_, o.k_);
    add_all(a_, o.a_);
    add_all(a1_, o.a1_);
    add_all(e_, o.e_);
    add_all(pairs_, o.pairs_);
  }

  size_t count() const { return n_; }

  CorrelationMatrix finish() const {
    using fft::kBits;
    using fft::kOrder;
    using fft::kSpectrum;
    const auto& spec = fft::spectra();
    const auto& plans = fft::plans();
    auto in = fft::real_buffer();
    auto out = fft::complex_buffer();
    std::vector<std::complex<double>> sum(kSpectrum);

    // sum_k += pattern_k * conj(FFT(column)) for the column gathered by `load`.
    auto correlate_into = [&](auto&& load, const std::complex<double>* pattern) {
      for (size_t j = 0; j < kOrder; ++j) in[j] = load(j);
      fftw_execute_dft_r2c(plans.forward, in.get(), out.get());
      for (size_t k = 0; k < kSpectrum; ++k) sum[k] += pattern[k] * std::complex<double>(out[k][0], -out[k][1]);
    };
    auto inverse = [&](std::vector<double>& dst) {
      for (size_t k = 0; k < kSpectrum; ++k) out[k][0] = sum[k].real(), out[k][1] = sum[k].imag();
      fftw_execute_dft_c2r(plans.inverse, out.get(), in.get());
      dst.resize(kOrder);
      for (size_t i = 0; i < kOrder; ++i) dst[i] = in[i] / double(kOrder);
      std::fill(sum.begin(), sum.end(), std::complex<double>{});
    };

    // First and second moments of the prediction (integers; rounded after FFT).
    std::vector<double> r1, r2;
    for (unsigned b = 0; b < kBits; ++b)
      correlate_into([&](size_t j) { return a1_[j * kBits + b]; }, spec.single.data() + b * kSpectrum);
    inverse(r1);
    for (unsigned b = 0; b < kBits; ++b)
      correlate_into([&](size_t j) { return e_[j * kBits + b]; }, spec.single.data() + b * kSpectrum);
    for (unsigned p = 0; p < fft::kPairs; ++p)
      correlate_into([&](size_t j) { return 2 * pairs_[j * fft::kPairs + p]; }, spec.pair.data() + p * kSpectrum);
    inverse(r2);

    CorrelationMatrix m{s_, std::vector<double>(kHypotheses * s_)};
    const double n = double(n_);
    const auto& t = fft::tables();
    for (size_t s = 0; s < s_; ++s) m.rho[s] = detail::corr(n, k_[s], kp_, kp2_, t1_[s], t2_[s]);  // h = 0

    std::vector<double> rc;
    for (size_t s = 0; s < s_; ++s) {
      for (unsigned b = 0; b < kBits; ++b)
        correlate_into([&](size_t j) { return a_[(j * kBits + b) * s_ + s]; }, spec.single.data() + b * kSpectrum);
      inverse(rc);
      for (size_t i = 0; i < kOrder; ++i) {
        const size_t h = t.pow[i];
        const double p1 = kp_ + std::round(r1[i]);
        const double p2 = kp2_ + std::round(r2[i]);
        m.rho[h * s_ + s] = detail::corr(n, k_[s] + rc[i], p1, p2, t1_[s], t2_[s]);
      }
    }
    return m;
  }

 private:
  size_t s_;
  size_t n_ = 0;
  double kp_ = 0, kp2_ = 0;
  std::vector<double> t1_, t2_, k_;
  std::vector<double> a_;      // [log u][bit][sample]  sum of w_b * T
  std::vector<double> a1_;     // [log u][bit]          sum of w_b
  std::vector<double> e_;      // [log u][bit]          sum of 2 HW(prev) w_b + 1
  std::vector<double> pairs_;  // [log u][pair]         sum of w_b w_b'
};

enum class Engine : uint8_t { Auto, Direct, Fast };

/// Type-erased accumulator chosen from target and engine preference.
class CpaAccumulator {
 public:
  CpaAccumulator(CpaTarget target, size_t samples, Engine engine = Engine::Auto) {
    const bool fast = engine == Engine::Fast || (engine == Engine::Auto && target == CpaTarget::Point2);
    require(!fast || target == CpaTarget::Point2, "cpa: the FFT engine supports point 2 only");
    if (fast) fast_.emplace(samples);
    else direct_.emplace(target, samples);
  }

  void add(uint16_t u, uint32_t prev, std::span<const float> trace) {
    if (fast_) fast_->add(u, prev, trace);
    else direct_->add(u, prev, trace);
  }

  CorrelationMatrix finish() const { return fast_ ? fast_->finish() : direct_->finish(); }

 private:
  std::optional<FastCpa> fast_;
  std::optional<DirectCpa> direct_;
};

// ---------------------------------------------------------------------------
// Extend-and-prune driver.

struct Hypothesis {
  uint16_t value = 0;
  double score = 0;
};

struct CoefficientResult {
  size_t word = 0;                  // PWM word of vector entry 0; coefficient index 4 * word
  std::vector<Hypothesis> ranking;  // all q hypotheses, score descending, ties by value
  uint16_t recovered = 0;
  std::optional<uint16_t> truth;
  std::optional<size_t> truth_rank;  // 1-based
  std::vector<double> curve_best;    // rho vs sample for the top hypothesis
  std::vector<double> curve_truth;   // rho vs sample for the true value, when known

  double truth_score() const {
    if (!truth) return 0;
    for (const auto& h : ranking)
      if (h.value == *truth) return h.score;
    return 0;
  }
};

struct CpaReport {
  CpaTarget target = CpaTarget::Point2;
  size_t traces = 0;
  size_t samples = 0;
  std::vector<CoefficientResult> coefficients;
  bool success = false;  // every attacked coefficient recovered at rank 1 (needs ground truth)
};

struct CpaOptions {
  CpaTarget target = CpaTarget::Point2;
  Engine engine = Engine::Auto;
  size_t coefficients = 10;
  std::vector<uint16_t> prior;   // known values of words 0 .. prior.size()-1
  std::vector<uint16_t> truth;   // optional ground truth indexed by word
  bool stop_on_failure = true;   // with truth: stop after the first rank > 1
};

/// One replayable pass over the traces: visit(u_hat_words, samples) where
/// u_hat_words[w] is u_hat[0][4w], the public operand of PWM word w.
using CpaVisitor = std::function<void(std::span<const uint16_t>, std::span<const float>)>;
using CpaReplay = std::function<void(const CpaVisitor&)>;

/// Scores and sorts all hypotheses. h = 0 is not identifiable: its register
/// value is 0 whatever the ciphertext, so its prediction HW(prev) only
/// re-measures the previous, already recovered event (a perfect ghost of
/// the true key one sample earlier). It is kept in the ranking with score 0.
inline std::vector<Hypothesis> rank_hypotheses(const CorrelationMatrix& m) {
  std::vector<Hypothesis> r(kHypotheses);
  r[0] = {0, 0.0};
  for (size_t h = 1; h < kHypotheses; ++h) {
    double best = 0;
    for (double v : m.row(h)) best = std::max(best, std::abs(v));
    r[h] = {uint16_t(h), best};
  }
  std::stable_sort(r.begin(), r.end(), [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  return r;
}

inline CpaReport cpa_attack(const CpaReplay& replay, size_t n_samples, const CpaOptions& opt) {
  require(opt.coefficients >= 1, "cpa: nothing to attack");
  const size_t first = opt.prior.size();
  require(first + opt.coefficients <= 64, "cpa: attack runs past the end of the line");
  CpaReport rep;
  rep.target = opt.target;
  rep.samples = n_samples;
  rep.success = !opt.truth.empty();
  std::vector<uint16_t> known = opt.prior;

  for (size_t w = first; w < first + opt.coefficients; ++w) {
    CpaAccumulator acc(opt.target, n_samples, opt.engine);
    size_t n = 0;
    replay([&](std::span<const uint16_t> u, std::span<const float> samples) {
      require(u.size() > w, "cpa: missing public operands");
      const uint32_t prev = w == 0 ? 0u : predicted_value(opt.target, known[w - 1], u[w - 1]);
      acc.add(u[w], prev, samples);
      ++n;
    });
    require(n > 0, "cpa: no traces");
    rep.traces = n;
    const CorrelationMatrix m = acc.finish();

    CoefficientResult r;
    r.word = w;
    r.ranking = rank_hypotheses(m);
    r.recovered = r.ranking.front().value;
    r.curve_best.assign(m.row(r.recovered).begin(), m.row(r.recovered).end());
    if (w < opt.truth.size()) {
      r.truth = opt.truth[w];
      for (size_t i = 0; i < r.ranking.size(); ++i)
        if (r.ranking[i].value == *r.truth) r.truth_rank = i + 1;
      r.curve_truth.assign(m.row(*r.truth).begin(), m.row(*r.truth).end());
      if (r.truth_rank != size_t{1}) rep.success = false;
    } else {
      rep.success = false;
    }
    known.push_back(r.recovered);
    const bool failed = r.truth_rank && *r.truth_rank != 1;
    rep.coefficients.push_back(std::move(r));
    if (failed && opt.stop_on_failure) break;
  }
  return rep;
}

/// Public PWM operands u_hat[0][4w], w < words, of a ciphertext.
inline std::vector<uint16_t> pwm_operands(const kem::Ciphertext& ct, size_t words = 64) {
  const ring::Poly u0 = ring::ntt(ct.u.at(0));
  std::vector<uint16_t> out(words);
  for (size_t w = 0; w < words; ++w) out[w] = u0.coeffs[4 * w];
  return out;
}

/// CPA over a materialized trace set whose associated data are ciphertexts.
inline CpaReport cpa_attack(const leakage::TraceSet& ts, CpaOptions opt) {
  if (ts.assoc_len != kem::ciphertext_body_size(ts.params))
    throw ContractViolation("cpa: trace set carries no ciphertexts in its associated data");
  require(ts.size() > 0, "cpa: no traces");
  const size_t words = opt.prior.size() + opt.coefficients;
  require(words <= 64, "cpa: attack runs past the end of the line");
  std::vector<uint16_t> ops(ts.size() * words);
  for (size_t i = 0; i < ts.size(); ++i) {
    const auto ct = kem::parse_ciphertext_body(ts.params, ts.assoc_of(i));
    const auto u = pwm_operands(ct, words);
    std::copy(u.begin(), u.end(), ops.begin() + i * words);
  }
  return cpa_attack(
      [&](const CpaVisitor& visit) {
        for (size_t i = 0; i < ts.size(); ++i) visit({ops.data() + i * words, words}, ts.trace(i));
      },
      ts.n_samples, opt);
}

/// Ground truth in attack form: s_hat[0][4w] for every word.
inline std::vector<uint16_t> pwm_secrets(const kem::KeyPair& sk) {
  std::vector<uint16_t> out(64);
  for (size_t w = 0; w < 64; ++w) out[w] = sk.s_hat.at(0).coeffs[4 * w];
  return out;
}

}  // namespace skyber::sca
