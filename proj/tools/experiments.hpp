// Experiment drivers shared by the CLI and the acceptance suite: CPA and
// TVLA on synthesized traces, and the pilot calibration of the noise level
// and trace budget.
//
// Seed layout. Every experiment takes one 64-bit master seed; sub-streams
// are split off with derive_seed(master, tag):
//   tag 1  key seed              tag 4  random-class trace seed (TVLA)
//   tag 2  attack trace seed     tag 5  fixed ciphertext coins (TVLA)
//   tag 3  fixed-class traces    tag 6+ per-repetition masters
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "skyber/kem.hpp"
#include "skyber/leakage.hpp"
#include "skyber/sca.hpp"
#include "skyber/tvla.hpp"

namespace skyber::experiments {

/// Trace budget at which unprotected CPA recovers ten consecutive
/// coefficients (kyber768, point 2, default sigma); output of `skyber pilot`.
inline constexpr size_t kPilotBudget = 48000;
/// The protected attack gets this many times the unprotected budget.
inline constexpr size_t kProtectedFactor = 25;
inline constexpr size_t kCpaCoefficients = 10;

enum Tag : uint64_t { kKeyTag = 1, kAttackTag = 2, kFixedTag = 3, kRandomTag = 4, kFixedCtTag = 5, kRepTag = 6 };

inline kem::KeyPair experiment_key(const kem::KemParams& p, uint64_t master) {
  return kem::keygen(p, kem::seed_from_u64(derive_seed(master, kKeyTag)));
}

// ---------------------------------------------------------------------------
// CPA on synthesized traces.

/// Traces held compactly for repeated extend-and-prune passes: the samples
/// and only the public operands the attack needs.
struct CompactTraces {
  size_t n = 0, samples = 0, words = 0;
  std::vector<float> data;
  std::vector<uint16_t> operands;
};

/// Above this many sample bytes the attack re-synthesizes the traces for
/// each pass instead of keeping them in memory.
inline constexpr size_t kMaxResidentBytes = size_t{1} << 30;

struct CpaRun {
  kem::KemParams params = kem::kKyber768;
  size_t traces = 0;
  bool is_protected = false;
  leakage::LeakageConfig leakage;
  sca::CpaOptions options;
  unsigned threads = 1;
};

inline sca::CpaReport run_cpa(const kem::KeyPair& kp, const CpaRun& run) {
  const auto src = leakage::uniform_ciphertexts(kp.params);
  const auto factory = leakage::factory_for(kp.params, run.is_protected);
  const size_t samples = leakage::samples_per_trace(kp.params, run.leakage.target, run.leakage.samples_per_event);
  const size_t words = run.options.prior.size() + run.options.coefficients;
  require(words <= 64, "cpa: attack runs past the end of the line");

  if (run.traces * samples * sizeof(float) <= kMaxResidentBytes) {
    CompactTraces ct{run.traces, samples, words, {}, {}};
    ct.data.reserve(run.traces * samples);
    ct.operands.reserve(run.traces * words);
    leakage::synthesize_stream(kp, run.traces, src, factory, run.leakage, run.threads,
                               [&](size_t, const kem::Ciphertext& c, std::span<const float> s) {
                                 ct.data.insert(ct.data.end(), s.begin(), s.end());
                                 const auto u = sca::pwm_operands(c, words);
                                 ct.operands.insert(ct.operands.end(), u.begin(), u.end());
                               });
    return sca::cpa_attack(
        [&](const sca::CpaVisitor& visit) {
          for (size_t i = 0; i < ct.n; ++i)
            visit({ct.operands.data() + i * words, words}, {ct.data.data() + i * samples, samples});
        },
        samples, run.options);
  }
  return sca::cpa_attack(
      [&](const sca::CpaVisitor& visit) {
        leakage::synthesize_stream(kp, run.traces, src, factory, run.leakage, run.threads,
                                   [&](size_t, const kem::Ciphertext& c, std::span<const float> s) {
                                     visit(sca::pwm_operands(c, words), s);
                                   });
      },
      samples, run.options);
}

/// One repetition of the CPA experiment: fresh key and traces from `master`.
inline sca::CpaReport cpa_repetition(const kem::KemParams& p, uint64_t master, size_t traces, bool prot, double sigma,
                                     size_t coefficients = kCpaCoefficients, unsigned threads = 1) {
  const auto kp = experiment_key(p, master);
  CpaRun run;
  run.params = p;
  run.traces = traces;
  run.is_protected = prot;
  run.leakage = {leakage::Target::Point2, sigma, derive_seed(master, kAttackTag), 1};
  run.options.coefficients = coefficients;
  run.options.truth = sca::pwm_secrets(kp);
  run.threads = threads;
  return run_cpa(kp, run);
}

// ---------------------------------------------------------------------------
// TVLA on synthesized traces.

struct TvlaRun {
  size_t n_fixed = 10000;
  size_t n_random = 10000;
  bool is_protected = false;
  double sigma = leakage::kDefaultNoiseSigma;
  leakage::Target target = leakage::Target::Point2;
  bool null_test = false;  // both groups random
  unsigned threads = 1;
};

inline kem::Ciphertext fixed_class_ciphertext(const kem::KeyPair& kp, uint64_t master) {
  return leakage::honest_ciphertexts(kp)(0, derive_seed(master, kFixedCtTag));
}

inline sca::Welford class_welford(const kem::KeyPair& kp, size_t n, const leakage::CiphertextSource& cts, bool prot,
                                  const leakage::LeakageConfig& cfg, unsigned threads) {
  sca::Welford w;
  leakage::synthesize_stream(kp, n, cts, leakage::factory_for(kp.params, prot), cfg, threads,
                             [&](size_t, const kem::Ciphertext&, std::span<const float> s) { w.add(s); });
  return w;
}

/// Fixed-vs-random (or random-vs-random) t-test with the key and both
/// classes derived from `master`.
inline sca::TvlaReport tvla_repetition(const kem::KemParams& p, uint64_t master, const TvlaRun& run) {
  const auto kp = experiment_key(p, master);
  const leakage::LeakageConfig cf{run.target, run.sigma, derive_seed(master, kFixedTag), 1};
  const leakage::LeakageConfig cr{run.target, run.sigma, derive_seed(master, kRandomTag), 1};
  const auto first = run.null_test ? leakage::honest_ciphertexts(kp)
                                   : leakage::fixed_ciphertext(fixed_class_ciphertext(kp, master));
  const auto a = class_welford(kp, run.n_fixed, first, run.is_protected, cf, run.threads);
  const auto b = class_welford(kp, run.n_random, leakage::honest_ciphertexts(kp), run.is_protected, cr, run.threads);
  return sca::tvla(a, b);
}

// ---------------------------------------------------------------------------
// Pilot calibration.
//
// The noise added by the model is independent of the data, so the expected
// t-statistic at noise sigma follows from one noiseless run per class:
//   mu_s(sigma) = (mean_f - mean_r) / sqrt((var_f + sigma^2)/n_f + (var_r + sigma^2)/n_r)
// and the observed t_s is approximately mu_s + N(0, 1), independently per
// sample. The probability that a protected TVLA run stays below the
// threshold is then prod_s P(|mu_s + Z| <= 4.5). The pilot averages this
// over several (key, fixed ciphertext) pairs and picks the smallest grid
// sigma whose average reaches kPassTarget, the same 0.99 that the null test
// must meet. It then measures the unprotected disclosure budget there.

inline constexpr double kPassTarget = 0.99;

struct NoiselessProfile {
  sca::Welford fixed, random;

  double signal(size_t s, double sigma, size_t n_fixed, size_t n_random) const {
    const double se = std::sqrt((fixed.variance(s) + sigma * sigma) / double(n_fixed) +
                                (random.variance(s) + sigma * sigma) / double(n_random));
    return se > 0 ? (fixed.mean(s) - random.mean(s)) / se : 0.0;
  }

  double max_signal(double sigma, size_t n_fixed, size_t n_random, size_t* where = nullptr) const {
    double best = 0;
    for (size_t s = 0; s < fixed.samples(); ++s) {
      const double t = std::abs(signal(s, sigma, n_fixed, n_random));
      if (t > best) {
        best = t;
        if (where) *where = s;
      }
    }
    return best;
  }

  double pass_probability(double sigma, size_t n_fixed, size_t n_random,
                          double threshold = sca::kTvlaThreshold) const {
    auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    double p = 1;
    for (size_t s = 0; s < fixed.samples(); ++s) {
      const double mu = signal(s, sigma, n_fixed, n_random);
      p *= phi(threshold - mu) - phi(-threshold - mu);
    }
    return p;
  }
};

inline NoiselessProfile noiseless_tvla_profile(const kem::KemParams& p, uint64_t master, size_t n, bool prot,
                                               unsigned threads = 1) {
  const auto kp = experiment_key(p, master);
  const leakage::LeakageConfig cf{leakage::Target::Point2, 0.0, derive_seed(master, kFixedTag), 1};
  const leakage::LeakageConfig cr{leakage::Target::Point2, 0.0, derive_seed(master, kRandomTag), 1};
  return {class_welford(kp, n, leakage::fixed_ciphertext(fixed_class_ciphertext(kp, master)), prot, cf, threads),
          class_welford(kp, n, leakage::honest_ciphertexts(kp), prot, cr, threads)};
}

/// Fraction of `reps` repetitions that recover all coefficients at rank 1.
inline size_t cpa_successes(const kem::KemParams& p, uint64_t master, size_t traces, double sigma, size_t reps,
                            unsigned threads = 1) {
  size_t ok = 0;
  for (size_t r = 0; r < reps; ++r)
    ok += cpa_repetition(p, derive_seed(master, kRepTag + r), traces, false, sigma, kCpaCoefficients, threads).success;
  return ok;
}

/// Smallest grid budget (geometric, ratio 2^(1/4), rounded to 500) at which
/// at least `need` of `reps` repetitions succeed.
inline size_t disclosure_budget(const kem::KemParams& p, uint64_t master, double sigma, size_t reps, size_t need,
                                size_t start, size_t limit, unsigned threads,
                                const std::function<void(size_t, size_t)>& progress = {}) {
  for (double n = double(start); n <= double(limit); n *= std::pow(2.0, 0.25)) {
    const size_t budget = std::max<size_t>(500, size_t(std::llround(n / 500.0)) * 500);
    const size_t ok = cpa_successes(p, master, budget, sigma, reps, threads);
    if (progress) progress(budget, ok);
    if (ok >= need) return budget;
  }
  return 0;
}

}  // namespace skyber::experiments
