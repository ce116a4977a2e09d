// Fixed-vs-random test vector leakage assessment (Welch's t-test).
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/leakage.hpp"

namespace skyber::sca {

inline constexpr double kTvlaThreshold = 4.5;

/// Per-sample running mean and sum of squared deviations. merge() uses the
/// pairwise update of Chan et al., so partial accumulators over disjoint
/// trace ranges combine to the same statistics.
class Welford {
 public:
  explicit Welford(size_t samples = 0) : mean_(samples), m2_(samples) {}

  void add(std::span<const float> x) {
    if (mean_.empty() && n_ == 0) mean_.resize(x.size()), m2_.resize(x.size());
    require(x.size() == mean_.size(), "tvla: trace length mismatch");
    ++n_;
    const double inv = 1.0 / double(n_);
    for (size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean_[i];
      mean_[i] += d * inv;
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }

  void merge(const Welford& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    require(o.mean_.size() == mean_.size(), "tvla: trace length mismatch");
    const double na = double(n_), nb = double(o.n_), n = na + nb;
    for (size_t i = 0; i < mean_.size(); ++i) {
      const double d = o.mean_[i] - mean_[i];
      mean_[i] += d * nb / n;
      m2_[i] += o.m2_[i] + d * d * na * nb / n;
    }
    n_ += o.n_;
  }

  size_t count() const { return n_; }
  size_t samples() const { return mean_.size(); }
  double mean(size_t i) const { return mean_[i]; }
  /// Unbiased sample variance.
  double variance(size_t i) const { return n_ > 1 ? m2_[i] / double(n_ - 1) : 0.0; }

 private:
  size_t n_ = 0;
  std::vector<double> mean_, m2_;
};

struct TvlaReport {
  std::vector<double> t;
  double max_abs_t = 0;
  size_t argmax = 0;
  size_t n_fixed = 0;
  size_t n_random = 0;
  double threshold = kTvlaThreshold;
  std::vector<std::string> warnings;

  bool leakage_detected() const { return max_abs_t > threshold; }
};

inline TvlaReport tvla(const Welford& fixed, const Welford& random) {
  require(fixed.samples() == random.samples(), "tvla: trace length mismatch");
  require(fixed.count() >= 2 && random.count() >= 2, "tvla: each group needs at least two traces");
  TvlaReport r;
  r.n_fixed = fixed.count();
  r.n_random = random.count();
  r.t.resize(fixed.samples());
  size_t degenerate = 0;
  for (size_t i = 0; i < r.t.size(); ++i) {
    const double se2 = fixed.variance(i) / double(r.n_fixed) + random.variance(i) / double(r.n_random);
    if (se2 == 0) {
      ++degenerate;
      r.t[i] = 0;
      continue;
    }
    r.t[i] = (fixed.mean(i) - random.mean(i)) / std::sqrt(se2);
    if (std::abs(r.t[i]) > r.max_abs_t) r.max_abs_t = std::abs(r.t[i]), r.argmax = i;
  }
  if (degenerate)
    r.warnings.push_back(std::to_string(degenerate) + " sample(s) with zero variance in both groups; t set to 0");
  return r;
}

inline Welford welford_of(const leakage::TraceSet& ts) {
  Welford w(ts.n_samples);
  for (size_t i = 0; i < ts.size(); ++i) w.add(ts.trace(i));
  return w;
}

inline TvlaReport tvla(const leakage::TraceSet& fixed, const leakage::TraceSet& random) {
  require(fixed.n_samples == random.n_samples, "tvla: trace length mismatch");
  return tvla(welford_of(fixed), welford_of(random));
}

}  // namespace skyber::sca
