#include <gtest/gtest.h>

#include <sstream>

#include "skyber/report.hpp"
#include "skyber/sca.hpp"
#include "skyber/tvla.hpp"

using namespace skyber;
using namespace skyber::sca;

namespace {

leakage::TraceSet make_set(const kem::KeyPair& kp, size_t n, double sigma, bool prot, uint64_t seed,
                           leakage::Target t = leakage::Target::Point2) {
  leakage::LeakageConfig cfg{t, sigma, seed, 1};
  return leakage::synthesize(kp, n, leakage::uniform_ciphertexts(kp.params), leakage::factory_for(kp.params, prot),
                             cfg, prot);
}

leakage::TraceSet gaussian_set(size_t n, size_t s, double mean, uint64_t seed) {
  leakage::TraceSet ts;
  ts.n_samples = s;
  ts.assoc_len = 1;
  Xoshiro256 rng(seed);
  std::vector<float> row(s);
  const uint8_t label = 0;
  for (size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = float(mean + rng.gaussian_pair().first);
    ts.append({&label, 1}, row);
  }
  return ts;
}

}  // namespace

TEST(Pearson, Examples) {
  std::vector<double> x{1, 2, 3}, y{2, 4, 7}, neg{-1, -2, -3};
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, neg), -1.0);
  // (sum dx dy) / sqrt(sum dx^2 sum dy^2) = 5 / sqrt(2 * 114 / 9)
  EXPECT_NEAR(pearson(x, y), 5.0 / std::sqrt(2.0 * 114.0 / 9.0), 1e-12);
  EXPECT_NEAR(pearson(x, y), 0.9934, 1e-3);
  std::vector<double> c{5, 5, 5};
  EXPECT_THROW(pearson(c, c), UndefinedCorrelation);
  EXPECT_EQ(pearson(x, c), 0.0);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ContractViolation);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ContractViolation);
}

TEST(Cpa, FastEngineMatchesDirectEngine) {
  Xoshiro256 rng(61);
  const size_t S = 5;
  DirectCpa direct(CpaTarget::Point2, S);
  FastCpa fast(S);
  FastCpa part_a(S), part_b(S);
  std::vector<float> t(S);
  for (int i = 0; i < 400; ++i) {
    const uint16_t u = i % 37 == 0 ? 0 : uint16_t(rng.below(ring::kQ));
    const uint32_t prev = rng.below(4096);
    for (auto& v : t) v = float(rng.below(13)) + float(rng.gaussian_pair().first);
    direct.add(u, prev, t);
    fast.add(u, prev, t);
    (i < 150 ? part_a : part_b).add(u, prev, t);
  }
  part_a.merge(part_b);
  const auto d = direct.finish();
  const auto f = fast.finish();
  const auto m = part_a.finish();
  ASSERT_EQ(d.rho.size(), f.rho.size());
  double worst = 0, worst_merge = 0;
  for (size_t i = 0; i < d.rho.size(); ++i) {
    worst = std::max(worst, std::abs(d.rho[i] - f.rho[i]));
    worst_merge = std::max(worst_merge, std::abs(f.rho[i] - m.rho[i]));
  }
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(worst_merge, 1e-9);
}

TEST(Cpa, EnginesMatchNaivePearson) {
  // Independent check: build the prediction vectors explicitly and use pearson().
  Xoshiro256 rng(62);
  const size_t n = 120, S = 3;
  std::vector<uint16_t> us(n);
  std::vector<uint32_t> prevs(n);
  std::vector<std::vector<double>> cols(S, std::vector<double>(n));
  for (auto target : {CpaTarget::Point1, CpaTarget::Point2}) {
    DirectCpa direct(target, S);
    std::optional<FastCpa> fast;
    if (target == CpaTarget::Point2) fast.emplace(S);
    for (size_t i = 0; i < n; ++i) {
      us[i] = uint16_t(rng.below(ring::kQ));
      prevs[i] = target == CpaTarget::Point1 ? uint32_t(rng() & 0xffffff) : rng.below(4096);
      std::vector<float> t(S);
      for (size_t s = 0; s < S; ++s) t[s] = float(rng.below(20)), cols[s][i] = t[s];
      direct.add(us[i], prevs[i], t);
      if (fast) fast->add(us[i], prevs[i], t);
    }
    const auto d = direct.finish();
    for (uint16_t h : {uint16_t(1), uint16_t(2), uint16_t(1000), uint16_t(3328)}) {
      std::vector<double> pred(n);
      for (size_t i = 0; i < n; ++i) pred[i] = std::popcount(prevs[i] ^ predicted_value(target, h, us[i]));
      for (size_t s = 0; s < S; ++s) {
        EXPECT_NEAR(d.at(h, s), pearson(pred, cols[s]), 1e-12);
        if (fast) { EXPECT_NEAR(fast->finish().at(h, s), pearson(pred, cols[s]), 1e-9); }
      }
    }
  }
}

TEST(Cpa, NoiselessUnprotectedRecoversTenCoefficients) {
  const auto kp = kem::keygen(kem::kKyber768, kem::seed_from_u64(63));
  const auto ts = make_set(kp, 200, 0.0, false, 64);
  CpaOptions opt;
  opt.truth = pwm_secrets(kp);
  const auto rep = cpa_attack(ts, opt);
  ASSERT_EQ(rep.coefficients.size(), 10u);
  EXPECT_TRUE(rep.success);
  EXPECT_EQ(rep.traces, 200u);
  for (const auto& c : rep.coefficients) {
    EXPECT_EQ(c.truth_rank, size_t{1});
    // Noiseless and aligned: the prediction is exactly the sample.
    EXPECT_NEAR(c.truth_score(), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(c.curve_truth[c.word]), 1.0, 1e-9);
    for (size_t i = 1; i < c.ranking.size(); ++i) ASSERT_GE(c.ranking[i - 1].score, c.ranking[i].score);
    for (const auto& h : c.ranking) ASSERT_LE(h.score, 1.0);
  }
}

TEST(Cpa, NoiselessPointOneWithDirectEngine) {
  const auto kp = kem::keygen(kem::kKyber512, kem::seed_from_u64(65));
  const auto ts = make_set(kp, 150, 0.0, false, 66, leakage::Target::Point1);
  const auto truth = pwm_secrets(kp);
  CpaOptions opt;
  opt.target = CpaTarget::Point1;
  opt.coefficients = 1;
  opt.truth = truth;
  // Word 0 starts from a cleared register, so the prediction is HW(h * u),
  // which does not change when h * u is shifted left: h and 2h tie exactly.
  const auto first = cpa_attack(ts, opt);
  EXPECT_NEAR(first.coefficients[0].truth_score(), 1.0, 1e-9);
  auto shift_of_truth = [&](uint32_t h) {
    for (uint32_t a = h, b = truth[0]; a && b; a <<= 1, b <<= 1)
      if (a == truth[0] || b == h) return true;
    return false;
  };
  for (const auto& h : first.coefficients[0].ranking)
    if (h.score > 1 - 1e-9) { EXPECT_TRUE(shift_of_truth(h.value)) << h.value; }
  // From a known nonzero register the shift symmetry is broken.
  opt.prior = {truth[0]};
  opt.coefficients = 2;
  const auto rep = cpa_attack(ts, opt);
  EXPECT_TRUE(rep.success);
  opt.engine = Engine::Fast;
  EXPECT_THROW(cpa_attack(ts, opt), ContractViolation);
}

TEST(Cpa, ProtectedFailsAtTheSameBudget) {
  const auto kp = kem::keygen(kem::kKyber768, kem::seed_from_u64(67));
  int failures = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto ts = make_set(kp, 200, 0.0, true, 68 + rep);
    CpaOptions opt;
    opt.truth = pwm_secrets(kp);
    failures += !cpa_attack(ts, opt).success;
  }
  EXPECT_GE(failures, 9);
}

TEST(Cpa, RankingIsAffineInvariant) {
  const auto kp = kem::keygen(kem::kKyber512, kem::seed_from_u64(69));
  auto ts = make_set(kp, 300, 2.0, false, 70);
  CpaOptions opt;
  opt.coefficients = 1;
  opt.truth = pwm_secrets(kp);
  const auto base = cpa_attack(ts, opt);
  for (auto& v : ts.samples) v = 3.0f * v + 100.0f;
  const auto moved = cpa_attack(ts, opt);
  for (size_t i = 0; i < 20; ++i) EXPECT_EQ(base.coefficients[0].ranking[i].value, moved.coefficients[0].ranking[i].value);
  EXPECT_EQ(base.coefficients[0].truth_rank, moved.coefficients[0].truth_rank);
}

TEST(Cpa, ExtendAndPruneUsesThePrior) {
  const auto kp = kem::keygen(kem::kKyber512, kem::seed_from_u64(71));
  const auto ts = make_set(kp, 200, 0.0, false, 72);
  CpaOptions opt;
  const auto truth = pwm_secrets(kp);
  opt.prior.assign(truth.begin(), truth.begin() + 5);
  opt.truth = truth;
  opt.coefficients = 3;
  const auto rep = cpa_attack(ts, opt);
  ASSERT_EQ(rep.coefficients.size(), 3u);
  EXPECT_EQ(rep.coefficients[0].word, 5u);
  EXPECT_TRUE(rep.success);
  opt.prior.assign(60, 0);
  opt.coefficients = 5;
  EXPECT_THROW(cpa_attack(ts, opt), ContractViolation);
}

TEST(Cpa, RequiresCiphertextsInAssociatedData) {
  auto ts = gaussian_set(10, 4, 0, 73);
  EXPECT_THROW(cpa_attack(ts, CpaOptions{}), ContractViolation);
}

TEST(Tvla, IdenticalSetsGiveZero) {
  const auto a = gaussian_set(50, 8, 0, 74);
  const auto r = tvla(a, a);
  for (double t : r.t) EXPECT_EQ(t, 0.0);
  EXPECT_FALSE(r.leakage_detected());
  EXPECT_EQ(r.threshold, 4.5);
}

TEST(Tvla, SwapNegates) {
  const auto a = gaussian_set(200, 8, 0, 75), b = gaussian_set(300, 8, 0.1, 76);
  const auto ab = tvla(a, b), ba = tvla(b, a);
  for (size_t i = 0; i < ab.t.size(); ++i) EXPECT_DOUBLE_EQ(ab.t[i], -ba.t[i]);
  EXPECT_EQ(ab.n_fixed, 200u);
  EXPECT_EQ(ab.n_random, 300u);
}

TEST(Tvla, ConstantOffsetClosedForm) {
  // E[t] = 1 / sqrt(1/1000 + 1/1000) = 22.36; sd of t is about 1.
  const auto a = gaussian_set(1000, 16, 1.0, 77), b = gaussian_set(1000, 16, 0.0, 78);
  const auto r = tvla(a, b);
  for (double t : r.t) EXPECT_NEAR(t, std::sqrt(500.0), 5.0);
  EXPECT_TRUE(r.leakage_detected());
}

TEST(Tvla, WelfordMergeMatchesSequential) {
  const auto a = gaussian_set(500, 6, 3.0, 79);
  Welford all(6), left(6), right(6);
  for (size_t i = 0; i < a.size(); ++i) {
    all.add(a.trace(i));
    (i < 170 ? left : right).add(a.trace(i));
  }
  left.merge(right);
  for (size_t s = 0; s < 6; ++s) {
    EXPECT_NEAR(all.mean(s), left.mean(s), 1e-12);
    EXPECT_NEAR(all.variance(s), left.variance(s), 1e-10);
  }
}

TEST(Tvla, DegenerateAndInvalidInputs) {
  leakage::TraceSet c;
  c.n_samples = 2;
  c.assoc_len = 0;
  for (int i = 0; i < 3; ++i) c.append({}, std::vector<float>{1.0f, 2.0f});
  const auto r = tvla(c, c);
  EXPECT_EQ(r.t, (std::vector<double>{0, 0}));
  EXPECT_FALSE(r.warnings.empty());

  const auto a = gaussian_set(10, 3, 0, 80), b = gaussian_set(10, 4, 0, 81), one = gaussian_set(1, 3, 0, 82);
  EXPECT_THROW(tvla(a, b), ContractViolation);
  EXPECT_THROW(tvla(a, one), ContractViolation);
}

TEST(Report, CsvAndSvg) {
  const auto a = gaussian_set(100, 10, 0.0, 83), b = gaussian_set(100, 10, 0.5, 84);
  std::ostringstream csv;
  report::write_tvla(csv, tvla(a, b));
  EXPECT_EQ(csv.str().substr(0, 9), "sample,t\n");
  std::istringstream in(csv.str());
  const auto table = report::read_table(in);
  EXPECT_EQ(table.rows.size(), 10u);
  std::ostringstream svg;
  report::write_svg(svg, table, "tvla");
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("stroke-dasharray"), std::string::npos);

  std::istringstream empty("");
  EXPECT_THROW(report::read_table(empty), FormatError);
  std::istringstream header_only("sample,t\n");
  EXPECT_THROW(report::read_table(header_only), FormatError);
  std::istringstream junk("sample,t\n0,abc\n");
  EXPECT_THROW(report::read_table(junk), FormatError);
}
