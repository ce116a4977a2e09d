// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. All randomness derives from kMasterSeed; the
// tolerances and budgets below are fixed here and not tuned per run.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "experiments.hpp"
#include "oracle/schoolbook.hpp"
#include "skyber/kem.hpp"
#include "skyber/ring.hpp"
#include "skyber/rpg.hpp"
#include "skyber/sched.hpp"
#include "skyber/traced.hpp"

using namespace skyber;

namespace {

constexpr uint64_t kMasterSeed = 0xacce97ed5eed0001ULL;

constexpr size_t kKatCount = 1000;
constexpr size_t kOraclePairs = 1000;
constexpr size_t kRpgSeeds = 100000;
constexpr size_t kSchedules = 100;
constexpr size_t kCpaReps = 10;
constexpr size_t kCpaNeeded = 9;
constexpr double kPeakRatio = 1.0 / 8.0;
constexpr size_t kTvlaUnprotected = 10000;
constexpr size_t kTvlaProtected = 100000;
constexpr size_t kNullReps = 100;
constexpr size_t kNullNeeded = 99;
constexpr unsigned kHardwareDecryptionCycles = 6700;

constexpr double kLimitKat = 30, kLimitOracle = 60, kLimitRpg = 60;
constexpr double kLimitCpa = 15 * 60, kLimitTvla = 20 * 60;

unsigned g_threads = 1;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome within(Outcome o, double elapsed, double limit) {
  o.detail += fmt("; %.1f s (limit %.0f s)", elapsed, limit);
  o.pass = o.pass && elapsed < limit;
  return o;
}

// 1 ------------------------------------------------------------------------
Outcome functional_correctness() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& p : kem::kAllParams) {
    std::ostringstream sink;
    const int rc = cli::cmd_kat(p, kKatCount, derive_seed(kMasterSeed, 100 + p.id), false, sink);
    ok = ok && rc == 0;
    detail += (detail.empty() ? "" : ", ") + std::string(p.name) + (rc == 0 ? " 1000/1000" : " FAILED");
  }
  return within({ok, detail}, seconds_since(t0), kLimitKat);
}

// 2 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Xoshiro256 rng(derive_seed(kMasterSeed, 200));
  size_t match = 0;
  for (size_t t = 0; t < kOraclePairs; ++t) {
    ring::Poly a, b;
    for (auto& c : a.coeffs) c = uint16_t(rng.below(ring::kQ));
    for (auto& c : b.coeffs) c = uint16_t(rng.below(ring::kQ));
    const auto got = ring::intt(ring::basemul(ring::ntt(a), ring::ntt(b)));
    match += got.coeffs == oracle::negacyclic(a.coeffs, b.coeffs);
  }
  return within({match == kOraclePairs, fmt("%zu/%zu exact matches", match, kOraclePairs)}, seconds_since(t0),
                kLimitOracle);
}

// 3 ------------------------------------------------------------------------
Outcome rpg_structure() {
  const auto t0 = Clock::now();
  auto seeds = sched::SeedStream::from_master(derive_seed(kMasterSeed, 300), kRpgSeeds);
  size_t bad_bijection = 0, bad_restricted = 0, bad_cycles = 0;
  for (size_t i = 0; i < kRpgSeeds; ++i) {
    const auto g = rpg::generate(seeds.next());
    bad_bijection += !rpg::is_bijection(g.perm);
    bool edge = false;
    for (size_t k = 0; k < 6; ++k) edge |= rpg::is_restricted(g.perm[k]) || rpg::is_restricted(g.perm[63 - k]);
    bad_restricted += edge;
    bad_cycles += g.cycles != rpg::kTotalCycles;
  }
  const uint8_t worked = rpg::adjust_idx1(0x05, 0x02);
  const bool ok = bad_bijection == 0 && bad_restricted == 0 && bad_cycles == 0 && worked == 0x00;
  return within({ok, fmt("%zu seeds: %zu non-bijective, %zu restricted-position hits, %zu runs not %u cycles; "
                         "rest=0x02 idx=0x05 -> 0x%02x",
                         kRpgSeeds, bad_bijection, bad_restricted, bad_cycles, rpg::kTotalCycles, worked)},
                seconds_since(t0), kLimitRpg);
}

// 4 ------------------------------------------------------------------------
Outcome shuffling_soundness() {
  size_t same_message = 0, same_cycles = 0;
  for (size_t i = 0; i < kSchedules; ++i) {
    const uint64_t s = derive_seed(kMasterSeed, 400 + i);
    const auto& p = kem::kAllParams[i % 3];
    const auto kp = kem::keygen(p, kem::seed_from_u64(derive_seed(s, 0)));
    kem::Message m;
    Xoshiro256(derive_seed(s, 1)).fill(m);
    const auto ct = kem::encrypt(kp, m, kem::seed_from_u64(derive_seed(s, 2)));
    auto stream = sched::SeedStream::from_master(derive_seed(s, 3));
    const auto prot = sched::build_protected(p, stream);
    const auto td = kem::decrypt_traced(kp, ct, prot);
    same_message += td.complete && td.message == kem::decrypt(kp, ct) && td.message == m;
    same_cycles += sched::cycle_count(prot) == sched::cycle_count(sched::build_unprotected(p));
  }
  return {same_message == kSchedules && same_cycles == kSchedules,
          fmt("%zu/%zu messages equal reference decrypt, %zu/%zu cycle counts equal unprotected", same_message,
              kSchedules, same_cycles, kSchedules)};
}

// 5 ------------------------------------------------------------------------
struct CpaEvidence {
  std::vector<sca::CpaReport> unprotected, protected_;
  sca::CpaReport unprotected_equal_budget;
};

uint64_t cpa_master(size_t rep) { return derive_seed(kMasterSeed, 500 + rep); }

CpaEvidence run_cpa_contrast(unsigned threads, size_t reps) {
  const auto& p = kem::kKyber768;
  const double sigma = leakage::kDefaultNoiseSigma;
  const size_t b = experiments::kPilotBudget;
  CpaEvidence ev;
  for (size_t r = 0; r < reps; ++r) {
    ev.unprotected.push_back(
        experiments::cpa_repetition(p, cpa_master(r), b, false, sigma, experiments::kCpaCoefficients, threads));
    std::cout << "  cpa unprotected rep " << r << (ev.unprotected.back().success ? " recovered" : " failed") << '\n'
              << std::flush;
  }
  for (size_t r = 0; r < reps; ++r) {
    ev.protected_.push_back(experiments::cpa_repetition(p, cpa_master(r), experiments::kProtectedFactor * b, true,
                                                        sigma, experiments::kCpaCoefficients, threads));
    std::cout << "  cpa protected rep " << r << (ev.protected_.back().success ? " recovered" : " failed") << '\n'
              << std::flush;
  }
  // Same key, ciphertexts and noise as protected rep 0; only the first
  // coefficient is needed for its correct-key correlation peak.
  ev.unprotected_equal_budget =
      experiments::cpa_repetition(p, cpa_master(0), experiments::kProtectedFactor * b, false, sigma, 1, threads);
  return ev;
}

Outcome cpa_contrast(CpaEvidence& ev) {
  const auto t0 = Clock::now();
  ev = run_cpa_contrast(g_threads, kCpaReps);
  size_t recovered = 0, failed = 0;
  double protected_peak = 0;
  for (const auto& r : ev.unprotected) recovered += r.success;
  for (const auto& r : ev.protected_) {
    failed += !r.success;
    protected_peak = std::max(protected_peak, r.coefficients.front().truth_score());
  }
  const double unprotected_peak = ev.unprotected_equal_budget.coefficients.front().truth_score();
  const double ratio = protected_peak / unprotected_peak;
  const bool ok = recovered >= kCpaNeeded && failed >= kCpaNeeded && ratio <= kPeakRatio;
  return within({ok, fmt("sigma %.0f, B %zu: unprotected %zu/%zu recovered; protected at %zu traces %zu/%zu failed; "
                         "correct-key peak |rho| protected %.5f (max over reps) vs unprotected %.5f, ratio %.3f "
                         "(limit %.3f)",
                         leakage::kDefaultNoiseSigma, experiments::kPilotBudget, recovered, kCpaReps,
                         experiments::kProtectedFactor * experiments::kPilotBudget, failed, kCpaReps,
                         protected_peak, unprotected_peak, ratio, kPeakRatio)},
                seconds_since(t0), kLimitCpa);
}

// 6 ------------------------------------------------------------------------
struct TvlaEvidence {
  sca::TvlaReport unprotected, protected_;
  std::vector<sca::TvlaReport> null;
};

TvlaEvidence run_tvla_contrast(unsigned threads, size_t null_reps) {
  const auto& p = kem::kKyber768;
  TvlaEvidence ev;
  experiments::TvlaRun run;
  run.threads = threads;
  run.n_fixed = run.n_random = kTvlaUnprotected;
  ev.unprotected = experiments::tvla_repetition(p, derive_seed(kMasterSeed, 600), run);
  run.is_protected = true;
  run.n_fixed = run.n_random = kTvlaProtected;
  ev.protected_ = experiments::tvla_repetition(p, derive_seed(kMasterSeed, 601), run);
  run.is_protected = false;
  run.null_test = true;
  run.n_fixed = run.n_random = kTvlaUnprotected;
  for (size_t r = 0; r < null_reps; ++r)
    ev.null.push_back(experiments::tvla_repetition(p, derive_seed(kMasterSeed, 700 + r), run));
  return ev;
}

Outcome tvla_contrast(TvlaEvidence& ev) {
  const auto t0 = Clock::now();
  ev = run_tvla_contrast(g_threads, kNullReps);
  size_t quiet = 0;
  double worst_null = 0;
  for (const auto& r : ev.null) {
    quiet += !r.leakage_detected();
    worst_null = std::max(worst_null, r.max_abs_t);
  }
  const bool ok = ev.unprotected.leakage_detected() && !ev.protected_.leakage_detected() && quiet >= kNullNeeded;
  return within({ok, fmt("unprotected 1e4/class max|t| %.2f (sample %zu); protected 1e5/class max|t| %.2f (sample "
                         "%zu); null %zu/%zu below 4.5 (largest %.2f)",
                         ev.unprotected.max_abs_t, ev.unprotected.argmax, ev.protected_.max_abs_t,
                         ev.protected_.argmax, quiet, kNullReps, worst_null)},
                seconds_since(t0), kLimitTvla);
}

// 7 ------------------------------------------------------------------------
Outcome hardware_substitute() {
  bool parity = true;
  std::string cycles;
  for (const auto& p : kem::kAllParams) {
    auto seeds = sched::SeedStream::from_master(derive_seed(kMasterSeed, 800 + p.id));
    const auto prot = sched::build_protected(p, seeds);
    const auto unprot = sched::build_unprotected(p);
    parity = parity && sched::cycle_count(prot) == sched::cycle_count(unprot);
    cycles += fmt("%s%s %u", cycles.empty() ? "" : ", ", std::string(p.name).c_str(), sched::cycle_count(prot));
  }
  const bool ok = parity && rpg::kTotalCycles < kHardwareDecryptionCycles;
  return {ok, fmt("area/frequency not reproducible in software; RPG latency %u cycles vs %u-cycle hardware "
                  "decryption; protected = unprotected datapath cycles (%s)",
                  rpg::kTotalCycles, kHardwareDecryptionCycles, cycles.c_str())};
}

// 8 ------------------------------------------------------------------------
bool same_cpa(const sca::CpaReport& a, const sca::CpaReport& b) {
  if (a.success != b.success || a.traces != b.traces || a.coefficients.size() != b.coefficients.size()) return false;
  for (size_t i = 0; i < a.coefficients.size(); ++i) {
    const auto &x = a.coefficients[i], &y = b.coefficients[i];
    if (x.curve_best != y.curve_best || x.curve_truth != y.curve_truth || x.ranking.size() != y.ranking.size())
      return false;
    for (size_t k = 0; k < x.ranking.size(); ++k)
      if (x.ranking[k].value != y.ranking[k].value || x.ranking[k].score != y.ranking[k].score) return false;
  }
  return true;
}

bool same_tvla(const sca::TvlaReport& a, const sca::TvlaReport& b) {
  return a.t == b.t && a.max_abs_t == b.max_abs_t && a.argmax == b.argmax;
}

Outcome reproducibility(const CpaEvidence& cpa, const TvlaEvidence& tvla) {
  // Re-run the first repetition of every stochastic experiment with a
  // different worker count and compare the full reports bit for bit.
  const unsigned other = g_threads == 1 ? 3 : 1;
  const auto p = kem::kKyber768;
  const double sigma = leakage::kDefaultNoiseSigma;
  const size_t b = experiments::kPilotBudget;
  size_t same = 0, total = 0;
  auto check = [&](bool eq) {
    same += eq;
    ++total;
  };
  check(same_cpa(cpa.unprotected.front(), experiments::cpa_repetition(p, cpa_master(0), b, false, sigma,
                                                                      experiments::kCpaCoefficients, other)));
  check(same_cpa(cpa.protected_.front(),
                 experiments::cpa_repetition(p, cpa_master(0), experiments::kProtectedFactor * b, true, sigma,
                                             experiments::kCpaCoefficients, other)));
  const auto t = run_tvla_contrast(other, 1);
  check(same_tvla(tvla.unprotected, t.unprotected));
  check(same_tvla(tvla.protected_, t.protected_));
  check(same_tvla(tvla.null.front(), t.null.front()));
  // A second pass with the original worker count must also repeat exactly.
  check(same_tvla(tvla.unprotected, run_tvla_contrast(g_threads, 0).unprotected));
  return {same == total, fmt("%zu/%zu re-runs bit-identical (workers %u vs %u)", same, total, g_threads, other)};
}

}  // namespace

int main() {
  g_threads = std::max(1u, std::thread::hardware_concurrency());
  std::cout << "acceptance: master seed " << cli::hex64(kMasterSeed) << ", " << g_threads << " worker(s), sigma "
            << leakage::kDefaultNoiseSigma << ", pilot budget " << experiments::kPilotBudget << '\n'
            << std::flush;

  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << '\n'
              << std::flush;
    failures += !o.pass;
  };

  report(1, "functional correctness", functional_correctness());
  report(2, "arithmetic oracle equivalence", oracle_equivalence());
  report(3, "RPG structure", rpg_structure());
  report(4, "shuffling soundness", shuffling_soundness());
  CpaEvidence cpa;
  report(5, "CPA contrast", cpa_contrast(cpa));
  TvlaEvidence tvla;
  report(6, "TVLA contrast", tvla_contrast(tvla));
  report(7, "hardware figures substitute", hardware_substitute());
  report(8, "reproducibility", reproducibility(cpa, tvla));

  std::cout << "acceptance: " << 8 - failures << "/8 criteria pass\n";
  return failures == 0 ? 0 : 1;
}
