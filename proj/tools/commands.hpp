// Subcommands of the `skyber` tool. run() is the whole CLI; main() only
// forwards argv, so tests drive the same code in-process.
//
// Exit codes
//   0   success
//   1   functional failure (kat mismatch, I/O error, attack without success)
//   2   rpg audit invariant violated (offending seed printed)
//   3   input file or CSV malformed (bad magic, version, truncation, empty)
//   4   parameter set or trace layout differs between inputs
//   64  usage error
#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "experiments.hpp"
#include "skyber/kem.hpp"
#include "skyber/leakage.hpp"
#include "skyber/report.hpp"
#include "skyber/rpg.hpp"
#include "skyber/sca.hpp"
#include "skyber/sched.hpp"
#include "skyber/tvla.hpp"

namespace skyber::cli {

inline constexpr int kExitFailure = 1;
inline constexpr int kExitAudit = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitMismatch = 4;
inline constexpr int kExitUsage = 64;

class ParamMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline uint64_t parse_hex(const std::string& s) {
  std::string body = s;
  if (body.rfind("0x", 0) == 0 || body.rfind("0X", 0) == 0) body = body.substr(2);
  if (body.empty() || body.size() > 16 || body.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
    throw UsageError("seed must be a hex u64: " + s);
  return std::stoull(body, nullptr, 16);
}

/// Master seed from --seed, or a fresh one that is echoed for replay.
struct SeedArg {
  std::string text;
  uint64_t value(std::ostream& out) const {
    const uint64_t v = text.empty() ? (uint64_t(std::random_device{}()) << 32) | std::random_device{}() : parse_hex(text);
    out << "master seed " << hex64(v) << '\n';
    return v;
  }
};

inline const std::map<std::string, leakage::Target> kTargets{{"point1", leakage::Target::Point1},
                                                             {"point2", leakage::Target::Point2},
                                                             {"point3", leakage::Target::Point3}};

inline std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(is), {}};
}

inline void write_bytes(const std::string& path, std::span<const uint8_t> b) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
  if (!os) throw std::runtime_error("cannot write " + path);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

// ---------------------------------------------------------------------------

inline int cmd_kat(const kem::KemParams& p, size_t count, uint64_t master, bool corrupt, std::ostream& out) {
  size_t ok = 0;
  for (size_t i = 0; i < count; ++i) {
    const uint64_t s = derive_seed(master, i);
    auto kp = kem::keygen(p, kem::seed_from_u64(derive_seed(s, 0)));
    kem::Message m;
    Xoshiro256(derive_seed(s, 1)).fill(m);
    const auto ct = kem::encrypt(kp, m, kem::seed_from_u64(derive_seed(s, 2)));
    if (corrupt) {
      // Negative control: decrypt with an unrelated secret.
      kp.s_hat = kem::keygen(p, kem::seed_from_u64(derive_seed(s, 3))).s_hat;
    }
    ok += kem::decrypt(kp, ct) == m;
  }
  out << "kat " << p.name << ": " << ok << '/' << count << " round trips" << (corrupt ? " (corrupted key)" : "")
      << '\n';
  return ok == count ? 0 : kExitFailure;
}

inline void write_permutation(std::ostream& os, const rpg::Permutation64& perm) {
  char buf[4];
  for (size_t i = 0; i < perm.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02x", perm[i]);
    os << (i ? " " : "") << buf;
  }
  os << '\n';
}

/// `count` consecutive permutations of one free-running LFSR: each run
/// starts from the state the previous one ended in.
inline int cmd_rpg_gen(uint64_t seed, size_t count, std::ostream& os) {
  if (seed == 0 || seed > 0xffffffffu) throw UsageError("rpg seed must be a nonzero 32-bit value");
  uint32_t state = uint32_t(seed);
  for (size_t i = 0; i < count; ++i) {
    rpg::RpgMachine m(state);
    while (m.phase() != rpg::Phase::Done) m.step();
    write_permutation(os, m.output());
    state = m.lfsr_state();
  }
  return 0;
}

/// Empty when the run satisfies every structural invariant, otherwise the
/// first violated one.
inline std::string audit_violation(const rpg::Permutation64& perm, unsigned cycles) {
  if (!rpg::is_bijection(perm)) return "output is not a permutation of 0..63";
  for (size_t i = 0; i < 6; ++i)
    if (rpg::is_restricted(perm[i]) || rpg::is_restricted(perm[rpg::kSize - 1 - i]))
      return "restricted value in positions 0-5 or 58-63";
  if (cycles != rpg::kTotalCycles) return "cycle count " + std::to_string(cycles);
  return {};
}

/// Histogram CSV: value,position,count over all audited seeds.
inline int cmd_rpg_audit(size_t trials, uint64_t master, std::ostream* csv, std::ostream& out, std::ostream& err) {
  std::vector<uint64_t> hist(rpg::kSize * rpg::kSize);
  auto seeds = sched::SeedStream::from_master(master, trials);
  for (size_t t = 0; t < trials; ++t) {
    const uint32_t seed = seeds.next();
    const auto g = rpg::generate(seed);
    if (const auto v = audit_violation(g.perm, g.cycles); !v.empty()) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%08x", seed);
      err << "rpg audit: seed " << buf << ": " << v << '\n';
      return kExitAudit;
    }
    for (size_t pos = 0; pos < rpg::kSize; ++pos) ++hist[g.perm[pos] * rpg::kSize + pos];
  }
  if (csv) {
    *csv << "value,position,count\n";
    for (size_t v = 0; v < rpg::kSize; ++v)
      for (size_t pos = 0; pos < rpg::kSize; ++pos) *csv << v << ',' << pos << ',' << hist[v * rpg::kSize + pos] << '\n';
  }
  out << "rpg audit: " << trials << " seeds, bijective, restricted positions clear, " << rpg::kTotalCycles
      << " cycles each\n";
  return 0;
}

inline kem::KeyPair load_or_derive_key(const kem::KemParams& p, const std::string& key_path, uint64_t master) {
  if (key_path.empty()) return experiments::experiment_key(p, master);
  auto kp = kem::parse_keypair(read_bytes(key_path));
  if (!(kp.params == p))
    throw ParamMismatch("key file is " + std::string(kp.params.name) + ", traces are " + std::string(p.name));
  return kp;
}

enum class TraceClass { Attack, Fixed, Random };

/// Writes an SKTL file. Ciphertexts ride along as associated data in every
/// class. Trace seeds follow the experiment seed layout, so a CLI run and
/// the in-process experiment with the same master seed produce the same
/// traces.
inline void cmd_sim(const kem::KemParams& p, uint64_t master, size_t traces, double sigma, bool prot,
                    leakage::Target target, TraceClass cls, const std::string& key_path, const std::string& path,
                    unsigned threads, std::ostream& out) {
  const auto kp = load_or_derive_key(p, key_path, master);
  leakage::CiphertextSource src = leakage::uniform_ciphertexts(p);
  uint64_t tag = experiments::kAttackTag;
  if (cls == TraceClass::Fixed) {
    src = leakage::fixed_ciphertext(experiments::fixed_class_ciphertext(kp, master));
    tag = experiments::kFixedTag;
  } else if (cls == TraceClass::Random) {
    src = leakage::honest_ciphertexts(kp);
    tag = experiments::kRandomTag;
  }
  const leakage::LeakageConfig cfg{target, sigma, derive_seed(master, tag), 1};
  const size_t n_samples = leakage::samples_per_trace(p, target, 1);
  const size_t assoc = kem::ciphertext_body_size(p);
  leakage::TraceWriter w(path, {p.id, uint8_t((prot ? 1 : 0) | 2), uint32_t(traces), uint32_t(n_samples),
                                uint32_t(assoc)});
  std::vector<uint8_t> buf;
  leakage::synthesize_stream(kp, traces, src, leakage::factory_for(p, prot), cfg, threads,
                             [&](size_t, const kem::Ciphertext& ct, std::span<const float> s) {
                               buf.clear();
                               kem::append_ciphertext_body(buf, ct);
                               w.write(buf, s);
                             });
  w.close();
  out << "sim: " << traces << ' ' << (prot ? "protected" : "unprotected") << " traces, " << n_samples
      << " samples each, sigma " << sigma << " -> " << path << '\n';
}

inline int cmd_attack_cpa(const std::string& in, leakage::Target target, size_t coefficients,
                          const std::string& key_path, const std::string& seed_text, const std::string& prefix,
                          std::ostream& out) {
  if (target != leakage::Target::Point1 && target != leakage::Target::Point2)
    throw UsageError("cpa targets point1 or point2");
  const auto ts = leakage::read_trace_file(in);
  if (ts.n_samples != leakage::samples_per_trace(ts.params, target, 1))
    throw ParamMismatch("trace length " + std::to_string(ts.n_samples) + " does not match the " +
                        std::string(ts.params.name) + " layout of the chosen target");
  sca::CpaOptions opt;
  opt.target = target == leakage::Target::Point1 ? sca::CpaTarget::Point1 : sca::CpaTarget::Point2;
  opt.coefficients = coefficients;
  opt.stop_on_failure = false;
  if (!key_path.empty() || !seed_text.empty()) {
    const uint64_t master = seed_text.empty() ? 0 : parse_hex(seed_text);
    opt.truth = sca::pwm_secrets(load_or_derive_key(ts.params, key_path, master));
  }
  const auto rep = sca::cpa_attack(ts, opt);
  {
    auto os = open_out(prefix + "_ranking.csv");
    report::write_cpa_ranking(os, rep, 10);
  }
  {
    auto os = open_out(prefix + "_curves.csv");
    report::write_cpa_curves(os, rep);
  }
  for (const auto& c : rep.coefficients) {
    out << "coefficient " << 4 * c.word << ": best " << c.recovered << " |rho| " << c.ranking.front().score;
    if (c.truth) out << ", truth " << *c.truth << " rank " << c.truth_rank.value_or(0);
    out << '\n';
  }
  if (opt.truth.empty()) {
    out << "cpa: " << rep.traces << " traces, no ground truth given\n";
    return 0;
  }
  out << "cpa: " << rep.traces << " traces, success " << (rep.success ? "true" : "false") << '\n';
  return rep.success ? 0 : kExitFailure;
}

inline sca::Welford welford_file(const std::string& path, leakage::TraceHeader& h) {
  leakage::TraceReader r(path);
  h = r.header();
  sca::Welford w(h.n_samples);
  std::vector<uint8_t> a;
  std::vector<float> s;
  while (r.next(a, s)) w.add(s);
  return w;
}

inline int cmd_attack_tvla(const std::string& fixed, const std::string& random, const std::string& csv,
                           std::ostream& out) {
  leakage::TraceHeader hf, hr;
  const auto wf = welford_file(fixed, hf);
  const auto wr = welford_file(random, hr);
  if (hf.param_id != hr.param_id)
    throw ParamMismatch("fixed and random trace files use different parameter sets");
  if (hf.n_samples != hr.n_samples) throw ParamMismatch("fixed and random trace files differ in trace length");
  const auto rep = sca::tvla(wf, wr);
  if (!csv.empty()) {
    auto os = open_out(csv);
    report::write_tvla(os, rep);
  }
  for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
  out << "tvla: " << rep.n_fixed << " fixed, " << rep.n_random << " random, max |t| " << rep.max_abs_t
      << " at sample " << rep.argmax << ", " << (rep.leakage_detected() ? "leakage detected" : "no leakage detected")
      << " (threshold " << rep.threshold << ")\n";
  return 0;
}

inline int cmd_report(const std::string& in, const std::string& svg, const std::string& title, std::ostream& out) {
  std::ifstream is(in);
  if (!is) throw FormatError("cannot open " + in);
  const auto t = report::read_table(is);
  auto os = open_out(svg);
  report::write_svg(os, t, title.empty() ? in : title);
  out << "report: " << t.rows.size() << " rows, " << t.columns.size() - 1 << " series -> " << svg << '\n';
  return 0;
}

inline int cmd_sched_dump(const kem::KemParams& p, bool prot, uint64_t master, std::ostream& os, std::ostream& out) {
  sched::Schedule s;
  if (prot) {
    auto seeds = sched::SeedStream::from_master(master);
    s = sched::build_protected(p, seeds);
  } else {
    s = sched::build_unprotected(p);
  }
  sched::write_csv(os, s);
  out << "sched: " << s.events.size() << " events, " << sched::cycle_count(s) << " cycles\n";
  return 0;
}

struct PilotArgs {
  std::vector<double> sigmas{24, 32, 40, 48, 56, 64};
  size_t fixed_cts = 12;
  size_t tvla_traces = 100000;
  size_t reps = 20;
  size_t need = 19;
  size_t start = 8000;
  size_t limit = 400000;
};

/// Calibration: noiseless protected TVLA profiles give the expected pass
/// rate at every sigma; the smallest sigma reaching the target is chosen
/// and the unprotected CPA budget is searched at it.
inline int cmd_pilot(const kem::KemParams& p, uint64_t master, const PilotArgs& a, unsigned threads,
                     std::ostream* csv, std::ostream& out) {
  std::vector<experiments::NoiselessProfile> profiles;
  for (size_t j = 0; j < a.fixed_cts; ++j) {
    profiles.push_back(experiments::noiseless_tvla_profile(p, derive_seed(master, experiments::kRepTag + j),
                                                           a.tvla_traces, true, threads));
    out << "pilot: noiseless protected profile " << j + 1 << '/' << a.fixed_cts << " done\n" << std::flush;
  }
  if (csv) *csv << "sigma,pass_probability,median_expected_t,worst_expected_t\n";
  double chosen = 0;
  for (double s : a.sigmas) {
    double pass = 0;
    std::vector<double> peaks;
    for (const auto& pr : profiles) {
      pass += pr.pass_probability(s, a.tvla_traces, a.tvla_traces) / double(profiles.size());
      peaks.push_back(pr.max_signal(s, a.tvla_traces, a.tvla_traces));
    }
    std::sort(peaks.begin(), peaks.end());
    const double median = peaks[peaks.size() / 2];
    char buf[128];
    std::snprintf(buf, sizeof buf, "sigma %5.1f  protected TVLA pass rate %.4f  expected peak |t| median %.2f worst %.2f",
                  s, pass, median, peaks.back());
    out << buf << '\n';
    if (csv) *csv << s << ',' << pass << ',' << median << ',' << peaks.back() << '\n';
    if (chosen == 0 && pass >= experiments::kPassTarget) chosen = s;
  }
  if (chosen == 0) {
    out << "pilot: no sigma on the grid reaches a protected TVLA pass rate of " << experiments::kPassTarget << '\n';
    return kExitFailure;
  }
  out << "pilot: sigma " << chosen << " (smallest with pass rate >= " << experiments::kPassTarget << ")\n";
  const size_t b = experiments::disclosure_budget(
      p, derive_seed(master, experiments::kAttackTag), chosen, a.reps, a.need, a.start, a.limit, threads,
      [&](size_t n, size_t ok) { out << "  budget " << n << ": " << ok << '/' << a.reps << " succeed\n" << std::flush; });
  if (b == 0) {
    out << "pilot: no budget up to " << a.limit << " reached " << a.need << '/' << a.reps << '\n';
    return kExitFailure;
  }
  out << "pilot: sigma " << chosen << ", budget B " << b << ", protected budget " << experiments::kProtectedFactor * b
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"skyber: shuffled Kyber decryption leakage toolkit"};
  app.require_subcommand(1);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "worker threads (output does not depend on it)")->check(CLI::Range(1u, 1024u));

  const std::map<std::string, std::string> param_names{
      {"kyber512", "kyber512"}, {"kyber768", "kyber768"}, {"kyber1024", "kyber1024"}};
  std::string param = "kyber768";
  SeedArg seed;
  auto add_param = [&](CLI::App* c) {
    c->add_option("--param", param, "parameter set")->check(CLI::IsMember(param_names));
  };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", seed.text, "master seed, hex u64"); };

  auto* kat = app.add_subcommand("kat", "encrypt/decrypt round trips");
  size_t count = 1;
  bool corrupt = false;
  add_param(kat);
  add_seed(kat);
  kat->add_option("--count", count)->check(CLI::PositiveNumber);
  kat->add_flag("--corrupt-key", corrupt, "decrypt with a wrong key (negative control)");

  auto* rpgc = app.add_subcommand("rpg", "random permutation generator");
  rpgc->require_subcommand(1);
  auto* gen = rpgc->add_subcommand("gen", "print permutations, 64 hex bytes per line");
  std::string out_path;
  gen->add_option("--seed", seed.text, "LFSR seed, nonzero hex u32")->required();
  gen->add_option("--count", count)->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path);
  auto* audit = rpgc->add_subcommand("audit", "structural invariants and bias histogram");
  size_t trials = 100000;
  add_seed(audit);
  audit->add_option("--trials", trials)->check(CLI::PositiveNumber);
  audit->add_option("--out", out_path, "histogram CSV");

  auto* keygen = app.add_subcommand("keygen", "write an SKKY key file");
  add_param(keygen);
  add_seed(keygen);
  keygen->add_option("--out", out_path)->required();

  auto* schedc = app.add_subcommand("sched", "decryption schedules");
  schedc->require_subcommand(1);
  auto* dump = schedc->add_subcommand("dump", "schedule CSV: cycle,op,line,word_addr,stage");
  bool prot = false;
  add_param(dump);
  add_seed(dump);
  dump->add_flag("--protected", prot);
  dump->add_option("--out", out_path)->required();

  auto* sim = app.add_subcommand("sim", "trace synthesis");
  sim->require_subcommand(1);
  auto* simt = sim->add_subcommand("traces", "write an SKTL trace file");
  size_t traces = 1000;
  double sigma = leakage::kDefaultNoiseSigma;
  std::string target = "point2", key_path;
  bool fixed = false, random = false;
  add_param(simt);
  add_seed(simt);
  simt->add_option("--traces", traces)->check(CLI::PositiveNumber);
  simt->add_option("--noise-sigma", sigma)->check(CLI::NonNegativeNumber);
  simt->add_flag("--protected", prot);
  simt->add_option("--target", target)->check(CLI::IsMember({"point1", "point2", "point3"}));
  simt->add_option("--key", key_path, "SKKY key file (default: derived from the master seed)");
  simt->add_option("--out", out_path)->required();
  auto* fx = simt->add_flag("--fixed", fixed, "TVLA fixed class: one honest ciphertext");
  simt->add_flag("--random", random, "TVLA random class: honest ciphertexts of random messages")->excludes(fx);

  auto* attack = app.add_subcommand("attack", "CPA and TVLA on trace files");
  attack->require_subcommand(1);
  auto* cpa = attack->add_subcommand("cpa", "extend-and-prune CPA on line 0");
  std::string in_path, prefix = "cpa";
  size_t coefficients = experiments::kCpaCoefficients;
  cpa->add_option("--in", in_path)->required();
  cpa->add_option("--target", target)->check(CLI::IsMember({"point1", "point2"}));
  cpa->add_option("--coefficients", coefficients)->check(CLI::Range(size_t{1}, size_t{64}));
  cpa->add_option("--key", key_path, "SKKY key file for ground truth");
  cpa->add_option("--seed", seed.text, "master seed of the sim run, for ground truth");
  cpa->add_option("--out-prefix", prefix, "writes <prefix>_ranking.csv and <prefix>_curves.csv");
  auto* tv = attack->add_subcommand("tvla", "fixed-vs-random Welch t-test");
  std::string fixed_path, random_path;
  tv->add_option("--fixed", fixed_path)->required();
  tv->add_option("--random", random_path)->required();
  tv->add_option("--out", out_path, "CSV sample,t");

  auto* rep = app.add_subcommand("report", "render a CSV as an SVG line plot");
  std::string title;
  rep->add_option("--in", in_path)->required();
  rep->add_option("--out", out_path)->required();
  rep->add_option("--title", title);

  auto* pilot = app.add_subcommand("pilot", "calibrate the noise level and the CPA budget");
  PilotArgs pa;
  add_param(pilot);
  add_seed(pilot);
  pilot->add_option("--sigmas", pa.sigmas)->delimiter(',');
  pilot->add_option("--fixed-cts", pa.fixed_cts)->check(CLI::PositiveNumber);
  pilot->add_option("--tvla-traces", pa.tvla_traces)->check(CLI::Range(size_t{2}, size_t{100000000}));
  pilot->add_option("--reps", pa.reps)->check(CLI::PositiveNumber);
  pilot->add_option("--need", pa.need)->check(CLI::PositiveNumber);
  pilot->add_option("--start", pa.start)->check(CLI::PositiveNumber);
  pilot->add_option("--limit", pa.limit)->check(CLI::PositiveNumber);
  pilot->add_option("--out", out_path, "CSV sigma,pass_probability,median_expected_t,worst_expected_t");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto& params = kem::params_by_name(param);
    if (*kat) return cmd_kat(params, count, seed.value(out), corrupt, out);
    if (*gen) {
      const uint64_t s = parse_hex(seed.text);
      if (out_path.empty()) return cmd_rpg_gen(s, count, out);
      auto os = open_out(out_path);
      return cmd_rpg_gen(s, count, os);
    }
    if (*audit) {
      const uint64_t s = seed.value(out);
      if (out_path.empty()) return cmd_rpg_audit(trials, s, nullptr, out, err);
      auto os = open_out(out_path);
      return cmd_rpg_audit(trials, s, &os, out, err);
    }
    if (*keygen) {
      write_bytes(out_path, kem::serialize(experiments::experiment_key(params, seed.value(out))));
      out << "keygen: " << params.name << " -> " << out_path << '\n';
      return 0;
    }
    if (*dump) {
      const uint64_t s = seed.value(out);
      auto os = open_out(out_path);
      return cmd_sched_dump(params, prot, s, os, out);
    }
    if (*simt) {
      const TraceClass cls = fixed ? TraceClass::Fixed : random ? TraceClass::Random : TraceClass::Attack;
      cmd_sim(params, seed.value(out), traces, sigma, prot, kTargets.at(target), cls, key_path, out_path, threads,
              out);
      return 0;
    }
    if (*cpa) return cmd_attack_cpa(in_path, kTargets.at(target), coefficients, key_path, seed.text, prefix, out);
    if (*tv) return cmd_attack_tvla(fixed_path, random_path, out_path, out);
    if (*rep) return cmd_report(in_path, out_path, title, out);
    if (*pilot) {
      const uint64_t s = seed.value(out);
      if (out_path.empty()) return cmd_pilot(params, s, pa, threads, nullptr, out);
      auto os = open_out(out_path);
      return cmd_pilot(params, s, pa, threads, &os, out);
    }
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const ParamMismatch& e) {
    err << "parameter mismatch: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace skyber::cli
