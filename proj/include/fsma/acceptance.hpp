#pragma once

// End-to-end acceptance checks. Expected values (walk targets, reference
// constants) come from a committed golden file; pass tolerances are fixed
// here. Each check returns one result with detail lines for the report.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "fsma/analogy.hpp"
#include "fsma/analysis.hpp"
#include "fsma/capacity.hpp"
#include "fsma/crossbar.hpp"
#include "fsma/dfa.hpp"
#include "fsma/experiment.hpp"
#include "fsma/io.hpp"
#include "fsma/regex.hpp"
#include "fsma/rnn.hpp"
#include "fsma/snn.hpp"
#include "fsma/vsa.hpp"
#include "fsma/weights.hpp"
#include "json.hpp"

namespace fsma::acceptance {

using nlohmann::json;
namespace fs = std::filesystem;

namespace tol {
inline constexpr double kCapacityR2 = 0.9;
inline constexpr double kRatioLo = 2.0, kRatioHi = 8.0;
inline constexpr double kSignalRel = 0.01;
inline constexpr double kStdRel = 0.20;
inline constexpr double kCollisionFactor = 2.0;
inline constexpr std::size_t kCrossbarMinOk = 18;
inline constexpr std::size_t kAnalogyMinOk = 99;
inline constexpr double kResidualAbs = 0.1;
inline constexpr double kOverlapAbs = 0.1;
inline constexpr double kBmapFractionAbs = 0.02;
inline constexpr double kHadamardSimAbs = 0.02;
inline constexpr double kMaskPopRel = 0.05;
}  // namespace tol

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
  json metrics = json::object();
  double seconds = 0.0;
};

inline CriterionResult begin(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

struct Options {
  std::uint64_t seed = 1;
  json golden;
  std::function<void(const std::string&)> progress;
};

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

/// Golden entry for criterion `id`; throws when absent.
inline const json& golden_entry(const Options& o, int id) {
  const auto key = std::to_string(id);
  if (!o.golden.contains("criteria") || !o.golden["criteria"].contains(key)) {
    throw ConfigError("golden file has no entry for criterion " + key);
  }
  return o.golden["criteria"][key];
}

// ---------------------------------------------------------------------------
// Spiking walks (1-3)

inline constexpr std::size_t kModdiv = 23;
inline constexpr std::size_t kSnnN = 2048, kSnnL = 8;

inline experiment::TransformSpec noisy_one_bit() {
  experiment::TransformSpec t;
  t.binarize = 2.0;
  t.noise = 0.5;
  return t;
}

inline experiment::TransformSpec one_bit_only() {
  experiment::TransformSpec t;
  t.binarize = 2.0;
  return t;
}

inline snn::SimParams snn_params(std::size_t n = kSnnN, std::size_t l = kSnnL) {
  snn::SimParams p;
  p.n = n;
  p.l = l;
  return p;
}

struct WalkTally {
  std::size_t ok = 0, total = 0;
  std::vector<std::string> failures;
};

inline WalkTally run_walks(const Dfa& d, const experiment::Network& net, const std::vector<std::vector<std::size_t>>& words,
                           const std::vector<std::vector<snn::TimedSegment>>& schedules,
                           const std::vector<std::size_t>& expected) {
  WalkTally t;
  snn::InMemorySynapses syn(net.w);
  const auto p = snn_params(net.cb.shape.n, net.cb.shape.l);
  for (std::size_t k = 0; k < words.size(); ++k) {
    const auto w = experiment::run_snn_walk(p, syn, net.cb, d, words[k], schedules[k]);
    const bool ok = w.decoded.final_state == expected[k];
    t.ok += ok ? 1 : 0;
    ++t.total;
    if (!ok) {
      t.failures.push_back(d.format_word(words[k]) + " -> " +
                           (w.decoded.final_state == Dfa::npos ? std::string("none")
                                                               : d.state_name(w.decoded.final_state)) +
                           " (want " + d.state_name(expected[k]) + ")");
    }
  }
  return t;
}

inline CriterionResult criterion_1(const Options& o) {
  auto r = begin(1, "golden walks, spiking, noisy 1-bit weights");
  const auto& g = golden_entry(o, 1);
  const Dfa d = gen_moddiv_dfa(g.at("moddiv").get<std::size_t>());
  std::vector<std::vector<std::size_t>> words;
  std::vector<std::size_t> expected;
  for (const auto& w : g.at("walks")) {
    words.push_back(d.parse_word(w.at("word").get<std::string>()));
    expected.push_back(d.state_index(w.at("final").get<std::string>()));
  }
  std::vector<std::vector<snn::TimedSegment>> sch;
  for (const auto& w : words) sch.push_back(snn::regular_schedule(w));
  const auto seeds = g.at("seeds").get<std::vector<std::uint64_t>>();
  experiment::NetworkSpec ns{kSnnN, kSnnL};
  std::size_t ok = 0, total = 0;
  for (auto s : seeds) {
    const auto seed = s + o.seed - 1;
    const auto net = experiment::build_network(d, ns, noisy_one_bit(), SeedTree(seed));
    const auto t = run_walks(d, net, words, sch, expected);
    ok += t.ok;
    total += t.total;
    r.details.push_back("seed " + std::to_string(seed) + ": " + std::to_string(t.ok) + "/" + std::to_string(t.total));
    for (const auto& f : t.failures) r.details.push_back("  " + f);
  }
  // Same walks with binarization alone, for reference.
  const auto net_b = experiment::build_network(d, ns, one_bit_only(), SeedTree(o.seed));
  const auto tb = run_walks(d, net_b, words, sch, expected);
  r.details.push_back("info: 1-bit weights without added noise, seed " + std::to_string(o.seed) + ": " +
                      std::to_string(tb.ok) + "/" + std::to_string(tb.total));
  r.metrics = {{"ok", ok}, {"total", total}, {"one_bit_ok", tb.ok}};
  r.pass = total > 0 && ok == total;
  return r;
}

inline std::vector<std::vector<std::size_t>> walk_words(const Dfa& d, std::size_t count, std::size_t max_len,
                                                        const SeedTree& seeds) {
  auto rng = seeds.stream("words");
  return experiment::random_words(d, {count, 1, max_len}, rng);
}

inline CriterionResult criterion_2(const Options& o) {
  auto r = begin(2, "walk generality, random words");
  const auto& g = golden_entry(o, 2);
  const Dfa d = gen_moddiv_dfa(kModdiv);
  const SeedTree seeds = SeedTree(o.seed).child("generality");
  const auto words = walk_words(d, g.at("words").get<std::size_t>(), g.at("max_length").get<std::size_t>(), seeds);
  std::vector<std::vector<snn::TimedSegment>> sch;
  std::vector<std::size_t> expected;
  for (const auto& w : words) {
    sch.push_back(snn::regular_schedule(w));
    expected.push_back(d.walk(w));
  }
  experiment::NetworkSpec ns{kSnnN, kSnnL};
  const auto net = experiment::build_network(d, ns, noisy_one_bit(), SeedTree(o.seed));
  const auto t = run_walks(d, net, words, sch, expected);
  r.details.push_back("noisy 1-bit weights: " + std::to_string(t.ok) + "/" + std::to_string(t.total));
  for (const auto& f : t.failures) r.details.push_back("  " + f);

  // One golden walk pair under the 8-bit fixed-point transform.
  const auto& g1 = golden_entry(o, 1);
  experiment::TransformSpec fx;
  fx.fixed_point = true;
  const auto net_fx = experiment::build_network(d, ns, fx, SeedTree(o.seed));
  std::vector<std::vector<std::size_t>> gw;
  std::vector<std::vector<snn::TimedSegment>> gs;
  std::vector<std::size_t> ge;
  for (const auto& w : g1.at("walks")) {
    gw.push_back(d.parse_word(w.at("word").get<std::string>()));
    gs.push_back(snn::regular_schedule(gw.back()));
    ge.push_back(d.state_index(w.at("final").get<std::string>()));
  }
  const auto tf = run_walks(d, net_fx, gw, gs, ge);
  r.details.push_back("fixed-point golden walks: " + std::to_string(tf.ok) + "/" + std::to_string(tf.total));
  for (const auto& f : tf.failures) r.details.push_back("  " + f);

  const auto net_b = experiment::build_network(d, ns, one_bit_only(), SeedTree(o.seed));
  const auto tb = run_walks(d, net_b, words, sch, expected);
  r.details.push_back("info: 1-bit weights without added noise: " + std::to_string(tb.ok) + "/" +
                      std::to_string(tb.total));
  r.metrics = {{"ok", t.ok}, {"total", t.total}, {"fixed_point_ok", tf.ok}, {"one_bit_ok", tb.ok}};
  r.pass = t.ok == t.total && tf.ok == tf.total;
  return r;
}

inline CriterionResult criterion_3(const Options& o) {
  auto r = begin(3, "timing robustness, irregular segment durations");
  const auto& g = golden_entry(o, 3);
  const Dfa d = gen_moddiv_dfa(kModdiv);
  const SeedTree seeds = SeedTree(o.seed).child("timing");
  const auto words = walk_words(d, g.at("words").get<std::size_t>(), g.at("max_length").get<std::size_t>(), seeds);
  const double lo = g.at("lo_ms").get<double>(), hi = g.at("hi_ms").get<double>();
  auto rng = seeds.stream("schedule");
  std::vector<std::vector<snn::TimedSegment>> sch;
  std::vector<std::size_t> expected;
  for (const auto& w : words) {
    sch.push_back(snn::irregular_schedule(w, lo, hi, rng));
    expected.push_back(d.walk(w));
  }
  experiment::NetworkSpec ns{kSnnN, kSnnL};
  const auto net = experiment::build_network(d, ns, noisy_one_bit(), SeedTree(o.seed));
  const auto t = run_walks(d, net, words, sch, expected);
  r.details.push_back("noisy 1-bit weights: " + std::to_string(t.ok) + "/" + std::to_string(t.total));
  for (const auto& f : t.failures) r.details.push_back("  " + f);
  const auto net_b = experiment::build_network(d, ns, one_bit_only(), SeedTree(o.seed));
  const auto tb = run_walks(d, net_b, words, sch, expected);
  r.details.push_back("info: 1-bit weights without added noise: " + std::to_string(tb.ok) + "/" +
                      std::to_string(tb.total));
  r.metrics = {{"ok", t.ok}, {"total", t.total}, {"one_bit_ok", tb.ok}};
  r.pass = t.ok == t.total;
  return r;
}

// ---------------------------------------------------------------------------
// 4: capacity

inline CriterionResult criterion_4(const Options& o) {
  auto r = begin(4, "capacity scaling");
  const auto& g = golden_entry(o, 4);
  capacity::SweepParams sp;
  sp.n_list = g.at("n_list").get<std::vector<std::size_t>>();
  sp.seed = o.seed;
  const auto res = capacity::capacity_sweep(sp);
  std::vector<double> x, yi, yb;
  for (const auto& s : res.summary) {
    x.push_back(capacity::scaling_regressor(s.n));
    yi.push_back(static_cast<double>(s.p_max_ideal));
    yb.push_back(static_cast<double>(s.p_max_binary));
    r.details.push_back("N=" + std::to_string(s.n) + " L=" + std::to_string(s.l) + ": P_max ideal " +
                        std::to_string(s.p_max_ideal) + ", binary " + std::to_string(s.p_max_binary));
  }
  const auto fi = capacity::fit_linear(x, yi);
  const auto fb = capacity::fit_linear(x, yb);
  const auto& last = res.summary.back();
  const double ratio = last.ratio();
  const double ref = g.at("ratio_reference").get<double>();
  r.details.push_back("R^2 ideal " + fmt(fi.r2) + " (need >= " + fmt(tol::kCapacityR2) + "), binary " + fmt(fb.r2) +
                      " (info)");
  r.details.push_back("ideal/binary ratio at N=" + std::to_string(last.n) + ": " + fmt(ratio) + " (reference " +
                      fmt(ref) + ", accepted [" + fmt(tol::kRatioLo) + ", " + fmt(tol::kRatioHi) + "])");
  r.metrics = {{"r2_ideal", fi.r2}, {"r2_binary", fb.r2}, {"ratio", ratio}};
  r.pass = fi.r2 >= tol::kCapacityR2 && ratio >= tol::kRatioLo && ratio <= tol::kRatioHi &&
           ref >= tol::kRatioLo && ref <= tol::kRatioHi;
  return r;
}

// ---------------------------------------------------------------------------
// 5: h statistics

inline CriterionResult criterion_5(const Options& o) {
  auto r = begin(5, "h signal and noise predictor");
  const auto& g = golden_entry(o, 5);
  const Dfa d = gen_moddiv_dfa(g.at("moddiv").get<std::size_t>());
  const auto n = g.at("n").get<std::size_t>(), l = g.at("l").get<std::size_t>();
  const auto mc = measure_h_stats(d, n, l, g.at("draws").get<std::size_t>(), SeedTree(o.seed).child("snr"));
  auto rng = SeedTree(o.seed).stream("codebook");
  const auto cb = make_codebook(d, n, l, CodebookMode::random, rng);
  const auto pu = predict_h_stats(d, cb, HCondition::at_state);
  const auto pm = predict_h_stats(d, cb, HCondition::at_state_masked);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double su = rel(mc.gap_unmasked, pu.signal), sm = rel(mc.gap_masked, pm.signal);
  const double du = rel(mc.std_unmasked, pu.std), dm = rel(mc.std_masked, pm.std);
  r.details.push_back("unmasked: signal " + fmt(mc.gap_unmasked) + " vs M(1-f) = " + fmt(pu.signal) + " (" +
                      fmt(100 * su, 3) + "%), std " + fmt(mc.std_unmasked) + " vs " + fmt(pu.std) + " (" +
                      fmt(100 * du, 3) + "%)");
  r.details.push_back("masked: signal " + fmt(mc.gap_masked) + " vs M(1-f)/2 = " + fmt(pm.signal) + " (" +
                      fmt(100 * sm, 3) + "%), std " + fmt(mc.std_masked) + " vs " + fmt(pm.std) + " (" +
                      fmt(100 * dm, 3) + "%)");
  r.details.push_back("info: std before the sparse approximation: unmasked " + fmt(pu.std_exact) + ", masked " +
                      fmt(pm.std_exact));
  r.metrics = {{"signal_rel_unmasked", su}, {"signal_rel_masked", sm}, {"std_rel_unmasked", du}, {"std_rel_masked", dm}};
  r.pass = su <= tol::kSignalRel && sm <= tol::kSignalRel && du <= tol::kStdRel && dm <= tol::kStdRel;
  return r;
}

// ---------------------------------------------------------------------------
// 6: energy

inline CriterionResult criterion_6(const Options& o) {
  auto r = begin(6, "energy descent");
  const auto& g = golden_entry(o, 6);
  const auto s = energy_descent_check(g.at("n").get<std::size_t>(), g.at("l").get<std::size_t>(),
                                      g.at("patterns").get<std::size_t>(), g.at("starts").get<std::size_t>(), 1000,
                                      SeedTree(o.seed).child("energy"));
  r.details.push_back(std::to_string(s.starts) + " starts, " + std::to_string(s.updates) + " block updates, " +
                      std::to_string(s.violations) + " increases, " + std::to_string(s.converged) + " converged");
  r.metrics = {{"violations", s.violations}, {"updates", s.updates}, {"converged", s.converged}};
  r.pass = s.violations == 0 && s.updates > 0;
  return r;
}

// ---------------------------------------------------------------------------
// 7: collision bounds

inline CriterionResult criterion_7(const Options& o) {
  auto r = begin(7, "Hoeffding bound and collision capacity");
  const auto& g = golden_entry(o, 7);
  const auto n = g.at("n").get<std::size_t>(), l = g.at("l").get<std::size_t>();
  const double theta = g.at("theta").get<double>();
  const auto pairs = g.at("pairs").get<std::size_t>();
  const double f = 1.0 / static_cast<double>(l);
  auto rng = SeedTree(o.seed).stream("hoeffding");
  std::size_t exceed = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto a = vsa::gen_sbc(n, l, rng);
    const auto b = vsa::gen_sbc(n, l, rng);
    if (vsa::similarity(a, b) - f >= theta) ++exceed;
  }
  const double rate = static_cast<double>(exceed) / static_cast<double>(pairs);
  const double bound = vsa::hoeffding_bound(n, l, theta);
  const auto cc = vsa::collision_capacity(n, l, (1.0 - f) / 2.0, g.at("delta").get<double>());
  const double k_ref = g.at("k_reference").get<double>();
  const double factor = std::max(cc.k / k_ref, k_ref / cc.k);
  r.details.push_back("exceedance rate " + fmt(rate) + " over " + std::to_string(pairs) + " pairs, bound " + fmt(bound));
  r.details.push_back("collision capacity K = " + fmt(cc.k) + " (log10 " + fmt(cc.log10_k) + "), reference " +
                      fmt(k_ref) + ", off by a factor " + fmt(factor) + " (allowed " + fmt(tol::kCollisionFactor) + ")");
  r.metrics = {{"rate", rate}, {"bound", bound}, {"k", cc.k}, {"factor", factor}};
  r.pass = rate <= bound && factor <= tol::kCollisionFactor;
  return r;
}

// ---------------------------------------------------------------------------
// 8: crossbar

inline xbar::CrossbarConfig crossbar_with_faults(const json& g) {
  xbar::CrossbarConfig c;
  for (const auto& f : g.at("faults")) {
    const auto row = f.at("row").get<std::size_t>();
    const auto kind = xbar::fault_from_string(f.at("kind").get<std::string>());
    const auto c0 = f.at("col_from").get<std::size_t>(), c1 = f.at("col_to").get<std::size_t>();
    for (std::size_t col = c0; col <= c1; ++col) c.faults.push_back({row, col, kind});
  }
  c.validate();
  return c;
}

struct CrossbarSetup {
  Dfa dfa;
  std::vector<std::size_t> word;
  experiment::Network net;
};

inline CrossbarSetup crossbar_setup(const fs::path& dfa_file, const std::string& word, const SeedTree& seeds) {
  experiment::DfaSpec ds;
  ds.file = dfa_file.string();
  CrossbarSetup s{experiment::load_dfa(ds), {}, {}};
  s.word = s.dfa.parse_word(word);
  experiment::NetworkSpec ns{xbar::kLogical, 8, CodebookMode::orthogonal, true};
  experiment::TransformSpec ts;
  ts.ternary_auto = true;
  s.net = experiment::build_network(s.dfa, ns, ts, seeds);
  return s;
}

inline snn::SimParams crossbar_params() {
  auto p = snn_params(xbar::kLogical, 8);
  p.mean_charge = 4.0;
  return p;
}

inline CriterionResult criterion_8(const Options& o) {
  auto r = begin(8, "crossbar closed loop");
  const auto& g = golden_entry(o, 8);
  const auto runs = g.at("runs").get<std::size_t>();
  const auto faulty = crossbar_with_faults(g);
  const auto p = crossbar_params();
  bool pass = true;
  json per = json::object();
  for (const auto& job : g.at("walks")) {
    const auto file = job.at("dfa").get<std::string>();
    const auto word = job.at("word").get<std::string>();
    std::size_t ok = 0;
    for (std::size_t run = 0; run < runs; ++run) {
      const auto seeds = SeedTree(o.seed).child("crossbar").child(file).child(run);
      const auto s = crossbar_setup(file, word, seeds);
      xbar::Crossbar xb(faulty);
      auto prog = seeds.stream("program");
      xb.program(s.net.w, prog);
      auto read = seeds.stream("read");
      xbar::CrossbarSynapses syn(xb, s.net.w, read);
      const auto w = experiment::run_snn_walk(p, syn, s.net.cb, s.dfa, s.word, snn::regular_schedule(s.word));
      ok += w.path_ok() ? 1 : 0;
    }
    r.details.push_back(file + " \"" + word + "\": " + std::to_string(ok) + "/" + std::to_string(runs) +
                        " full walks correct (need " + std::to_string(tol::kCrossbarMinOk) + ")");
    per[file] = ok;
    pass = pass && ok >= tol::kCrossbarMinOk;

    // Zero noise, no faults: identical spike trace to the in-memory synapses.
    const auto seeds = SeedTree(o.seed).child("crossbar-exact").child(file);
    const auto s = crossbar_setup(file, word, seeds);
    xbar::Crossbar xb(xbar::CrossbarConfig::zero_noise());
    auto prog = seeds.stream("program");
    xb.program(s.net.w, prog);
    auto read = seeds.stream("read");
    xbar::CrossbarSynapses xsyn(xb, s.net.w, read);
    snn::InMemorySynapses msyn(s.net.w);
    const auto sch = snn::regular_schedule(s.word);
    const auto a = snn::run_snn(p, xsyn, s.net.cb, s.dfa, sch);
    const auto b = snn::run_snn(p, msyn, s.net.cb, s.dfa, sch);
    const bool same = a.events == b.events && !a.events.empty();
    r.details.push_back(file + " zero-noise trace equivalence: " + (same ? std::string("identical") : "differs") + " (" +
                        std::to_string(a.events.size()) + " vs " + std::to_string(b.events.size()) + " spikes)");
    pass = pass && same;
  }
  r.metrics = {{"ok", per}, {"runs", runs}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------------------
// 9: VSA algebra

inline CriterionResult criterion_9(const Options& o) {
  auto r = begin(9, "VSA algebra and analogy");
  const auto& g = golden_entry(o, 9);
  bool pass = true;
  auto check = [&](bool ok, const std::string& what) {
    r.details.push_back((ok ? "ok    " : "FAIL  ") + what);
    pass = pass && ok;
  };
  auto rng = SeedTree(o.seed).stream("vsa");
  const std::size_t n = 1024, l = 8;

  std::size_t bad = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = vsa::gen_psbc(n, l, rng);
    const auto m = vsa::gen_bmap(n, l, rng);
    bad += vsa::hadamard_bind(vsa::hadamard_bind(a, m), m) == a ? 0 : 1;
  }
  check(bad == 0, "Hadamard binding is an involution (100 instances)");

  bad = 0;
  const auto id = vsa::PsbcHypervector(vsa::SbcHypervector::identity(vsa::make_shape(n, l)));
  for (int k = 0; k < 100; ++k) {
    const auto a = vsa::gen_psbc(n, l, rng), b = vsa::gen_psbc(n, l, rng), c = vsa::gen_psbc(n, l, rng);
    bad += vsa::lcc_bind(a, id) == a ? 0 : 1;
    bad += vsa::lcc_unbind(vsa::lcc_bind(a, b), b) == a ? 0 : 1;
    bad += vsa::lcc_bind(a, b) == vsa::lcc_bind(b, a) ? 0 : 1;
    bad += vsa::lcc_bind(vsa::lcc_bind(a, b), c) == vsa::lcc_bind(a, vsa::lcc_bind(b, c)) ? 0 : 1;
  }
  check(bad == 0, "LCC identity, round trip, commutativity, associativity (100 triples)");

  bad = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x1 = vsa::gen_sbc(n, l, rng), x2 = vsa::gen_sbc(n, l, rng);
    const auto m1 = vsa::gen_bmap(n, l, rng), m2 = vsa::gen_bmap(n, l, rng);
    const auto lhs = vsa::lcc_bind(vsa::hadamard_bind(x1, m1), vsa::hadamard_bind(x2, m2));
    const auto rhs = vsa::hadamard_bind(vsa::PsbcHypervector(vsa::lcc_bind(x1, x2)), vsa::hadamard_bind(m1, m2));
    bad += lhs == rhs ? 0 : 1;
  }
  check(bad == 0, "Hadamard binding commutes with LCC binding (100 instances)");

  {
    const std::size_t pairs = 10000;
    const double f = 1.0 / static_cast<double>(l);
    const double m = static_cast<double>(n / l);
    double sum = 0;
    for (std::size_t k = 0; k < pairs; ++k) sum += vsa::similarity(vsa::gen_sbc(n, l, rng), vsa::gen_sbc(n, l, rng));
    const double mean = sum / static_cast<double>(pairs);
    const double band = 3.0 * std::sqrt(f * (1 - f) / (m * static_cast<double>(pairs)));
    check(std::abs(mean - f) < band, "mean SBC similarity " + fmt(mean, 5) + " vs f = " + fmt(f) + " (band " +
                                         fmt(band, 3) + ")");

    double pos = 0, hsim = 0, pop = 0, bound_dot = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto q = vsa::gen_sbc(n, l, rng);
      const auto s = vsa::gen_bmap(n, l, rng);
      pos += static_cast<double>(s.positive_blocks()) / m;
      const auto qs = vsa::hadamard_bind(q, s);
      hsim += vsa::similarity(qs, q);
      const auto masked = vsa::mask(q, s);
      pop += static_cast<double>(masked.popcount());
      bound_dot += vsa::dot(qs, masked);
    }
    const double kk = static_cast<double>(pairs);
    check(std::abs(pos / kk - 0.5) <= tol::kBmapFractionAbs, "bMAP positive-block fraction " + fmt(pos / kk));
    check(std::abs(hsim / kk) <= tol::kHadamardSimAbs, "similarity(q o s, q) mean " + fmt(hsim / kk, 3));
    check(std::abs(pop / kk - m / 2) <= tol::kMaskPopRel * m / 2,
          "popcount(q AND s) mean " + fmt(pop / kk) + " vs M/2 = " + fmt(m / 2));
    check(std::abs(bound_dot / kk - m / 2) <= tol::kMaskPopRel * m / 2,
          "(q o s).(q AND s) mean " + fmt(bound_dot / kk) + " vs M/2 = " + fmt(m / 2));
  }

  const auto an = g.at("analogy");
  const auto an_n = an.at("n").get<std::size_t>(), an_l = an.at("l").get<std::size_t>();
  const auto trials = an.at("trials").get<std::size_t>();
  const auto seeds = SeedTree(o.seed).child("analogy");
  const auto c1 = analogy::run_analogy(analogy::Encoding::psbc_all, an_n, an_l, trials, seeds);
  check(c1.currency_ok >= tol::kAnalogyMinOk && c1.analogy_ok >= tol::kAnalogyMinOk,
        "case 1 (pSBC): currency " + std::to_string(c1.currency_ok) + "/" + std::to_string(trials) + ", analogy " +
            std::to_string(c1.analogy_ok) + "/" + std::to_string(trials));
  const auto c2 = analogy::run_analogy(analogy::Encoding::sbc_roles, an_n, an_l, trials, seeds);
  const double resid = c2.mean_currency[analogy::kWdc];
  const double resid_ref = an.at("case2_residual").get<double>();
  check(c2.currency_ok >= tol::kAnalogyMinOk && std::abs(resid - resid_ref) <= tol::kResidualAbs,
        "case 2 (SBC roles): currency " + std::to_string(c2.currency_ok) + "/" + std::to_string(trials) +
            ", wdc residual " + fmt(resid) + " vs " + fmt(resid_ref));
  const auto c3 = analogy::run_analogy(analogy::Encoding::bmap_roles, an_n, an_l, trials, seeds);
  const double ov = c3.mean_analogy[analogy::kPes];
  const double ov_ref = an.at("case3_overlap").get<double>();
  check(c3.analogy_ok >= tol::kAnalogyMinOk && std::abs(ov - ov_ref) <= tol::kOverlapAbs,
        "case 3 (bMAP roles): analogy " + std::to_string(c3.analogy_ok) + "/" + std::to_string(trials) +
            ", pes overlap " + fmt(ov) + " vs " + fmt(ov_ref));
  r.metrics = {{"case1", c1.currency_ok}, {"case2", c2.currency_ok}, {"case3", c3.analogy_ok},
               {"case2_residual", resid}, {"case3_overlap", ov}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------------------
// 10: regex frontend

inline CriterionResult criterion_10(const Options& o) {
  auto r = begin(10, "regex frontend");
  const auto& g = golden_entry(o, 10);
  const auto count = g.at("patterns").get<std::size_t>();
  const auto max_len = g.at("max_length").get<std::size_t>();
  const auto e2e = g.at("end_to_end").get<std::size_t>();
  const auto max_states = g.at("max_states").get<std::size_t>();
  const auto walks = g.at("walks").get<std::size_t>();
  const std::string alphabet = "01";
  auto rng = SeedTree(o.seed).stream("regex");
  std::set<std::string> seen;
  std::vector<std::string> patterns;
  for (std::size_t tries = 0; patterns.size() < count && tries < 1000; ++tries) {
    auto p = regex::random_regex(rng, alphabet);
    if (p.size() > 1 && seen.insert(p).second) patterns.push_back(p);
  }
  bool pass = patterns.size() == count;
  std::size_t e2e_done = 0;
  rnn::WalkSchedule sch;
  experiment::NetworkSpec ns{kSnnN, kSnnL};
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    auto rc = experiment::check_regex(patterns[k], alphabet, max_len);
    std::string line = patterns[k] + ": " + std::to_string(rc.states) + " states, " + std::to_string(rc.mismatches) +
                       "/" + std::to_string(rc.strings) + " mismatches";
    pass = pass && rc.mismatches == 0;
    if (e2e_done < e2e && rc.states <= max_states) {
      experiment::regex_walks(rc, alphabet, ns, sch, walks, SeedTree(o.seed).child("regex-walks").child(k));
      line += ", RNN walks " + std::to_string(rc.walks_ok) + "/" + std::to_string(rc.walks);
      pass = pass && rc.walks_ok == rc.walks;
      ++e2e_done;
    }
    r.details.push_back(line);
  }
  if (e2e_done < e2e) {
    r.details.push_back("only " + std::to_string(e2e_done) + " patterns small enough for end-to-end walks");
    pass = false;
  }
  r.metrics = {{"patterns", patterns.size()}, {"end_to_end", e2e_done}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------------------

using CriterionFn = CriterionResult (*)(const Options&);

inline const std::vector<std::pair<int, CriterionFn>>& all_criteria() {
  static const std::vector<std::pair<int, CriterionFn>> v{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10}};
  return v;
}

/// Runs the selected criteria (all when empty). A criterion that throws is
/// reported as failed with the error message.
inline std::vector<CriterionResult> run_all(const Options& o, const std::set<int>& only = {}) {
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : all_criteria()) {
    if (!only.empty() && !only.count(id)) continue;
    if (o.progress) o.progress("criterion " + std::to_string(id) + " ...");
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(o);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.details.push_back(std::string("error: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_report(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << "  [" << fmt(r.seconds, 3)
       << " s]\n";
    for (const auto& d : r.details) os << "        " << d << '\n';
  }
  return os.str();
}

inline json results_json(const std::vector<CriterionResult>& results) {
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"details", r.details}, {"metrics", r.metrics},
                   {"seconds", r.seconds}});
  }
  return arr;
}

}  // namespace fsma::acceptance
