#pragma once

// Experiment configurations and runners. One run reads a validated config,
// derives every random stream from its seed and writes CSV / JSON / SVG files
// plus a manifest into the output directory.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "fsma/analogy.hpp"
#include "fsma/analysis.hpp"
#include "fsma/capacity.hpp"
#include "fsma/config_schema.hpp"
#include "fsma/crossbar.hpp"
#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/io.hpp"
#include "fsma/regex.hpp"
#include "fsma/rng.hpp"
#include "fsma/rnn.hpp"
#include "fsma/snn.hpp"
#include "fsma/vsa.hpp"
#include "fsma/weights.hpp"
#include "json.hpp"

namespace fsma::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Building blocks shared by the runners

struct DfaSpec {
  std::optional<std::size_t> moddiv;
  std::optional<std::string> file;
  std::optional<std::string> regex;
  std::string alphabet;
};

/// Relative DFA files are looked up in the working directory, then next to
/// the config, then in the source tree.
inline Dfa load_dfa(const DfaSpec& s, const fs::path& config_dir = {}) {
  if (s.moddiv) return gen_moddiv_dfa(*s.moddiv);
  if (s.regex) return regex::regex_to_dfa(*s.regex, s.alphabet);
  if (!s.file) throw ConfigError("dfa: one of moddiv, file or regex is required");
  fs::path p(*s.file);
  std::vector<fs::path> tries{p};
  if (p.is_relative()) {
    if (!config_dir.empty()) tries.push_back(config_dir / p);
#ifdef FSMA_SOURCE_DIR
    tries.push_back(fs::path(FSMA_SOURCE_DIR) / p);
#endif
  }
  for (const auto& t : tries) {
    if (fs::exists(t)) return io::load_dfa(t);
  }
  throw IoError("dfa file not found: " + *s.file);
}

struct NetworkSpec {
  std::size_t n = 2048;
  std::size_t l = 8;
  CodebookMode codebook = CodebookMode::random;
  bool bridge_incoming_only = false;
};

/// Weight transforms, applied in the order binarize, noise, ternary, fixed point.
struct TransformSpec {
  std::optional<double> binarize;
  std::optional<double> noise;
  std::optional<std::pair<double, double>> ternary;
  bool ternary_auto = false;
  double ternary_k = 0.5;
  bool fixed_point = false;

  bool ternary_requested() const { return ternary_auto || ternary.has_value(); }
};

inline WeightMatrix apply_transforms(WeightMatrix w, const TransformSpec& t, Rng& rng) {
  if (t.binarize) w = binarize_stochastic(w, *t.binarize, rng);
  if (t.noise && *t.noise > 0) w = add_weight_noise(w, *t.noise, rng);
  if (t.ternary_requested()) {
    auto th = t.ternary ? TernaryThresholds{t.ternary->first, t.ternary->second}
                        : default_ternary_thresholds(w, t.ternary_k);
    w = quantize_ternary(w, th.lo, th.hi);
  }
  if (t.fixed_point) w = quantize_fixed_point(w);
  require_finite(w);
  return w;
}

struct Network {
  EmbeddingCodebook cb;
  WeightMatrix w;
};

/// Codebook from stream "codebook", transform draws from stream "weights".
inline Network build_network(const Dfa& d, const NetworkSpec& ns, const TransformSpec& ts, const SeedTree& seeds,
                             bool bit_exact = false) {
  auto cb_rng = seeds.stream("codebook");
  auto cb = make_codebook(d, ns.n, ns.l, ns.codebook, cb_rng);
  BuildOptions bo;
  bo.bit_exact = bit_exact;
  bo.bridge_incoming_only = ns.bridge_incoming_only;
  auto w_rng = seeds.stream("weights");
  auto w = apply_transforms(build_weights(d, cb, bo), ts, w_rng);
  return {std::move(cb), std::move(w)};
}

struct RandomWords {
  std::size_t count = 0;
  std::size_t min_length = 1;
  std::size_t max_length = 8;
};

inline std::vector<std::vector<std::size_t>> random_words(const Dfa& d, const RandomWords& rw, Rng& rng) {
  if (rw.min_length == 0 || rw.max_length < rw.min_length) throw ConfigError("random_words: need 1 <= min <= max");
  std::uniform_int_distribution<std::size_t> len(rw.min_length, rw.max_length);
  std::uniform_int_distribution<std::size_t> sym(0, d.num_inputs() - 1);
  std::vector<std::vector<std::size_t>> out(rw.count);
  for (auto& w : out) {
    w.resize(len(rng));
    for (auto& s : w) s = sym(rng);
  }
  return out;
}

struct ScheduleSpec {
  bool irregular = false;
  double on_ms = 200, off_ms = 200, lead_ms = 200;
  double lo_ms = 200, hi_ms = 1000;
};

inline std::vector<snn::TimedSegment> make_schedule(const ScheduleSpec& s, const std::vector<std::size_t>& word,
                                                    Rng& rng) {
  if (s.irregular) return snn::irregular_schedule(word, s.lo_ms, s.hi_ms, rng);
  return snn::regular_schedule(word, s.on_ms, s.off_ms, s.lead_ms);
}

struct DecodeSpec {
  double threshold = 0.5;
  double settle_ms = 0.0;
};

/// One spiking walk with its oracle. The full walk is correct when the state
/// read at the end of every gap matches the oracle trajectory.
struct SnnWalk {
  std::vector<std::size_t> word;
  std::vector<snn::TimedSegment> schedule;
  std::vector<std::size_t> oracle;  // initial state, then one per symbol
  snn::SpikeTrace trace;
  snn::RateSeries rates;
  snn::DecodedWalk decoded;

  std::size_t expected() const { return oracle.back(); }
  bool final_ok() const { return decoded.final_state == expected(); }
  bool path_ok() const { return decoded.at_gap_end == oracle; }
};

template <class Synapses>
SnnWalk run_snn_walk(const snn::SimParams& p, Synapses& syn, const EmbeddingCodebook& cb, const Dfa& d,
                     const std::vector<std::size_t>& word, std::vector<snn::TimedSegment> schedule,
                     const DecodeSpec& dec = {}) {
  SnnWalk w;
  w.word = word;
  w.schedule = std::move(schedule);
  w.oracle.push_back(d.initial());
  for (auto q : d.trajectory(word)) w.oracle.push_back(q);
  w.trace = snn::run_snn(p, syn, cb, d, w.schedule);
  w.rates = snn::readout_rates(w.trace, cb, d.num_states(), p.tau_readout);
  w.decoded = snn::decode_walk(w.rates, w.schedule, dec.threshold, dec.settle_ms);
  return w;
}

/// Raster row of every neuron: the active neurons of `states` first, in that
/// order, then the rest.
inline std::vector<std::uint32_t> raster_order(const EmbeddingCodebook& cb, const std::vector<std::size_t>& states) {
  const std::size_t n = cb.shape.n;
  std::vector<std::uint32_t> rank(n, 0);
  std::vector<std::uint8_t> placed(n, 0);
  std::uint32_t next = 0;
  for (auto q : states) {
    cb.q[q].for_each_active([&](std::size_t i) {
      if (!placed[i]) {
        placed[i] = 1;
        rank[i] = next++;
      }
    });
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!placed[i]) rank[i] = next++;
  }
  return rank;
}

inline std::string path_string(const Dfa& d, const std::vector<std::size_t>& states) {
  std::string out;
  for (auto q : states) {
    if (!out.empty()) out += ' ';
    out += q == Dfa::npos ? std::string("-") : d.state_name(q);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config

struct ExperimentConfig {
  json raw;  // validated input with command-line overrides applied
  std::string kind;
  std::uint64_t seed = 1;
  fs::path out = "out";
  bool bit_exact = false;
  fs::path config_dir;

  DfaSpec dfa;
  NetworkSpec network;
  TransformSpec transforms;
  snn::SimParams snn;
  ScheduleSpec schedule;
  std::vector<std::string> words;
  std::optional<RandomWords> random_words;
  DecodeSpec decode;
  rnn::WalkSchedule rnn;
  capacity::SweepParams capacity;
  std::size_t p_limit = 2000, lookahead = 2;
  xbar::CrossbarConfig crossbar;
  std::size_t runs = 20;
  struct {
    std::size_t n = 1024, l = 4, trials = 100;
    std::vector<analogy::Encoding> cases{analogy::Encoding::psbc_all, analogy::Encoding::sbc_roles,
                                         analogy::Encoding::bmap_roles};
  } analogy;
  struct {
    std::size_t draws = 100;
    bool unique_incoming_inputs = false;
  } snr;
  struct {
    std::size_t n = 512, l = 8, patterns = 10, starts = 1000, max_sweeps = 100;
  } energy;
  struct {
    std::vector<std::string> patterns;
    std::size_t random = 0;
    std::string alphabet = "01";
    std::size_t max_length = 8;
    std::size_t walks = 0;
    std::size_t max_states = 12;
  } regex;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool bit_exact = false;
  std::optional<double> binarize, noise;
  std::optional<std::pair<double, double>> ternary;
  bool ternary_auto = false;
  bool fixed_point = false;
};

/// A manifest written by a previous run is accepted in place of a config.
inline json unwrap_manifest(const json& j) {
  if (j.is_object() && j.contains("toolkit") && j.contains("config")) return j.at("config");
  return j;
}

inline json apply_overrides(json j, const Overrides& o) {
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["out"] = *o.out;
  if (o.bit_exact) j["bit_exact"] = true;
  const bool transform = o.binarize || o.noise || o.ternary || o.ternary_auto || o.fixed_point;
  if (transform) {
    json& t = j["transforms"];
    if (t.is_null()) t = json::object();
    if (o.binarize) t["binarize"] = *o.binarize;
    if (o.noise) t["noise"] = *o.noise;
    if (o.ternary) t["ternary"] = json::array({o.ternary->first, o.ternary->second});
    if (o.ternary_auto) t["ternary"] = "auto";
    if (o.fixed_point) t["fixed_point"] = true;
  }
  return j;
}

namespace detail {

template <class T>
void get(const json& obj, const char* key, T& dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->get<T>();
}

}  // namespace detail

/// Validates against the schema and converts to typed settings.
inline ExperimentConfig parse_config(const json& input, const fs::path& config_dir = {}) {
  config::validate(input);
  ExperimentConfig c;
  c.raw = input;
  c.config_dir = config_dir;
  c.kind = input.at("kind").get<std::string>();
  detail::get(input, "seed", c.seed);
  if (input.contains("out")) c.out = input.at("out").get<std::string>();
  detail::get(input, "bit_exact", c.bit_exact);
  using detail::get;
  const json empty = json::object();
  auto section = [&](const char* k) -> const json& { return input.contains(k) ? input.at(k) : empty; };

  if (const auto& s = section("dfa"); !s.empty()) {
    if (s.contains("moddiv")) c.dfa.moddiv = s.at("moddiv").get<std::size_t>();
    if (s.contains("file")) c.dfa.file = s.at("file").get<std::string>();
    if (s.contains("regex")) c.dfa.regex = s.at("regex").get<std::string>();
    get(s, "alphabet", c.dfa.alphabet);
  } else {
    c.dfa.moddiv = 23;
  }
  if (const auto& s = section("network"); !s.empty()) {
    get(s, "n", c.network.n);
    get(s, "l", c.network.l);
    if (s.contains("codebook")) {
      c.network.codebook = s.at("codebook") == "orthogonal" ? CodebookMode::orthogonal : CodebookMode::random;
    }
    get(s, "bridge_incoming_only", c.network.bridge_incoming_only);
  }
  if (const auto& s = section("transforms"); !s.empty()) {
    if (s.contains("binarize")) c.transforms.binarize = s.at("binarize").get<double>();
    if (s.contains("noise")) c.transforms.noise = s.at("noise").get<double>();
    if (s.contains("ternary")) {
      const auto& t = s.at("ternary");
      if (t.is_string()) {
        c.transforms.ternary_auto = true;
      } else {
        c.transforms.ternary = std::pair(t[0].get<double>(), t[1].get<double>());
      }
    }
    get(s, "ternary_k", c.transforms.ternary_k);
    get(s, "fixed_point", c.transforms.fixed_point);
  }
  c.snn.n = c.network.n;
  c.snn.l = c.network.l;
  if (const auto& s = section("snn"); !s.empty()) {
    get(s, "dt", c.snn.dt);
    get(s, "tau_m", c.snn.tau_m);
    get(s, "u_theta", c.snn.u_theta);
    get(s, "u_rest", c.snn.u_rest);
    get(s, "u_reset", c.snn.u_reset);
    get(s, "c_mem", c.snn.c_mem);
    get(s, "tau_syn", c.snn.tau_syn);
    get(s, "tau_ref", c.snn.tau_ref);
    get(s, "tau_readout", c.snn.tau_readout);
    get(s, "w_scale", c.snn.w_scale);
    get(s, "mean_charge", c.snn.mean_charge);
    get(s, "kick_current", c.snn.kick_current);
    get(s, "kick_duration", c.snn.kick_duration);
  }
  if (const auto& s = section("schedule"); !s.empty()) {
    c.schedule.irregular = s.value("kind", std::string("regular")) == "irregular";
    get(s, "on_ms", c.schedule.on_ms);
    get(s, "off_ms", c.schedule.off_ms);
    get(s, "lead_ms", c.schedule.lead_ms);
    get(s, "lo_ms", c.schedule.lo_ms);
    get(s, "hi_ms", c.schedule.hi_ms);
    if (c.schedule.hi_ms < c.schedule.lo_ms) throw ConfigError("schedule: hi_ms must be >= lo_ms");
  }
  get(input, "words", c.words);
  if (const auto& s = section("random_words"); !s.empty()) {
    RandomWords rw;
    get(s, "count", rw.count);
    get(s, "min_length", rw.min_length);
    get(s, "max_length", rw.max_length);
    if (rw.max_length < rw.min_length) throw ConfigError("random_words: max_length must be >= min_length");
    c.random_words = rw;
  }
  if (const auto& s = section("decode"); !s.empty()) {
    get(s, "threshold", c.decode.threshold);
    get(s, "settle_ms", c.decode.settle_ms);
  }
  if (const auto& s = section("rnn"); !s.empty()) {
    get(s, "on_steps", c.rnn.on_steps);
    get(s, "off_steps", c.rnn.off_steps);
    if (s.contains("update")) {
      c.rnn.mode = s.at("update") == "asynchronous" ? rnn::UpdateMode::asynchronous : rnn::UpdateMode::synchronous;
    }
  }
  c.capacity.seed = c.seed;
  if (const auto& s = section("capacity"); !s.empty()) {
    get(s, "n_list", c.capacity.n_list);
    if (s.contains("modes")) {
      c.capacity.modes.clear();
      for (const auto& m : s.at("modes")) c.capacity.modes.push_back(capacity::weight_mode_from_string(m));
    }
    get(s, "trials", c.capacity.trials);
    get(s, "words_per_trial", c.capacity.words_per_trial);
    get(s, "word_length", c.capacity.word_length);
    get(s, "beta", c.capacity.beta);
    get(s, "l0", c.capacity.l0);
    get(s, "n0", c.capacity.n0);
    get(s, "threshold", c.capacity.threshold);
    get(s, "p_limit", c.p_limit);
    get(s, "lookahead", c.lookahead);
    get(s, "threads", c.capacity.threads);
    get(s, "on_steps", c.capacity.schedule.on_steps);
    get(s, "off_steps", c.capacity.schedule.off_steps);
  }
  if (input.contains("crossbar")) c.crossbar = xbar::crossbar_config_from_json(input.at("crossbar"));
  get(input, "runs", c.runs);
  if (const auto& s = section("analogy"); !s.empty()) {
    get(s, "n", c.analogy.n);
    get(s, "l", c.analogy.l);
    get(s, "trials", c.analogy.trials);
    if (s.contains("cases")) {
      c.analogy.cases.clear();
      for (const auto& e : s.at("cases")) c.analogy.cases.push_back(analogy::encoding_from_string(e));
    }
  }
  if (const auto& s = section("snr"); !s.empty()) {
    get(s, "draws", c.snr.draws);
    get(s, "unique_incoming_inputs", c.snr.unique_incoming_inputs);
  }
  if (const auto& s = section("energy"); !s.empty()) {
    get(s, "n", c.energy.n);
    get(s, "l", c.energy.l);
    get(s, "patterns", c.energy.patterns);
    get(s, "starts", c.energy.starts);
    get(s, "max_sweeps", c.energy.max_sweeps);
  }
  if (const auto& s = section("regex"); !s.empty()) {
    get(s, "patterns", c.regex.patterns);
    get(s, "random", c.regex.random);
    get(s, "alphabet", c.regex.alphabet);
    get(s, "max_length", c.regex.max_length);
    get(s, "walks", c.regex.walks);
    get(s, "max_states", c.regex.max_states);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Runners

/// Outcome of one experiment. `checks_ok` is false when a checked property
/// (oracle agreement, energy descent, ...) failed.
struct RunReport {
  bool checks_ok = true;
  std::vector<std::string> artifacts;
  json summary = json::object();
};

class ArtifactDir {
 public:
  explicit ArtifactDir(fs::path dir, RunReport& r) : dir_(std::move(dir)), r_(r) { fs::create_directories(dir_); }
  fs::path operator()(const std::string& name) {
    r_.artifacts.push_back(name);
    return dir_ / name;
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  RunReport& r_;
};

inline std::vector<std::vector<std::size_t>> config_words(const ExperimentConfig& c, const Dfa& d, const SeedTree& seeds) {
  std::vector<std::vector<std::size_t>> words;
  for (const auto& w : c.words) words.push_back(d.parse_word(w));
  if (c.random_words) {
    auto rng = seeds.stream("words");
    for (auto& w : random_words(d, *c.random_words, rng)) words.push_back(std::move(w));
  }
  if (words.empty()) throw ConfigError("no words to run: give words or random_words");
  return words;
}

/// Writes trace files for walk `k` and returns its row for walks.csv.
inline void emit_snn_walk(ArtifactDir& out, const SnnWalk& w, const Dfa& d, const EmbeddingCodebook& cb,
                          const std::string& tag, io::CsvWriter& walks_csv, json& decoded_all) {
  io::write_spikes_csv(out("spikes_" + tag + ".csv"), w.trace);
  io::write_rates_csv(out("rates_" + tag + ".csv"), w.rates, d);
  std::vector<std::size_t> shown = w.oracle;
  std::sort(shown.begin(), shown.end());
  shown.erase(std::unique(shown.begin(), shown.end()), shown.end());
  io::plot_raster(out("raster_" + tag + ".svg"), w.trace, "spikes, word " + d.format_word(w.word),
                  raster_order(cb, shown));
  io::plot_rates(out("rates_" + tag + ".svg"), w.rates, d, "state rates, word " + d.format_word(w.word), shown);
  walks_csv.row(tag, d.format_word(w.word), d.state_name(w.expected()),
                w.decoded.final_state == Dfa::npos ? std::string("-") : d.state_name(w.decoded.final_state),
                w.final_ok(), w.path_ok(), path_string(d, w.oracle), path_string(d, w.decoded.at_gap_end));
  decoded_all.push_back({{"walk", tag}, {"word", d.format_word(w.word)}, {"visits", io::decoded_walk_json(w.decoded, d)}});
}

inline const std::vector<std::string> kWalkColumns{"walk", "word", "expected", "decoded", "final_ok", "path_ok",
                                                   "oracle_path", "decoded_path"};

inline void run_walk_snn(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  const SeedTree seeds(c.seed);
  const Dfa d = load_dfa(c.dfa, c.config_dir);
  const auto net = build_network(d, c.network, c.transforms, seeds, c.bit_exact);
  io::write_json(out("codebook.json"), to_json(to_named_codebook(net.cb, seeds.child("codebook").key())));
  snn::InMemorySynapses syn(net.w);
  const auto words = config_words(c, d, seeds);
  io::CsvWriter walks_csv(out("walks.csv"), kWalkColumns);
  json decoded = json::array();
  std::size_t ok = 0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    auto sch_rng = seeds.child("schedule").child(k).rng();
    const auto w = run_snn_walk(c.snn, syn, net.cb, d, words[k], make_schedule(c.schedule, words[k], sch_rng), c.decode);
    emit_snn_walk(out, w, d, net.cb, std::to_string(k), walks_csv, decoded);
    ok += w.final_ok() ? 1 : 0;
  }
  walks_csv.close();
  io::write_json(out("decoded.json"), decoded);
  r.summary = {{"walks", words.size()}, {"final_ok", ok}, {"weights", to_string(net.w.provenance)}};
  r.checks_ok = ok == words.size();
}

inline void run_walk_rnn(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  const SeedTree seeds(c.seed);
  const Dfa d = load_dfa(c.dfa, c.config_dir);
  const auto net = build_network(d, c.network, c.transforms, seeds, c.bit_exact);
  const auto words = config_words(c, d, seeds);
  rnn::DenseDrive drive(net.w);
  auto walk_rng = seeds.stream("walk");
  io::CsvWriter csv(out("walks.csv"), {"walk", "word", "expected", "decoded", "success", "oracle_path", "decoded_path"});
  std::size_t ok = 0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    const auto res = rnn::run_walk(drive, net.cb, d, words[k], c.rnn, &walk_rng);
    auto oracle = d.trajectory(words[k]);
    csv.row(k, d.format_word(words[k]), d.state_name(res.expected), d.state_name(res.decoded), res.success,
            path_string(d, oracle), path_string(d, res.decoded_after));
    ok += res.success ? 1 : 0;
  }
  csv.close();
  r.summary = {{"walks", words.size()}, {"success", ok}};
  r.checks_ok = ok == words.size();
}

inline void run_capacity(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  auto sp = c.capacity;
  sp.seed = c.seed;
  const auto res = capacity::capacity_sweep(sp, c.p_limit, c.lookahead);
  io::write_sweep_csv(out("sweep.csv"), res.trials);
  io::write_capacity_summary_csv(out("summary.csv"), res);
  io::plot_capacity(out("capacity.svg"), res);
  json fits = json::object();
  for (auto mode : sp.modes) {
    std::vector<double> x, y;
    for (const auto& s : res.summary) {
      x.push_back(capacity::scaling_regressor(s.n));
      y.push_back(static_cast<double>(mode == capacity::WeightMode::ideal ? s.p_max_ideal : s.p_max_binary));
    }
    if (x.size() >= 2) {
      const auto f = capacity::fit_linear(x, y);
      fits[capacity::to_string(mode)] = {{"intercept", f.intercept}, {"slope", f.slope}, {"r2", f.r2}};
    }
  }
  io::write_json(out("fit.json"), fits);
  r.summary = {{"fits", fits}};
}

/// Crossbar-backed spiking walks: `runs` seeded repetitions per word, each
/// with fresh programming and read noise. The first run's traces are kept.
inline void run_crossbar(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  const Dfa d = load_dfa(c.dfa, c.config_dir);
  if (c.network.n != xbar::kLogical) throw ConfigError("crossbar experiments need network.n = 64");
  TransformSpec ts = c.transforms;
  if (!ts.ternary_requested()) ts.ternary_auto = true;
  std::vector<std::vector<std::size_t>> words;
  for (const auto& w : c.words) words.push_back(d.parse_word(w));
  if (words.empty()) throw ConfigError("crossbar: give at least one word");
  io::CsvWriter csv(out("walks.csv"), {"run", "word", "expected", "decoded", "path_ok", "oracle_path", "decoded_path"});
  json decoded = json::array();
  std::size_t ok = 0, total = 0;
  for (std::size_t run = 0; run < c.runs; ++run) {
    const auto seeds = SeedTree(c.seed).child("run").child(run);
    const auto net = build_network(d, c.network, ts, seeds, c.bit_exact);
    xbar::Crossbar xb(c.crossbar);
    auto prog_rng = seeds.stream("program");
    xb.program(net.w, prog_rng);
    if (run == 0) {
      io::CsvWriter g(out("conductance.csv"), {"row", "col", "target", "g", "fault"});
      for (std::size_t i = 0; i < xbar::kRows; ++i) {
        for (std::size_t j = 0; j < xbar::kCols; ++j) {
          g.row(i, j, xb.target()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                xb.conductance()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                xbar::to_string(xb.fault(i, j)));
        }
      }
      g.close();
    }
    for (std::size_t k = 0; k < words.size(); ++k) {
      auto read_rng = seeds.child("read").child(k).rng();
      xbar::CrossbarSynapses syn(xb, net.w, read_rng);
      std::vector<std::vector<double>> reads;
      if (run == 0) syn.set_read_log(&reads);
      auto sch_rng = seeds.child("schedule").child(k).rng();
      const auto w = run_snn_walk(c.snn, syn, net.cb, d, words[k], make_schedule(c.schedule, words[k], sch_rng), c.decode);
      csv.row(run, d.format_word(words[k]), d.state_name(w.expected()),
              w.decoded.final_state == Dfa::npos ? std::string("-") : d.state_name(w.decoded.final_state), w.path_ok(),
              path_string(d, w.oracle), path_string(d, w.decoded.at_gap_end));
      ok += w.path_ok() ? 1 : 0;
      ++total;
      if (run == 0) {
        const auto tag = std::to_string(k);
        io::write_spikes_csv(out("spikes_" + tag + ".csv"), w.trace);
        io::write_rates_csv(out("rates_" + tag + ".csv"), w.rates, d);
        io::write_crossbar_reads_csv(out("reads_" + tag + ".csv"), w.trace, reads);
        io::plot_raster(out("raster_" + tag + ".svg"), w.trace, "crossbar spikes, word " + d.format_word(words[k]));
        io::plot_rates(out("rates_" + tag + ".svg"), w.rates, d, "crossbar rates, word " + d.format_word(words[k]));
        decoded.push_back({{"word", d.format_word(words[k])}, {"visits", io::decoded_walk_json(w.decoded, d)}});
      }
    }
  }
  csv.close();
  io::write_json(out("decoded.json"), decoded);
  r.summary = {{"walks", total}, {"path_ok", ok}, {"crossbar", xbar::to_json(c.crossbar)}};
  r.checks_ok = ok == total;
}

inline void run_analogy(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  io::CsvWriter csv(out("analogy.csv"),
                    {"case", "query", "atom", "mean_overlap", "std_overlap", "trials", "correct_rankings"});
  json cases = json::array();
  for (auto e : c.analogy.cases) {
    const auto s = analogy::run_analogy(e, c.analogy.n, c.analogy.l, c.analogy.trials, SeedTree(c.seed).child("analogy"));
    for (std::size_t i = 0; i < analogy::kAtoms.size(); ++i) {
      csv.row(analogy::to_string(e), "currency", analogy::kAtoms[i], s.mean_currency[i], s.std_currency[i], s.trials,
              s.currency_ok);
    }
    for (std::size_t i = 0; i < analogy::kAtoms.size(); ++i) {
      csv.row(analogy::to_string(e), "analogy", analogy::kAtoms[i], s.mean_analogy[i], s.std_analogy[i], s.trials,
              s.analogy_ok);
    }
    cases.push_back({{"case", analogy::to_string(e)}, {"currency_ok", s.currency_ok}, {"analogy_ok", s.analogy_ok}});
  }
  csv.close();
  r.summary = {{"cases", cases}};
}

inline void run_snr_check(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  const Dfa d = load_dfa(c.dfa, c.config_dir);
  if (c.network.codebook != CodebookMode::random) throw ConfigError("snr-check needs a random codebook");
  BuildOptions bo;
  bo.bridge_incoming_only = c.network.bridge_incoming_only;
  const auto mc = measure_h_stats(d, c.network.n, c.network.l, c.snr.draws, SeedTree(c.seed).child("snr"), bo);
  auto cb_rng = SeedTree(c.seed).stream("codebook");
  const auto cb = make_codebook(d, c.network.n, c.network.l, CodebookMode::random, cb_rng);
  HStatsOptions ho;
  ho.unique_incoming_inputs = c.snr.unique_incoming_inputs;
  const auto pu = predict_h_stats(d, cb, HCondition::at_state, ho);
  const auto pm = predict_h_stats(d, cb, HCondition::at_state_masked, ho);
  io::CsvWriter csv(out("snr.csv"), {"condition", "draws", "mc_signal", "predicted_signal", "mc_std", "predicted_std",
                                     "predicted_std_exact"});
  csv.row("unmasked", mc.draws, mc.gap_unmasked, pu.signal, mc.std_unmasked, pu.std, pu.std_exact);
  csv.row("masked", mc.draws, mc.gap_masked, pm.signal, mc.std_masked, pm.std, pm.std_exact);
  csv.close();
  r.summary = {{"unmasked", {{"mc_signal", mc.gap_unmasked}, {"mc_std", mc.std_unmasked}, {"signal", pu.signal}, {"std", pu.std}}},
               {"masked", {{"mc_signal", mc.gap_masked}, {"mc_std", mc.std_masked}, {"signal", pm.signal}, {"std", pm.std}}}};
}

inline void run_energy_check(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  const auto s = energy_descent_check(c.energy.n, c.energy.l, c.energy.patterns, c.energy.starts, c.energy.max_sweeps,
                                      SeedTree(c.seed).child("energy"));
  io::CsvWriter csv(out("energy.csv"), {"n", "l", "patterns", "starts", "updates", "violations", "converged",
                                        "max_increase"});
  csv.row(c.energy.n, c.energy.l, c.energy.patterns, s.starts, s.updates, s.violations, s.converged, s.max_increase);
  csv.close();
  r.summary = {{"violations", s.violations}, {"converged", s.converged}, {"starts", s.starts}};
  r.checks_ok = s.violations == 0;
}

/// Regex frontend check against std::regex (ECMAScript), plus optional RNN
/// walks on the compiled DFAs.
struct RegexCheck {
  std::string pattern;
  std::size_t states = 0;
  std::size_t strings = 0;
  std::size_t mismatches = 0;
  std::size_t walks = 0;
  std::size_t walks_ok = 0;
};

inline RegexCheck check_regex(const std::string& pattern, const std::string& alphabet, std::size_t max_length) {
  RegexCheck out;
  out.pattern = pattern;
  const Dfa d = regex::regex_to_dfa(pattern, alphabet);
  out.states = d.num_states();
  const std::regex re(pattern, std::regex::ECMAScript);
  for (const auto& s : regex::all_strings(alphabet, max_length)) {
    const bool a = d.accepts(s.empty() ? std::vector<std::size_t>{} : d.parse_word(s));
    const bool b = std::regex_match(s, re);
    out.mismatches += a != b ? 1 : 0;
    ++out.strings;
  }
  return out;
}

/// RNN walks of random words (length 1..8) on the DFA compiled from `pattern`.
inline void regex_walks(RegexCheck& rc, const std::string& alphabet, const NetworkSpec& ns, const rnn::WalkSchedule& sch,
                        std::size_t count, const SeedTree& seeds) {
  const Dfa d = regex::regex_to_dfa(rc.pattern, alphabet);
  auto cb_rng = seeds.stream("codebook");
  const auto cb = make_codebook(d, ns.n, ns.l, ns.codebook, cb_rng);
  const rnn::FactoredDrive drive(d, cb);
  auto word_rng = seeds.stream("words");
  auto walk_rng = seeds.stream("walk");
  for (const auto& w : random_words(d, {count, 1, 8}, word_rng)) {
    const auto res = rnn::run_walk(drive, cb, d, w, sch, &walk_rng);
    rc.walks_ok += res.success ? 1 : 0;
    ++rc.walks;
  }
}

inline void run_regex(const ExperimentConfig& c, RunReport& r) {
  ArtifactDir out(c.out, r);
  std::vector<std::string> patterns = c.regex.patterns;
  auto rng = SeedTree(c.seed).stream("regex");
  for (std::size_t k = 0; k < c.regex.random; ++k) patterns.push_back(regex::random_regex(rng, c.regex.alphabet));
  if (patterns.empty()) throw ConfigError("regex: give patterns or a random count");
  io::CsvWriter csv(out("regex.csv"), {"pattern", "states", "strings", "mismatches", "rnn_walks", "rnn_ok"});
  bool ok = true;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    auto rc = check_regex(patterns[k], c.regex.alphabet, c.regex.max_length);
    if (c.regex.walks > 0 && rc.states <= c.regex.max_states) {
      regex_walks(rc, c.regex.alphabet, c.network, c.rnn, c.regex.walks, SeedTree(c.seed).child("walks").child(k));
    }
    csv.row(rc.pattern, rc.states, rc.strings, rc.mismatches, rc.walks, rc.walks_ok);
    ok = ok && rc.mismatches == 0 && rc.walks_ok == rc.walks;
    io::write_text(out("dfa_" + std::to_string(k) + ".dfa"), serialize_dfa(regex::regex_to_dfa(rc.pattern, c.regex.alphabet)));
  }
  csv.close();
  r.checks_ok = ok;
}

inline void run(const ExperimentConfig& c, RunReport& r) {
  static const std::vector<std::pair<std::string, std::function<void(const ExperimentConfig&, RunReport&)>>> table{
      {"walk-snn", run_walk_snn},   {"walk-rnn", run_walk_rnn},       {"capacity", run_capacity},
      {"crossbar", run_crossbar},   {"analogy", run_analogy},         {"snr-check", run_snr_check},
      {"energy-check", run_energy_check}, {"regex", run_regex}};
  for (const auto& [k, fn] : table) {
    if (k == c.kind) return fn(c, r);
  }
  throw ConfigError("unknown experiment kind '" + c.kind + "'");
}

/// Runs and writes manifest.json, also when the run throws (status "failed").
/// Exit status: 0 ok, 2 a checked property failed; exceptions propagate.
inline int run_experiment(const ExperimentConfig& c) {
  fs::create_directories(c.out);
  RunReport rep;
  try {
    run(c, rep);
  } catch (const std::exception& e) {
    auto m = io::manifest(c.raw, c.seed, c.bit_exact, rep.artifacts, std::string("failed: ") + e.what());
    io::write_json(c.out / "manifest.json", m);
    throw;
  }
  auto m = io::manifest(c.raw, c.seed, c.bit_exact, rep.artifacts, rep.checks_ok ? "ok" : "check-failed");
  m["summary"] = rep.summary;
  io::write_json(c.out / "manifest.json", m);
  return rep.checks_ok ? 0 : 2;
}

}  // namespace fsma::experiment
