#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsma/acceptance.hpp"
#include "fsma/config_schema.hpp"
#include "fsma/experiment.hpp"
#include "fsma/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fsma;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCheck = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool bit_exact = false;
  std::optional<double> binarize, noise;
  std::vector<double> ternary;
  bool ternary_auto = false;
  bool fixed_point = false;
};

void add_common(CLI::App* app, CommonArgs& a, bool config_required) {
  auto* c = app->add_option("--config,-c", a.config, "experiment config or manifest (JSON)");
  if (config_required) c->required();
  app->add_option("--seed", a.seed, "root seed");
  app->add_option("--out,-o", a.out, "output directory");
  app->add_flag("--bit-exact", a.bit_exact, "deterministic accumulation order");
  app->add_option("--binarize", a.binarize, "stochastic binarization with this beta");
  app->add_option("--noise", a.noise, "additive Gaussian weight noise sigma");
  app->add_option("--ternary", a.ternary, "ternary thresholds LO HI")->expected(2);
  app->add_flag("--ternary-auto", a.ternary_auto, "ternary quantization with data-derived thresholds");
  app->add_flag("--fixed-point", a.fixed_point, "8-bit fixed-point weights");
}

experiment::Overrides overrides(const CommonArgs& a) {
  experiment::Overrides o;
  o.seed = a.seed;
  o.out = a.out;
  o.bit_exact = a.bit_exact;
  o.binarize = a.binarize;
  o.noise = a.noise;
  if (a.ternary.size() == 2) o.ternary = std::make_pair(a.ternary[0], a.ternary[1]);
  o.ternary_auto = a.ternary_auto;
  o.fixed_point = a.fixed_point;
  return o;
}

// Loads the config (or a bare {"kind": kind} when none is given), applies
// command-line overrides and runs. `kind` empty means take it from the file.
int run_config(const CommonArgs& a, const std::string& kind) {
  json j = json::object();
  fs::path dir;
  if (!a.config.empty()) {
    j = experiment::unwrap_manifest(io::read_json(a.config));
    dir = fs::path(a.config).parent_path();
  }
  if (!kind.empty()) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("kind") && j["kind"] != kind) {
      throw ConfigError("config kind '" + j["kind"].get<std::string>() + "' does not match subcommand '" + kind + "'");
    }
    j["kind"] = kind;
  }
  const auto cfg = experiment::parse_config(experiment::apply_overrides(j, overrides(a)), dir);
  const int rc = experiment::run_experiment(cfg);
  std::cout << cfg.kind << ": " << (rc == 0 ? "ok" : "check failed") << ", artifacts in " << cfg.out.string() << '\n';
  return rc;
}

struct GoldenArgs {
  std::string golden = std::string(FSMA_SOURCE_DIR) + "/golden/golden.json";
  std::uint64_t seed = 1;
  std::vector<int> only;
  std::string json_out;
};

int verify_golden(const GoldenArgs& g) {
  acceptance::Options o;
  o.seed = g.seed;
  try {
    o.golden = io::read_json(g.golden);
  } catch (const Error& e) {
    // Every criterion then fails by name.
    std::cerr << "golden file: " << e.what() << '\n';
    o.golden = json::object();
  }
  o.progress = [](const std::string& s) { std::cerr << s << '\n'; };
  const auto results = acceptance::run_all(o, std::set<int>(g.only.begin(), g.only.end()));
  std::cout << acceptance::format_report(results);
  if (!g.json_out.empty()) io::write_json(g.json_out, acceptance::results_json(results));
  for (const auto& r : results) {
    if (!r.pass) return kExitCheck;
  }
  return kExitOk;
}

struct CompileArgs {
  std::string dfa_file, regex, alphabet = "01";
  std::optional<std::size_t> moddiv;
  std::size_t n = 2048, l = 8;
  std::string codebook = "random";
  bool bridge_incoming_only = false;
  std::uint64_t seed = 1;
  std::string out = "weights.txt";
  std::string dfa_out;
};

int compile(const CompileArgs& a, const CommonArgs& t) {
  experiment::DfaSpec ds;
  if (a.moddiv) ds.moddiv = *a.moddiv;
  if (!a.dfa_file.empty()) ds.file = a.dfa_file;
  if (!a.regex.empty()) ds.regex = a.regex;
  ds.alphabet = a.alphabet;
  const int given = (a.moddiv ? 1 : 0) + (a.dfa_file.empty() ? 0 : 1) + (a.regex.empty() ? 0 : 1);
  if (given != 1) throw ConfigError("compile needs exactly one of --moddiv, --dfa, --regex");
  const Dfa d = experiment::load_dfa(ds);
  experiment::NetworkSpec ns;
  ns.n = a.n;
  ns.l = a.l;
  ns.codebook = a.codebook == "orthogonal" ? CodebookMode::orthogonal : CodebookMode::random;
  if (a.codebook != "random" && a.codebook != "orthogonal") throw ConfigError("unknown codebook '" + a.codebook + "'");
  ns.bridge_incoming_only = a.bridge_incoming_only;
  experiment::TransformSpec ts;
  if (t.binarize) ts.binarize = *t.binarize;
  if (t.noise) ts.noise = *t.noise;
  if (t.ternary.size() == 2) ts.ternary = std::make_pair(t.ternary[0], t.ternary[1]);
  ts.ternary_auto = t.ternary_auto;
  ts.fixed_point = t.fixed_point;
  const auto net = experiment::build_network(d, ns, ts, SeedTree(a.seed), t.bit_exact);
  save_weights(a.out, net.w);
  if (!a.dfa_out.empty()) io::write_text(a.dfa_out, serialize_dfa(d));
  std::cout << d.num_states() << " states, " << d.num_inputs() << " inputs, N=" << ns.n << " L=" << ns.l << " -> "
            << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsma: finite state machines in attractor networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FSMA_VERSION);

  const std::vector<std::string> kinds{"walk-snn", "walk-rnn", "capacity", "crossbar",
                                       "analogy",  "snr-check", "energy-check", "regex"};
  CommonArgs common;
  std::string chosen_kind;
  for (const auto& k : kinds) {
    auto* sub = app.add_subcommand(k, "run the " + k + " experiment");
    add_common(sub, common, false);
    sub->callback([&chosen_kind, k] { chosen_kind = k; });
  }
  auto* run = app.add_subcommand("run", "run the experiment described by a config or manifest");
  add_common(run, common, true);

  GoldenArgs golden;
  auto* vg = app.add_subcommand("verify-golden", "run the acceptance suite against the golden file");
  vg->add_option("--golden", golden.golden, "golden expectations (JSON)");
  vg->add_option("--seed", golden.seed, "root seed");
  vg->add_option("--only", golden.only, "criterion ids to run")->delimiter(',');
  vg->add_option("--json", golden.json_out, "write results as JSON");

  CompileArgs ca;
  CommonArgs ct;
  auto* comp = app.add_subcommand("compile", "build a weight matrix for a DFA and save it");
  comp->add_option("--dfa", ca.dfa_file, "DFA spec file");
  comp->add_option("--moddiv", ca.moddiv, "divisibility DFA with this modulus");
  comp->add_option("--regex", ca.regex, "regular expression");
  comp->add_option("--alphabet", ca.alphabet, "regex alphabet");
  comp->add_option("-n", ca.n, "neurons");
  comp->add_option("-l", ca.l, "block length");
  comp->add_option("--codebook", ca.codebook, "random or orthogonal");
  comp->add_flag("--bridge-incoming-only", ca.bridge_incoming_only);
  comp->add_option("--seed", ca.seed, "root seed");
  comp->add_option("--out,-o", ca.out, "weight file");
  comp->add_option("--dfa-out", ca.dfa_out, "also write the DFA spec");
  comp->add_flag("--bit-exact", ct.bit_exact);
  comp->add_option("--binarize", ct.binarize);
  comp->add_option("--noise", ct.noise);
  comp->add_option("--ternary", ct.ternary)->expected(2);
  comp->add_flag("--ternary-auto", ct.ternary_auto);
  comp->add_flag("--fixed-point", ct.fixed_point);

  auto* sch = app.add_subcommand("schema", "print the config JSON schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sch->parsed()) {
      std::cout << config::kSchemaText << '\n';
      return kExitOk;
    }
    if (vg->parsed()) return verify_golden(golden);
    if (comp->parsed()) return compile(ca, ct);
    if (run->parsed()) return run_config(common, "");
    return run_config(common, chosen_kind);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
