#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "fsma/acceptance.hpp"
#include "fsma/config_schema.hpp"
#include "fsma/experiment.hpp"
#include "fsma/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fsma;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fsma_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool has_error(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Schema, MinimalConfigValid) { EXPECT_TRUE(config::schema_errors({{"kind", "analogy"}}).empty()); }

TEST(Schema, UnknownTopLevelKeyRejected) {
  const auto errs = config::schema_errors({{"kind", "analogy"}, {"sead", 3}});
  EXPECT_TRUE(has_error(errs, "sead"));
  EXPECT_THROW(config::validate({{"kind", "analogy"}, {"sead", 3}}), ConfigError);
}

TEST(Schema, UnknownNestedKeyRejected) {
  const json j = {{"kind", "walk-rnn"}, {"network", {{"n", 512}, {"blocks", 8}}}};
  EXPECT_TRUE(has_error(config::schema_errors(j), "network.blocks"));
}

TEST(Schema, SectionNotUsedByKind) {
  const json j = {{"kind", "analogy"}, {"crossbar", json::object()}};
  EXPECT_TRUE(has_error(config::schema_errors(j), "not used by experiment kind"));
}

TEST(Schema, TypeAndRangeChecks) {
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-rnn"}, {"network", {{"n", "big"}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-rnn"}, {"network", {{"n", 1}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-rnn"}, {"network", {{"n", 2.5}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "nope"}}).empty());
  EXPECT_FALSE(config::schema_errors(json::object()).empty());
}

TEST(Schema, OneOfDfaSource) {
  EXPECT_TRUE(config::schema_errors({{"kind", "walk-rnn"}, {"dfa", {{"moddiv", 5}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-rnn"}, {"dfa", {{"moddiv", 5}, {"regex", "0*"}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-rnn"}, {"dfa", json::object()}}).empty());
}

TEST(Schema, TernaryEitherPairOrAuto) {
  EXPECT_TRUE(config::schema_errors({{"kind", "walk-snn"}, {"transforms", {{"ternary", {-1, 1}}}}}).empty());
  EXPECT_TRUE(config::schema_errors({{"kind", "walk-snn"}, {"transforms", {{"ternary", "auto"}}}}).empty());
  EXPECT_FALSE(config::schema_errors({{"kind", "walk-snn"}, {"transforms", {{"ternary", {1}}}}}).empty());
}

TEST(Schema, ShippedCopyMatches) {
  const auto shipped = io::read_json(fs::path(FSMA_SOURCE_DIR) / "configs" / "schema.json");
  EXPECT_EQ(shipped, config::schema());
}

TEST(Schema, ShippedConfigsValidate) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(FSMA_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json" || e.path().filename() == "schema.json") continue;
    const auto j = io::read_json(e.path());
    EXPECT_TRUE(config::schema_errors(j).empty()) << e.path();
    EXPECT_NO_THROW(experiment::parse_config(j, e.path().parent_path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 8u);
}

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(1.5), "1.5");
}

TEST(Csv, WriterHeaderAndWidth) {
  const auto dir = scratch("csv");
  {
    io::CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row(1, 0.5);
    w.row(std::string("x,y"), 2);
    EXPECT_THROW(w.row(1), InvalidArgument);
  }
  EXPECT_EQ(io::read_text(dir / "t.csv"), "a,b\n1,0.5\n\"x,y\",2\n");
}

TEST(Manifest, Fields) {
  const auto m = io::manifest({{"kind", "analogy"}}, 9, true, {"a.csv"}, "ok");
  EXPECT_EQ(m["toolkit"], "fsma");
  EXPECT_EQ(m["version"], FSMA_VERSION);
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["config"]["kind"], "analogy");
  EXPECT_EQ(m["artifacts"][0], "a.csv");
}

TEST(Manifest, RerunReproducesCsvBytes) {
  const auto a = scratch("manifest_a"), b = scratch("manifest_b");
  json j = {{"kind", "walk-rnn"}, {"seed", 4},        {"out", a.string()},
            {"bit_exact", true}, {"dfa", {{"moddiv", 5}}}, {"network", {{"n", 512}, {"l", 8}}},
            {"random_words", {{"count", 5}, {"max_length", 6}}}};
  EXPECT_EQ(experiment::run_experiment(experiment::parse_config(j)), 0);

  const auto manifest = io::read_json(a / "manifest.json");
  experiment::Overrides o;
  o.out = b.string();
  const auto again = experiment::parse_config(experiment::apply_overrides(experiment::unwrap_manifest(manifest), o));
  EXPECT_EQ(experiment::run_experiment(again), 0);
  EXPECT_EQ(io::read_text(a / "walks.csv"), io::read_text(b / "walks.csv"));
  EXPECT_FALSE(io::read_text(a / "walks.csv").empty());
}

TEST(Experiment, EnergyCheckReportsOk) {
  const auto dir = scratch("energy");
  json j = {{"kind", "energy-check"},
            {"out", dir.string()},
            {"energy", {{"n", 128}, {"l", 8}, {"patterns", 4}, {"starts", 20}}}};
  EXPECT_EQ(experiment::run_experiment(experiment::parse_config(j)), 0);
  const auto m = io::read_json(dir / "manifest.json");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_TRUE(fs::exists(dir / "energy.csv"));
}

TEST(Experiment, RuntimeFailureFlagsManifest) {
  const auto dir = scratch("fail");
  json j = {{"kind", "walk-rnn"}, {"out", dir.string()}, {"dfa", {{"file", "no/such/file.dfa"}}}};
  EXPECT_THROW(experiment::run_experiment(experiment::parse_config(j)), Error);
  const auto m = io::read_json(dir / "manifest.json");
  EXPECT_EQ(m["status"].get<std::string>().rfind("failed", 0), 0u);
}

TEST(Golden, MissingEntryFailsNamedCriterion) {
  acceptance::Options o;
  o.golden = {{"criteria", json::object()}};
  const auto r = acceptance::run_all(o, {7});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 7);
  EXPECT_FALSE(r[0].pass);
  EXPECT_NE(r[0].details.at(0).find("criterion 7"), std::string::npos);
}

TEST(Golden, CorruptEntryFailsNamedCriterion) {
  acceptance::Options o;
  o.golden = io::read_json(fs::path(FSMA_SOURCE_DIR) / "golden" / "golden.json");
  o.golden["criteria"]["6"]["patterns"] = "ten";
  const auto r = acceptance::run_all(o, {6});
  EXPECT_FALSE(r.at(0).pass);
  EXPECT_EQ(r.at(0).id, 6);
}

TEST(Golden, SeedPerturbationKeepsStatisticalCriteria) {
  acceptance::Options o;
  o.golden = io::read_json(fs::path(FSMA_SOURCE_DIR) / "golden" / "golden.json");
  for (std::uint64_t seed : {2u, 3u}) {
    o.seed = seed;
    for (const auto& r : acceptance::run_all(o, {6, 9})) EXPECT_TRUE(r.pass) << "criterion " << r.id << " seed " << seed;
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FSMA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  {
    std::ofstream(dir / "bad.json") << R"({"kind": "analogy", "bogus": 1})";
    std::ofstream(dir / "mismatch.json") << R"({"kind": "analogy"})";
    std::ofstream(dir / "ok.json") << R"({"kind": "energy-check", "energy": {"n": 64, "l": 8, "patterns": 2, "starts": 3}})";
  }
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 1);
  EXPECT_EQ(run_cli("energy-check --config " + (dir / "mismatch.json").string()), 1);
  EXPECT_EQ(run_cli("energy-check --config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "manifest.json"));
  EXPECT_EQ(run_cli("schema"), 0);
  EXPECT_NE(run_cli("no-such-command"), 0);
}

}  // namespace
