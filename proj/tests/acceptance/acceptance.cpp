// Runs the ten acceptance criteria and prints one PASS/FAIL line for each,
// followed by the detail lines. Exit status is 0 once the report is complete;
// with --strict any failing criterion gives exit status 1.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fsma/acceptance.hpp"
#include "fsma/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fsma acceptance suite"};
  std::string golden = std::string(FSMA_SOURCE_DIR) + "/golden/golden.json";
  std::uint64_t seed = 1;
  std::vector<int> only;
  std::string json_out, report_out;
  bool strict = false;
  app.add_option("--golden", golden);
  app.add_option("--seed", seed);
  app.add_option("--only", only)->delimiter(',');
  app.add_option("--json", json_out);
  app.add_option("--report", report_out, "also write the text report here");
  app.add_flag("--strict", strict);
  CLI11_PARSE(app, argc, argv);

  fsma::acceptance::Options o;
  o.seed = seed;
  try {
    o.golden = fsma::io::read_json(golden);
  } catch (const std::exception& e) {
    std::cerr << "golden file: " << e.what() << '\n';
  }
  o.progress = [](const std::string& s) { std::cerr << s << std::endl; };
  const auto results = fsma::acceptance::run_all(o, std::set<int>(only.begin(), only.end()));

  std::size_t passed = 0;
  std::ostringstream text;
  for (const auto& r : results) {
    text << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << '\n';
    passed += r.pass ? 1 : 0;
  }
  text << '\n' << fsma::acceptance::format_report(results);
  text << "\nacceptance: " << passed << "/" << results.size() << " criteria passed\n";
  std::cout << text.str();
  if (!report_out.empty()) std::ofstream(report_out) << text.str();
  if (!json_out.empty()) fsma::io::write_json(json_out, fsma::acceptance::results_json(results));
  return strict && passed != results.size() ? 1 : 0;
}
