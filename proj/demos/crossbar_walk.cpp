// Runs the 4-state counter as a spiking network whose synapses live on a
// simulated memristor crossbar, with and without a stuck row.
#include <iostream>

#include "fsma/crossbar.hpp"
#include "fsma/experiment.hpp"
#include "fsma/snn.hpp"

using namespace fsma;

namespace {

void walk(const char* label, const xbar::CrossbarConfig& cfg) {
  const Dfa d = experiment::load_dfa({std::nullopt, std::string("data/dfa/counter4.dfa"), std::nullopt, ""});
  experiment::TransformSpec ts;
  ts.ternary_auto = true;
  const auto net = experiment::build_network(d, {64, 8, CodebookMode::orthogonal, true}, ts, SeedTree(1));

  xbar::Crossbar xb(cfg);
  auto prog = SeedTree(2).rng();
  xb.program(net.w, prog);
  auto read = SeedTree(3).rng();
  xbar::CrossbarSynapses syn(xb, net.w, read);

  snn::SimParams p;
  p.n = 64;
  p.l = 8;
  p.mean_charge = 4.0;
  const auto word = d.parse_word("ssss");
  const auto w = experiment::run_snn_walk(p, syn, net.cb, d, word, snn::regular_schedule(word));

  std::cout << label << ": " << w.trace.events.size() << " spikes, path";
  for (auto q : w.decoded.at_gap_end) std::cout << ' ' << (q == Dfa::npos ? std::string("-") : d.state_name(q));
  std::cout << (w.path_ok() ? "  ok\n" : "  WRONG\n");
}

}  // namespace

int main() {
  try {
    walk("healthy", {});
    auto faulty = xbar::CrossbarConfig{};
    faulty.faults.push_back({5, std::nullopt, xbar::FaultKind::stuck_low});
    walk("row 5 stuck low", faulty);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
