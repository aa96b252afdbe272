#include <gtest/gtest.h>

#include <vector>

#include "fsma/crossbar.hpp"
#include "fsma/experiment.hpp"

using namespace fsma;
using namespace fsma::xbar;

namespace {

WeightMatrix ternary_net() {
  const Dfa d = gen_moddiv_dfa(3);
  experiment::NetworkSpec ns{64, 8, CodebookMode::orthogonal, false};
  experiment::TransformSpec ts;
  ts.ternary_auto = true;
  return experiment::build_network(d, ns, ts, SeedTree(4)).w;
}

std::vector<std::uint8_t> spikes_of(std::initializer_list<std::size_t> on) {
  std::vector<std::uint8_t> s(kLogical, 0);
  for (auto i : on) s[i] = 1;
  return s;
}

TEST(Layout, DeviceMapping) {
  EXPECT_EQ(device_of(0, 0).row, 0u);
  EXPECT_EQ(device_of(31, 63).col, 63u);
  EXPECT_EQ(device_of(32, 0).row, 0u);
  EXPECT_EQ(device_of(32, 0).col, 64u);
  EXPECT_EQ(device_of(63, 63).col, 127u);
}

TEST(Read, ZeroSpikesGiveZeroWithoutNoise) {
  Crossbar xb(CrossbarConfig::zero_noise());
  auto rng = SeedTree(1).rng();
  xb.program(ternary_net(), rng);
  for (double c : xb.read_mvm(spikes_of({}), rng).currents) EXPECT_EQ(c, 0.0);
}

TEST(Read, ZeroSpikesPureNoiseMeanZero) {
  Crossbar xb;
  auto rng = SeedTree(1).rng();
  xb.program(ternary_net(), rng);
  double acc = 0;
  const int reads = 400;
  for (int k = 0; k < reads; ++k) {
    for (double c : xb.read_mvm(spikes_of({}), rng).currents) acc += c;
  }
  // Each current is the sum of two reads with std 0.05: std 0.0707.
  const double n = reads * 64.0;
  EXPECT_LT(std::abs(acc / n), 4 * 0.0707 / std::sqrt(n));
}

TEST(Read, SingleSpikeReadsColumn) {
  Crossbar xb(CrossbarConfig::zero_noise());
  auto rng = SeedTree(1).rng();
  xb.program(ternary_net(), rng);
  const auto g = xb.logical_conductance();
  for (std::size_t j : {0u, 17u, 40u, 63u}) {
    const auto r = xb.read_mvm(spikes_of({j}), rng);
    for (std::size_t i = 0; i < kLogical; ++i) EXPECT_DOUBLE_EQ(r.currents[i], g(i, j));
  }
}

TEST(Read, PartitionedReadEqualsFullProduct) {
  Crossbar xb(CrossbarConfig::zero_noise());
  auto rng = SeedTree(1).rng();
  xb.program(ternary_net(), rng);
  const auto g = xb.logical_conductance();
  std::bernoulli_distribution coin(0.3);
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::uint8_t> s(kLogical);
    Eigen::VectorXd x(kLogical);
    for (std::size_t i = 0; i < kLogical; ++i) {
      s[i] = coin(rng) ? 1 : 0;
      x[static_cast<Eigen::Index>(i)] = s[i];
    }
    const Eigen::VectorXd want = g * x;
    const auto r = xb.read_mvm(s, rng);
    for (std::size_t i = 0; i < kLogical; ++i) ASSERT_NEAR(r.currents[i], want[static_cast<Eigen::Index>(i)], 1e-12);
  }
}

TEST(Program, ZeroNoiseMatchesTargetLevels) {
  Crossbar xb(CrossbarConfig::zero_noise());
  auto rng = SeedTree(1).rng();
  const auto w = ternary_net();
  xb.program(w, rng);
  const auto g = xb.logical_conductance();
  for (std::size_t post = 0; post < kLogical; ++post) {
    for (std::size_t pre = 0; pre < kLogical; ++pre) {
      const double want = pre / 8 == post / 8 ? 0.0 : w(post, pre);
      EXPECT_DOUBLE_EQ(g(static_cast<Eigen::Index>(post), static_cast<Eigen::Index>(pre)), want);
    }
  }
}

TEST(Program, RejectsNonTernary) {
  Crossbar xb;
  auto rng = SeedTree(1).rng();
  const Dfa d = gen_moddiv_dfa(3);
  experiment::NetworkSpec ns{64, 8, CodebookMode::orthogonal, false};
  const auto w = experiment::build_network(d, ns, {}, SeedTree(4)).w;
  EXPECT_THROW(xb.program(w, rng), InvalidArgument);
}

TEST(Faults, StuckRowReadsStuckLevel) {
  auto cfg = CrossbarConfig::zero_noise();
  cfg.faults.push_back({5, std::nullopt, FaultKind::stuck_high});
  Crossbar xb(cfg);
  auto rng = SeedTree(1).rng();
  xb.program(ternary_net(), rng);
  for (std::size_t c = 0; c < kCols; ++c) EXPECT_EQ(xb.conductance()(5, static_cast<Eigen::Index>(c)), 2.0);
  // Presynaptic neuron 5 drives row 5 on the first half.
  const auto r = xb.read_mvm(spikes_of({5}), rng);
  for (std::size_t i = 0; i < kLogical; ++i) EXPECT_EQ(r.currents[i], 2.0);
}

TEST(Faults, OutOfGridRejected) {
  CrossbarConfig cfg;
  cfg.faults.push_back({32, 0, FaultKind::stuck_low});
  EXPECT_THROW(Crossbar{cfg}, InvalidArgument);
}

TEST(Config, JsonRoundTrip) {
  CrossbarConfig cfg;
  cfg.read_std = 0.07;
  cfg.faults.push_back({3, std::nullopt, FaultKind::stuck_low});
  cfg.faults.push_back({4, 9, FaultKind::stuck_high});
  const auto back = crossbar_config_from_json(to_json(cfg));
  EXPECT_EQ(back.read_std, 0.07);
  ASSERT_EQ(back.faults.size(), 2u);
  EXPECT_FALSE(back.faults[0].col);
  EXPECT_EQ(*back.faults[1].col, 9u);
  EXPECT_EQ(back.faults[1].kind, FaultKind::stuck_high);
}

}  // namespace
