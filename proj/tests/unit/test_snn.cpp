#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fsma/crossbar.hpp"
#include "fsma/experiment.hpp"
#include "fsma/snn.hpp"

using namespace fsma;

namespace {

// 4-state counter on the 64-neuron orthogonal layout: fast enough for unit tests.
struct Counter {
  Dfa d = experiment::load_dfa(experiment::DfaSpec{std::nullopt, std::string("data/dfa/counter4.dfa"), std::nullopt, ""});
  experiment::Network net;
  snn::SimParams p;
  Counter() {
    experiment::NetworkSpec ns{64, 8, CodebookMode::orthogonal, true};
    experiment::TransformSpec ts;
    ts.ternary_auto = true;
    net = experiment::build_network(d, ns, ts, SeedTree(1));
    p.n = 64;
    p.l = 8;
    p.mean_charge = 4.0;
  }
};

TEST(Snn, CounterWalkDecodesEveryGap) {
  Counter c;
  snn::InMemorySynapses syn(c.net.w);
  const auto word = c.d.parse_word("ssss");
  const auto w = experiment::run_snn_walk(c.p, syn, c.net.cb, c.d, word, snn::regular_schedule(word));
  EXPECT_TRUE(w.path_ok());
  EXPECT_EQ(w.decoded.final_state, 0u);
}

TEST(Snn, AtMostOneSpikePerBlockPerStep) {
  Counter c;
  snn::InMemorySynapses syn(c.net.w);
  const auto word = c.d.parse_word("ss");
  const auto tr = snn::run_snn(c.p, syn, c.net.cb, c.d, snn::regular_schedule(word));
  ASSERT_FALSE(tr.events.empty());
  std::set<std::pair<long long, std::uint32_t>> seen;
  for (const auto& e : tr.events) {
    const auto step = std::llround(e.t / c.p.dt);
    EXPECT_TRUE(seen.insert({step, e.neuron / 8}).second) << "t=" << e.t << " block " << e.neuron / 8;
  }
}

TEST(Snn, Deterministic) {
  Counter c;
  snn::InMemorySynapses s1(c.net.w), s2(c.net.w);
  const auto sch = snn::regular_schedule(c.d.parse_word("ss"));
  EXPECT_EQ(snn::run_snn(c.p, s1, c.net.cb, c.d, sch).events, snn::run_snn(c.p, s2, c.net.cb, c.d, sch).events);
}

TEST(Snn, MaskedNeuronsStaySilent) {
  Counter c;
  snn::InMemorySynapses syn(c.net.w);
  const auto word = c.d.parse_word("s");
  const auto sch = snn::regular_schedule(word);
  const auto tr = snn::run_snn(c.p, syn, c.net.cb, c.d, sch);
  const auto& m = c.net.cb.s[0];
  const double on0 = sch[0].duration, on1 = on0 + sch[1].duration;
  for (const auto& e : tr.events) {
    // Leave one step of slack at the segment edges.
    if (e.t > on0 + c.p.dt && e.t < on1 - c.p.dt) {
      EXPECT_GT(m.value(e.neuron), 0) << "spike at " << e.t;
    }
  }
}

TEST(Snn, ParameterValidation) {
  snn::SimParams p;
  p.dt = 5.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.mean_charge = -1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.l = 7;
  EXPECT_THROW(p.validate(), DimensionMismatch);
}

TEST(Schedule, RegularLayout) {
  const auto s = snn::regular_schedule({0, 1}, 200, 300, 100);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_FALSE(s[0].input);
  EXPECT_EQ(s[0].duration, 100);
  EXPECT_EQ(*s[1].input, 0u);
  EXPECT_EQ(s[1].duration, 200);
  EXPECT_EQ(s[2].duration, 300);
  EXPECT_EQ(*s[3].input, 1u);
}

TEST(Schedule, IrregularWithinBounds) {
  auto rng = SeedTree(1).rng();
  const auto s = snn::irregular_schedule({0, 1, 0}, 200, 1000, rng);
  for (const auto& seg : s) {
    EXPECT_GE(seg.duration, 200);
    EXPECT_LE(seg.duration, 1000);
  }
  EXPECT_THROW(snn::irregular_schedule({0}, 0, 10, rng), InvalidArgument);
}

TEST(Decode, ReadsGapEndsFromSyntheticRates) {
  // Two states; state 1 dominates during the second gap.
  snn::RateSeries rs;
  for (int t = 0; t < 30; ++t) rs.t.push_back(t);
  rs.m_q.assign(2, std::vector<double>(30, 0.0));
  rs.m_b.assign(2, std::vector<double>(30, 0.0));
  rs.nu.assign(30, 1.0);
  for (int t = 0; t < 10; ++t) rs.m_q[0][t] = 1.0;
  for (int t = 10; t < 20; ++t) rs.m_q[0][t] = rs.m_q[1][t] = 0.3;
  for (int t = 20; t < 30; ++t) rs.m_q[1][t] = 0.9;
  const std::vector<snn::TimedSegment> sch{{std::nullopt, 10}, {0, 10}, {std::nullopt, 10}};
  const auto dw = snn::decode_walk(rs, sch);
  EXPECT_EQ(dw.at_gap_end, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(dw.final_state, 1u);
  ASSERT_EQ(dw.visits.size(), 2u);
  EXPECT_EQ(dw.visits[1].t_enter, 20);
}

TEST(Decode, BelowThresholdIsNone) {
  snn::RateSeries rs;
  rs.t = {0, 1, 2};
  rs.m_q = {{0.1, 0.1, 0.1}};
  rs.m_b = {{0, 0, 0}};
  rs.nu = {1, 1, 1};
  const auto dw = snn::decode_walk(rs, {{std::nullopt, 3}});
  EXPECT_EQ(dw.final_state, Dfa::npos);
}

TEST(Crossbar, ZeroNoiseTraceEqualsInMemory) {
  Counter c;
  xbar::Crossbar xb(xbar::CrossbarConfig::zero_noise());
  auto prog = SeedTree(2).rng();
  xb.program(c.net.w, prog);
  auto read = SeedTree(3).rng();
  xbar::CrossbarSynapses xs(xb, c.net.w, read);
  snn::InMemorySynapses ms(c.net.w);
  const auto sch = snn::regular_schedule(c.d.parse_word("ss"));
  EXPECT_EQ(snn::run_snn(c.p, xs, c.net.cb, c.d, sch).events, snn::run_snn(c.p, ms, c.net.cb, c.d, sch).events);
}

}  // namespace
