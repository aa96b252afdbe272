#include <gtest/gtest.h>

#include <cmath>

#include "fsma/analysis.hpp"
#include "fsma/capacity.hpp"
#include "fsma/dfa.hpp"
#include "fsma/experiment.hpp"
#include "fsma/rnn.hpp"
#include "fsma/weights.hpp"

using namespace fsma;

namespace {

struct Moddiv23 {
  Dfa d = gen_moddiv_dfa(23);
  EmbeddingCodebook cb;
  Moddiv23(std::size_t n = 2048, std::size_t l = 8) {
    auto rng = SeedTree(1).stream("codebook");
    cb = make_codebook(d, n, l, CodebookMode::random, rng);
  }
};

TEST(RnnWalk, RandomWordsMatchOracle) {
  Moddiv23 s;
  rnn::FactoredDrive drive(s.d, s.cb);
  auto rng = SeedTree(2).rng();
  const auto words = experiment::random_words(s.d, {20, 1, 8}, rng);
  for (const auto& w : words) {
    const auto r = rnn::run_walk(drive, s.cb, s.d, w);
    EXPECT_TRUE(r.success) << s.d.format_word(w);
    EXPECT_EQ(r.decoded_after, s.d.trajectory(w));
  }
}

TEST(RnnWalk, AsynchronousModeAlsoWalks) {
  Moddiv23 s;
  rnn::FactoredDrive drive(s.d, s.cb);
  rnn::WalkSchedule sch;
  sch.mode = rnn::UpdateMode::asynchronous;
  auto rng = SeedTree(3).rng();
  const auto w = s.d.parse_word("1000100");
  const auto r = rnn::run_walk(drive, s.cb, s.d, w, sch, &rng);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(s.d.state_name(r.decoded), "q22");
}

TEST(RnnWalk, NoInputKeepsState) {
  Moddiv23 s(1024, 8);
  rnn::FactoredDrive drive(s.d, s.cb);
  for (std::size_t q = 0; q < s.d.num_states(); ++q) {
    const auto r = rnn::run_to_fixed_point(drive, s.cb.q[q], 10);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.z, s.cb.q[q]);
  }
}

TEST(RnnWalk, ZeroDurationSegmentsRejected) {
  rnn::WalkSchedule sch;
  sch.on_steps = 0;
  EXPECT_THROW(rnn::make_segments({0, 1}, sch), InvalidArgument);
}

TEST(Energy, DescentNeverIncreases) {
  const auto s = energy_descent_check(256, 8, 6, 50, 50, SeedTree(5));
  EXPECT_EQ(s.violations, 0u);
  EXPECT_GT(s.updates, 0u);
  EXPECT_EQ(s.converged, s.starts);
}

TEST(Capacity, BlockLengthScaling) {
  EXPECT_EQ(capacity::scaled_block_length(2048), 8u);
  EXPECT_EQ(capacity::scaled_block_length(1024), 4u);  // target 4.4
  EXPECT_EQ(capacity::scaled_block_length(512), 2u);   // target 2.44
  for (std::size_t n : {300u, 768u, 1000u}) EXPECT_EQ(n % capacity::scaled_block_length(n), 0u);
}

TEST(Capacity, LinearFitExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = capacity::fit_linear(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Capacity, MaxReliablePicksLargestPassing) {
  std::vector<capacity::Cell> cells(3);
  cells[0].p = 2;
  cells[0].success = 1.0;
  cells[1].p = 4;
  cells[1].success = 0.95;
  cells[2].p = 8;
  cells[2].success = 0.5;
  EXPECT_EQ(capacity::max_reliable_p(cells, 0.9), 4u);
}

TEST(Capacity, TrialSeedsDiffer) {
  using capacity::WeightMode;
  EXPECT_NE(capacity::trial_seed(1, 512, 4, WeightMode::ideal, 0), capacity::trial_seed(1, 512, 4, WeightMode::ideal, 1));
  EXPECT_NE(capacity::trial_seed(1, 512, 4, WeightMode::ideal, 0), capacity::trial_seed(1, 512, 4, WeightMode::binary, 0));
}

TEST(Capacity, SmallTrialIsDeterministic) {
  capacity::SweepParams sp;
  sp.trials = 1;
  const auto a = capacity::run_trial(256, 3, capacity::WeightMode::ideal, 0, sp);
  const auto b = capacity::run_trial(256, 3, capacity::WeightMode::ideal, 0, sp);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.walks, sp.words_per_trial);
}

}  // namespace
