#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fsma/dfa.hpp"
#include "fsma/rnn.hpp"
#include "fsma/weights.hpp"

using namespace fsma;

namespace {

struct Net {
  Dfa d;
  EmbeddingCodebook cb;
  WeightMatrix w;
};

Net small_net(std::size_t p = 5, std::size_t n = 1024, std::size_t l = 8, CodebookMode mode = CodebookMode::random) {
  auto rng = SeedTree(21).rng();
  Net out{gen_moddiv_dfa(p), {}, {}};
  out.cb = make_codebook(out.d, n, l, mode, rng);
  out.w = build_weights(out.d, out.cb);
  return out;
}

TEST(Codebook, OneVectorPerStateAndInput) {
  const auto net = small_net();
  EXPECT_EQ(net.cb.q.size(), 5u);
  EXPECT_EQ(net.cb.b.size(), 5u);
  EXPECT_EQ(net.cb.s.size(), 2u);
  for (const auto& q : net.cb.q) EXPECT_TRUE(q.is_strict());
}

TEST(Codebook, OrthogonalStatesShareNoNeuron) {
  const auto net = small_net(4, 64, 8, CodebookMode::orthogonal);
  std::vector<const vsa::SbcHypervector*> all;
  for (const auto& q : net.cb.q) all.push_back(&q);
  for (const auto& b : net.cb.b) all.push_back(&b);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_EQ(vsa::dot(*all[i], *all[j]), 0.0);
  }
  EXPECT_DOUBLE_EQ(net.cb.f(), 0.0);
}

TEST(Weights, AttractorsAreFixedPoints) {
  const auto net = small_net();
  rnn::DenseDrive drive(net.w);
  std::vector<double> h;
  for (std::size_t k = 0; k < net.d.num_states(); ++k) {
    drive.field(net.cb.q[k], h);
    EXPECT_EQ(vsa::block_argmax(h, 8), net.cb.q[k]) << "state " << k;
  }
}

TEST(Weights, MaskedStateDrivesTargetBridge) {
  const auto net = small_net();
  rnn::DenseDrive drive(net.w);
  std::vector<double> h;
  for (std::size_t q = 0; q < net.d.num_states(); ++q) {
    for (std::size_t s = 0; s < net.d.num_inputs(); ++s) {
      const auto& m = net.cb.s[s];
      const auto bits = m.mask_bits();
      drive.field(vsa::mask(net.cb.q[q], m), h);
      const auto z = vsa::block_argmax(h, 8, std::span<const std::uint8_t>(bits));
      // Self-loops carry no transition term: the masked state holds.
      const auto to = net.d.next(q, s);
      const auto& want = to == q ? net.cb.q[q] : net.cb.b[to];
      EXPECT_EQ(z, vsa::mask(want, m)) << "q" << q << " s" << s;
    }
  }
}

TEST(Weights, BridgeWithoutInputFallsToTarget) {
  const auto net = small_net();
  rnn::DenseDrive drive(net.w);
  std::vector<double> h;
  for (std::size_t q = 0; q < net.d.num_states(); ++q) {
    drive.field(net.cb.b[q], h);
    EXPECT_EQ(vsa::block_argmax(h, 8), net.cb.q[q]);
  }
}

TEST(Weights, BitExactMatchesBlocked) {
  auto rng = SeedTree(3).rng();
  const auto d = gen_moddiv_dfa(4);
  const auto cb = make_codebook(d, 256, 8, CodebookMode::random, rng);
  const auto a = build_weights(d, cb);
  BuildOptions o;
  o.bit_exact = true;
  const auto b = build_weights(d, cb, o);
  EXPECT_LT((a.w - b.w).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Weights, AttractorTermIsSymmetric) {
  auto rng = SeedTree(3).rng();
  const auto d = gen_moddiv_dfa(4);
  const auto cb = make_codebook(d, 256, 8, CodebookMode::random, rng);
  BuildOptions o;
  o.components = Components::attractor_only();
  const auto w = build_weights(d, cb, o);
  EXPECT_LT((w.w - w.w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Drive, FactoredMatchesDense) {
  const auto net = small_net(5, 512, 8);
  rnn::DenseDrive dense(net.w);
  rnn::FactoredDrive fact(net.d, net.cb);
  auto rng = SeedTree(9).rng();
  std::vector<double> h1, h2;
  for (int k = 0; k < 10; ++k) {
    const auto z = vsa::gen_sbc(512, 8, rng);
    dense.field(z, h1);
    fact.field(z, h2);
    ASSERT_EQ(h1.size(), h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) EXPECT_NEAR(h1[i], h2[i], 1e-9);
  }
}

TEST(Transforms, ZeroBlockDiagonal) {
  const auto net = small_net(3, 64, 8);
  const auto w = zero_block_diagonal(net.w);
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      if (i / 8 == j / 8) {
        EXPECT_EQ(w(i, j), 0.0);
      } else {
        EXPECT_EQ(w(i, j), net.w(i, j));
      }
    }
  }
}

TEST(Transforms, BinarizeFollowsWeightSign) {
  const auto net = small_net(5, 256, 8);
  auto rng = SeedTree(4).rng();
  const auto b = binarize_stochastic(net.w, 2.0, rng);
  EXPECT_EQ(b.provenance, Provenance::binarized);
  const double mean = net.w.w.mean();
  double hi_ones = 0, hi_n = 0, lo_ones = 0, lo_n = 0;
  for (Eigen::Index i = 0; i < b.w.size(); ++i) {
    const double v = b.w.data()[i];
    ASSERT_TRUE(v == 0.0 || v == 1.0);
    if (net.w.w.data()[i] > mean) {
      hi_ones += v;
      ++hi_n;
    } else {
      lo_ones += v;
      ++lo_n;
    }
  }
  EXPECT_GT(hi_ones / hi_n, 0.5);
  EXPECT_LT(lo_ones / lo_n, 0.5);
  EXPECT_THROW(binarize_stochastic(b, 2.0, rng), InvalidArgument);
}

TEST(Transforms, NoiseIsNonNegativeAndZeroSigmaIsIdentity) {
  const auto net = small_net(3, 64, 8);
  auto rng = SeedTree(4).rng();
  EXPECT_EQ(add_weight_noise(net.w, 0.0, rng).w, net.w.w);
  const auto n = add_weight_noise(net.w, 0.5, rng);
  EXPECT_GE(n.w.minCoeff(), 0.0);
  EXPECT_THROW(add_weight_noise(net.w, -1.0, rng), InvalidArgument);
}

TEST(Transforms, TernaryLevels) {
  WeightMatrix w{Eigen::MatrixXd(2, 2), vsa::make_shape(2, 1), Provenance::ideal, 0.0};
  w.w << -1.0, -0.1, 0.1, 2.0;
  const auto t = quantize_ternary(w, -0.5, 0.5);
  EXPECT_EQ(t.w(0, 0), 0.0);
  EXPECT_EQ(t.w(0, 1), 0.5);
  EXPECT_EQ(t.w(1, 0), 0.5);
  EXPECT_EQ(t.w(1, 1), 1.0);
  EXPECT_THROW(quantize_ternary(w, 1.0, 0.0), InvalidArgument);
}

TEST(Transforms, FixedPointEvenIntegersInRange) {
  const auto net = small_net(5, 256, 8);
  const auto q = quantize_fixed_point(net.w);
  std::set<double> levels;
  for (Eigen::Index i = 0; i < q.w.size(); ++i) {
    const double v = q.w.data()[i];
    ASSERT_LE(std::abs(v), 254.0);
    ASSERT_EQ(std::fmod(v, 2.0), 0.0);
    levels.insert(v);
  }
  EXPECT_LE(levels.size(), 255u);
  // Monotone: order of entries is preserved (ties allowed).
  for (Eigen::Index i = 1; i < 200; ++i) {
    const double a = net.w.w.data()[i - 1], b = net.w.w.data()[i];
    if (a < b) {
      EXPECT_LE(q.w.data()[i - 1], q.w.data()[i]);
    }
  }
}

TEST(Serialization, RoundTripIsExact) {
  const auto net = small_net(3, 64, 8);
  std::stringstream ss;
  write_weights(ss, net.w);
  const auto back = read_weights(ss);
  EXPECT_EQ(back.w, net.w.w);
  EXPECT_EQ(back.shape, net.w.shape);
  EXPECT_EQ(back.provenance, net.w.provenance);
}

TEST(Serialization, TruncatedPayloadRejected) {
  const auto net = small_net(3, 64, 8);
  std::stringstream ss;
  write_weights(ss, net.w);
  auto s = ss.str();
  s.resize(s.size() - 8);
  std::stringstream in(s);
  EXPECT_THROW(read_weights(in), InvalidArgument);
}

}  // namespace
