#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fsma/codebook.hpp"
#include "fsma/rng.hpp"
#include "fsma/vsa.hpp"

using namespace fsma;
using namespace fsma::vsa;

namespace {

Rng test_rng(std::uint64_t k = 7) { return SeedTree(k).rng(); }

TEST(Shape, RejectsNonDivisibleBlockLength) {
  EXPECT_THROW(make_shape(100, 8), DimensionMismatch);
  EXPECT_THROW(make_shape(64, 0), DimensionMismatch);
  const auto s = make_shape(1024, 8);
  EXPECT_EQ(s.blocks(), 128u);
  EXPECT_DOUBLE_EQ(s.coding_level(), 0.125);
}

TEST(Sbc, GeneratedVectorsAreStrict) {
  auto rng = test_rng();
  for (int k = 0; k < 20; ++k) {
    const auto a = gen_sbc(256, 8, rng);
    EXPECT_TRUE(a.is_strict());
    EXPECT_EQ(a.popcount(), 32u);
    const auto bits = a.bits();
    for (std::size_t b = 0; b < 32; ++b) {
      int ones = 0;
      for (std::size_t i = 0; i < 8; ++i) ones += bits[b * 8 + i];
      EXPECT_EQ(ones, 1);
    }
  }
}

TEST(Sbc, SameSeedSameVector) {
  auto r1 = test_rng(3), r2 = test_rng(3);
  EXPECT_EQ(gen_sbc(512, 8, r1), gen_sbc(512, 8, r2));
}

TEST(Sbc, SelfSimilarityIsOne) {
  auto rng = test_rng();
  const auto a = gen_sbc(512, 8, rng);
  EXPECT_DOUBLE_EQ(similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(dot(a, a), 64.0);
}

TEST(Sbc, DotCountsSharedBlocks) {
  const auto s = make_shape(16, 4);
  SbcHypervector a(s, {0, 1, 2, 3});
  SbcHypervector b(s, {0, 2, 2, 0});
  EXPECT_DOUBLE_EQ(dot(a, b), 2.0);
  EXPECT_DOUBLE_EQ(dot(a, b), dot(a.dense(), b.dense()));
}

TEST(Bmap, BlockConstant) {
  auto rng = test_rng();
  const auto m = gen_bmap(64, 8, rng);
  const auto d = m.dense();
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(d[i], m.sign(i / 8));
}

TEST(Bmap, FromMaskRoundTrip) {
  auto rng = test_rng();
  const auto m = gen_bmap(64, 8, rng);
  const auto bits = m.mask_bits();
  EXPECT_EQ(BmapHypervector::from_mask(m.shape(), bits), m);
}

TEST(Hadamard, Involution) {
  auto rng = test_rng();
  for (int k = 0; k < 50; ++k) {
    const auto x = gen_sbc(256, 8, rng);
    const auto m = gen_bmap(256, 8, rng);
    const auto bound = hadamard_bind(x, m);
    EXPECT_EQ(hadamard_bind(bound, m), PsbcHypervector(x));
  }
}

TEST(Hadamard, BoundVectorOrthogonalInExpectation) {
  auto rng = test_rng();
  double acc = 0;
  const int trials = 2000;
  for (int k = 0; k < trials; ++k) {
    const auto x = gen_sbc(512, 8, rng);
    acc += dot(hadamard_bind(x, gen_bmap(512, 8, rng)), x);
  }
  // Sum of M = 64 independent +-1: mean 0, std 8 per trial.
  EXPECT_LT(std::abs(acc / trials), 4.0 * 8.0 / std::sqrt(static_cast<double>(trials)));
}

TEST(Mask, SilencesNegativeBlocks) {
  const auto s = make_shape(8, 2);
  SbcHypervector a(s, {0, 1, 1, 0});
  BmapHypervector m(s, {1, -1, 1, -1});
  const auto z = mask(a, m);
  EXPECT_TRUE(z.block_active(0));
  EXPECT_FALSE(z.block_active(1));
  EXPECT_TRUE(z.block_active(2));
  EXPECT_FALSE(z.block_active(3));
  // Bitwise AND form agrees.
  EXPECT_EQ(mask(std::span<const std::uint8_t>(a.bits()), std::span<const std::uint8_t>(m.mask_bits())), z.bits());
}

TEST(Mask, MaskedDotWithBoundEqualsPositiveBlocks) {
  auto rng = test_rng();
  const auto q = gen_sbc(256, 8, rng);
  const auto s = gen_bmap(256, 8, rng);
  EXPECT_DOUBLE_EQ(dot(hadamard_bind(q, s), mask(q, s)), static_cast<double>(s.positive_blocks()));
}

TEST(Lcc, IdentityAndRoundTrip) {
  auto rng = test_rng();
  const auto shape = make_shape(128, 8);
  const auto id = SbcHypervector::identity(shape);
  for (int k = 0; k < 50; ++k) {
    const auto a = gen_sbc(128, 8, rng), b = gen_sbc(128, 8, rng);
    EXPECT_EQ(lcc_bind(a, id), a);
    EXPECT_EQ(lcc_unbind(lcc_bind(a, b), b), a);
    EXPECT_EQ(lcc_bind(a, b), lcc_bind(b, a));
  }
}

TEST(Lcc, OffsetsAddModuloL) {
  const auto s = make_shape(8, 4);
  SbcHypervector a(s, {3, 1});
  SbcHypervector b(s, {2, 1});
  const auto c = lcc_bind(a, b);
  EXPECT_EQ(c.offset(0), 1u);
  EXPECT_EQ(c.offset(1), 2u);
}

TEST(Lcc, DenseMatchesSparse) {
  auto rng = test_rng();
  const auto a = gen_psbc(64, 8, rng), b = gen_psbc(64, 8, rng);
  const auto sparse = lcc_bind(a, b).dense();
  const auto dense = lcc_bind(a.dense(), b.dense());
  for (std::size_t i = 0; i < 64; ++i) EXPECT_DOUBLE_EQ(sparse[i], dense[i]);
  const auto back = lcc_unbind(dense, b.dense());
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(back[i], a.dense()[i], 1e-12);
}

TEST(Lcc, CommutesWithHadamard) {
  auto rng = test_rng();
  for (int k = 0; k < 50; ++k) {
    const auto x1 = gen_sbc(128, 8, rng), x2 = gen_sbc(128, 8, rng);
    const auto m1 = gen_bmap(128, 8, rng), m2 = gen_bmap(128, 8, rng);
    EXPECT_EQ(lcc_bind(hadamard_bind(x1, m1), hadamard_bind(x2, m2)),
              hadamard_bind(PsbcHypervector(lcc_bind(x1, x2)), hadamard_bind(m1, m2)));
  }
}

TEST(BlockArgmax, PicksLargestPerBlockLowestOnTie) {
  const std::vector<double> x{0.1, 0.5, 0.5, 0.0, -1, -2, -3, -0.5};
  const auto z = block_argmax(x, 4);
  EXPECT_EQ(z.offset(0), 1u);
  EXPECT_EQ(z.offset(1), 3u);
}

TEST(BlockArgmax, FullyMaskedBlockIsSilent) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<std::uint8_t> m{1, 1, 0, 1, 0, 0, 0, 0};
  const auto z = block_argmax(x, 4, std::span<const std::uint8_t>(m));
  EXPECT_EQ(z.offset(0), 3u);
  EXPECT_FALSE(z.block_active(1));
}

TEST(Collision, LogSpaceMatchesClosedForm) {
  // K = sqrt(2 delta) exp(M theta^2), small enough to evaluate directly.
  const auto c = collision_capacity(256, 8, 0.3, 1e-3);
  const double direct = std::sqrt(2e-3) * std::exp(32 * 0.09);
  EXPECT_NEAR(c.k, direct, 1e-9 * direct);
  EXPECT_EQ(c.saturated, static_cast<std::uint64_t>(std::floor(direct)));
}

TEST(Collision, SaturatesForHugeK) {
  const auto c = collision_capacity(1 << 20, 8, 0.4, 1e-4);
  EXPECT_GT(c.log10_k, 19.3);
  EXPECT_EQ(c.saturated, std::numeric_limits<std::uint64_t>::max());
}

TEST(Collision, HoeffdingBound) {
  EXPECT_DOUBLE_EQ(hoeffding_bound(1000, 8, 0.2), std::exp(-2.0 * 125 * 0.04));
}

TEST(Codebook, JsonRoundTrip) {
  auto rng = test_rng();
  Codebook cb(make_shape(64, 8), 5);
  cb.add("a", gen_sbc(64, 8, rng));
  cb.add("m", gen_bmap(64, 8, rng));
  cb.add("p", gen_psbc(64, 8, rng));
  const auto back = codebook_from_json(to_json(cb));
  EXPECT_EQ(back.size(), 3u);
  EXPECT_EQ(back.get<SbcHypervector>("a"), cb.get<SbcHypervector>("a"));
  EXPECT_EQ(back.get<BmapHypervector>("m"), cb.get<BmapHypervector>("m"));
  EXPECT_EQ(back.get<PsbcHypervector>("p"), cb.get<PsbcHypervector>("p"));
}

}  // namespace
