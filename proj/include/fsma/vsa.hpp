#pragma once

// Sparse block code hypervectors and the mixed SBC / block-constant MAP algebra.
//
// Three concrete representations share one block layout (N components in
// M = N / L blocks of length L):
//
//   SbcHypervector   binary, one active component per block
//   BmapHypervector  bipolar, one sign per block repeated over the block
//   PsbcHypervector  one nonzero (+1 or -1) component per block
//
// DenseHypervector is the real-valued fallback used for superpositions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsma/error.hpp"
#include "fsma/rng.hpp"

namespace fsma::vsa {

struct BlockShape {
  std::size_t n = 0;
  std::size_t l = 0;

  constexpr std::size_t blocks() const noexcept { return l == 0 ? 0 : n / l; }
  constexpr double coding_level() const noexcept { return l == 0 ? 0.0 : 1.0 / static_cast<double>(l); }
  constexpr std::size_t block_of(std::size_t i) const noexcept { return i / l; }

  friend constexpr bool operator==(const BlockShape&, const BlockShape&) = default;
};

inline BlockShape make_shape(std::size_t n, std::size_t l) {
  if (l == 0 || n == 0 || n % l != 0) {
    throw DimensionMismatch("block length " + std::to_string(l) + " does not divide dimension " +
                            std::to_string(n));
  }
  return BlockShape{n, l};
}

inline void require_same_shape(const BlockShape& a, const BlockShape& b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": shapes (" + std::to_string(a.n) + "/" + std::to_string(a.l) +
                            ") and (" + std::to_string(b.n) + "/" + std::to_string(b.l) + ") differ");
  }
}

/// Marks a block without an active component (relaxed sparse block vectors).
inline constexpr std::uint32_t kSilent = std::numeric_limits<std::uint32_t>::max();

class DenseHypervector {
 public:
  DenseHypervector() = default;
  explicit DenseHypervector(BlockShape shape) : shape_(shape), values_(shape.n, 0.0) {}
  DenseHypervector(BlockShape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.n) throw DimensionMismatch("dense hypervector length does not match shape");
  }

  const BlockShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.n; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const DenseHypervector& dense() const noexcept { return *this; }

  DenseHypervector& operator+=(const DenseHypervector& other) {
    require_same_shape(shape_, other.shape_, "superposition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  friend DenseHypervector operator+(DenseHypervector a, const DenseHypervector& b) { return a += b; }

  friend bool operator==(const DenseHypervector&, const DenseHypervector&) = default;

 private:
  BlockShape shape_{};
  std::vector<double> values_;
};

class SbcHypervector {
 public:
  SbcHypervector() = default;
  SbcHypervector(BlockShape shape, std::vector<std::uint32_t> active) : shape_(shape), active_(std::move(active)) {
    if (active_.size() != shape_.blocks()) throw DimensionMismatch("SBC: one entry per block expected");
    for (auto a : active_) {
      if (a != kSilent && a >= shape_.l) throw InvalidArgument("SBC: active offset outside block");
    }
  }

  /// Identity under local circular convolution: offset 0 in every block.
  static SbcHypervector identity(BlockShape shape) {
    return SbcHypervector(shape, std::vector<std::uint32_t>(shape.blocks(), 0));
  }
  static SbcHypervector silent(BlockShape shape) {
    return SbcHypervector(shape, std::vector<std::uint32_t>(shape.blocks(), kSilent));
  }

  const BlockShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.n; }
  std::size_t blocks() const noexcept { return active_.size(); }

  /// Offsets within each block, kSilent for blocks without an active unit.
  std::span<const std::uint32_t> active() const noexcept { return active_; }
  std::uint32_t offset(std::size_t block) const { return active_[block]; }
  bool block_active(std::size_t block) const { return active_[block] != kSilent; }
  std::size_t global_index(std::size_t block) const { return block * shape_.l + active_[block]; }

  bool is_strict() const noexcept {
    return std::none_of(active_.begin(), active_.end(), [](auto a) { return a == kSilent; });
  }
  std::size_t popcount() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(active_.begin(), active_.end(), [](auto a) { return a != kSilent; }));
  }
  bool test(std::size_t i) const {
    const auto b = shape_.block_of(i);
    return active_[b] != kSilent && b * shape_.l + active_[b] == i;
  }

  template <class F>
  void for_each_active(F&& f) const {
    for (std::size_t b = 0; b < active_.size(); ++b) {
      if (active_[b] != kSilent) f(b * shape_.l + active_[b]);
    }
  }

  std::vector<std::uint8_t> bits() const {
    std::vector<std::uint8_t> out(shape_.n, 0);
    for_each_active([&](std::size_t i) { out[i] = 1; });
    return out;
  }

  DenseHypervector dense() const {
    DenseHypervector out(shape_);
    for_each_active([&](std::size_t i) { out[i] = 1.0; });
    return out;
  }

  friend bool operator==(const SbcHypervector&, const SbcHypervector&) = default;

 private:
  BlockShape shape_{};
  std::vector<std::uint32_t> active_;
};

class BmapHypervector {
 public:
  BmapHypervector() = default;
  BmapHypervector(BlockShape shape, std::vector<std::int8_t> signs) : shape_(shape), signs_(std::move(signs)) {
    if (signs_.size() != shape_.blocks()) throw DimensionMismatch("bMAP: one sign per block expected");
    for (auto s : signs_) {
      if (s != 1 && s != -1) throw InvalidArgument("bMAP: block signs must be +1 or -1");
    }
  }

  static BmapHypervector ones(BlockShape shape) {
    return BmapHypervector(shape, std::vector<std::int8_t>(shape.blocks(), 1));
  }

  /// Builds the bipolar vector from its binary mask form s (bipolar = 2s - 1).
  static BmapHypervector from_mask(BlockShape shape, std::span<const std::uint8_t> mask) {
    if (mask.size() != shape.n) throw DimensionMismatch("bMAP mask length");
    std::vector<std::int8_t> signs(shape.blocks());
    for (std::size_t b = 0; b < signs.size(); ++b) {
      const auto v = mask[b * shape.l];
      for (std::size_t k = 1; k < shape.l; ++k) {
        if (mask[b * shape.l + k] != v) throw InvalidArgument("bMAP mask is not block-constant");
      }
      signs[b] = v ? 1 : -1;
    }
    return BmapHypervector(shape, std::move(signs));
  }

  const BlockShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.n; }
  std::size_t blocks() const noexcept { return signs_.size(); }
  std::span<const std::int8_t> signs() const noexcept { return signs_; }
  int sign(std::size_t block) const { return signs_[block]; }
  int value(std::size_t i) const { return signs_[shape_.block_of(i)]; }
  std::size_t positive_blocks() const noexcept {
    return static_cast<std::size_t>(std::count(signs_.begin(), signs_.end(), std::int8_t{1}));
  }

  /// Binary mask form s = (s_bar + 1) / 2.
  std::vector<std::uint8_t> mask_bits() const {
    std::vector<std::uint8_t> out(shape_.n, 0);
    for (std::size_t i = 0; i < shape_.n; ++i) out[i] = value(i) > 0 ? 1 : 0;
    return out;
  }

  DenseHypervector dense() const {
    DenseHypervector out(shape_);
    for (std::size_t i = 0; i < shape_.n; ++i) out[i] = value(i);
    return out;
  }

  friend bool operator==(const BmapHypervector&, const BmapHypervector&) = default;

 private:
  BlockShape shape_{};
  std::vector<std::int8_t> signs_;
};

class PsbcHypervector {
 public:
  PsbcHypervector() = default;
  PsbcHypervector(BlockShape shape, std::vector<std::uint32_t> active, std::vector<std::int8_t> signs)
      : shape_(shape), active_(std::move(active)), signs_(std::move(signs)) {
    if (active_.size() != shape_.blocks() || signs_.size() != shape_.blocks()) {
      throw DimensionMismatch("pSBC: one entry per block expected");
    }
    for (std::size_t b = 0; b < active_.size(); ++b) {
      if (active_[b] != kSilent && active_[b] >= shape_.l) throw InvalidArgument("pSBC: offset outside block");
      if (signs_[b] != 1 && signs_[b] != -1) throw InvalidArgument("pSBC: signs must be +1 or -1");
    }
  }

  /// Lifts a binary SBC vector to pSBC with all-positive signs.
  explicit PsbcHypervector(const SbcHypervector& x)
      : shape_(x.shape()),
        active_(x.active().begin(), x.active().end()),
        signs_(x.blocks(), std::int8_t{1}) {}

  const BlockShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.n; }
  std::size_t blocks() const noexcept { return active_.size(); }
  std::span<const std::uint32_t> active() const noexcept { return active_; }
  std::span<const std::int8_t> signs() const noexcept { return signs_; }
  std::uint32_t offset(std::size_t block) const { return active_[block]; }
  int sign(std::size_t block) const { return signs_[block]; }

  DenseHypervector dense() const {
    DenseHypervector out(shape_);
    for (std::size_t b = 0; b < active_.size(); ++b) {
      if (active_[b] != kSilent) out[b * shape_.l + active_[b]] = signs_[b];
    }
    return out;
  }

  friend bool operator==(const PsbcHypervector&, const PsbcHypervector&) = default;

 private:
  BlockShape shape_{};
  std::vector<std::uint32_t> active_;
  std::vector<std::int8_t> signs_;
};

// ---------------------------------------------------------------------------
// Generation

inline SbcHypervector gen_sbc(std::size_t n, std::size_t l, Rng& rng) {
  const auto shape = make_shape(n, l);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(l - 1));
  std::vector<std::uint32_t> active(shape.blocks());
  for (auto& a : active) a = pick(rng);
  return SbcHypervector(shape, std::move(active));
}

inline BmapHypervector gen_bmap(std::size_t n, std::size_t l, Rng& rng) {
  const auto shape = make_shape(n, l);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::int8_t> signs(shape.blocks());
  for (auto& s : signs) s = coin(rng) ? 1 : -1;
  return BmapHypervector(shape, std::move(signs));
}

inline PsbcHypervector gen_psbc(std::size_t n, std::size_t l, Rng& rng) {
  auto x = gen_sbc(n, l, rng);
  auto m = gen_bmap(n, l, rng);
  return PsbcHypervector(x.shape(), {x.active().begin(), x.active().end()}, {m.signs().begin(), m.signs().end()});
}

// ---------------------------------------------------------------------------
// Similarity

template <class A, class B>
double dot(const A& a, const B& b) {
  const auto da = a.dense();
  const auto db = b.dense();
  require_same_shape(da.shape(), db.shape(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < da.dim(); ++i) s += da[i] * db[i];
  return s;
}

inline double dot(const SbcHypervector& a, const SbcHypervector& b) {
  require_same_shape(a.shape(), b.shape(), "dot");
  std::size_t same = 0;
  for (std::size_t k = 0; k < a.blocks(); ++k) {
    same += (a.offset(k) != kSilent && a.offset(k) == b.offset(k)) ? 1 : 0;
  }
  return static_cast<double>(same);
}

template <class A>
double norm(const A& a) {
  return std::sqrt(dot(a, a));
}

/// Normalised inner product a.b / (|a| |b|). Zero if either operand is zero.
template <class A, class B>
double similarity(const A& a, const B& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

/// Inner product scaled by the number of blocks, (1/M) a.b. Equals the
/// similarity for two strict SBC vectors and can exceed 1 for superpositions.
template <class A, class B>
double overlap(const A& a, const B& b) {
  return dot(a, b) / static_cast<double>(a.dense().shape().blocks());
}

// ---------------------------------------------------------------------------
// Hadamard binding (block-constant MAP with SBC / pSBC / dense)

inline PsbcHypervector hadamard_bind(const SbcHypervector& a, const BmapHypervector& m) {
  require_same_shape(a.shape(), m.shape(), "hadamard_bind");
  return PsbcHypervector(a.shape(), {a.active().begin(), a.active().end()}, {m.signs().begin(), m.signs().end()});
}

inline PsbcHypervector hadamard_bind(const PsbcHypervector& a, const BmapHypervector& m) {
  require_same_shape(a.shape(), m.shape(), "hadamard_bind");
  std::vector<std::int8_t> signs(a.blocks());
  for (std::size_t b = 0; b < signs.size(); ++b) signs[b] = static_cast<std::int8_t>(a.sign(b) * m.sign(b));
  return PsbcHypervector(a.shape(), {a.active().begin(), a.active().end()}, std::move(signs));
}

inline BmapHypervector hadamard_bind(const BmapHypervector& a, const BmapHypervector& m) {
  require_same_shape(a.shape(), m.shape(), "hadamard_bind");
  std::vector<std::int8_t> signs(a.blocks());
  for (std::size_t b = 0; b < signs.size(); ++b) signs[b] = static_cast<std::int8_t>(a.sign(b) * m.sign(b));
  return BmapHypervector(a.shape(), std::move(signs));
}

inline DenseHypervector hadamard_bind(const DenseHypervector& a, const BmapHypervector& m) {
  require_same_shape(a.shape(), m.shape(), "hadamard_bind");
  DenseHypervector out(a.shape());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * m.value(i);
  return out;
}

template <class A>
  requires(!std::is_same_v<A, BmapHypervector>)
auto hadamard_bind(const BmapHypervector& m, const A& a) {
  return hadamard_bind(a, m);
}

// ---------------------------------------------------------------------------
// Masking

/// Component-wise AND of a sparse block vector with the binary form of a
/// block-constant mask. Blocks where the mask is zero become silent.
inline SbcHypervector mask(const SbcHypervector& a, const BmapHypervector& s) {
  require_same_shape(a.shape(), s.shape(), "mask");
  std::vector<std::uint32_t> active(a.active().begin(), a.active().end());
  for (std::size_t b = 0; b < active.size(); ++b) {
    if (s.sign(b) < 0) active[b] = kSilent;
  }
  return SbcHypervector(a.shape(), std::move(active));
}

inline std::vector<std::uint8_t> mask(std::span<const std::uint8_t> a, std::span<const std::uint8_t> s) {
  if (a.size() != s.size()) throw DimensionMismatch("mask: lengths differ");
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && s[i]) ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Local circular convolution (blockwise)

inline std::uint32_t wrap_offset(std::int64_t v, std::size_t l) {
  const auto ll = static_cast<std::int64_t>(l);
  return static_cast<std::uint32_t>(((v % ll) + ll) % ll);
}

inline PsbcHypervector lcc_bind(const PsbcHypervector& a, const PsbcHypervector& b) {
  require_same_shape(a.shape(), b.shape(), "lcc_bind");
  const auto l = a.shape().l;
  std::vector<std::uint32_t> active(a.blocks());
  std::vector<std::int8_t> signs(a.blocks());
  for (std::size_t k = 0; k < active.size(); ++k) {
    const bool live = a.offset(k) != kSilent && b.offset(k) != kSilent;
    active[k] = live ? wrap_offset(std::int64_t{a.offset(k)} + b.offset(k), l) : kSilent;
    signs[k] = static_cast<std::int8_t>(a.sign(k) * b.sign(k));
  }
  return PsbcHypervector(a.shape(), std::move(active), std::move(signs));
}

inline PsbcHypervector lcc_unbind(const PsbcHypervector& c, const PsbcHypervector& b) {
  require_same_shape(c.shape(), b.shape(), "lcc_unbind");
  const auto l = c.shape().l;
  std::vector<std::uint32_t> active(c.blocks());
  std::vector<std::int8_t> signs(c.blocks());
  for (std::size_t k = 0; k < active.size(); ++k) {
    const bool live = c.offset(k) != kSilent && b.offset(k) != kSilent;
    active[k] = live ? wrap_offset(std::int64_t{c.offset(k)} - b.offset(k), l) : kSilent;
    signs[k] = static_cast<std::int8_t>(c.sign(k) * b.sign(k));
  }
  return PsbcHypervector(c.shape(), std::move(active), std::move(signs));
}

inline SbcHypervector lcc_bind(const SbcHypervector& a, const SbcHypervector& b) {
  require_same_shape(a.shape(), b.shape(), "lcc_bind");
  std::vector<std::uint32_t> active(a.blocks());
  for (std::size_t k = 0; k < active.size(); ++k) {
    const bool live = a.offset(k) != kSilent && b.offset(k) != kSilent;
    active[k] = live ? wrap_offset(std::int64_t{a.offset(k)} + b.offset(k), a.shape().l) : kSilent;
  }
  return SbcHypervector(a.shape(), std::move(active));
}

inline SbcHypervector lcc_unbind(const SbcHypervector& c, const SbcHypervector& b) {
  require_same_shape(c.shape(), b.shape(), "lcc_unbind");
  std::vector<std::uint32_t> active(c.blocks());
  for (std::size_t k = 0; k < active.size(); ++k) {
    const bool live = c.offset(k) != kSilent && b.offset(k) != kSilent;
    active[k] = live ? wrap_offset(std::int64_t{c.offset(k)} - b.offset(k), c.shape().l) : kSilent;
  }
  return SbcHypervector(c.shape(), std::move(active));
}

inline PsbcHypervector lcc_bind(const PsbcHypervector& a, const SbcHypervector& b) {
  return lcc_bind(a, PsbcHypervector(b));
}
inline PsbcHypervector lcc_bind(const SbcHypervector& a, const PsbcHypervector& b) {
  return lcc_bind(PsbcHypervector(a), b);
}
inline PsbcHypervector lcc_unbind(const PsbcHypervector& c, const SbcHypervector& b) {
  return lcc_unbind(c, PsbcHypervector(b));
}
inline PsbcHypervector lcc_unbind(const SbcHypervector& c, const PsbcHypervector& b) {
  return lcc_unbind(PsbcHypervector(c), b);
}

/// Blockwise circular convolution of arbitrary real vectors.
inline DenseHypervector lcc_bind(const DenseHypervector& a, const DenseHypervector& b) {
  require_same_shape(a.shape(), b.shape(), "lcc_bind");
  const auto l = a.shape().l;
  DenseHypervector out(a.shape());
  for (std::size_t blk = 0; blk < a.shape().blocks(); ++blk) {
    const std::size_t base = blk * l;
    for (std::size_t i = 0; i < l; ++i) {
      const double ai = a[base + i];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < l; ++j) out[base + (i + j) % l] += ai * b[base + j];
    }
  }
  return out;
}

/// Blockwise circular correlation: inverse of lcc_bind for sparse block operands.
inline DenseHypervector lcc_unbind(const DenseHypervector& c, const DenseHypervector& b) {
  require_same_shape(c.shape(), b.shape(), "lcc_unbind");
  const auto l = c.shape().l;
  DenseHypervector out(c.shape());
  for (std::size_t blk = 0; blk < c.shape().blocks(); ++blk) {
    const std::size_t base = blk * l;
    for (std::size_t j = 0; j < l; ++j) {
      const double bj = b[base + j];
      if (bj == 0.0) continue;
      for (std::size_t k = 0; k < l; ++k) out[base + k] += c[base + (k + j) % l] * bj;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block winner-take-all

/// Per block, activates the largest entry among unmasked positions. Ties go to
/// the lowest index. A block with no unmasked position is left silent.
inline SbcHypervector block_argmax(std::span<const double> x, std::size_t l,
                                   std::optional<std::span<const std::uint8_t>> mask_bits = std::nullopt) {
  const auto shape = make_shape(x.size(), l);
  if (mask_bits && mask_bits->size() != x.size()) throw DimensionMismatch("block_argmax: mask length");
  std::vector<std::uint32_t> active(shape.blocks(), kSilent);
  for (std::size_t b = 0; b < active.size(); ++b) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < l; ++k) {
      const std::size_t i = b * l + k;
      if (mask_bits && !(*mask_bits)[i]) continue;
      if (active[b] == kSilent || x[i] > best) {
        best = x[i];
        active[b] = static_cast<std::uint32_t>(k);
      }
    }
  }
  return SbcHypervector(shape, std::move(active));
}

// ---------------------------------------------------------------------------
// Collision capacity

struct CollisionCapacity {
  double log10_k = 0.0;        ///< log10 of the unrounded count
  double k = 0.0;              ///< unrounded count, +inf when it overflows a double
  std::uint64_t saturated = 0;  ///< floor(K), saturated at the uint64 maximum
};

/// Number of random SBC vectors that can be drawn before any pair exceeds the
/// similarity threshold f + theta with probability above delta:
///   K = sqrt(2 delta) exp(M theta^2), evaluated in log space.
inline CollisionCapacity collision_capacity(std::size_t n, std::size_t l, double theta, double delta) {
  const auto shape = make_shape(n, l);
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("collision_capacity: theta must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("collision_capacity: delta must lie in (0, 1)");
  const double m = static_cast<double>(shape.blocks());
  const double ln_k = 0.5 * std::log(2.0 * delta) + m * theta * theta;
  CollisionCapacity out;
  out.log10_k = ln_k / std::log(10.0);
  out.k = std::exp(ln_k);
  constexpr double kMax = 18446744073709549568.0;  // largest double below 2^64
  if (!std::isfinite(out.k) || out.k >= kMax) {
    out.saturated = std::numeric_limits<std::uint64_t>::max();
  } else {
    out.saturated = static_cast<std::uint64_t>(std::floor(out.k));
  }
  return out;
}

/// Hoeffding bound on P[sim(a, b) - f >= theta] for independent SBC vectors.
inline double hoeffding_bound(std::size_t n, std::size_t l, double theta) {
  const auto shape = make_shape(n, l);
  return std::exp(-2.0 * static_cast<double>(shape.blocks()) * theta * theta);
}

}  // namespace fsma::vsa
