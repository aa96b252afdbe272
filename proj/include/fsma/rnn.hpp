#pragma once

// Discrete-time block winner-take-all network:
//   z_{t+1} = bWTA[ W (z_t AND i_t) ]
// Within-block synapses are left out of the drive; the block WTA takes their place.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/vsa.hpp"
#include "fsma/weights.hpp"

namespace fsma::rnn {

/// Drive from a dense matrix (any provenance).
class DenseDrive {
 public:
  explicit DenseDrive(const WeightMatrix& w, bool exclude_within_block = true)
      : w_(exclude_within_block ? zero_block_diagonal(w).w : w.w), shape_(w.shape) {
    if (!w_.allFinite()) throw SimulationError("weight matrix has non-finite entries");
  }

  const BlockShape& shape() const noexcept { return shape_; }

  /// h = W z for a sparse block state z.
  void field(const SbcHypervector& z, std::vector<double>& h) const {
    h.assign(shape_.n, 0.0);
    Eigen::Map<Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(h.size()));
    z.for_each_active([&](std::size_t j) { hv += w_.col(static_cast<Eigen::Index>(j)); });
  }

  /// h restricted to the L components of one block.
  void block_field(const SbcHypervector& z, std::size_t block, std::vector<double>& h) const {
    const auto l = shape_.l;
    h.assign(l, 0.0);
    z.for_each_active([&](std::size_t j) {
      for (std::size_t a = 0; a < l; ++a)
        h[a] += w_(static_cast<Eigen::Index>(block * l + a), static_cast<Eigen::Index>(j));
    });
  }

 private:
  Eigen::MatrixXd w_;
  BlockShape shape_;
};

/// Drive computed from the outer-product factors of the ideal weights without
/// materializing W: h = sum_k u_k (v_k . z). Cost per step is O(terms * M).
/// Keeps a reference to the codebook.
class FactoredDrive {
 public:
  FactoredDrive(const Dfa& d, const EmbeddingCodebook& cb, bool exclude_within_block = true,
                bool bridge_incoming_only = false)
      : terms_(weight_terms(d, cb, Components::all(), bridge_incoming_only)),
        shape_(cb.shape),
        f_(cb.f()),
        exclude_(exclude_within_block) {
    if (exclude_) build_block_diagonal();
  }

  const BlockShape& shape() const noexcept { return shape_; }

  void field(const SbcHypervector& z, std::vector<double>& h) const {
    h.assign(shape_.n, 0.0);
    double offset = 0.0;
    for (const auto& t : terms_) {
      const double c = term_v_dot(t, z, f_);
      if (c == 0.0) continue;
      t.u_pos->for_each_active([&](std::size_t i) { h[i] += c; });
      if (t.u_neg) {
        t.u_neg->for_each_active([&](std::size_t i) { h[i] -= c; });
      } else {
        offset -= c * f_;
      }
    }
    if (offset != 0.0)
      for (auto& x : h) x += offset;
    if (exclude_) {
      const auto l = shape_.l;
      for (std::size_t b = 0; b < shape_.blocks(); ++b) {
        if (!z.block_active(b)) continue;
        const std::size_t j = z.offset(b);
        for (std::size_t a = 0; a < l; ++a) h[b * l + a] -= diag_[(b * l + a) * l + j];
      }
    }
  }

  void block_field(const SbcHypervector& z, std::size_t block, std::vector<double>& h) const {
    std::vector<double> full;
    field(z, full);
    h.assign(full.begin() + static_cast<std::ptrdiff_t>(block * shape_.l),
             full.begin() + static_cast<std::ptrdiff_t>((block + 1) * shape_.l));
  }

 private:
  // diag_[(b*L + a)*L + c] = W(b*L + a, b*L + c)
  void build_block_diagonal() {
    const auto l = shape_.l;
    diag_.assign(shape_.n * l, 0.0);
    for (const auto& t : terms_) {
      for (std::size_t b = 0; b < shape_.blocks(); ++b) {
        const auto up = t.u_pos->offset(b);
        const auto un = t.u_neg ? t.u_neg->offset(b) : vsa::kSilent;
        const auto vv = t.v_vec->offset(b);
        const double sg = t.sign ? t.sign->sign(b) : 1.0;
        for (std::size_t a = 0; a < l; ++a) {
          double u = (a == up ? 1.0 : 0.0) - (t.u_neg ? (a == un ? 1.0 : 0.0) : f_);
          if (u == 0.0) continue;
          for (std::size_t c = 0; c < l; ++c) {
            const double v = ((c == vv ? 1.0 : 0.0) - f_) * sg;
            diag_[(b * l + a) * l + c] += u * v;
          }
        }
      }
    }
  }

  std::vector<OuterTerm> terms_;
  BlockShape shape_;
  double f_;
  bool exclude_;
  std::vector<double> diag_;
};

enum class UpdateMode { synchronous, asynchronous };

/// One update. `mask` (optional) silences its negative blocks both on the
/// input side (z AND i) and on the output side.
template <class Drive>
SbcHypervector rnn_step(const Drive& drive, const SbcHypervector& z, const BmapHypervector* mask = nullptr,
                        UpdateMode mode = UpdateMode::synchronous, Rng* rng = nullptr) {
  vsa::require_same_shape(drive.shape(), z.shape(), "rnn_step");
  const auto& shape = drive.shape();
  std::optional<std::vector<std::uint8_t>> bits;
  if (mask) {
    vsa::require_same_shape(shape, mask->shape(), "rnn_step mask");
    bits = mask->mask_bits();
  }
  if (mode == UpdateMode::synchronous) {
    const SbcHypervector zin = mask ? vsa::mask(z, *mask) : z;
    std::vector<double> h;
    drive.field(zin, h);
    if (bits) return vsa::block_argmax(h, shape.l, std::span<const std::uint8_t>(*bits));
    return vsa::block_argmax(h, shape.l);
  }

  // Asynchronous: visit blocks in random order (sequential without an rng),
  // each seeing the latest state.
  std::vector<std::uint32_t> active(z.active().begin(), z.active().end());
  std::vector<std::size_t> order(shape.blocks());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (rng) std::shuffle(order.begin(), order.end(), *rng);
  std::vector<double> h;
  for (auto b : order) {
    SbcHypervector cur(shape, active);
    if (mask) cur = vsa::mask(cur, *mask);
    if (mask && mask->sign(b) < 0) {
      active[b] = vsa::kSilent;
      continue;
    }
    drive.block_field(cur, b, h);
    std::uint32_t best = 0;
    for (std::uint32_t a = 1; a < shape.l; ++a)
      if (h[a] > h[best]) best = a;
    active[b] = best;
  }
  return SbcHypervector(shape, std::move(active));
}

struct FixedPointResult {
  SbcHypervector z;
  std::size_t steps = 0;
  bool converged = false;
  bool two_cycle = false;
};

/// Iterates without input until a fixed point, a 2-cycle (synchronous mode)
/// or `max_steps`.
template <class Drive>
FixedPointResult run_to_fixed_point(const Drive& drive, SbcHypervector z, std::size_t max_steps,
                                    UpdateMode mode = UpdateMode::synchronous, Rng* rng = nullptr) {
  FixedPointResult out{z};
  std::optional<SbcHypervector> prev;
  for (std::size_t t = 0; t < max_steps; ++t) {
    auto next = rnn_step(drive, z, nullptr, mode, rng);
    ++out.steps;
    if (next == z) {
      out.z = std::move(next);
      out.converged = true;
      return out;
    }
    if (prev && next == *prev) {
      out.z = std::move(next);
      out.two_cycle = true;
      return out;
    }
    prev = std::move(z);
    z = std::move(next);
  }
  out.z = std::move(z);
  return out;
}

/// Sequence of (input or none, duration in steps).
struct InputSegment {
  std::optional<std::size_t> input;
  std::size_t steps;
};

struct WalkSchedule {
  std::size_t on_steps = 10;
  std::size_t off_steps = 10;
  UpdateMode mode = UpdateMode::synchronous;
};

inline std::vector<InputSegment> make_segments(const std::vector<std::size_t>& word, const WalkSchedule& sch) {
  if (sch.on_steps == 0 || sch.off_steps == 0) throw InvalidArgument("segment durations must be at least 1");
  std::vector<InputSegment> out;
  for (auto s : word) {
    out.push_back({s, sch.on_steps});
    out.push_back({std::nullopt, sch.off_steps});
  }
  return out;
}

struct WalkResult {
  std::size_t expected = 0;
  std::size_t decoded = 0;
  bool success = false;
  std::vector<double> overlaps;             ///< final (1/M) z . q per state
  std::vector<std::size_t> decoded_after;   ///< decoded state at the end of each gap
  std::vector<SbcHypervector> trace;        ///< states after every step (if requested)
};

/// Index of the state with the greatest overlap; `strict` is false on ties.
inline std::size_t decode_state(const EmbeddingCodebook& cb, std::size_t num_states, const SbcHypervector& z,
                                std::vector<double>* overlaps = nullptr, bool* strict = nullptr) {
  std::vector<double> ov(num_states);
  for (std::size_t k = 0; k < num_states; ++k) ov[k] = vsa::dot(z, cb.q[k]) / static_cast<double>(cb.blocks());
  const auto best = static_cast<std::size_t>(std::max_element(ov.begin(), ov.end()) - ov.begin());
  if (strict) {
    *strict = std::count(ov.begin(), ov.end(), ov[best]) == 1;
  }
  if (overlaps) *overlaps = std::move(ov);
  return best;
}

/// Starts at q0, applies each symbol as a mask for on_steps followed by
/// off_steps without input, then decodes the state with greatest overlap.
template <class Drive>
WalkResult run_walk(const Drive& drive, const EmbeddingCodebook& cb, const Dfa& d, const std::vector<std::size_t>& word,
                    const WalkSchedule& sch = {}, Rng* rng = nullptr, bool keep_trace = false) {
  cb.check_covers(d);
  WalkResult out;
  out.expected = d.walk(word);
  SbcHypervector z = cb.q[d.initial()];
  if (keep_trace) out.trace.push_back(z);
  for (const auto& seg : make_segments(word, sch)) {
    const BmapHypervector* m = seg.input ? &cb.s.at(*seg.input) : nullptr;
    for (std::size_t t = 0; t < seg.steps; ++t) {
      z = rnn_step(drive, z, m, sch.mode, rng);
      if (keep_trace) out.trace.push_back(z);
    }
    if (!seg.input) out.decoded_after.push_back(decode_state(cb, d.num_states(), z));
  }
  bool strict = false;
  out.decoded = decode_state(cb, d.num_states(), z, &out.overlaps, &strict);
  out.success = strict && out.decoded == out.expected;
  return out;
}

}  // namespace fsma::rnn
