#pragma once

// Closed-form statistics of the postsynaptic sum h = W z and the attractor energy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/weights.hpp"

namespace fsma {

enum class HCondition { at_state, at_state_masked };

struct HStats {
  double signal = 0.0;         ///< gap between the means of active and inactive components
  double mean_active = 0.0;    ///< mean of h over components of the target vector
  double mean_inactive = 0.0;  ///< mean of h over the remaining components
  double std = 0.0;            ///< cross-talk std in the sparse, many-state approximation
  double std_exact = 0.0;      ///< cross-talk std before that approximation
  // Variance split by weight component, before approximation.
  double var_attractor = 0.0;
  double var_bridge = 0.0;
  double var_transition = 0.0;
};

struct HStatsOptions {
  /// Count only the inputs labelling a state's incoming edges in the bridge
  /// term (averaged over states) instead of all inputs.
  bool unique_incoming_inputs = false;
};

/// Predicted statistics of h when the network sits at an attractor (target
/// vector q) or at an attractor masked by a valid input (target vector b').
/// Uses the worst case that the current state is the source of S edges.
inline HStats predict_h_stats(const Dfa& d, const EmbeddingCodebook& cb, HCondition cond, HStatsOptions opt = {}) {
  if (cb.mode != CodebookMode::random) {
    throw InvalidArgument("h statistics assume a random codebook; orthogonal codebooks are not supported");
  }
  const double m = static_cast<double>(cb.blocks());
  const double f = cb.f();
  const double q = static_cast<double>(d.num_states());
  const double s = static_cast<double>(d.num_inputs());
  const double e = static_cast<double>(d.edges().size());
  double s_bridge = s;
  if (opt.unique_incoming_inputs && d.num_states() > 0) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.num_states(); ++i) total += static_cast<double>(d.incoming_inputs(i).size());
    s_bridge = total / q;
  }
  const double g = 1.0 - f;

  HStats out;
  if (cond == HCondition::at_state) {
    out.signal = m * g;
    out.mean_active = m * g * g;
    out.mean_inactive = -m * g * f;
    out.var_attractor = f * f * g * g * (q - 1.0) * m;
    out.var_bridge = f * f * g * g * m * q * (1.0 + 2.0 * s_bridge);
    out.var_transition = g * g * (2.0 * m * f * f * (e - s) + 2.0 * m * s * f * g);
    out.std = std::sqrt(m) * std::sqrt(f * f * q * (2.0 + 2.0 * s_bridge) + 2.0 * f * f * e + 2.0 * f * s);
  } else {
    out.signal = 0.5 * m * g;
    out.mean_active = 0.5 * m * g * g;
    out.mean_inactive = -0.5 * m * g * f;
    out.var_attractor = f * f * g * g * (q - 1.0) * 0.5 * m;
    out.var_bridge = f * f * g * g * 0.5 * m * q * (1.0 + 2.0 * s_bridge);
    out.var_transition = g * g * m * (f * f * (e - s + 1.0) + (s - 1.0) * f * g);
    out.std = std::sqrt(m) * std::sqrt(f * f * q * (1.0 + s_bridge) + f * f * e + f * (s - 1.0));
  }
  out.std_exact = std::sqrt(out.var_attractor + out.var_bridge + out.var_transition);
  return out;
}

/// Energy -z^T W z of a sparse block state.
inline double energy(const WeightMatrix& w, const SbcHypervector& z) {
  vsa::require_same_shape(w.shape, z.shape(), "energy");
  double acc = 0.0;
  z.for_each_active([&](std::size_t i) { z.for_each_active([&](std::size_t j) { acc += w(i, j); }); });
  return -acc;
}

/// -sum_q (z . (q - f))^2, equal to energy(W_attr, z) for the full attractor matrix.
inline double attractor_energy(const EmbeddingCodebook& cb, const SbcHypervector& z, std::size_t num_states) {
  const double f = cb.f();
  double acc = 0.0;
  for (std::size_t k = 0; k < num_states; ++k) {
    const double ov = vsa::dot(z, cb.q[k]) - f * static_cast<double>(z.popcount());
    acc += ov * ov;
  }
  return -acc;
}

/// Sampled h statistics over codebook draws. Unmasked: the network sits at
/// each q; target components are q's. Masked: each edge (q, s, q') with z =
/// q AND s; only unmasked blocks count and the target is b'. The gap is
/// mean(target) - mean(rest); std is the root of the mean within-draw
/// variance of the non-target components.
struct MeasuredH {
  double gap_unmasked = 0.0, std_unmasked = 0.0;
  double gap_masked = 0.0, std_masked = 0.0;
  std::size_t draws = 0;
};

inline MeasuredH measure_h_stats(const Dfa& d, std::size_t n, std::size_t l, std::size_t draws, const SeedTree& seeds,
                                 BuildOptions opt = {}) {
  if (draws == 0) throw InvalidArgument("measure_h_stats needs at least one draw");
  MeasuredH out;
  out.draws = draws;
  double g0 = 0, v0 = 0, g1 = 0, v1 = 0;
  std::size_t k0 = 0, k1 = 0;
  const auto edges = d.edges();
  Eigen::VectorXd z(static_cast<Eigen::Index>(n)), h;
  auto accumulate = [&](auto is_target, auto counted, double& gap, double& var, std::size_t& k) {
    double s = 0, s2 = 0, c = 0, sa = 0, ca = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!counted(i)) continue;
      const double x = h[static_cast<Eigen::Index>(i)];
      if (is_target(i)) {
        sa += x;
        ca += 1;
      } else {
        s += x;
        s2 += x * x;
        c += 1;
      }
    }
    if (ca == 0 || c == 0) return;
    gap += sa / ca - s / c;
    var += s2 / c - (s / c) * (s / c);
    ++k;
  };
  for (std::size_t draw = 0; draw < draws; ++draw) {
    auto rng = seeds.child(draw).stream("codebook");
    const auto cb = make_codebook(d, n, l, CodebookMode::random, rng);
    const auto w = build_weights(d, cb, opt);
    for (std::size_t q = 0; q < d.num_states(); ++q) {
      z.setZero();
      cb.q[q].for_each_active([&](std::size_t i) { z[static_cast<Eigen::Index>(i)] = 1.0; });
      h.noalias() = w.w * z;
      accumulate([&](std::size_t i) { return cb.q[q].test(i); }, [](std::size_t) { return true; }, g0, v0, k0);
    }
    for (const auto& e : edges) {
      const auto& s = cb.s[e.input];
      z.setZero();
      vsa::mask(cb.q[e.from], s).for_each_active([&](std::size_t i) { z[static_cast<Eigen::Index>(i)] = 1.0; });
      h.noalias() = w.w * z;
      accumulate([&](std::size_t i) { return cb.b[e.to].test(i); },
                 [&](std::size_t i) { return s.sign(i / l) > 0; }, g1, v1, k1);
    }
  }
  if (k0) {
    out.gap_unmasked = g0 / static_cast<double>(k0);
    out.std_unmasked = std::sqrt(v0 / static_cast<double>(k0));
  }
  if (k1) {
    out.gap_masked = g1 / static_cast<double>(k1);
    out.std_masked = std::sqrt(v1 / static_cast<double>(k1));
  }
  return out;
}

/// Asynchronous single-block descent on E = -z^T W z with W the attractor
/// term of `patterns` random states and its block diagonal zeroed. Every block
/// update picks the argmax of its field, so E must never rise.
struct DescentStats {
  std::size_t starts = 0;
  std::size_t updates = 0;
  std::size_t violations = 0;
  std::size_t converged = 0;
  double max_increase = 0.0;
};

inline DescentStats energy_descent_check(std::size_t n, std::size_t l, std::size_t patterns, std::size_t starts,
                                         std::size_t max_sweeps, const SeedTree& seeds) {
  const Dfa d = gen_moddiv_dfa(patterns);
  auto cb_rng = seeds.stream("codebook");
  const auto cb = make_codebook(d, n, l, CodebookMode::random, cb_rng);
  BuildOptions opt;
  opt.components = Components::attractor_only();
  const auto w = zero_block_diagonal(build_weights(d, cb, opt));
  const auto m = cb.blocks();
  DescentStats out;
  out.starts = starts;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < starts; ++k) {
    auto rng = seeds.child("start").child(k).rng();
    auto z = vsa::gen_sbc(n, l, rng);
    std::vector<std::uint32_t> active(z.active().begin(), z.active().end());
    double e = energy(w, z);
    // Tolerance for rounding in the full recomputation of E.
    const double tol = 1e-9 * (1.0 + std::abs(e));
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
      bool changed = false;
      std::shuffle(order.begin(), order.end(), rng);
      for (auto b : order) {
        std::uint32_t best = 0;
        double best_h = -std::numeric_limits<double>::infinity();
        for (std::uint32_t a = 0; a < l; ++a) {
          double h = 0.0;
          for (std::size_t c = 0; c < m; ++c) h += w(b * l + a, c * l + active[c]);
          if (h > best_h) {
            best_h = h;
            best = a;
          }
        }
        if (best == active[b]) continue;
        active[b] = best;
        changed = true;
        ++out.updates;
        const double e_new = energy(w, SbcHypervector(z.shape(), active));
        if (e_new > e + tol) {
          ++out.violations;
          out.max_increase = std::max(out.max_increase, e_new - e);
        }
        e = e_new;
      }
      if (!changed) {
        ++out.converged;
        break;
      }
    }
  }
  return out;
}

}  // namespace fsma
