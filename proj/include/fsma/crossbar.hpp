#pragma once

// Emulated 1T1R crossbar holding a 64 x 64 ternary weight matrix on a
// 32 x 128 device grid. Device (r, c) with c < 64 stores the synapse from
// presynaptic neuron r to postsynaptic neuron c; device (r, 64 + c) stores the
// synapse from presynaptic 32 + r to postsynaptic c. A read drives the two
// halves separately and sums the per-line currents.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/weights.hpp"

namespace fsma::xbar {

inline constexpr std::size_t kLogical = 64;
inline constexpr std::size_t kRows = 32;
inline constexpr std::size_t kCols = 128;

enum class FaultKind { ok, stuck_low, stuck_high };

inline const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::ok: return "ok";
    case FaultKind::stuck_low: return "stuck_low";
    case FaultKind::stuck_high: return "stuck_high";
  }
  return "?";
}

inline FaultKind fault_from_string(const std::string& s) {
  if (s == "ok") return FaultKind::ok;
  if (s == "stuck_low") return FaultKind::stuck_low;
  if (s == "stuck_high") return FaultKind::stuck_high;
  throw InvalidArgument("unknown fault kind '" + s + "'");
}

/// A fault on one device, or on a whole device row when col is empty.
struct Fault {
  std::size_t row = 0;
  std::optional<std::size_t> col;
  FaultKind kind = FaultKind::stuck_low;
};

struct CrossbarConfig {
  double programming_cv = 0.1;
  double relaxation_cv = 0.05;
  /// Read noise std as a fraction of the top conductance level.
  double read_std = 0.05;
  /// Conductance of the top ternary level (arbitrary units).
  double top_level = 1.0;
  /// Conductances of stuck devices, in units of top_level.
  double stuck_low_level = 0.0;
  double stuck_high_level = 2.0;
  std::vector<Fault> faults;

  void validate() const {
    if (programming_cv < 0 || relaxation_cv < 0 || read_std < 0) throw InvalidArgument("noise levels must be >= 0");
    if (!(top_level > 0)) throw InvalidArgument("top_level must be positive");
    for (const auto& f : faults) {
      if (f.row >= kRows || (f.col && *f.col >= kCols)) {
        throw InvalidArgument("fault at (" + std::to_string(f.row) + ", " +
                              (f.col ? std::to_string(*f.col) : std::string("*")) + ") is outside the 32 x 128 grid");
      }
    }
  }

  static CrossbarConfig zero_noise() {
    CrossbarConfig c;
    c.programming_cv = c.relaxation_cv = c.read_std = 0.0;
    return c;
  }
};

inline nlohmann::json to_json(const CrossbarConfig& c) {
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : c.faults) {
    nlohmann::json col = f.col ? nlohmann::json(*f.col) : nlohmann::json("*");
    faults.push_back({{"row", f.row}, {"col", col}, {"kind", to_string(f.kind)}});
  }
  return {{"rows", kRows},
          {"cols", kCols},
          {"programming_cv", c.programming_cv},
          {"relaxation_cv", c.relaxation_cv},
          {"read_std", c.read_std},
          {"top_level", c.top_level},
          {"stuck_low_level", c.stuck_low_level},
          {"stuck_high_level", c.stuck_high_level},
          {"faults", faults}};
}

inline CrossbarConfig crossbar_config_from_json(const nlohmann::json& j) {
  CrossbarConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "rows" || key == "cols") {
        const auto want = key == "rows" ? kRows : kCols;
        if (v.get<std::size_t>() != want) throw InvalidArgument("crossbar " + key + " must be " + std::to_string(want));
      } else if (key == "programming_cv") {
        c.programming_cv = v.get<double>();
      } else if (key == "relaxation_cv") {
        c.relaxation_cv = v.get<double>();
      } else if (key == "read_std") {
        c.read_std = v.get<double>();
      } else if (key == "top_level") {
        c.top_level = v.get<double>();
      } else if (key == "stuck_low_level") {
        c.stuck_low_level = v.get<double>();
      } else if (key == "stuck_high_level") {
        c.stuck_high_level = v.get<double>();
      } else if (key == "faults") {
        for (const auto& f : v) {
          Fault x;
          x.row = f.at("row").get<std::size_t>();
          const auto& col = f.at("col");
          if (col.is_string()) {
            if (col.get<std::string>() != "*") throw InvalidArgument("fault col must be an index or \"*\"");
          } else {
            x.col = col.get<std::size_t>();
          }
          x.kind = fault_from_string(f.at("kind").get<std::string>());
          c.faults.push_back(x);
        }
      } else {
        throw ConfigError("unknown crossbar key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("crossbar config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Device coordinates of the synapse pre -> post.
struct DeviceIndex {
  std::size_t row, col;
};
inline DeviceIndex device_of(std::size_t pre, std::size_t post) {
  return pre < kRows ? DeviceIndex{pre, post} : DeviceIndex{pre - kRows, kLogical + post};
}

struct ReadResult {
  std::vector<double> currents;  // one per postsynaptic line
};

class Crossbar {
 public:
  explicit Crossbar(CrossbarConfig cfg = {}) : cfg_(std::move(cfg)) {
    cfg_.validate();
    g_.setZero(kRows, kCols);
    target_.setZero(kRows, kCols);
    fault_.assign(kRows * kCols, FaultKind::ok);
    for (const auto& f : cfg_.faults) {
      if (f.col) {
        fault_[f.row * kCols + *f.col] = f.kind;
      } else {
        for (std::size_t c = 0; c < kCols; ++c) fault_[f.row * kCols + c] = f.kind;
      }
    }
    apply_faults();
  }

  const CrossbarConfig& config() const noexcept { return cfg_; }
  const Eigen::MatrixXd& conductance() const noexcept { return g_; }
  const Eigen::MatrixXd& target() const noexcept { return target_; }
  FaultKind fault(std::size_t row, std::size_t col) const { return fault_[row * kCols + col]; }

  /// Programs a 64 x 64 ternary matrix. Within-block synapses get level 0.
  /// g = top * level * (1 + e_prog) * (1 + e_relax), clipped at zero.
  void program(const WeightMatrix& w, Rng& rng) {
    if (w.provenance != Provenance::ternary) throw InvalidArgument("crossbar expects ternary weights");
    if (w.shape.n != kLogical) {
      throw DimensionMismatch("crossbar holds a 64 x 64 matrix, got " + std::to_string(w.shape.n));
    }
    std::normal_distribution<double> prog(0.0, 1.0);
    const std::size_t l = w.shape.l;
    for (std::size_t pre = 0; pre < kLogical; ++pre) {
      for (std::size_t post = 0; post < kLogical; ++post) {
        const auto d = device_of(pre, post);
        const double level = (pre / l == post / l) ? 0.0 : w(post, pre);
        target_(d.row, d.col) = level;
        const double e1 = cfg_.programming_cv * prog(rng);
        const double e2 = cfg_.relaxation_cv * prog(rng);
        g_(d.row, d.col) = std::max(0.0, cfg_.top_level * level * (1.0 + e1) * (1.0 + e2));
      }
    }
    apply_faults();
  }

  /// Two partial reads (first 32 inputs on lines 0..63, last 32 on lines
  /// 64..127), each with independent read noise per line, summed per neuron.
  ReadResult read_mvm(std::span<const std::uint8_t> spikes, Rng& rng) const {
    if (spikes.size() != kLogical) throw DimensionMismatch("crossbar read expects 64 inputs");
    std::normal_distribution<double> noise(0.0, cfg_.read_std * cfg_.top_level);
    const bool noisy = cfg_.read_std > 0;
    ReadResult out;
    out.currents.assign(kLogical, 0.0);
    for (std::size_t half = 0; half < 2; ++half) {
      for (std::size_t c = 0; c < kLogical; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < kRows; ++r) {
          if (spikes[half * kRows + r]) acc += g_(r, half * kLogical + c);
        }
        if (noisy) acc += noise(rng);
        out.currents[c] += acc;
      }
    }
    return out;
  }

  /// Mean conductance over healthy devices programmed to the top level.
  double mean_top_current() const {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t r = 0; r < kRows; ++r) {
      for (std::size_t c = 0; c < kCols; ++c) {
        if (target_(r, c) == 1.0 && fault_[r * kCols + c] == FaultKind::ok) {
          s += g_(r, c);
          ++k;
        }
      }
    }
    return k ? s / static_cast<double>(k) : 0.0;
  }

  /// Programmed conductances in the logical 64 x 64 layout, w(post, pre).
  Eigen::MatrixXd logical_conductance() const {
    Eigen::MatrixXd out(kLogical, kLogical);
    for (std::size_t pre = 0; pre < kLogical; ++pre) {
      for (std::size_t post = 0; post < kLogical; ++post) {
        const auto d = device_of(pre, post);
        out(post, pre) = g_(d.row, d.col);
      }
    }
    return out;
  }

 private:
  void apply_faults() {
    for (std::size_t r = 0; r < kRows; ++r) {
      for (std::size_t c = 0; c < kCols; ++c) {
        const auto k = fault_[r * kCols + c];
        if (k == FaultKind::stuck_low) g_(r, c) = cfg_.stuck_low_level * cfg_.top_level;
        if (k == FaultKind::stuck_high) g_(r, c) = cfg_.stuck_high_level * cfg_.top_level;
      }
    }
  }

  CrossbarConfig cfg_;
  Eigen::MatrixXd g_;
  Eigen::MatrixXd target_;
  std::vector<FaultKind> fault_;
};

/// Synapse source for the spiking engine backed by crossbar reads. Currents
/// are divided by the mean top-level current, so one top-level device maps to
/// one unit of weight. Both halves are read whenever any neuron spikes.
class CrossbarSynapses {
 public:
  /// `logical` is the programmed ternary matrix; its between-block mean |w|
  /// calibrates w_scale. `read_log`, when set, receives every read.
  CrossbarSynapses(const Crossbar& xb, const WeightMatrix& logical, Rng& read_rng)
      : xb_(&xb), shape_(logical.shape), rng_(&read_rng), spikes_(kLogical, 0) {
    const double top = xb.mean_top_current();
    if (!(top > 0)) throw SimulationError("crossbar has no healthy top-level devices to calibrate against");
    inv_top_ = 1.0 / top;
    const auto w = zero_block_diagonal(logical).w;
    const double off_block = static_cast<double>(shape_.n) * static_cast<double>(shape_.n - shape_.l);
    mean_abs_ = w.cwiseAbs().sum() / off_block;
  }

  const vsa::BlockShape& shape() const noexcept { return shape_; }
  double mean_abs_weight() const noexcept { return mean_abs_; }
  double current_scale(double w_scale) const noexcept { return w_scale * inv_top_; }

  void deliver(std::span<const std::uint32_t> spikes, std::span<double> j, double gain) {
    std::fill(spikes_.begin(), spikes_.end(), std::uint8_t{0});
    for (auto s : spikes) spikes_[s] = 1;
    const auto r = xb_->read_mvm(spikes_, *rng_);
    for (std::size_t c = 0; c < kLogical; ++c) j[c] += gain * (r.currents[c] * inv_top_);
    ++reads_;
    if (log_) log_->push_back(r.currents);
  }

  std::size_t reads() const noexcept { return reads_; }
  void set_read_log(std::vector<std::vector<double>>* log) { log_ = log; }

 private:
  const Crossbar* xb_;
  vsa::BlockShape shape_;
  Rng* rng_;
  std::vector<std::uint8_t> spikes_;
  double inv_top_ = 1.0;
  double mean_abs_ = 0.0;
  std::size_t reads_ = 0;
  std::vector<std::vector<double>>* log_ = nullptr;
};

}  // namespace fsma::xbar
