#pragma once

// Leaky integrate-and-fire network with second-order synapses and block
// winner-take-all through forced refractoriness.
//
//   du/dt     = -(u - u_rest)/tau_m + I/C
//   tau dI/dt = -I + J
//   tau dJ/dt = -J + sum_j w_scale w_ij delta(t - t_j)
//
// One step: integrate (Euler), threshold, block WTA, mask clamp. Spikes
// emitted in a step reach J at the end of that step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/vsa.hpp"
#include "fsma/weights.hpp"

namespace fsma::snn {

struct SimParams {
  std::size_t n = 2048;
  std::size_t l = 8;
  double dt = 0.05;         // ms
  double tau_m = 20.0;      // ms
  double u_theta = 20.0;    // mV
  double u_rest = 25.0;     // mV
  double u_reset = 0.0;     // mV
  double c_mem = 1.0;
  double tau_syn = 20.0;    // ms
  double tau_ref = 10.0;    // ms
  double tau_readout = 10.0;  // ms
  /// Charge per unit weight. 0 means calibrate from mean_charge.
  double w_scale = 0.0;
  /// Target mean |charge| delivered by one synapse per spike.
  double mean_charge = 0.1;
  /// External current into the initial state's neurons at t = 0.
  double kick_current = 1.0;  // mV/ms
  /// Kick duration; 0 means 2 tau_syn.
  double kick_duration = 0.0;

  void validate() const {
    vsa::make_shape(n, l);
    for (double v : {dt, tau_m, tau_syn, tau_ref, tau_readout, c_mem}) {
      if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument("time constants, dt and capacitance must be positive");
    }
    if (dt > 0.1 * tau_syn) throw InvalidArgument("dt must be much smaller than tau_syn");
    if (w_scale < 0 || mean_charge < 0 || kick_current < 0 || kick_duration < 0) {
      throw InvalidArgument("w_scale, mean_charge, kick_current and kick_duration must be non-negative");
    }
  }
  double kick_ms() const { return kick_duration > 0 ? kick_duration : 2.0 * tau_syn; }
};

/// Synapses held in memory as a dense matrix. Within-block entries are dropped:
/// the block WTA replaces them.
class InMemorySynapses {
 public:
  explicit InMemorySynapses(const WeightMatrix& w) : w_(zero_block_diagonal(w).w), shape_(w.shape) {
    if (!w_.allFinite()) throw SimulationError("weight matrix has non-finite entries");
    const double off_block = static_cast<double>(shape_.n) * static_cast<double>(shape_.n - shape_.l);
    mean_abs_ = off_block > 0 ? w_.cwiseAbs().sum() / off_block : 0.0;
  }

  const vsa::BlockShape& shape() const noexcept { return shape_; }
  /// Mean |w| over between-block synapses.
  double mean_abs_weight() const noexcept { return mean_abs_; }

  /// j += gain * sum of W[:, s] over spiking s
  void deliver(std::span<const std::uint32_t> spikes, std::span<double> j, double gain) {
    sum_.setZero(w_.rows());
    for (auto s : spikes) sum_ += w_.col(static_cast<Eigen::Index>(s));
    Eigen::Map<Eigen::VectorXd> jv(j.data(), static_cast<Eigen::Index>(j.size()));
    jv += gain * sum_;
  }

 private:
  Eigen::MatrixXd w_;
  Eigen::VectorXd sum_;
  vsa::BlockShape shape_;
  double mean_abs_ = 0.0;
};

struct SpikeEvent {
  double t;  // ms
  std::uint32_t neuron;
  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

/// Neuron state. Masked or refractory neurons do not spike.
struct NeuronArray {
  std::vector<double> u, i_syn, j_syn, ref_until;
  std::vector<std::uint8_t> masked;

  NeuronArray(std::size_t n, double u0)
      : u(n, u0), i_syn(n, 0.0), j_syn(n, 0.0), ref_until(n, -1.0), masked(n, 0) {}
  std::size_t size() const noexcept { return u.size(); }
};

/// Integrates one step. `ext` (optional) is an external current per neuron.
inline void integrate(const SimParams& p, NeuronArray& nr, double t, std::span<const double> ext = {}) {
  const double a_syn = p.dt / p.tau_syn;
  const double a_m = p.dt / p.tau_m;
  const double a_c = p.dt / p.c_mem;
  for (std::size_t i = 0; i < nr.size(); ++i) {
    const double cur = nr.i_syn[i] + (ext.empty() ? 0.0 : ext[i]);
    nr.i_syn[i] += a_syn * (nr.j_syn[i] - nr.i_syn[i]);
    nr.j_syn[i] -= a_syn * nr.j_syn[i];
    if (nr.ref_until[i] > t || nr.masked[i]) {
      nr.u[i] = p.u_reset;
    } else {
      nr.u[i] += -a_m * (nr.u[i] - p.u_rest) + a_c * cur;
    }
  }
}

/// Threshold crossing plus block WTA at time t: in every block with a
/// candidate, the candidate with the largest u spikes (lowest index on ties),
/// and the whole block resets and turns refractory until t + tau_ref.
/// Returns the spiking neurons in increasing order.
inline std::vector<std::uint32_t> wta_enforce(const SimParams& p, NeuronArray& nr, double t) {
  std::vector<std::uint32_t> out;
  const std::size_t l = p.l;
  const std::size_t blocks = nr.size() / l;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t best = l;
    for (std::size_t a = 0; a < l; ++a) {
      const std::size_t i = b * l + a;
      if (nr.masked[i] || nr.ref_until[i] > t || !(nr.u[i] > p.u_theta)) continue;
      if (best == l || nr.u[i] > nr.u[b * l + best]) best = a;
    }
    if (best == l) continue;
    out.push_back(static_cast<std::uint32_t>(b * l + best));
    for (std::size_t a = 0; a < l; ++a) {
      nr.u[b * l + a] = p.u_reset;
      nr.ref_until[b * l + a] = t + p.tau_ref;
    }
  }
  return out;
}

/// Marks the neurons of blocks where the mask is negative (all clear for nullptr)
/// and clamps them to u_reset.
inline void apply_mask(const SimParams& p, NeuronArray& nr, const BmapHypervector* mask) {
  const std::size_t l = p.l;
  for (std::size_t i = 0; i < nr.size(); ++i) {
    const bool m = mask && mask->sign(i / l) < 0;
    nr.masked[i] = m ? 1 : 0;
    if (m) nr.u[i] = p.u_reset;
  }
}

inline void require_finite_state(const NeuronArray& nr, double t) {
  for (std::size_t i = 0; i < nr.size(); ++i) {
    if (!std::isfinite(nr.u[i]) || !std::isfinite(nr.i_syn[i]) || !std::isfinite(nr.j_syn[i])) {
      throw SimulationError("non-finite neuron state at t=" + std::to_string(t) + " ms, neuron " + std::to_string(i));
    }
  }
}

/// Input segment in milliseconds; no input for std::nullopt.
struct TimedSegment {
  std::optional<std::size_t> input;
  double duration;  // ms
};

/// Gap of `lead_ms`, then each symbol for on_ms followed by a gap of off_ms.
inline std::vector<TimedSegment> regular_schedule(const std::vector<std::size_t>& word, double on_ms = 200.0,
                                                  double off_ms = 200.0, double lead_ms = 200.0) {
  std::vector<TimedSegment> out;
  out.push_back({std::nullopt, lead_ms});
  for (auto s : word) {
    out.push_back({s, on_ms});
    out.push_back({std::nullopt, off_ms});
  }
  return out;
}

/// Same shape with durations drawn uniformly from [lo, hi] ms per segment.
inline std::vector<TimedSegment> irregular_schedule(const std::vector<std::size_t>& word, double lo, double hi,
                                                    Rng& rng) {
  if (!(lo > 0) || hi < lo) throw InvalidArgument("segment durations need 0 < lo <= hi");
  std::uniform_real_distribution<double> dur(lo, hi);
  std::vector<TimedSegment> out;
  out.push_back({std::nullopt, dur(rng)});
  for (auto s : word) {
    out.push_back({s, dur(rng)});
    out.push_back({std::nullopt, dur(rng)});
  }
  return out;
}

struct SpikeTrace {
  std::size_t n = 0;
  double t_end = 0.0;
  std::vector<SpikeEvent> events;
  std::vector<TimedSegment> schedule;
  double w_scale = 0.0;
};

/// Step counts per segment; each segment is rounded to whole steps.
inline std::size_t steps_for(double ms, double dt) { return static_cast<std::size_t>(std::llround(ms / dt)); }

/// Runs a spiking walk from q_{initial}. The synapse source needs shape(),
/// mean_abs_weight() and deliver(spikes, j, gain).
template <class Synapses>
SpikeTrace run_snn(const SimParams& p, Synapses& syn, const EmbeddingCodebook& cb, const Dfa& d,
                   const std::vector<TimedSegment>& schedule) {
  p.validate();
  cb.check_covers(d);
  if (syn.shape() != cb.shape || p.n != cb.shape.n || p.l != cb.shape.l) {
    throw DimensionMismatch("simulation, synapses and codebook disagree on (N, L)");
  }
  for (const auto& seg : schedule) {
    if (!(seg.duration > 0)) throw InvalidArgument("segment durations must be positive");
    if (seg.input && *seg.input >= d.num_inputs()) throw InvalidArgument("schedule refers to an unknown input");
  }

  SpikeTrace tr;
  tr.n = p.n;
  tr.schedule = schedule;
  double w_scale = p.w_scale;
  if (w_scale == 0.0) {
    const double m = syn.mean_abs_weight();
    if (!(m > 0)) throw SimulationError("cannot calibrate w_scale: all between-block weights are zero");
    w_scale = p.mean_charge / m;
  }
  tr.w_scale = w_scale;
  const double gain = w_scale / p.tau_syn;

  NeuronArray nr(p.n, p.u_reset);
  std::vector<double> kick(p.n, 0.0);
  cb.q[d.initial()].for_each_active([&](std::size_t i) { kick[i] = p.kick_current; });
  const std::size_t kick_steps = steps_for(p.kick_ms(), p.dt);
  const std::vector<double> none;

  std::size_t step = 0;
  for (const auto& seg : schedule) {
    const BmapHypervector* m = seg.input ? &cb.s.at(*seg.input) : nullptr;
    apply_mask(p, nr, m);
    const std::size_t count = steps_for(seg.duration, p.dt);
    for (std::size_t k = 0; k < count; ++k, ++step) {
      const double t = static_cast<double>(step) * p.dt;
      integrate(p, nr, t, step < kick_steps ? std::span<const double>(kick) : std::span<const double>());
      const double t_next = t + p.dt;
      auto spikes = wta_enforce(p, nr, t_next);
      apply_mask(p, nr, m);
      if (!spikes.empty()) {
        for (auto s : spikes) tr.events.push_back({t_next, s});
        syn.deliver(spikes, nr.j_syn, gain);
      }
      if ((step & 1023) == 0) require_finite_state(nr, t_next);
    }
  }
  require_finite_state(nr, static_cast<double>(step) * p.dt);
  tr.t_end = static_cast<double>(step) * p.dt;
  return tr;
}

// ---------------------------------------------------------------------------
// Readout

/// Kernel-filtered rates (per second) sampled every `sample_ms`:
/// m_v(t) = (1/M) sum_{i in v} r_i(t) for every q and b vector, plus the mean
/// active rate nu(t) = (1/M) sum_i r_i(t). Kernel: (t/tau^2) exp(-t/tau).
struct RateSeries {
  std::vector<double> t;                 // ms
  std::vector<std::vector<double>> m_q;  // [state][sample]
  std::vector<std::vector<double>> m_b;
  std::vector<double> nu;
};

inline RateSeries readout_rates(const SpikeTrace& tr, const EmbeddingCodebook& cb, std::size_t num_states,
                                double tau_readout, double sample_ms = 1.0) {
  if (!(tau_readout > 0) || !(sample_ms > 0)) throw InvalidArgument("readout time constants must be positive");
  const std::size_t n = tr.n;
  const std::size_t samples = static_cast<std::size_t>(std::floor(tr.t_end / sample_ms)) + 1;
  RateSeries out;
  out.t.resize(samples);
  out.m_q.assign(num_states, std::vector<double>(samples, 0.0));
  out.m_b.assign(num_states, std::vector<double>(samples, 0.0));
  out.nu.assign(samples, 0.0);

  // Two-state exact filter per neuron: x' = -x/tau + delta, y' = (x - y)/tau,
  // so y is the spike train convolved with (t/tau^2) e^{-t/tau}.
  std::vector<double> x(n, 0.0), y(n, 0.0), last(n, 0.0);
  auto advance = [&](std::size_t i, double to) {
    const double h = to - last[i];
    if (h <= 0) return;
    const double e = std::exp(-h / tau_readout);
    y[i] = e * (y[i] + x[i] * h / tau_readout);
    x[i] *= e;
    last[i] = to;
  };
  std::size_t ev = 0;
  const double m = static_cast<double>(cb.blocks());
  std::vector<double> r(n);
  for (std::size_t k = 0; k < samples; ++k) {
    const double ts = static_cast<double>(k) * sample_ms;
    out.t[k] = ts;
    while (ev < tr.events.size() && tr.events[ev].t <= ts) {
      const auto i = tr.events[ev].neuron;
      advance(i, tr.events[ev].t);
      x[i] += 1.0 / tau_readout;
      ++ev;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      advance(i, ts);
      r[i] = y[i] * 1000.0;  // per ms -> per s
      total += r[i];
    }
    out.nu[k] = total / m;
    for (std::size_t q = 0; q < num_states; ++q) {
      double a = 0.0, b = 0.0;
      cb.q[q].for_each_active([&](std::size_t i) { a += r[i]; });
      cb.b[q].for_each_active([&](std::size_t i) { b += r[i]; });
      out.m_q[q][k] = a / m;
      out.m_b[q][k] = b / m;
    }
  }
  return out;
}

struct DecodedState {
  std::size_t state;
  double t_enter;  // ms
  friend bool operator==(const DecodedState&, const DecodedState&) = default;
};

struct DecodedWalk {
  std::vector<DecodedState> visits;
  /// State read at the end of each no-input segment (npos when none inhabited).
  std::vector<std::size_t> at_gap_end;
  std::size_t final_state = Dfa::npos;
};

/// During no-input segments, state q is inhabited when m_q > threshold * nu and
/// m_q is the largest. `settle_ms` skips the start of each gap.
inline DecodedWalk decode_walk(const RateSeries& rs, const std::vector<TimedSegment>& schedule,
                               double threshold = 0.5, double settle_ms = 0.0) {
  DecodedWalk out;
  const std::size_t states = rs.m_q.size();
  double seg_start = 0.0;
  std::size_t k = 0;
  for (const auto& seg : schedule) {
    const double seg_end = seg_start + seg.duration;
    std::size_t last = Dfa::npos;
    for (; k < rs.t.size() && rs.t[k] < seg_end; ++k) {
      if (seg.input || rs.t[k] < seg_start + settle_ms) continue;
      std::size_t best = Dfa::npos;
      double best_m = 0.0;
      for (std::size_t q = 0; q < states; ++q) {
        if (rs.m_q[q][k] > best_m) {
          best_m = rs.m_q[q][k];
          best = q;
        }
      }
      if (best != Dfa::npos && !(best_m > threshold * rs.nu[k])) best = Dfa::npos;
      if (best != Dfa::npos && (out.visits.empty() || out.visits.back().state != best)) {
        out.visits.push_back({best, rs.t[k]});
      }
      last = best;
    }
    if (!seg.input) out.at_gap_end.push_back(last);
    seg_start = seg_end;
  }
  if (!out.at_gap_end.empty()) out.final_state = out.at_gap_end.back();
  return out;
}

}  // namespace fsma::snn
