#pragma once

// Capacity sweeps on the discrete network: for each (N, P) cell, embed the
// mod-P divider, run random walks and record how many end in the right state.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/rnn.hpp"
#include "fsma/weights.hpp"

namespace fsma::capacity {

enum class WeightMode { ideal, binary };

inline const char* to_string(WeightMode m) { return m == WeightMode::ideal ? "ideal" : "binary"; }
inline WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "ideal") return WeightMode::ideal;
  if (s == "binary") return WeightMode::binary;
  throw InvalidArgument("unknown weight mode '" + s + "'");
}

/// Divisor of n closest to l0 * (n / n0) * (ln n0 / ln n); ties go to the larger one.
inline std::size_t scaled_block_length(std::size_t n, std::size_t l0 = 8, std::size_t n0 = 2048) {
  if (n < 2 || n0 < 2) throw InvalidArgument("scaled_block_length needs n, n0 >= 2");
  const double target = static_cast<double>(l0) * (static_cast<double>(n) / static_cast<double>(n0)) *
                        (std::log(static_cast<double>(n0)) / std::log(static_cast<double>(n)));
  std::size_t best = 1;
  double best_d = std::abs(1.0 - target);
  for (std::size_t l = 2; l <= n; ++l) {
    if (n % l) continue;
    const double d = std::abs(static_cast<double>(l) - target);
    if (d < best_d || d == best_d) {
      best = l;
      best_d = d;
    }
  }
  return best;
}

struct SweepParams {
  std::vector<std::size_t> n_list{512, 1024, 2048};
  std::vector<WeightMode> modes{WeightMode::ideal, WeightMode::binary};
  std::size_t trials = 10;
  std::size_t words_per_trial = 5;
  std::size_t word_length = 5;
  rnn::WalkSchedule schedule{};
  double beta = 2.0;
  std::size_t l0 = 8;
  std::size_t n0 = 2048;
  double threshold = 0.9;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// One trial: walks decoded correctly out of words_per_trial.
struct TrialRecord {
  std::size_t n = 0, l = 0, p = 0;
  WeightMode mode = WeightMode::ideal;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t correct = 0;
  std::size_t walks = 0;
  double success() const { return walks ? static_cast<double>(correct) / static_cast<double>(walks) : 0.0; }
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t p, WeightMode mode, std::size_t trial) {
  return SeedTree(seed).child("capacity").child(n).child(p).child(static_cast<std::uint64_t>(mode)).child(trial).key();
}

/// Runs one trial: fresh codebook and weights, random words from q0.
inline TrialRecord run_trial(std::size_t n, std::size_t p, WeightMode mode, std::size_t trial, const SweepParams& sp) {
  TrialRecord rec;
  rec.n = n;
  rec.l = scaled_block_length(n, sp.l0, sp.n0);
  rec.p = p;
  rec.mode = mode;
  rec.trial = trial;
  rec.seed = trial_seed(sp.seed, n, p, mode, trial);
  const SeedTree st(rec.seed);
  const Dfa d = gen_moddiv_dfa(p);
  auto cb_rng = st.stream("codebook");
  const auto cb = make_codebook(d, n, rec.l, CodebookMode::random, cb_rng);
  auto word_rng = st.stream("words");
  std::uniform_int_distribution<std::size_t> sym(0, d.num_inputs() - 1);
  std::vector<std::vector<std::size_t>> words(sp.words_per_trial);
  for (auto& w : words) {
    w.resize(sp.word_length);
    for (auto& s : w) s = sym(word_rng);
  }
  auto walk_rng = st.stream("walk");
  auto run_all = [&](const auto& drive) {
    for (const auto& w : words) {
      const auto r = rnn::run_walk(drive, cb, d, w, sp.schedule, &walk_rng);
      rec.correct += r.success ? 1 : 0;
      ++rec.walks;
    }
  };
  if (mode == WeightMode::ideal) {
    run_all(rnn::FactoredDrive(d, cb));
  } else {
    auto w_rng = st.stream("weights");
    run_all(rnn::DenseDrive(binarize_stochastic(build_weights(d, cb), sp.beta, w_rng)));
  }
  return rec;
}

/// Runs jobs 0..count-1 on a pool of threads.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// Mean success of each cell.
struct Cell {
  std::size_t n = 0, l = 0, p = 0;
  WeightMode mode = WeightMode::ideal;
  double success = 0.0;
};

inline Cell summarize(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw InvalidArgument("no trials to summarize");
  Cell c{trials[0].n, trials[0].l, trials[0].p, trials[0].mode, 0.0};
  std::size_t ok = 0, all = 0;
  for (const auto& t : trials) {
    ok += t.correct;
    all += t.walks;
  }
  c.success = all ? static_cast<double>(ok) / static_cast<double>(all) : 0.0;
  return c;
}

/// P grid: 2..10, then growing by 10% per step.
inline std::vector<std::size_t> default_p_grid(std::size_t p_max) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p <= std::min<std::size_t>(10, p_max); ++p) out.push_back(p);
  double p = 10;
  while (true) {
    p = std::max(p + 1.0, std::round(p * 1.1));
    if (p > static_cast<double>(p_max)) break;
    out.push_back(static_cast<std::size_t>(p));
  }
  return out;
}

/// Largest P such that every grid P' <= P reaches the threshold (0 if none).
inline std::size_t max_reliable_p(const std::vector<Cell>& cells, double threshold) {
  std::vector<Cell> sorted = cells;
  std::sort(sorted.begin(), sorted.end(), [](const Cell& a, const Cell& b) { return a.p < b.p; });
  std::size_t best = 0;
  for (const auto& c : sorted) {
    if (c.success < threshold) break;
    best = c.p;
  }
  return best;
}

struct SweepResult {
  std::vector<TrialRecord> trials;
  std::vector<Cell> cells;
  struct Summary {
    std::size_t n = 0, l = 0;
    std::size_t p_max_ideal = 0, p_max_binary = 0;
    double ratio() const {
      return p_max_binary ? static_cast<double>(p_max_ideal) / static_cast<double>(p_max_binary) : 0.0;
    }
  };
  std::vector<Summary> summary;
};

/// Adaptive sweep per (N, mode): walks up the P grid, evaluating `lookahead`
/// more grid points after the first one that misses the threshold, then stops.
/// Cells of one grid point run in parallel.
inline SweepResult capacity_sweep(const SweepParams& sp, std::size_t p_limit = 2000, std::size_t lookahead = 2) {
  if (sp.trials == 0 || sp.words_per_trial == 0) throw InvalidArgument("sweep needs trials and words");
  SweepResult out;
  const auto grid = default_p_grid(p_limit);
  for (auto n : sp.n_list) {
    SweepResult::Summary sum;
    sum.n = n;
    sum.l = scaled_block_length(n, sp.l0, sp.n0);
    for (auto mode : sp.modes) {
      std::vector<Cell> cells;
      std::size_t misses = 0;
      // Evaluate a batch of grid points at once to keep threads busy.
      std::size_t gi = 0;
      while (gi < grid.size() && misses <= lookahead) {
        const std::size_t batch = std::min<std::size_t>(4, grid.size() - gi);
        std::vector<TrialRecord> recs(batch * sp.trials);
        parallel_for(recs.size(), sp.threads, [&](std::size_t k) {
          recs[k] = run_trial(n, grid[gi + k / sp.trials], mode, k % sp.trials, sp);
        });
        for (std::size_t b = 0; b < batch && misses <= lookahead; ++b) {
          std::vector<TrialRecord> cell_trials(recs.begin() + static_cast<std::ptrdiff_t>(b * sp.trials),
                                               recs.begin() + static_cast<std::ptrdiff_t>((b + 1) * sp.trials));
          const auto c = summarize(cell_trials);
          cells.push_back(c);
          out.cells.push_back(c);
          out.trials.insert(out.trials.end(), cell_trials.begin(), cell_trials.end());
          if (c.success < sp.threshold) ++misses;
        }
        gi += batch;
      }
      const auto pm = max_reliable_p(cells, sp.threshold);
      (mode == WeightMode::ideal ? sum.p_max_ideal : sum.p_max_binary) = pm;
    }
    out.summary.push_back(sum);
  }
  auto key = [](const TrialRecord& t) { return std::tuple(t.n, static_cast<int>(t.mode), t.p, t.trial); };
  std::sort(out.trials.begin(), out.trials.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return out;
}

/// Ordinary least squares y = a + b x; returns R^2 (1 for a perfect fit).
struct LinearFit {
  double intercept = 0.0, slope = 0.0, r2 = 0.0;
};

inline LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear fit needs at least two paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw InvalidArgument("linear fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// N^2 / (ln N)^2
inline double scaling_regressor(std::size_t n) {
  const double ln = std::log(static_cast<double>(n));
  return static_cast<double>(n) * static_cast<double>(n) / (ln * ln);
}

}  // namespace fsma::capacity
