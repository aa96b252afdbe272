#pragma once

// Embedding a DFA into a recurrent weight matrix, plus the weight transforms
// used to model low-precision and noisy synapses.
//
//   W_attr  = sum_q (q - f)(q - f)^T
//   W_brdg  = sum_q [ (q - f)(b - f)^T + sum_s (b - q)((b - f) o s)^T ]
//   W_trans = sum_{(q,s,q') non-loop} (b' - q)((q - f) o s)^T
//
// with s the bipolar input vector and f = 1/L (0 for orthogonal codebooks).

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsma/codebook.hpp"
#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/vsa.hpp"

namespace fsma {

using vsa::BlockShape;
using vsa::BmapHypervector;
using vsa::SbcHypervector;

enum class CodebookMode { random, orthogonal };

inline const char* to_string(CodebookMode m) { return m == CodebookMode::random ? "random" : "orthogonal"; }

/// Hypervectors assigned to a DFA: attractor q and bridge b per state, a
/// block-constant mask per input. Indexed like the DFA's states and inputs.
struct EmbeddingCodebook {
  BlockShape shape;
  CodebookMode mode = CodebookMode::random;
  std::vector<SbcHypervector> q;
  std::vector<SbcHypervector> b;
  std::vector<BmapHypervector> s;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;

  double f() const noexcept { return mode == CodebookMode::orthogonal ? 0.0 : shape.coding_level(); }
  std::size_t blocks() const noexcept { return shape.blocks(); }

  void check_covers(const Dfa& d) const {
    if (q.size() < d.num_states() || b.size() < d.num_states()) {
      throw InvalidArgument("codebook is missing state vectors: have " + std::to_string(q.size()) + ", need " +
                            std::to_string(d.num_states()));
    }
    if (s.size() < d.num_inputs()) {
      throw InvalidArgument("codebook is missing input vectors: have " + std::to_string(s.size()) + ", need " +
                            std::to_string(d.num_inputs()));
    }
  }
};

namespace detail {

/// Rows of the Sylvester-Hadamard matrix of order m (m a power of two).
inline std::vector<std::int8_t> hadamard_row(std::size_t m, std::size_t row) {
  std::vector<std::int8_t> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = (std::popcount(row & j) % 2) ? -1 : 1;
  return out;
}

}  // namespace detail

/// Draws a codebook for `d`. Random mode draws every vector independently
/// (states' q, then b, then inputs). Orthogonal mode gives every q and b a
/// distinct offset in each block, so all of them have zero mutual overlap
/// (needs 2|Q| <= L); inputs are distinct balanced Walsh-Hadamard rows when M
/// is a power of two, balanced random sign patterns otherwise.
inline EmbeddingCodebook make_codebook(const Dfa& d, std::size_t n, std::size_t l, CodebookMode mode, Rng& rng) {
  EmbeddingCodebook cb;
  cb.shape = vsa::make_shape(n, l);
  cb.mode = mode;
  cb.state_names = d.states();
  cb.input_names = d.inputs();
  const std::size_t nq = d.num_states();
  const std::size_t m = cb.shape.blocks();

  if (mode == CodebookMode::random) {
    for (std::size_t i = 0; i < nq; ++i) cb.q.push_back(vsa::gen_sbc(n, l, rng));
    for (std::size_t i = 0; i < nq; ++i) cb.b.push_back(vsa::gen_sbc(n, l, rng));
    for (std::size_t i = 0; i < d.num_inputs(); ++i) cb.s.push_back(vsa::gen_bmap(n, l, rng));
    return cb;
  }

  if (2 * nq > l) {
    throw InvalidArgument("orthogonal codebook needs 2|Q| <= L (|Q| = " + std::to_string(nq) +
                          ", L = " + std::to_string(l) + ")");
  }
  std::vector<std::vector<std::uint32_t>> offsets(2 * nq, std::vector<std::uint32_t>(m));
  std::vector<std::uint32_t> perm(l);
  for (std::size_t blk = 0; blk < m; ++blk) {
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < 2 * nq; ++k) offsets[k][blk] = perm[k];
  }
  for (std::size_t i = 0; i < nq; ++i) cb.q.emplace_back(cb.shape, offsets[i]);
  for (std::size_t i = 0; i < nq; ++i) cb.b.emplace_back(cb.shape, offsets[nq + i]);

  const bool pow2 = m >= 2 && std::has_single_bit(m);
  if (pow2 && d.num_inputs() <= m - 1) {
    std::vector<std::size_t> rows(m - 1);
    std::iota(rows.begin(), rows.end(), std::size_t{1});
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < d.num_inputs(); ++i) cb.s.emplace_back(cb.shape, detail::hadamard_row(m, rows[i]));
  } else {
    for (std::size_t i = 0; i < d.num_inputs(); ++i) {
      std::vector<std::int8_t> signs(m, -1);
      std::fill(signs.begin(), signs.begin() + static_cast<std::ptrdiff_t>((m + 1) / 2), std::int8_t{1});
      std::shuffle(signs.begin(), signs.end(), rng);
      cb.s.emplace_back(cb.shape, std::move(signs));
    }
  }
  return cb;
}

/// Named view: "q:<state>", "b:<state>", "s:<input>".
inline vsa::Codebook to_named_codebook(const EmbeddingCodebook& cb, std::uint64_t seed) {
  vsa::Codebook out(cb.shape, seed);
  for (std::size_t i = 0; i < cb.q.size(); ++i) out.add("q:" + cb.state_names.at(i), cb.q[i]);
  for (std::size_t i = 0; i < cb.b.size(); ++i) out.add("b:" + cb.state_names.at(i), cb.b[i]);
  for (std::size_t i = 0; i < cb.s.size(); ++i) out.add("s:" + cb.input_names.at(i), cb.s[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Outer-product terms

enum class TermKind { attractor, bridge, bridge_input, transition };

/// One rank-1 term u v^T with
///   u = u_pos - (u_neg ? u_neg : f)
///   v = (v_vec - f) o sign        (sign omitted = all +1)
/// Pointers refer into the codebook the term was made from.
struct OuterTerm {
  TermKind kind;
  const SbcHypervector* u_pos;
  const SbcHypervector* u_neg;
  const SbcHypervector* v_vec;
  const BmapHypervector* sign;
};

struct Components {
  bool attractor = true;
  bool bridge = true;
  bool transition = true;

  static constexpr Components all() { return {}; }
  static constexpr Components attractor_only() { return {true, false, false}; }
  static constexpr Components bridge_only() { return {false, true, false}; }
  static constexpr Components transition_only() { return {false, false, true}; }
};

/// Terms in canonical order: attractors; then per state its bridge term
/// followed by one term per input; then transitions in edge order. With
/// `incoming_only` the per-input bridge terms of a state are restricted to
/// the inputs that label its incoming non-loop edges.
inline std::vector<OuterTerm> weight_terms(const Dfa& d, const EmbeddingCodebook& cb,
                                           Components which = Components::all(), bool incoming_only = false) {
  cb.check_covers(d);
  std::vector<OuterTerm> out;
  if (which.attractor) {
    for (std::size_t i = 0; i < d.num_states(); ++i)
      out.push_back({TermKind::attractor, &cb.q[i], nullptr, &cb.q[i], nullptr});
  }
  if (which.bridge) {
    for (std::size_t i = 0; i < d.num_states(); ++i) {
      out.push_back({TermKind::bridge, &cb.q[i], nullptr, &cb.b[i], nullptr});
      std::vector<std::size_t> ins(d.num_inputs());
      std::iota(ins.begin(), ins.end(), std::size_t{0});
      if (incoming_only) ins = d.incoming_inputs(i);
      for (auto k : ins) out.push_back({TermKind::bridge_input, &cb.b[i], &cb.q[i], &cb.b[i], &cb.s[k]});
    }
  }
  if (which.transition) {
    for (const auto& e : d.edges())
      out.push_back({TermKind::transition, &cb.b[e.to], &cb.q[e.from], &cb.q[e.from], &cb.s[e.input]});
  }
  return out;
}

inline Eigen::VectorXd term_u(const OuterTerm& t, double f) {
  const auto n = static_cast<Eigen::Index>(t.u_pos->dim());
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, t.u_neg ? 0.0 : -f);
  t.u_pos->for_each_active([&](std::size_t i) { u[static_cast<Eigen::Index>(i)] += 1.0; });
  if (t.u_neg) t.u_neg->for_each_active([&](std::size_t i) { u[static_cast<Eigen::Index>(i)] -= 1.0; });
  return u;
}

inline Eigen::VectorXd term_v(const OuterTerm& t, double f) {
  const auto n = static_cast<Eigen::Index>(t.v_vec->dim());
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, -f);
  t.v_vec->for_each_active([&](std::size_t i) { v[static_cast<Eigen::Index>(i)] += 1.0; });
  if (t.sign) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] *= t.sign->value(static_cast<std::size_t>(i));
  }
  return v;
}

/// v . z for a (possibly relaxed) sparse block state z.
inline double term_v_dot(const OuterTerm& t, const SbcHypervector& z, double f) {
  double acc = 0.0;
  const auto vz = t.v_vec->active();
  const auto zz = z.active();
  for (std::size_t k = 0; k < zz.size(); ++k) {
    if (zz[k] == vsa::kSilent) continue;
    const double val = (vz[k] == zz[k] ? 1.0 : 0.0) - f;
    acc += t.sign ? val * t.sign->sign(k) : val;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Weight matrices

enum class Provenance { ideal, binarized, noisy, ternary, fixed_point };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ideal: return "ideal";
    case Provenance::binarized: return "binarized";
    case Provenance::noisy: return "noisy";
    case Provenance::ternary: return "ternary";
    case Provenance::fixed_point: return "fixed_point";
  }
  return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::ideal, Provenance::binarized, Provenance::noisy, Provenance::ternary,
                 Provenance::fixed_point}) {
    if (s == to_string(p)) return p;
  }
  throw InvalidArgument("unknown provenance '" + s + "'");
}

/// Dense recurrent weights, w(i, j) = weight from presynaptic j to postsynaptic i.
struct WeightMatrix {
  Eigen::MatrixXd w;
  BlockShape shape;
  Provenance provenance = Provenance::ideal;
  double f_used = 0.0;

  std::size_t n() const noexcept { return shape.n; }
  double operator()(std::size_t i, std::size_t j) const {
    return w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

struct BuildOptions {
  Components components = Components::all();
  /// Accumulate rank-1 terms one at a time in canonical order instead of one
  /// blocked matrix product. Slower; makes the result independent of BLAS
  /// kernel choice.
  bool bit_exact = false;
  /// Bridge input terms only for inputs on a state's incoming edges.
  bool bridge_incoming_only = false;
};

inline WeightMatrix build_weights(const Dfa& d, const EmbeddingCodebook& cb, BuildOptions opt = {}) {
  const auto terms = weight_terms(d, cb, opt.components, opt.bridge_incoming_only);
  const double f = cb.f();
  const auto n = static_cast<Eigen::Index>(cb.shape.n);
  WeightMatrix out{Eigen::MatrixXd::Zero(n, n), cb.shape, Provenance::ideal, f};
  if (terms.empty()) return out;
  if (opt.bit_exact) {
    for (const auto& t : terms) {
      const Eigen::VectorXd u = term_u(t, f);
      const Eigen::VectorXd v = term_v(t, f);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double vj = v[j];
        for (Eigen::Index i = 0; i < n; ++i) out.w(i, j) += u[i] * vj;
      }
    }
    return out;
  }
  const auto k = static_cast<Eigen::Index>(terms.size());
  Eigen::MatrixXd a(n, k), b(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    a.col(c) = term_u(terms[static_cast<std::size_t>(c)], f);
    b.col(c) = term_v(terms[static_cast<std::size_t>(c)], f);
  }
  out.w.noalias() = a * b.transpose();
  return out;
}

struct MatrixStats {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  double mean_abs = 0.0;
};

inline MatrixStats matrix_stats(const Eigen::MatrixXd& w) {
  MatrixStats s;
  const double count = static_cast<double>(w.size());
  if (count == 0) return s;
  s.mean = w.mean();
  s.std = std::sqrt((w.array() - s.mean).square().sum() / count);
  s.mean_abs = w.cwiseAbs().mean();
  return s;
}

inline void require_finite(const WeightMatrix& w) {
  if (!w.w.allFinite()) throw SimulationError("weight matrix has non-finite entries");
}

/// Same matrix with the L x L diagonal blocks (within-block synapses) set to zero.
inline WeightMatrix zero_block_diagonal(WeightMatrix w) {
  const auto l = static_cast<Eigen::Index>(w.shape.l);
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(w.shape.blocks()); ++b) w.w.block(b * l, b * l, l, l).setZero();
  return w;
}

/// Each entry becomes 1 with probability sigmoid(beta (w - <w>) / sigma_w), else 0.
inline WeightMatrix binarize_stochastic(const WeightMatrix& w, double beta, Rng& rng) {
  if (w.provenance != Provenance::ideal) throw InvalidArgument("binarization expects ideal weights");
  const auto st = matrix_stats(w.w);
  WeightMatrix out{Eigen::MatrixXd::Zero(w.w.rows(), w.w.cols()), w.shape, Provenance::binarized, w.f_used};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double scale = st.std > 0 ? beta / st.std : 0.0;
  const double* src = w.w.data();
  double* dst = out.w.data();
  for (Eigen::Index i = 0; i < w.w.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-scale * (src[i] - st.mean)));
    dst[i] = unif(rng) < p ? 1.0 : 0.0;
  }
  return out;
}

/// w -> |w + chi| with chi ~ N(0, sigma^2) independently per entry.
inline WeightMatrix add_weight_noise(const WeightMatrix& w, double sigma, Rng& rng) {
  if (sigma < 0) throw InvalidArgument("noise sigma must be non-negative");
  WeightMatrix out = w;
  out.provenance = Provenance::noisy;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  double* p = out.w.data();
  for (Eigen::Index i = 0; i < out.w.size(); ++i) p[i] = std::abs(p[i] + noise(rng));
  return out;
}

struct TernaryThresholds {
  double lo;
  double hi;
};

/// Thresholds at -/+ 0.5 sigma_w around zero.
inline TernaryThresholds default_ternary_thresholds(const WeightMatrix& w, double k = 0.5) {
  const double s = matrix_stats(w.w).std;
  return {-k * s, k * s};
}

/// Below t_lo -> 0, within [t_lo, t_hi] -> 0.5, above t_hi -> 1.
inline WeightMatrix quantize_ternary(const WeightMatrix& w, double t_lo, double t_hi) {
  if (t_lo > t_hi) throw InvalidArgument("ternary thresholds must satisfy t_lo <= t_hi");
  WeightMatrix out = w;
  out.provenance = Provenance::ternary;
  double* p = out.w.data();
  for (Eigen::Index i = 0; i < out.w.size(); ++i) p[i] = p[i] < t_lo ? 0.0 : (p[i] > t_hi ? 1.0 : 0.5);
  return out;
}

/// Clamp to <w> -/+ 4 sigma_w, map linearly onto [-254, 254], round to the nearest even integer.
inline WeightMatrix quantize_fixed_point(const WeightMatrix& w) {
  const auto st = matrix_stats(w.w);
  WeightMatrix out = w;
  out.provenance = Provenance::fixed_point;
  double* p = out.w.data();
  const double span = 4.0 * st.std;
  for (Eigen::Index i = 0; i < out.w.size(); ++i) {
    if (span == 0.0) {
      p[i] = 0.0;
      continue;
    }
    const double x = std::clamp(p[i], st.mean - span, st.mean + span);
    const double mapped = (x - st.mean) / span * 254.0;
    p[i] = std::clamp(2.0 * std::round(mapped / 2.0), -254.0, 254.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: one JSON header line, then n*n little-endian float64 row-major.

inline void write_weights(std::ostream& os, const WeightMatrix& w) {
  const nlohmann::json header{{"n", w.shape.n},
                              {"l", w.shape.l},
                              {"provenance", to_string(w.provenance)},
                              {"f_used", w.f_used}};
  os << header.dump() << '\n';
  static_assert(std::endian::native == std::endian::little, "weight files are little-endian");
  for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.w.cols(); ++j) {
      const double v = w.w(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!os) throw Error("failed to write weight matrix");
}

inline WeightMatrix read_weights(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("weight file: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weight file header: ") + e.what(), 1, 1);
  }
  WeightMatrix w;
  w.shape = vsa::make_shape(h.at("n").get<std::size_t>(), h.at("l").get<std::size_t>());
  w.provenance = provenance_from_string(h.at("provenance").get<std::string>());
  w.f_used = h.at("f_used").get<double>();
  const auto n = static_cast<Eigen::Index>(w.shape.n);
  w.w.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double v;
      if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw InvalidArgument("weight file: truncated payload");
      w.w(i, j) = v;
    }
  }
  return w;
}

inline void save_weights(const std::string& path, const WeightMatrix& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);
  write_weights(os, w);
}

inline WeightMatrix load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_weights(is);
}

}  // namespace fsma
