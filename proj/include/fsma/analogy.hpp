#pragma once

// "Dollar of Mexico" analogy with three choices of role / filler encodings.
//   usa = cap*wdc + cur*dol,  mex = cap*mxc + cur*pes
// Queries: the currency of usa, and mex (unbind) usa (bind) dol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fsma/error.hpp"
#include "fsma/rng.hpp"
#include "fsma/vsa.hpp"

namespace fsma::analogy {

enum class Encoding {
  psbc_all,        // every atom pSBC, LCC binding
  sbc_roles,       // roles SBC, fillers bMAP, Hadamard binding
  bmap_roles,      // roles bMAP, fillers SBC, Hadamard binding
};

inline const char* to_string(Encoding e) {
  switch (e) {
    case Encoding::psbc_all: return "psbc";
    case Encoding::sbc_roles: return "sbc-roles";
    case Encoding::bmap_roles: return "bmap-roles";
  }
  return "?";
}

inline Encoding encoding_from_string(const std::string& s) {
  if (s == "psbc") return Encoding::psbc_all;
  if (s == "sbc-roles") return Encoding::sbc_roles;
  if (s == "bmap-roles") return Encoding::bmap_roles;
  throw InvalidArgument("unknown analogy encoding '" + s + "'");
}

inline constexpr std::array<const char*, 6> kAtoms{"cap", "cur", "wdc", "dol", "mxc", "pes"};
inline constexpr std::size_t kCap = 0, kCur = 1, kWdc = 2, kDol = 3, kMxc = 4, kPes = 5;

struct Ranking {
  std::array<double, 6> overlap{};
  std::size_t best() const {
    return static_cast<std::size_t>(std::max_element(overlap.begin(), overlap.end()) - overlap.begin());
  }
};

struct TrialResult {
  Ranking currency;  // what usa binds to cur
  Ranking analogy;   // dollar of Mexico
  bool currency_ok() const { return currency.best() == kDol; }
  bool analogy_ok() const { return analogy.best() == kPes; }
};

namespace detail {

inline Ranking rank(const vsa::DenseHypervector& q, const std::array<vsa::DenseHypervector, 6>& cand) {
  Ranking r;
  for (std::size_t i = 0; i < cand.size(); ++i) r.overlap[i] = vsa::overlap(q, cand[i]);
  return r;
}

// Atom expressed as a pSBC vector at offset 0 (bMAP atoms) or as itself.
inline vsa::DenseHypervector as_psbc(const vsa::BmapHypervector& m) {
  return vsa::hadamard_bind(vsa::SbcHypervector::identity(m.shape()), m).dense();
}

}  // namespace detail

inline TrialResult run_trial(Encoding enc, std::size_t n, std::size_t l, Rng& rng) {
  using vsa::DenseHypervector;
  std::array<DenseHypervector, 6> cand;
  DenseHypervector usa, mex, currency;
  switch (enc) {
    case Encoding::psbc_all: {
      std::array<vsa::PsbcHypervector, 6> a;
      for (auto& x : a) x = vsa::gen_psbc(n, l, rng);
      for (std::size_t i = 0; i < 6; ++i) cand[i] = a[i].dense();
      usa = vsa::lcc_bind(a[kCap], a[kWdc]).dense() + vsa::lcc_bind(a[kCur], a[kDol]).dense();
      mex = vsa::lcc_bind(a[kCap], a[kMxc]).dense() + vsa::lcc_bind(a[kCur], a[kPes]).dense();
      currency = vsa::lcc_unbind(usa, cand[kCur]);
      break;
    }
    case Encoding::sbc_roles: {
      const auto cap = vsa::gen_sbc(n, l, rng);
      const auto cur = vsa::gen_sbc(n, l, rng);
      std::array<vsa::BmapHypervector, 4> f;
      for (auto& x : f) x = vsa::gen_bmap(n, l, rng);
      cand[kCap] = cap.dense();
      cand[kCur] = cur.dense();
      for (std::size_t i = 0; i < 4; ++i) cand[kWdc + i] = detail::as_psbc(f[i]);
      usa = vsa::hadamard_bind(cap, f[0]).dense() + vsa::hadamard_bind(cur, f[1]).dense();
      mex = vsa::hadamard_bind(cap, f[2]).dense() + vsa::hadamard_bind(cur, f[3]).dense();
      currency = vsa::lcc_unbind(usa, cand[kCur]);
      break;
    }
    case Encoding::bmap_roles: {
      const auto cap = vsa::gen_bmap(n, l, rng);
      const auto cur = vsa::gen_bmap(n, l, rng);
      std::array<vsa::SbcHypervector, 4> f;
      for (auto& x : f) x = vsa::gen_sbc(n, l, rng);
      cand[kCap] = detail::as_psbc(cap);
      cand[kCur] = detail::as_psbc(cur);
      for (std::size_t i = 0; i < 4; ++i) cand[kWdc + i] = f[i].dense();
      usa = vsa::hadamard_bind(f[0], cap).dense() + vsa::hadamard_bind(f[1], cur).dense();
      mex = vsa::hadamard_bind(f[2], cap).dense() + vsa::hadamard_bind(f[3], cur).dense();
      currency = vsa::hadamard_bind(usa, cur);
      break;
    }
  }
  TrialResult out;
  out.currency = detail::rank(currency, cand);
  out.analogy = detail::rank(vsa::lcc_bind(vsa::lcc_unbind(mex, usa), cand[kDol]), cand);
  return out;
}

struct Summary {
  Encoding encoding = Encoding::psbc_all;
  std::size_t trials = 0;
  std::size_t currency_ok = 0, analogy_ok = 0;
  std::array<double, 6> mean_currency{}, mean_analogy{};
  std::array<double, 6> std_currency{}, std_analogy{};
};

inline Summary run_analogy(Encoding enc, std::size_t n, std::size_t l, std::size_t trials, const SeedTree& seeds) {
  if (trials == 0) throw InvalidArgument("analogy needs at least one trial");
  Summary s;
  s.encoding = enc;
  s.trials = trials;
  std::array<double, 6> sq_c{}, sq_a{};
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = seeds.child(to_string(enc)).child(t).rng();
    const auto r = run_trial(enc, n, l, rng);
    s.currency_ok += r.currency_ok() ? 1 : 0;
    s.analogy_ok += r.analogy_ok() ? 1 : 0;
    for (std::size_t i = 0; i < 6; ++i) {
      s.mean_currency[i] += r.currency.overlap[i];
      s.mean_analogy[i] += r.analogy.overlap[i];
      sq_c[i] += r.currency.overlap[i] * r.currency.overlap[i];
      sq_a[i] += r.analogy.overlap[i] * r.analogy.overlap[i];
    }
  }
  const double k = static_cast<double>(trials);
  for (std::size_t i = 0; i < 6; ++i) {
    s.mean_currency[i] /= k;
    s.mean_analogy[i] /= k;
    s.std_currency[i] = std::sqrt(std::max(0.0, sq_c[i] / k - s.mean_currency[i] * s.mean_currency[i]));
    s.std_analogy[i] = std::sqrt(std::max(0.0, sq_a[i] / k - s.mean_analogy[i] * s.mean_analogy[i]));
  }
  return s;
}

}  // namespace fsma::analogy
