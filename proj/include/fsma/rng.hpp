#pragma once

// Seeded random streams.
//
// Every stochastic operation takes an explicit generator. Experiments derive
// their generators from one seed through named sub-streams, so adding draws to
// one stage (say, weight noise) never shifts the draws of another stage.

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace fsma {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// A node in a tree of seeds. Children are addressed by name or index.
class SeedTree {
 public:
  constexpr explicit SeedTree(std::uint64_t seed) noexcept : key_(seed) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr SeedTree child(std::string_view name) const noexcept {
    return SeedTree(detail::splitmix64(key_ ^ detail::splitmix64(detail::fnv1a(name))));
  }

  constexpr SeedTree child(std::uint64_t index) const noexcept {
    return SeedTree(detail::splitmix64(detail::splitmix64(key_) + 0x632BE59BD9B4E019ULL * (index + 1)));
  }

  Rng rng() const {
    const std::uint64_t a = detail::splitmix64(key_);
    const std::uint64_t b = detail::splitmix64(a);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
  }

  Rng stream(std::string_view name) const { return child(name).rng(); }

 private:
  std::uint64_t key_;
};

}  // namespace fsma
