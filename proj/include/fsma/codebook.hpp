#pragma once

// Named hypervector collections and their JSON form.

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "json.hpp"

#include "fsma/error.hpp"
#include "fsma/vsa.hpp"

namespace fsma::vsa {

using AnyHypervector = std::variant<SbcHypervector, BmapHypervector, PsbcHypervector>;

class Codebook {
 public:
  Codebook(BlockShape shape, std::uint64_t seed) : shape_(shape), seed_(seed) {}

  const BlockShape& shape() const noexcept { return shape_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::map<std::string, AnyHypervector>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  void add(const std::string& name, AnyHypervector v) {
    const auto& s = std::visit([](const auto& x) -> const BlockShape& { return x.shape(); }, v);
    require_same_shape(shape_, s, "codebook entry");
    entries_.insert_or_assign(name, std::move(v));
  }

  const AnyHypervector& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw InvalidArgument("codebook has no entry '" + name + "'");
    return it->second;
  }
  template <class T>
  const T& get(const std::string& name) const {
    const auto* p = std::get_if<T>(&at(name));
    if (!p) throw InvalidArgument("codebook entry '" + name + "' has a different kind");
    return *p;
  }

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  BlockShape shape_;
  std::uint64_t seed_;
  std::map<std::string, AnyHypervector> entries_;
};

inline nlohmann::json to_json(const Codebook& cb) {
  using nlohmann::json;
  json entries = json::object();
  for (const auto& [name, v] : cb.entries()) {
    json e;
    if (const auto* x = std::get_if<SbcHypervector>(&v)) {
      e["kind"] = "sbc";
      json idx = json::array();
      for (std::size_t b = 0; b < x->blocks(); ++b) {
        if (x->block_active(b)) idx.push_back(x->global_index(b));
        else idx.push_back(nullptr);
      }
      e["active_indices"] = idx;
    } else if (const auto* m = std::get_if<BmapHypervector>(&v)) {
      e["kind"] = "bmap";
      e["block_signs"] = std::vector<int>(m->signs().begin(), m->signs().end());
    } else {
      const auto& p = std::get<PsbcHypervector>(v);
      e["kind"] = "psbc";
      json idx = json::array();
      for (std::size_t b = 0; b < p.blocks(); ++b) {
        if (p.offset(b) == kSilent) idx.push_back(nullptr);
        else idx.push_back(b * p.shape().l + p.offset(b));
      }
      e["active_indices"] = idx;
      e["block_signs"] = std::vector<int>(p.signs().begin(), p.signs().end());
    }
    entries[name] = std::move(e);
  }
  return json{{"n", cb.shape().n}, {"l", cb.shape().l}, {"seed", cb.seed()}, {"entries", entries}};
}

inline Codebook codebook_from_json(const nlohmann::json& j) {
  try {
    const auto shape = make_shape(j.at("n").get<std::size_t>(), j.at("l").get<std::size_t>());
    Codebook cb(shape, j.at("seed").get<std::uint64_t>());
    auto offsets = [&](const nlohmann::json& idx) {
      if (idx.size() != shape.blocks()) throw InvalidArgument("active_indices: one entry per block expected");
      std::vector<std::uint32_t> out(shape.blocks(), kSilent);
      for (std::size_t b = 0; b < out.size(); ++b) {
        if (idx[b].is_null()) continue;
        const auto g = idx[b].get<std::size_t>();
        if (g / shape.l != b) throw InvalidArgument("active index " + std::to_string(g) + " outside its block");
        out[b] = static_cast<std::uint32_t>(g % shape.l);
      }
      return out;
    };
    auto signs = [&](const nlohmann::json& s) {
      std::vector<std::int8_t> out;
      for (const auto& v : s) out.push_back(static_cast<std::int8_t>(v.get<int>()));
      return out;
    };
    for (const auto& [name, e] : j.at("entries").items()) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "sbc") {
        cb.add(name, SbcHypervector(shape, offsets(e.at("active_indices"))));
      } else if (kind == "bmap") {
        cb.add(name, BmapHypervector(shape, signs(e.at("block_signs"))));
      } else if (kind == "psbc") {
        cb.add(name, PsbcHypervector(shape, offsets(e.at("active_indices")), signs(e.at("block_signs"))));
      } else {
        throw InvalidArgument("unknown hypervector kind '" + kind + "'");
      }
    }
    return cb;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed codebook: ") + e.what());
  }
}

}  // namespace fsma::vsa
