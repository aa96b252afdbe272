#pragma once

// Experiment configuration schema and a validator for the JSON Schema subset
// it uses: type, enum, properties, additionalProperties (false), required,
// minimum, exclusiveMinimum, maximum, items, minItems, maxItems, oneOf.
// "x-kinds" lists the sections each experiment kind accepts.

#include <string>
#include <string_view>
#include <vector>

#include "fsma/error.hpp"
#include "json.hpp"

namespace fsma::config {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kSchemaText = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "fsma experiment configuration",
  "version": 1,
  "type": "object",
  "additionalProperties": false,
  "required": ["kind"],
  "properties": {
    "schema_version": {"type": "integer", "enum": [1]},
    "kind": {"enum": ["walk-snn", "walk-rnn", "capacity", "crossbar", "analogy", "snr-check", "energy-check", "regex"]},
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
    "bit_exact": {"type": "boolean"},
    "dfa": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "moddiv": {"type": "integer", "minimum": 1},
        "file": {"type": "string"},
        "regex": {"type": "string"},
        "alphabet": {"type": "string"}
      },
      "oneOf": [{"required": ["moddiv"]}, {"required": ["file"]}, {"required": ["regex"]}]
    },
    "network": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 2},
        "l": {"type": "integer", "minimum": 2},
        "codebook": {"enum": ["random", "orthogonal"]},
        "bridge_incoming_only": {"type": "boolean"}
      }
    },
    "transforms": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "binarize": {"type": "number", "exclusiveMinimum": 0},
        "noise": {"type": "number", "minimum": 0},
        "ternary": {
          "oneOf": [
            {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            {"enum": ["auto"]}
          ]
        },
        "ternary_k": {"type": "number", "exclusiveMinimum": 0},
        "fixed_point": {"type": "boolean"}
      }
    },
    "snn": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "tau_m": {"type": "number", "exclusiveMinimum": 0},
        "u_theta": {"type": "number"},
        "u_rest": {"type": "number"},
        "u_reset": {"type": "number"},
        "c_mem": {"type": "number", "exclusiveMinimum": 0},
        "tau_syn": {"type": "number", "exclusiveMinimum": 0},
        "tau_ref": {"type": "number", "exclusiveMinimum": 0},
        "tau_readout": {"type": "number", "exclusiveMinimum": 0},
        "w_scale": {"type": "number", "minimum": 0},
        "mean_charge": {"type": "number", "minimum": 0},
        "kick_current": {"type": "number", "minimum": 0},
        "kick_duration": {"type": "number", "minimum": 0}
      }
    },
    "schedule": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["regular", "irregular"]},
        "on_ms": {"type": "number", "exclusiveMinimum": 0},
        "off_ms": {"type": "number", "exclusiveMinimum": 0},
        "lead_ms": {"type": "number", "exclusiveMinimum": 0},
        "lo_ms": {"type": "number", "exclusiveMinimum": 0},
        "hi_ms": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "words": {"type": "array", "items": {"type": "string"}},
    "random_words": {
      "type": "object",
      "additionalProperties": false,
      "required": ["count"],
      "properties": {
        "count": {"type": "integer", "minimum": 1},
        "min_length": {"type": "integer", "minimum": 1},
        "max_length": {"type": "integer", "minimum": 1}
      }
    },
    "decode": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "threshold": {"type": "number", "minimum": 0},
        "settle_ms": {"type": "number", "minimum": 0}
      }
    },
    "rnn": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "on_steps": {"type": "integer", "minimum": 1},
        "off_steps": {"type": "integer", "minimum": 1},
        "update": {"enum": ["synchronous", "asynchronous"]}
      }
    },
    "capacity": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 4}, "minItems": 1},
        "modes": {"type": "array", "items": {"enum": ["ideal", "binary"]}, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "words_per_trial": {"type": "integer", "minimum": 1},
        "word_length": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "l0": {"type": "integer", "minimum": 2},
        "n0": {"type": "integer", "minimum": 2},
        "threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "p_limit": {"type": "integer", "minimum": 2},
        "lookahead": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 0},
        "on_steps": {"type": "integer", "minimum": 1},
        "off_steps": {"type": "integer", "minimum": 1}
      }
    },
    "crossbar": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "rows": {"type": "integer", "enum": [32]},
        "cols": {"type": "integer", "enum": [128]},
        "programming_cv": {"type": "number", "minimum": 0},
        "relaxation_cv": {"type": "number", "minimum": 0},
        "read_std": {"type": "number", "minimum": 0},
        "top_level": {"type": "number", "exclusiveMinimum": 0},
        "stuck_low_level": {"type": "number", "minimum": 0},
        "stuck_high_level": {"type": "number", "minimum": 0},
        "faults": {
          "type": "array",
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["row", "col", "kind"],
            "properties": {
              "row": {"type": "integer", "minimum": 0, "maximum": 31},
              "col": {"oneOf": [{"type": "integer", "minimum": 0, "maximum": 127}, {"enum": ["*"]}]},
              "kind": {"enum": ["ok", "stuck_low", "stuck_high"]}
            }
          }
        }
      }
    },
    "runs": {"type": "integer", "minimum": 1},
    "analogy": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 2},
        "l": {"type": "integer", "minimum": 2},
        "trials": {"type": "integer", "minimum": 1},
        "cases": {"type": "array", "items": {"enum": ["psbc", "sbc-roles", "bmap-roles"]}, "minItems": 1}
      }
    },
    "snr": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "draws": {"type": "integer", "minimum": 2},
        "unique_incoming_inputs": {"type": "boolean"}
      }
    },
    "energy": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 2},
        "l": {"type": "integer", "minimum": 2},
        "patterns": {"type": "integer", "minimum": 1},
        "starts": {"type": "integer", "minimum": 1},
        "max_sweeps": {"type": "integer", "minimum": 1}
      }
    },
    "regex": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "patterns": {"type": "array", "items": {"type": "string"}},
        "random": {"type": "integer", "minimum": 0},
        "alphabet": {"type": "string"},
        "max_length": {"type": "integer", "minimum": 0, "maximum": 16},
        "walks": {"type": "integer", "minimum": 0},
        "max_states": {"type": "integer", "minimum": 1}
      }
    }
  },
  "x-common": ["schema_version", "kind", "seed", "out", "bit_exact"],
  "x-kinds": {
    "walk-snn": ["dfa", "network", "transforms", "snn", "schedule", "words", "random_words", "decode"],
    "walk-rnn": ["dfa", "network", "transforms", "rnn", "words", "random_words"],
    "capacity": ["capacity"],
    "crossbar": ["dfa", "network", "transforms", "snn", "schedule", "words", "decode", "crossbar", "runs"],
    "analogy": ["analogy"],
    "snr-check": ["dfa", "network", "snr"],
    "energy-check": ["energy"],
    "regex": ["regex", "network", "rnn"]
  }
})json";

inline const nlohmann::json& schema() {
  static const nlohmann::json s = nlohmann::json::parse(kSchemaText);
  return s;
}

namespace detail {

inline std::string type_of(const nlohmann::json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  return "null";
}

inline bool has_type(const nlohmann::json& v, const std::string& t) {
  const auto actual = type_of(v);
  return actual == t || (t == "number" && actual == "integer");
}

inline void check(const nlohmann::json& v, const nlohmann::json& s, const std::string& path,
                  std::vector<std::string>& errs) {
  const auto where = path.empty() ? std::string("(root)") : path;
  if (auto it = s.find("type"); it != s.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const auto& t : *it) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, it->get<std::string>());
    }
    if (!ok) {
      errs.push_back(where + ": expected " + it->dump() + ", got " + type_of(v));
      return;
    }
  }
  if (auto it = s.find("enum"); it != s.end()) {
    bool ok = false;
    for (const auto& e : *it) ok = ok || e == v;
    if (!ok) errs.push_back(where + ": " + v.dump() + " is not one of " + it->dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto it = s.find("minimum"); it != s.end() && x < it->get<double>()) {
      errs.push_back(where + ": " + v.dump() + " is below the minimum " + it->dump());
    }
    if (auto it = s.find("exclusiveMinimum"); it != s.end() && x <= it->get<double>()) {
      errs.push_back(where + ": " + v.dump() + " must be greater than " + it->dump());
    }
    if (auto it = s.find("maximum"); it != s.end() && x > it->get<double>()) {
      errs.push_back(where + ": " + v.dump() + " is above the maximum " + it->dump());
    }
  }
  if (v.is_array()) {
    if (auto it = s.find("minItems"); it != s.end() && v.size() < it->get<std::size_t>()) {
      errs.push_back(where + ": needs at least " + it->dump() + " items");
    }
    if (auto it = s.find("maxItems"); it != s.end() && v.size() > it->get<std::size_t>()) {
      errs.push_back(where + ": allows at most " + it->dump() + " items");
    }
    if (auto it = s.find("items"); it != s.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], *it, path + "[" + std::to_string(i) + "]", errs);
    }
  }
  if (v.is_object()) {
    const auto props = s.find("properties");
    for (const auto& [key, child] : v.items()) {
      const auto sub = path.empty() ? key : path + "." + key;
      if (props != s.end() && props->contains(key)) {
        check(child, (*props)[key], sub, errs);
      } else if (s.value("additionalProperties", true) == false) {
        errs.push_back(sub + ": unknown key");
      }
    }
    if (auto it = s.find("required"); it != s.end()) {
      for (const auto& r : *it) {
        if (!v.contains(r.get<std::string>())) errs.push_back(where + ": missing required key '" + r.get<std::string>() + "'");
      }
    }
  }
  if (auto it = s.find("oneOf"); it != s.end()) {
    std::size_t matches = 0;
    for (const auto& alt : *it) {
      std::vector<std::string> sub;
      check(v, alt, path, sub);
      matches += sub.empty() ? 1 : 0;
    }
    if (matches != 1) {
      errs.push_back(where + ": must match exactly one of " + std::to_string(it->size()) + " alternatives, matched " +
                     std::to_string(matches));
    }
  }
}

}  // namespace detail

/// All schema violations of `cfg`, empty when valid.
inline std::vector<std::string> schema_errors(const nlohmann::json& cfg) {
  std::vector<std::string> errs;
  const auto& s = schema();
  detail::check(cfg, s, "", errs);
  if (!errs.empty() || !cfg.is_object()) return errs;
  const auto kind = cfg.at("kind").get<std::string>();
  const auto& allowed = s["x-kinds"][kind];
  const auto& common = s["x-common"];
  for (const auto& [key, _] : cfg.items()) {
    auto listed = [&](const nlohmann::json& list) {
      for (const auto& k : list)
        if (k == key) return true;
      return false;
    };
    if (!listed(common) && !listed(allowed)) errs.push_back(key + ": not used by experiment kind '" + kind + "'");
  }
  return errs;
}

/// Throws ConfigError listing every violation.
inline void validate(const nlohmann::json& cfg) {
  const auto errs = schema_errors(cfg);
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw ConfigError(msg);
}

}  // namespace fsma::config
