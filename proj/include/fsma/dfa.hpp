#pragma once

// Deterministic finite automata: construction, text format, symbolic walks.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fsma/error.hpp"

namespace fsma {

/// A non-loop transition q --s--> q' with q' != q.
struct Edge {
  std::size_t from;
  std::size_t input;
  std::size_t to;
  friend bool operator==(const Edge&, const Edge&) = default;
};

class Dfa {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Dfa() = default;

  /// `next[q * inputs.size() + s]` is F(q, s). Throws if F is not total.
  Dfa(std::vector<std::string> states, std::vector<std::string> inputs, std::vector<std::size_t> next,
      std::size_t initial, std::vector<std::size_t> accepting = {})
      : states_(std::move(states)), inputs_(std::move(inputs)), next_(std::move(next)), initial_(initial) {
    if (states_.empty()) throw InvalidArgument("DFA needs at least one state");
    if (next_.size() != states_.size() * inputs_.size()) throw InvalidArgument("transition table has wrong size");
    if (initial_ >= states_.size()) throw InvalidArgument("initial state out of range");
    for (std::size_t i = 0; i < next_.size(); ++i) {
      if (next_[i] >= states_.size()) {
        throw InvalidArgument("transition function is not total: missing F(" + states_[i / inputs_.size()] + ", " +
                              inputs_[i % inputs_.size()] + ")");
      }
    }
    accepting_.assign(states_.size(), false);
    for (auto a : accepting) {
      if (a >= states_.size()) throw InvalidArgument("accepting state out of range");
      accepting_[a] = true;
    }
    index_names();
  }

  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_inputs() const noexcept { return inputs_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<std::string>& inputs() const noexcept { return inputs_; }
  const std::string& state_name(std::size_t q) const { return states_.at(q); }
  const std::string& input_name(std::size_t s) const { return inputs_.at(s); }
  std::size_t initial() const noexcept { return initial_; }
  bool accepting(std::size_t q) const { return accepting_.at(q); }
  std::vector<std::size_t> accepting_states() const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < accepting_.size(); ++q)
      if (accepting_[q]) out.push_back(q);
    return out;
  }

  std::size_t next(std::size_t q, std::size_t s) const { return next_.at(q * inputs_.size() + s); }

  std::optional<std::size_t> find_state(std::string_view name) const {
    auto it = state_index_.find(std::string(name));
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_input(std::string_view name) const {
    auto it = input_index_.find(std::string(name));
    if (it == input_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t state_index(std::string_view name) const {
    if (auto q = find_state(name)) return *q;
    throw InvalidArgument("unknown state '" + std::string(name) + "'");
  }
  std::size_t input_index(std::string_view name) const {
    if (auto s = find_input(name)) return *s;
    throw UnknownSymbol("unknown input symbol '" + std::string(name) + "'");
  }

  /// Non-loop transitions in (state, input) order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t q = 0; q < states_.size(); ++q) {
      for (std::size_t s = 0; s < inputs_.size(); ++s) {
        const auto t = next(q, s);
        if (t != q) out.push_back({q, s, t});
      }
    }
    return out;
  }

  /// Distinct inputs labelling non-loop edges into q.
  std::vector<std::size_t> incoming_inputs(std::size_t q) const {
    std::vector<std::size_t> out;
    for (const auto& e : edges()) {
      if (e.to == q && std::find(out.begin(), out.end(), e.input) == out.end()) out.push_back(e.input);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// State after reading `word` from `start` (default: the initial state).
  std::size_t walk(const std::vector<std::size_t>& word, std::size_t start = npos) const {
    std::size_t q = start == npos ? initial_ : start;
    for (auto s : word) {
      if (s >= inputs_.size()) throw UnknownSymbol("input index " + std::to_string(s) + " out of range");
      q = next(q, s);
    }
    return q;
  }

  /// States visited after each symbol (not including the start state).
  std::vector<std::size_t> trajectory(const std::vector<std::size_t>& word) const {
    std::vector<std::size_t> out;
    std::size_t q = initial_;
    for (auto s : word) {
      q = next(q, s);
      out.push_back(q);
    }
    return out;
  }

  bool accepts(const std::vector<std::size_t>& word) const { return accepting_[walk(word)]; }

  /// Converts text into input indices. Whitespace-separated text is read as
  /// symbol names. Otherwise each character is a symbol: the input named by
  /// that character if it exists, else the input named "s" + character, so
  /// "1000100" addresses inputs s1 and s0 of a modular-division machine.
  std::vector<std::size_t> parse_word(std::string_view text) const {
    std::vector<std::size_t> out;
    const bool tokens = text.find_first_of(" \t\n,") != std::string_view::npos;
    if (tokens) {
      std::string buf(text);
      std::replace(buf.begin(), buf.end(), ',', ' ');
      std::istringstream in(buf);
      std::string tok;
      while (in >> tok) out.push_back(input_index(tok));
      return out;
    }
    for (char c : text) {
      const std::string one(1, c);
      if (auto s = find_input(one)) {
        out.push_back(*s);
      } else if (auto s2 = find_input("s" + one)) {
        out.push_back(*s2);
      } else {
        throw UnknownSymbol("character '" + one + "' does not name an input");
      }
    }
    return out;
  }

  std::string format_word(const std::vector<std::size_t>& word) const {
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (i) out += ' ';
      out += inputs_.at(word[i]);
    }
    return out;
  }

  friend bool operator==(const Dfa& a, const Dfa& b) {
    return a.states_ == b.states_ && a.inputs_ == b.inputs_ && a.next_ == b.next_ && a.initial_ == b.initial_ &&
           a.accepting_ == b.accepting_;
  }

 private:
  void index_names() {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!state_index_.emplace(states_[i], i).second) throw InvalidArgument("duplicate state '" + states_[i] + "'");
    }
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      if (!input_index_.emplace(inputs_[i], i).second) throw InvalidArgument("duplicate input '" + inputs_[i] + "'");
    }
  }

  std::vector<std::string> states_;
  std::vector<std::string> inputs_;
  std::vector<std::size_t> next_;
  std::size_t initial_ = 0;
  std::vector<bool> accepting_;
  std::unordered_map<std::string, std::size_t> state_index_;
  std::unordered_map<std::string, std::size_t> input_index_;
};

/// Remainder of a binary number read most-significant bit first:
/// q_n --s0--> q_{2n mod p}, q_n --s1--> q_{2n+1 mod p}.
inline Dfa gen_moddiv_dfa(std::size_t p) {
  if (p < 2) throw InvalidArgument("modulus must be at least 2");
  std::vector<std::string> states;
  for (std::size_t n = 0; n < p; ++n) states.push_back("q" + std::to_string(n));
  std::vector<std::size_t> next(p * 2);
  for (std::size_t n = 0; n < p; ++n) {
    next[n * 2 + 0] = (2 * n) % p;
    next[n * 2 + 1] = (2 * n + 1) % p;
  }
  return Dfa(std::move(states), {"s0", "s1"}, std::move(next), 0, {0});
}

/// MSB-first binary expansion of d as input indices (s0 = 0, s1 = 1). Zero maps to the empty word.
inline std::vector<std::size_t> binary_word(unsigned long long d) {
  std::vector<std::size_t> out;
  while (d) {
    out.push_back(d & 1ULL);
    d >>= 1;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Text format
//
//   # comment
//   states: q0 q1 q2
//   inputs: a b
//   initial: q0
//   accepting: q2
//   missing: self-loop | error
//   edge: q0 a q1
//   chain: q0 -a-> q1 -b-> q2
//
// `chain` lines add one edge per arrow. Without `states` / `inputs` lines the
// names are collected in order of first appearance.

namespace detail {

struct Token {
  std::string text;
  std::size_t col;  // 1-based
};

inline std::vector<Token> split_tokens(std::string_view line, std::size_t offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    out.push_back({std::string(line.substr(start, i - start)), offset + start + 1});
  }
  return out;
}

inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c != ':' && c != '#' && c != ' ' && c != '\t' && static_cast<unsigned char>(c) > 32;
  });
}

}  // namespace detail

inline Dfa parse_dfa_spec(std::string_view text) {
  using detail::Token;
  struct PendingEdge {
    Token from, input, to;
    std::size_t line;
  };

  std::vector<std::string> states, inputs;
  bool states_declared = false, inputs_declared = false;
  std::optional<Token> initial;
  std::size_t initial_line = 0;
  std::vector<std::pair<Token, std::size_t>> accepting;
  bool self_loop = false;
  std::vector<PendingEdge> edges;

  auto note = [](std::vector<std::string>& names, const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'key: value'", line_no, first + 1);
    std::string key(line.substr(first, colon - first));
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    const auto toks = detail::split_tokens(line.substr(colon + 1), colon + 1);
    for (const auto& t : toks) {
      if (!detail::valid_name(t.text) && key != "chain") throw ParseError("invalid name '" + t.text + "'", line_no, t.col);
    }

    if (key == "states" || key == "inputs") {
      auto& names = key == "states" ? states : inputs;
      (key == "states" ? states_declared : inputs_declared) = true;
      for (const auto& t : toks) {
        if (std::find(names.begin(), names.end(), t.text) != names.end()) {
          throw ParseError("duplicate name '" + t.text + "'", line_no, t.col);
        }
        names.push_back(t.text);
      }
    } else if (key == "initial") {
      if (toks.size() != 1) throw ParseError("initial takes exactly one state", line_no, colon + 2);
      initial = toks[0];
      initial_line = line_no;
    } else if (key == "accepting") {
      for (const auto& t : toks) accepting.emplace_back(t, line_no);
    } else if (key == "missing") {
      if (toks.size() != 1 || (toks[0].text != "self-loop" && toks[0].text != "error")) {
        throw ParseError("missing must be 'self-loop' or 'error'", line_no, colon + 2);
      }
      self_loop = toks[0].text == "self-loop";
    } else if (key == "edge") {
      if (toks.size() != 3) throw ParseError("edge takes 'from input to'", line_no, colon + 2);
      edges.push_back({toks[0], toks[1], toks[2], line_no});
    } else if (key == "chain") {
      if (toks.size() < 3 || toks.size() % 2 == 0) throw ParseError("chain takes 'q -s-> q ...'", line_no, colon + 2);
      for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
        const auto& arrow = toks[i].text;
        if (arrow.size() < 4 || arrow.front() != '-' || arrow.substr(arrow.size() - 2) != "->") {
          throw ParseError("expected arrow '-symbol->'", line_no, toks[i].col);
        }
        Token sym{arrow.substr(1, arrow.size() - 3), toks[i].col + 1};
        if (!detail::valid_name(sym.text)) throw ParseError("invalid symbol in arrow", line_no, toks[i].col);
        for (const auto* t : {&toks[i - 1], &toks[i + 1]}) {
          if (!detail::valid_name(t->text)) throw ParseError("invalid name '" + t->text + "'", line_no, t->col);
        }
        edges.push_back({toks[i - 1], sym, toks[i + 1], line_no});
      }
    } else {
      throw ParseError("unknown key '" + key + "'", line_no, first + 1);
    }
    if (end == text.size()) break;
  }

  if (!states_declared) {
    for (const auto& e : edges) {
      note(states, e.from.text);
      note(states, e.to.text);
    }
    if (initial) note(states, initial->text);
  }
  if (!inputs_declared) {
    for (const auto& e : edges) note(inputs, e.input.text);
  }
  if (states.empty()) throw ParseError("no states", line_no, 1);

  auto find = [](const std::vector<std::string>& names, const Token& t, std::size_t line, const char* what) {
    auto it = std::find(names.begin(), names.end(), t.text);
    if (it == names.end()) throw ParseError(std::string("unknown ") + what + " '" + t.text + "'", line, t.col);
    return static_cast<std::size_t>(it - names.begin());
  };

  constexpr std::size_t unset = Dfa::npos;
  std::vector<std::size_t> next(states.size() * inputs.size(), unset);
  for (const auto& e : edges) {
    const auto q = find(states, e.from, e.line, "state");
    const auto s = find(inputs, e.input, e.line, "input");
    const auto t = find(states, e.to, e.line, "state");
    auto& slot = next[q * inputs.size() + s];
    if (slot != unset && slot != t) {
      throw ParseError("conflicting transitions for (" + e.from.text + ", " + e.input.text + ")", e.line, e.from.col);
    }
    slot = t;
  }
  for (std::size_t q = 0; q < states.size(); ++q) {
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      auto& slot = next[q * inputs.size() + s];
      if (slot != unset) continue;
      if (!self_loop) {
        throw InvalidArgument("transition function is not total: missing F(" + states[q] + ", " + inputs[s] + ")");
      }
      slot = q;
    }
  }

  std::size_t q0 = 0;
  if (initial) q0 = find(states, *initial, initial_line, "state");
  std::vector<std::size_t> acc;
  for (const auto& [t, line] : accepting) acc.push_back(find(states, t, line, "state"));
  return Dfa(std::move(states), std::move(inputs), std::move(next), q0, std::move(acc));
}

inline std::string serialize_dfa(const Dfa& d) {
  std::ostringstream out;
  out << "states:";
  for (const auto& s : d.states()) out << ' ' << s;
  out << "\ninputs:";
  for (const auto& s : d.inputs()) out << ' ' << s;
  out << "\ninitial: " << d.state_name(d.initial()) << "\naccepting:";
  for (auto q : d.accepting_states()) out << ' ' << d.state_name(q);
  out << "\nmissing: error\n";
  for (std::size_t q = 0; q < d.num_states(); ++q) {
    for (std::size_t s = 0; s < d.num_inputs(); ++s) {
      out << "edge: " << d.state_name(q) << ' ' << d.input_name(s) << ' ' << d.state_name(d.next(q, s)) << '\n';
    }
  }
  return out.str();
}

}  // namespace fsma
