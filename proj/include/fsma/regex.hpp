#pragma once

// Regular expressions to minimal total DFAs.
//
// Syntax: literals, concatenation, '|', '*', '+', '?', parentheses and
// backslash escapes. Thompson NFA -> subset construction -> Hopcroft.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <iterator>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fsma/dfa.hpp"
#include "fsma/error.hpp"
#include "fsma/rng.hpp"

namespace fsma::regex {

struct Nfa {
  static constexpr int kEps = -1;
  struct Arc {
    int label;  // character code or kEps
    std::size_t to;
  };
  std::vector<std::vector<Arc>> arcs;
  std::size_t start = 0;
  std::size_t accept = 0;

  std::size_t add_state() {
    arcs.emplace_back();
    return arcs.size() - 1;
  }
};

namespace detail {

struct Fragment {
  std::size_t in, out;
};

class Parser {
 public:
  Parser(std::string_view pattern, Nfa& nfa) : p_(pattern), nfa_(nfa) {}

  Fragment parse() {
    auto f = alternation();
    if (i_ != p_.size()) fail(p_[i_] == ')' ? "unbalanced ')'" : "unexpected character");
    return f;
  }

  std::set<char> literals;

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, i_ + 1); }

  Fragment epsilon() {
    const auto a = nfa_.add_state();
    const auto b = nfa_.add_state();
    nfa_.arcs[a].push_back({Nfa::kEps, b});
    return {a, b};
  }

  Fragment alternation() {
    auto left = concatenation();
    if (i_ >= p_.size() || p_[i_] != '|') return left;
    const auto in = nfa_.add_state();
    const auto out = nfa_.add_state();
    nfa_.arcs[in].push_back({Nfa::kEps, left.in});
    nfa_.arcs[left.out].push_back({Nfa::kEps, out});
    while (i_ < p_.size() && p_[i_] == '|') {
      ++i_;
      auto right = concatenation();
      nfa_.arcs[in].push_back({Nfa::kEps, right.in});
      nfa_.arcs[right.out].push_back({Nfa::kEps, out});
    }
    return {in, out};
  }

  Fragment concatenation() {
    std::optional<Fragment> acc;
    while (i_ < p_.size() && p_[i_] != '|' && p_[i_] != ')') {
      auto f = repetition();
      if (acc) {
        nfa_.arcs[acc->out].push_back({Nfa::kEps, f.in});
        acc->out = f.out;
      } else {
        acc = f;
      }
    }
    return acc ? *acc : epsilon();
  }

  Fragment repetition() {
    auto f = atom();
    while (i_ < p_.size() && (p_[i_] == '*' || p_[i_] == '+' || p_[i_] == '?')) {
      const char op = p_[i_++];
      const auto in = nfa_.add_state();
      const auto out = nfa_.add_state();
      nfa_.arcs[in].push_back({Nfa::kEps, f.in});
      nfa_.arcs[f.out].push_back({Nfa::kEps, out});
      if (op != '+') nfa_.arcs[in].push_back({Nfa::kEps, out});
      if (op != '?') nfa_.arcs[f.out].push_back({Nfa::kEps, f.in});
      f = {in, out};
    }
    return f;
  }

  Fragment atom() {
    const char c = p_[i_];
    if (c == '(') {
      ++i_;
      auto f = alternation();
      if (i_ >= p_.size() || p_[i_] != ')') fail("missing ')'");
      ++i_;
      return f;
    }
    if (c == '*' || c == '+' || c == '?') fail("repetition operator without operand");
    char lit = c;
    if (c == '\\') {
      if (i_ + 1 >= p_.size()) fail("dangling escape");
      lit = p_[++i_];
    }
    ++i_;
    literals.insert(lit);
    const auto a = nfa_.add_state();
    const auto b = nfa_.add_state();
    nfa_.arcs[a].push_back({static_cast<unsigned char>(lit), b});
    return {a, b};
  }

  std::string_view p_;
  std::size_t i_ = 0;
  Nfa& nfa_;
};

}  // namespace detail

/// Thompson construction. `literals` receives every character used.
inline Nfa thompson(std::string_view pattern, std::set<char>* literals = nullptr) {
  Nfa nfa;
  detail::Parser parser(pattern, nfa);
  const auto f = parser.parse();
  nfa.start = f.in;
  nfa.accept = f.out;
  if (literals) *literals = parser.literals;
  return nfa;
}

/// A total DFA over an explicit alphabet, states as plain indices.
struct RawDfa {
  std::vector<char> alphabet;
  std::vector<std::vector<std::size_t>> next;  // next[state][symbol]
  std::vector<bool> accepting;
  std::size_t start = 0;
};

inline RawDfa subset_construction(const Nfa& nfa, const std::vector<char>& alphabet) {
  auto closure = [&](std::vector<std::size_t> set) {
    std::vector<bool> seen(nfa.arcs.size(), false);
    for (auto s : set) seen[s] = true;
    for (std::size_t k = 0; k < set.size(); ++k) {
      for (const auto& a : nfa.arcs[set[k]]) {
        if (a.label == Nfa::kEps && !seen[a.to]) {
          seen[a.to] = true;
          set.push_back(a.to);
        }
      }
    }
    std::sort(set.begin(), set.end());
    return set;
  };

  RawDfa out;
  out.alphabet = alphabet;
  std::map<std::vector<std::size_t>, std::size_t> ids;
  std::deque<std::vector<std::size_t>> work;
  auto intern = [&](std::vector<std::size_t> set) {
    auto [it, fresh] = ids.emplace(set, ids.size());
    if (fresh) {
      out.next.emplace_back(alphabet.size(), 0);
      out.accepting.push_back(std::binary_search(set.begin(), set.end(), nfa.accept));
      work.push_back(std::move(set));
    }
    return it->second;
  };
  out.start = intern(closure({nfa.start}));
  while (!work.empty()) {
    auto set = std::move(work.front());
    work.pop_front();
    const auto id = ids.at(set);
    for (std::size_t k = 0; k < alphabet.size(); ++k) {
      std::vector<std::size_t> moved;
      for (auto s : set) {
        for (const auto& a : nfa.arcs[s]) {
          if (a.label == static_cast<unsigned char>(alphabet[k])) moved.push_back(a.to);
        }
      }
      const auto target = intern(closure(std::move(moved)));  // empty set is the dead state
      out.next[id][k] = target;
    }
  }
  return out;
}

/// Hopcroft partition refinement followed by breadth-first renumbering from
/// the start state. Unreachable states are dropped.
inline RawDfa minimize(const RawDfa& d) {
  const std::size_t n = d.next.size();
  const std::size_t k = d.alphabet.size();

  // Restrict to reachable states first.
  std::vector<bool> reach(n, false);
  std::vector<std::size_t> order{d.start};
  reach[d.start] = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto t = d.next[order[i]][c];
      if (!reach[t]) {
        reach[t] = true;
        order.push_back(t);
      }
    }
  }

  // Inverse transitions.
  std::vector<std::vector<std::vector<std::size_t>>> inv(k, std::vector<std::vector<std::size_t>>(n));
  for (auto s : order)
    for (std::size_t c = 0; c < k; ++c) inv[c][d.next[s][c]].push_back(s);

  std::vector<std::set<std::size_t>> blocks;
  std::set<std::size_t> acc, rej;
  for (auto s : order) (d.accepting[s] ? acc : rej).insert(s);
  if (!acc.empty()) blocks.push_back(acc);
  if (!rej.empty()) blocks.push_back(rej);

  std::deque<std::pair<std::size_t, std::size_t>> work;  // (block, symbol)
  const std::size_t seed = (blocks.size() == 2 && blocks[1].size() < blocks[0].size()) ? 1 : 0;
  for (std::size_t c = 0; c < k; ++c) work.emplace_back(seed, c);

  std::vector<std::size_t> block_of(n, 0);
  auto reindex = [&] {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (auto s : blocks[b]) block_of[s] = b;
  };
  reindex();

  while (!work.empty()) {
    const auto [splitter, c] = work.front();
    work.pop_front();
    std::set<std::size_t> pre;
    for (auto t : blocks[splitter])
      for (auto s : inv[c][t]) pre.insert(s);
    std::map<std::size_t, std::vector<std::size_t>> hit;
    for (auto s : pre) hit[block_of[s]].push_back(s);
    for (auto& [b, members] : hit) {
      if (members.size() == blocks[b].size()) continue;
      std::set<std::size_t> inside(members.begin(), members.end());
      std::set<std::size_t> outside;
      std::set_difference(blocks[b].begin(), blocks[b].end(), inside.begin(), inside.end(),
                          std::inserter(outside, outside.end()));
      blocks[b] = inside;
      blocks.push_back(outside);
      const std::size_t nb = blocks.size() - 1;
      for (auto s : outside) block_of[s] = nb;
      for (std::size_t cc = 0; cc < k; ++cc) {
        const bool queued = std::find(work.begin(), work.end(), std::make_pair(b, cc)) != work.end();
        if (queued) {
          work.emplace_back(nb, cc);
        } else {
          work.emplace_back(blocks[b].size() <= blocks[nb].size() ? b : nb, cc);
        }
      }
    }
  }

  // Breadth-first renumbering of the quotient automaton.
  std::vector<std::size_t> id(blocks.size(), Dfa::npos);
  std::vector<std::size_t> rep;
  id[block_of[d.start]] = 0;
  rep.push_back(*blocks[block_of[d.start]].begin());
  for (std::size_t i = 0; i < rep.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto b = block_of[d.next[rep[i]][c]];
      if (id[b] == Dfa::npos) {
        id[b] = rep.size();
        rep.push_back(*blocks[b].begin());
      }
    }
  }
  RawDfa out;
  out.alphabet = d.alphabet;
  out.start = 0;
  out.next.assign(rep.size(), std::vector<std::size_t>(k, 0));
  out.accepting.assign(rep.size(), false);
  for (std::size_t i = 0; i < rep.size(); ++i) {
    out.accepting[i] = d.accepting[rep[i]];
    for (std::size_t c = 0; c < k; ++c) out.next[i][c] = id[block_of[d.next[rep[i]][c]]];
  }
  return out;
}

inline Dfa to_dfa(const RawDfa& d) {
  std::vector<std::string> states, inputs;
  for (std::size_t i = 0; i < d.next.size(); ++i) states.push_back("q" + std::to_string(i));
  for (char c : d.alphabet) inputs.emplace_back(1, c);
  std::vector<std::size_t> next;
  for (std::size_t i = 0; i < d.next.size(); ++i)
    for (auto t : d.next[i]) next.push_back(t);
  std::vector<std::size_t> acc;
  for (std::size_t i = 0; i < d.accepting.size(); ++i)
    if (d.accepting[i]) acc.push_back(i);
  return Dfa(std::move(states), std::move(inputs), std::move(next), d.start, std::move(acc));
}

/// Minimal total DFA for `pattern`. The alphabet defaults to the characters
/// used in the pattern; every pattern character must belong to it. States are
/// named q0, q1, ... in breadth-first order, inputs by their character.
inline Dfa regex_to_dfa(std::string_view pattern, std::string_view alphabet = {}) {
  std::set<char> used;
  const auto nfa = thompson(pattern, &used);
  std::vector<char> sigma;
  if (alphabet.empty()) {
    sigma.assign(used.begin(), used.end());
  } else {
    for (char c : alphabet)
      if (std::find(sigma.begin(), sigma.end(), c) == sigma.end()) sigma.push_back(c);
    for (char c : used) {
      if (std::find(sigma.begin(), sigma.end(), c) == sigma.end()) {
        throw ParseError(std::string("character '") + c + "' is not in the alphabet", 1,
                         pattern.find(c) == std::string_view::npos ? 1 : pattern.find(c) + 1);
      }
    }
  }
  return to_dfa(minimize(subset_construction(nfa, sigma)));
}

/// Random pattern over `alphabet` built from literals, concatenation,
/// alternation, '*', '+' and '?'. `depth` bounds the syntax tree height.
inline std::string random_regex(Rng& rng, std::string_view alphabet = "01", std::size_t depth = 4) {
  if (alphabet.empty()) throw InvalidArgument("random_regex needs a non-empty alphabet");
  std::uniform_int_distribution<std::size_t> lit(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> op(0, 5);
  auto gen = [&](auto&& self, std::size_t d) -> std::string {
    const int k = d == 0 ? 0 : op(rng);
    switch (k) {
      case 1:
      case 2:
      case 5: return self(self, d - 1) + self(self, d - 1);
      case 3: return "(" + self(self, d - 1) + "|" + self(self, d - 1) + ")";
      case 4: {
        static constexpr char kOps[] = {'*', '+', '?'};
        std::uniform_int_distribution<int> pick(0, 2);
        return "(" + self(self, d - 1) + ")" + kOps[pick(rng)];
      }
      default: return std::string(1, alphabet[lit(rng)]);
    }
  };
  return gen(gen, depth);
}

/// Every string over `alphabet` of length 0..max_len, shortest first.
inline std::vector<std::string> all_strings(std::string_view alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (char c : alphabet) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

}  // namespace fsma::regex
