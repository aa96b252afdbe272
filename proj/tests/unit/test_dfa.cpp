#include <gtest/gtest.h>

#include <regex>
#include <string>

#include "fsma/dfa.hpp"
#include "fsma/regex.hpp"
#include "fsma/rng.hpp"

using namespace fsma;

namespace {

TEST(Moddiv, WalkComputesRemainder) {
  for (std::size_t p : {3u, 7u, 23u}) {
    const auto d = gen_moddiv_dfa(p);
    EXPECT_EQ(d.num_states(), p);
    for (unsigned long long v = 0; v < 300; ++v) {
      EXPECT_EQ(d.walk(binary_word(v)), v % p) << "p=" << p << " v=" << v;
    }
  }
}

TEST(Moddiv, WordsFromText) {
  const auto d = gen_moddiv_dfa(23);
  EXPECT_EQ(d.state_name(d.walk(d.parse_word("1000100"))), "q22");  // 68 = 2*23 + 22
  EXPECT_EQ(d.state_name(d.walk(d.parse_word("1011100"))), "q0");   // 92 = 4*23
  EXPECT_EQ(d.parse_word("s1 s0"), (std::vector<std::size_t>{1, 0}));
  EXPECT_THROW(d.parse_word("102"), UnknownSymbol);
}

TEST(Moddiv, TrajectoryExcludesStart) {
  const auto d = gen_moddiv_dfa(5);
  const auto t = d.trajectory(binary_word(6));  // 1 -> 3 -> 6 mod 5
  EXPECT_EQ(t, (std::vector<std::size_t>{1, 3, 1}));
}

TEST(SpecFormat, RoundTrip) {
  const auto d = gen_moddiv_dfa(6);
  const auto text = serialize_dfa(d);
  EXPECT_EQ(parse_dfa_spec(text), d);
  EXPECT_EQ(serialize_dfa(parse_dfa_spec(text)), text);
}

TEST(SpecFormat, ChainAndSelfLoop) {
  const auto d = parse_dfa_spec(
      "states: q0 q1 q2 q3\n"
      "inputs: a b\n"
      "initial: q0\n"
      "missing: self-loop\n"
      "chain: q0 -a-> q1 -a-> q2 -b-> q3 -b-> q0\n");
  EXPECT_EQ(d.next(0, d.input_index("b")), 0u);
  EXPECT_EQ(d.walk(d.parse_word("aabb")), 0u);
  EXPECT_EQ(d.trajectory(d.parse_word("aabb")), (std::vector<std::size_t>{1, 2, 3, 0}));
  EXPECT_EQ(d.incoming_inputs(3), (std::vector<std::size_t>{1}));
}

TEST(SpecFormat, MissingEdgeIsErrorByDefault) {
  EXPECT_THROW(parse_dfa_spec("states: a b\ninputs: x\ninitial: a\nedge: a x b\n"), InvalidArgument);
}

TEST(SpecFormat, ParseErrorReportsLine) {
  try {
    parse_dfa_spec("states: a b\ninputs: x\nbogus line\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(SpecFormat, ConflictingEdgeRejected) {
  EXPECT_THROW(parse_dfa_spec("states: a b\ninputs: x\ninitial: a\nedge: a x b\nedge: a x a\nedge: b x a\n"),
               ParseError);
}

// Exhaustive comparison against std::regex on all strings up to max_len.
void expect_agrees(const std::string& pattern, std::size_t max_len = 6) {
  const auto d = regex::regex_to_dfa(pattern, "01");
  const std::regex re(pattern, std::regex::ECMAScript);
  for (const auto& s : regex::all_strings("01", max_len)) {
    std::vector<std::size_t> word;
    for (char c : s) word.push_back(d.input_index(std::string(1, c)));
    EXPECT_EQ(d.accepts(word), std::regex_match(s, re)) << pattern << " on '" << s << "'";
  }
}

TEST(Regex, EndsInZero) {
  expect_agrees("(0|1)*0");
  EXPECT_EQ(regex::regex_to_dfa("(0|1)*0", "01").num_states(), 2u);
}

TEST(Regex, MinimizedUniversal) {
  EXPECT_EQ(regex::regex_to_dfa("(0|1)*", "01").num_states(), 1u);
}

TEST(Regex, Operators) {
  for (const char* p : {"0", "01", "0|1", "(01)*", "0+1?", "(0|11)+0", "1(10)*1", "((0|1)00)?"}) expect_agrees(p);
}

TEST(Regex, RandomPatternsAgree) {
  auto rng = SeedTree(11).rng();
  for (int k = 0; k < 20; ++k) expect_agrees(regex::random_regex(rng, "01"), 7);
}

TEST(Regex, SyntaxErrors) {
  EXPECT_THROW(regex::regex_to_dfa("(01", "01"), ParseError);
  EXPECT_THROW(regex::regex_to_dfa("*0", "01"), ParseError);
}

TEST(Regex, AllStringsCount) {
  const auto s = regex::all_strings("01", 3);
  EXPECT_EQ(s.size(), 15u);  // 1 + 2 + 4 + 8
  EXPECT_EQ(s.front(), "");
}

}  // namespace
