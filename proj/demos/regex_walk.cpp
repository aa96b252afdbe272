// Compiles a regular expression to a DFA, embeds it in an attractor network
// and checks that the network state tracks the automaton on a few words.
//
//   regex_walk [pattern] [word...]
#include <iostream>
#include <string>
#include <vector>

#include "fsma/experiment.hpp"
#include "fsma/regex.hpp"
#include "fsma/rnn.hpp"

using namespace fsma;

int main(int argc, char** argv) {
  const std::string pattern = argc > 1 ? argv[1] : "(ab|b)*a";
  std::vector<std::string> words;
  for (int i = 2; i < argc; ++i) words.emplace_back(argv[i]);
  if (words.empty()) words = {"a", "aba", "bba", "abab", "bbbba"};

  try {
    const Dfa d = regex::regex_to_dfa(pattern, "ab");
    std::cout << pattern << ": " << d.num_states() << " states\n";

    const auto net = experiment::build_network(d, {1024, 8, CodebookMode::random, false}, {}, SeedTree(7));
    rnn::DenseDrive drive(net.w);

    int bad = 0;
    for (const auto& text : words) {
      const auto word = d.parse_word(text);
      const auto r = rnn::run_walk(drive, net.cb, d, word);
      std::cout << "  " << text << " -> " << d.state_name(r.decoded) << (d.accepts(word) ? " (accept)" : " (reject)")
                << (r.success ? "" : "  MISMATCH, expected " + d.state_name(r.expected)) << '\n';
      bad += !r.success;
    }
    return bad ? 2 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
