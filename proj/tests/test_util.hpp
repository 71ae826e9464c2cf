#pragma once

#include <sstream>
#include <string>

#include "centropy/corpus.hpp"
#include "centropy/vocab.hpp"

namespace centropy::test {

inline Vocabulary make_vocab(const std::string& text, std::size_t cap = 10000) {
  std::istringstream ss(text);
  return Vocabulary::build(ss, cap);
}

// Parses newline-separated sentences against a vocabulary.
inline Corpus make_corpus(const std::string& text, const Vocabulary& vocab,
                          SplitRole role = SplitRole::kTrain) {
  Corpus corpus;
  corpus.role = role;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    Sentence s;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) s.push_back(vocab.lookup(tok));
    if (s.empty()) {
      ++corpus.skipped_lines;
      continue;
    }
    corpus.word_count += s.size();
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace centropy::test
