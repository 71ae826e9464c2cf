#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "centropy/vocab.hpp"

namespace centropy {

// Token ids of one sentence, without <s>/</s> markers; consumers that need
// markers add them.
using Sentence = std::vector<int>;

enum class SplitRole { kTrain, kValid, kTest };

std::string to_string(SplitRole role);
SplitRole split_role_from_string(const std::string& s);

struct Corpus {
  std::vector<Sentence> sentences;
  std::size_t word_count = 0;  // sum of sentence lengths, markers excluded
  SplitRole role = SplitRole::kTest;
  std::size_t skipped_lines = 0;  // blank lines dropped during load

  void recount();
};

// One sentence per line, tokens separated by single spaces, UTF-8. OOV
// tokens map to unk. Blank lines are skipped and counted. Throws DataError
// on unreadable or empty files.
Corpus load_token_corpus(const std::string& path, const Vocabulary& vocab, SplitRole role);

// Encoded form: '#'-prefixed header lines, then space-separated ids, one
// sentence per line.
void save_id_corpus(const Corpus& corpus, const std::string& path, const std::string& header);
Corpus load_id_corpus(const std::string& path, SplitRole role);

void save_token_corpus(const Corpus& corpus, const Vocabulary& vocab, const std::string& path);

}  // namespace centropy
