#include "centropy/corpus.hpp"

#include <cassert>
#include <fstream>
#include <sstream>

#include "centropy/errors.hpp"

namespace centropy {

std::string to_string(SplitRole role) {
  switch (role) {
    case SplitRole::kTrain: return "train";
    case SplitRole::kValid: return "valid";
    case SplitRole::kTest: return "test";
  }
  return "?";
}

SplitRole split_role_from_string(const std::string& s) {
  if (s == "train") return SplitRole::kTrain;
  if (s == "valid") return SplitRole::kValid;
  if (s == "test") return SplitRole::kTest;
  throw UsageError("unknown split role: " + s);
}

void Corpus::recount() {
  word_count = 0;
  for (const auto& s : sentences) word_count += s.size();
}

namespace {

template <typename LineFn>
Corpus load_lines(const std::string& path, SplitRole role, LineFn&& parse_line) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.role = role;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;  // header/comment lines
    Sentence s = parse_line(line);
    if (s.empty()) {
      ++corpus.skipped_lines;
      continue;
    }
    corpus.word_count += s.size();
    corpus.sentences.push_back(std::move(s));
  }
  if (corpus.sentences.empty()) throw DataError("corpus has no sentences: " + path);
  return corpus;
}

}  // namespace

Corpus load_token_corpus(const std::string& path, const Vocabulary& vocab, SplitRole role) {
  return load_lines(path, role, [&vocab](const std::string& line) {
    Sentence s;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) s.push_back(vocab.lookup(tok));
    return s;
  });
}

Corpus load_id_corpus(const std::string& path, SplitRole role) {
  return load_lines(path, role, [&path](const std::string& line) {
    Sentence s;
    std::istringstream ss(line);
    long id;
    while (ss >> id) {
      if (id < 0) throw DataError("negative token id in " + path);
      s.push_back(static_cast<int>(id));
    }
    return s;
  });
}

void save_id_corpus(const Corpus& corpus, const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  if (!header.empty()) out << "# " << header << "\n";
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << "\n";
  }
}

void save_token_corpus(const Corpus& corpus, const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << vocab.token(s[i]);
    out << "\n";
  }
}

}  // namespace centropy
