#include "centropy/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "centropy/errors.hpp"

namespace centropy {

const std::string Vocabulary::kUnkToken = "<unk>";
const std::string Vocabulary::kBosToken = "<s>";
const std::string Vocabulary::kEosToken = "</s>";

Vocabulary::Vocabulary() {
  add(kUnkToken);
  add(kBosToken);
  add(kEosToken);
}

void Vocabulary::add(const std::string& token) {
  auto [it, inserted] = token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
  if (inserted) id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(std::istream& training_text, std::size_t cap) {
  if (cap == 0) throw UsageError("vocabulary cap must be >= 1");

  struct Candidate {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Candidate> counts;
  std::uint64_t position = 0;
  std::string tok;
  while (training_text >> tok) {
    if (tok == kBosToken || tok == kEosToken) continue;  // markers never take cap slots
    auto [it, inserted] = counts.emplace(tok, Candidate{});
    if (inserted) it->second.first_seen = position;
    ++it->second.count;
    ++position;
  }
  if (position == 0) throw DataError("cannot build vocabulary from empty training text");

  std::vector<std::pair<std::string, Candidate>> ranked(counts.begin(), counts.end());
  // Ties at the cap boundary go to the earlier first occurrence, so builds
  // are deterministic.
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });
  if (ranked.size() > cap) ranked.resize(cap);

  Vocabulary vocab;
  for (const auto& [token, c] : ranked) vocab.add(token);  // "<unk>" dedupes onto id 0
  return vocab;
}

Vocabulary Vocabulary::build_from_file(const std::string& path, std::size_t cap) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open training text: " + path);
  return build(in, cap);
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

void Vocabulary::save(std::ostream& out) const {
  out << "centropy-vocab\t1\tunk=" << kUnkId << "\tbos=" << kBosId << "\teos=" << kEosId
      << "\n";
  for (int id = 0; id < size(); ++id) out << id_to_token_[id] << "\t" << id << "\n";
}

void Vocabulary::save_to_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary: " + path);
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("centropy-vocab\t1\t", 0) != 0)
    throw DataError("bad vocabulary header");
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("malformed vocabulary line: " + line);
    std::string token = line.substr(0, tab);
    int id = std::stoi(line.substr(tab + 1));
    if (id < vocab.size()) {
      if (vocab.id_to_token_[id] != token)
        throw DataError("vocabulary id mismatch for token: " + token);
      continue;  // reserved rows
    }
    if (id != vocab.size()) throw DataError("non-contiguous vocabulary ids");
    vocab.add(token);
  }
  return vocab;
}

Vocabulary Vocabulary::load_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary: " + path);
  return load(in);
}

std::uint64_t Vocabulary::content_hash() const {
  std::ostringstream ss;
  save(ss);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : ss.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace centropy
