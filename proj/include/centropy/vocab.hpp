#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace centropy {

// Bidirectional token<->id map with a frequency cap. Ids 0..2 are reserved
// for <unk>, <s> and </s>. A literal "<unk>" in the training text counts as
// a regular candidate and occupies one cap slot when frequent enough (PTB
// convention); <s>/</s> never take cap slots and are skipped as candidates.
class Vocabulary {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kNumReserved = 3;

  static const std::string kUnkToken;  // "<unk>"
  static const std::string kBosToken;  // "<s>"
  static const std::string kEosToken;  // "</s>"

  // Builds from whitespace-separated training text. The `cap` most frequent
  // tokens become in-vocabulary; ties at the boundary are broken by first
  // occurrence in the stream. Throws DataError on empty input, UsageError on
  // cap == 0.
  static Vocabulary build(std::istream& training_text, std::size_t cap);
  static Vocabulary build_from_file(const std::string& path, std::size_t cap);

  int unk_id() const { return kUnkId; }
  int bos_id() const { return kBosId; }
  int eos_id() const { return kEosId; }
  int size() const { return static_cast<int>(id_to_token_.size()); }

  // OOV tokens (and the literal marker strings, if absent) map to unk_id.
  int lookup(const std::string& token) const;
  const std::string& token(int id) const { return id_to_token_.at(id); }
  bool is_reserved(int id) const { return id == kUnkId || id == kBosId || id == kEosId; }
  // Ids eligible as substitution targets: everything except the reserved trio.
  int first_regular_id() const { return kNumReserved; }

  void save(std::ostream& out) const;
  void save_to_file(const std::string& path) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load_from_file(const std::string& path);

  // FNV-1a over the serialized form; embedded in model files so evaluation
  // can detect vocabulary mismatches.
  std::uint64_t content_hash() const;

 private:
  Vocabulary();
  void add(const std::string& token);

  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace centropy
