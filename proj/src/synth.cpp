#include "centropy/synth.hpp"

#include <fstream>
#include <random>

#include "centropy/errors.hpp"
#include "centropy/rng.hpp"

namespace centropy {

std::vector<std::string> generate_synthetic_lines(const SynthConfig& cfg) {
  std::mt19937_64 rng(splitmix64(cfg.seed));
  std::uniform_int_distribution<int> pair_dist(0, cfg.n_marker_pairs - 1);
  std::uniform_int_distribution<int> middle_dist(cfg.min_middle, cfg.max_middle);
  std::uniform_int_distribution<int> tail_dist(0, cfg.max_tail);
  std::uniform_int_distribution<int> filler_dist(0, cfg.n_fillers - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto filler_name = [](int f) { return "f" + std::to_string(f); };

  std::vector<std::string> lines;
  lines.reserve(cfg.n_sentences);
  for (int n = 0; n < cfg.n_sentences; ++n) {
    int pair = pair_dist(rng);
    std::string line = "open" + std::to_string(pair);
    // Marker-conditioned third-order chain: the successor is a deterministic
    // function of the last three fillers and the opening marker, with a small
    // random-restart rate. The three-filler dependency rewards 5-gram context
    // over 3-gram context, and the marker trace rewards recurrent state.
    int prev2 = filler_dist(rng), prev1 = filler_dist(rng);
    int cur = filler_dist(rng);
    auto advance = [&]() {
      int next = unif(rng) < 0.9
                     ? (cur * 5 + prev1 * 3 + prev2 + 3 * pair + 1) % cfg.n_fillers
                     : filler_dist(rng);
      prev2 = prev1;
      prev1 = cur;
      cur = next;
    };
    int middle = middle_dist(rng);
    for (int i = 0; i < middle; ++i) {
      line += " " + filler_name(cur);
      advance();
    }
    line += " close" + std::to_string(pair);
    int tail = tail_dist(rng);
    for (int i = 0; i < tail; ++i) {
      line += " " + filler_name(cur);
      advance();
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_synthetic_corpus(const SynthConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write synthetic corpus: " + path);
  for (const auto& line : generate_synthetic_lines(cfg)) out << line << "\n";
}

}  // namespace centropy
