// Regenerates the bundled fixed-seed synthetic corpus under data/.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "centropy/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate the fixed-seed synthetic corpus"};
  std::string out_dir = "data";
  int train_sentences = 700;
  int valid_sentences = 60;
  int test_sentences = 60;
  std::uint64_t seed = 42;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--train-sentences", train_sentences, "training sentences");
  app.add_option("--valid-sentences", valid_sentences, "validation sentences");
  app.add_option("--test-sentences", test_sentences, "test sentences");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  centropy::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_sentences = train_sentences;
  centropy::write_synthetic_corpus(cfg, out_dir + "/train.txt");
  cfg.seed = seed + 1;
  cfg.n_sentences = valid_sentences;
  centropy::write_synthetic_corpus(cfg, out_dir + "/valid.txt");
  cfg.seed = seed + 2;
  cfg.n_sentences = test_sentences;
  centropy::write_synthetic_corpus(cfg, out_dir + "/test.txt");
  std::cout << "wrote train/valid/test under " << out_dir << "\n";
  return 0;
}
