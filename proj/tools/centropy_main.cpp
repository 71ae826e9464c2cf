// Command-line driver: corpus preparation, distortion, model training,
// contrastive-entropy evaluation and report/verdict emission.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "centropy/corpus.hpp"
#include "centropy/distortion.hpp"
#include "centropy/errors.hpp"
#include "centropy/kn.hpp"
#include "centropy/metrics.hpp"
#include "centropy/model_io.hpp"
#include "centropy/rnn.hpp"
#include "centropy/srnn.hpp"
#include "centropy/version.hpp"
#include "centropy/vocab.hpp"

namespace fs = std::filesystem;
using namespace centropy;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Provenance line embedded at the top of every text output.
std::string provenance(const CLI::App* cmd) {
  std::ostringstream ss;
  ss << "centropy " << CENTROPY_VERSION << " config="
     << std::hex << fnv1a(cmd->get_name() + "\n" + const_cast<CLI::App*>(cmd)->config_to_str(true, false));
  return ss.str();
}

std::string default_out_dir() {
  const char* env = std::getenv("CENTROPY_OUT_DIR");
  return env ? env : ".";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path.string());
  return out;
}

struct LoadedModel {
  std::string kind;
  std::shared_ptr<NGramModel> kn;
  std::shared_ptr<RnnModel> rnn;
  std::shared_ptr<SrnnModel> srnn;
  ScoredModel scored;
};

LoadedModel load_any_model(const std::string& path, const Vocabulary& vocab) {
  LoadedModel lm;
  lm.kind = peek_model_kind(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::uint64_t vhash = 0;
  if (lm.kind == "kn") {
    lm.kn = std::make_shared<NGramModel>(NGramModel::load(in));
    vhash = lm.kn->vocab_hash();
    auto m = lm.kn;
    lm.scored = {[m](const Sentence& s) { return m->sentence_log_prob(s); },
                 Unit::kPerWord, true, std::to_string(m->order()) + "-gram KN"};
  } else if (lm.kind == "rnn") {
    lm.rnn = std::make_shared<RnnModel>(RnnModel::load(in));
    vhash = lm.rnn->vocab_hash();
    auto m = lm.rnn;
    lm.scored = {[m](const Sentence& s) { return m->log_prob(s); }, Unit::kPerWord, true,
                 "RNN"};
  } else if (lm.kind == "srnn") {
    lm.srnn = std::make_shared<SrnnModel>(SrnnModel::load(in));
    vhash = lm.srnn->vocab_hash();
    auto m = lm.srnn;
    // Unnormalized log-score is -S(W); the partition constant cancels in H_C.
    lm.scored = {[m](const Sentence& s) { return -m->score(s); }, Unit::kPerSentence,
                 false, lm.srnn->label()};
  } else {
    throw DataError("unknown model kind '" + lm.kind + "' in " + path);
  }
  if (vhash != vocab.content_hash())
    throw DataError("model " + path + " was trained with a different vocabulary");
  return lm;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

// ---- prepare ----------------------------------------------------------

struct PrepareArgs {
  std::string train, valid, test, out;
  std::size_t cap = 10000;
};

void run_prepare(const PrepareArgs& a, const CLI::App* cmd) {
  fs::create_directories(a.out);
  Vocabulary vocab = Vocabulary::build_from_file(a.train, a.cap);
  vocab.save_to_file((fs::path(a.out) / "vocab.txt").string());

  auto stats = open_out(fs::path(a.out) / "stats.tsv");
  stats << "# " << provenance(cmd) << "\n";
  stats << "split\tsentences\ttokens\tskipped_lines\n";
  auto encode = [&](const std::string& path, SplitRole role, const std::string& name) {
    Corpus c = load_token_corpus(path, vocab, role);
    save_id_corpus(c, (fs::path(a.out) / (name + ".ids")).string(), provenance(cmd));
    stats << name << "\t" << c.sentences.size() << "\t" << c.word_count << "\t"
          << c.skipped_lines << "\n";
    if (c.skipped_lines > 0)
      std::cerr << "[centropy] warning: skipped " << c.skipped_lines << " blank lines in "
                << path << "\n";
  };
  encode(a.train, SplitRole::kTrain, "train");
  encode(a.valid, SplitRole::kValid, "valid");
  encode(a.test, SplitRole::kTest, "test");
}

// ---- distort ----------------------------------------------------------

struct DistortArgs {
  std::string corpus, vocab, out;
  double level_pct = 10.0;
  double sub_split = 0.5;
  std::uint64_t seed = 1;
};

void run_distort(const DistortArgs& a, const CLI::App* cmd) {
  Vocabulary vocab = Vocabulary::load_from_file(a.vocab);
  Corpus corpus = load_id_corpus(a.corpus, SplitRole::kTest);
  DistortionSpec spec = DistortionSpec::from_level(a.level_pct / 100.0, a.sub_split, a.seed);
  auto pairs = distort_corpus(corpus, spec, vocab);

  Corpus distorted = corpus;
  std::size_t touched = 0, subs = 0, trans = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    distorted.sentences[i] = pairs[i].distorted;
    touched += pairs[i].touched;
    subs += pairs[i].substitutions;
    trans += pairs[i].transpositions;
  }
  save_token_corpus(distorted, vocab, a.out + ".txt");

  nlohmann::json meta{{"tool", std::string("centropy ") + CENTROPY_VERSION},
                      {"provenance", provenance(cmd)},
                      {"x_none", spec.x_none},
                      {"x_sub", spec.x_sub},
                      {"x_trans", spec.x_trans},
                      {"seed", spec.seed},
                      {"source", a.corpus},
                      {"positions_touched", touched},
                      {"substitutions", subs},
                      {"transpositions", trans}};
  open_out(a.out + ".meta.json") << meta.dump(2) << "\n";
}

// ---- train ------------------------------------------------------------

struct TrainArgs {
  std::string model, train, valid, vocab, out;
  int hidden = 200;
  int classes = 50;
  int latent = 75;
  double train_distortion_pct = 10.0;
  double sub_split = 0.5;
  double lr = 0.1;
  std::optional<double> l2;
  int epochs = -1;
  int bptt = 5;
  std::uint64_t seed = 1;
  bool no_lr_decay = false;
};

void run_train(const TrainArgs& a, const CLI::App* cmd) {
  Vocabulary vocab = Vocabulary::load_from_file(a.vocab);
  Corpus train = load_id_corpus(a.train, SplitRole::kTrain);

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + a.out);

  if (a.model == "kn3" || a.model == "kn5") {
    NGramModel m = train_kn(train, a.model == "kn3" ? 3 : 5, vocab);
    m.save(out);
  } else if (a.model == "rnn") {
    if (a.valid.empty()) throw UsageError("rnn training requires --valid");
    Corpus valid = load_id_corpus(a.valid, SplitRole::kValid);
    SgdConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.l2_coefficient = a.l2.value_or(1e-6);
    cfg.max_epochs = a.epochs > 0 ? a.epochs : 30;
    cfg.seed = a.seed;
    cfg.lr_decay = !a.no_lr_decay;
    cfg.bptt_depth = a.bptt;
    std::vector<EpochLog> log;
    RnnModel m = rnn_train(train, valid, cfg, a.hidden, a.classes, vocab, &log);
    m.save(out, "hidden interpreted as 200 units in a single recurrent layer");
    auto logf = open_out(a.out + ".trainlog.tsv");
    logf << "# " << provenance(cmd) << "\n";
    logf << "epoch\ttrain_entropy\tvalid_entropy\tlr\taccepted\n";
    for (const auto& e : log)
      logf << e.epoch << "\t" << fmt(e.train_entropy) << "\t" << fmt(e.valid_entropy)
           << "\t" << fmt(e.learning_rate) << "\t" << (e.accepted ? 1 : 0) << "\n";
  } else if (a.model == "srnn") {
    SgdConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.l2_coefficient = a.l2.value_or(1e-3);
    cfg.max_epochs = a.epochs > 0 ? a.epochs : 20;
    cfg.seed = a.seed;
    DistortionSpec spec =
        DistortionSpec::from_level(a.train_distortion_pct / 100.0, a.sub_split, a.seed);
    std::vector<HingeBatchStats> stats;
    SrnnModel m = srnn_train(train, spec, cfg, a.latent, vocab, &stats);
    m.save(out);
    auto logf = open_out(a.out + ".trainlog.tsv");
    logf << "# " << provenance(cmd) << "\n";
    logf << "epoch\tmean_loss\tviolations\ttrain_h_c\n";
    for (const auto& e : stats)
      logf << e.epoch << "\t" << fmt(e.mean_loss) << "\t" << e.violations << "\t"
           << fmt(e.train_contrastive_entropy) << "\n";
    // Fig.2-style curve: training contrastive entropy per epoch.
    auto csv = open_out(a.out + ".train_hc.csv");
    csv << "epoch,train_h_c\n";
    for (const auto& e : stats)
      csv << e.epoch << "," << fmt(e.train_contrastive_entropy) << "\n";
  } else {
    throw UsageError("unknown model kind: " + a.model + " (kn3|kn5|rnn|srnn)");
  }
}

// ---- evaluate ---------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> models;
  std::string test, vocab, out;
  std::vector<double> levels_pct{10.0, 30.0, 50.0};
  double base_pct = 10.0;
  int seeds = 10;
  std::uint64_t seed = 1234;
  double sub_split = 0.5;
  bool bits = false;
  bool no_count_eos = false;
  int jobs = 1;
};

void run_evaluate(const EvaluateArgs& a, const CLI::App* cmd) {
  Vocabulary vocab = Vocabulary::load_from_file(a.vocab);
  Corpus test = load_id_corpus(a.test, SplitRole::kTest);
  fs::create_directories(a.out);

  EvalOptions opts;
  for (double pct : a.levels_pct) opts.levels.push_back(pct / 100.0);
  opts.base_level = a.base_pct / 100.0;
  opts.seeds = a.seeds;
  opts.seed0 = a.seed;
  opts.sub_fraction = a.sub_split;
  opts.count_eos = !a.no_count_eos;
  opts.jobs = a.jobs;

  const double unit = a.bits ? std::log(2.0) : 1.0;  // report in bits on request
  std::vector<double> sorted_pct = a.levels_pct;
  std::sort(sorted_pct.begin(), sorted_pct.end());

  auto report_file = open_out(fs::path(a.out) / "report.tsv");
  report_file << "# " << provenance(cmd) << "\n";
  report_file << "model\tPPL";
  for (double pct : sorted_pct) report_file << "\tHC@" << pct << "\tSD@" << pct;
  for (double pct : sorted_pct)
    if (pct != a.base_pct) report_file << "\tHCR@" << pct << "/" << a.base_pct;
  report_file << "\truns\n";

  for (const auto& path : a.models) {
    LoadedModel lm = load_any_model(path, vocab);
    MetricsReport rep = averaged_evaluation(lm.scored, test, vocab, opts);

    report_file << rep.label << "\t";
    // Unnormalized models get "-" in the PPL column.
    report_file << (rep.perplexity ? fmt(*rep.perplexity) : "-");
    for (std::size_t li = 0; li < rep.levels.size(); ++li)
      report_file << "\t" << fmt(rep.h_c_mean[li] / unit) << "\t"
                  << fmt(rep.h_c_stddev[li] / unit);
    for (std::size_t li = 0; li < rep.levels.size(); ++li)
      if (rep.levels[li] != opts.base_level)
        report_file << "\t" << fmt(rep.h_cr.at(rep.levels[li]));
    report_file << "\t" << rep.runs << "\n";

    // Fig.1-style curve: H_C vs distortion level.
    auto csv = open_out(fs::path(a.out) / (sanitize(rep.label) + "_hc_curve.csv"));
    csv << "level_pct,h_c_mean,h_c_stddev\n";
    for (std::size_t li = 0; li < rep.levels.size(); ++li)
      csv << 100.0 * rep.levels[li] << "," << fmt(rep.h_c_mean[li] / unit) << ","
          << fmt(rep.h_c_stddev[li] / unit) << "\n";
  }
}

// ---- report (verdicts) ------------------------------------------------

struct ReportArgs {
  std::string report, baseline, out;
  double similarity_tol = 0.05;
};

struct ReportRow {
  std::string label;
  double h_c_top = 0.0;
  double h_cr_top = 0.0;
};

void run_report(const ReportArgs& a, const CLI::App* cmd) {
  std::ifstream in(a.report);
  if (!in) throw DataError("cannot open report: " + a.report);
  std::string line;
  std::vector<std::string> header;
  std::vector<ReportRow> rows;
  int hc_col = -1, hcr_col = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      // Highest distortion level = last HC column; its ratio = last HCR column.
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("HC@", 0) == 0) hc_col = static_cast<int>(i);
        if (header[i].rfind("HCR@", 0) == 0) hcr_col = static_cast<int>(i);
      }
      if (hc_col < 0 || hcr_col < 0) throw DataError("report is missing HC/HCR columns");
      continue;
    }
    ReportRow row;
    row.label = cells.at(0);
    row.h_c_top = std::stod(cells.at(hc_col));
    row.h_cr_top = std::stod(cells.at(hcr_col));
    rows.push_back(row);
  }
  const ReportRow* base = nullptr;
  for (const auto& r : rows)
    if (r.label == a.baseline) base = &r;
  if (!base) throw UsageError("baseline model '" + a.baseline + "' not found in report");

  auto out = open_out(a.out);
  out << "# " << provenance(cmd) << "\n";
  out << "model\tvs\th_c\th_cr\tverdict\n";
  for (const auto& r : rows) {
    if (r.label == base->label) continue;
    Comparison hc = r.h_c_top > base->h_c_top ? Comparison::kHigher : Comparison::kLower;
    RatioComparison hcr = r.h_cr_top >= base->h_cr_top * (1.0 - a.similarity_tol)
                              ? RatioComparison::kHigherOrSimilar
                              : RatioComparison::kLower;
    out << r.label << "\t" << base->label << "\t"
        << (hc == Comparison::kHigher ? "higher" : "lower") << "\t"
        << (hcr == RatioComparison::kHigherOrSimilar ? "higher_or_similar" : "lower")
        << "\t" << to_string(verdict(hc, hcr)) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive entropy toolkit for language model evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CENTROPY_VERSION);

  PrepareArgs prep;
  auto* cmd_prepare = app.add_subcommand("prepare", "build vocabulary and encode corpora");
  cmd_prepare->set_config("--config");
  cmd_prepare->add_option("--train", prep.train, "training text (one sentence per line)")
      ->required();
  cmd_prepare->add_option("--valid", prep.valid, "validation text")->required();
  cmd_prepare->add_option("--test", prep.test, "test text")->required();
  cmd_prepare->add_option("--vocab-cap", prep.cap, "vocabulary cap (default 10000)");
  cmd_prepare->add_option("--out", prep.out, "output directory")
      ->default_val(default_out_dir());

  DistortArgs dis;
  auto* cmd_distort = app.add_subcommand("distort", "write a distorted copy of a corpus");
  cmd_distort->set_config("--config");
  cmd_distort->add_option("--corpus", dis.corpus, "encoded corpus (.ids)")->required();
  cmd_distort->add_option("--vocab", dis.vocab, "vocabulary file")->required();
  cmd_distort->add_option("--level", dis.level_pct, "distortion level in percent");
  cmd_distort->add_option("--sub-trans-split", dis.sub_split,
                          "fraction of the level spent on substitutions");
  cmd_distort->add_option("--seed", dis.seed, "channel seed");
  cmd_distort->add_option("--out", dis.out, "output prefix")->required();

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "train a model (kn3|kn5|rnn|srnn)");
  cmd_train->set_config("--config");
  cmd_train->add_option("--model", tr.model, "model kind")->required();
  cmd_train->add_option("--train", tr.train, "encoded training corpus")->required();
  cmd_train->add_option("--valid", tr.valid, "encoded validation corpus (rnn)");
  cmd_train->add_option("--vocab", tr.vocab, "vocabulary file")->required();
  cmd_train->add_option("--out", tr.out, "model output path")->required();
  cmd_train->add_option("--hidden", tr.hidden, "rnn hidden units (default 200)");
  cmd_train->add_option("--classes", tr.classes, "rnn softmax classes (default 50)");
  cmd_train->add_option("--latent", tr.latent, "srnn latent size (default 75)");
  cmd_train->add_option("--train-distortion", tr.train_distortion_pct,
                        "srnn training distortion level in percent (default 10)");
  cmd_train->add_option("--sub-trans-split", tr.sub_split, "substitution share of the level");
  cmd_train->add_option("--lr", tr.lr, "learning rate (default 0.1)");
  cmd_train->add_option("--l2", tr.l2, "l2 coefficient (default 1e-3 srnn, 1e-6 rnn)");
  cmd_train->add_option("--epochs", tr.epochs, "max epochs");
  cmd_train->add_option("--bptt", tr.bptt, "rnn BPTT depth (default 5)");
  cmd_train->add_option("--seed", tr.seed, "init/negatives seed");
  cmd_train->add_flag("--no-lr-decay", tr.no_lr_decay, "disable rnn lr halving");

  EvaluateArgs ev;
  auto* cmd_eval = app.add_subcommand("evaluate", "evaluate models on a test corpus");
  cmd_eval->set_config("--config");
  cmd_eval->add_option("--models", ev.models, "model files")->required()->expected(-1);
  cmd_eval->add_option("--test", ev.test, "encoded test corpus")->required();
  cmd_eval->add_option("--vocab", ev.vocab, "vocabulary file")->required();
  cmd_eval->add_option("--levels", ev.levels_pct, "distortion levels in percent")
      ->delimiter(',');
  cmd_eval->add_option("--base-level", ev.base_pct, "ratio baseline level in percent");
  cmd_eval->add_option("--seeds", ev.seeds, "number of distortion runs to average");
  cmd_eval->add_option("--seed", ev.seed, "base seed");
  cmd_eval->add_option("--sub-trans-split", ev.sub_split, "substitution share of the level");
  cmd_eval->add_flag("--bits", ev.bits, "report entropies in bits instead of nats");
  cmd_eval->add_flag("--no-count-eos", ev.no_count_eos,
                     "exclude </s> from per-word normalization");
  cmd_eval->add_option("--jobs", ev.jobs, "concurrent seed evaluations");
  cmd_eval->add_option("--out", ev.out, "output directory")->default_val(default_out_dir());

  ReportArgs rp;
  auto* cmd_report = app.add_subcommand("report", "verdict matrix against a baseline model");
  cmd_report->set_config("--config");
  cmd_report->add_option("--report", rp.report, "report.tsv from evaluate")->required();
  cmd_report->add_option("--baseline", rp.baseline, "baseline model label")->required();
  cmd_report->add_option("--similarity-tol", rp.similarity_tol,
                         "relative tolerance for 'similar' ratios (default 0.05)");
  cmd_report->add_option("--out", rp.out, "output path")->required();

  try {
    app.parse(argc, argv);
    if (cmd_prepare->parsed()) run_prepare(prep, cmd_prepare);
    if (cmd_distort->parsed()) run_distort(dis, cmd_distort);
    if (cmd_train->parsed()) run_train(tr, cmd_train);
    if (cmd_eval->parsed()) run_evaluate(ev, cmd_eval);
    if (cmd_report->parsed()) run_report(rp, cmd_report);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
