// vslda command-line tool: synth, split, train, eval.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vslda/baselines.hpp"
#include "vslda/corpus.hpp"
#include "vslda/eval.hpp"
#include "vslda/io.hpp"
#include "vslda/synthgen.hpp"

using namespace vslda;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

constexpr int kExitInterrupted = 130;

/// Output directory: --out, else VSLDA_OUTPUT_DIR.
fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("VSLDA_OUTPUT_DIR"); env && *env) return env;
  throw ArgumentError("no output directory: pass --out or set VSLDA_OUTPUT_DIR");
}

void write_manifest(const fs::path& dir, const std::string& command, Json config, Json artifacts) {
  Json m;
  m["tool"] = "vslda";
  m["version"] = "0.1.0";
  m["command"] = command;
  m["config"] = std::move(config);
  m["artifacts"] = std::move(artifacts);
  write_json(m, dir / "manifest.json");
}

struct CorpusArgs {
  std::string path;
  std::string format;
  std::string vocab;
  std::string stopwords;

  void add(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--corpus", path, "corpus file")->check(CLI::ExistingFile);
    if (required) opt->required();
    app->add_option("--format", format, "text | sparse (default: from extension)");
    app->add_option("--vocab", vocab, "vocabulary file naming sparse word ids")->check(CLI::ExistingFile);
    app->add_option("--stopwords", stopwords, "word list dropped from text input")->check(CLI::ExistingFile);
  }

  CorpusFormat resolved_format() const {
    if (!format.empty()) return parse_corpus_format(format);
    return fs::path(path).extension() == ".sparse" ? CorpusFormat::kSparse : CorpusFormat::kText;
  }

  std::optional<std::string> vocab_path() const {
    if (!vocab.empty()) return vocab;
    // sparse corpora written by this tool keep vocab.txt next to them
    const fs::path sibling = fs::path(path).parent_path() / "vocab.txt";
    if (resolved_format() == CorpusFormat::kSparse && fs::exists(sibling)) return sibling.string();
    return std::nullopt;
  }

  Corpus load(const std::vector<std::string>* fixed_vocab = nullptr) const {
    LoadOptions opts;
    if (!stopwords.empty()) opts.stopwords = load_word_list(stopwords);
    if (auto v = vocab_path()) opts.vocab_path = *v;
    opts.fixed_vocab = fixed_vocab;
    return load_corpus(path, resolved_format(), opts);
  }

  Json to_json() const {
    Json j{{"path", fs::absolute(path).string()}, {"format", resolved_format() == CorpusFormat::kSparse ? "sparse" : "text"}};
    if (auto v = vocab_path()) j["vocab"] = fs::absolute(*v).string();
    if (!stopwords.empty()) j["stopwords"] = fs::absolute(stopwords).string();
    return j;
  }

  static CorpusArgs from_json(const Json& j) {
    CorpusArgs a;
    a.path = j.at("path").get<std::string>();
    a.format = j.at("format").get<std::string>();
    a.vocab = j.value("vocab", "");
    a.stopwords = j.value("stopwords", "");
    return a;
  }
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SyntheticSpec spec;
  std::string layout = "grid";
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  SyntheticSpec spec = a.spec;
  spec.layout = parse_topic_layout(a.layout);
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  auto [corpus, truth] = generate(spec);
  save_sparse(corpus, dir / "corpus.sparse");
  save_text(corpus, dir / "corpus.txt");
  save_vocab(corpus, dir / "vocab.txt");
  write_ground_truth(truth, spec, dir / "ground_truth.json");
  Json cfg{{"layout", layout_name(spec.layout)}, {"num_topics", spec.num_topics},
           {"words_per_topic", spec.words_per_topic}, {"topic_word_prob", spec.topic_word_prob},
           {"num_noninformative", spec.num_noninformative}, {"noninf_word_prob", spec.noninf_word_prob},
           {"num_docs", spec.num_docs}, {"min_doc_length", spec.min_doc_length},
           {"max_doc_length", spec.max_doc_length}, {"theta_prior", spec.theta_prior},
           {"tau", spec.tau}, {"seed", spec.seed}};
  write_manifest(dir, "synth", cfg, {"corpus.sparse", "corpus.txt", "vocab.txt", "ground_truth.json"});
  std::printf("wrote %zu docs, %zu words, %zu tokens to %s\n", corpus.num_docs(), corpus.num_words(),
              corpus.num_tokens(), dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  CorpusArgs corpus;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_split(const SplitArgs& a) {
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  Corpus corpus = a.corpus.load();
  CorpusSplit split = split_corpus(corpus, a.train_fraction, a.seed);
  save_sparse(split.train, dir / "train.sparse");
  save_sparse(split.test, dir / "test.sparse");
  save_vocab(corpus, dir / "vocab.txt");
  write_json(Json{{"train_docs", split.train_docs}, {"test_docs", split.test_docs}}, dir / "split.json");
  write_manifest(dir, "split",
                 {{"corpus", a.corpus.to_json()}, {"train_fraction", a.train_fraction}, {"seed", a.seed}},
                 {"train.sparse", "test.sparse", "vocab.txt", "split.json"});
  std::printf("train %zu docs, test %zu docs\n", split.train.num_docs(), split.test.num_docs());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  CorpusArgs corpus;
  std::string model = "vslda";
  ChainConfig cfg;
  std::string estimator = "weighted";
  std::string alpha_mode = "asymmetric";
  std::string s_init = "all";
  bool no_beta_opt = false;
  double alpha = 0.1;
  double beta = 0.1;
  double gamma = 1.0;
  double lambda = 0.5;
  double tau = 0.5;
  std::vector<double> lambda_prior = {1.0, 1.0};
  std::vector<double> tau_prior = {1.0, 1.0};
  int chains = 1;
  std::int64_t checkpoint_every = 100;
  std::string out;
  std::string resume;
};

Json train_config_json(const TrainArgs& a) {
  Json j;
  j["corpus"] = a.corpus.to_json();
  j["model"] = a.model;
  j["chains"] = a.chains;
  j["checkpoint_every"] = a.checkpoint_every;
  j["chain_config"] = to_json(a.cfg);
  HyperParams h = HyperParams::symmetric(a.cfg.num_topics, a.alpha, a.beta);
  h.gamma = a.gamma;
  h.lambda = a.lambda;
  h.tau = a.tau;
  h.lambda_prior = {a.lambda_prior[0], a.lambda_prior[1]};
  h.tau_prior = {a.tau_prior[0], a.tau_prior[1]};
  j["hyper"] = to_json(h);
  return j;
}

/// Runs (or resumes) one chain and writes its artifacts. Returns false on interrupt.
bool train_one(const Corpus& corpus, const std::string& model, const ChainConfig& cfg, const HyperParams& hyper,
               const fs::path& dir, std::int64_t checkpoint_every) {
  fs::create_directories(dir);
  RunControl control;
  control.stop = &g_stop;
  control.checkpoint_path = dir / "checkpoint.json";
  control.checkpoint_interval = checkpoint_every;

  ChainProgress progress;
  if (fs::exists(*control.checkpoint_path)) {
    progress = read_checkpoint(*control.checkpoint_path, corpus);
    log::info("resuming " + dir.string() + " after sweep " + std::to_string(progress.state.iteration));
  } else {
    ChainConfig c = cfg;
    HyperParams h = hyper;
    if (model != "vslda") configure_lda(c, h, model == "symlda" ? PriorMode::kSymmetric : PriorMode::kAsymmetric);
    progress = start_chain(corpus, c, h, model);
  }
  try {
    ChainResult r = continue_chain(corpus, std::move(progress), control);
    write_summary(r.summary, dir / "summary.json");
    write_diagnostics_csv(r.trace, dir / "diagnostics.csv");
    std::printf("%s: %zu informative of %zu words, lambda %.4f, tau %.4f\n", dir.filename().string().c_str(),
                r.summary.num_informative(), r.summary.num_words(), r.summary.lambda_hat, r.summary.tau_hat);
    return true;
  } catch (const ChainInterrupted& e) {
    std::fprintf(stderr, "interrupted after sweep %lld; checkpoint at %s (resume with --resume %s)\n",
                 static_cast<long long>(e.iteration), control.checkpoint_path->string().c_str(),
                 dir.parent_path().string().c_str());
    return false;
  }
}

int run_training(const Json& manifest_config, const fs::path& dir) {
  const CorpusArgs corpus_args = CorpusArgs::from_json(manifest_config.at("corpus"));
  const Corpus corpus = corpus_args.load();
  const std::string model = manifest_config.at("model").get<std::string>();
  const ChainConfig base = config_from_json(manifest_config.at("chain_config"));
  const HyperParams hyper = hyper_from_json(manifest_config.at("hyper"));
  const int chains = manifest_config.at("chains").get<int>();
  const std::int64_t every = manifest_config.at("checkpoint_every").get<std::int64_t>();

  Json artifacts = Json::array();
  for (int i = 0; i < chains; ++i) {
    const fs::path chain_dir = dir / ("chain_" + std::to_string(i));
    const std::string rel = chain_dir.filename().string();
    const auto files = {"summary.json", "diagnostics.csv", "checkpoint.json"};
    // finished chains are left alone on resume
    const bool finished = fs::exists(chain_dir / "summary.json") && fs::exists(chain_dir / "diagnostics.csv");
    if (!finished) {
      ChainConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(i);
      if (!train_one(corpus, model, cfg, hyper, chain_dir, every)) return kExitInterrupted;
    }
    for (const char* f : files) {
      if (fs::exists(chain_dir / f)) artifacts.push_back(rel + "/" + f);
    }
  }
  write_manifest(dir, "train", manifest_config, artifacts);
  return 0;
}

int cmd_train(TrainArgs a) {
  if (!a.resume.empty()) {
    const fs::path dir = a.resume;
    if (!fs::exists(dir / "manifest.json")) throw ArgumentError("no manifest.json in " + dir.string());
    return run_training(read_json(dir / "manifest.json").at("config"), dir);
  }
  if (a.corpus.path.empty()) throw ArgumentError("--corpus is required unless --resume is given");
  if (a.lambda_prior.size() != 2 || a.tau_prior.size() != 2) throw ArgumentError("Beta priors take two values");
  a.cfg.estimator = a.estimator == "weighted" ? MarginalEstimator::kImportanceWeighted : MarginalEstimator::kUnweighted;
  a.cfg.alpha_mode = a.alpha_mode == "asymmetric" ? AlphaMode::kAsymmetric : AlphaMode::kSymmetric;
  a.cfg.s_init = a.s_init == "all" ? SelectionInit::kAllInformative : SelectionInit::kBernoulli;
  a.cfg.optimize_beta = !a.no_beta_opt;
  a.cfg.validate();
  const fs::path dir = resolve_out(a.out);
  if (fs::exists(dir / "manifest.json")) {
    throw ArgumentError(dir.string() + " already holds a run; pass --resume or choose another --out");
  }
  fs::create_directories(dir);
  const Json config = train_config_json(a);
  hyper_from_json(config.at("hyper")).validate();
  // manifest first, so an interrupted run can be resumed from the directory alone
  write_manifest(dir, "train", config, Json::array());
  return run_training(config, dir);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> summaries;
  CorpusArgs corpus;
  HeldoutConfig heldout;
  std::string labels;
  std::string out;
};

PosteriorSummary load_summary(const std::string& path) {
  fs::path p = path;
  if (fs::is_directory(p)) p /= "summary.json";
  if (!fs::exists(p)) throw ArgumentError("missing summary: " + p.string());
  return read_summary(p);
}

int cmd_heldout(const EvalArgs& a) {
  if (a.summaries.size() != 1) throw ArgumentError("heldout takes exactly one --summary");
  const PosteriorSummary summary = load_summary(a.summaries[0]);
  const Corpus test = a.corpus.load(a.corpus.resolved_format() == CorpusFormat::kText ? &summary.vocab : nullptr);
  if (test.num_words() != summary.num_words()) {
    throw ArgumentError("test corpus has " + std::to_string(test.num_words()) + " words, summary has " +
                        std::to_string(summary.num_words()));
  }
  a.heldout.validate();
  const HeldoutResult r = left_to_right_loglik(summary, summary.hyper, test, a.heldout);
  log::info("left-to-right estimate with " + std::to_string(a.heldout.particles) +
            " particles; its variance shrinks as particles grow");
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  write_json(Json{{"per_token_loglik", r.per_token_loglik}, {"total_loglik", r.total_loglik},
                  {"num_tokens", r.num_tokens}, {"num_docs", test.num_docs()}, {"particles", a.heldout.particles},
                  {"doc_loglik", r.doc_loglik}, {"model", summary.model}},
             dir / "heldout.json");
  write_manifest(dir, "eval heldout",
                 {{"summary", fs::absolute(a.summaries[0]).string()}, {"corpus", a.corpus.to_json()},
                  {"particles", a.heldout.particles}, {"seed", a.heldout.seed}},
                 {"heldout.json"});
  std::printf("per-token held-out log-likelihood %.6f over %zu tokens\n", r.per_token_loglik, r.num_tokens);
  return 0;
}

int cmd_consistency(const EvalArgs& a) {
  if (a.summaries.size() < 2) throw ArgumentError("consistency needs at least two summaries");
  std::vector<PosteriorSummary> runs;
  for (const auto& s : a.summaries) runs.push_back(load_summary(s));
  const ConsistencyReport rep = compare_runs(runs);
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  Json pairs = Json::array(), artifacts = {"consistency.json"};
  for (const auto& p : rep.pairs) {
    const std::string csv = "match_" + std::to_string(p.run_a) + "_" + std::to_string(p.run_b) + ".csv";
    write_match_csv(p.match, dir / csv);
    artifacts.push_back(csv);
    pairs.push_back({{"run_a", p.run_a}, {"run_b", p.run_b}, {"mean_skl", p.match.mean_skl},
                     {"jaccard_ni", p.jaccard_ni}, {"matching", p.match.matching}});
  }
  write_json(Json{{"mean_skl", rep.mean_skl}, {"mean_jaccard_ni", rep.mean_jaccard_ni}, {"pairs", pairs}},
             dir / "consistency.json");
  Json inputs = Json::array();
  for (const auto& s : a.summaries) inputs.push_back(fs::absolute(s).string());
  write_manifest(dir, "eval consistency", {{"summaries", inputs}}, artifacts);
  std::printf("mean pairwise SKL %.6f, mean NI-set Jaccard %.4f over %zu pairs\n", rep.mean_skl,
              rep.mean_jaccard_ni, rep.pairs.size());
  return 0;
}

int cmd_stats(const EvalArgs& a) {
  const Corpus corpus = a.corpus.load();
  const WordStats stats = compute_word_stats(corpus);
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  write_word_stats_csv(corpus, stats, dir / "word_stats.csv");
  write_manifest(dir, "eval stats", {{"corpus", a.corpus.to_json()}}, {"word_stats.csv"});
  std::printf("%zu docs, %zu words, %zu tokens\n", corpus.num_docs(), corpus.num_words(), corpus.num_tokens());
  return 0;
}

int cmd_export(const EvalArgs& a) {
  if (a.summaries.empty()) throw ArgumentError("export-features needs at least one summary");
  std::vector<PosteriorSummary> runs;
  for (const auto& s : a.summaries) runs.push_back(load_summary(s));
  std::optional<std::vector<std::string>> labels;
  if (!a.labels.empty()) {
    std::ifstream in(a.labels);
    if (!in) throw ArgumentError("cannot read labels: " + a.labels);
    labels.emplace();
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) labels->push_back(line);
    }
  }
  const fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  export_features(runs, labels, dir / "features.svm");
  Json inputs = Json::array();
  for (const auto& s : a.summaries) inputs.push_back(fs::absolute(s).string());
  write_manifest(dir, "eval export-features", {{"summaries", inputs}, {"labels", a.labels}}, {"features.svm"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vsLDA: topic models that select informative words"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug | info | warning | silent")
      ->check(CLI::IsMember({"debug", "info", "warning", "silent"}));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate the synthetic corpus and its ground truth");
  s->add_option("--seed", synth.spec.seed, "random seed")->required();
  s->add_option("--out", synth.out, "output directory");
  s->add_option("--layout", synth.layout, "grid | blocks")->check(CLI::IsMember({"grid", "blocks"}));
  s->add_option("--topics", synth.spec.num_topics);
  s->add_option("--words-per-topic", synth.spec.words_per_topic);
  s->add_option("--topic-word-prob", synth.spec.topic_word_prob);
  s->add_option("--noninformative", synth.spec.num_noninformative);
  s->add_option("--noninf-word-prob", synth.spec.noninf_word_prob);
  s->add_option("--docs", synth.spec.num_docs);
  s->add_option("--min-length", synth.spec.min_doc_length);
  s->add_option("--max-length", synth.spec.max_doc_length);
  s->add_option("--theta-prior", synth.spec.theta_prior);
  s->add_option("--tau", synth.spec.tau, "probability that a token comes from a topic");

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "split a corpus into train and test documents");
  split.corpus.add(sp);
  sp->add_option("--train-fraction", split.train_fraction)->check(CLI::Range(0.0, 1.0));
  sp->add_option("--seed", split.seed)->required();
  sp->add_option("--out", split.out, "output directory");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "run MCMC chains");
  train.corpus.add(t, false);
  t->add_option("--model", train.model)->check(CLI::IsMember({"vslda", "symlda", "asymlda"}));
  t->add_option("--k", train.cfg.num_topics, "number of topics");
  t->add_option("--iters", train.cfg.iterations, "total sweeps");
  t->add_option("--burnin", train.cfg.burn_in);
  t->add_option("--thin", train.cfg.thinning);
  t->add_option("--mc-samples", train.cfg.mc_samples, "completions per selection flip");
  t->add_option("--estimator", train.estimator)->check(CLI::IsMember({"weighted", "unweighted"}));
  t->add_option("--seed", train.cfg.seed, "chain i uses seed + i");
  t->add_option("--chains", train.chains)->check(CLI::PositiveNumber);
  t->add_option("--alpha", train.alpha, "initial symmetric alpha");
  t->add_option("--beta", train.beta);
  t->add_option("--gamma", train.gamma);
  t->add_option("--lambda", train.lambda, "initial P(s_j = 1)");
  t->add_option("--tau", train.tau, "initial P(b = 1)");
  t->add_option("--lambda-prior", train.lambda_prior, "Beta prior a b")->expected(2);
  t->add_option("--tau-prior", train.tau_prior, "Beta prior a b")->expected(2);
  t->add_option("--alpha-mode", train.alpha_mode)->check(CLI::IsMember({"asymmetric", "symmetric"}));
  t->add_option("--hyperopt-interval", train.cfg.hyperopt_interval, "0 disables");
  t->add_option("--hyperopt-start", train.cfg.hyperopt_start);
  t->add_flag("--no-beta-opt", train.no_beta_opt);
  t->add_option("--s-init", train.s_init)->check(CLI::IsMember({"all", "bernoulli"}));
  t->add_option("--checkpoint-every", train.checkpoint_every, "sweeps between checkpoints; 0 disables");
  t->add_option("--out", train.out, "run directory");
  auto* resume = t->add_option("--resume", train.resume, "continue the run in this directory")
                     ->check(CLI::ExistingDirectory);
  auto* seed_opt = t->get_option("--seed");
  seed_opt->excludes(resume);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate trained summaries");
  e->require_subcommand(1);
  auto* eh = e->add_subcommand("heldout", "left-to-right held-out log-likelihood");
  eh->add_option("--summary", ev.summaries, "summary.json or chain directory")->required()->expected(1);
  ev.corpus.add(eh);
  eh->add_option("--particles", ev.heldout.particles)->check(CLI::PositiveNumber);
  eh->add_option("--seed", ev.heldout.seed);
  eh->add_option("--out", ev.out);
  auto* ec = e->add_subcommand("consistency", "pairwise best-match SKL and NI-set Jaccard");
  ec->add_option("--summaries", ev.summaries)->required()->expected(2, -1);
  ec->add_option("--out", ev.out);
  auto* es = e->add_subcommand("stats", "freq, df and ctf-idf per word");
  ev.corpus.add(es);
  es->add_option("--out", ev.out);
  auto* ex = e->add_subcommand("export-features", "topic proportions as classifier features");
  ex->add_option("--summaries", ev.summaries)->required()->expected(1, -1);
  ex->add_option("--labels", ev.labels, "one label per document")->check(CLI::ExistingFile);
  ex->add_option("--out", ev.out);

  CLI11_PARSE(app, argc, argv);

  const std::map<std::string, log::Level> levels = {{"debug", log::Level::kDebug},
                                                    {"info", log::Level::kInfo},
                                                    {"warning", log::Level::kWarning},
                                                    {"silent", log::Level::kSilent}};
  log::set_level(levels.at(log_level));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*s) return cmd_synth(synth);
    if (*sp) return cmd_split(split);
    if (*t) {
      if (train.resume.empty() && !*seed_opt) throw ArgumentError("--seed is required for train");
      return cmd_train(train);
    }
    if (*eh) return cmd_heldout(ev);
    if (*ec) return cmd_consistency(ev);
    if (*es) return cmd_stats(ev);
    if (*ex) return cmd_export(ev);
  } catch (const ArgumentError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 1;
}
