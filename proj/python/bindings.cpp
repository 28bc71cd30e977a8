#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vslda/baselines.hpp"
#include "vslda/corpus.hpp"
#include "vslda/eval.hpp"
#include "vslda/io.hpp"
#include "vslda/synthgen.hpp"

namespace py = pybind11;
using namespace vslda;

namespace {

PriorMode prior_mode(const std::string& model) {
  if (model == "symlda") return PriorMode::kSymmetric;
  if (model == "asymlda") return PriorMode::kAsymmetric;
  throw ArgumentError("unknown baseline model: " + model);
}

ChainResult train(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper,
                  const std::string& model) {
  if (model == "vslda") return run_chain(corpus, config, hyper);
  return run_lda_chain(corpus, config, hyper, prior_mode(model));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "vsLDA: topic models that select informative words";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DegeneratePartitionError>(m, "DegeneratePartitionError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("set_log_level", [](const std::string& level) {
    if (level == "debug") log::set_level(log::Level::kDebug);
    else if (level == "info") log::set_level(log::Level::kInfo);
    else if (level == "warning") log::set_level(log::Level::kWarning);
    else if (level == "silent") log::set_level(log::Level::kSilent);
    else throw ArgumentError("unknown log level: " + level);
  });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<std::vector<std::string>, std::vector<std::vector<WordId>>>(), py::arg("vocab"),
           py::arg("documents"))
      .def_property_readonly("num_words", &Corpus::num_words)
      .def_property_readonly("num_docs", &Corpus::num_docs)
      .def_property_readonly("num_tokens", &Corpus::num_tokens)
      .def_property_readonly("vocab", &Corpus::vocab)
      .def_property_readonly("documents", &Corpus::documents)
      .def("subset", &Corpus::subset, py::arg("doc_indices"))
      .def("__repr__", [](const Corpus& c) {
        return "<Corpus docs=" + std::to_string(c.num_docs()) + " words=" + std::to_string(c.num_words()) +
               " tokens=" + std::to_string(c.num_tokens()) + ">";
      });

  m.def(
      "load_corpus",
      [](const std::filesystem::path& path, const std::string& format, std::optional<std::filesystem::path> vocab,
         std::optional<std::filesystem::path> stopwords) {
        LoadOptions opts;
        opts.vocab_path = vocab;
        if (stopwords) opts.stopwords = load_word_list(*stopwords);
        return load_corpus(path, parse_corpus_format(format), opts);
      },
      py::arg("path"), py::arg("format") = "text", py::arg("vocab") = py::none(), py::arg("stopwords") = py::none());
  m.def("save_sparse", &save_sparse, py::arg("corpus"), py::arg("path"));
  m.def("save_vocab", &save_vocab, py::arg("corpus"), py::arg("path"));

  py::class_<WordStats>(m, "WordStats")
      .def_readonly("freq", &WordStats::freq)
      .def_readonly("df", &WordStats::df)
      .def_readonly("ctf_idf", &WordStats::ctf_idf)
      .def_readonly("rdf", &WordStats::rdf);
  m.def("compute_word_stats", &compute_word_stats, py::arg("corpus"));
  m.def("ctf_idf", &ctf_idf, py::arg("freq"), py::arg("df"));

  py::class_<CorpusSplit>(m, "CorpusSplit")
      .def_readonly("train", &CorpusSplit::train)
      .def_readonly("test", &CorpusSplit::test)
      .def_readonly("train_docs", &CorpusSplit::train_docs)
      .def_readonly("test_docs", &CorpusSplit::test_docs);
  m.def("split_corpus", &split_corpus, py::arg("corpus"), py::arg("train_fraction"), py::arg("seed"));

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_static("symmetric", &HyperParams::symmetric, py::arg("num_topics"), py::arg("alpha"), py::arg("beta"))
      .def_readwrite("alpha", &HyperParams::alpha)
      .def_readwrite("beta", &HyperParams::beta)
      .def_readwrite("gamma", &HyperParams::gamma)
      .def_readwrite("lambda_", &HyperParams::lambda)
      .def_readwrite("tau", &HyperParams::tau)
      .def("validate", &HyperParams::validate);

  py::class_<ChainConfig>(m, "ChainConfig")
      .def(py::init<>())
      .def_readwrite("num_topics", &ChainConfig::num_topics)
      .def_readwrite("iterations", &ChainConfig::iterations)
      .def_readwrite("burn_in", &ChainConfig::burn_in)
      .def_readwrite("thinning", &ChainConfig::thinning)
      .def_readwrite("mc_samples", &ChainConfig::mc_samples)
      .def_readwrite("seed", &ChainConfig::seed)
      .def_readwrite("hyperopt_interval", &ChainConfig::hyperopt_interval)
      .def_readwrite("hyperopt_start", &ChainConfig::hyperopt_start)
      .def_readwrite("optimize_beta", &ChainConfig::optimize_beta)
      .def_readwrite("sample_selection", &ChainConfig::sample_selection)
      .def_readwrite("sample_lambda_tau", &ChainConfig::sample_lambda_tau)
      .def_property(
          "unweighted_estimator", [](const ChainConfig& c) { return c.estimator == MarginalEstimator::kUnweighted; },
          [](ChainConfig& c, bool v) {
            c.estimator = v ? MarginalEstimator::kUnweighted : MarginalEstimator::kImportanceWeighted;
          })
      .def_property(
          "bernoulli_init", [](const ChainConfig& c) { return c.s_init == SelectionInit::kBernoulli; },
          [](ChainConfig& c, bool v) { c.s_init = v ? SelectionInit::kBernoulli : SelectionInit::kAllInformative; })
      .def("validate", &ChainConfig::validate);

  py::class_<PosteriorSummary>(m, "PosteriorSummary")
      .def_readonly("phi_hat", &PosteriorSummary::phi_hat)
      .def_readonly("psi_hat", &PosteriorSummary::psi_hat)
      .def_readonly("theta_hat", &PosteriorSummary::theta_hat)
      .def_readonly("s_hat", &PosteriorSummary::s_hat)
      .def_readonly("tau_hat", &PosteriorSummary::tau_hat)
      .def_readonly("lambda_hat", &PosteriorSummary::lambda_hat)
      .def_readonly("hyper", &PosteriorSummary::hyper)
      .def_readonly("vocab", &PosteriorSummary::vocab)
      .def_readonly("model", &PosteriorSummary::model)
      .def_readonly("seed", &PosteriorSummary::seed)
      .def_property_readonly("num_informative", &PosteriorSummary::num_informative)
      .def("noninformative_set", &PosteriorSummary::noninformative_set)
      .def("noninformative_words", [](const PosteriorSummary& s) {
        std::vector<std::string> out;
        for (WordId j : s.noninformative_set()) out.push_back(s.vocab.at(j));
        return out;
      });
  m.def("read_summary", &read_summary, py::arg("path"));
  m.def("write_summary", &write_summary, py::arg("summary"), py::arg("path"));

  py::class_<SweepDiagnostics>(m, "SweepDiagnostics")
      .def_readonly("iteration", &SweepDiagnostics::iteration)
      .def_readonly("log_likelihood", &SweepDiagnostics::log_likelihood)
      .def_readonly("num_informative", &SweepDiagnostics::num_informative)
      .def_readonly("lambda_", &SweepDiagnostics::lambda)
      .def_readonly("tau", &SweepDiagnostics::tau)
      .def_readonly("accepted_flips", &SweepDiagnostics::accepted_flips);

  py::class_<ChainResult>(m, "ChainResult")
      .def_readonly("summary", &ChainResult::summary)
      .def_readonly("trace", &ChainResult::trace)
      .def_readonly("hyper", &ChainResult::hyper);

  m.def("train", &train, py::arg("corpus"), py::arg("config"), py::arg("hyper"), py::arg("model") = "vslda",
        py::call_guard<py::gil_scoped_release>(),
        "Run one chain of vslda, symlda or asymlda and return its summary and trace.");

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("num_topics", &SyntheticSpec::num_topics)
      .def_readwrite("words_per_topic", &SyntheticSpec::words_per_topic)
      .def_readwrite("topic_word_prob", &SyntheticSpec::topic_word_prob)
      .def_readwrite("num_noninformative", &SyntheticSpec::num_noninformative)
      .def_readwrite("noninf_word_prob", &SyntheticSpec::noninf_word_prob)
      .def_readwrite("num_docs", &SyntheticSpec::num_docs)
      .def_readwrite("min_doc_length", &SyntheticSpec::min_doc_length)
      .def_readwrite("max_doc_length", &SyntheticSpec::max_doc_length)
      .def_readwrite("theta_prior", &SyntheticSpec::theta_prior)
      .def_readwrite("tau", &SyntheticSpec::tau)
      .def_readwrite("seed", &SyntheticSpec::seed)
      .def_property(
          "layout", [](const SyntheticSpec& s) { return std::string(layout_name(s.layout)); },
          [](SyntheticSpec& s, const std::string& v) { s.layout = parse_topic_layout(v); })
      .def_property_readonly("vocab_size", &SyntheticSpec::vocab_size)
      .def("topic_words", &SyntheticSpec::topic_words, py::arg("k"));

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("phi", &GroundTruth::phi)
      .def_readonly("psi", &GroundTruth::psi)
      .def_readonly("s", &GroundTruth::s)
      .def_readonly("theta", &GroundTruth::theta)
      .def_readonly("tau", &GroundTruth::tau);
  m.def("generate", &generate, py::arg("spec") = SyntheticSpec{});

  py::class_<HeldoutResult>(m, "HeldoutResult")
      .def_readonly("per_token_loglik", &HeldoutResult::per_token_loglik)
      .def_readonly("total_loglik", &HeldoutResult::total_loglik)
      .def_readonly("num_tokens", &HeldoutResult::num_tokens)
      .def_readonly("doc_loglik", &HeldoutResult::doc_loglik);
  m.def(
      "heldout_loglik",
      [](const PosteriorSummary& summary, const Corpus& test, int particles, std::uint64_t seed) {
        return left_to_right_loglik(summary, summary.hyper, test, HeldoutConfig{particles, seed});
      },
      py::arg("summary"), py::arg("test"), py::arg("particles") = 20, py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def("symmetric_kl", &symmetric_kl, py::arg("p"), py::arg("q"), py::arg("eps") = 1e-10);
  m.def("hungarian", &hungarian, py::arg("cost"));
  m.def("jaccard", &jaccard, py::arg("a"), py::arg("b"));

  py::class_<TopicMatch>(m, "TopicMatch")
      .def_readonly("topic_a", &TopicMatch::topic_a)
      .def_readonly("topic_b", &TopicMatch::topic_b)
      .def_readonly("skl", &TopicMatch::skl);
  py::class_<BestMatch>(m, "BestMatch")
      .def_readonly("mean_skl", &BestMatch::mean_skl)
      .def_readonly("total_skl", &BestMatch::total_skl)
      .def_readonly("matching", &BestMatch::matching)
      .def_readonly("pairs", &BestMatch::pairs);
  m.def("best_match_divergence", &best_match_divergence, py::arg("topics_a"), py::arg("topics_b"),
        py::arg("eps") = 1e-10);

  py::class_<ConsistencyReport>(m, "ConsistencyReport")
      .def_readonly("mean_skl", &ConsistencyReport::mean_skl)
      .def_readonly("mean_jaccard_ni", &ConsistencyReport::mean_jaccard_ni);
  m.def("compare_runs", &compare_runs, py::arg("runs"), py::arg("eps") = 1e-10);
}
