#include "vslda/io.hpp"

#include <cstdio>
#include <fstream>

namespace vslda {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointFormat = "vslda-checkpoint/1";
constexpr const char* kSummaryFormat = "vslda-summary/1";

const char* to_string(SelectionInit v) { return v == SelectionInit::kBernoulli ? "bernoulli" : "all-informative"; }
const char* to_string(MarginalEstimator v) {
  return v == MarginalEstimator::kUnweighted ? "unweighted" : "importance-weighted";
}
const char* to_string(AlphaMode v) { return v == AlphaMode::kSymmetric ? "symmetric" : "asymmetric"; }

SelectionInit selection_init_from(const std::string& s) {
  if (s == "bernoulli") return SelectionInit::kBernoulli;
  if (s == "all-informative") return SelectionInit::kAllInformative;
  throw ParseError("unknown s_init '" + s + "'");
}

MarginalEstimator estimator_from(const std::string& s) {
  if (s == "unweighted") return MarginalEstimator::kUnweighted;
  if (s == "importance-weighted") return MarginalEstimator::kImportanceWeighted;
  throw ParseError("unknown estimator '" + s + "'");
}

AlphaMode alpha_mode_from(const std::string& s) {
  if (s == "symmetric") return AlphaMode::kSymmetric;
  if (s == "asymmetric") return AlphaMode::kAsymmetric;
  throw ParseError("unknown alpha mode '" + s + "'");
}

Json table_to_json(const CountTable& t) {
  return Json{{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.data()}};
}

CountTable table_from_json(const Json& j) {
  CountTable t(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<std::int32_t>>();
  if (data.size() != t.rows() * t.cols()) throw ParseError("count table size mismatch");
  t.data() = std::move(data);
  return t;
}

// uint8 vectors serialize as arrays of 0/1 numbers.
std::vector<std::uint8_t> bits_from_json(const Json& j) {
  std::vector<std::uint8_t> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<int>() != 0 ? 1 : 0);
  return out;
}

Json bits_to_json(const std::vector<std::uint8_t>& bits) {
  Json out = Json::array();
  for (auto b : bits) out.push_back(static_cast<int>(b));
  return out;
}

Json sample_to_json(const RetainedSample& s) {
  return Json{{"iteration", s.iteration},
              {"s", bits_to_json(s.s)},
              {"word_topic", table_to_json(s.word_topic)},
              {"noninf_counts", s.noninf_counts}};
}

RetainedSample sample_from_json(const Json& j) {
  RetainedSample s;
  s.iteration = j.at("iteration").get<std::int64_t>();
  s.s = bits_from_json(j.at("s"));
  if (j.contains("word_topic")) s.word_topic = table_from_json(j.at("word_topic"));
  if (j.contains("noninf_counts")) s.noninf_counts = j.at("noninf_counts").get<std::vector<std::int64_t>>();
  return s;
}

Json diag_to_json(const SweepDiagnostics& d) {
  return Json{{"iteration", d.iteration}, {"log_likelihood", d.log_likelihood},
              {"num_informative", d.num_informative}, {"lambda", d.lambda},
              {"tau", d.tau}, {"accepted_flips", d.accepted_flips}};
}

SweepDiagnostics diag_from_json(const Json& j) {
  return SweepDiagnostics{j.at("iteration").get<std::int64_t>(), j.at("log_likelihood").get<double>(),
                          j.at("num_informative").get<std::int64_t>(), j.at("lambda").get<double>(),
                          j.at("tau").get<double>(), j.at("accepted_flips").get<std::int64_t>()};
}

}  // namespace

Json to_json(const HyperParams& h) {
  return Json{{"alpha", h.alpha},
              {"beta", h.beta},
              {"gamma", h.gamma},
              {"lambda", h.lambda},
              {"tau", h.tau},
              {"lambda_prior", {h.lambda_prior.a, h.lambda_prior.b}},
              {"tau_prior", {h.tau_prior.a, h.tau_prior.b}}};
}

HyperParams hyper_from_json(const Json& j) {
  HyperParams h;
  h.alpha = j.at("alpha").get<std::vector<double>>();
  h.beta = j.at("beta").get<double>();
  h.gamma = j.at("gamma").get<double>();
  h.lambda = j.at("lambda").get<double>();
  h.tau = j.at("tau").get<double>();
  if (j.contains("lambda_prior")) h.lambda_prior = {j["lambda_prior"][0].get<double>(), j["lambda_prior"][1].get<double>()};
  if (j.contains("tau_prior")) h.tau_prior = {j["tau_prior"][0].get<double>(), j["tau_prior"][1].get<double>()};
  return h;
}

Json to_json(const ChainConfig& c) {
  return Json{{"num_topics", c.num_topics},
              {"iterations", c.iterations},
              {"burn_in", c.burn_in},
              {"thinning", c.thinning},
              {"mc_samples", c.mc_samples},
              {"seed", c.seed},
              {"hyperopt_interval", c.hyperopt_interval},
              {"hyperopt_start", c.hyperopt_start},
              {"s_init", to_string(c.s_init)},
              {"estimator", to_string(c.estimator)},
              {"alpha_mode", to_string(c.alpha_mode)},
              {"optimize_beta", c.optimize_beta},
              {"sample_selection", c.sample_selection},
              {"sample_lambda_tau", c.sample_lambda_tau},
              {"fixed_point",
               {{"max_iters", c.fixed_point.max_iters},
                {"tolerance", c.fixed_point.tolerance},
                {"floor", c.fixed_point.floor}}},
              {"check_invariants", c.check_invariants}};
}

ChainConfig config_from_json(const Json& j) {
  ChainConfig c;
  c.num_topics = j.at("num_topics").get<std::size_t>();
  c.iterations = j.at("iterations").get<std::int64_t>();
  c.burn_in = j.at("burn_in").get<std::int64_t>();
  c.thinning = j.at("thinning").get<std::int64_t>();
  c.mc_samples = j.at("mc_samples").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hyperopt_interval = j.at("hyperopt_interval").get<std::int64_t>();
  c.hyperopt_start = j.at("hyperopt_start").get<std::int64_t>();
  c.s_init = selection_init_from(j.at("s_init").get<std::string>());
  c.estimator = estimator_from(j.at("estimator").get<std::string>());
  c.alpha_mode = alpha_mode_from(j.at("alpha_mode").get<std::string>());
  c.optimize_beta = j.at("optimize_beta").get<bool>();
  c.sample_selection = j.at("sample_selection").get<bool>();
  c.sample_lambda_tau = j.at("sample_lambda_tau").get<bool>();
  const auto& fp = j.at("fixed_point");
  c.fixed_point.max_iters = fp.at("max_iters").get<int>();
  c.fixed_point.tolerance = fp.at("tolerance").get<double>();
  c.fixed_point.floor = fp.at("floor").get<double>();
  c.check_invariants = j.value("check_invariants", false);
  return c;
}

Json to_json(const ChainState& st) {
  return Json{{"num_topics", st.num_topics()},
              {"s", bits_to_json(st.s)},
              {"z", st.z},
              {"doc_topic", table_to_json(st.doc_topic)},
              {"word_topic", table_to_json(st.word_topic)},
              {"topic_totals", st.topic_totals},
              {"doc_informative", st.doc_informative},
              {"noninf_counts", st.noninf_counts},
              {"noninf_total", st.noninf_total},
              {"informative_total", st.informative_total},
              {"lambda", st.lambda},
              {"tau", st.tau},
              {"iteration", st.iteration},
              {"rng", st.rng.serialize()}};
}

ChainState state_from_json(const Json& j, const Corpus& corpus) {
  ChainState st;
  st.s = bits_from_json(j.at("s"));
  st.z = j.at("z").get<std::vector<std::vector<Topic>>>();
  if (st.s.size() != corpus.num_words() || st.z.size() != corpus.num_docs()) {
    throw ParseError("checkpoint state does not match the corpus dimensions");
  }
  st.topic_totals.assign(j.at("num_topics").get<std::size_t>(), 0);
  st.lambda = j.at("lambda").get<double>();
  st.tau = j.at("tau").get<double>();
  st.iteration = j.at("iteration").get<std::int64_t>();
  st.rng.deserialize(j.at("rng").get<std::string>());
  st.recount(corpus);
  st.check_invariants(corpus);
  if (!(table_from_json(j.at("doc_topic")) == st.doc_topic) ||
      !(table_from_json(j.at("word_topic")) == st.word_topic) ||
      j.at("topic_totals").get<std::vector<std::int64_t>>() != st.topic_totals ||
      j.at("noninf_counts").get<std::vector<std::int64_t>>() != st.noninf_counts) {
    throw ParseError("checkpoint count tables disagree with its assignments");
  }
  return st;
}

Json to_json(const PosteriorSummary& s, bool include_samples) {
  Json j{{"format", kSummaryFormat},
         {"model", s.model},
         {"seed", s.seed},
         {"num_topics", s.num_topics()},
         {"num_words", s.num_words()},
         {"num_docs", s.theta_hat.size()},
         {"num_informative", s.num_informative()},
         {"s_hat", bits_to_json(s.s_hat)},
         {"tau_hat", s.tau_hat},
         {"lambda_hat", s.lambda_hat},
         {"noninf_total", s.noninf_total},
         {"hyper", to_json(s.hyper)},
         {"phi_hat", s.phi_hat},
         {"psi_hat", s.psi_hat},
         {"theta_hat", s.theta_hat},
         {"vocab", s.vocab}};
  if (include_samples) {
    Json samples = Json::array();
    for (const auto& sample : s.thinned_samples) samples.push_back(sample_to_json(sample));
    j["thinned_samples"] = std::move(samples);
  }
  return j;
}

PosteriorSummary summary_from_json(const Json& j) {
  if (j.value("format", std::string{}) != kSummaryFormat) throw ParseError("not a vslda summary file");
  PosteriorSummary s;
  s.model = j.at("model").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.s_hat = bits_from_json(j.at("s_hat"));
  s.tau_hat = j.at("tau_hat").get<double>();
  s.lambda_hat = j.at("lambda_hat").get<double>();
  s.noninf_total = j.value("noninf_total", std::int64_t{0});
  s.hyper = hyper_from_json(j.at("hyper"));
  s.phi_hat = j.at("phi_hat").get<std::vector<std::vector<double>>>();
  s.psi_hat = j.at("psi_hat").get<std::vector<double>>();
  s.theta_hat = j.at("theta_hat").get<std::vector<std::vector<double>>>();
  s.vocab = j.value("vocab", std::vector<std::string>{});
  if (j.contains("thinned_samples")) {
    for (const auto& sample : j.at("thinned_samples")) s.thinned_samples.push_back(sample_from_json(sample));
  }
  return s;
}

void write_json(const Json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write-then-rename so an interrupted write never leaves a truncated file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << j.dump() << '\n';
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void write_summary(const PosteriorSummary& summary, const fs::path& path) {
  write_json(to_json(summary), path);
}

PosteriorSummary read_summary(const fs::path& path) { return summary_from_json(read_json(path)); }

void write_checkpoint(const ChainProgress& p, const fs::path& path) {
  Json samples = Json::array();
  for (const auto& s : p.samples) samples.push_back(sample_to_json(s));
  Json trace = Json::array();
  for (const auto& d : p.trace) trace.push_back(diag_to_json(d));
  Json j{{"format", kCheckpointFormat},
         {"model", p.model},
         {"config", to_json(p.config)},
         {"hyper", to_json(p.hyper)},
         {"state", to_json(p.state)},
         {"samples", std::move(samples)},
         {"trace", std::move(trace)}};
  j["last_retained"] = p.last_retained ? to_json(*p.last_retained) : Json(nullptr);
  write_json(j, path);
}

ChainProgress read_checkpoint(const fs::path& path, const Corpus& corpus) {
  const Json j = read_json(path);
  if (j.value("format", std::string{}) != kCheckpointFormat) {
    throw ParseError("'" + path.string() + "' is not a vslda checkpoint");
  }
  ChainProgress p;
  p.model = j.at("model").get<std::string>();
  p.config = config_from_json(j.at("config"));
  p.hyper = hyper_from_json(j.at("hyper"));
  p.state = state_from_json(j.at("state"), corpus);
  for (const auto& s : j.at("samples")) p.samples.push_back(sample_from_json(s));
  for (const auto& d : j.at("trace")) p.trace.push_back(diag_from_json(d));
  if (!j.at("last_retained").is_null()) p.last_retained = state_from_json(j.at("last_retained"), corpus);
  return p;
}

void write_diagnostics_csv(const std::vector<SweepDiagnostics>& trace, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "iteration,log_likelihood,num_informative,lambda,tau,accepted_flips\n";
  char buf[160];
  for (const auto& d : trace) {
    std::snprintf(buf, sizeof(buf), "%lld,%.10f,%lld,%.10f,%.10f,%lld\n", static_cast<long long>(d.iteration),
                  d.log_likelihood, static_cast<long long>(d.num_informative), d.lambda, d.tau,
                  static_cast<long long>(d.accepted_flips));
    out << buf;
  }
}

}  // namespace vslda
