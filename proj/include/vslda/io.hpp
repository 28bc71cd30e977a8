#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vslda/model.hpp"
#include "vslda/sampler.hpp"

namespace vslda {

using Json = nlohmann::json;

Json to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const Json& j);

Json to_json(const ChainConfig& config);
ChainConfig config_from_json(const Json& j);

Json to_json(const ChainState& state);
/// Restores s, z, lambda, tau, iteration and RNG; recounts and checks the
/// stored count tables against the recount.
ChainState state_from_json(const Json& j, const Corpus& corpus);

Json to_json(const PosteriorSummary& summary, bool include_samples = true);
PosteriorSummary summary_from_json(const Json& j);

void write_json(const Json& j, const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

void write_summary(const PosteriorSummary& summary, const std::filesystem::path& path);
PosteriorSummary read_summary(const std::filesystem::path& path);

/// Checkpoint format "vslda-checkpoint/1": a JSON object with the chain
/// config, current hyperparameters, full state (s, z, count tables, lambda,
/// tau, iteration, RNG engine state), retained samples and the trace so far.
void write_checkpoint(const ChainProgress& progress, const std::filesystem::path& path);
ChainProgress read_checkpoint(const std::filesystem::path& path, const Corpus& corpus);

/// CSV with header iteration,log_likelihood,num_informative,lambda,tau,accepted_flips.
void write_diagnostics_csv(const std::vector<SweepDiagnostics>& trace, const std::filesystem::path& path);

}  // namespace vslda
