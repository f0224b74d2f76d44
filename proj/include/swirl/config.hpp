// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/errors.hpp>
#include <swirl/model_client.hpp>
#include <swirl/pipeline.hpp>
#include <swirl/rollout.hpp>
#include <swirl/search.hpp>
#include <swirl/trainer.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swirl
{

/// Raised with every problem found, not just the first.
class ConfigError: public InvalidInput
{
  public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return _problems; }

  private:
    std::vector<std::string> _problems;
};

struct EndpointConfig
{
    std::string kind; // http | scripted | hash (embedder only); empty when not configured
    ModelEndpoint http;
    std::filesystem::path script; // scripted
    std::size_t dimension = 256;  // embedders

    bool configured() const noexcept { return !kind.empty(); }
    ojson to_json() const;
};

struct ToolConfig
{
    std::size_t search_k = 1;
    std::size_t snippet_chars = 1500;
};

struct RunConfig
{
    EndpointConfig generator;
    EndpointConfig judge;
    std::optional<EndpointConfig> math_judge; // falls back to judge
    EndpointConfig reward;
    EndpointConfig embedder;
    ToolConfig tools;
    RolloutLimits limits;
    FilterStrategy strategy = FilterStrategy::process_and_outcome;
    ExportFormat export_format = ExportFormat::rl;
    std::filesystem::path seeds;
    std::filesystem::path corpus;
    std::filesystem::path out_dir = "out";
    std::int64_t rng_seed = 0;
    SamplingParams sampling = SamplingParams::generation();
    int workers = 1;
    double max_abort_rate = 0.5;
    toy::TrainConfig trainer;
    std::uint64_t env_seed = 1;
    int train_steps = 2000;

    /// Effective configuration as recorded in manifests. API keys never appear, only the
    /// variable names that hold them.
    ojson to_json() const;

    /// Relative paths resolve against `base_dir`. Throws ConfigError listing every problem.
    static RunConfig from_json(const ojson& j, const std::filesystem::path& base_dir);

    /// Value-level checks that do not touch the filesystem.
    std::vector<std::string> problems() const;
};

RunConfig load_config(const std::filesystem::path& path);

std::unique_ptr<ChatModel> make_chat_model(const EndpointConfig& config);
std::unique_ptr<Embedder> make_embedder(const EndpointConfig& config);

/// JSONL of {id, question, task_kind?, golden_answer?}. Throws InvalidInput / IoError.
std::vector<SeedQuestion> load_seed_questions(const std::filesystem::path& path);

} // namespace swirl
