// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>
#include <swirl/model_client.hpp>
#include <swirl/search.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swirl
{

struct RolloutLimits
{
    /// Unset means the task default: 5 steps for search_qa, 10 for math.
    std::optional<int> max_steps;
    int malformed_retries = 1;
    int samples_per_seed = 5;

    int max_steps_for(TaskKind kind) const noexcept;
    void validate() const;
};

/// s_1 for a seed question. Throws InvalidInput on an empty question.
Messages render_seed_prompt(const SeedQuestion& q, const RolloutLimits& limits);

/// <answer> wins over tool tags; otherwise the earliest well-formed <search_query> or
/// <math_exp> pair; otherwise Malformed. Tag names are case-sensitive and only the first pair
/// of each kind is read.
ParsedAction extract_action(std::string_view raw);

/// "{payload} -> {result}". Throws MissingResult when the call was not executed.
std::string render_env_turn(const ToolCall& call);

class Tool
{
  public:
    virtual ~Tool() = default;
    virtual ToolKind kind() const = 0;
    /// Returns the text injected into the trajectory. Failures are "ERROR: ..." strings.
    virtual std::string execute(std::string_view payload) = 0;
};

class CalculatorTool final: public Tool
{
  public:
    ToolKind kind() const override { return ToolKind::math_exp; }
    std::string execute(std::string_view payload) override;
};

class SearchTool final: public Tool
{
  public:
    SearchTool(std::shared_ptr<const VectorIndex> index, std::shared_ptr<Embedder> embedder, std::size_t k = 1,
               std::size_t snippet_chars = 1500);

    ToolKind kind() const override { return ToolKind::search_query; }
    /// Top-k rendered documents, separated by blank lines.
    std::string execute(std::string_view payload) override;

  private:
    std::shared_ptr<const VectorIndex> _index;
    std::shared_ptr<Embedder> _embedder;
    std::size_t _k;
    std::size_t _snippet_chars;
};

class Toolbox
{
  public:
    Toolbox& add(std::shared_ptr<Tool> tool);
    Tool* find(ToolKind kind) const;

  private:
    std::map<ToolKind, std::shared_ptr<Tool>> _tools;
};

/// Generates one trajectory. Model errors propagate; tool errors are injected as results.
/// Throws InvalidInput when the toolbox lacks the tool for the seed's task.
Trajectory run_trajectory(const SeedQuestion& q, ChatModel& model, const Toolbox& tools, const RolloutLimits& limits,
                          const SamplingParams& sampling, std::string trajectory_id);

struct BatchReport
{
    int answered = 0;
    int exhausted = 0;
    int aborted = 0;
    std::int64_t model_calls = 0; // sum over trajectories of K + malformed retries
    double wall_seconds = 0.0;
    std::vector<std::string> failures; // "trajectory id: reason" for trajectories aborted by errors

    int total() const noexcept { return answered + exhausted + aborted; }
};

struct BatchOptions
{
    int workers = 1;
    /// BatchAborted is raised when the aborted fraction exceeds this.
    double max_abort_rate = 0.5;
    /// Called in output order from a single thread at a time.
    std::function<void(const Trajectory&)> sink;
};

struct BatchResult
{
    std::vector<Trajectory> trajectories;
    BatchReport report;
};

/// samples_per_seed trajectories per seed, ordered by (seed id, sample index) regardless of
/// completion order. A model failure aborts only the trajectory it happens in. When
/// `sampling.seed` is set, each sample gets its own seed derived from it.
BatchResult run_batch(std::vector<SeedQuestion> seeds, const RolloutLimits& limits, ChatModel& model,
                      const Toolbox& tools, const SamplingParams& sampling, const BatchOptions& options = {});

} // namespace swirl
