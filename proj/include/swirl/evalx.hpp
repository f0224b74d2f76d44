// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>
#include <swirl/model_client.hpp>
#include <swirl/rollout.hpp>
#include <swirl/serialization.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace swirl
{

struct TokenMetrics
{
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Extractive-QA normalization: lowercase, strip ASCII punctuation, drop the articles a/an/the,
/// collapse whitespace.
std::string normalize_answer(std::string_view text);

/// Bag-of-tokens overlap after normalize_answer. Both empty -> all 1.0; exactly one empty -> all 0.0.
TokenMetrics token_f1(std::string_view predicted, std::string_view golden);

/// Half-width of the 95% normal interval for a proportion: 1.96 * sqrt(p (1 - p) / n).
/// Throws InvalidInput for p outside [0, 1] or n < 1.
double margin_of_error(double p, std::int64_t n);

struct MetricEstimate
{
    double p = 0.0;
    std::int64_t n = 0;
    double margin = 0.0;

    static MetricEstimate of(double p, std::int64_t n) { return {p, n, margin_of_error(p, n)}; }
};

/// Mean within each inner vector, then the unweighted mean of those means. Throws EmptyInput
/// when the outer vector or any inner vector is empty.
double macro_average(const std::vector<std::vector<double>>& per_trajectory);

/// Judges every step of every trajectory with the process judge and macro-averages the 1/0
/// labels (within, then across trajectories).
double mean_process_label(const std::vector<Trajectory>& trajectories, ChatModel& judge, int workers = 1,
                          const SamplingParams& params = SamplingParams::deterministic());

struct EvalRecord
{
    std::string question_id;
    std::string trajectory_id;
    std::string predicted; // empty when exhausted or aborted
    std::string golden;
    std::optional<Judgment> verdict;
    TokenMetrics metrics;
    int num_steps = 0;
    TrajectoryStatus status = TrajectoryStatus::aborted;
    std::string error; // per-question failure, if any

    bool correct() const noexcept { return verdict && verdict->positive(); }
};

struct EvalReport
{
    std::string dataset_id;
    std::string model_id;
    std::string judge_id;
    std::int64_t n = 0;
    MetricEstimate accuracy;
    MetricEstimate f1;
    MetricEstimate precision;
    MetricEstimate recall;
    std::optional<double> mean_process_label;
    std::vector<EvalRecord> records; // sorted by question id

    ojson to_json() const;
    /// question_id,trajectory_id,status,num_steps,correct,f1,precision,recall,predicted,golden
    std::string to_csv() const;
};

struct EvalOptions
{
    int workers = 1;
    std::optional<std::set<std::string>> id_subset;
    std::string dataset_id;
    SamplingParams sampling = SamplingParams::deterministic();
    /// When set, the evaluated trajectories are also scored for mean process label.
    ChatModel* process_judge = nullptr;
    /// Outcome judge for math questions; the main judge grades them when unset.
    ChatModel* math_judge = nullptr;
};

/// Runs the rollout loop per question, grades each final answer with the outcome judge and token
/// metrics, and aggregates means with margins. Questions without a golden answer raise
/// MissingGoldenAnswer before any model call.
EvalReport run_eval(std::vector<SeedQuestion> questions, ChatModel& model, const Toolbox& tools,
                    const RolloutLimits& limits, ChatModel& judge, const EvalOptions& options = {});

/// One id per line; blank lines and lines starting with '#' are ignored.
std::set<std::string> read_id_subset(const std::filesystem::path& path);

} // namespace swirl
