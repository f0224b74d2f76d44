// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>
#include <swirl/model_client.hpp>
#include <swirl/serialization.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swirl
{

/// Exactly K sub-trajectories; the i-th pairs s_i with a_i. Throws InvalidTrajectory when
/// validate_trajectory reports violations.
std::vector<SubTrajectory> decompose(const Trajectory& t);

/// Reads the LAST case-insensitive standalone occurrence of either token. No occurrence yields a
/// negative verdict with parse_ok = false.
Judgment parse_verdict(std::string_view reply, std::string_view positive_token, std::string_view negative_token,
                       std::string judge_model_id);

/// Process-judge request for a sub-trajectory: the conversation is s_i followed by a_i.
Messages render_step_judge_request(const SeedQuestion& q, const SubTrajectory& sub);

/// Outcome-judge request; the task kind picks the search or math grading template.
Messages render_outcome_judge_request(const SeedQuestion& q, std::string_view answer);

Judgment judge_step(const SeedQuestion& q, const SubTrajectory& sub, ChatModel& judge,
                    const SamplingParams& params = SamplingParams::deterministic());

/// Throws MissingGoldenAnswer.
Judgment judge_outcome(const SeedQuestion& q, std::string_view answer, ChatModel& judge,
                       const SamplingParams& params = SamplingParams::deterministic());

/// Outcome judgment for a whole trajectory. Trajectories without a final answer fail without
/// consulting the judge.
Judgment judge_trajectory_outcome(const Trajectory& t, ChatModel& judge,
                                  const SamplingParams& params = SamplingParams::deterministic());

enum class FilterStrategy
{
    none,
    process,
    outcome,
    process_and_outcome,
};

std::string_view to_string(FilterStrategy s) noexcept;
FilterStrategy parse_filter_strategy(std::string_view text);

/// Judgments for a set of trajectories, keyed by trajectory id.
struct JudgmentSet
{
    std::map<std::string, std::map<int, Judgment>> steps; // trajectory id -> step index -> judgment
    std::map<std::string, Judgment> outcomes;

    int unparsed() const;
};

/// Ids of kept trajectories, in input order. Filtering is all-or-nothing per trajectory.
/// Throws MissingJudgments when the strategy needs a judgment that is absent.
std::vector<std::string> apply_filter(const std::vector<Trajectory>& trajectories, const JudgmentSet& judgments,
                                      FilterStrategy strategy);

/// Judges every sub-trajectory (in parallel) and records step_reward = 1.0 / 0.0 along with the
/// judgment. Subs that already carry a reward are skipped, so an interrupted run can resume.
/// `seeds` maps trajectory id -> seed question.
void annotate_rewards(std::vector<SubTrajectory>& subs, const std::map<std::string, SeedQuestion>& seeds,
                      ChatModel& reward_model, int workers = 1,
                      const SamplingParams& params = SamplingParams::deterministic());

// ---------------------------------------------------------------------------
// Datasets

inline constexpr int kSchemaVersion = 1;

struct DatasetManifest
{
    std::string dataset_id;
    std::string kind; // "trajectories", "subtrajectories", "judgments", "training_rl", "training_sft"
    std::vector<std::string> source_run_ids;
    FilterStrategy strategy = FilterStrategy::none;
    std::int64_t trajectory_count = 0;
    std::int64_t subtrajectory_count = 0;
    std::string judge_model_id;
    std::string content_hash;
    int schema_version = kSchemaVersion;
    std::vector<std::int64_t> rng_seeds;
    std::int64_t unparsed_judgments = 0;
    std::string input_key; // hash of the command inputs that produced this dataset
    ojson effective_config = ojson::object();

    ojson to_json() const;
    static DatasetManifest from_json(const ojson& j);
};

std::filesystem::path manifest_path(const std::filesystem::path& dataset);

/// Writes through "<path>.tmp" and renames, creating parent directories.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Writes lines as '\n'-separated JSONL (no trailing blank line) through a temp file, then the
/// manifest beside it. Fills content_hash, dataset_id and schema_version.
DatasetManifest write_jsonl(const std::filesystem::path& path, const std::vector<std::string>& lines,
                            DatasetManifest manifest);

struct JsonlDataset
{
    std::vector<std::string> lines;
    DatasetManifest manifest;
};

/// Throws HashMismatch, SchemaVersionUnsupported, IoError.
JsonlDataset read_jsonl(const std::filesystem::path& path);

/// XXH64 over the file bytes as written.
std::string content_hash_of(const std::vector<std::string>& lines);

DatasetManifest write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& ts,
                                   DatasetManifest manifest = {});
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path, DatasetManifest* manifest = nullptr);

DatasetManifest write_subtrajectories(const std::filesystem::path& path, const std::vector<SubTrajectory>& subs,
                                      DatasetManifest manifest = {});
std::vector<SubTrajectory> read_subtrajectories(const std::filesystem::path& path, DatasetManifest* manifest = nullptr);

/// Judgment record: {trajectory_id, kind:"step"|"outcome", step_index?, judgment}.
std::vector<std::string> judgment_lines(const JudgmentSet& set);
JudgmentSet judgments_from_lines(const std::vector<std::string>& lines);

// ---------------------------------------------------------------------------
// Training export

enum class ExportFormat
{
    rl,  // every record with its step reward
    sft, // reward-1.0 records only, reward field omitted
};

ExportFormat parse_export_format(std::string_view text);

struct TrainingRecord
{
    Messages context;
    std::string target;
    std::optional<double> step_reward;
    std::string trajectory_id;
    int step_index = 1;

    bool operator==(const TrainingRecord&) const = default;
};

/// {context, target, step_reward, trajectory_id, step_index}; `sft` drops step_reward and keeps
/// records whose reward is 1.0 (or unset, for data that was filtered upstream). Throws
/// MissingRewards for `rl` when any reward is unset.
std::vector<std::string> export_training_records(const std::vector<SubTrajectory>& subs, ExportFormat format);
std::vector<TrainingRecord> import_training_records(const std::vector<std::string>& lines);

} // namespace swirl
