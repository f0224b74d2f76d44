// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace swirl
{

enum class TaskKind
{
    search_qa,
    math,
};

enum class ToolKind
{
    search_query,
    math_exp,
};

enum class Role
{
    user,
    model,
};

std::string_view to_string(TaskKind kind) noexcept;
std::string_view to_string(ToolKind kind) noexcept;
std::string_view to_string(Role role) noexcept;
TaskKind parse_task_kind(std::string_view text);
ToolKind parse_tool_kind(std::string_view text);
Role parse_role(std::string_view text);

/// The tool a task is meant to use.
ToolKind tool_for(TaskKind kind) noexcept;

struct Message
{
    Role role = Role::user;
    std::string content;

    bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

struct SeedQuestion
{
    std::string id;
    std::string question;
    std::optional<std::string> golden_answer;
    TaskKind task_kind = TaskKind::search_qa;

    bool operator==(const SeedQuestion&) const = default;
};

/// Throws InvalidInput on empty or duplicate ids.
void validate_seed_set(const std::vector<SeedQuestion>& seeds);

struct ToolCall
{
    ToolKind kind = ToolKind::search_query;
    std::string payload;               // trimmed inner tag text
    std::optional<std::string> result; // set iff the call was executed

    bool operator==(const ToolCall&) const = default;
};

struct FinalAnswer
{
    std::string text;

    bool operator==(const FinalAnswer&) const = default;
};

struct Malformed
{
    std::string reason;

    bool operator==(const Malformed&) const = default;
};

using ParsedAction = std::variant<ToolCall, FinalAnswer, Malformed>;

struct Action
{
    int index = 1; // 1-based
    std::string raw_completion;
    ParsedAction parsed;
    bool repeat = false;       // tool payload equals an earlier payload in the same trajectory
    int malformed_retries = 0; // discarded malformed completions before this one

    bool is_answer() const noexcept { return std::holds_alternative<FinalAnswer>(parsed); }
    bool is_tool() const noexcept { return std::holds_alternative<ToolCall>(parsed); }
    bool is_malformed() const noexcept { return std::holds_alternative<Malformed>(parsed); }

    bool operator==(const Action&) const = default;
};

struct State
{
    Messages messages;

    bool operator==(const State&) const = default;
};

struct Step
{
    State state;
    Action action;

    bool operator==(const Step&) const = default;
};

enum class TrajectoryStatus
{
    answered,
    exhausted,
    aborted,
};

std::string_view to_string(TrajectoryStatus status) noexcept;
TrajectoryStatus parse_status(std::string_view text);

struct Trajectory
{
    std::string id;
    SeedQuestion seed;
    std::vector<Step> steps;
    TrajectoryStatus status = TrajectoryStatus::aborted;
    int max_steps = 1;
    /// Run metadata. Never hashed and never written to datasets.
    std::optional<std::string> generated_at;

    int num_actions() const noexcept { return static_cast<int>(steps.size()); }

    /// Answer text of a_K when the trajectory is answered.
    std::optional<std::string> final_answer() const;

    bool operator==(const Trajectory& other) const
    {
        return id == other.id && seed == other.seed && steps == other.steps && status == other.status
               && max_steps == other.max_steps;
    }
};

enum class Verdict
{
    positive,
    negative,
};

struct Judgment
{
    std::string judge_model_id;
    Verdict verdict = Verdict::negative;
    std::string raw_text;
    bool parse_ok = false;

    /// Enforces parse_ok == false => negative.
    static Judgment make(std::string judge_model_id, Verdict verdict, std::string raw_text, bool parse_ok);

    bool positive() const noexcept { return verdict == Verdict::positive; }
    bool operator==(const Judgment&) const = default;
};

/// positive -> 1.0, negative -> 0.0.
double reward_from(Verdict verdict) noexcept;

struct SubTrajectory
{
    std::string trajectory_id;
    int step_index = 1;
    State context;
    Action target_action;
    std::optional<double> step_reward;
    std::vector<Judgment> judgments;

    bool operator==(const SubTrajectory&) const = default;
};

/// Every broken Trajectory/State invariant, each prefixed with "step i: " where applicable.
std::vector<std::string> validate_trajectory(const Trajectory& t);

/// Content digest over seed id, message contents and parsed actions (16 hex chars).
std::string trajectory_content_hash(const Trajectory& t);

/// Stable, sortable trajectory id: "<seed id>#<sample index, 3 digits>".
std::string make_trajectory_id(std::string_view seed_id, int sample_index);

std::string trim(std::string_view text);

} // namespace swirl
