// SPDX-License-Identifier: Apache-2.0
#include <swirl/core.hpp>
#include <swirl/errors.hpp>
#include <swirl/hash.hpp>

#include <cstdio>
#include <unordered_set>

namespace swirl
{

std::string_view to_string(TaskKind kind) noexcept
{
    return kind == TaskKind::math ? "math" : "search_qa";
}

std::string_view to_string(ToolKind kind) noexcept
{
    return kind == ToolKind::math_exp ? "math_exp" : "search_query";
}

std::string_view to_string(Role role) noexcept
{
    return role == Role::model ? "model" : "user";
}

std::string_view to_string(TrajectoryStatus status) noexcept
{
    switch (status)
    {
        case TrajectoryStatus::answered: return "answered";
        case TrajectoryStatus::exhausted: return "exhausted";
        case TrajectoryStatus::aborted: return "aborted";
    }
    return "aborted";
}

TaskKind parse_task_kind(std::string_view text)
{
    if (text == "search_qa")
        return TaskKind::search_qa;
    if (text == "math")
        return TaskKind::math;
    throw InvalidInput("unknown task_kind '" + std::string(text) + "'");
}

ToolKind parse_tool_kind(std::string_view text)
{
    if (text == "search_query")
        return ToolKind::search_query;
    if (text == "math_exp")
        return ToolKind::math_exp;
    throw InvalidInput("unknown tool kind '" + std::string(text) + "'");
}

Role parse_role(std::string_view text)
{
    if (text == "user")
        return Role::user;
    if (text == "model" || text == "assistant")
        return Role::model;
    throw InvalidInput("unknown role '" + std::string(text) + "'");
}

TrajectoryStatus parse_status(std::string_view text)
{
    if (text == "answered")
        return TrajectoryStatus::answered;
    if (text == "exhausted")
        return TrajectoryStatus::exhausted;
    if (text == "aborted")
        return TrajectoryStatus::aborted;
    throw InvalidInput("unknown trajectory status '" + std::string(text) + "'");
}

ToolKind tool_for(TaskKind kind) noexcept
{
    return kind == TaskKind::math ? ToolKind::math_exp : ToolKind::search_query;
}

void validate_seed_set(const std::vector<SeedQuestion>& seeds)
{
    std::unordered_set<std::string> ids;
    for (const auto& seed: seeds)
    {
        if (seed.id.empty())
            throw InvalidInput("seed question with empty id");
        if (!ids.insert(seed.id).second)
            throw InvalidInput("duplicate seed id '" + seed.id + "'");
    }
}

std::optional<std::string> Trajectory::final_answer() const
{
    if (steps.empty())
        return std::nullopt;
    if (const auto* answer = std::get_if<FinalAnswer>(&steps.back().action.parsed))
        return answer->text;
    return std::nullopt;
}

Judgment Judgment::make(std::string judge_model_id, Verdict verdict, std::string raw_text, bool parse_ok)
{
    return Judgment {
        .judge_model_id = std::move(judge_model_id),
        .verdict = parse_ok ? verdict : Verdict::negative,
        .raw_text = std::move(raw_text),
        .parse_ok = parse_ok,
    };
}

double reward_from(Verdict verdict) noexcept
{
    return verdict == Verdict::positive ? 1.0 : 0.0;
}

namespace
{

std::string at_step(int i, std::string_view what)
{
    return "step " + std::to_string(i) + ": " + std::string(what);
}

bool is_strict_prefix(const Messages& prefix, const Messages& whole)
{
    if (prefix.size() >= whole.size())
        return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] != whole[i])
            return false;
    return true;
}

} // namespace

std::vector<std::string> validate_trajectory(const Trajectory& t)
{
    std::vector<std::string> out;
    const int k = t.num_actions();

    if (t.id.empty())
        out.emplace_back("trajectory: empty id");
    if (t.seed.id.empty())
        out.emplace_back("trajectory: empty seed id");
    if (t.max_steps < 1)
        out.emplace_back("trajectory: max_steps must be >= 1");
    if (k == 0)
    {
        out.emplace_back("trajectory: no actions");
        return out;
    }
    if (k > t.max_steps)
        out.emplace_back("trajectory: " + std::to_string(k) + " actions exceed max_steps " + std::to_string(t.max_steps));

    for (int i = 1; i <= k; ++i)
    {
        const auto& step = t.steps[static_cast<std::size_t>(i - 1)];
        const auto& msgs = step.state.messages;

        if (step.action.index != i)
            out.push_back(at_step(i, "action index is " + std::to_string(step.action.index)));

        if (msgs.empty())
            out.push_back(at_step(i, "empty state"));
        for (std::size_t m = 0; m < msgs.size(); ++m)
        {
            const auto expected = (m % 2 == 0) ? Role::user : Role::model;
            if (msgs[m].role != expected)
            {
                out.push_back(at_step(i, "roles do not alternate"));
                break;
            }
        }
        if (!msgs.empty() && msgs.back().role != Role::user)
            out.push_back(at_step(i, "state does not end with a user turn"));

        if (i < k && !step.action.is_tool())
            out.push_back(at_step(i, "non-final action is not a tool call"));
        if (step.action.is_answer() && i != k)
            out.push_back(at_step(i, "final answer before last step"));

        if (i > 1)
        {
            const auto& prev = t.steps[static_cast<std::size_t>(i - 2)];
            const auto& before = prev.state.messages;
            bool composed = msgs.size() == before.size() + 2 && is_strict_prefix(before, msgs)
                            && msgs[before.size()].role == Role::model
                            && msgs[before.size()].content == prev.action.raw_completion
                            && msgs[before.size() + 1].role == Role::user;
            if (composed)
            {
                if (const auto* call = std::get_if<ToolCall>(&prev.action.parsed))
                {
                    if (!call->result)
                        out.push_back(at_step(i - 1, "executed tool call has no result"));
                    else if (msgs.back().content != call->payload + " -> " + *call->result)
                        out.push_back(at_step(i, "environment turn does not match tool result"));
                }
            }
            else
            {
                out.push_back(at_step(i, "state not prefix-composed"));
            }
        }
    }

    const auto& last = t.steps.back().action;
    switch (t.status)
    {
        case TrajectoryStatus::answered:
            if (!last.is_answer())
                out.emplace_back("trajectory: status answered but last action is not an answer");
            break;
        case TrajectoryStatus::exhausted:
            if (last.is_answer())
                out.emplace_back("trajectory: status exhausted but last action is an answer");
            else if (!last.is_tool() || k != t.max_steps)
                out.emplace_back("trajectory: status exhausted without reaching the step budget");
            break;
        case TrajectoryStatus::aborted:
            if (!last.is_malformed())
                out.emplace_back("trajectory: status aborted but last action is not malformed");
            break;
    }
    return out;
}

std::string trajectory_content_hash(const Trajectory& t)
{
    HashBuilder h;
    h.add("trajectory/v1").add(t.seed.id).add(static_cast<std::int64_t>(t.steps.size()));
    for (const auto& step: t.steps)
    {
        h.add(static_cast<std::int64_t>(step.state.messages.size()));
        for (const auto& m: step.state.messages)
            h.add(to_string(m.role)).add(m.content);
        h.add(step.action.raw_completion);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ToolCall>)
                {
                    h.add(to_string(p.kind)).add(p.payload);
                    h.add(p.result ? std::int64_t {1} : std::int64_t {0});
                    if (p.result)
                        h.add(*p.result);
                }
                else if constexpr (std::is_same_v<T, FinalAnswer>)
                    h.add("answer").add(p.text);
                else
                    h.add("malformed").add(p.reason);
            },
            step.action.parsed);
    }
    return h.hex();
}

std::string make_trajectory_id(std::string_view seed_id, int sample_index)
{
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "#%03d", sample_index);
    return std::string(seed_id) + suffix;
}

std::string trim(std::string_view text)
{
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto begin = text.find_first_not_of(ws);
    if (begin == std::string_view::npos)
        return {};
    const auto end = text.find_last_not_of(ws);
    return std::string(text.substr(begin, end - begin + 1));
}

} // namespace swirl
