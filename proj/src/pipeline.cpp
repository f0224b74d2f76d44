// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/parallel.hpp>
#include <swirl/pipeline.hpp>
#include <swirl/prompts.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace swirl
{

std::vector<SubTrajectory> decompose(const Trajectory& t)
{
    if (const auto violations = validate_trajectory(t); !violations.empty())
        throw InvalidTrajectory("trajectory '" + t.id + "': " + violations.front());

    std::vector<SubTrajectory> subs;
    subs.reserve(t.steps.size());
    for (const auto& step: t.steps)
    {
        SubTrajectory sub;
        sub.trajectory_id = t.id;
        sub.step_index = step.action.index;
        sub.context = step.state;
        sub.target_action = step.action;
        subs.push_back(std::move(sub));
    }
    return subs;
}

namespace
{

std::string lower(std::string_view s)
{
    std::string out(s);
    for (char& c: out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_word_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Position of the last standalone occurrence, or npos.
std::size_t last_standalone(const std::string& hay, const std::string& needle)
{
    auto pos = hay.rfind(needle);
    while (pos != std::string::npos)
    {
        const bool left = pos == 0 || !is_word_char(hay[pos - 1]);
        const auto end = pos + needle.size();
        const bool right = end >= hay.size() || !is_word_char(hay[end]);
        if (left && right)
            return pos;
        if (pos == 0)
            break;
        pos = hay.rfind(needle, pos - 1);
    }
    return std::string::npos;
}

} // namespace

Judgment parse_verdict(std::string_view reply, std::string_view positive_token, std::string_view negative_token,
                       std::string judge_model_id)
{
    const auto hay = lower(reply);
    const auto pos = last_standalone(hay, lower(positive_token));
    const auto neg = last_standalone(hay, lower(negative_token));
    if (pos == std::string::npos && neg == std::string::npos)
        return Judgment::make(std::move(judge_model_id), Verdict::negative, std::string(reply), false);
    const bool positive = neg == std::string::npos || (pos != std::string::npos && pos > neg);
    return Judgment::make(std::move(judge_model_id), positive ? Verdict::positive : Verdict::negative,
                          std::string(reply), true);
}

Messages render_step_judge_request(const SeedQuestion& q, const SubTrajectory& sub)
{
    auto conversation = sub.context.messages;
    conversation.push_back({Role::model, sub.target_action.raw_completion});
    return {Message {Role::user, prompts::fill(prompts::process_judge, {q.question, prompts::render_conversation(conversation)})}};
}

Messages render_outcome_judge_request(const SeedQuestion& q, std::string_view answer)
{
    if (!q.golden_answer)
        throw MissingGoldenAnswer("seed '" + q.id + "' has no golden answer");
    const auto tmpl = q.task_kind == TaskKind::math ? prompts::outcome_judge_math : prompts::outcome_judge_search;
    return {Message {Role::user, prompts::fill(tmpl, {q.question, *q.golden_answer, answer})}};
}

Judgment judge_step(const SeedQuestion& q, const SubTrajectory& sub, ChatModel& judge, const SamplingParams& params)
{
    const auto reply = complete_chat(judge, render_step_judge_request(q, sub), params);
    return parse_verdict(reply, "GOOD", "BAD", judge.model_id());
}

Judgment judge_outcome(const SeedQuestion& q, std::string_view answer, ChatModel& judge, const SamplingParams& params)
{
    const auto request = render_outcome_judge_request(q, answer);
    const auto reply = complete_chat(judge, request, params);
    return parse_verdict(reply, "YES", "NO", judge.model_id());
}

Judgment judge_trajectory_outcome(const Trajectory& t, ChatModel& judge, const SamplingParams& params)
{
    if (!t.seed.golden_answer)
        throw MissingGoldenAnswer("seed '" + t.seed.id + "' has no golden answer");
    const auto answer = t.final_answer();
    if (!answer)
        return Judgment::make(judge.model_id(), Verdict::negative,
                              "no final answer (" + std::string(to_string(t.status)) + ")", true);
    return judge_outcome(t.seed, *answer, judge, params);
}

std::string_view to_string(FilterStrategy s) noexcept
{
    switch (s)
    {
        case FilterStrategy::none: return "none";
        case FilterStrategy::process: return "process";
        case FilterStrategy::outcome: return "outcome";
        case FilterStrategy::process_and_outcome: return "process_and_outcome";
    }
    return "none";
}

FilterStrategy parse_filter_strategy(std::string_view text)
{
    for (auto s: {FilterStrategy::none, FilterStrategy::process, FilterStrategy::outcome, FilterStrategy::process_and_outcome})
        if (text == to_string(s))
            return s;
    throw InvalidInput("unknown filter strategy '" + std::string(text) + "'");
}

int JudgmentSet::unparsed() const
{
    int n = 0;
    for (const auto& [id, per_step]: steps)
        for (const auto& [i, j]: per_step)
            n += j.parse_ok ? 0 : 1;
    for (const auto& [id, j]: outcomes)
        n += j.parse_ok ? 0 : 1;
    return n;
}

namespace
{

bool process_pass(const Trajectory& t, const JudgmentSet& js)
{
    const auto it = js.steps.find(t.id);
    if (it == js.steps.end())
        throw MissingJudgments("no step judgments for trajectory '" + t.id + "'");
    for (int i = 1; i <= t.num_actions(); ++i)
    {
        const auto jt = it->second.find(i);
        if (jt == it->second.end())
            throw MissingJudgments("no judgment for step " + std::to_string(i) + " of '" + t.id + "'");
        if (!jt->second.positive())
            return false;
    }
    return true;
}

bool outcome_pass(const Trajectory& t, const JudgmentSet& js)
{
    const auto it = js.outcomes.find(t.id);
    if (it == js.outcomes.end())
        throw MissingJudgments("no outcome judgment for trajectory '" + t.id + "'");
    return t.status == TrajectoryStatus::answered && it->second.positive();
}

} // namespace

std::vector<std::string> apply_filter(const std::vector<Trajectory>& trajectories, const JudgmentSet& judgments,
                                      FilterStrategy strategy)
{
    std::vector<std::string> kept;
    for (const auto& t: trajectories)
    {
        bool keep = true;
        switch (strategy)
        {
            case FilterStrategy::none: break;
            case FilterStrategy::process: keep = process_pass(t, judgments); break;
            case FilterStrategy::outcome: keep = outcome_pass(t, judgments); break;
            case FilterStrategy::process_and_outcome: {
                const bool p = process_pass(t, judgments);
                const bool o = outcome_pass(t, judgments);
                keep = p && o;
                break;
            }
        }
        if (keep)
            kept.push_back(t.id);
    }
    return kept;
}

void annotate_rewards(std::vector<SubTrajectory>& subs, const std::map<std::string, SeedQuestion>& seeds,
                      ChatModel& reward_model, int workers, const SamplingParams& params)
{
    for (const auto& sub: subs)
        if (!seeds.contains(sub.trajectory_id))
            throw InvalidInput("no seed question for trajectory '" + sub.trajectory_id + "'");

    parallel_for(subs.size(), workers, [&](std::size_t i) {
        auto& sub = subs[i];
        if (sub.step_reward)
            return;
        auto judgment = judge_step(seeds.at(sub.trajectory_id), sub, reward_model, params);
        sub.step_reward = reward_from(judgment.verdict);
        sub.judgments.push_back(std::move(judgment));
    });
}

ExportFormat parse_export_format(std::string_view text)
{
    if (text == "rl")
        return ExportFormat::rl;
    if (text == "sft")
        return ExportFormat::sft;
    throw InvalidInput("unknown export format '" + std::string(text) + "'");
}

std::vector<std::string> export_training_records(const std::vector<SubTrajectory>& subs, ExportFormat format)
{
    std::vector<std::string> lines;
    for (const auto& sub: subs)
    {
        if (format == ExportFormat::rl && !sub.step_reward)
            throw MissingRewards("sub-trajectory " + sub.trajectory_id + " step " + std::to_string(sub.step_index)
                                 + " has no step reward");
        if (format == ExportFormat::sft && sub.step_reward && *sub.step_reward != 1.0)
            continue;
        ojson o;
        o["context"] = to_json(sub.context.messages);
        o["target"] = sub.target_action.raw_completion;
        if (format == ExportFormat::rl)
            o["step_reward"] = *sub.step_reward;
        o["trajectory_id"] = sub.trajectory_id;
        o["step_index"] = sub.step_index;
        lines.push_back(dump_line(o));
    }
    return lines;
}

std::vector<TrainingRecord> import_training_records(const std::vector<std::string>& lines)
{
    std::vector<TrainingRecord> out;
    out.reserve(lines.size());
    for (const auto& line: lines)
    {
        try
        {
            const auto j = ojson::parse(line);
            TrainingRecord r;
            r.context = messages_from_json(j.at("context"));
            r.target = j.at("target").get<std::string>();
            if (j.contains("step_reward"))
                r.step_reward = j.at("step_reward").get<double>();
            r.trajectory_id = j.at("trajectory_id").get<std::string>();
            r.step_index = j.at("step_index").get<int>();
            out.push_back(std::move(r));
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput(std::string("training record: ") + e.what());
        }
    }
    return out;
}

} // namespace swirl
