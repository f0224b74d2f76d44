// SPDX-License-Identifier: Apache-2.0
// Hand-built trajectories and judgment sets for property tests. Nothing here goes through the
// rollout engine.
#pragma once

#include <swirl/core.hpp>
#include <swirl/pipeline.hpp>

#include <random>
#include <string>
#include <vector>

namespace fixtures
{

inline std::string random_words(std::mt19937_64& rng, int n)
{
    static const std::vector<std::string> words {"alpha", "beta", "gamma", "delta", "\xCE\xBB-calc", "quote\"d",
                                                 "tab\there", "line\nbreak", "zeta", "\xE2\x86\x92"};
    std::string out;
    for (int i = 0; i < n; ++i)
    {
        if (i)
            out += ' ';
        out += words[rng() % words.size()];
    }
    return out;
}

/// Valid trajectory with 1 <= K <= max_k actions. Status is picked at random among the ones the
/// shape allows.
inline swirl::Trajectory random_trajectory(std::mt19937_64& rng, const std::string& seed_id, int max_k = 5)
{
    using namespace swirl;
    Trajectory t;
    t.id = make_trajectory_id(seed_id, 0);
    t.seed = {seed_id, "Question " + random_words(rng, 4) + "?", random_words(rng, 1), TaskKind::math};
    t.max_steps = max_k;
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_k));
    const int ending = static_cast<int>(rng() % 3); // 0 answer, 1 malformed, 2 exhausted when possible

    Messages state {{Role::user, "Seed prompt for " + t.seed.question}};
    for (int i = 1; i <= k; ++i)
    {
        Action a;
        a.index = i;
        const auto thought = random_words(rng, static_cast<int>(rng() % 4));
        if (i < k || (ending == 2 && k == max_k))
        {
            const auto expr = std::to_string(rng() % 100) + " * " + std::to_string(rng() % 100);
            a.raw_completion = thought + "<math_exp>" + expr + "</math_exp>";
            ToolCall call {ToolKind::math_exp, expr, std::nullopt};
            if (i < k)
                call.result = random_words(rng, 2);
            a.parsed = call;
        }
        else if (ending == 1)
        {
            a.raw_completion = thought + " no tag";
            a.parsed = Malformed {"no action tag"};
        }
        else
        {
            const auto answer = random_words(rng, 2);
            a.raw_completion = thought + "<answer>" + answer + "</answer>";
            a.parsed = FinalAnswer {answer};
        }
        t.steps.push_back({State {state}, a});
        if (const auto* call = std::get_if<ToolCall>(&a.parsed); call && call->result)
        {
            state.push_back({Role::model, a.raw_completion});
            state.push_back({Role::user, call->payload + " -> " + *call->result});
        }
    }
    const auto& last = t.steps.back().action;
    t.status = last.is_answer() ? TrajectoryStatus::answered
             : last.is_malformed() ? TrajectoryStatus::aborted
                                   : TrajectoryStatus::exhausted;
    return t;
}

inline swirl::Judgment verdict(bool positive, const std::string& judge = "fixture-judge")
{
    return swirl::Judgment::make(judge, positive ? swirl::Verdict::positive : swirl::Verdict::negative,
                                 positive ? "GOOD" : "BAD", true);
}

/// Four answered trajectories: process pass/fail x outcome positive/negative.
struct FilterFixture
{
    std::vector<swirl::Trajectory> trajectories;
    swirl::JudgmentSet judgments;
};

inline FilterFixture pp_pf_fixture()
{
    FilterFixture f;
    std::mt19937_64 rng(2024);
    const std::vector<std::pair<std::string, std::pair<bool, bool>>> cases {
        {"PP+", {true, true}}, {"PP-", {true, false}}, {"PF+", {false, true}}, {"PF-", {false, false}}};
    for (const auto& [name, flags]: cases)
    {
        swirl::Trajectory t;
        do
            t = random_trajectory(rng, name, 3);
        while (t.status != swirl::TrajectoryStatus::answered || t.num_actions() < 2);
        for (int i = 1; i <= t.num_actions(); ++i)
            f.judgments.steps[t.id].emplace(i, verdict(flags.first || i != 1));
        f.judgments.outcomes.emplace(t.id, swirl::Judgment::make("fixture-judge",
                                                                 flags.second ? swirl::Verdict::positive
                                                                              : swirl::Verdict::negative,
                                                                 flags.second ? "YES" : "NO", true));
        f.trajectories.push_back(std::move(t));
    }
    return f;
}

} // namespace fixtures
