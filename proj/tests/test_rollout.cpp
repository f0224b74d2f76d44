// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/rollout.hpp>

#include "fixtures/transcript_replay.hpp"

#include <gtest/gtest.h>

#include <atomic>

using namespace swirl;

namespace
{

using fixtures::transcript_model;

Toolbox toolbox()
{
    return fixtures::transcript_tools();
}

void expect_replay(const fixtures::Transcript& f)
{
    const RolloutLimits limits;
    const auto model = transcript_model(f, limits);
    const auto t = run_trajectory(f.seed, *model, toolbox(), limits, SamplingParams::generation(), "t#000");
    ASSERT_EQ(t.status, TrajectoryStatus::answered);
    ASSERT_EQ(t.num_actions(), 3);
    EXPECT_TRUE(validate_trajectory(t).empty());
    const auto prompt = render_seed_prompt(f.seed, limits).front().content;
    for (int i = 1; i <= 3; ++i)
        EXPECT_EQ(t.steps[static_cast<std::size_t>(i - 1)].state.messages, fixtures::expected_state(f, prompt, i));
    EXPECT_EQ(t.final_answer(), f.seed.golden_answer);
}

} // namespace

TEST(Transcript, HotpotQaReplaysExactly)
{
    const auto f = fixtures::hotpotqa();
    EXPECT_EQ(render_seed_prompt(f.seed, {}).front().content, f.seed_turn);
    expect_replay(f);
}

TEST(Transcript, Gsm8kReplaysExactly)
{
    const auto f = fixtures::gsm8k();
    const auto prompt = render_seed_prompt(f.seed, {}).front().content;
    EXPECT_TRUE(prompt.ends_with(f.seed_turn));
    EXPECT_NE(prompt.find("make up to 10 sequential"), std::string::npos);
    expect_replay(f);
}

TEST(ExtractAction, TagPrecedence)
{
    EXPECT_EQ(std::get<ToolCall>(extract_action("<search_query>the scorch trials publisher</search_query>")),
              (ToolCall {ToolKind::search_query, "the scorch trials publisher", std::nullopt}));
    EXPECT_EQ(std::get<FinalAnswer>(extract_action("reasoning... <answer>Delacorte Press</answer>")).text,
              "Delacorte Press");
    EXPECT_TRUE(std::holds_alternative<FinalAnswer>(
        extract_action("<search_query>x</search_query> <answer>y</answer>")));
    EXPECT_EQ(std::get<ToolCall>(extract_action("<math_exp>1+1</math_exp><search_query>q</search_query>")).kind,
              ToolKind::math_exp);
    EXPECT_EQ(std::get<Malformed>(extract_action("<answer>never closed")).reason, "unclosed tag");
    EXPECT_EQ(std::get<Malformed>(extract_action("I think it is 42.")).reason, "no action tag");
    EXPECT_TRUE(std::holds_alternative<Malformed>(extract_action("<ANSWER>x</ANSWER>")));
}

TEST(EnvTurn, Format)
{
    EXPECT_EQ(render_env_turn({ToolKind::math_exp, "48 / 2", "24.0"}), "48 / 2 -> 24.0");
    EXPECT_THROW(render_env_turn({ToolKind::math_exp, "48 / 2", std::nullopt}), MissingResult);
}

TEST(SeedPrompt, BudgetAndValidation)
{
    SeedQuestion q {"q", "How many?", std::nullopt, TaskKind::math};
    RolloutLimits limits;
    limits.max_steps = 3;
    EXPECT_NE(render_seed_prompt(q, limits).front().content.find("make up to 3 sequential"), std::string::npos);
    q.question = "  ";
    EXPECT_THROW(render_seed_prompt(q, limits), InvalidInput);
}

TEST(Rollout, ExhaustsBudgetWithoutExecutingTheLastCall)
{
    FunctionChatModel model("looper", [](const Messages& m, const SamplingParams&) {
        return "<math_exp>" + std::to_string(m.size()) + " + 1</math_exp>";
    });
    RolloutLimits limits;
    limits.max_steps = 3;
    const SeedQuestion q {"m", "count", std::nullopt, TaskKind::math};
    const auto t = run_trajectory(q, model, toolbox(), limits, SamplingParams::generation(), "m#000");
    EXPECT_EQ(t.status, TrajectoryStatus::exhausted);
    EXPECT_EQ(t.num_actions(), 3);
    EXPECT_FALSE(std::get<ToolCall>(t.steps.back().action.parsed).result.has_value());
    EXPECT_TRUE(validate_trajectory(t).empty());
}

TEST(Rollout, MalformedRetryThenAbort)
{
    std::atomic<int> calls {0};
    FunctionChatModel model("rambler", [&](const Messages&, const SamplingParams&) {
        ++calls;
        return std::string("no tags here");
    });
    const SeedQuestion q {"m", "count", std::nullopt, TaskKind::math};
    const auto t = run_trajectory(q, model, toolbox(), {}, SamplingParams::generation(), "m#000");
    EXPECT_EQ(t.status, TrajectoryStatus::aborted);
    EXPECT_EQ(t.num_actions(), 1);
    EXPECT_EQ(t.steps[0].action.malformed_retries, 1);
    EXPECT_EQ(calls.load(), 2);
}

TEST(Rollout, ToolErrorsAreInjectedNotFatal)
{
    int turn = 0;
    FunctionChatModel model("m", [&](const Messages&, const SamplingParams&) {
        return ++turn == 1 ? std::string("<math_exp>1/0</math_exp>") : std::string("<answer>none</answer>");
    });
    const SeedQuestion q {"m", "divide", std::nullopt, TaskKind::math};
    const auto t = run_trajectory(q, model, toolbox(), {}, SamplingParams::generation(), "m#000");
    EXPECT_EQ(t.status, TrajectoryStatus::answered);
    EXPECT_EQ(t.steps[1].state.messages.back().content, "1/0 -> ERROR: division by zero");
}

TEST(Rollout, RepeatedPayloadsAreFlagged)
{
    int turn = 0;
    FunctionChatModel model("m", [&](const Messages&, const SamplingParams&) {
        return ++turn < 3 ? std::string("<math_exp>2+2</math_exp>") : std::string("<answer>4</answer>");
    });
    const SeedQuestion q {"m", "add", std::nullopt, TaskKind::math};
    const auto t = run_trajectory(q, model, toolbox(), {}, SamplingParams::generation(), "m#000");
    EXPECT_FALSE(t.steps[0].action.repeat);
    EXPECT_TRUE(t.steps[1].action.repeat);
}

TEST(Rollout, ModelErrorsPropagateFromSingleRuns)
{
    FunctionChatModel model("m", [](const Messages&, const SamplingParams&) -> std::string {
        throw TimeoutError("slow");
    });
    const SeedQuestion q {"m", "x", std::nullopt, TaskKind::math};
    EXPECT_THROW(run_trajectory(q, model, toolbox(), {}, SamplingParams::generation(), "m#000"), TimeoutError);
}

TEST(Rollout, MissingToolIsInvalid)
{
    Toolbox calc_only;
    calc_only.add(std::make_shared<CalculatorTool>());
    ScriptedChatModel model;
    const SeedQuestion q {"s", "who?", std::nullopt, TaskKind::search_qa};
    EXPECT_THROW(run_trajectory(q, model, calc_only, {}, SamplingParams::generation(), "s#000"), InvalidInput);
}

TEST(Batch, OrderedOutputAndCountsIndependentOfWorkers)
{
    FunctionChatModel model("m", [](const Messages& m, const SamplingParams& p) {
        // Answer after a seed-dependent number of calculator calls.
        const auto depth = (p.seed.value_or(0) % 3) + 1;
        if (static_cast<std::int64_t>(m.size() / 2) >= depth)
            return std::string("<answer>done</answer>");
        return "<math_exp>" + std::to_string(m.size()) + " * 2</math_exp>";
    });
    std::vector<SeedQuestion> seeds;
    for (int i = 0; i < 7; ++i)
        seeds.push_back({"seed-" + std::to_string(6 - i), "q" + std::to_string(i), std::nullopt, TaskKind::math});
    RolloutLimits limits;
    limits.samples_per_seed = 3;
    auto sampling = SamplingParams::generation();
    sampling.seed = 42;

    std::vector<std::string> emitted;
    BatchOptions one;
    one.sink = [&](const Trajectory& t) { emitted.push_back(t.id); };
    const auto a = run_batch(seeds, limits, model, toolbox(), sampling, one);
    BatchOptions eight;
    eight.workers = 8;
    const auto b = run_batch(seeds, limits, model, toolbox(), sampling, eight);

    ASSERT_EQ(a.trajectories.size(), 21u);
    EXPECT_EQ(a.trajectories, b.trajectories);
    EXPECT_EQ(a.trajectories.front().id, "seed-0#000");
    EXPECT_EQ(a.trajectories.back().id, "seed-6#002");
    std::vector<std::string> ids;
    for (const auto& t: a.trajectories)
        ids.push_back(t.id);
    EXPECT_EQ(emitted, ids);
    EXPECT_EQ(a.report.answered, 21);
}

TEST(Batch, FailuresAreIsolatedUntilTheThreshold)
{
    FunctionChatModel model("m", [](const Messages& m, const SamplingParams&) -> std::string {
        if (m.front().content.find("fail") != std::string::npos)
            throw EndpointError("HTTP 500");
        return "<answer>ok</answer>";
    });
    RolloutLimits limits;
    limits.samples_per_seed = 1;
    std::vector<SeedQuestion> seeds {{"a", "fail", {}, TaskKind::math}, {"b", "fine", {}, TaskKind::math},
                                     {"c", "fine", {}, TaskKind::math}};
    const auto r = run_batch(seeds, limits, model, toolbox(), SamplingParams::generation());
    EXPECT_EQ(r.report.aborted, 1);
    EXPECT_EQ(r.report.answered, 2);
    ASSERT_EQ(r.report.failures.size(), 1u);
    EXPECT_NE(r.report.failures[0].find("a#000"), std::string::npos);

    seeds[1].question = "fail too";
    EXPECT_THROW(run_batch(seeds, limits, model, toolbox(), SamplingParams::generation()), BatchAborted);
}
