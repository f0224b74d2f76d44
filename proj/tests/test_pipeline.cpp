// SPDX-License-Identifier: Apache-2.0
#include "fixtures/worked_transcripts.hpp"
#include "fixtures/synthetic.hpp"

#include <swirl/errors.hpp>
#include <swirl/pipeline.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <set>

using namespace swirl;

namespace
{

Trajectory three_step()
{
    Trajectory t;
    t.id = "q#000";
    t.seed = {"q", "What is 2 * 3 + 1?", "7", TaskKind::math};
    t.max_steps = 5;
    Messages s {{Role::user, "seed"}};
    const std::vector<std::pair<std::string, std::string>> calls {{"2 * 3", "6.0"}, {"6 + 1", "7.0"}};
    int i = 1;
    for (const auto& [expr, result]: calls)
    {
        Action a {i++, "think <math_exp>" + expr + "</math_exp>", ToolCall {ToolKind::math_exp, expr, result}};
        t.steps.push_back({State {s}, a});
        s.push_back({Role::model, a.raw_completion});
        s.push_back({Role::user, expr + " -> " + result});
    }
    t.steps.push_back({State {s}, Action {3, "<answer>7</answer>", FinalAnswer {"7"}}});
    t.status = TrajectoryStatus::answered;
    return t;
}

} // namespace

TEST(Decompose, ThreeStepsGiveThreeSubs)
{
    const auto t = three_step();
    const auto subs = decompose(t);
    ASSERT_EQ(subs.size(), 3u);
    for (int i = 0; i < 3; ++i)
    {
        EXPECT_EQ(subs[i].step_index, i + 1);
        EXPECT_EQ(subs[i].trajectory_id, "q#000");
        EXPECT_EQ(subs[i].context, t.steps[i].state);
        EXPECT_EQ(subs[i].target_action, t.steps[i].action);
        EXPECT_FALSE(subs[i].step_reward);
    }
    const auto& third = subs[2].context.messages;
    ASSERT_EQ(third.size(), 5u);
    EXPECT_EQ(third[2].content, "2 * 3 -> 6.0");
    EXPECT_EQ(third[4].content, "6 + 1 -> 7.0");
}

TEST(Decompose, SingleAnswer)
{
    Trajectory t;
    t.id = "q#000";
    t.seed = {"q", "Q", "A", TaskKind::search_qa};
    t.steps.push_back({State {{{Role::user, "seed"}}}, Action {1, "<answer>A</answer>", FinalAnswer {"A"}}});
    t.status = TrajectoryStatus::answered;
    const auto subs = decompose(t);
    ASSERT_EQ(subs.size(), 1u);
    EXPECT_EQ(subs[0].context.messages.size(), 1u);
}

TEST(Decompose, BrokenPrefixRaises)
{
    auto t = three_step();
    t.steps[2].state.messages[2].content = "2 * 3 -> 5.0";
    EXPECT_THROW(decompose(t), InvalidTrajectory);
}

TEST(Decompose, RandomTrajectoriesMatchSteps)
{
    std::mt19937_64 rng(7);
    for (int n = 0; n < 200; ++n)
    {
        const auto t = fixtures::random_trajectory(rng, "seed-" + std::to_string(n));
        ASSERT_TRUE(validate_trajectory(t).empty()) << validate_trajectory(t).front();
        const auto subs = decompose(t);
        ASSERT_EQ(static_cast<int>(subs.size()), t.num_actions());
        for (std::size_t i = 1; i < subs.size(); ++i)
        {
            const auto& prev = subs[i - 1].context.messages;
            const auto& cur = subs[i].context.messages;
            ASSERT_EQ(cur.size(), prev.size() + 2);
            EXPECT_TRUE(std::equal(prev.begin(), prev.end(), cur.begin()));
            EXPECT_EQ(cur[prev.size()].content, subs[i - 1].target_action.raw_completion);
        }
    }
}

TEST(Verdict, LastStandaloneTokenWins)
{
    EXPECT_TRUE(parse_verdict("The query is on-topic. GOOD", "GOOD", "BAD", "j").positive());
    const auto mixed = parse_verdict("GOOD reasoning, but the query is malformed. BAD", "GOOD", "BAD", "j");
    EXPECT_FALSE(mixed.positive());
    EXPECT_TRUE(mixed.parse_ok);
    EXPECT_TRUE(parse_verdict("$72.00 and 72 are equivalent. YES", "YES", "NO", "j").positive());
    EXPECT_TRUE(parse_verdict("verdict: good.", "GOOD", "BAD", "j").positive());
    EXPECT_FALSE(parse_verdict("GOODNESS aside, badly", "GOOD", "BAD", "j").parse_ok);
    const auto none = parse_verdict("maybe", "YES", "NO", "j");
    EXPECT_FALSE(none.positive());
    EXPECT_FALSE(none.parse_ok);
    EXPECT_EQ(none.judge_model_id, "j");
    EXPECT_EQ(none.raw_text, "maybe");
}

TEST(Judge, StepRequestShowsStateThenAction)
{
    const auto t = three_step();
    const auto subs = decompose(t);
    const auto req = render_step_judge_request(t.seed, subs[1]);
    ASSERT_EQ(req.size(), 1u);
    EXPECT_NE(req[0].content.find("What is 2 * 3 + 1?"), std::string::npos);
    const auto state_pos = req[0].content.find("2 * 3 -> 6.0");
    const auto action_pos = req[0].content.find("<math_exp>6 + 1</math_exp>");
    ASSERT_NE(state_pos, std::string::npos);
    ASSERT_NE(action_pos, std::string::npos);
    EXPECT_LT(state_pos, action_pos);
}

TEST(Judge, StepAndOutcomeUseTheirTokens)
{
    const auto t = three_step();
    const auto subs = decompose(t);
    FunctionChatModel good("judge", [](const Messages&, const SamplingParams&) { return "Fine. GOOD"; });
    FunctionChatModel yes("judge", [](const Messages&, const SamplingParams&) { return "Same value. YES"; });
    EXPECT_TRUE(judge_step(t.seed, subs[0], good).positive());
    EXPECT_FALSE(judge_step(t.seed, subs[0], yes).parse_ok);
    EXPECT_TRUE(judge_outcome(t.seed, "7", yes).positive());
    EXPECT_TRUE(judge_trajectory_outcome(t, yes).positive());
}

TEST(Judge, MissingGoldenAnswer)
{
    auto t = three_step();
    t.seed.golden_answer.reset();
    std::atomic<int> calls = 0;
    FunctionChatModel judge("judge", [&](const Messages&, const SamplingParams&) {
        ++calls;
        return std::string("YES");
    });
    EXPECT_THROW(judge_outcome(t.seed, "7", judge), MissingGoldenAnswer);
    EXPECT_THROW(judge_trajectory_outcome(t, judge), MissingGoldenAnswer);
    EXPECT_EQ(calls, 0);
}

TEST(Judge, UnansweredTrajectoryFailsWithoutCall)
{
    auto t = three_step();
    t.steps.pop_back();
    t.steps.back().action.parsed = ToolCall {ToolKind::math_exp, "6 + 1", std::nullopt};
    t.max_steps = 2;
    t.status = TrajectoryStatus::exhausted;
    FunctionChatModel judge("judge", [](const Messages&, const SamplingParams&) -> std::string {
        throw std::logic_error("not called");
    });
    EXPECT_FALSE(judge_trajectory_outcome(t, judge).positive());
}

TEST(Filter, FourCornerFixture)
{
    const auto f = fixtures::pp_pf_fixture();
    const auto id = [&](int i) { return f.trajectories[i].id; };
    EXPECT_EQ(apply_filter(f.trajectories, f.judgments, FilterStrategy::none).size(), 4u);
    EXPECT_EQ(apply_filter(f.trajectories, f.judgments, FilterStrategy::process),
              (std::vector<std::string> {id(0), id(1)}));
    EXPECT_EQ(apply_filter(f.trajectories, f.judgments, FilterStrategy::outcome),
              (std::vector<std::string> {id(0), id(2)}));
    EXPECT_EQ(apply_filter(f.trajectories, f.judgments, FilterStrategy::process_and_outcome),
              (std::vector<std::string> {id(0)}));
}

TEST(Filter, AllPositiveKeepsEverything)
{
    auto f = fixtures::pp_pf_fixture();
    for (auto& [tid, per_step]: f.judgments.steps)
        for (auto& [i, j]: per_step)
            j = fixtures::verdict(true);
    for (auto& [tid, j]: f.judgments.outcomes)
        j = fixtures::verdict(true);
    for (const auto s: {FilterStrategy::none, FilterStrategy::process, FilterStrategy::outcome,
                        FilterStrategy::process_and_outcome})
        EXPECT_EQ(apply_filter(f.trajectories, f.judgments, s).size(), 4u) << to_string(s);
}

TEST(Filter, RandomFixturesObeyInclusions)
{
    std::mt19937_64 rng(99);
    for (int round = 0; round < 100; ++round)
    {
        std::vector<Trajectory> ts;
        JudgmentSet js;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int k = 0; k < n; ++k)
        {
            auto t = fixtures::random_trajectory(rng, "r" + std::to_string(round) + "-" + std::to_string(k));
            for (int i = 1; i <= t.num_actions(); ++i)
                js.steps[t.id].emplace(i, fixtures::verdict(rng() % 4 != 0));
            js.outcomes.emplace(t.id, fixtures::verdict(rng() % 2 == 0));
            ts.push_back(std::move(t));
        }
        const auto none = apply_filter(ts, js, FilterStrategy::none);
        const auto p = apply_filter(ts, js, FilterStrategy::process);
        const auto o = apply_filter(ts, js, FilterStrategy::outcome);
        const auto po = apply_filter(ts, js, FilterStrategy::process_and_outcome);
        ASSERT_EQ(static_cast<int>(none.size()), n);

        const std::set<std::string> ps(p.begin(), p.end()), os(o.begin(), o.end());
        std::vector<std::string> both;
        for (const auto& t: ts)
            if (ps.contains(t.id) && os.contains(t.id))
                both.push_back(t.id);
        EXPECT_EQ(po, both);
        for (const auto& idv: po)
            EXPECT_TRUE(ps.contains(idv) && os.contains(idv));
        for (const auto& idv: o)
        {
            const auto it = std::find_if(ts.begin(), ts.end(), [&](const Trajectory& t) { return t.id == idv; });
            EXPECT_EQ(it->status, TrajectoryStatus::answered);
        }
    }
}

TEST(Filter, MissingJudgmentsRaise)
{
    auto f = fixtures::pp_pf_fixture();
    f.judgments.steps.begin()->second.erase(1);
    EXPECT_THROW(apply_filter(f.trajectories, f.judgments, FilterStrategy::process), MissingJudgments);
    EXPECT_NO_THROW(apply_filter(f.trajectories, f.judgments, FilterStrategy::outcome));
    f.judgments.outcomes.erase(f.judgments.outcomes.begin());
    EXPECT_THROW(apply_filter(f.trajectories, f.judgments, FilterStrategy::outcome), MissingJudgments);
    EXPECT_NO_THROW(apply_filter(f.trajectories, f.judgments, FilterStrategy::none));
}

TEST(Filter, StrategyNames)
{
    for (const auto s: {FilterStrategy::none, FilterStrategy::process, FilterStrategy::outcome,
                        FilterStrategy::process_and_outcome})
        EXPECT_EQ(parse_filter_strategy(to_string(s)), s);
    EXPECT_THROW(parse_filter_strategy("strict"), InvalidInput);
}

namespace
{

// GOOD unless the judged action carries the marker "BADSTEP".
FunctionChatModel marker_judge(std::atomic<int>& calls)
{
    return FunctionChatModel("reward", [&](const Messages& m, const SamplingParams&) {
        ++calls;
        return m.back().content.find("BADSTEP") != std::string::npos ? std::string("BAD") : std::string("GOOD");
    });
}

std::vector<SubTrajectory> ten_subs(const std::set<int>& bad)
{
    std::vector<SubTrajectory> subs;
    for (int i = 1; i <= 10; ++i)
    {
        SubTrajectory s;
        s.trajectory_id = "t#000";
        s.step_index = i;
        s.context = State {{{Role::user, "ctx " + std::to_string(i)}}};
        const std::string raw = bad.contains(i) ? "BADSTEP <math_exp>1+1</math_exp>" : "<math_exp>1+1</math_exp>";
        s.target_action = Action {i, raw, ToolCall {ToolKind::math_exp, "1+1", "2.0"}};
        subs.push_back(s);
    }
    return subs;
}

} // namespace

TEST(Annotate, RewardsFollowVerdicts)
{
    std::atomic<int> calls = 0;
    auto judge = marker_judge(calls);
    auto subs = ten_subs({2, 5, 9});
    const std::map<std::string, SeedQuestion> seeds {{"t#000", {"t", "Q?", "A", TaskKind::math}}};
    annotate_rewards(subs, seeds, judge, 4);
    double sum = 0;
    for (const auto& s: subs)
    {
        ASSERT_TRUE(s.step_reward);
        ASSERT_EQ(s.judgments.size(), 1u);
        EXPECT_EQ(*s.step_reward, (s.step_index == 2 || s.step_index == 5 || s.step_index == 9) ? 0.0 : 1.0);
        sum += *s.step_reward;
    }
    EXPECT_DOUBLE_EQ(sum / 10, 0.7);
    EXPECT_EQ(calls, 10);

    // resume: only unset rewards are judged
    subs[3].step_reward.reset();
    subs[3].judgments.clear();
    annotate_rewards(subs, seeds, judge, 4);
    EXPECT_EQ(calls, 11);
}

TEST(Annotate, MissingSeedRaises)
{
    std::atomic<int> calls = 0;
    auto judge = marker_judge(calls);
    auto subs = ten_subs({});
    EXPECT_THROW(annotate_rewards(subs, {}, judge), InvalidInput);
    EXPECT_EQ(calls, 0);
}

TEST(Export, RlAndSft)
{
    auto subs = ten_subs({});
    for (auto& s: subs)
        s.step_reward = s.step_index % 2 ? 1.0 : 0.0;
    const auto rl = export_training_records(subs, ExportFormat::rl);
    ASSERT_EQ(rl.size(), 10u);
    const auto records = import_training_records(rl);
    for (std::size_t i = 0; i < 10; ++i)
    {
        EXPECT_EQ(records[i].context, subs[i].context.messages);
        EXPECT_EQ(records[i].target, subs[i].target_action.raw_completion);
        EXPECT_EQ(records[i].step_reward, subs[i].step_reward);
        EXPECT_EQ(records[i].step_index, subs[i].step_index);
    }
    EXPECT_EQ(export_training_records(subs, ExportFormat::rl), rl);

    const auto sft = import_training_records(export_training_records(subs, ExportFormat::sft));
    ASSERT_EQ(sft.size(), 5u);
    for (const auto& r: sft)
    {
        EXPECT_FALSE(r.step_reward);
        EXPECT_EQ(r.step_index % 2, 1);
    }

    subs[4].step_reward.reset();
    EXPECT_THROW(export_training_records(subs, ExportFormat::rl), MissingRewards);
    EXPECT_EQ(parse_export_format("sft"), ExportFormat::sft);
    EXPECT_THROW(parse_export_format("dpo"), InvalidInput);
}
