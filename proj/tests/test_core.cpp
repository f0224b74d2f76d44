// SPDX-License-Identifier: Apache-2.0
#include <swirl/core.hpp>
#include <swirl/errors.hpp>
#include <swirl/rollout.hpp>

#include "fixtures/worked_transcripts.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace swirl;

namespace
{

Trajectory hotpot_trajectory()
{
    const auto f = fixtures::hotpotqa();
    Trajectory t;
    t.id = make_trajectory_id(f.seed.id, 0);
    t.seed = f.seed;
    t.max_steps = 5;
    const auto prompt = render_seed_prompt(f.seed, {}).front().content;
    for (int i = 1; i <= 3; ++i)
    {
        Action a;
        a.index = i;
        a.raw_completion = f.completions[static_cast<std::size_t>(i - 1)];
        a.parsed = extract_action(a.raw_completion);
        if (auto* call = std::get_if<ToolCall>(&a.parsed))
            call->result = f.env_turns[static_cast<std::size_t>(i - 1)].substr(call->payload.size() + 4);
        t.steps.push_back({State {fixtures::expected_state(f, prompt, i)}, a});
    }
    t.status = TrajectoryStatus::answered;
    return t;
}

} // namespace

TEST(Trajectory, TranscriptIsValid)
{
    const auto t = hotpot_trajectory();
    EXPECT_TRUE(validate_trajectory(t).empty());
    EXPECT_EQ(t.final_answer(), "Delacorte Press");
    EXPECT_EQ(t.num_actions(), 3);
}

TEST(Trajectory, BrokenPrefixIsReported)
{
    auto t = hotpot_trajectory();
    t.steps[1].state.messages[0].content += "!";
    const auto problems = validate_trajectory(t);
    ASSERT_FALSE(problems.empty());
    EXPECT_NE(problems.front().find("step 2"), std::string::npos);
}

TEST(Trajectory, StatusMustMatchLastAction)
{
    auto t = hotpot_trajectory();
    t.status = TrajectoryStatus::exhausted;
    EXPECT_FALSE(validate_trajectory(t).empty());

    t = hotpot_trajectory();
    t.steps.pop_back();
    t.status = TrajectoryStatus::answered;
    EXPECT_FALSE(validate_trajectory(t).empty());
}

TEST(Trajectory, EmptyTrajectoryIsInvalid)
{
    Trajectory t;
    t.id = "x#000";
    t.seed = {"x", "q", std::nullopt, TaskKind::search_qa};
    EXPECT_FALSE(validate_trajectory(t).empty());
}

TEST(Trajectory, EnvironmentTurnMustEchoTheCall)
{
    auto t = hotpot_trajectory();
    auto& env = t.steps[1].state.messages[2].content;
    env.replace(0, 3, "THE");
    t.steps[2].state.messages[2].content = env;
    EXPECT_FALSE(validate_trajectory(t).empty());
}

TEST(ContentHash, StableAndSensitiveToEveryCharacter)
{
    const auto t = hotpot_trajectory();
    const auto h = trajectory_content_hash(t);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h, trajectory_content_hash(hotpot_trajectory()));

    auto with_time = t;
    with_time.generated_at = "2026-01-01T00:00:00Z";
    EXPECT_EQ(trajectory_content_hash(with_time), h);

    // Flip each character of the final state's messages and each raw completion in turn.
    std::set<std::string> seen {h};
    const auto& last = t.steps.back().state.messages;
    for (std::size_t m = 0; m < last.size(); ++m)
    {
        for (std::size_t c = 0; c < last[m].content.size(); c += 7)
        {
            auto mutated = t;
            for (auto& step: mutated.steps)
                if (m < step.state.messages.size())
                    step.state.messages[m].content[c] ^= 0x01;
            EXPECT_TRUE(seen.insert(trajectory_content_hash(mutated)).second) << "collision at " << m << ":" << c;
        }
    }
    for (std::size_t s = 0; s < t.steps.size(); ++s)
    {
        auto mutated = t;
        mutated.steps[s].action.raw_completion[0] ^= 0x01;
        EXPECT_NE(trajectory_content_hash(mutated), h);
    }
}

TEST(Ids, SortableAndStable)
{
    EXPECT_EQ(make_trajectory_id("q1", 0), "q1#000");
    EXPECT_EQ(make_trajectory_id("q1", 12), "q1#012");
    EXPECT_LT(make_trajectory_id("q1", 2), make_trajectory_id("q1", 10));
}

TEST(Seeds, RejectEmptyAndDuplicateIds)
{
    EXPECT_THROW(validate_seed_set({{"", "q", {}, TaskKind::math}}), InvalidInput);
    EXPECT_THROW(validate_seed_set({{"a", "q", {}, TaskKind::math}, {"a", "r", {}, TaskKind::math}}), InvalidInput);
    EXPECT_NO_THROW(validate_seed_set({{"a", "q", {}, TaskKind::math}, {"b", "r", {}, TaskKind::math}}));
}

TEST(Judgment, UnparsedIsAlwaysNegative)
{
    const auto j = Judgment::make("judge", Verdict::positive, "hmm", false);
    EXPECT_FALSE(j.positive());
    EXPECT_FALSE(j.parse_ok);
    EXPECT_EQ(reward_from(Verdict::positive), 1.0);
    EXPECT_EQ(reward_from(Verdict::negative), 0.0);
}

TEST(Enums, RoundTrip)
{
    for (auto s: {TrajectoryStatus::answered, TrajectoryStatus::exhausted, TrajectoryStatus::aborted})
        EXPECT_EQ(parse_status(to_string(s)), s);
    EXPECT_EQ(parse_role("assistant"), Role::model);
    EXPECT_THROW(parse_status("done"), InvalidInput);
}

TEST(Trim, AsciiWhitespace)
{
    EXPECT_EQ(trim("  a b \n\t"), "a b");
    EXPECT_EQ(trim(""), "");
}
