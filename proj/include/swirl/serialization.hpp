// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>

#include <json.hpp>

namespace swirl
{

using ojson = nlohmann::ordered_json;

// Record schemas. Keys are emitted in the order listed.
//
// Trajectory:    {id, seed:{id, question, golden_answer?, task_kind},
//                 steps:[{state_delta:[{role, content}], action:{raw, parsed, repeat, malformed_retries}}],
//                 status, max_steps}
// parsed:        {kind:"search_query"|"math_exp", payload, result?} | {kind:"answer", answer}
//                | {kind:"malformed", reason}
// SubTrajectory: {trajectory_id, step_index, context:[{role, content}], target:{raw, parsed, ...},
//                 step_reward?, judgments?}

ojson to_json(const Messages& messages);
Messages messages_from_json(const ojson& j);

ojson to_json(const SeedQuestion& q);
SeedQuestion seed_from_json(const ojson& j);

ojson to_json(const ParsedAction& parsed);
ParsedAction parsed_from_json(const ojson& j);

ojson to_json(const Action& action);
Action action_from_json(const ojson& j, int index);

ojson to_json(const Judgment& judgment);
Judgment judgment_from_json(const ojson& j);

/// Steps are stored as state deltas: s_1 whole, then the messages each s_i adds to s_{i-1}.
ojson to_json(const Trajectory& t);
Trajectory trajectory_from_json(const ojson& j);

ojson to_json(const SubTrajectory& sub);
SubTrajectory subtrajectory_from_json(const ojson& j);

/// One JSONL line (no trailing newline).
std::string dump_line(const ojson& j);

} // namespace swirl
