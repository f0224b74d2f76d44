// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace swirl::prompts
{

// Prompt templates. Each "{}" is a positional placeholder, filled left to right.

/// Trajectory generation with the search tool. Placeholders: step budget, question.
extern const std::string_view search_generation;
/// Trajectory generation with the calculator. Placeholders: step budget, question.
extern const std::string_view math_generation;
/// Step judge for process filtering and step rewards. Placeholders: question, conversation so far.
extern const std::string_view process_judge;
/// Outcome grading for search tasks. Placeholders: question, answer key, answer.
extern const std::string_view outcome_judge_search;
/// Outcome grading for math tasks. Placeholders: question, answer key, answer.
extern const std::string_view outcome_judge_math;

/// Replaces "{}" placeholders in order. Inserted text is never rescanned. Throws InvalidInput
/// when the number of arguments differs from the number of placeholders.
std::string fill(std::string_view tmpl, std::initializer_list<std::string_view> args);

/// "user: ...\nmodel: ..." transcript used inside judge prompts.
std::string render_conversation(const Messages& messages);

} // namespace swirl::prompts
