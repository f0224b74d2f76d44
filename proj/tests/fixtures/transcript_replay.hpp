// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "worked_transcripts.hpp"

#include <swirl/model_client.hpp>
#include <swirl/rollout.hpp>
#include <swirl/search.hpp>

#include <memory>

namespace fixtures
{

/// Search over the two articles the transcript retrieved, plus distractors.
/// Articles are indexed under a short key, not the body.
inline std::shared_ptr<swirl::SearchTool> transcript_search()
{
    auto embedder = std::make_shared<swirl::HashingEmbedder>(256);
    auto index = std::make_shared<swirl::VectorIndex>(256);
    struct Doc
    {
        std::string id, key, body;
    };
    const std::vector<Doc> docs {
        {"maze-2", "The Scorch Trials", kScorchTrials},
        {"maze-3", "The Death Cure", kDeathCure},
        {"gsm", "grade school math", "Grade school math word problems with multi-step arithmetic."},
        {"fox", "20th Century Fox", "20th Century Fox is an American film studio."},
    };
    for (const auto& d: docs)
        index->add({d.id, "", d.body, embedder->embed(d.key)});
    index->freeze();
    return std::make_shared<swirl::SearchTool>(index, embedder);
}

inline swirl::Toolbox transcript_tools()
{
    swirl::Toolbox tools;
    tools.add(std::make_shared<swirl::CalculatorTool>());
    tools.add(transcript_search());
    return tools;
}

/// Adds exact-state rules answering s_i with the i-th transcript completion.
inline void script_transcript(swirl::ScriptedChatModel& model, const Transcript& f, const swirl::RolloutLimits& limits)
{
    const auto prompt = swirl::render_seed_prompt(f.seed, limits).front().content;
    for (int i = 1; i <= static_cast<int>(f.completions.size()); ++i)
        model.add(expected_state(f, prompt, i), f.completions[static_cast<std::size_t>(i - 1)]);
}

inline std::unique_ptr<swirl::ScriptedChatModel> transcript_model(const Transcript& f, const swirl::RolloutLimits& limits)
{
    auto model = std::make_unique<swirl::ScriptedChatModel>("transcript");
    script_transcript(*model, f, limits);
    return model;
}

} // namespace fixtures
