// SPDX-License-Identifier: Apache-2.0
// Worked example transcripts: a two-search HotPotQA question and a two-calculation GSM8K problem.
#pragma once

#include <swirl/core.hpp>

#include <string>
#include <vector>

namespace fixtures
{

struct Transcript
{
    swirl::SeedQuestion seed;
    std::string seed_turn;                // user turn as printed in the transcript
    std::vector<std::string> completions; // model turns, verbatim
    std::vector<std::string> env_turns;   // tool result turns, verbatim
};

inline const std::string kScorchTrials =
    "The Scorch Trials is a 2010 young adult post-apocalyptic dystopian science fiction novel written by American "
    "author James Dashner and the second book, fourth chronologically, in \"The Maze Runner\" series. The novel was "
    "published on September 18, 2010 by Delacorte Press. It is preceded by \"The Maze Runner\", and followed by "
    "\"The Death Cure\". A was released on September 18, 2015 by 20th Century Fox.";

inline const std::string kDeathCure =
    "The Death Cure is a 2011 young adult dystopian science fiction novel written by American writer James Dashner "
    "and the third book, fifth chronologically, in the \"Maze Runner\" series. It was published on October 11, 2011 "
    "by Delacorte Press and was preceded by \"The Maze Runner\" and \"The Scorch Trials\" and followed by the series "
    "prequels, \"The Kill Order and The Fever Code.\"";

inline Transcript hotpotqa()
{
    Transcript t;
    t.seed = {"hotpotqa-scorch", "What company published both The Scorch Trials and The Death Cure?",
              "Delacorte Press", swirl::TaskKind::search_qa};
    t.seed_turn =
        "Please help me answer the following question in just a few words. If you think it would help to do a "
        "search, please generate a search query enclosed by <search_query> QUERY </search_query> tags.\n"
        "Some questions may require multiple searches in order to answer, so I will allow you to make up to 5 "
        "sequential queries before answering the question.\n"
        "Please do not repeat queries you have already issued, as this is a waste of time.\n"
        "I will provide search results in the following format:\n"
        "QUERY \xE2\x86\x92 RESULT.\n"
        "Once you have enough information, generate an answer enclosed by <answer>ANSWER</answer> tags.\n"
        "Please either issue a search query or answer the question, but not both.\n"
        "The question is: What company published both The Scorch Trials and The Death Cure?";
    t.completions = {
        "<search_query>the scorch trials publisher </search_query>",
        "<search_query>The Death cure publisher </search_query>",
        "<answer>Delacorte Press</answer>",
    };
    t.env_turns = {
        "the scorch trials publisher -> " + kScorchTrials,
        "The Death cure publisher -> " + kDeathCure,
    };
    return t;
}

inline Transcript gsm8k()
{
    Transcript t;
    t.seed = {"gsm8k-natalia",
              "Natalia sold clips to 48 of her friends in April, and then she sold half as many clips in May. How "
              "many clips did Natalia sell altogether in April and May?",
              "72", swirl::TaskKind::math};
    // The transcript's instruction block words a few phrases differently from the math generation
    // template; generation uses the template, so only the question line is compared.
    t.seed_turn = "The question is: Natalia sold clips to 48 of her friends in April, and then she sold half as "
                  "many clips in May. How many clips did Natalia sell altogether in April and May?";
    t.completions = {
        "<math_exp>48 / 2 </math_exp>",
        "<math_exp>48 + 24</math_exp>",
        "<answer>72</answer>",
    };
    t.env_turns = {
        "48 / 2 -> 24.0",
        "48 + 24 -> 72.0",
    };
    return t;
}

/// Expected state s_i (1-based) built from the transcript alone.
inline swirl::Messages expected_state(const Transcript& t, const std::string& seed_prompt, int i)
{
    swirl::Messages s {{swirl::Role::user, seed_prompt}};
    for (int j = 0; j + 1 < i; ++j)
    {
        s.push_back({swirl::Role::model, t.completions[static_cast<std::size_t>(j)]});
        s.push_back({swirl::Role::user, t.env_turns[static_cast<std::size_t>(j)]});
    }
    return s;
}

} // namespace fixtures
