// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/prompts.hpp>

namespace swirl::prompts
{

const std::string_view search_generation =
    "Please help me answer the following question in just a few words. If you think it would help to do a search, "
    "please generate a search query enclosed by <search_query> QUERY </search_query> tags.\n"
    "Some questions may require multiple searches in order to answer, so I will allow you to make up to {} "
    "sequential queries before answering the question.\n"
    "Please do not repeat queries you have already issued, as this is a waste of time.\n"
    "I will provide search results in the following format:\n"
    "QUERY → RESULT.\n"
    "Once you have enough information, generate an answer enclosed by <answer>ANSWER</answer> tags.\n"
    "Please either issue a search query or answer the question, but not both.\n"
    "The question is: {}";

const std::string_view math_generation =
    "Please help me answer the following question in just a few words. If you think it would help to use a "
    "calculator, please generate a mathematical query enclosed by <math_exp> MATH EXP </math_exp> tags.\n"
    "Some questions may benefit from using a calculator multiple times in order to answer, so I will allow you to "
    "make up to {} sequential queries before answering the question.\n"
    "Please do not repeat queries you have already issued, as this is a waste of time.\n"
    "I will provide results in the following format:\n"
    "QUERY → RESULT.\n"
    "Once you have enough information, generate an answer enclosed by <answer>ANSWER</answer> tags.\n"
    "Please either issue a search query or answer the question, but not both.\n"
    "The question is: {}";

const std::string_view process_judge =
    "My boss asked me to answer the following question with the help of a search engine: {}\n"
    "This means that I might need to decompose the question into a sequence of searches before being able to "
    "answer the question.\n"
    "I am trying to learn how to do this more effectively, so please provide feedback on my last message.\n"
    "Please take a look at our conversation so far: {}\n"
    "When evaluating a message, please only consider the last message and do not penalize or reward me for "
    "previous messages.\n"
    "When evaluating an answer, please consider only whether the answer follows from the search results, and not "
    "whether you believe the answer to be correct.\n"
    "If there is not enough information from the search results to answer the question, you should rate any "
    "answer as \"BAD\". Pay close attention as it may initially seem like the answer is present when it is not.\n"
    "When evaluating a search query, please consider whether it is likely to help me answer the original "
    "question.\n"
    "Explain your reasoning and then answer with either \"GOOD\" or \"BAD\".";

const std::string_view outcome_judge_search =
    "I need you to help me grade the answer to the following question: \"{}\".\n"
    "The answer key says: {}, and my answer is {}. Am I correct?\n"
    "Please explain your reasoning and then answer \"YES\" or \"NO\".\n"
    "Do not use your own knowledge to the decide, but simply check whether I gave the answer in the answer key.";

const std::string_view outcome_judge_math =
    "I need you to help me grade the answer to the following question: \"{}\".\n"
    "The answer key says: {}, and my answer is {}. Am I correct?\n"
    "Please explain your reasoning and then answer \"YES\" or \"NO\".\n"
    "There are multiple ways to write the same answer. For example, \"10\", \"10.00\", \"$10\", and \"$10.00\" are "
    "all equivalent.";

std::string fill(std::string_view tmpl, std::initializer_list<std::string_view> args)
{
    std::string out;
    out.reserve(tmpl.size() + 64);
    auto arg = args.begin();
    std::size_t pos = 0;
    for (;;)
    {
        const auto hole = tmpl.find("{}", pos);
        if (hole == std::string_view::npos)
            break;
        if (arg == args.end())
            throw InvalidInput("prompt template has more placeholders than arguments");
        out.append(tmpl.substr(pos, hole - pos));
        out.append(*arg++);
        pos = hole + 2;
    }
    if (arg != args.end())
        throw InvalidInput("prompt template has fewer placeholders than arguments");
    out.append(tmpl.substr(pos));
    return out;
}

std::string render_conversation(const Messages& messages)
{
    std::string out;
    for (const auto& m: messages)
    {
        if (!out.empty())
            out.push_back('\n');
        out.append(to_string(m.role));
        out.append(": ");
        out.append(m.content);
    }
    return out;
}

} // namespace swirl::prompts
