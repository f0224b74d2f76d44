// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/serialization.hpp>

namespace swirl
{

namespace
{

template <typename F>
auto guarded(const char* what, F&& f)
{
    try
    {
        return f();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidInput(std::string(what) + ": " + e.what());
    }
}

} // namespace

ojson to_json(const Messages& messages)
{
    auto arr = ojson::array();
    for (const auto& m: messages)
    {
        ojson o;
        o["role"] = std::string(to_string(m.role));
        o["content"] = m.content;
        arr.push_back(std::move(o));
    }
    return arr;
}

Messages messages_from_json(const ojson& j)
{
    return guarded("messages", [&] {
        Messages out;
        for (const auto& m: j)
            out.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
        return out;
    });
}

ojson to_json(const SeedQuestion& q)
{
    ojson o;
    o["id"] = q.id;
    o["question"] = q.question;
    if (q.golden_answer)
        o["golden_answer"] = *q.golden_answer;
    o["task_kind"] = std::string(to_string(q.task_kind));
    return o;
}

SeedQuestion seed_from_json(const ojson& j)
{
    return guarded("seed", [&] {
        SeedQuestion q;
        q.id = j.at("id").get<std::string>();
        q.question = j.at("question").get<std::string>();
        if (j.contains("golden_answer") && !j.at("golden_answer").is_null())
            q.golden_answer = j.at("golden_answer").get<std::string>();
        q.task_kind = parse_task_kind(j.value("task_kind", std::string("search_qa")));
        return q;
    });
}

ojson to_json(const ParsedAction& parsed)
{
    ojson o;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ToolCall>)
            {
                o["kind"] = std::string(to_string(p.kind));
                o["payload"] = p.payload;
                if (p.result)
                    o["result"] = *p.result;
            }
            else if constexpr (std::is_same_v<T, FinalAnswer>)
            {
                o["kind"] = "answer";
                o["answer"] = p.text;
            }
            else
            {
                o["kind"] = "malformed";
                o["reason"] = p.reason;
            }
        },
        parsed);
    return o;
}

ParsedAction parsed_from_json(const ojson& j)
{
    return guarded("parsed action", [&]() -> ParsedAction {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "answer")
            return FinalAnswer {j.at("answer").get<std::string>()};
        if (kind == "malformed")
            return Malformed {j.at("reason").get<std::string>()};
        ToolCall call {parse_tool_kind(kind), j.at("payload").get<std::string>(), std::nullopt};
        if (j.contains("result"))
            call.result = j.at("result").get<std::string>();
        return call;
    });
}

ojson to_json(const Action& action)
{
    ojson o;
    o["raw"] = action.raw_completion;
    o["parsed"] = to_json(action.parsed);
    o["repeat"] = action.repeat;
    o["malformed_retries"] = action.malformed_retries;
    return o;
}

Action action_from_json(const ojson& j, int index)
{
    return guarded("action", [&] {
        Action a;
        a.index = index;
        a.raw_completion = j.at("raw").get<std::string>();
        a.parsed = parsed_from_json(j.at("parsed"));
        a.repeat = j.value("repeat", false);
        a.malformed_retries = j.value("malformed_retries", 0);
        return a;
    });
}

ojson to_json(const Judgment& judgment)
{
    ojson o;
    o["judge_model_id"] = judgment.judge_model_id;
    o["verdict"] = judgment.positive() ? "positive" : "negative";
    o["raw_text"] = judgment.raw_text;
    o["parse_ok"] = judgment.parse_ok;
    return o;
}

Judgment judgment_from_json(const ojson& j)
{
    return guarded("judgment", [&] {
        const auto verdict = j.at("verdict").get<std::string>();
        if (verdict != "positive" && verdict != "negative")
            throw InvalidInput("unknown verdict '" + verdict + "'");
        return Judgment::make(j.at("judge_model_id").get<std::string>(),
                              verdict == "positive" ? Verdict::positive : Verdict::negative,
                              j.at("raw_text").get<std::string>(), j.at("parse_ok").get<bool>());
    });
}

ojson to_json(const Trajectory& t)
{
    ojson o;
    o["id"] = t.id;
    o["seed"] = to_json(t.seed);
    auto steps = ojson::array();
    std::size_t seen = 0;
    for (const auto& step: t.steps)
    {
        const auto& msgs = step.state.messages;
        Messages delta(msgs.begin() + static_cast<std::ptrdiff_t>(std::min(seen, msgs.size())), msgs.end());
        seen = msgs.size();
        ojson s;
        s["state_delta"] = to_json(delta);
        s["action"] = to_json(step.action);
        steps.push_back(std::move(s));
    }
    o["steps"] = std::move(steps);
    o["status"] = std::string(to_string(t.status));
    o["max_steps"] = t.max_steps;
    return o;
}

Trajectory trajectory_from_json(const ojson& j)
{
    return guarded("trajectory", [&] {
        Trajectory t;
        t.id = j.at("id").get<std::string>();
        t.seed = seed_from_json(j.at("seed"));
        Messages running;
        int index = 0;
        for (const auto& s: j.at("steps"))
        {
            for (auto& m: messages_from_json(s.at("state_delta")))
                running.push_back(std::move(m));
            t.steps.push_back({State {running}, action_from_json(s.at("action"), ++index)});
        }
        t.status = parse_status(j.at("status").get<std::string>());
        t.max_steps = j.at("max_steps").get<int>();
        return t;
    });
}

ojson to_json(const SubTrajectory& sub)
{
    ojson o;
    o["trajectory_id"] = sub.trajectory_id;
    o["step_index"] = sub.step_index;
    o["context"] = to_json(sub.context.messages);
    o["target"] = to_json(sub.target_action);
    if (sub.step_reward)
        o["step_reward"] = *sub.step_reward;
    if (!sub.judgments.empty())
    {
        auto arr = ojson::array();
        for (const auto& jd: sub.judgments)
            arr.push_back(to_json(jd));
        o["judgments"] = std::move(arr);
    }
    return o;
}

SubTrajectory subtrajectory_from_json(const ojson& j)
{
    return guarded("subtrajectory", [&] {
        SubTrajectory sub;
        sub.trajectory_id = j.at("trajectory_id").get<std::string>();
        sub.step_index = j.at("step_index").get<int>();
        sub.context.messages = messages_from_json(j.at("context"));
        sub.target_action = action_from_json(j.at("target"), sub.step_index);
        if (j.contains("step_reward"))
            sub.step_reward = j.at("step_reward").get<double>();
        if (j.contains("judgments"))
            for (const auto& jd: j.at("judgments"))
                sub.judgments.push_back(judgment_from_json(jd));
        return sub;
    });
}

std::string dump_line(const ojson& j)
{
    return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

} // namespace swirl
