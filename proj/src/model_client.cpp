// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/hash.hpp>
#include <swirl/model_client.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace swirl
{

void SamplingParams::validate() const
{
    if (!(temperature >= 0.0))
        throw InvalidInput("temperature must be >= 0");
    if (max_output_tokens <= 0)
        throw InvalidInput("max_output_tokens must be positive");
}

void ModelEndpoint::validate() const
{
    if (!base_url.starts_with("http://") && !base_url.starts_with("https://"))
        throw InvalidInput("base_url must use http or https: '" + base_url + "'");
    if (model_id.empty())
        throw InvalidInput("model_id must not be empty");
    if (max_retries < 0 || max_retries > 8)
        throw InvalidInput("max_retries must be within [0, 8]");
    if (timeout.count() <= 0)
        throw InvalidInput("timeout must be positive");
    if (max_in_flight < 1)
        throw InvalidInput("max_in_flight must be >= 1");
}

std::string complete_chat(ChatModel& model, const Messages& messages, const SamplingParams& params)
{
    if (messages.empty())
        throw InvalidInput("complete_chat: empty message list");
    if (messages.back().role != Role::user)
        throw InvalidInput("complete_chat: last message must come from the user");
    params.validate();
    return model.complete(messages, params);
}

std::uint64_t request_fingerprint(const Messages& messages)
{
    HashBuilder h;
    h.add("request/v1").add(static_cast<std::int64_t>(messages.size()));
    for (const auto& m: messages)
        h.add(to_string(m.role)).add(m.content);
    return h.digest();
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt, std::mt19937_64& rng)
{
    const double full = static_cast<double>(base.count()) * static_cast<double>(1LL << std::clamp(attempt, 0, 30));
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    return std::chrono::milliseconds(static_cast<std::int64_t>(full * jitter(rng)));
}

std::chrono::milliseconds max_total_backoff(std::chrono::milliseconds base, int retries)
{
    return base * ((1LL << std::clamp(retries, 0, 30)) - 1);
}

ScriptedChatModel::ScriptedChatModel(std::string model_id): _model_id(std::move(model_id))
{
}

ScriptedChatModel& ScriptedChatModel::add(const Messages& request, std::string response)
{
    return add(request_fingerprint(request), std::move(response));
}

ScriptedChatModel& ScriptedChatModel::add(std::uint64_t fingerprint, std::string response)
{
    _exact[fingerprint] = std::move(response);
    return *this;
}

ScriptedChatModel& ScriptedChatModel::add_rule(std::string contains, std::string response)
{
    _rules.push_back({std::move(contains), std::move(response)});
    return *this;
}

ScriptedChatModel& ScriptedChatModel::set_default(std::optional<std::string> response)
{
    _default = std::move(response);
    return *this;
}

std::string ScriptedChatModel::complete(const Messages& messages, const SamplingParams&)
{
    ++_stats.calls;
    ++_stats.requests;
    if (auto it = _exact.find(request_fingerprint(messages)); it != _exact.end())
        return it->second;
    if (!messages.empty())
    {
        const auto& last = messages.back().content;
        for (const auto& rule: _rules)
            if (last.find(rule.contains) != std::string::npos)
                return rule.response;
    }
    if (_default)
        return *_default;
    throw ScriptMiss("no scripted response for request " + to_hex64(request_fingerprint(messages)));
}

std::unique_ptr<ScriptedChatModel> ScriptedChatModel::from_file(const std::string& path, std::string model_id)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open script file '" + path + "'");
    auto mock = std::make_unique<ScriptedChatModel>(std::move(model_id));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(line);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("default"))
        {
            mock->set_default(j.at("default").get<std::string>());
            continue;
        }
        auto response = j.at("response").get<std::string>();
        if (j.contains("messages"))
        {
            Messages msgs;
            for (const auto& m: j.at("messages"))
                msgs.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
            mock->add(msgs, std::move(response));
        }
        else if (j.contains("fingerprint"))
        {
            mock->add(std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16), std::move(response));
        }
        else if (j.contains("contains"))
        {
            mock->add_rule(j.at("contains").get<std::string>(), std::move(response));
        }
        else
        {
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": script line has no matcher");
        }
    }
    return mock;
}

std::string FunctionChatModel::complete(const Messages& messages, const SamplingParams& params)
{
    ++_stats.calls;
    ++_stats.requests;
    return _fn(messages, params);
}

} // namespace swirl
