// SPDX-License-Identifier: Apache-2.0
#include <httplib.h>
#include <json.hpp>

#include <swirl/errors.hpp>
#include <swirl/model_client.hpp>
#include <swirl/search.hpp>

#include <cstdlib>
#include <thread>

namespace swirl
{

namespace
{

struct SplitUrl
{
    std::string scheme_host_port;
    std::string path; // without trailing slash
};

SplitUrl split_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw InvalidInput("not a URL: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.scheme_host_port = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? std::string {} : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/')
        out.path.pop_back();
#if !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
    if (url.starts_with("https://"))
        throw InvalidInput("https endpoints need a build with OpenSSL");
#endif
    return out;
}

bool is_timeout(httplib::Error err)
{
    return err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout;
}

/// POST with the shared retry policy: 429, 5xx, timeouts and connection failures are retried with
/// exponential backoff; 401/403 and other 4xx are not.
std::string post_json(const ModelEndpoint& ep, const std::string& suffix, const std::string& body, CallStats& stats,
                      std::counting_semaphore<1024>* limiter, std::mutex& rng_mutex, std::mt19937_64& rng)
{
    const auto url = split_url(ep.base_url);
    httplib::Client client(url.scheme_host_port);
    const auto secs = static_cast<time_t>(ep.timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((ep.timeout.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!ep.api_key_env.empty())
    {
        if (const char* key = std::getenv(ep.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    enum class Kind
    {
        rate,
        server,
        timeout,
        connect
    } last_kind = Kind::connect;

    for (int attempt = 0;; ++attempt)
    {
        ++stats.requests;
        httplib::Result res = [&] {
            if (limiter)
                limiter->acquire();
            auto r = client.Post(url.path + suffix, headers, body, "application/json");
            if (limiter)
                limiter->release();
            return r;
        }();

        if (!res)
        {
            last_kind = is_timeout(res.error()) ? Kind::timeout : Kind::connect;
            last_error = httplib::to_string(res.error());
        }
        else if (res->status == 401 || res->status == 403)
        {
            throw AuthError("HTTP " + std::to_string(res->status) + " from " + ep.base_url);
        }
        else if (res->status == 429)
        {
            last_kind = Kind::rate;
            last_error = "HTTP 429";
        }
        else if (res->status >= 500)
        {
            last_kind = Kind::server;
            last_error = "HTTP " + std::to_string(res->status);
        }
        else if (res->status < 200 || res->status >= 300)
        {
            throw EndpointError("HTTP " + std::to_string(res->status) + " from " + ep.base_url + ": " + res->body);
        }
        else
        {
            return res->body;
        }

        if (attempt >= ep.max_retries)
            break;
        ++stats.retries;
        std::chrono::milliseconds delay;
        {
            std::lock_guard lock(rng_mutex);
            delay = backoff_delay(ep.backoff_base, attempt, rng);
        }
        std::this_thread::sleep_for(delay);
    }

    const auto msg = last_error + " after " + std::to_string(ep.max_retries) + " retries (" + ep.base_url + ")";
    switch (last_kind)
    {
        case Kind::rate: throw RateLimited(msg);
        case Kind::timeout: throw TimeoutError(msg);
        default: throw EndpointError(msg);
    }
}

std::string wire_role(Role role)
{
    return role == Role::model ? "assistant" : "user";
}

} // namespace

HttpChatModel::HttpChatModel(ModelEndpoint endpoint):
    _endpoint(std::move(endpoint)), _limiter(std::max(1, std::min(_endpoint.max_in_flight, 1024))), _rng(0x5eed)
{
    _endpoint.validate();
}

HttpChatModel::~HttpChatModel() = default;

std::string HttpChatModel::request_body(const std::string& model_id, const Messages& messages, const SamplingParams& params)
{
    nlohmann::ordered_json j;
    j["model"] = model_id;
    j["messages"] = nlohmann::ordered_json::array();
    for (const auto& m: messages)
        j["messages"].push_back({{"role", wire_role(m.role)}, {"content", m.content}});
    j["temperature"] = params.temperature;
    j["max_tokens"] = params.max_output_tokens;
    if (params.seed)
        j["seed"] = *params.seed;
    return j.dump();
}

std::string HttpChatModel::parse_response(const std::string& body)
{
    try
    {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw MalformedResponse("choices[0].message.content is not a string");
        return content.get<std::string>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw MalformedResponse(std::string("chat response: ") + e.what());
    }
}

std::string HttpChatModel::complete(const Messages& messages, const SamplingParams& params)
{
    ++_stats.calls;
    const auto body = request_body(_endpoint.model_id, messages, params);
    return parse_response(post_json(_endpoint, "/chat/completions", body, _stats, &_limiter, _rng_mutex, _rng));
}

HttpEmbedder::HttpEmbedder(ModelEndpoint endpoint, std::size_t dimension):
    _endpoint(std::move(endpoint)),
    _dimension(dimension),
    _limiter(std::make_unique<std::counting_semaphore<1024>>(std::max(1, std::min(_endpoint.max_in_flight, 1024))))
{
    _endpoint.validate();
    if (dimension == 0)
        throw InvalidInput("embedding dimension must be positive");
}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<double> HttpEmbedder::parse_response(const std::string& body)
{
    try
    {
        const auto j = nlohmann::json::parse(body);
        return j.at("data").at(0).at("embedding").get<std::vector<double>>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw MalformedResponse(std::string("embedding response: ") + e.what());
    }
}

Embedding HttpEmbedder::embed(std::string_view text)
{
    if (trim(text).empty())
        throw InvalidInput("cannot embed empty text");
    nlohmann::ordered_json req;
    req["model"] = _endpoint.model_id;
    req["input"] = nlohmann::ordered_json::array({std::string(text)});
    auto v = parse_response(post_json(_endpoint, "/embeddings", req.dump(), _stats, _limiter.get(), _rng_mutex, _rng));
    if (v.size() != _dimension)
        throw DimensionMismatch("embedding endpoint returned dimension " + std::to_string(v.size()) + ", expected "
                                + std::to_string(_dimension));
    normalize(v);
    return v;
}

} // namespace swirl
