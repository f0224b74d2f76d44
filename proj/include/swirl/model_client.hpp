// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <vector>

namespace swirl
{

struct SamplingParams
{
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::optional<std::int64_t> seed;

    /// Trajectory generation: diverse samples.
    static SamplingParams generation() { return {0.7, 1024, std::nullopt}; }
    /// Judges, reward models and evaluation: reproducible.
    static SamplingParams deterministic() { return {0.0, 1024, std::nullopt}; }

    void validate() const;
};

struct ModelEndpoint
{
    std::string base_url; // e.g. http://localhost:8000/v1
    std::string model_id;
    std::string api_key_env; // name of the variable holding the key; empty for none
    std::chrono::milliseconds timeout {60'000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base {1'000};
    int max_in_flight = 8;

    /// Throws InvalidInput.
    void validate() const;
};

/// Call counters shared by every backend.
struct CallStats
{
    std::atomic<std::int64_t> calls {0};    // logical completions requested
    std::atomic<std::int64_t> requests {0}; // wire requests, including retries
    std::atomic<std::int64_t> retries {0};
};

/// A chat-completion backend. Implementations must be safe to call from multiple threads.
class ChatModel
{
  public:
    virtual ~ChatModel() = default;

    virtual std::string model_id() const = 0;

    /// Assistant text of the first choice.
    virtual std::string complete(const Messages& messages, const SamplingParams& params) = 0;

    const CallStats& stats() const noexcept { return _stats; }

  protected:
    CallStats _stats;
};

/// Checks preconditions (non-empty, last turn from the user) and forwards to the backend.
std::string complete_chat(ChatModel& model, const Messages& messages, const SamplingParams& params);

/// Fingerprint of a request: XXH64 over the canonical message list. Sampling params are ignored.
std::uint64_t request_fingerprint(const Messages& messages);

/// Delay before retry `attempt` (0-based): base * 2^attempt, scaled by a jitter factor in [0.5, 1].
std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt, std::mt19937_64& rng);

/// Upper bound of the summed backoff across `retries` retries.
std::chrono::milliseconds max_total_backoff(std::chrono::milliseconds base, int retries);

/// OpenAI-style chat-completions client with retry and backoff.
class HttpChatModel final: public ChatModel
{
  public:
    explicit HttpChatModel(ModelEndpoint endpoint);
    ~HttpChatModel() override;

    std::string model_id() const override { return _endpoint.model_id; }
    std::string complete(const Messages& messages, const SamplingParams& params) override;

    const ModelEndpoint& endpoint() const noexcept { return _endpoint; }

    /// Request body for the wire. Exposed for tests.
    static std::string request_body(const std::string& model_id, const Messages& messages, const SamplingParams& params);
    /// Extracts choices[0].message.content. Throws MalformedResponse.
    static std::string parse_response(const std::string& body);

  private:
    ModelEndpoint _endpoint;
    std::counting_semaphore<1024> _limiter;
    std::mutex _rng_mutex;
    std::mt19937_64 _rng;
};

/// One request pattern of a scripted mock.
struct ScriptRule
{
    std::string contains; // matches when the last user message contains this text
    std::string response;
};

/// Deterministic offline backend. Lookup order: exact fingerprint, then `contains` rules in
/// declaration order, then the default. A miss without default raises ScriptMiss.
class ScriptedChatModel final: public ChatModel
{
  public:
    explicit ScriptedChatModel(std::string model_id = "scripted-mock");

    ScriptedChatModel& add(const Messages& request, std::string response);
    ScriptedChatModel& add(std::uint64_t fingerprint, std::string response);
    ScriptedChatModel& add_rule(std::string contains, std::string response);
    ScriptedChatModel& set_default(std::optional<std::string> response);

    std::string model_id() const override { return _model_id; }
    std::string complete(const Messages& messages, const SamplingParams& params) override;

    /// Script file: JSONL lines of {"messages":[...], "response":...}, {"fingerprint":"hex",
    /// "response":...}, {"contains":..., "response":...} or {"default":...}.
    static std::unique_ptr<ScriptedChatModel> from_file(const std::string& path, std::string model_id);

  private:
    std::string _model_id;
    std::map<std::uint64_t, std::string> _exact;
    std::vector<ScriptRule> _rules;
    std::optional<std::string> _default;
};

/// Backend driven by a callable; used by tests and the toy environments.
class FunctionChatModel final: public ChatModel
{
  public:
    using Fn = std::function<std::string(const Messages&, const SamplingParams&)>;

    FunctionChatModel(std::string model_id, Fn fn): _model_id(std::move(model_id)), _fn(std::move(fn)) {}

    std::string model_id() const override { return _model_id; }
    std::string complete(const Messages& messages, const SamplingParams& params) override;

  private:
    std::string _model_id;
    Fn _fn;
};

} // namespace swirl
