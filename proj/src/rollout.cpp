// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/expression.hpp>
#include <swirl/hash.hpp>
#include <swirl/parallel.hpp>
#include <swirl/prompts.hpp>
#include <swirl/rollout.hpp>

#include <algorithm>
#include <chrono>
#include <mutex>

namespace swirl
{

int RolloutLimits::max_steps_for(TaskKind kind) const noexcept
{
    if (max_steps)
        return *max_steps;
    return kind == TaskKind::math ? 10 : 5;
}

void RolloutLimits::validate() const
{
    if (max_steps && *max_steps < 1)
        throw InvalidInput("max_steps must be >= 1");
    if (malformed_retries < 0)
        throw InvalidInput("malformed_retries must be >= 0");
    if (samples_per_seed < 1)
        throw InvalidInput("samples_per_seed must be >= 1");
}

Messages render_seed_prompt(const SeedQuestion& q, const RolloutLimits& limits)
{
    if (trim(q.question).empty())
        throw InvalidInput("seed question '" + q.id + "' is empty");
    const auto budget = std::to_string(limits.max_steps_for(q.task_kind));
    const auto tmpl = q.task_kind == TaskKind::math ? prompts::math_generation : prompts::search_generation;
    return {Message {Role::user, prompts::fill(tmpl, {budget, q.question})}};
}

namespace
{

struct TagMatch
{
    enum class Kind
    {
        none,
        closed,
        unclosed,
    } kind = Kind::none;
    std::size_t open = std::string_view::npos;
    std::string inner;
};

TagMatch find_tag(std::string_view raw, std::string_view name)
{
    const auto open_tag = "<" + std::string(name) + ">";
    const auto close_tag = "</" + std::string(name) + ">";
    TagMatch m;
    const auto open = raw.find(open_tag);
    if (open == std::string_view::npos)
        return m;
    m.open = open;
    const auto body = open + open_tag.size();
    const auto close = raw.find(close_tag, body);
    if (close == std::string_view::npos)
    {
        m.kind = TagMatch::Kind::unclosed;
        return m;
    }
    m.kind = TagMatch::Kind::closed;
    m.inner = trim(raw.substr(body, close - body));
    return m;
}

} // namespace

ParsedAction extract_action(std::string_view raw)
{
    const auto answer = find_tag(raw, "answer");
    if (answer.kind == TagMatch::Kind::closed)
        return FinalAnswer {answer.inner};

    const auto search = find_tag(raw, "search_query");
    const auto math = find_tag(raw, "math_exp");
    const TagMatch* first = nullptr;
    ToolKind kind = ToolKind::search_query;
    if (search.kind == TagMatch::Kind::closed)
        first = &search;
    if (math.kind == TagMatch::Kind::closed && (!first || math.open < first->open))
    {
        first = &math;
        kind = ToolKind::math_exp;
    }
    if (first)
        return ToolCall {kind, first->inner, std::nullopt};

    if (answer.kind == TagMatch::Kind::unclosed || search.kind == TagMatch::Kind::unclosed
        || math.kind == TagMatch::Kind::unclosed)
        return Malformed {"unclosed tag"};
    return Malformed {"no action tag"};
}

std::string render_env_turn(const ToolCall& call)
{
    if (!call.result)
        throw MissingResult("tool call '" + call.payload + "' has no result");
    return call.payload + " -> " + *call.result;
}

std::string CalculatorTool::execute(std::string_view payload)
{
    return eval_expression(payload);
}

SearchTool::SearchTool(std::shared_ptr<const VectorIndex> index, std::shared_ptr<Embedder> embedder, std::size_t k,
                       std::size_t snippet_chars):
    _index(std::move(index)), _embedder(std::move(embedder)), _k(k), _snippet_chars(snippet_chars)
{
    if (!_index || !_embedder)
        throw InvalidInput("search tool needs an index and an embedder");
    if (_k == 0)
        throw InvalidInput("k must be >= 1");
    if (_embedder->dimension() != _index->dimension())
        throw DimensionMismatch("embedder and index dimensions differ");
}

std::string SearchTool::execute(std::string_view payload)
{
    std::vector<SearchHit> hits;
    try
    {
        hits = search(*_index, *_embedder, payload, _k, _snippet_chars);
    }
    catch (const InvalidInput& e)
    {
        return std::string("ERROR: ") + e.what();
    }
    std::string out;
    for (const auto& hit: hits)
    {
        if (!out.empty())
            out += "\n\n";
        out += hit.text;
    }
    return out;
}

Toolbox& Toolbox::add(std::shared_ptr<Tool> tool)
{
    const auto kind = tool->kind();
    _tools[kind] = std::move(tool);
    return *this;
}

Tool* Toolbox::find(ToolKind kind) const
{
    const auto it = _tools.find(kind);
    return it == _tools.end() ? nullptr : it->second.get();
}

namespace
{

/// With `isolate`, model errors end the trajectory as aborted instead of propagating.
Trajectory rollout(const SeedQuestion& q, ChatModel& model, const Toolbox& tools, const RolloutLimits& limits,
                   const SamplingParams& sampling, std::string trajectory_id, bool isolate, std::string* failure)
{
    limits.validate();
    if (!tools.find(tool_for(q.task_kind)))
        throw InvalidInput("no " + std::string(to_string(tool_for(q.task_kind))) + " tool configured for seed '" + q.id
                           + "'");

    Trajectory t;
    t.id = std::move(trajectory_id);
    t.seed = q;
    t.max_steps = limits.max_steps_for(q.task_kind);
    t.status = TrajectoryStatus::exhausted;

    State state {render_seed_prompt(q, limits)};
    std::vector<std::string> payloads;

    for (int i = 1; i <= t.max_steps; ++i)
    {
        Action action;
        action.index = i;
        try
        {
            for (;;)
            {
                action.raw_completion = complete_chat(model, state.messages, sampling);
                action.parsed = extract_action(action.raw_completion);
                if (!action.is_malformed() || action.malformed_retries >= limits.malformed_retries)
                    break;
                ++action.malformed_retries;
            }
        }
        catch (const ModelError& e)
        {
            if (!isolate)
                throw;
            if (failure)
                *failure = e.what();
            action.raw_completion.clear();
            action.parsed = Malformed {std::string("model error: ") + e.what()};
        }

        if (action.is_answer())
        {
            t.steps.push_back({state, std::move(action)});
            t.status = TrajectoryStatus::answered;
            break;
        }
        if (action.is_malformed())
        {
            t.steps.push_back({state, std::move(action)});
            t.status = TrajectoryStatus::aborted;
            break;
        }

        auto& call = std::get<ToolCall>(action.parsed);
        action.repeat = std::find(payloads.begin(), payloads.end(), call.payload) != payloads.end();
        payloads.push_back(call.payload);
        if (i == t.max_steps)
        {
            // Budget spent: nothing would consume the result.
            t.steps.push_back({state, std::move(action)});
            break;
        }

        if (auto* tool = tools.find(call.kind))
            call.result = tool->execute(call.payload);
        else
            call.result = "ERROR: no " + std::string(to_string(call.kind)) + " tool available";

        State next = state;
        next.messages.push_back({Role::model, action.raw_completion});
        next.messages.push_back({Role::user, render_env_turn(call)});
        t.steps.push_back({std::move(state), std::move(action)});
        state = std::move(next);
    }
    return t;
}

} // namespace

Trajectory run_trajectory(const SeedQuestion& q, ChatModel& model, const Toolbox& tools, const RolloutLimits& limits,
                          const SamplingParams& sampling, std::string trajectory_id)
{
    return rollout(q, model, tools, limits, sampling, std::move(trajectory_id), false, nullptr);
}

BatchResult run_batch(std::vector<SeedQuestion> seeds, const RolloutLimits& limits, ChatModel& model,
                      const Toolbox& tools, const SamplingParams& sampling, const BatchOptions& options)
{
    limits.validate();
    if (options.workers < 1)
        throw InvalidInput("workers must be >= 1");
    validate_seed_set(seeds);
    std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& q: seeds)
        if (!tools.find(tool_for(q.task_kind)))
            throw InvalidInput("no tool configured for seed '" + q.id + "'");

    const auto started = std::chrono::steady_clock::now();
    const auto per_seed = static_cast<std::size_t>(limits.samples_per_seed);
    const auto n = seeds.size() * per_seed;

    BatchResult result;
    result.trajectories.resize(n);
    std::vector<std::string> failures(n);

    std::mutex emit_mutex;
    std::vector<char> done(n, 0);
    std::size_t next_to_emit = 0;

    parallel_for(n, options.workers, [&](std::size_t job) {
        const auto& q = seeds[job / per_seed];
        const int sample = static_cast<int>(job % per_seed);
        auto params = sampling;
        if (sampling.seed)
            params.seed = static_cast<std::int64_t>(
                xxh64(q.id + "#" + std::to_string(sample), static_cast<std::uint64_t>(*sampling.seed)) >> 1);
        result.trajectories[job] =
            rollout(q, model, tools, limits, params, make_trajectory_id(q.id, sample), true, &failures[job]);

        std::lock_guard lock(emit_mutex);
        done[job] = 1;
        while (next_to_emit < n && done[next_to_emit])
        {
            if (options.sink)
                options.sink(result.trajectories[next_to_emit]);
            ++next_to_emit;
        }
    });

    auto& report = result.report;
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto& t = result.trajectories[i];
        switch (t.status)
        {
            case TrajectoryStatus::answered: ++report.answered; break;
            case TrajectoryStatus::exhausted: ++report.exhausted; break;
            case TrajectoryStatus::aborted: ++report.aborted; break;
        }
        for (const auto& step: t.steps)
            report.model_calls += 1 + step.action.malformed_retries;
        if (!failures[i].empty())
            report.failures.push_back(t.id + ": " + failures[i]);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (n > 0 && static_cast<double>(report.aborted) / static_cast<double>(n) > options.max_abort_rate)
        throw BatchAborted(std::to_string(report.aborted) + " of " + std::to_string(n)
                           + " trajectories aborted, above the failure threshold");
    return result;
}

} // namespace swirl
