// SPDX-License-Identifier: Apache-2.0
#include <swirl/config.hpp>
#include <swirl/serialization.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace swirl
{

namespace
{

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string out = "invalid configuration:";
    for (const auto& p: problems)
        out += "\n  - " + p;
    return out;
}

// Collects problems instead of throwing at the first bad field.
class Reader
{
  public:
    Reader(std::vector<std::string>& problems, std::filesystem::path base_dir)
        : _problems(problems), _base_dir(std::move(base_dir))
    {
    }

    void keys(const ojson& j, const std::string& where, std::initializer_list<const char*> allowed)
    {
        if (!j.is_object())
        {
            _problems.push_back(where + ": expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _]: j.items())
            if (!ok.contains(key))
                _problems.push_back(where + ": unknown key '" + key + "'");
    }

    template <class T>
    void get(const ojson& j, const char* key, const std::string& where, T& out)
    {
        if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
            return;
        try
        {
            out = j.at(key).get<T>();
        }
        catch (const std::exception&)
        {
            _problems.push_back(where + "." + key + ": wrong type");
        }
    }

    void path(const ojson& j, const char* key, const std::string& where, std::filesystem::path& out)
    {
        std::string text;
        get(j, key, where, text);
        if (!text.empty())
            out = resolve(text);
    }

    std::filesystem::path resolve(const std::string& text) const
    {
        std::filesystem::path p(text);
        return p.is_absolute() ? p : _base_dir / p;
    }

    std::vector<std::string>& problems() { return _problems; }

  private:
    std::vector<std::string>& _problems;
    std::filesystem::path _base_dir;
};

EndpointConfig read_endpoint(Reader& r, const ojson& j, const std::string& where)
{
    EndpointConfig e;
    e.kind = "http";
    r.keys(j, where,
           {"kind", "base_url", "model_id", "api_key_env", "timeout_ms", "max_retries", "backoff_base_ms",
            "max_in_flight", "script", "dimension"});
    r.get(j, "kind", where, e.kind);
    r.get(j, "base_url", where, e.http.base_url);
    r.get(j, "model_id", where, e.http.model_id);
    r.get(j, "api_key_env", where, e.http.api_key_env);
    std::int64_t timeout_ms = e.http.timeout.count();
    std::int64_t backoff_ms = e.http.backoff_base.count();
    r.get(j, "timeout_ms", where, timeout_ms);
    r.get(j, "backoff_base_ms", where, backoff_ms);
    e.http.timeout = std::chrono::milliseconds(timeout_ms);
    e.http.backoff_base = std::chrono::milliseconds(backoff_ms);
    r.get(j, "max_retries", where, e.http.max_retries);
    r.get(j, "max_in_flight", where, e.http.max_in_flight);
    r.path(j, "script", where, e.script);
    r.get(j, "dimension", where, e.dimension);
    return e;
}

void endpoint_problems(const EndpointConfig& e, const std::string& where, bool embedder,
                       std::vector<std::string>& out)
{
    if (!e.configured())
        return;
    if (e.kind == "http")
    {
        try
        {
            e.http.validate();
        }
        catch (const std::exception& ex)
        {
            out.push_back(where + ": " + ex.what());
        }
    }
    else if (e.kind == "scripted")
    {
        if (embedder)
            out.push_back(where + ": embedders cannot be scripted");
        if (e.script.empty())
            out.push_back(where + ": scripted endpoint needs 'script'");
    }
    else if (e.kind == "hash")
    {
        if (!embedder)
            out.push_back(where + ": 'hash' is only valid for the embedder");
    }
    else
    {
        out.push_back(where + ": unknown kind '" + e.kind + "'");
    }
    if (embedder && e.dimension == 0)
        out.push_back(where + ": dimension must be >= 1");
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidInput(join_problems(problems)), _problems(std::move(problems))
{
}

ojson EndpointConfig::to_json() const
{
    ojson o;
    if (!configured())
        return nullptr;
    o["kind"] = kind;
    if (kind == "http")
    {
        o["base_url"] = http.base_url;
        o["model_id"] = http.model_id;
        o["api_key_env"] = http.api_key_env;
        o["timeout_ms"] = http.timeout.count();
        o["max_retries"] = http.max_retries;
        o["backoff_base_ms"] = http.backoff_base.count();
        o["max_in_flight"] = http.max_in_flight;
    }
    else if (kind == "scripted")
    {
        o["model_id"] = http.model_id;
        o["script"] = script.filename().string();
    }
    if (kind == "hash" || (kind == "http" && dimension != 256))
        o["dimension"] = dimension;
    return o;
}

ojson RunConfig::to_json() const
{
    ojson o;
    ojson endpoints;
    endpoints["generator"] = generator.to_json();
    endpoints["judge"] = judge.to_json();
    if (math_judge)
        endpoints["math_judge"] = math_judge->to_json();
    endpoints["reward"] = reward.to_json();
    endpoints["embedder"] = embedder.to_json();
    o["endpoints"] = std::move(endpoints);
    o["tools"] = {{"search_k", tools.search_k}, {"snippet_chars", tools.snippet_chars}};
    ojson lim;
    lim["max_steps"] = limits.max_steps ? ojson(*limits.max_steps) : ojson(nullptr);
    lim["malformed_retries"] = limits.malformed_retries;
    lim["samples_per_seed"] = limits.samples_per_seed;
    o["limits"] = std::move(lim);
    o["strategy"] = std::string(swirl::to_string(strategy));
    o["export_format"] = export_format == ExportFormat::rl ? "rl" : "sft";
    o["rng_seed"] = rng_seed;
    o["sampling"] = {{"temperature", sampling.temperature}, {"max_output_tokens", sampling.max_output_tokens}};
    o["workers"] = workers;
    o["max_abort_rate"] = max_abort_rate;
    auto tr = trainer.to_json();
    tr["env_seed"] = env_seed;
    tr["steps"] = train_steps;
    o["trainer"] = std::move(tr);
    return o;
}

RunConfig RunConfig::from_json(const ojson& j, const std::filesystem::path& base_dir)
{
    std::vector<std::string> problems;
    Reader r(problems, base_dir);
    RunConfig c;
    r.keys(j, "config",
           {"endpoints", "tools", "limits", "strategy", "export_format", "paths", "rng_seed", "sampling", "workers",
            "max_abort_rate", "trainer"});
    if (!j.is_object())
        throw ConfigError(std::move(problems));

    if (j.contains("endpoints"))
    {
        const auto& e = j.at("endpoints");
        r.keys(e, "endpoints", {"generator", "judge", "math_judge", "reward", "embedder"});
        if (e.is_object())
        {
            if (e.contains("generator"))
                c.generator = read_endpoint(r, e.at("generator"), "endpoints.generator");
            if (e.contains("judge"))
                c.judge = read_endpoint(r, e.at("judge"), "endpoints.judge");
            if (e.contains("math_judge"))
                c.math_judge = read_endpoint(r, e.at("math_judge"), "endpoints.math_judge");
            if (e.contains("reward"))
                c.reward = read_endpoint(r, e.at("reward"), "endpoints.reward");
            c.embedder.kind = "hash";
            if (e.contains("embedder"))
                c.embedder = read_endpoint(r, e.at("embedder"), "endpoints.embedder");
        }
    }
    else
    {
        c.embedder.kind = "hash";
    }

    if (j.contains("tools"))
    {
        const auto& t = j.at("tools");
        r.keys(t, "tools", {"search_k", "snippet_chars"});
        r.get(t, "search_k", "tools", c.tools.search_k);
        r.get(t, "snippet_chars", "tools", c.tools.snippet_chars);
    }
    if (j.contains("limits"))
    {
        const auto& l = j.at("limits");
        r.keys(l, "limits", {"max_steps", "malformed_retries", "samples_per_seed"});
        int max_steps = 0;
        r.get(l, "max_steps", "limits", max_steps);
        if (l.is_object() && l.contains("max_steps") && !l.at("max_steps").is_null())
            c.limits.max_steps = max_steps;
        r.get(l, "malformed_retries", "limits", c.limits.malformed_retries);
        r.get(l, "samples_per_seed", "limits", c.limits.samples_per_seed);
    }

    std::string text;
    r.get(j, "strategy", "config", text);
    if (!text.empty())
    {
        try
        {
            c.strategy = parse_filter_strategy(text);
        }
        catch (const std::exception& e)
        {
            problems.push_back(std::string("strategy: ") + e.what());
        }
    }
    text.clear();
    r.get(j, "export_format", "config", text);
    if (!text.empty())
    {
        try
        {
            c.export_format = parse_export_format(text);
        }
        catch (const std::exception& e)
        {
            problems.push_back(std::string("export_format: ") + e.what());
        }
    }

    if (j.contains("paths"))
    {
        const auto& p = j.at("paths");
        r.keys(p, "paths", {"seeds", "corpus", "out_dir"});
        r.path(p, "seeds", "paths", c.seeds);
        r.path(p, "corpus", "paths", c.corpus);
        r.path(p, "out_dir", "paths", c.out_dir);
    }
    if (c.out_dir.is_relative())
        c.out_dir = base_dir / c.out_dir;

    r.get(j, "rng_seed", "config", c.rng_seed);
    if (j.contains("sampling"))
    {
        const auto& s = j.at("sampling");
        r.keys(s, "sampling", {"temperature", "max_output_tokens"});
        r.get(s, "temperature", "sampling", c.sampling.temperature);
        r.get(s, "max_output_tokens", "sampling", c.sampling.max_output_tokens);
    }
    r.get(j, "workers", "config", c.workers);
    r.get(j, "max_abort_rate", "config", c.max_abort_rate);

    if (j.contains("trainer"))
    {
        const auto& t = j.at("trainer");
        r.keys(t, "trainer",
               {"feature_dim", "learning_rate", "batch_size", "eval_every", "num_chains",
                "dataset_samples_per_question", "eval_episodes_per_question", "baseline", "rng_seed", "env_seed",
                "steps"});
        r.get(t, "feature_dim", "trainer", c.trainer.feature_dim);
        r.get(t, "learning_rate", "trainer", c.trainer.learning_rate);
        r.get(t, "batch_size", "trainer", c.trainer.batch_size);
        r.get(t, "eval_every", "trainer", c.trainer.eval_every);
        r.get(t, "num_chains", "trainer", c.trainer.num_chains);
        r.get(t, "dataset_samples_per_question", "trainer", c.trainer.dataset_samples_per_question);
        r.get(t, "eval_episodes_per_question", "trainer", c.trainer.eval_episodes_per_question);
        std::string baseline;
        r.get(t, "baseline", "trainer", baseline);
        if (baseline == "none")
            c.trainer.baseline = toy::Baseline::none;
        else if (baseline == "batch_mean" || baseline.empty())
            c.trainer.baseline = toy::Baseline::batch_mean;
        else
            problems.push_back("trainer.baseline: expected 'none' or 'batch_mean'");
        r.get(t, "rng_seed", "trainer", c.trainer.rng_seed);
        r.get(t, "env_seed", "trainer", c.env_seed);
        r.get(t, "steps", "trainer", c.train_steps);
    }

    for (auto& p: c.problems())
        problems.push_back(std::move(p));
    if (!problems.empty())
        throw ConfigError(std::move(problems));
    return c;
}

std::vector<std::string> RunConfig::problems() const
{
    std::vector<std::string> out;
    endpoint_problems(generator, "endpoints.generator", false, out);
    endpoint_problems(judge, "endpoints.judge", false, out);
    if (math_judge)
        endpoint_problems(*math_judge, "endpoints.math_judge", false, out);
    endpoint_problems(reward, "endpoints.reward", false, out);
    endpoint_problems(embedder, "endpoints.embedder", true, out);
    if (tools.search_k < 1)
        out.push_back("tools.search_k must be >= 1");
    if (tools.snippet_chars < 1)
        out.push_back("tools.snippet_chars must be >= 1");
    try
    {
        limits.validate();
    }
    catch (const std::exception& e)
    {
        out.push_back(std::string("limits: ") + e.what());
    }
    try
    {
        sampling.validate();
    }
    catch (const std::exception& e)
    {
        out.push_back(std::string("sampling: ") + e.what());
    }
    if (workers < 1)
        out.push_back("workers must be >= 1");
    if (!(max_abort_rate >= 0.0 && max_abort_rate <= 1.0))
        out.push_back("max_abort_rate must lie in [0, 1]");
    if (trainer.feature_dim < 1)
        out.push_back("trainer.feature_dim must be >= 1");
    if (!(trainer.learning_rate >= 0.0))
        out.push_back("trainer.learning_rate must be >= 0");
    if (trainer.batch_size < 1)
        out.push_back("trainer.batch_size must be >= 1");
    if (trainer.eval_every < 1)
        out.push_back("trainer.eval_every must be >= 1");
    if (trainer.num_chains < 1)
        out.push_back("trainer.num_chains must be >= 1");
    if (trainer.dataset_samples_per_question < 1)
        out.push_back("trainer.dataset_samples_per_question must be >= 1");
    if (trainer.eval_episodes_per_question < 1)
        out.push_back("trainer.eval_episodes_per_question must be >= 1");
    if (train_steps < 0)
        out.push_back("trainer.steps must be >= 0");
    return out;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"cannot open config '" + path.string() + "'"});
    ojson j;
    try
    {
        j = ojson::parse(in);
    }
    catch (const std::exception& e)
    {
        throw ConfigError({"config is not valid JSON: " + std::string(e.what())});
    }
    return RunConfig::from_json(j, std::filesystem::absolute(path).parent_path());
}

std::unique_ptr<ChatModel> make_chat_model(const EndpointConfig& config)
{
    if (!config.configured())
        throw InvalidInput("endpoint is not configured");
    if (config.kind == "http")
        return std::make_unique<HttpChatModel>(config.http);
    if (config.kind == "scripted")
    {
        const auto id = config.http.model_id.empty() ? "scripted-" + config.script.stem().string()
                                                     : config.http.model_id;
        return ScriptedChatModel::from_file(config.script.string(), id);
    }
    throw InvalidInput("endpoint kind '" + config.kind + "' cannot serve chat completions");
}

std::unique_ptr<Embedder> make_embedder(const EndpointConfig& config)
{
    if (config.kind == "hash")
        return std::make_unique<HashingEmbedder>(config.dimension);
    if (config.kind == "http")
        return std::make_unique<HttpEmbedder>(config.http, config.dimension);
    throw InvalidInput("endpoint kind '" + config.kind + "' cannot serve embeddings");
}

std::vector<SeedQuestion> load_seed_questions(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open seeds file '" + path.string() + "'");
    std::vector<SeedQuestion> seeds;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        try
        {
            seeds.push_back(seed_from_json(ojson::parse(line)));
        }
        catch (const std::exception& e)
        {
            throw InvalidInput(path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    validate_seed_set(seeds);
    return seeds;
}

} // namespace swirl
