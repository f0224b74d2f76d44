// SPDX-License-Identifier: Apache-2.0
#include <swirl/cli.hpp>
#include <swirl/config.hpp>
#include <swirl/evalx.hpp>
#include <swirl/hash.hpp>
#include <swirl/parallel.hpp>
#include <swirl/pipeline.hpp>
#include <swirl/serialization.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace swirl
{

namespace fs = std::filesystem;

namespace
{

// Artifact names inside the out dir.
constexpr const char* kIndex = "index.jsonl";
constexpr const char* kTrajectories = "trajectories.jsonl";
constexpr const char* kSubtrajectories = "subtrajectories.jsonl";
constexpr const char* kJudgments = "judgments.jsonl";
constexpr const char* kFiltered = "filtered.jsonl";
constexpr const char* kAnnotated = "annotated.jsonl";
constexpr const char* kTrainReport = "train_report.json";
constexpr const char* kEvalReport = "eval_report.json";
constexpr const char* kEvalCsv = "eval_records.csv";

std::string export_name(ExportFormat f)
{
    return f == ExportFormat::rl ? "train_rl.jsonl" : "train_sft.jsonl";
}

struct Flags
{
    std::string config;
    std::string out;
    std::optional<int> workers;
    std::string seeds;
    std::optional<int> samples;
    std::optional<int> max_steps;
    std::string strategy;
    std::string ids;
    bool dry_run = false;
    std::optional<double> temperature;
    std::optional<std::int64_t> seed;
    std::string format;
    std::optional<int> steps;
};

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm {};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return ss.str();
}

class Command
{
  public:
    Command(std::string name, const Flags& flags, std::ostream& out, std::ostream& err)
        : name(std::move(name)), flags(flags), out(out), _err(err)
    {
    }

    void log(const char* level, const char* event, ojson detail = ojson::object())
    {
        ojson line;
        line["ts"] = utc_timestamp();
        line["level"] = level;
        line["cmd"] = name;
        line["event"] = event;
        line["detail"] = std::move(detail);
        std::lock_guard lock(_log_mutex);
        _err << dump_line(line) << '\n';
    }

    fs::path artifact(const char* file) const { return config.out_dir / file; }
    fs::path artifact(const std::string& file) const { return config.out_dir / file; }

    DatasetManifest base_manifest(const std::string& key) const
    {
        DatasetManifest m;
        m.rng_seeds = {config.rng_seed};
        m.input_key = key;
        m.effective_config = config.to_json();
        return m;
    }

    /// Hash of the command name, the effective config and the bytes of every input file. The
    /// worker count does not change outputs and is left out.
    std::string input_key(const std::vector<fs::path>& inputs) const
    {
        auto effective = config.to_json();
        effective.erase("workers");
        HashBuilder h;
        h.add(name);
        h.add(dump_line(effective));
        for (const auto& p: inputs)
            h.add(read_file(p));
        return h.hex();
    }

    bool up_to_date(const fs::path& artifact, const std::string& key)
    {
        if (!fs::exists(artifact) || !fs::exists(manifest_path(artifact)))
            return false;
        try
        {
            if (read_jsonl(artifact).manifest.input_key != key)
                return false;
        }
        catch (const std::exception&)
        {
            return false;
        }
        log("info", "up_to_date", {{"artifact", artifact.filename().string()}});
        out << "up to date: " << artifact.string() << '\n';
        return true;
    }

    void need_input(const fs::path& p, const std::string& what, std::vector<std::string>& problems) const
    {
        if (p.empty())
            problems.push_back(what + " is not set");
        else if (!fs::exists(p))
            problems.push_back(what + " '" + p.string() + "' does not exist");
    }

    ChatModel& judge_for(TaskKind kind)
    {
        if (kind == TaskKind::math && math_judge)
            return *math_judge;
        return *judge;
    }

    /// Endpoint scripts count as inputs, so editing a mock script invalidates outputs.
    void add_script(const EndpointConfig& e, std::vector<fs::path>& inputs) const
    {
        if (e.kind == "scripted")
            inputs.push_back(e.script);
    }

    std::string name;
    const Flags& flags;
    std::ostream& out;
    RunConfig config;
    std::unique_ptr<ChatModel> judge;
    std::unique_ptr<ChatModel> math_judge;

  private:
    std::ostream& _err;
    std::mutex _log_mutex;
};

void apply_overrides(RunConfig& c, const Flags& f)
{
    if (!f.out.empty())
        c.out_dir = fs::absolute(f.out);
    if (f.workers)
        c.workers = *f.workers;
    if (!f.seeds.empty())
        c.seeds = fs::absolute(f.seeds);
    if (f.samples)
        c.limits.samples_per_seed = *f.samples;
    if (f.max_steps)
        c.limits.max_steps = *f.max_steps;
    if (f.temperature)
        c.sampling.temperature = *f.temperature;
    if (f.seed)
    {
        c.rng_seed = *f.seed;
        c.env_seed = static_cast<std::uint64_t>(*f.seed);
    }
    if (f.steps)
        c.train_steps = *f.steps;
}

void print_plan(Command& cmd, const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs)
{
    cmd.out << "plan: " << cmd.name << '\n';
    for (const auto& p: inputs)
        cmd.out << "  read  " << p.string() << '\n';
    for (const auto& p: outputs)
        cmd.out << "  write " << p.string() << '\n';
    cmd.out << "config: " << cmd.config.to_json().dump() << '\n';
    cmd.log("info", "dry_run", {{"inputs", inputs.size()}, {"outputs", outputs.size()}});
}

void need_endpoint(const EndpointConfig& e, const std::string& what, std::vector<std::string>& problems)
{
    if (!e.configured())
        problems.push_back("endpoints." + what + " is not configured");
}

void fail_if(std::vector<std::string> problems)
{
    if (!problems.empty())
        throw ConfigError(std::move(problems));
}

std::map<std::string, SeedQuestion> seeds_by_trajectory(const std::vector<Trajectory>& ts)
{
    std::map<std::string, SeedQuestion> out;
    for (const auto& t: ts)
        out.emplace(t.id, t.seed);
    return out;
}

// ---------------------------------------------------------------------------

struct Tools
{
    Toolbox box;
    std::size_t documents = 0;
    bool cache_hit = false;
};

Tools make_tools(Command& cmd, bool with_search)
{
    Tools t;
    t.box.add(std::make_shared<CalculatorTool>());
    if (!with_search)
        return t;
    std::shared_ptr<Embedder> embedder = make_embedder(cmd.config.embedder);
    auto built = build_index(cmd.config.corpus, *embedder);
    t.documents = built.index.size();
    t.cache_hit = built.cache_hit;
    cmd.log("info", "index_ready",
            {{"documents", t.documents}, {"cache_hit", built.cache_hit}, {"embedder", embedder->id()}});
    auto index = std::make_shared<const VectorIndex>(std::move(built.index));
    t.box.add(std::make_shared<SearchTool>(index, embedder, cmd.config.tools.search_k, cmd.config.tools.snippet_chars));
    return t;
}

bool any_search(const std::vector<SeedQuestion>& seeds)
{
    return std::any_of(seeds.begin(), seeds.end(), [](const auto& q) { return q.task_kind == TaskKind::search_qa; });
}

int cmd_ingest(Command& cmd)
{
    std::vector<std::string> problems;
    cmd.need_input(cmd.config.corpus, "paths.corpus", problems);
    fail_if(std::move(problems));
    const auto target = cmd.artifact(kIndex);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, {cmd.config.corpus}, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key({cmd.config.corpus});
    if (cmd.up_to_date(target, key))
        return kExitOk;

    auto embedder = make_embedder(cmd.config.embedder);
    const auto built = build_index(cmd.config.corpus, *embedder);
    std::vector<std::string> lines;
    for (const auto& doc: built.index.documents())
    {
        ojson o;
        o["doc_id"] = doc.doc_id;
        o["title"] = doc.title;
        o["chars"] = doc.title.size() + doc.body.size();
        lines.push_back(dump_line(o));
    }
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "index";
    write_jsonl(target, lines, manifest);
    cmd.log("info", "wrote", {{"artifact", kIndex}, {"documents", lines.size()}, {"cache_hit", built.cache_hit}});
    cmd.out << "indexed " << lines.size() << " documents with " << embedder->id() << " ("
            << (built.cache_hit ? "cache hit" : "embedded") << ")\n"
            << "embedding cache: " << built.cache_path.string() << '\n';
    return kExitOk;
}

int cmd_generate(Command& cmd)
{
    std::vector<std::string> problems;
    need_endpoint(cmd.config.generator, "generator", problems);
    cmd.need_input(cmd.config.seeds, "paths.seeds", problems);
    fail_if(std::move(problems));
    auto seeds = load_seed_questions(cmd.config.seeds);
    const bool with_search = any_search(seeds);
    if (with_search)
    {
        cmd.need_input(cmd.config.corpus, "paths.corpus (needed by search_qa seeds)", problems);
        fail_if(std::move(problems));
    }

    std::vector<fs::path> inputs {cmd.config.seeds};
    if (with_search)
        inputs.push_back(cmd.config.corpus);
    cmd.add_script(cmd.config.generator, inputs);
    const auto target = cmd.artifact(kTrajectories);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, inputs, {target});
        cmd.out << seeds.size() << " seeds x " << cmd.config.limits.samples_per_seed << " samples = "
                << seeds.size() * static_cast<std::size_t>(cmd.config.limits.samples_per_seed) << " trajectories\n";
        return kExitOk;
    }
    const auto key = cmd.input_key(inputs);
    if (cmd.up_to_date(target, key))
        return kExitOk;

    auto tools = make_tools(cmd, with_search);
    auto model = make_chat_model(cmd.config.generator);
    auto sampling = cmd.config.sampling;
    sampling.seed = cmd.config.rng_seed;
    BatchOptions options;
    options.workers = cmd.config.workers;
    options.max_abort_rate = cmd.config.max_abort_rate;
    cmd.log("info", "start", {{"seeds", seeds.size()}, {"samples", cmd.config.limits.samples_per_seed}});
    auto result = run_batch(std::move(seeds), cmd.config.limits, *model, tools.box, sampling, options);
    for (const auto& f: result.report.failures)
        cmd.log("warn", "trajectory_failed", {{"reason", f}});

    auto manifest = cmd.base_manifest(key);
    manifest.kind = "trajectories";
    manifest.source_run_ids = {key};
    write_trajectories(target, result.trajectories, manifest);
    const auto& r = result.report;
    cmd.log("info", "wrote",
            {{"artifact", kTrajectories},
             {"answered", r.answered},
             {"exhausted", r.exhausted},
             {"aborted", r.aborted},
             {"model_calls", r.model_calls}});
    cmd.out << "generated " << r.total() << " trajectories: " << r.answered << " answered, " << r.exhausted
            << " exhausted, " << r.aborted << " aborted (" << r.model_calls << " model calls)\n";
    return kExitOk;
}

int cmd_decompose(Command& cmd)
{
    const auto source = cmd.artifact(kTrajectories);
    std::vector<std::string> problems;
    cmd.need_input(source, "trajectories", problems);
    fail_if(std::move(problems));
    const auto target = cmd.artifact(kSubtrajectories);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, {source}, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key({source});
    if (cmd.up_to_date(target, key))
        return kExitOk;

    DatasetManifest source_manifest;
    const auto ts = read_trajectories(source, &source_manifest);
    std::vector<SubTrajectory> subs;
    for (const auto& t: ts)
        for (auto& s: decompose(t))
            subs.push_back(std::move(s));
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "subtrajectories";
    manifest.source_run_ids = {source_manifest.dataset_id};
    write_subtrajectories(target, subs, manifest);
    cmd.log("info", "wrote", {{"artifact", kSubtrajectories}, {"subtrajectories", subs.size()}});
    cmd.out << "decomposed " << ts.size() << " trajectories into " << subs.size() << " sub-trajectories\n";
    return kExitOk;
}

int cmd_judge(Command& cmd)
{
    const auto source = cmd.artifact(kTrajectories);
    std::vector<std::string> problems;
    need_endpoint(cmd.config.judge, "judge", problems);
    cmd.need_input(source, "trajectories", problems);
    fail_if(std::move(problems));
    std::vector<fs::path> inputs {source};
    cmd.add_script(cmd.config.judge, inputs);
    if (cmd.config.math_judge)
        cmd.add_script(*cmd.config.math_judge, inputs);
    const auto target = cmd.artifact(kJudgments);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, inputs, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key(inputs);
    if (cmd.up_to_date(target, key))
        return kExitOk;

    DatasetManifest source_manifest;
    const auto ts = read_trajectories(source, &source_manifest);
    cmd.judge = make_chat_model(cmd.config.judge);
    if (cmd.config.math_judge)
        cmd.math_judge = make_chat_model(*cmd.config.math_judge);

    struct Job
    {
        std::size_t trajectory;
        std::optional<SubTrajectory> step; // empty for the outcome job
        Judgment result;
    };
    std::vector<Job> jobs;
    int skipped_outcomes = 0;
    for (std::size_t i = 0; i < ts.size(); ++i)
    {
        for (auto& s: decompose(ts[i]))
            jobs.push_back({i, std::move(s), {}});
        if (ts[i].seed.golden_answer)
            jobs.push_back({i, std::nullopt, {}});
        else
            ++skipped_outcomes;
    }
    if (skipped_outcomes > 0)
        cmd.log("warn", "no_golden_answer", {{"trajectories", skipped_outcomes}});

    parallel_for(jobs.size(), cmd.config.workers, [&](std::size_t i) {
        auto& job = jobs[i];
        const auto& t = ts[job.trajectory];
        auto& judge = cmd.judge_for(t.seed.task_kind);
        job.result = job.step ? judge_step(t.seed, *job.step, judge) : judge_trajectory_outcome(t, judge);
    });

    JudgmentSet set;
    for (auto& job: jobs)
    {
        const auto& id = ts[job.trajectory].id;
        if (job.step)
            set.steps[id].emplace(job.step->step_index, std::move(job.result));
        else
            set.outcomes.emplace(id, std::move(job.result));
    }
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "judgments";
    manifest.source_run_ids = {source_manifest.dataset_id};
    manifest.trajectory_count = static_cast<std::int64_t>(ts.size());
    manifest.judge_model_id = cmd.judge->model_id();
    manifest.unparsed_judgments = set.unparsed();
    write_jsonl(target, judgment_lines(set), manifest);
    if (set.unparsed() > 0)
        cmd.log("warn", "unparsed_judgments", {{"count", set.unparsed()}});
    cmd.log("info", "wrote", {{"artifact", kJudgments}, {"judgments", jobs.size()}});
    cmd.out << "judged " << ts.size() << " trajectories: " << jobs.size() - set.outcomes.size()
            << " step verdicts, " << set.outcomes.size() << " outcome verdicts, " << set.unparsed()
            << " unparsed\n";
    return kExitOk;
}

int cmd_filter(Command& cmd)
{
    const auto trajectories = cmd.artifact(kTrajectories);
    const auto judgments = cmd.artifact(kJudgments);
    std::vector<std::string> problems;
    cmd.need_input(trajectories, "trajectories", problems);
    if (cmd.config.strategy != FilterStrategy::none)
        cmd.need_input(judgments, "judgments", problems);
    fail_if(std::move(problems));
    std::vector<fs::path> inputs {trajectories};
    if (cmd.config.strategy != FilterStrategy::none)
        inputs.push_back(judgments);
    const auto target = cmd.artifact(kFiltered);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, inputs, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key(inputs);
    if (cmd.up_to_date(target, key))
        return kExitOk;

    DatasetManifest source_manifest;
    const auto ts = read_trajectories(trajectories, &source_manifest);
    JudgmentSet set;
    std::string judge_id;
    std::vector<std::string> sources {source_manifest.dataset_id};
    if (cmd.config.strategy != FilterStrategy::none)
    {
        const auto ds = read_jsonl(judgments);
        set = judgments_from_lines(ds.lines);
        judge_id = ds.manifest.judge_model_id;
        sources.push_back(ds.manifest.dataset_id);
    }
    const auto kept = apply_filter(ts, set, cmd.config.strategy);
    const std::set<std::string> keep(kept.begin(), kept.end());

    std::vector<SubTrajectory> subs;
    for (const auto& t: ts)
        if (keep.contains(t.id))
            for (auto& s: decompose(t))
                subs.push_back(std::move(s));
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "subtrajectories";
    manifest.strategy = cmd.config.strategy;
    manifest.source_run_ids = sources;
    manifest.judge_model_id = judge_id;
    manifest.unparsed_judgments = set.unparsed();
    write_subtrajectories(target, subs, manifest);
    cmd.log("info", "wrote",
            {{"artifact", kFiltered}, {"strategy", to_string(cmd.config.strategy)}, {"kept", kept.size()},
             {"total", ts.size()}});
    cmd.out << "strategy " << to_string(cmd.config.strategy) << ": kept=" << kept.size() << " of " << ts.size()
            << " trajectories (" << subs.size() << " sub-trajectories)\n";
    return kExitOk;
}

int cmd_annotate(Command& cmd)
{
    const auto source = cmd.artifact(kFiltered);
    const auto trajectories = cmd.artifact(kTrajectories);
    std::vector<std::string> problems;
    need_endpoint(cmd.config.reward, "reward", problems);
    cmd.need_input(source, "filtered sub-trajectories", problems);
    cmd.need_input(trajectories, "trajectories", problems);
    fail_if(std::move(problems));
    std::vector<fs::path> inputs {source, trajectories};
    cmd.add_script(cmd.config.reward, inputs);
    const auto target = cmd.artifact(kAnnotated);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, inputs, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key(inputs);
    if (cmd.up_to_date(target, key))
        return kExitOk;

    DatasetManifest source_manifest;
    auto subs = read_subtrajectories(source, &source_manifest);
    const auto seeds = seeds_by_trajectory(read_trajectories(trajectories));
    auto reward = make_chat_model(cmd.config.reward);
    annotate_rewards(subs, seeds, *reward, cmd.config.workers);

    int positive = 0;
    for (const auto& s: subs)
        positive += s.step_reward && *s.step_reward == 1.0 ? 1 : 0;
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "subtrajectories";
    manifest.strategy = source_manifest.strategy;
    manifest.source_run_ids = {source_manifest.dataset_id};
    manifest.judge_model_id = reward->model_id();
    write_subtrajectories(target, subs, manifest);
    cmd.log("info", "wrote", {{"artifact", kAnnotated}, {"subtrajectories", subs.size()}, {"positive", positive}});
    cmd.out << "annotated " << subs.size() << " sub-trajectories: " << positive << " rewarded 1.0, "
            << subs.size() - static_cast<std::size_t>(positive) << " rewarded 0.0\n";
    return kExitOk;
}

int cmd_export(Command& cmd)
{
    if (!cmd.flags.format.empty())
        cmd.config.export_format = parse_export_format(cmd.flags.format);
    const auto source = cmd.artifact(kAnnotated);
    std::vector<std::string> problems;
    cmd.need_input(source, "annotated sub-trajectories", problems);
    fail_if(std::move(problems));
    const auto target = cmd.artifact(export_name(cmd.config.export_format));
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, {source}, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key({source});
    if (cmd.up_to_date(target, key))
        return kExitOk;

    DatasetManifest source_manifest;
    const auto subs = read_subtrajectories(source, &source_manifest);
    const auto lines = export_training_records(subs, cmd.config.export_format);
    auto manifest = cmd.base_manifest(key);
    manifest.kind = cmd.config.export_format == ExportFormat::rl ? "training_rl" : "training_sft";
    manifest.strategy = source_manifest.strategy;
    manifest.judge_model_id = source_manifest.judge_model_id;
    manifest.source_run_ids = {source_manifest.dataset_id};
    write_jsonl(target, lines, manifest);
    cmd.log("info", "wrote", {{"artifact", target.filename().string()}, {"records", lines.size()}});
    cmd.out << "exported " << lines.size() << " records to " << target.string() << '\n';
    return kExitOk;
}

int cmd_train_toy(Command& cmd)
{
    const auto target = cmd.artifact(kTrainReport);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, {}, {target});
        return kExitOk;
    }
    const auto key = cmd.input_key({});
    if (cmd.up_to_date(target, key))
        return kExitOk;

    cmd.log("info", "start", {{"env_seed", cmd.config.env_seed}, {"steps", cmd.config.train_steps}});
    const auto report = toy::train(cmd.config.env_seed, cmd.config.train_steps, cmd.config.trainer);
    auto manifest = cmd.base_manifest(key);
    manifest.kind = "train_report";
    manifest.rng_seeds = {static_cast<std::int64_t>(cmd.config.env_seed),
                          static_cast<std::int64_t>(cmd.config.trainer.rng_seed)};
    write_jsonl(target, {dump_line(report.to_json())}, manifest);
    const auto& sw = report.stepwise;
    const auto& oo = report.outcome_only;
    cmd.log("info", "wrote", {{"artifact", kTrainReport}});
    cmd.out << std::fixed << std::setprecision(4) << "trained " << report.steps << " steps on "
            << report.dataset_states << " offline states\n"
            << "step-wise reward: J " << sw.j_curve.front() << " -> " << sw.j_curve.back()
            << ", mean step reward " << sw.mean_step_reward_curve.front() << " -> "
            << sw.mean_step_reward_curve.back() << ", final answer rate " << sw.final_answer_rate << '\n'
            << "outcome-only:     J " << oo.j_curve.front() << " -> " << oo.j_curve.back()
            << ", mean step reward " << oo.mean_step_reward_curve.front() << " -> "
            << oo.mean_step_reward_curve.back() << ", final answer rate " << oo.final_answer_rate << '\n';
    return kExitOk;
}

int cmd_eval(Command& cmd)
{
    std::vector<std::string> problems;
    need_endpoint(cmd.config.generator, "generator", problems);
    need_endpoint(cmd.config.judge, "judge", problems);
    cmd.need_input(cmd.config.seeds, "paths.seeds", problems);
    if (!cmd.flags.ids.empty())
        cmd.need_input(cmd.flags.ids, "--ids", problems);
    fail_if(std::move(problems));
    auto questions = load_seed_questions(cmd.config.seeds);
    const bool with_search = any_search(questions);
    if (with_search)
    {
        cmd.need_input(cmd.config.corpus, "paths.corpus (needed by search_qa questions)", problems);
        fail_if(std::move(problems));
    }
    std::vector<fs::path> inputs {cmd.config.seeds};
    if (with_search)
        inputs.push_back(cmd.config.corpus);
    if (!cmd.flags.ids.empty())
        inputs.push_back(cmd.flags.ids);
    cmd.add_script(cmd.config.generator, inputs);
    cmd.add_script(cmd.config.judge, inputs);
    const auto target = cmd.artifact(kEvalReport);
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, inputs, {target, cmd.artifact(kEvalCsv)});
        return kExitOk;
    }
    const auto key = cmd.input_key(inputs);
    if (cmd.up_to_date(target, key))
        return kExitOk;

    auto tools = make_tools(cmd, with_search);
    auto model = make_chat_model(cmd.config.generator);
    auto judge = make_chat_model(cmd.config.judge);
    std::unique_ptr<ChatModel> math_judge;
    if (cmd.config.math_judge)
        math_judge = make_chat_model(*cmd.config.math_judge);

    EvalOptions options;
    options.workers = cmd.config.workers;
    if (!cmd.flags.ids.empty())
        options.id_subset = read_id_subset(cmd.flags.ids);
    options.dataset_id = "seeds-" + to_hex64(xxh64(read_file(cmd.config.seeds)));
    options.math_judge = math_judge.get();
    auto report = run_eval(std::move(questions), *model, tools.box, cmd.config.limits, *judge, options);
    for (const auto& r: report.records)
        if (!r.error.empty())
            cmd.log("warn", "question_failed", {{"question_id", r.question_id}, {"reason", r.error}});

    auto manifest = cmd.base_manifest(key);
    manifest.kind = "eval_report";
    manifest.judge_model_id = judge->model_id();
    manifest.trajectory_count = report.n;
    atomic_write(cmd.artifact(kEvalCsv), report.to_csv());
    write_jsonl(target, {dump_line(report.to_json())}, manifest);
    cmd.log("info", "wrote", {{"artifact", kEvalReport}, {"n", report.n}});
    cmd.out << std::fixed << std::setprecision(3) << "evaluated " << report.n << " questions with "
            << report.model_id << " (judge " << report.judge_id << ")\n";
    if (report.n > 0)
        cmd.out << "accuracy  " << report.accuracy.p << " +/- " << report.accuracy.margin << '\n'
                << "f1        " << report.f1.p << '\n'
                << "precision " << report.precision.p << '\n'
                << "recall    " << report.recall.p << '\n';
    return kExitOk;
}

int cmd_report(Command& cmd)
{
    if (!fs::exists(cmd.config.out_dir))
        fail_if({"out dir '" + cmd.config.out_dir.string() + "' does not exist"});
    if (cmd.flags.dry_run)
    {
        print_plan(cmd, {cmd.config.out_dir}, {});
        return kExitOk;
    }
    std::vector<fs::path> manifests;
    for (const auto& entry: fs::directory_iterator(cmd.config.out_dir))
    {
        const auto name = entry.path().filename().string();
        if (name.size() > 14 && name.ends_with(".manifest.json"))
            manifests.push_back(entry.path());
    }
    std::sort(manifests.begin(), manifests.end());
    cmd.out << std::left << std::setw(26) << "artifact" << std::setw(18) << "kind" << std::setw(8) << "lines"
            << std::setw(22) << "strategy" << "status\n";
    int bad = 0;
    for (const auto& m: manifests)
    {
        auto data = m.string();
        data.resize(data.size() - std::string_view(".manifest.json").size());
        std::string status = "ok";
        std::size_t lines = 0;
        DatasetManifest manifest;
        try
        {
            const auto ds = read_jsonl(data);
            manifest = ds.manifest;
            lines = ds.lines.size();
        }
        catch (const std::exception& e)
        {
            status = e.what();
            ++bad;
        }
        cmd.out << std::setw(26) << fs::path(data).filename().string() << std::setw(18) << manifest.kind
                << std::setw(8) << lines << std::setw(22) << to_string(manifest.strategy) << status << '\n';
    }
    const auto eval = cmd.artifact(kEvalReport);
    if (fs::exists(eval))
    {
        const auto j = ojson::parse(read_file(eval));
        cmd.out << std::right << std::fixed << std::setprecision(3) << "eval: n=" << j.at("n").get<std::int64_t>()
                << " accuracy=" << j.at("accuracy").at("p").get<double>() << " +/- "
                << j.at("accuracy").at("margin").get<double>() << " f1=" << j.at("f1").at("p").get<double>()
                << '\n';
    }
    const auto train = cmd.artifact(kTrainReport);
    if (fs::exists(train))
    {
        const auto j = ojson::parse(read_file(train));
        const auto& sw = j.at("j_curve");
        cmd.out << std::right << std::fixed << std::setprecision(4) << "train-toy: steps=" << j.at("steps").get<int>()
                << " J " << sw.front().get<double>() << " -> " << sw.back().get<double>()
                << " final_answer_rate=" << j.at("final_answer_rate").get<double>() << '\n';
    }
    cmd.log("info", "report", {{"artifacts", manifests.size()}, {"invalid", bad}});
    return bad == 0 ? kExitOk : kExitRuntime;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app {"Multi-step tool-use trajectory synthesis, filtering and step-wise reward tooling", "swirl"};
    app.require_subcommand(1);
    Flags flags;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "Run config (JSON)");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--workers", flags.workers, "Parallel workers")->check(CLI::PositiveNumber);
        sub->add_flag("--dry-run", flags.dry_run, "Validate and print the plan; no network or disk writes");
        sub->add_option("--seed", flags.seed, "RNG seed");
    };
    const auto rollout = [&](CLI::App* sub) {
        sub->add_option("--seeds", flags.seeds, "Seed questions (JSONL)");
        sub->add_option("--max-steps", flags.max_steps, "Step budget per trajectory")->check(CLI::PositiveNumber);
        sub->add_option("--temperature", flags.temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
    };

    std::map<std::string, int (*)(Command&)> handlers;
    const auto add = [&](const char* name, const char* help, int (*fn)(Command&)) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        handlers[name] = fn;
        return sub;
    };

    add("ingest-corpus", "Embed the corpus and cache its index", cmd_ingest);
    auto* generate = add("generate", "Sample multi-step trajectories", cmd_generate);
    rollout(generate);
    generate->add_option("--samples", flags.samples, "Trajectories per seed")->check(CLI::PositiveNumber);
    add("decompose", "Split trajectories into sub-trajectories", cmd_decompose);
    add("judge", "Process and outcome judgments", cmd_judge);
    auto* filter = add("filter", "Keep trajectories passing a strategy", cmd_filter);
    filter->add_option("--strategy", flags.strategy, "none|process|outcome|process_and_outcome")
        ->check(CLI::IsMember({"none", "process", "outcome", "process_and_outcome"}));
    add("annotate", "Step-wise reward annotation", cmd_annotate);
    auto* exporter = add("export", "Write training records", cmd_export);
    exporter->add_option("--format", flags.format, "rl|sft")->check(CLI::IsMember({"rl", "sft"}));
    auto* train = add("train-toy", "Policy-gradient trainer on the toy environment", cmd_train_toy);
    train->add_option("--steps", flags.steps, "Gradient steps")->check(CLI::NonNegativeNumber);
    auto* eval = add("eval", "Multi-step evaluation with judge grading", cmd_eval);
    rollout(eval);
    eval->add_option("--ids", flags.ids, "Evaluate only these question ids (one per line)");
    add("report", "Summarize artifacts in the out dir", cmd_report);

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << e.what() << '\n';
        return kExitValidation;
    }

    const auto* sub = app.get_subcommands().front();
    Command cmd(sub->get_name(), flags, out, err);
    try
    {
        if (flags.config.empty())
            cmd.config.embedder.kind = "hash";
        else
            cmd.config = load_config(flags.config);
        apply_overrides(cmd.config, flags);
        if (!flags.strategy.empty())
            cmd.config.strategy = parse_filter_strategy(flags.strategy);
        fail_if(cmd.config.problems());
        if (cmd.config.out_dir.is_relative())
            cmd.config.out_dir = fs::absolute(cmd.config.out_dir);
        return handlers.at(cmd.name)(cmd);
    }
    catch (const ConfigError& e)
    {
        for (const auto& p: e.problems())
            cmd.log("error", "invalid_config", {{"problem", p}});
        out << e.what() << '\n';
        return kExitValidation;
    }
    catch (const InvalidInput& e)
    {
        cmd.log("error", "invalid_input", {{"message", e.what()}});
        out << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const std::exception& e)
    {
        cmd.log("error", "failed", {{"message", e.what()}});
        out << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace swirl
