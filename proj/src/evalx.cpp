// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/evalx.hpp>
#include <swirl/parallel.hpp>
#include <swirl/pipeline.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace swirl
{

std::string normalize_answer(std::string_view text)
{
    std::string cleaned;
    cleaned.reserve(text.size());
    for (const char ch: text)
    {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::ispunct(c))
            continue;
        cleaned.push_back(static_cast<char>(std::tolower(c)));
    }

    std::istringstream words(cleaned);
    std::string word;
    std::string out;
    while (words >> word)
    {
        if (word == "a" || word == "an" || word == "the")
            continue;
        if (!out.empty())
            out.push_back(' ');
        out += word;
    }
    return out;
}

namespace
{

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

} // namespace

TokenMetrics token_f1(std::string_view predicted, std::string_view golden)
{
    const auto pred = split_ws(normalize_answer(predicted));
    const auto gold = split_ws(normalize_answer(golden));
    if (pred.empty() && gold.empty())
        return {1.0, 1.0, 1.0};
    if (pred.empty() || gold.empty())
        return {0.0, 0.0, 0.0};

    std::map<std::string, int> gold_counts;
    for (const auto& w: gold)
        ++gold_counts[w];
    int common = 0;
    for (const auto& w: pred)
    {
        auto it = gold_counts.find(w);
        if (it != gold_counts.end() && it->second > 0)
        {
            --it->second;
            ++common;
        }
    }
    if (common == 0)
        return {0.0, 0.0, 0.0};
    const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    return {2.0 * precision * recall / (precision + recall), precision, recall};
}

double margin_of_error(double p, std::int64_t n)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw InvalidInput("proportion must lie in [0, 1]");
    if (n < 1)
        throw InvalidInput("sample size must be >= 1");
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double macro_average(const std::vector<std::vector<double>>& per_trajectory)
{
    if (per_trajectory.empty())
        throw EmptyInput("macro average over no trajectories");
    double across = 0.0;
    for (const auto& labels: per_trajectory)
    {
        if (labels.empty())
            throw EmptyInput("trajectory without step labels");
        double within = 0.0;
        for (const double x: labels)
            within += x;
        across += within / static_cast<double>(labels.size());
    }
    return across / static_cast<double>(per_trajectory.size());
}

double mean_process_label(const std::vector<Trajectory>& trajectories, ChatModel& judge, int workers,
                          const SamplingParams& params)
{
    if (trajectories.empty())
        throw EmptyInput("mean process label over no trajectories");

    struct Job
    {
        std::size_t trajectory;
        SubTrajectory sub;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<double>> labels(trajectories.size());
    for (std::size_t t = 0; t < trajectories.size(); ++t)
    {
        for (auto& sub: decompose(trajectories[t]))
            jobs.push_back({t, std::move(sub)});
        labels[t].resize(static_cast<std::size_t>(trajectories[t].num_actions()));
    }

    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto judgment = judge_step(trajectories[job.trajectory].seed, job.sub, judge, params);
        labels[job.trajectory][static_cast<std::size_t>(job.sub.step_index - 1)] = reward_from(judgment.verdict);
    });
    return macro_average(labels);
}

namespace
{

ojson metric_json(const MetricEstimate& m)
{
    ojson o;
    o["p"] = m.p;
    o["margin"] = m.margin;
    return o;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (const char c: s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

ojson EvalReport::to_json() const
{
    ojson o;
    o["dataset_id"] = dataset_id;
    o["model_id"] = model_id;
    o["judge_id"] = judge_id;
    o["n"] = n;
    o["accuracy"] = metric_json(accuracy);
    o["f1"] = metric_json(f1);
    o["precision"] = metric_json(precision);
    o["recall"] = metric_json(recall);
    if (mean_process_label)
        o["mean_process_label"] = *mean_process_label;
    auto arr = ojson::array();
    for (const auto& r: records)
    {
        ojson rec;
        rec["question_id"] = r.question_id;
        rec["trajectory_id"] = r.trajectory_id;
        rec["predicted"] = r.predicted;
        rec["golden"] = r.golden;
        rec["status"] = std::string(swirl::to_string(r.status));
        rec["num_steps"] = r.num_steps;
        if (r.verdict)
            rec["verdict"] = swirl::to_json(*r.verdict);
        rec["f1"] = r.metrics.f1;
        rec["precision"] = r.metrics.precision;
        rec["recall"] = r.metrics.recall;
        if (!r.error.empty())
            rec["error"] = r.error;
        arr.push_back(std::move(rec));
    }
    o["records"] = std::move(arr);
    return o;
}

std::string EvalReport::to_csv() const
{
    std::ostringstream out;
    out << "question_id,trajectory_id,status,num_steps,correct,f1,precision,recall,predicted,golden\n";
    for (const auto& r: records)
    {
        out << csv_field(r.question_id) << ',' << csv_field(r.trajectory_id) << ',' << swirl::to_string(r.status) << ','
            << r.num_steps << ',' << (r.correct() ? 1 : 0) << ',' << r.metrics.f1 << ',' << r.metrics.precision << ','
            << r.metrics.recall << ',' << csv_field(r.predicted) << ',' << csv_field(r.golden) << '\n';
    }
    return out.str();
}

EvalReport run_eval(std::vector<SeedQuestion> questions, ChatModel& model, const Toolbox& tools,
                    const RolloutLimits& limits, ChatModel& judge, const EvalOptions& options)
{
    if (options.id_subset)
        std::erase_if(questions, [&](const SeedQuestion& q) { return !options.id_subset->contains(q.id); });
    validate_seed_set(questions);
    for (const auto& q: questions)
        if (!q.golden_answer)
            throw MissingGoldenAnswer("question '" + q.id + "' has no golden answer");
    std::sort(questions.begin(), questions.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    EvalReport report;
    report.dataset_id = options.dataset_id;
    report.model_id = model.model_id();
    report.judge_id = judge.model_id();
    report.records.resize(questions.size());
    std::vector<std::optional<Trajectory>> trajectories(questions.size());

    parallel_for(questions.size(), options.workers, [&](std::size_t i) {
        const auto& q = questions[i];
        auto& rec = report.records[i];
        rec.question_id = q.id;
        rec.golden = *q.golden_answer;
        rec.trajectory_id = make_trajectory_id(q.id, 0);
        try
        {
            auto t = run_trajectory(q, model, tools, limits, options.sampling, rec.trajectory_id);
            rec.status = t.status;
            rec.num_steps = t.num_actions();
            rec.predicted = t.final_answer().value_or("");
            auto& grader = q.task_kind == TaskKind::math && options.math_judge ? *options.math_judge : judge;
            rec.verdict = judge_trajectory_outcome(t, grader);
            trajectories[i] = std::move(t);
        }
        catch (const ModelError& e)
        {
            rec.error = e.what();
            rec.verdict = Judgment::make(judge.model_id(), Verdict::negative, "", false);
        }
        rec.metrics = token_f1(rec.predicted, rec.golden);
    });

    const auto n = static_cast<std::int64_t>(report.records.size());
    report.n = n;
    if (n > 0)
    {
        double acc = 0.0, f1 = 0.0, precision = 0.0, recall = 0.0;
        for (const auto& r: report.records)
        {
            acc += r.correct() ? 1.0 : 0.0;
            f1 += r.metrics.f1;
            precision += r.metrics.precision;
            recall += r.metrics.recall;
        }
        const auto dn = static_cast<double>(n);
        report.accuracy = MetricEstimate::of(acc / dn, n);
        report.f1 = MetricEstimate::of(f1 / dn, n);
        report.precision = MetricEstimate::of(precision / dn, n);
        report.recall = MetricEstimate::of(recall / dn, n);
    }

    if (options.process_judge)
    {
        std::vector<Trajectory> judged;
        for (auto& t: trajectories)
            if (t)
                judged.push_back(std::move(*t));
        if (!judged.empty())
            report.mean_process_label = mean_process_label(judged, *options.process_judge, options.workers);
    }
    return report;
}

std::set<std::string> read_id_subset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open id file '" + path.string() + "'");
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line))
    {
        const auto id = trim(line);
        if (id.empty() || id.front() == '#')
            continue;
        ids.insert(id);
    }
    return ids;
}

} // namespace swirl
