// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/hash.hpp>
#include <swirl/pipeline.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace swirl
{

namespace fs = std::filesystem;

ojson DatasetManifest::to_json() const
{
    ojson o;
    o["schema_version"] = schema_version;
    o["dataset_id"] = dataset_id;
    o["kind"] = kind;
    o["source_run_ids"] = source_run_ids;
    o["strategy"] = std::string(swirl::to_string(strategy));
    o["trajectory_count"] = trajectory_count;
    o["subtrajectory_count"] = subtrajectory_count;
    o["judge_model_id"] = judge_model_id;
    o["content_hash"] = content_hash;
    o["rng_seeds"] = rng_seeds;
    o["unparsed_judgments"] = unparsed_judgments;
    o["input_key"] = input_key;
    o["effective_config"] = effective_config;
    return o;
}

DatasetManifest DatasetManifest::from_json(const ojson& j)
{
    try
    {
        DatasetManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kSchemaVersion)
            throw SchemaVersionUnsupported("dataset schema version " + std::to_string(m.schema_version)
                                           + " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
        m.dataset_id = j.at("dataset_id").get<std::string>();
        m.kind = j.at("kind").get<std::string>();
        m.source_run_ids = j.at("source_run_ids").get<std::vector<std::string>>();
        m.strategy = parse_filter_strategy(j.at("strategy").get<std::string>());
        m.trajectory_count = j.at("trajectory_count").get<std::int64_t>();
        m.subtrajectory_count = j.at("subtrajectory_count").get<std::int64_t>();
        m.judge_model_id = j.at("judge_model_id").get<std::string>();
        m.content_hash = j.at("content_hash").get<std::string>();
        m.rng_seeds = j.at("rng_seeds").get<std::vector<std::int64_t>>();
        m.unparsed_judgments = j.value("unparsed_judgments", std::int64_t {0});
        m.input_key = j.value("input_key", std::string {});
        m.effective_config = j.value("effective_config", ojson::object());
        return m;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidInput(std::string("manifest: ") + e.what());
    }
}

fs::path manifest_path(const fs::path& dataset)
{
    auto p = dataset;
    p += ".manifest.json";
    return p;
}

namespace
{

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& line: lines)
    {
        out += line;
        out += '\n';
    }
    return out;
}

} // namespace

void atomic_write(const fs::path& path, const std::string& bytes)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string content_hash_of(const std::vector<std::string>& lines)
{
    return to_hex64(xxh64(join_lines(lines)));
}

DatasetManifest write_jsonl(const fs::path& path, const std::vector<std::string>& lines, DatasetManifest manifest)
{
    for (const auto& line: lines)
        if (line.find('\n') != std::string::npos)
            throw InvalidInput("JSONL record contains a newline");
    const auto bytes = join_lines(lines);
    manifest.schema_version = kSchemaVersion;
    manifest.content_hash = to_hex64(xxh64(bytes));
    manifest.dataset_id = (manifest.kind.empty() ? std::string("dataset") : manifest.kind) + "-" + manifest.content_hash;
    atomic_write(path, bytes);
    atomic_write(manifest_path(path), manifest.to_json().dump(2) + "\n");
    return manifest;
}

JsonlDataset read_jsonl(const fs::path& path)
{
    JsonlDataset ds;
    const auto mpath = manifest_path(path);
    try
    {
        ds.manifest = DatasetManifest::from_json(ojson::parse(read_file(mpath)));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidInput("manifest '" + mpath.string() + "': " + e.what());
    }

    const auto bytes = read_file(path);
    const auto actual = to_hex64(xxh64(bytes));
    if (actual != ds.manifest.content_hash)
        throw HashMismatch("'" + path.string() + "' hashes to " + actual + ", manifest says " + ds.manifest.content_hash);

    std::size_t start = 0;
    while (start < bytes.size())
    {
        auto end = bytes.find('\n', start);
        if (end == std::string::npos)
            end = bytes.size();
        ds.lines.emplace_back(bytes.substr(start, end - start));
        start = end + 1;
    }
    return ds;
}

DatasetManifest write_trajectories(const fs::path& path, const std::vector<Trajectory>& ts, DatasetManifest manifest)
{
    std::vector<std::string> lines;
    lines.reserve(ts.size());
    std::int64_t subs = 0;
    for (const auto& t: ts)
    {
        lines.push_back(dump_line(to_json(t)));
        subs += t.num_actions();
    }
    if (manifest.kind.empty())
        manifest.kind = "trajectories";
    manifest.trajectory_count = static_cast<std::int64_t>(ts.size());
    manifest.subtrajectory_count = subs;
    return write_jsonl(path, lines, std::move(manifest));
}

std::vector<Trajectory> read_trajectories(const fs::path& path, DatasetManifest* manifest)
{
    auto ds = read_jsonl(path);
    std::vector<Trajectory> out;
    out.reserve(ds.lines.size());
    for (const auto& line: ds.lines)
    {
        try
        {
            out.push_back(trajectory_from_json(ojson::parse(line)));
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput("'" + path.string() + "': " + e.what());
        }
    }
    if (manifest)
        *manifest = std::move(ds.manifest);
    return out;
}

DatasetManifest write_subtrajectories(const fs::path& path, const std::vector<SubTrajectory>& subs,
                                      DatasetManifest manifest)
{
    std::vector<std::string> lines;
    lines.reserve(subs.size());
    std::set<std::string> ids;
    std::int64_t unparsed = 0;
    for (const auto& sub: subs)
    {
        lines.push_back(dump_line(to_json(sub)));
        ids.insert(sub.trajectory_id);
        for (const auto& j: sub.judgments)
            unparsed += j.parse_ok ? 0 : 1;
    }
    if (manifest.kind.empty())
        manifest.kind = "subtrajectories";
    manifest.trajectory_count = static_cast<std::int64_t>(ids.size());
    manifest.subtrajectory_count = static_cast<std::int64_t>(subs.size());
    manifest.unparsed_judgments = unparsed;
    return write_jsonl(path, lines, std::move(manifest));
}

std::vector<SubTrajectory> read_subtrajectories(const fs::path& path, DatasetManifest* manifest)
{
    auto ds = read_jsonl(path);
    std::vector<SubTrajectory> out;
    out.reserve(ds.lines.size());
    for (const auto& line: ds.lines)
    {
        try
        {
            out.push_back(subtrajectory_from_json(ojson::parse(line)));
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput("'" + path.string() + "': " + e.what());
        }
    }
    if (manifest)
        *manifest = std::move(ds.manifest);
    return out;
}

std::vector<std::string> judgment_lines(const JudgmentSet& set)
{
    std::set<std::string> ids;
    for (const auto& [id, _]: set.steps)
        ids.insert(id);
    for (const auto& [id, _]: set.outcomes)
        ids.insert(id);

    std::vector<std::string> lines;
    for (const auto& id: ids)
    {
        if (auto it = set.steps.find(id); it != set.steps.end())
        {
            for (const auto& [index, judgment]: it->second)
            {
                ojson o;
                o["trajectory_id"] = id;
                o["kind"] = "step";
                o["step_index"] = index;
                o["judgment"] = to_json(judgment);
                lines.push_back(dump_line(o));
            }
        }
        if (auto it = set.outcomes.find(id); it != set.outcomes.end())
        {
            ojson o;
            o["trajectory_id"] = id;
            o["kind"] = "outcome";
            o["judgment"] = to_json(it->second);
            lines.push_back(dump_line(o));
        }
    }
    return lines;
}

JudgmentSet judgments_from_lines(const std::vector<std::string>& lines)
{
    JudgmentSet set;
    for (const auto& line: lines)
    {
        try
        {
            const auto j = ojson::parse(line);
            const auto id = j.at("trajectory_id").get<std::string>();
            const auto kind = j.at("kind").get<std::string>();
            auto judgment = judgment_from_json(j.at("judgment"));
            if (kind == "step")
                set.steps[id].insert_or_assign(j.at("step_index").get<int>(), std::move(judgment));
            else if (kind == "outcome")
                set.outcomes.insert_or_assign(id, std::move(judgment));
            else
                throw InvalidInput("unknown judgment kind '" + kind + "'");
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput(std::string("judgment record: ") + e.what());
        }
    }
    return set;
}

} // namespace swirl
