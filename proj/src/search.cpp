// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/hash.hpp>
#include <swirl/search.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace swirl
{

std::vector<std::string> tokenize_words(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch: text)
    {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80)
            current.push_back(static_cast<char>(std::tolower(c)));
        else if (!current.empty())
            tokens.push_back(std::exchange(current, {}));
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

void normalize(Embedding& v)
{
    double norm = 0.0;
    for (const double x: v)
        norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw InvalidInput("cannot normalize a zero or non-finite vector");
    for (double& x: v)
        x /= norm;
}

double dot(const Embedding& a, const Embedding& b)
{
    if (a.size() != b.size())
        throw DimensionMismatch("dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension): _dimension(dimension)
{
    if (dimension == 0)
        throw InvalidInput("embedding dimension must be positive");
}

Embedding HashingEmbedder::embed(std::string_view text)
{
    if (trim(text).empty())
        throw InvalidInput("cannot embed empty text");
    Embedding v(_dimension, 0.0);
    const auto tokens = tokenize_words(text);
    if (tokens.empty())
        throw InvalidInput("text has no alphanumeric tokens");
    for (const auto& token: tokens)
        v[xxh64(token) % _dimension] += 1.0;
    normalize(v);
    return v;
}

std::string render_document(const Document& doc, std::size_t budget)
{
    std::string text = doc.title.empty() ? doc.body : doc.title + "\n" + doc.body;
    if (text.size() <= budget)
        return text;
    std::size_t cut = budget;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80)
        --cut;
    text.resize(cut);
    return text;
}

VectorIndex::VectorIndex(std::size_t dimension): _dimension(dimension)
{
    if (dimension == 0)
        throw InvalidInput("index dimension must be positive");
}

void VectorIndex::add(Document doc)
{
    if (_frozen)
        throw InvalidInput("cannot add to a frozen index");
    if (doc.embedding.size() != _dimension)
        throw DimensionMismatch("document '" + doc.doc_id + "' has dimension " + std::to_string(doc.embedding.size())
                                + ", index has " + std::to_string(_dimension));
    double norm2 = 0.0;
    for (const double x: doc.embedding)
        norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
        throw InvalidInput("document '" + doc.doc_id + "' embedding is not unit norm");
    _docs.push_back(std::move(doc));
}

void VectorIndex::freeze()
{
    std::sort(_docs.begin(), _docs.end(), [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < _docs.size(); ++i)
        if (_docs[i].doc_id == _docs[i - 1].doc_id)
            throw InvalidInput("duplicate doc_id '" + _docs[i].doc_id + "'");
    _frozen = true;
}

std::vector<SearchHit> VectorIndex::search(const Embedding& query, std::size_t k, std::size_t snippet_chars) const
{
    if (!_frozen)
        throw InvalidInput("index must be frozen before searching");
    if (k == 0)
        throw InvalidInput("k must be >= 1");
    if (_docs.empty())
        throw EmptyIndex("search on an empty index");
    if (query.size() != _dimension)
        throw DimensionMismatch("query has dimension " + std::to_string(query.size()) + ", index has "
                                + std::to_string(_dimension));

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(_docs.size());
    for (std::size_t i = 0; i < _docs.size(); ++i)
        scored.emplace_back(std::clamp(dot(query, _docs[i].embedding), -1.0, 1.0), i);

    // _docs is sorted by id, so position order is doc_id order.
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    // Scores within kTieTolerance of a run's first score are equal cosines up to rounding.
    for (std::size_t i = 0; i < scored.size();)
    {
        std::size_t j = i + 1;
        while (j < scored.size() && scored[i].first - scored[j].first <= kTieTolerance)
            ++j;
        std::sort(scored.begin() + static_cast<std::ptrdiff_t>(i), scored.begin() + static_cast<std::ptrdiff_t>(j),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        i = j;
    }
    const auto n = std::min(k, scored.size());

    std::vector<SearchHit> hits;
    hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto& doc = _docs[scored[i].second];
        hits.push_back({doc.doc_id, scored[i].first, render_document(doc, snippet_chars)});
    }
    return hits;
}

std::vector<SearchHit> search(const VectorIndex& index, Embedder& embedder, std::string_view query, std::size_t k,
                              std::size_t snippet_chars)
{
    return index.search(embedder.embed(query), k, snippet_chars);
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open corpus '" + path.string() + "'");
    std::vector<CorpusEntry> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        try
        {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("doc_id").get<std::string>(), j.value("title", std::string {}),
                           j.value("body", std::string {})});
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (out.back().doc_id.empty())
            throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": empty doc_id");
    }
    return out;
}

namespace
{

constexpr char kMagic[8] = {'S', 'W', 'E', 'M', 'B', 'E', 'D', '1'};

template <typename T>
void put_le(std::string& out, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i)
    {
        out.push_back(static_cast<char>(static_cast<std::uint64_t>(value) & 0xFF));
        value = static_cast<T>(static_cast<std::uint64_t>(value) >> 8);
    }
}

template <typename T>
T get_le(const std::string& in, std::size_t offset)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    return static_cast<T>(v);
}

std::string read_all(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::filesystem::path EmbeddingCache::path_for(const std::filesystem::path& corpus, std::string_view key)
{
    auto p = corpus;
    p += "." + std::string(key) + ".emb";
    return p;
}

void EmbeddingCache::write(const std::filesystem::path& path, std::size_t dim, const std::vector<Embedding>& rows)
{
    std::string out(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    put_le<std::uint64_t>(out, rows.size());
    for (const auto& row: rows)
    {
        if (row.size() != dim)
            throw DimensionMismatch("cache row dimension mismatch");
        for (const double x: row)
        {
            std::uint32_t bits;
            const auto f = static_cast<float>(x);
            std::memcpy(&bits, &f, sizeof(bits));
            put_le<std::uint32_t>(out, bits);
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot write '" + tmp.string() + "'");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
    }
    std::filesystem::rename(tmp, path);
}

std::optional<std::vector<Embedding>> EmbeddingCache::read(const std::filesystem::path& path, std::size_t dim,
                                                           std::size_t count)
{
    if (!std::filesystem::exists(path))
        return std::nullopt;
    const auto data = read_all(path);
    constexpr std::size_t header = 8 + 4 + 4 + 8;
    if (data.size() < header || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw InvalidInput("'" + path.string() + "' is not an embedding cache");
    if (get_le<std::uint32_t>(data, 8) != kVersion)
        throw InvalidInput("unsupported embedding cache version");
    if (get_le<std::uint32_t>(data, 12) != dim || get_le<std::uint64_t>(data, 16) != count)
        throw InvalidInput("embedding cache shape does not match corpus");
    if (data.size() != header + count * dim * 4)
        throw InvalidInput("embedding cache is truncated");

    std::vector<Embedding> rows(count, Embedding(dim));
    std::size_t offset = header;
    for (auto& row: rows)
    {
        for (double& x: row)
        {
            const auto bits = get_le<std::uint32_t>(data, offset);
            float f;
            std::memcpy(&f, &bits, sizeof(f));
            x = f;
            offset += 4;
        }
        normalize(row);
    }
    return rows;
}

std::string corpus_cache_key(const std::filesystem::path& corpus, const Embedder& embedder)
{
    HashBuilder h;
    h.add("corpus/v1").add(read_all(corpus)).add(embedder.id());
    return h.hex();
}

BuildIndexResult build_index(const std::filesystem::path& corpus, Embedder& embedder, bool use_cache)
{
    auto entries = load_corpus(corpus);
    if (entries.empty())
        throw EmptyIndex("corpus '" + corpus.string() + "' has no documents");
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });

    const auto dim = embedder.dimension();
    BuildIndexResult result {VectorIndex(dim), EmbeddingCache::path_for(corpus, corpus_cache_key(corpus, embedder)), false};

    std::optional<std::vector<Embedding>> rows;
    if (use_cache)
        rows = EmbeddingCache::read(result.cache_path, dim, entries.size());
    result.cache_hit = rows.has_value();
    if (!rows)
    {
        rows.emplace();
        rows->reserve(entries.size());
        for (const auto& e: entries)
        {
            Document doc {e.doc_id, e.title, e.body, {}};
            auto v = embedder.embed(render_document(doc, std::string::npos));
            if (v.size() != dim)
                throw DimensionMismatch("embedder returned dimension " + std::to_string(v.size()));
            // Same precision whether or not the cache was hit.
            for (double& x: v)
                x = static_cast<float>(x);
            normalize(v);
            rows->push_back(std::move(v));
        }
        if (use_cache)
            EmbeddingCache::write(result.cache_path, dim, *rows);
    }

    for (std::size_t i = 0; i < entries.size(); ++i)
        result.index.add({entries[i].doc_id, entries[i].title, entries[i].body, std::move((*rows)[i])});
    result.index.freeze();
    return result;
}

} // namespace swirl
