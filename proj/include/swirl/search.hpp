// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/model_client.hpp>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace swirl
{

using Embedding = std::vector<double>;

/// Text -> unit-norm vector of fixed dimension.
class Embedder
{
  public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    /// Identifies the embedding function in cache keys.
    virtual std::string id() const = 0;
    /// Throws InvalidInput on empty text, DimensionMismatch on a wrong-sized vector.
    virtual Embedding embed(std::string_view text) = 0;
};

/// Deterministic feature hashing: lowercase alphanumeric unigrams hashed into `dimension` buckets,
/// counted, then L2 normalized. Word order does not matter.
class HashingEmbedder final: public Embedder
{
  public:
    explicit HashingEmbedder(std::size_t dimension = 256);

    std::size_t dimension() const override { return _dimension; }
    std::string id() const override { return "hashing-" + std::to_string(_dimension); }
    Embedding embed(std::string_view text) override;

  private:
    std::size_t _dimension;
};

/// Remote embedding endpoint: POST {model, input:[text]} -> {data:[{embedding:[...]}]}.
class HttpEmbedder final: public Embedder
{
  public:
    HttpEmbedder(ModelEndpoint endpoint, std::size_t dimension);
    ~HttpEmbedder() override;

    std::size_t dimension() const override { return _dimension; }
    std::string id() const override { return "http-" + _endpoint.model_id + "-" + std::to_string(_dimension); }
    Embedding embed(std::string_view text) override;

    /// Extracts data[0].embedding. Throws MalformedResponse.
    static std::vector<double> parse_response(const std::string& body);

  private:
    ModelEndpoint _endpoint;
    std::size_t _dimension;
    CallStats _stats;
    std::unique_ptr<std::counting_semaphore<1024>> _limiter;
    std::mutex _rng_mutex;
    std::mt19937_64 _rng {0x5eed};
};

/// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize_words(std::string_view text);

/// Scales to unit L2 norm. Throws InvalidInput on a zero vector.
void normalize(Embedding& v);

double dot(const Embedding& a, const Embedding& b);

struct Document
{
    std::string doc_id;
    std::string title;
    std::string body;
    Embedding embedding;
};

struct SearchHit
{
    std::string doc_id;
    double score = 0.0;
    std::string text;

    bool operator==(const SearchHit&) const = default;
};

/// Cosine scores closer than this rank as ties (ascending doc_id).
inline constexpr double kTieTolerance = 1e-12;

/// Exact cosine-similarity index. Documents are added, then the index is frozen; only frozen
/// indexes answer queries.
class VectorIndex
{
  public:
    explicit VectorIndex(std::size_t dimension);

    /// Throws DimensionMismatch, or InvalidInput if frozen / not unit norm / duplicate id.
    void add(Document doc);
    void freeze();

    bool frozen() const noexcept { return _frozen; }
    std::size_t dimension() const noexcept { return _dimension; }
    std::size_t size() const noexcept { return _docs.size(); }
    const std::vector<Document>& documents() const noexcept { return _docs; }

    /// Top-k by descending score, ties by ascending doc_id. k beyond the corpus returns every
    /// document. `snippet_chars` bounds the rendered "title\nbody" text.
    std::vector<SearchHit> search(const Embedding& query, std::size_t k, std::size_t snippet_chars = 1500) const;

  private:
    std::size_t _dimension;
    std::vector<Document> _docs; // sorted by doc_id once frozen
    bool _frozen = false;
};

std::vector<SearchHit> search(const VectorIndex& index, Embedder& embedder, std::string_view query, std::size_t k,
                              std::size_t snippet_chars = 1500);

/// Title and body joined by a newline (body alone when the title is empty), cut to `budget` bytes
/// without splitting a UTF-8 sequence.
std::string render_document(const Document& doc, std::size_t budget);

struct CorpusEntry
{
    std::string doc_id;
    std::string title;
    std::string body;
};

/// JSONL {doc_id, title, body}. Throws IoError / InvalidInput.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);

/// Embedding cache file, written beside the corpus.
///
///     header: magic "SWEMBED1" (8 bytes), u32 version, u32 dim, u64 count   (little endian)
///     rows:   count x dim float32, in ascending doc_id order
struct EmbeddingCache
{
    static constexpr std::uint32_t kVersion = 1;

    static std::filesystem::path path_for(const std::filesystem::path& corpus, std::string_view key);
    static void write(const std::filesystem::path& path, std::size_t dim, const std::vector<Embedding>& rows);
    /// Empty optional if the file is missing; throws InvalidInput on a corrupt file.
    static std::optional<std::vector<Embedding>> read(const std::filesystem::path& path, std::size_t dim,
                                                      std::size_t count);
};

/// Cache key: XXH64 over the corpus bytes and the embedder id.
std::string corpus_cache_key(const std::filesystem::path& corpus, const Embedder& embedder);

struct BuildIndexResult
{
    VectorIndex index;
    std::filesystem::path cache_path;
    bool cache_hit = false;
};

/// Loads the corpus, embeds "title\nbody" (cached), and returns a frozen index.
BuildIndexResult build_index(const std::filesystem::path& corpus, Embedder& embedder, bool use_cache = true);

} // namespace swirl
