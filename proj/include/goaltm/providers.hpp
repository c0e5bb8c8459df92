#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "goaltm/corpus.hpp"
#include "goaltm/vecmat.hpp"

namespace goaltm {

struct DocGoals {
    std::string doc_id;
    std::vector<std::string> goals; // empty when the document is irrelevant
    bool relevant = true;
};

struct AugmentedPair {
    std::string doc_id;
    std::string text_a;
    std::string text_b;
};

// ---------------------------------------------------------------------------
// Completion side: turning documents into goal phrases and paraphrases.

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual std::string id() const = 0;
    // Raw model output for the goal-summarization prompt.
    virtual std::string summarize(const Document& doc, const std::string& goal_text) = 0;
    // Two independent paraphrases of the document.
    virtual std::pair<std::string, std::string> augment(const Document& doc) = 0;
};

// Validates and parses the provider output: either the literal tag
// "irrelevant", or 3..5 phrases separated by semicolons.
DocGoals summarize_goals(CompletionProvider& provider, const Document& doc,
                         const std::string& goal_text);

AugmentedPair augment_document(CompletionProvider& provider, const Document& doc);

// Canned responses keyed by document id; used for offline runs and tests.
// Spec (JSON): {"goals": {id: "p1; p2; p3" | "irrelevant"},
//               "augment": {id: [text_a, text_b]},
//               "augment_mode": "strict" | "identity"}
// In identity mode a document missing from "augment" echoes its own text.
class FixtureCompletionProvider : public CompletionProvider {
public:
    explicit FixtureCompletionProvider(const std::string& fixture_json_text);
    std::string id() const override;
    std::string summarize(const Document& doc, const std::string& goal_text) override;
    std::pair<std::string, std::string> augment(const Document& doc) override;

private:
    std::map<std::string, std::string> goals_;
    std::map<std::string, std::pair<std::string, std::string>> augment_;
    bool identity_augment_ = false;
    std::string digest_;
};

struct PromptTemplates {
    std::string goal_system;
    std::string goal_user;    // placeholders {goal}, {document}
    std::string augment_system;
    std::string augment_user; // placeholder {document}

    static PromptTemplates defaults();
};

struct HttpOptions {
    std::string base_url;
    std::string completion_model = "gpt-4o-mini";
    std::string embedding_model = "text-embedding-3-small";
    int embedding_dim = 256;
    double temperature = 0.0;
    int attempts = 3;
    int backoff_ms = 250;
    PromptTemplates templates = PromptTemplates::defaults();
};

// POSTs {base}/chat/completions. The bearer token is taken from the
// GOALTM_API_KEY environment variable when present.
class HttpCompletionProvider : public CompletionProvider {
public:
    explicit HttpCompletionProvider(HttpOptions options);
    std::string id() const override;
    std::string summarize(const Document& doc, const std::string& goal_text) override;
    std::pair<std::string, std::string> augment(const Document& doc) override;

private:
    std::string complete(const std::string& system, const std::string& user);
    HttpOptions opt_;
    std::string api_key_;
};

// ---------------------------------------------------------------------------
// Embedding side.

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dim() const = 0;
    // One row per token, in input order. Row i depends only on tokens[i].
    virtual Mat embed_tokens(const std::vector<std::string>& tokens) = 0;
};

// Mean of the token vectors of tokenize_fallback(phrase).
Vec embed_phrase(EmbeddingProvider& provider, const std::string& phrase);

// Deterministic pseudo-embeddings: each token's vector comes from a PRNG
// stream seeded by (seed, token bytes), normalized to unit length.
class FixtureHashEmbedding : public EmbeddingProvider {
public:
    FixtureHashEmbedding(int dim, uint64_t seed);
    std::string id() const override;
    int dim() const override { return dim_; }
    Mat embed_tokens(const std::vector<std::string>& tokens) override;

private:
    int dim_;
    uint64_t seed_;
};

// Like FixtureHashEmbedding, but tokens that start with 'c' followed by
// digits (c0, c0_x, c12w3, ...) map onto basis direction (digits mod dim)
// plus noise of norm at most 0.1, renormalized. Gives tests a corpus with a
// known cluster structure.
class PlantedEmbedding : public EmbeddingProvider {
public:
    PlantedEmbedding(int dim, uint64_t seed);
    std::string id() const override;
    int dim() const override { return dim_; }
    Mat embed_tokens(const std::vector<std::string>& tokens) override;

    // Digits parsed from a planted token name, or nullopt.
    static std::optional<int> planted_cluster(const std::string& token);

private:
    int dim_;
    uint64_t seed_;
};

// POSTs {base}/embeddings in batches; verifies every returned vector has the
// configured dimension.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpOptions options);
    std::string id() const override;
    int dim() const override { return opt_.embedding_dim; }
    Mat embed_tokens(const std::vector<std::string>& tokens) override;

private:
    HttpOptions opt_;
    std::string api_key_;
};

// ---------------------------------------------------------------------------
// On-disk embedding cache.
//
// Layout: "GTME" magic, u16 version, u32 dim, u32 record count, then records
// of (u32 key length, key bytes, u32 row count, rows as little-endian f32).
// Vectors round-trip through f32, and get_or_compute returns the quantized
// value even on a miss, so hits and the original computation are
// bit-identical.
class EmbeddingCache {
public:
    EmbeddingCache(const std::string& path, int dim);

    std::optional<Mat> get(const std::string& key) const;
    void put(const std::string& key, const Mat& value);
    Mat get_or_compute(const std::string& key, const std::function<Mat()>& compute);
    int dim() const { return dim_; }
    size_t size() const { return entries_.size(); }

private:
    std::string path_;
    int dim_;
    std::map<std::string, Mat> entries_; // stored already quantized
    mutable std::mutex mutex_;
};

// Wraps a provider with a token-level cache. Results are f32-quantized (the
// cache's storage precision) so that cold and warm lookups agree bit for bit.
class CachedEmbeddingProvider : public EmbeddingProvider {
public:
    CachedEmbeddingProvider(EmbeddingProvider& inner, std::shared_ptr<EmbeddingCache> cache);
    std::string id() const override;
    int dim() const override;
    Mat embed_tokens(const std::vector<std::string>& tokens) override;

private:
    EmbeddingProvider& inner_;
    std::shared_ptr<EmbeddingCache> cache_;
};

// ---------------------------------------------------------------------------
// Artifact I/O and provider wiring.

void save_doc_goals(const std::vector<DocGoals>& goals, const std::string& path);
std::vector<DocGoals> load_doc_goals(const std::string& path);

void save_augmented(const std::vector<AugmentedPair>& pairs, const std::string& path);
std::vector<AugmentedPair> load_augmented(const std::string& path);

struct ProviderBundle {
    std::unique_ptr<CompletionProvider> completion;
    std::unique_ptr<EmbeddingProvider> embedding;
};

// spec is "fixture:<path>" or "http:<url>". Fixture files may carry an
// "embedding" object ({"kind": "fixture-hash"|"planted", "dim", "seed"});
// otherwise the options below fill the gaps.
struct ProviderOptions {
    uint64_t seed = 0;
    int embedding_dim = 32;
    HttpOptions http;
};

ProviderBundle make_providers(const std::string& spec, const ProviderOptions& options);

} // namespace goaltm
