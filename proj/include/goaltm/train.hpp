#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "goaltm/corpus.hpp"
#include "goaltm/model.hpp"
#include "goaltm/providers.hpp"

namespace goaltm {

struct TrainConfig {
    int topic_count = 0;             // required, at least 2
    int batch_pairs = 32;            // documents per batch; each yields two texts
    double learning_rate = 2e-3;
    double temperature = 0.05;       // contrastive sharpness
    double negative_threshold = 0.6; // mean-pooled cosine gate for negatives
    double prior_weight = 1.0;
    double alignment_weight = 1.0;
    double transport_epsilon = 0.05;
    double dirichlet_alpha = 0.0;    // 0 means 1/topic_count
    int epochs = 50;
    int max_steps = 0;               // 0 means no cap; handy for exact-step runs
    uint64_t seed = 0;
    bool early_stop = true;
    double early_stop_eps = 1e-4;    // minimum epoch-over-epoch improvement
    int early_stop_patience = 5;     // epochs allowed below that improvement
    int min_count = 2;               // vocabulary floor, used at extraction
    std::string goal_text;           // the analysis focus handed to providers
    int sinkhorn_max_iter = 20000;
    double sinkhorn_tol = 1e-7;
    double mmd_bandwidth = 0.0;      // 0 means per-batch median heuristic
};

// Strict JSON round-trip: unknown keys are rejected so typos cannot silently
// fall back to defaults.
TrainConfig parse_train_config(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& config);
void validate_train_config(const TrainConfig& config);

// Digest of the canonical serialization; stamped into checkpoints so a model
// can be traced back to the settings that produced it.
std::string config_digest(const TrainConfig& config);

Hyper hyper_from(const TrainConfig& config);

// Drops documents marked irrelevant and unions every surviving goal phrase,
// first-seen order, exact-string deduplication. Every corpus document must
// have a goals entry.
std::pair<Corpus, std::vector<std::string>> build_goal_set(
    const Corpus& corpus, const std::vector<DocGoals>& doc_goals);

// Clusters the phrase embeddings and takes centroids as the goal matrix rows.
GoalMatrix build_goal_matrix(const std::vector<std::string>& goal_set, int topic_count,
                             EmbeddingProvider& embedder, uint64_t seed);

// Everything about one document the optimizer reuses every epoch: pooled
// representations of both augmented texts.
struct DocFeatures {
    std::string doc_id;
    DocRepresentation first;
    DocRepresentation second;
};

// Embeds and pools each document's two augmented texts against its own goal
// phrases. Documents whose augmentation is missing or unusable are skipped
// with a note to warn (when given) rather than failing the run.
std::vector<DocFeatures> prepare_doc_features(const Corpus& corpus,
                                              const std::vector<AugmentedPair>& pairs,
                                              const std::vector<DocGoals>& doc_goals,
                                              EmbeddingProvider& embedder,
                                              std::ostream* warn = nullptr);

// Assembles one optimizer batch. Every listed document must carry features.
BatchContext prepare_batch(const std::vector<const DocFeatures*>& docs, const GoalMatrix& goals,
                           double negative_threshold);

struct Checkpoint {
    int version = 1;
    TopicMatrix topics;
    GoalMatrix goals;
    std::string config_digest;
    uint64_t seed = 0;
    int steps = 0;
};

struct TrainLogEntry {
    int step = 0;
    int epoch = 0;
    double contrastive = 0.0;
    double prior_match = 0.0;
    double ot = 0.0;
    double total = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainLogEntry> log;
    std::vector<std::string> skipped_docs;
};

// Full optimization: build the goal set and goal matrix, pool every document
// once, then run seeded shuffled batches of Adam updates on the topic matrix.
TrainResult train(const Corpus& corpus, const std::vector<DocGoals>& doc_goals,
                  const std::vector<AugmentedPair>& pairs, const TrainConfig& config,
                  EmbeddingProvider& embedder, std::ostream* warn = nullptr);

// One JSON manifest line, then the topic and goal matrices as little-endian
// f32 blobs. The manifest carries a SHA-256 per blob; load verifies them and
// reports any structural damage as CorruptionError.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace goaltm
