#include "goaltm/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/io.hpp"

using nlohmann::json;

namespace goaltm {

namespace {

constexpr const char* kCheckpointFormat = "goaltm-checkpoint";

void read_field(const json& j, const char* key, int& out) { out = j.at(key).get<int>(); }
void read_field(const json& j, const char* key, double& out) { out = j.at(key).get<double>(); }
void read_field(const json& j, const char* key, bool& out) { out = j.at(key).get<bool>(); }
void read_field(const json& j, const char* key, uint64_t& out) { out = j.at(key).get<uint64_t>(); }
void read_field(const json& j, const char* key, std::string& out) {
    out = j.at(key).get<std::string>();
}

json config_to_json_object(const TrainConfig& c) {
    return json{{"topic_count", c.topic_count},
                {"batch_pairs", c.batch_pairs},
                {"learning_rate", c.learning_rate},
                {"temperature", c.temperature},
                {"negative_threshold", c.negative_threshold},
                {"prior_weight", c.prior_weight},
                {"alignment_weight", c.alignment_weight},
                {"transport_epsilon", c.transport_epsilon},
                {"dirichlet_alpha", c.dirichlet_alpha},
                {"epochs", c.epochs},
                {"max_steps", c.max_steps},
                {"seed", c.seed},
                {"early_stop", c.early_stop},
                {"early_stop_eps", c.early_stop_eps},
                {"early_stop_patience", c.early_stop_patience},
                {"min_count", c.min_count},
                {"goal_text", c.goal_text},
                {"sinkhorn_max_iter", c.sinkhorn_max_iter},
                {"sinkhorn_tol", c.sinkhorn_tol},
                {"mmd_bandwidth", c.mmd_bandwidth}};
}

// Fisher-Yates with the shared generator; written out so the permutation is
// the same on every platform.
void seeded_shuffle(std::vector<int>& items, std::mt19937_64& rng) {
    for (size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[rng() % i]);
}

void append_f32_le(std::string& out, float value) {
    uint32_t bits;
    std::memcpy(&bits, &value, 4);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

std::string matrix_blob(const Mat& m) {
    std::string blob;
    blob.reserve(m.data.size() * 4);
    for (double x : m.data) append_f32_le(blob, static_cast<float>(x));
    return blob;
}

Mat blob_matrix(const std::string& blob, int rows, int cols, const char* what) {
    if (blob.size() != static_cast<size_t>(rows) * cols * 4)
        throw CorruptionError(std::string("checkpoint: ") + what + " blob has wrong length");
    Mat m(rows, cols);
    for (size_t i = 0; i < m.data.size(); ++i) {
        uint32_t bits = 0;
        for (int b = 3; b >= 0; --b)
            bits = (bits << 8) | static_cast<unsigned char>(blob[i * 4 + b]);
        float value;
        std::memcpy(&value, &bits, 4);
        m.data[i] = static_cast<double>(value);
    }
    return m;
}

} // namespace

TrainConfig parse_train_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: bad JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: top level must be an object");

    TrainConfig config;
    json canonical = config_to_json_object(config);
    for (const auto& [key, value] : j.items()) {
        if (!canonical.contains(key))
            throw ConfigError("config: unknown key '" + key + "'");
        (void)value;
    }
    try {
        if (j.contains("topic_count")) read_field(j, "topic_count", config.topic_count);
        if (j.contains("batch_pairs")) read_field(j, "batch_pairs", config.batch_pairs);
        if (j.contains("learning_rate")) read_field(j, "learning_rate", config.learning_rate);
        if (j.contains("temperature")) read_field(j, "temperature", config.temperature);
        if (j.contains("negative_threshold"))
            read_field(j, "negative_threshold", config.negative_threshold);
        if (j.contains("prior_weight")) read_field(j, "prior_weight", config.prior_weight);
        if (j.contains("alignment_weight"))
            read_field(j, "alignment_weight", config.alignment_weight);
        if (j.contains("transport_epsilon"))
            read_field(j, "transport_epsilon", config.transport_epsilon);
        if (j.contains("dirichlet_alpha")) read_field(j, "dirichlet_alpha", config.dirichlet_alpha);
        if (j.contains("epochs")) read_field(j, "epochs", config.epochs);
        if (j.contains("max_steps")) read_field(j, "max_steps", config.max_steps);
        if (j.contains("seed")) read_field(j, "seed", config.seed);
        if (j.contains("early_stop")) read_field(j, "early_stop", config.early_stop);
        if (j.contains("early_stop_eps")) read_field(j, "early_stop_eps", config.early_stop_eps);
        if (j.contains("early_stop_patience"))
            read_field(j, "early_stop_patience", config.early_stop_patience);
        if (j.contains("min_count")) read_field(j, "min_count", config.min_count);
        if (j.contains("goal_text")) read_field(j, "goal_text", config.goal_text);
        if (j.contains("sinkhorn_max_iter"))
            read_field(j, "sinkhorn_max_iter", config.sinkhorn_max_iter);
        if (j.contains("sinkhorn_tol")) read_field(j, "sinkhorn_tol", config.sinkhorn_tol);
        if (j.contains("mmd_bandwidth")) read_field(j, "mmd_bandwidth", config.mmd_bandwidth);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value type: ") + e.what());
    }
    return config;
}

std::string train_config_to_json(const TrainConfig& config) {
    return config_to_json_object(config).dump(2) + "\n";
}

void validate_train_config(const TrainConfig& config) {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (config.topic_count < 2) fail("topic_count must be at least 2");
    if (config.batch_pairs < 1) fail("batch_pairs must be at least 1");
    if (config.learning_rate <= 0.0) fail("learning_rate must be positive");
    if (config.temperature <= 0.0) fail("temperature must be positive");
    if (config.negative_threshold < -1.0 || config.negative_threshold > 1.0)
        fail("negative_threshold must lie in [-1, 1]");
    if (config.prior_weight < 0.0) fail("prior_weight must be nonnegative");
    if (config.alignment_weight < 0.0) fail("alignment_weight must be nonnegative");
    if (config.transport_epsilon <= 0.0) fail("transport_epsilon must be positive");
    if (config.dirichlet_alpha < 0.0) fail("dirichlet_alpha must be nonnegative");
    if (config.epochs < 1) fail("epochs must be at least 1");
    if (config.max_steps < 0) fail("max_steps must be nonnegative");
    if (config.early_stop_eps < 0.0) fail("early_stop_eps must be nonnegative");
    if (config.early_stop_patience < 1) fail("early_stop_patience must be at least 1");
    if (config.min_count < 1) fail("min_count must be at least 1");
    if (config.sinkhorn_max_iter < 1) fail("sinkhorn_max_iter must be at least 1");
    if (config.sinkhorn_tol <= 0.0) fail("sinkhorn_tol must be positive");
    if (config.mmd_bandwidth < 0.0) fail("mmd_bandwidth must be nonnegative");
}

std::string config_digest(const TrainConfig& config) {
    return sha256_hex(config_to_json_object(config).dump());
}

Hyper hyper_from(const TrainConfig& config) {
    Hyper hyper;
    hyper.temperature = config.temperature;
    hyper.negative_threshold = config.negative_threshold;
    hyper.prior_weight = config.prior_weight;
    hyper.alignment_weight = config.alignment_weight;
    hyper.transport_epsilon = config.transport_epsilon;
    hyper.dirichlet_alpha = config.dirichlet_alpha;
    hyper.sinkhorn_max_iter = config.sinkhorn_max_iter;
    hyper.sinkhorn_tol = config.sinkhorn_tol;
    hyper.mmd_bandwidth = config.mmd_bandwidth;
    return hyper;
}

std::pair<Corpus, std::vector<std::string>> build_goal_set(
    const Corpus& corpus, const std::vector<DocGoals>& doc_goals) {
    std::unordered_map<std::string, const DocGoals*> by_id;
    for (const DocGoals& g : doc_goals) by_id[g.doc_id] = &g;

    Corpus filtered;
    filtered.goal_text = corpus.goal_text;
    std::vector<std::string> goal_set;
    std::unordered_set<std::string> seen;
    for (const Document& doc : corpus.documents) {
        auto it = by_id.find(doc.id);
        if (it == by_id.end())
            throw ValidationError("build_goal_set: no goals entry for document '" + doc.id + "'");
        if (!it->second->relevant) continue;
        filtered.documents.push_back(doc);
        filtered.documents.back().relevant = true;
        for (const std::string& phrase : it->second->goals)
            if (seen.insert(phrase).second) goal_set.push_back(phrase);
    }
    return {std::move(filtered), std::move(goal_set)};
}

GoalMatrix build_goal_matrix(const std::vector<std::string>& goal_set, int topic_count,
                             EmbeddingProvider& embedder, uint64_t seed) {
    if (topic_count < 1) throw DomainError("build_goal_matrix: topic count must be positive");
    if (static_cast<int>(goal_set.size()) < topic_count)
        throw DomainError("build_goal_matrix: only " + std::to_string(goal_set.size()) +
                          " goal phrases for " + std::to_string(topic_count) +
                          " topics; lower the topic count");
    std::vector<Vec> points;
    points.reserve(goal_set.size());
    for (const std::string& phrase : goal_set) points.push_back(embed_phrase(embedder, phrase));

    KMeansResult clusters = kmeans(points, topic_count, seed);
    GoalMatrix goals;
    goals.candidates = goal_set;
    goals.clusters = clusters.assignments;
    goals.centroids = Mat(topic_count, embedder.dim());
    for (int k = 0; k < topic_count; ++k) goals.centroids.set_row(k, clusters.centroids[k]);
    return goals;
}

std::vector<DocFeatures> prepare_doc_features(const Corpus& corpus,
                                              const std::vector<AugmentedPair>& pairs,
                                              const std::vector<DocGoals>& doc_goals,
                                              EmbeddingProvider& embedder, std::ostream* warn) {
    std::unordered_map<std::string, const AugmentedPair*> pair_by_id;
    for (const AugmentedPair& p : pairs) pair_by_id[p.doc_id] = &p;
    std::unordered_map<std::string, const DocGoals*> goals_by_id;
    for (const DocGoals& g : doc_goals) goals_by_id[g.doc_id] = &g;

    auto note = [&](const std::string& message) {
        if (warn) *warn << message << "\n";
    };

    std::vector<DocFeatures> features;
    for (const Document& doc : corpus.documents) {
        auto goals_it = goals_by_id.find(doc.id);
        if (goals_it == goals_by_id.end() || !goals_it->second->relevant ||
            goals_it->second->goals.empty()) {
            note("skipping '" + doc.id + "': no usable goal phrases");
            continue;
        }
        auto pair_it = pair_by_id.find(doc.id);
        if (pair_it == pair_by_id.end()) {
            note("skipping '" + doc.id + "': no augmented pair");
            continue;
        }
        try {
            std::vector<Vec> goal_vectors;
            for (const std::string& phrase : goals_it->second->goals)
                goal_vectors.push_back(embed_phrase(embedder, phrase));

            DocFeatures f;
            f.doc_id = doc.id;
            bool usable = true;
            const std::string* texts[2] = {&pair_it->second->text_a, &pair_it->second->text_b};
            DocRepresentation* reps[2] = {&f.first, &f.second};
            for (int side = 0; side < 2; ++side) {
                std::vector<std::string> tokens = tokenize_fallback(*texts[side]);
                if (tokens.empty()) {
                    note("skipping '" + doc.id + "': augmented text has no usable tokens");
                    usable = false;
                    break;
                }
                Mat embs = embedder.embed_tokens(tokens);
                *reps[side] = goal_attention_pool(embs, goal_vectors);
            }
            if (usable) features.push_back(std::move(f));
        } catch (const DomainError& e) {
            note("skipping '" + doc.id + "': " + e.what());
        }
    }
    return features;
}

BatchContext prepare_batch(const std::vector<const DocFeatures*>& docs, const GoalMatrix& goals,
                           double negative_threshold) {
    if (docs.empty()) throw ValidationError("prepare_batch: empty batch");
    std::vector<DocRepresentation> first, second;
    for (const DocFeatures* doc : docs) {
        if (!doc) throw ValidationError("prepare_batch: document without features");
        first.push_back(doc->first);
        second.push_back(doc->second);
    }
    return build_batch_context(first, second, goals, negative_threshold);
}

TrainResult train(const Corpus& corpus, const std::vector<DocGoals>& doc_goals,
                  const std::vector<AugmentedPair>& pairs, const TrainConfig& config,
                  EmbeddingProvider& embedder, std::ostream* warn) {
    validate_train_config(config);

    auto [filtered, goal_set] = build_goal_set(corpus, doc_goals);
    if (filtered.documents.empty())
        throw DomainError("train: every document was marked irrelevant");
    GoalMatrix goals = build_goal_matrix(goal_set, config.topic_count, embedder, config.seed);

    std::vector<DocFeatures> features =
        prepare_doc_features(filtered, pairs, doc_goals, embedder, warn);
    TrainResult result;
    for (const Document& doc : filtered.documents) {
        bool kept = std::any_of(features.begin(), features.end(),
                                [&](const DocFeatures& f) { return f.doc_id == doc.id; });
        if (!kept) result.skipped_docs.push_back(doc.id);
    }
    if (features.size() < 2)
        throw DomainError("train: fewer than two usable documents after preparation");

    TopicMatrix topics = init_topic_matrix(config.topic_count, embedder.dim(), config.seed);
    Hyper hyper = hyper_from(config);
    AdamState adam;
    std::mt19937_64 rng(config.seed);

    int step = 0;
    bool done = false;
    double best_epoch_loss = 0.0;
    bool have_best = false;
    int stalled_epochs = 0;

    std::vector<int> order(features.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < config.epochs && !done; ++epoch) {
        seeded_shuffle(order, rng);
        double epoch_loss = 0.0;
        int epoch_batches = 0;
        for (size_t start = 0; start < order.size() && !done; start += config.batch_pairs) {
            size_t end = std::min(order.size(), start + config.batch_pairs);
            // A lone trailing document is dropped; a full one-document batch
            // (batch_pairs = 1) still trains on its own augmentation pair.
            if (end - start == 1 && config.batch_pairs > 1) break;
            std::vector<const DocFeatures*> batch_docs;
            for (size_t i = start; i < end; ++i) batch_docs.push_back(&features[order[i]]);

            BatchContext batch = prepare_batch(batch_docs, goals, config.negative_threshold);
            LossBreakdown losses = total_loss_and_grad(topics, goals, batch, hyper, rng);
            if (!std::isfinite(losses.total))
                throw DomainError("train: non-finite loss at step " + std::to_string(step + 1) +
                                  " (contrastive " + std::to_string(losses.contrastive) +
                                  ", prior " + std::to_string(losses.prior_match) + ", transport " +
                                  std::to_string(losses.ot) + ")");
            adam_step(topics.weights.data, losses.grad.data, adam, config.learning_rate);

            ++step;
            result.log.push_back({step, epoch + 1, losses.contrastive, losses.prior_match,
                                  losses.ot, losses.total});
            epoch_loss += losses.total;
            ++epoch_batches;
            if (config.max_steps > 0 && step >= config.max_steps) done = true;
        }
        if (epoch_batches == 0)
            throw DomainError("train: no batch held at least two documents");

        if (config.early_stop && !done) {
            double mean_loss = epoch_loss / epoch_batches;
            if (have_best && mean_loss > best_epoch_loss - config.early_stop_eps) {
                if (++stalled_epochs >= config.early_stop_patience) done = true;
            } else {
                stalled_epochs = 0;
            }
            if (!have_best || mean_loss < best_epoch_loss) {
                best_epoch_loss = mean_loss;
                have_best = true;
            }
        }
    }

    result.checkpoint.version = 1;
    result.checkpoint.topics = std::move(topics);
    result.checkpoint.goals = std::move(goals);
    result.checkpoint.config_digest = config_digest(config);
    result.checkpoint.seed = config.seed;
    result.checkpoint.steps = step;
    return result;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    std::string topic_blob = matrix_blob(checkpoint.topics.weights);
    std::string goal_blob = matrix_blob(checkpoint.goals.centroids);
    json manifest{{"format", kCheckpointFormat},
                  {"version", checkpoint.version},
                  {"topic_count", checkpoint.topics.weights.rows},
                  {"dim", checkpoint.topics.weights.cols},
                  {"goal_rows", checkpoint.goals.centroids.rows},
                  {"seed", checkpoint.seed},
                  {"steps", checkpoint.steps},
                  {"config_digest", checkpoint.config_digest},
                  {"init_seed", checkpoint.topics.seed},
                  {"clusters", checkpoint.goals.clusters},
                  {"candidates", checkpoint.goals.candidates},
                  {"topic_blob_sha256", sha256_hex(topic_blob)},
                  {"goal_blob_sha256", sha256_hex(goal_blob)}};
    atomic_write_bytes(path, manifest.dump() + "\n" + topic_blob + goal_blob);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    size_t newline = bytes.find('\n');
    if (newline == std::string::npos)
        throw CorruptionError("checkpoint: missing manifest line");
    json manifest;
    try {
        manifest = json::parse(bytes.substr(0, newline));
    } catch (const json::parse_error& e) {
        throw CorruptionError(std::string("checkpoint: unreadable manifest: ") + e.what());
    }

    try {
        if (!manifest.is_object() || manifest.value("format", "") != kCheckpointFormat)
            throw CorruptionError("checkpoint: not a checkpoint file");
        if (manifest.at("version").get<int>() != 1)
            throw CorruptionError("checkpoint: unsupported version " +
                                  manifest.at("version").dump());

        Checkpoint checkpoint;
        checkpoint.version = 1;
        int topic_count = manifest.at("topic_count").get<int>();
        int dim = manifest.at("dim").get<int>();
        int goal_rows = manifest.at("goal_rows").get<int>();
        if (topic_count < 1 || dim < 1 || goal_rows < 1)
            throw CorruptionError("checkpoint: invalid matrix shape in manifest");
        checkpoint.seed = manifest.at("seed").get<uint64_t>();
        checkpoint.steps = manifest.at("steps").get<int>();
        checkpoint.config_digest = manifest.at("config_digest").get<std::string>();
        checkpoint.topics.seed = manifest.at("init_seed").get<uint64_t>();
        checkpoint.goals.clusters = manifest.at("clusters").get<std::vector<int>>();
        checkpoint.goals.candidates = manifest.at("candidates").get<std::vector<std::string>>();

        size_t topic_bytes = static_cast<size_t>(topic_count) * dim * 4;
        size_t goal_bytes = static_cast<size_t>(goal_rows) * dim * 4;
        std::string body = bytes.substr(newline + 1);
        if (body.size() != topic_bytes + goal_bytes)
            throw CorruptionError("checkpoint: blob payload has wrong length");
        std::string topic_blob = body.substr(0, topic_bytes);
        std::string goal_blob = body.substr(topic_bytes);
        if (sha256_hex(topic_blob) != manifest.at("topic_blob_sha256").get<std::string>())
            throw CorruptionError("checkpoint: topic blob digest mismatch");
        if (sha256_hex(goal_blob) != manifest.at("goal_blob_sha256").get<std::string>())
            throw CorruptionError("checkpoint: goal blob digest mismatch");

        checkpoint.topics.weights = blob_matrix(topic_blob, topic_count, dim, "topic");
        checkpoint.goals.centroids = blob_matrix(goal_blob, goal_rows, dim, "goal");
        return checkpoint;
    } catch (const json::exception& e) {
        throw CorruptionError(std::string("checkpoint: manifest missing fields: ") + e.what());
    }
}

} // namespace goaltm
