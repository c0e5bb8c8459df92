#include "goaltm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/io.hpp"
#include "goaltm/numeric.hpp"

using json = nlohmann::json;

namespace goaltm {

GroundTruthGoals parse_ground_truth(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("ground truth: ") + e.what());
    }
    if (!root.is_object() || !root.contains("goals") || !root["goals"].is_array())
        throw ParseError("ground truth: expected an object with a \"goals\" array");

    GroundTruthGoals out;
    std::unordered_set<std::string> seen;
    for (const json& g : root["goals"]) {
        if (!g.is_string()) throw ParseError("ground truth: goals must be strings");
        std::string phrase = g.get<std::string>();
        if (phrase.empty()) throw ParseError("ground truth: empty goal phrase");
        if (seen.insert(phrase).second) out.goals.push_back(std::move(phrase));
    }
    if (out.goals.empty()) throw ValidationError("ground truth: no goals listed");
    return out;
}

GroundTruthGoals load_ground_truth(const std::string& path) {
    return parse_ground_truth(read_file_bytes(path));
}

double unique_term_score(const std::vector<std::vector<std::string>>& topic_word_lists) {
    if (topic_word_lists.empty()) throw DomainError("unique terms: no topics");
    std::unordered_set<std::string> distinct;
    for (const std::vector<std::string>& words : topic_word_lists) {
        if (words.size() != 10)
            throw DomainError("unique terms: every topic must list exactly 10 words, got " +
                              std::to_string(words.size()));
        distinct.insert(words.begin(), words.end());
    }
    return static_cast<double>(distinct.size()) /
           (10.0 * static_cast<double>(topic_word_lists.size()));
}

std::string topic_text(const TopicOutput& topic, TopicTextMode mode) {
    if (mode == TopicTextMode::Summary) {
        if (topic.summary.empty()) throw DomainError("topic text: topic has no summary");
        return topic.summary;
    }
    if (topic.top.empty()) throw DomainError("topic text: topic has no words");
    std::string joined;
    for (const TopicWord& w : topic.top) {
        if (!joined.empty()) joined += ' ';
        joined += w.word;
    }
    return joined;
}

RelevanceScores relevance_scores(const std::vector<TopicOutput>& topics,
                                 const GroundTruthGoals& truth, TopicTextMode mode,
                                 EmbeddingProvider& embedder) {
    if (topics.empty()) throw DomainError("relevance: no topics");
    if (truth.goals.empty()) throw DomainError("relevance: no reference goals");

    std::vector<Vec> topic_vecs;
    topic_vecs.reserve(topics.size());
    for (const TopicOutput& t : topics)
        topic_vecs.push_back(embed_phrase(embedder, topic_text(t, mode)));
    std::vector<Vec> goal_vecs;
    goal_vecs.reserve(truth.goals.size());
    for (const std::string& g : truth.goals) goal_vecs.push_back(embed_phrase(embedder, g));

    RelevanceScores scores;
    scores.best_goal_for_topic.assign(topic_vecs.size(), -1.0);
    scores.best_topic_for_goal.assign(goal_vecs.size(), -1.0);
    for (size_t t = 0; t < topic_vecs.size(); ++t)
        for (size_t g = 0; g < goal_vecs.size(); ++g) {
            double c = cosine(topic_vecs[t], goal_vecs[g]);
            scores.best_goal_for_topic[t] = std::max(scores.best_goal_for_topic[t], c);
            scores.best_topic_for_goal[g] = std::max(scores.best_topic_for_goal[g], c);
        }
    return scores;
}

double goal_similarity(const RelevanceScores& scores) {
    if (scores.best_goal_for_topic.empty()) throw DomainError("relevance: empty score set");
    double sum = 0.0;
    for (double s : scores.best_goal_for_topic) sum += s;
    return sum / static_cast<double>(scores.best_goal_for_topic.size());
}

namespace {

double strict_exceed_rate(const std::vector<double>& best, double threshold) {
    if (best.empty()) throw DomainError("relevance: empty score set");
    if (threshold < -1.0 || threshold > 1.0)
        throw DomainError("relevance: threshold must lie in [-1, 1]");
    int hits = 0;
    for (double s : best)
        if (s > threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(best.size());
}

} // namespace

double goal_relevant_topic_rate(const RelevanceScores& scores, double threshold) {
    return strict_exceed_rate(scores.best_goal_for_topic, threshold);
}

double goal_coverage_rate(const RelevanceScores& scores, double threshold) {
    return strict_exceed_rate(scores.best_topic_for_goal, threshold);
}

AgreementScores agreement(const std::vector<bool>& labels_a, const std::vector<bool>& labels_b) {
    if (labels_a.empty() || labels_a.size() != labels_b.size())
        throw DomainError("agreement: label vectors must have equal nonzero length");
    long long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (size_t i = 0; i < labels_a.size(); ++i) {
        if (labels_a[i] && labels_b[i]) ++n11;
        else if (labels_a[i]) ++n10;
        else if (labels_b[i]) ++n01;
        else ++n00;
    }
    AgreementScores out;
    out.simple_match = static_cast<double>(n11 + n00) / static_cast<double>(labels_a.size());
    long long any_positive = n11 + n10 + n01;
    if (any_positive == 0) {
        out.degenerate = true; // both raters said "no" everywhere
        out.jaccard = 1.0;
        out.dice = 1.0;
    } else {
        out.jaccard = static_cast<double>(n11) / static_cast<double>(any_positive);
        out.dice = static_cast<double>(2 * n11) / static_cast<double>(2 * n11 + n10 + n01);
    }
    return out;
}

std::vector<AnnotationCluster> cluster_for_annotation(const std::vector<std::string>& goal_set,
                                                      int n_clusters, EmbeddingProvider& embedder,
                                                      uint64_t seed) {
    if (n_clusters < 1) throw DomainError("annotation: cluster count must be positive");
    if (static_cast<int>(goal_set.size()) < n_clusters)
        throw DomainError("annotation: " + std::to_string(goal_set.size()) +
                          " goal phrases cannot fill " + std::to_string(n_clusters) + " clusters");

    std::vector<Vec> points;
    points.reserve(goal_set.size());
    for (const std::string& g : goal_set) points.push_back(embed_phrase(embedder, g));
    KMeansResult km = kmeans(points, n_clusters, seed);

    std::vector<AnnotationCluster> out(n_clusters);
    for (int k = 0; k < n_clusters; ++k) out[k].cluster = k;
    for (size_t i = 0; i < goal_set.size(); ++i)
        out[km.assignments[i]].members.push_back(goal_set[i]);
    for (int k = 0; k < n_clusters; ++k) {
        long long best_i = -1;
        double best = 0.0;
        for (size_t i = 0; i < goal_set.size(); ++i) {
            if (km.assignments[i] != k) continue;
            double dist = squared_distance(points[i], km.centroids[k]);
            bool better = best_i < 0 || dist < best ||
                          (dist == best && goal_set[i] < goal_set[best_i]);
            if (better) {
                best = dist;
                best_i = static_cast<long long>(i);
            }
        }
        if (best_i < 0) throw DomainError("annotation: cluster " + std::to_string(k) + " is empty");
        out[k].exemplar = goal_set[best_i];
    }
    return out;
}

std::string annotation_to_jsonl(const std::vector<AnnotationCluster>& clusters) {
    std::string out;
    for (const AnnotationCluster& c : clusters) {
        json line{{"cluster", c.cluster}, {"exemplar", c.exemplar}, {"members", c.members}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

CoherenceReport topic_coherence(const std::vector<std::vector<std::string>>& topic_word_lists,
                                const Corpus& corpus) {
    if (topic_word_lists.empty()) throw DomainError("coherence: no topics");
    if (corpus.documents.empty()) throw DomainError("coherence: empty corpus");

    std::vector<std::unordered_set<std::string>> doc_words;
    doc_words.reserve(corpus.documents.size());
    for (const Document& d : corpus.documents)
        doc_words.emplace_back(d.tokens.begin(), d.tokens.end());
    const double n_docs = static_cast<double>(corpus.documents.size());
    const double eps = 1e-12;

    auto doc_frequency = [&](const std::string& w) {
        long long df = 0;
        for (const auto& set : doc_words)
            if (set.count(w) > 0) ++df;
        return df;
    };
    auto pair_frequency = [&](const std::string& a, const std::string& b) {
        long long df = 0;
        for (const auto& set : doc_words)
            if (set.count(a) > 0 && set.count(b) > 0) ++df;
        return df;
    };

    CoherenceReport report;
    report.comparable = false;
    for (const std::vector<std::string>& words : topic_word_lists) {
        if (words.size() < 2) throw DomainError("coherence: a topic needs at least two words");
        CoherenceScores scores;
        std::unordered_map<std::string, double> p_word;
        for (const std::string& w : words) {
            long long df = doc_frequency(w);
            if (df == 0) scores.has_out_of_vocab = true;
            p_word[w] = static_cast<double>(df) / n_docs;
        }
        double npmi_sum = 0.0;
        double pmi_sum = 0.0;
        int pairs = 0;
        for (size_t i = 0; i < words.size(); ++i)
            for (size_t j = i + 1; j < words.size(); ++j) {
                double p_joint = static_cast<double>(pair_frequency(words[i], words[j])) / n_docs;
                double pmi = std::log((p_joint + eps) / (p_word[words[i]] * p_word[words[j]] + eps));
                double denom = -std::log(p_joint + eps);
                npmi_sum += std::abs(denom) < 1e-9 ? 1.0 : pmi / denom;
                pmi_sum += pmi;
                ++pairs;
            }
        scores.npmi = npmi_sum / static_cast<double>(pairs);
        scores.uci = pmi_sum / static_cast<double>(pairs);
        report.per_topic.push_back(scores);
    }
    return report;
}

} // namespace goaltm
