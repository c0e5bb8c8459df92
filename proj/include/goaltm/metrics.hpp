#pragma once

#include <array>
#include <string>
#include <vector>

#include "goaltm/corpus.hpp"
#include "goaltm/extract.hpp"
#include "goaltm/providers.hpp"

namespace goaltm {

// Threshold grid used for the per-threshold relevance-rate report columns.
inline constexpr std::array<double, 6> kRelevanceThresholds = {0.4,   0.425, 0.45,
                                                               0.475, 0.5,   0.525};

struct GroundTruthGoals {
    std::vector<std::string> goals;
};

// {"goals": [str]}; deduplicates while keeping first-seen order.
GroundTruthGoals parse_ground_truth(const std::string& text);
GroundTruthGoals load_ground_truth(const std::string& path);

// Fraction of distinct words across K top-10 lists, in (0, 1]. Every list
// must hold exactly ten words.
double unique_term_score(const std::vector<std::vector<std::string>>& topic_word_lists);

// The text standing in for a topic when it has to be embedded.
enum class TopicTextMode { TopWordsJoined, Summary };

std::string topic_text(const TopicOutput& topic, TopicTextMode mode);

// Cosine scores between embedded topic texts and embedded reference goals,
// reduced to each side's best match. Computed once, consumed by the three
// relevance metrics below.
struct RelevanceScores {
    std::vector<double> best_goal_for_topic; // per topic: max over goals of cos
    std::vector<double> best_topic_for_goal; // per goal: max over topics of cos
};

RelevanceScores relevance_scores(const std::vector<TopicOutput>& topics,
                                 const GroundTruthGoals& truth, TopicTextMode mode,
                                 EmbeddingProvider& embedder);

// Mean over topics of the best goal cosine.
double goal_similarity(const RelevanceScores& scores);
// Fraction of topics whose best goal cosine strictly exceeds the threshold.
double goal_relevant_topic_rate(const RelevanceScores& scores, double threshold);
// Fraction of goals whose best topic cosine strictly exceeds the threshold.
double goal_coverage_rate(const RelevanceScores& scores, double threshold);

struct AgreementScores {
    double jaccard = 1.0;
    double simple_match = 1.0;
    double dice = 1.0;
    // True when neither rater marked anything positive, which forces the
    // jaccard and dice values to their conventional 1.0.
    bool degenerate = false;
};

AgreementScores agreement(const std::vector<bool>& labels_a, const std::vector<bool>& labels_b);

struct AnnotationCluster {
    int cluster = 0;
    std::string exemplar; // member nearest the centroid, ties by phrase
    std::vector<std::string> members;
};

std::vector<AnnotationCluster> cluster_for_annotation(const std::vector<std::string>& goal_set,
                                                      int n_clusters, EmbeddingProvider& embedder,
                                                      uint64_t seed);

// One line per cluster: {"cluster", "exemplar", "members"}.
std::string annotation_to_jsonl(const std::vector<AnnotationCluster>& clusters);

// Document-level boolean co-occurrence coherence. This in-corpus counting is
// deliberately simple and is not interchangeable with scores from reference
// coherence toolkits, so reports carry the comparable=false marker.
struct CoherenceScores {
    double npmi = 0.0;
    double uci = 0.0;
    bool has_out_of_vocab = false;
};

struct CoherenceReport {
    std::vector<CoherenceScores> per_topic;
    bool comparable = false;
};

CoherenceReport topic_coherence(const std::vector<std::vector<std::string>>& topic_word_lists,
                                const Corpus& corpus);

} // namespace goaltm
