#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "goaltm/numeric.hpp"
#include "goaltm/represent.hpp"
#include "goaltm/vecmat.hpp"

namespace goaltm {

// The only trainable parameter: one row of weights per topic.
struct TopicMatrix {
    Mat weights; // K x H
    uint64_t seed = 0;
};

// Rows start as seeded Gaussian draws scaled to unit norm, which keeps the
// cosine scores well-conditioned from step one.
TopicMatrix init_topic_matrix(int topic_count, int dim, uint64_t seed);

// Frozen goal-side anchor: centroids of clustered goal-candidate phrases.
struct GoalMatrix {
    Mat centroids;             // K x H
    std::vector<int> clusters; // per candidate, which centroid it belongs to
    std::vector<std::string> candidates;
};

// softmax over the cosine of the pooled document vector against each row.
// Invariant to positive rescaling of either side.
Vec mixture_over_rows(const Vec& pooled, const Mat& rows);

// Transport cost between topic rows and goal centroids: 1 - cosine, in [0,2].
Mat alignment_cost(const Mat& topic_rows, const Mat& goal_centroids);

// Which (anchor, other) pairs may serve as contrastive negatives. Entry (p,q)
// is true iff p and q come from different documents and their mean-pooled
// texts have cosine below the threshold. Symmetric, false on the diagonal and
// on positive pairs.
std::vector<std::vector<bool>> negative_mask(const std::vector<Vec>& mean_pooled,
                                             double threshold);

// Everything about one batch that does not depend on the topic matrix.
// Representations are laid out as 2M entries: the M first-augmentation texts,
// then the M second-augmentation texts, so p and p+M form a positive pair.
struct BatchContext {
    std::vector<Vec> goal_pooled;
    std::vector<Vec> mean_pooled;
    std::vector<Vec> goal_mixtures; // fixed during training: depends only on centroids
    std::vector<std::vector<bool>> mask;

    int pair_count() const { return static_cast<int>(goal_pooled.size()) / 2; }
};

BatchContext build_batch_context(const std::vector<DocRepresentation>& first,
                                 const std::vector<DocRepresentation>& second,
                                 const GoalMatrix& goals, double negative_threshold);

struct Hyper {
    double temperature = 0.05;        // contrastive sharpness
    double negative_threshold = 0.6;  // mean-pooled cosine below this marks a negative
    double prior_weight = 1.0;        // multiplier on the prior-matching term
    double alignment_weight = 1.0;    // multiplier on the transport term
    double transport_epsilon = 0.05;  // entropic regularization strength
    double dirichlet_alpha = 0.0;     // 0 means 1/K
    int sinkhorn_max_iter = 20000;
    double sinkhorn_tol = 1e-7;
    double mmd_bandwidth = 0.0;       // 0 means per-batch median heuristic
};

// InfoNCE over positive pairs with masked negatives; exactly zero when the
// mask admits no negatives.
double contrastive_loss(const std::vector<Vec>& topic_mixtures,
                        const std::vector<std::vector<bool>>& mask, double temperature);

// Two-sample kernel discrepancy between the inferred mixtures and prior
// draws. bandwidth 0 means the median pairwise distance of the joint set.
double mmd_loss(const std::vector<Vec>& batch, const std::vector<Vec>& prior_samples,
                double bandwidth = 0.0);

// Mean entropic transport distance between each topic mixture and its goal
// mixture. Optionally exposes the per-pair solver results.
double transport_loss(const std::vector<Vec>& topic_mixtures,
                      const std::vector<Vec>& goal_mixtures, const Mat& cost, double epsilon,
                      int max_iter, double tol,
                      std::vector<SinkhornResult>* per_pair = nullptr);

struct LossBreakdown {
    double contrastive = 0.0;
    double prior_match = 0.0;
    double ot = 0.0;
    double total = 0.0;
    Mat grad; // d total / d topic weights, K x H
};

// Knobs used by numeric validation; defaults reproduce training behavior.
struct LossEvalOptions {
    // Reuse these prior draws instead of sampling fresh ones.
    const std::vector<Vec>* fixed_prior = nullptr;
    // Use this kernel bandwidth instead of the per-batch heuristic.
    double fixed_bandwidth = 0.0;
    // Report the entropy-smoothed transport value instead of <plan, cost>.
    // The analytic gradient is exact for the smoothed value, so finite
    // differences must difference the same function.
    bool regularized_ot = false;
};

// One full objective evaluation: all three terms plus the analytic gradient
// with respect to the topic weights (the goal centroids stay frozen). The
// transport gradient uses the converged dual potentials for the mixture path
// and the transport plan for the cost-matrix path.
LossBreakdown total_loss_and_grad(const TopicMatrix& topics, const GoalMatrix& goals,
                                  const BatchContext& batch, const Hyper& hyper,
                                  std::mt19937_64& rng, const LossEvalOptions& options = {});

} // namespace goaltm
