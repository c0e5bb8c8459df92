#pragma once

#include <vector>

#include "goaltm/vecmat.hpp"

namespace goaltm {

// A document pooled two ways: attention-weighted by goal relevance, and a
// plain mean. The attention weights are kept for inspection.
struct DocRepresentation {
    Vec goal_pooled;
    Vec mean_pooled;
    Vec attention; // per token, nonnegative, sums to 1
};

// Arithmetic mean of the rows.
Vec mean_pool(const Mat& token_embs);

// For each token, its best cosine similarity against any goal vector.
Vec max_goal_similarity(const Mat& token_embs, const std::vector<Vec>& goal_embs);

// Pools token embeddings with softmax attention over max goal similarity, so
// tokens aligned with at least one goal dominate the representation.
DocRepresentation goal_attention_pool(const Mat& token_embs, const std::vector<Vec>& goal_embs);

} // namespace goaltm
