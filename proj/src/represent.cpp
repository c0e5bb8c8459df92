#include "goaltm/represent.hpp"

#include <algorithm>

#include "goaltm/errors.hpp"
#include "goaltm/numeric.hpp"

namespace goaltm {

Vec mean_pool(const Mat& token_embs) {
    if (token_embs.rows < 1) throw DomainError("mean_pool: no token embeddings");
    Vec mean(token_embs.cols, 0.0);
    for (int r = 0; r < token_embs.rows; ++r)
        for (int c = 0; c < token_embs.cols; ++c) mean[c] += token_embs.at(r, c);
    for (double& x : mean) x /= token_embs.rows;
    return mean;
}

Vec max_goal_similarity(const Mat& token_embs, const std::vector<Vec>& goal_embs) {
    if (token_embs.rows < 1) throw DomainError("max_goal_similarity: no token embeddings");
    if (goal_embs.empty()) throw DomainError("max_goal_similarity: no goal vectors");
    Vec scores(token_embs.rows);
    for (int r = 0; r < token_embs.rows; ++r) {
        Vec token = token_embs.row_vec(r);
        double best = -2.0;
        for (const Vec& goal : goal_embs) best = std::max(best, cosine(token, goal));
        scores[r] = best;
    }
    return scores;
}

DocRepresentation goal_attention_pool(const Mat& token_embs, const std::vector<Vec>& goal_embs) {
    DocRepresentation rep;
    rep.attention = softmax(max_goal_similarity(token_embs, goal_embs));
    rep.goal_pooled.assign(token_embs.cols, 0.0);
    for (int r = 0; r < token_embs.rows; ++r)
        for (int c = 0; c < token_embs.cols; ++c)
            rep.goal_pooled[c] += rep.attention[r] * token_embs.at(r, c);
    rep.mean_pooled = mean_pool(token_embs);
    return rep;
}

} // namespace goaltm
