#include <doctest.h>

#include <algorithm>
#include <random>

#include "goaltm/errors.hpp"
#include "goaltm/represent.hpp"

using namespace goaltm;

namespace {

Mat from_rows(const std::vector<Vec>& rows) {
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) m.set_row(static_cast<int>(r), rows[r]);
    return m;
}

Mat random_tokens(int n, int h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat m(n, h);
    for (double& x : m.data) x = gauss(rng);
    return m;
}

} // namespace

TEST_CASE("mean pooling is the row mean") {
    CHECK(mean_pool(from_rows({{3.0, -1.0}})) == Vec{3.0, -1.0});
    CHECK(mean_pool(from_rows({{1.0, 2.0}, {-1.0, -2.0}})) == Vec{0.0, 0.0});
    CHECK(mean_pool(from_rows({{2.0, 0.0}, {0.0, 2.0}})) == Vec{1.0, 1.0});
    CHECK_THROWS_AS(mean_pool(Mat(0, 4)), DomainError);
}

TEST_CASE("a single token gets all the attention") {
    Mat tokens = from_rows({{0.3, 0.4}});
    DocRepresentation rep = goal_attention_pool(tokens, {Vec{1.0, 0.0}});
    REQUIRE(rep.attention.size() == 1);
    CHECK(rep.attention[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.goal_pooled[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(rep.goal_pooled[1] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("equally matched tokens pool to the plain mean") {
    Mat tokens = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<Vec> goals{{1.0, 0.0}, {0.0, 1.0}};
    DocRepresentation rep = goal_attention_pool(tokens, goals);
    CHECK(rep.attention[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.attention[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (int d = 0; d < 2; ++d)
        CHECK(rep.goal_pooled[d] == doctest::Approx(rep.mean_pooled[d]).epsilon(1e-12));
}

TEST_CASE("attention follows the hand-computed softmax") {
    Mat tokens = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    DocRepresentation rep = goal_attention_pool(tokens, {Vec{1.0, 0.0}});
    // scores are [1, 0], so attention is softmax([1, 0])
    CHECK(rep.attention[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(rep.attention[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(rep.goal_pooled[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(rep.goal_pooled[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
}

TEST_CASE("attention weights are a distribution and pooling matches them") {
    Mat tokens = random_tokens(7, 5, 11);
    std::vector<Vec> goals{random_tokens(1, 5, 12).row_vec(0), random_tokens(1, 5, 13).row_vec(0)};
    DocRepresentation rep = goal_attention_pool(tokens, goals);

    double total = 0.0;
    for (double w : rep.attention) {
        CHECK(w >= 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

    for (int c = 0; c < tokens.cols; ++c) {
        double expect = 0.0;
        for (int r = 0; r < tokens.rows; ++r) expect += rep.attention[r] * tokens.at(r, c);
        CHECK(rep.goal_pooled[c] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("permuting tokens leaves the pooled vector unchanged") {
    Mat tokens = random_tokens(6, 4, 21);
    std::vector<Vec> goals{random_tokens(1, 4, 22).row_vec(0)};
    DocRepresentation base = goal_attention_pool(tokens, goals);

    std::vector<int> order{3, 0, 5, 1, 4, 2};
    Mat shuffled(6, 4);
    for (int r = 0; r < 6; ++r) shuffled.set_row(r, tokens.row_vec(order[r]));
    DocRepresentation perm = goal_attention_pool(shuffled, goals);

    for (int d = 0; d < 4; ++d)
        CHECK(perm.goal_pooled[d] == doctest::Approx(base.goal_pooled[d]).epsilon(1e-12));
    for (int r = 0; r < 6; ++r)
        CHECK(perm.attention[r] == doctest::Approx(base.attention[order[r]]).epsilon(1e-12));
}

TEST_CASE("scaling goal vectors by a positive constant changes nothing") {
    Mat tokens = random_tokens(5, 3, 31);
    std::vector<Vec> goals{random_tokens(1, 3, 32).row_vec(0), random_tokens(1, 3, 33).row_vec(0)};
    DocRepresentation base = goal_attention_pool(tokens, goals);

    std::vector<Vec> scaled_goals = goals;
    for (Vec& g : scaled_goals)
        for (double& x : g) x *= 3.75;
    DocRepresentation scaled = goal_attention_pool(tokens, scaled_goals);

    for (size_t r = 0; r < base.attention.size(); ++r)
        CHECK(scaled.attention[r] == doctest::Approx(base.attention[r]).epsilon(1e-12));
}

TEST_CASE("adding a goal can only raise per-token match scores") {
    Mat tokens = random_tokens(8, 4, 41);
    std::vector<Vec> goals{random_tokens(1, 4, 42).row_vec(0)};
    Vec before = max_goal_similarity(tokens, goals);
    goals.push_back(random_tokens(1, 4, 43).row_vec(0));
    Vec after = max_goal_similarity(tokens, goals);
    for (size_t r = 0; r < before.size(); ++r) CHECK(after[r] >= before[r] - 1e-15);
}

TEST_CASE("degenerate inputs are rejected") {
    Mat tokens = from_rows({{1.0, 0.0}});
    CHECK_THROWS_AS(goal_attention_pool(Mat(0, 2), {Vec{1.0, 0.0}}), DomainError);
    CHECK_THROWS_AS(goal_attention_pool(tokens, {}), DomainError);
    CHECK_THROWS_AS(goal_attention_pool(tokens, {Vec{0.0, 0.0}}), DomainError);
    Mat zero_token = from_rows({{0.0, 0.0}});
    CHECK_THROWS_AS(goal_attention_pool(zero_token, {Vec{1.0, 0.0}}), DomainError);
}
