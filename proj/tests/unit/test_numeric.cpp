#include <doctest.h>

#include <cmath>
#include <random>

#include "goaltm/errors.hpp"
#include "goaltm/numeric.hpp"

using namespace goaltm;

TEST_CASE("softmax basic values") {
    Vec u = softmax({0.0, 0.0});
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(0.5).epsilon(1e-12));

    // sigmoid(1) by hand: e/(e+1)
    Vec s = softmax({1.0, 0.0});
    CHECK(s[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
}

TEST_CASE("softmax is shift invariant and stable for large inputs") {
    Vec a = softmax({1.2, -0.7, 3.1});
    Vec b = softmax({1.2 + 500.0, -0.7 + 500.0, 3.1 + 500.0});
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

    Vec big = softmax({1000.0, 1000.5});
    double sum = big[0] + big[1];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(big[1] > big[0]);
    CHECK(std::isfinite(big[0]));
}

TEST_CASE("softmax rejects bad input") {
    CHECK_THROWS_AS(softmax({}), DomainError);
    CHECK_THROWS_AS(softmax({1.0, std::nan("")}), DomainError);
    CHECK_THROWS_AS(softmax({1.0, std::numeric_limits<double>::infinity()}), DomainError);
}

TEST_CASE("cosine values and clamping") {
    CHECK(cosine({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine({1.0, 2.0}, {2.0, 4.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine({1.0, 2.0}, {2.0, 4.0}) <= 1.0);
    CHECK(cosine({3.0, -1.0}, {-3.0, 1.0}) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(cosine({3.0, -1.0}, {-3.0, 1.0}) >= -1.0);
}

TEST_CASE("cosine scale invariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec a(5), b(5);
        for (int i = 0; i < 5; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        double base = cosine(a, b);
        CHECK(cosine(scaled(a, 3.7), scaled(b, 0.02)) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("cosine rejects zero vectors") {
    CHECK_THROWS_AS(cosine({0.0, 0.0}, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(cosine({1.0, 0.0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("l1_normalize") {
    Vec v = l1_normalize({2.0, 3.0});
    CHECK(v[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK_THROWS_AS(l1_normalize({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(l1_normalize({1.0, -0.5}), DomainError);
}

TEST_CASE("dirichlet draws live on the simplex and are seed-deterministic") {
    std::mt19937_64 rng(42);
    Vec alpha{0.5, 0.5, 0.5};
    Vec d = sample_dirichlet(alpha, rng);
    double sum = 0.0;
    for (double x : d) {
        CHECK(x >= 0.0);
        sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng_a(7), rng_b(7), rng_c(8);
    Vec a = sample_dirichlet(alpha, rng_a);
    Vec b = sample_dirichlet(alpha, rng_b);
    Vec c = sample_dirichlet(alpha, rng_c);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("dirichlet empirical mean approaches alpha proportions") {
    std::mt19937_64 rng(123);
    Vec alpha{2.0, 1.0, 1.0};
    Vec mean(3, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        Vec d = sample_dirichlet(alpha, rng);
        for (int j = 0; j < 3; ++j) mean[j] += d[j] / n;
    }
    CHECK(mean[0] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(mean[1] == doctest::Approx(0.25).epsilon(0.04));
    CHECK(mean[2] == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("dirichlet rejects non-positive alpha") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(sample_dirichlet({1.0, 0.0}, rng), DomainError);
    CHECK_THROWS_AS(sample_dirichlet({}, rng), DomainError);
}

TEST_CASE("rbf kernel values") {
    // |x-y|^2 = 2, gamma = 1 -> exp(-1)
    CHECK(rbf_kernel({0.0, 0.0}, {1.0, 1.0}, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(rbf_kernel({1.0, 2.0}, {1.0, 2.0}, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rbf_kernel({0.0}, {1.0}, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(rbf_kernel({0.0}, {1.0}, 2.0) == rbf_kernel({1.0}, {0.0}, 2.0));
    CHECK_THROWS_AS(rbf_kernel({0.0}, {1.0}, 0.0), DomainError);
}

TEST_CASE("median pairwise distance") {
    std::vector<Vec> three{{0.0}, {1.0}, {3.0}}; // distances 1, 2, 3
    CHECK(median_pairwise_distance(three) == doctest::Approx(2.0).epsilon(1e-12));
    std::vector<Vec> four{{0.0}, {1.0}, {2.0}, {4.0}}; // 1,2,4,1,3,2 -> median 2
    CHECK(median_pairwise_distance(four) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(median_pairwise_distance({{1.0}}), DomainError);
}

TEST_CASE("kmeans recovers separated blobs and is seed-deterministic") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<Vec> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({noise(rng), noise(rng)});
    for (int i = 0; i < 20; ++i) pts.push_back({10.0 + noise(rng), 10.0 + noise(rng)});

    KMeansResult r = kmeans(pts, 2, 99);
    for (int i = 1; i < 20; ++i) CHECK(r.assignments[i] == r.assignments[0]);
    for (int i = 21; i < 40; ++i) CHECK(r.assignments[i] == r.assignments[20]);
    CHECK(r.assignments[0] != r.assignments[20]);

    KMeansResult again = kmeans(pts, 2, 99);
    CHECK(r.assignments == again.assignments);
    CHECK(r.centroids == again.centroids);
}

TEST_CASE("kmeans stops at a fixpoint where centroids are cluster means") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    KMeansResult r = kmeans(pts, 4, 3);
    std::vector<Vec> sums(4, Vec(3, 0.0));
    std::vector<int> counts(4, 0);
    for (size_t i = 0; i < pts.size(); ++i) {
        axpy(sums[r.assignments[i]], 1.0, pts[i]);
        counts[r.assignments[i]]++;
    }
    for (int c = 0; c < 4; ++c) {
        REQUIRE(counts[c] > 0);
        for (int j = 0; j < 3; ++j)
            CHECK(r.centroids[c][j] == doctest::Approx(sums[c][j] / counts[c]).epsilon(1e-9));
    }
}

TEST_CASE("kmeans input validation") {
    std::vector<Vec> pts{{0.0}, {1.0}};
    CHECK_THROWS_AS(kmeans(pts, 3, 1), DomainError);
    CHECK_THROWS_AS(kmeans(pts, 0, 1), DomainError);
}

TEST_CASE("adam single step matches bias-corrected update by hand") {
    Vec p{0.0};
    AdamState st;
    adam_step(p, {1.0}, st, 0.1);
    // mhat = 1, vhat = 1 after correction -> p = -lr / (1 + 1e-8)
    CHECK(std::abs(p[0] + 0.1) <= 1e-8);
    adam_step(p, {1.0}, st, 0.1);
    CHECK(std::abs(p[0] + 0.2) <= 1e-7);
}

TEST_CASE("adam drives a quadratic toward its minimum") {
    Vec p{5.0};
    AdamState st;
    for (int i = 0; i < 4000; ++i) adam_step(p, {2.0 * p[0]}, st, 0.01);
    CHECK(std::abs(p[0]) < 1e-3);
}

TEST_CASE("finite differences on a quadratic") {
    auto f = [](const Vec& x) { return x[0] * x[0] + 3.0 * x[1]; };
    Vec g = finite_diff_grad(f, {1.5, 2.0}, 1e-4);
    CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-9));
}
