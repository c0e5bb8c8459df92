#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "goaltm/vecmat.hpp"

namespace goaltm {

// Max-stabilized softmax. Throws DomainError on empty input or non-finite
// entries.
Vec softmax(const Vec& z);

// Cosine similarity, clamped to [-1, 1]. Zero-norm input is a DomainError.
double cosine(const Vec& u, const Vec& v);

// Normalizes a non-negative vector to sum 1. All-zero input is a DomainError.
Vec l1_normalize(const Vec& v);

// One draw from Dirichlet(alpha) via normalized Gamma variates.
Vec sample_dirichlet(const Vec& alpha, std::mt19937_64& rng);

// exp(-|x - y|^2 / (2 gamma^2))
double rbf_kernel(const Vec& x, const Vec& y, double gamma);

// Median of pairwise Euclidean distances; the usual kernel-bandwidth
// heuristic. Requires at least two points.
double median_pairwise_distance(const std::vector<Vec>& points);

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<Vec> centroids;
    int iterations = 0;
};

// Lloyd's algorithm with seeded k-means++ initialization. Runs until the
// assignment vector stops changing or max_iter passes. An emptied cluster is
// reseeded to the point currently farthest from its assigned centroid.
KMeansResult kmeans(const std::vector<Vec>& points, int k, uint64_t seed, int max_iter = 100);

struct SinkhornResult {
    double distance = 0.0;        // <plan, cost>, no entropy term
    double regularized_value = 0.0; // dual objective of the entropic problem
    Mat plan;
    Vec dual_row;
    Vec dual_col;
    int iterations = 0;
    bool converged = false;
};

// Entropic optimal transport between two distributions over the same number
// of atoms, solved by log-domain Sinkhorn iterations with a short annealing
// warm-up at larger regularization (counted in iterations). mu and nu must
// each sum to 1 within 1e-6. Row duals are returned shifted to zero mean (the
// column duals absorb the shift), which leaves the plan and both reported
// values unchanged. Convergence means the worst row-marginal violation of the
// plan is at most tol, always judged at the requested epsilon.
SinkhornResult sinkhorn_distance(const Vec& mu, const Vec& nu, const Mat& cost,
                                 double epsilon, int max_iter = 500, double tol = 1e-6);

// Exact transport cost for tiny problems (each marginal at most 5 atoms),
// found by enumerating every spanning-tree basis of the transport polytope.
// Intended as a test oracle; throws UnsupportedError beyond the size cap.
double exact_ot_small(const Vec& mu, const Vec& nu, const Mat& cost);

struct AdamState {
    Vec m;
    Vec v;
    int64_t t = 0;
};

// One bias-corrected Adam update, in place.
void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr = 2e-3,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Central finite differences, one coordinate at a time.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-4);

} // namespace goaltm
