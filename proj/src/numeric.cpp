#include "goaltm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "goaltm/errors.hpp"

namespace goaltm {

Vec softmax(const Vec& z) {
    if (z.empty()) throw DomainError("softmax: empty input");
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : z) {
        if (!std::isfinite(x)) throw DomainError("softmax: non-finite input");
        mx = std::max(mx, x);
    }
    Vec out(z.size());
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DomainError("cosine: size mismatch");
    double nu = norm2(u);
    double nv = norm2(v);
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero-norm vector");
    double c = dot(u, v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

Vec l1_normalize(const Vec& v) {
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0) throw DomainError("l1_normalize: negative entry");
        sum += x;
    }
    if (sum == 0.0) throw DomainError("l1_normalize: zero vector");
    Vec out(v);
    for (double& x : out) x /= sum;
    return out;
}

Vec sample_dirichlet(const Vec& alpha, std::mt19937_64& rng) {
    if (alpha.empty()) throw DomainError("sample_dirichlet: empty alpha");
    Vec out(alpha.size());
    double sum = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] <= 0.0) throw DomainError("sample_dirichlet: alpha must be positive");
        std::gamma_distribution<double> g(alpha[i], 1.0);
        out[i] = g(rng);
        sum += out[i];
    }
    if (sum <= 0.0) {
        // All Gamma draws underflowed; fall back to uniform rather than NaN.
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return out;
    }
    for (double& x : out) x /= sum;
    return out;
}

double rbf_kernel(const Vec& x, const Vec& y, double gamma) {
    if (gamma <= 0.0) throw DomainError("rbf_kernel: gamma must be positive");
    return std::exp(-squared_distance(x, y) / (2.0 * gamma * gamma));
}

double median_pairwise_distance(const std::vector<Vec>& points) {
    if (points.size() < 2) throw DomainError("median_pairwise_distance: need at least two points");
    std::vector<double> d;
    d.reserve(points.size() * (points.size() - 1) / 2);
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j)
            d.push_back(std::sqrt(squared_distance(points[i], points[j])));
    std::sort(d.begin(), d.end());
    size_t n = d.size();
    if (n % 2 == 1) return d[n / 2];
    return 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

namespace {

int nearest_centroid(const Vec& p, const std::vector<Vec>& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<Vec> kmeanspp_init(const std::vector<Vec>& points, int k, std::mt19937_64& rng) {
    std::vector<Vec> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<size_t> first(0, points.size() - 1);
    centroids.push_back(points[first(rng)]);
    std::vector<double> d2(points.size());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec& c : centroids) best = std::min(best, squared_distance(points[i], c));
            d2[i] = best;
            total += best;
        }
        size_t pick;
        if (total <= 0.0) {
            // All remaining points coincide with chosen centroids.
            std::uniform_int_distribution<size_t> any(0, points.size() - 1);
            pick = any(rng);
        } else {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            double acc = 0.0;
            pick = points.size() - 1;
            for (size_t i = 0; i < points.size(); ++i) {
                acc += d2[i];
                if (r <= acc) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

} // namespace

KMeansResult kmeans(const std::vector<Vec>& points, int k, uint64_t seed, int max_iter) {
    if (k <= 0) throw DomainError("kmeans: k must be positive");
    if (points.size() < static_cast<size_t>(k)) throw DomainError("kmeans: fewer points than clusters");
    size_t dim = points[0].size();
    for (const Vec& p : points)
        if (p.size() != dim) throw DomainError("kmeans: inconsistent dimensions");

    std::mt19937_64 rng(seed);
    KMeansResult res;
    res.centroids = kmeanspp_init(points, k, rng);
    res.assignments.assign(points.size(), -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;
        bool changed = false;
        for (size_t i = 0; i < points.size(); ++i) {
            int a = nearest_centroid(points[i], res.centroids);
            if (a != res.assignments[i]) {
                res.assignments[i] = a;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<Vec> sums(k, Vec(dim, 0.0));
        std::vector<int> counts(k, 0);
        for (size_t i = 0; i < points.size(); ++i) {
            axpy(sums[res.assignments[i]], 1.0, points[i]);
            counts[res.assignments[i]]++;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reseed an emptied cluster at the point farthest from its
                // current centroid, and move that point over.
                size_t far_i = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < points.size(); ++i) {
                    double d = squared_distance(points[i], res.centroids[res.assignments[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                res.centroids[c] = points[far_i];
                res.assignments[far_i] = c;
                continue;
            }
            for (size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / counts[c];
        }
    }
    return res;
}

void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
    if (params.size() != grad.size()) throw DomainError("adam_step: size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) throw DomainError("adam_step: state size mismatch");
    state.t += 1;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    if (h <= 0.0) throw DomainError("finite_diff_grad: h must be positive");
    Vec g(x.size());
    Vec probe(x);
    for (size_t i = 0; i < x.size(); ++i) {
        double orig = probe[i];
        probe[i] = orig + h;
        double fp = f(probe);
        probe[i] = orig - h;
        double fm = f(probe);
        probe[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace goaltm
