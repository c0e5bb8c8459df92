#include "goaltm/model.hpp"

#include <algorithm>
#include <cmath>

#include "goaltm/errors.hpp"

namespace goaltm {

namespace {

// d cos(u, v) / d u, given the cosine value.
Vec cosine_grad_u(const Vec& u, const Vec& v, double cos_uv) {
    double nu = norm2(u);
    double nv = norm2(v);
    Vec g(u.size());
    for (size_t k = 0; k < u.size(); ++k)
        g[k] = v[k] / (nu * nv) - cos_uv * u[k] / (nu * nu);
    return g;
}

int partner_of(int p, int pair_count) { return p < pair_count ? p + pair_count : p - pair_count; }

void check_batch_size(size_t n, const char* where) {
    if (n < 2 || n % 2 != 0)
        throw DomainError(std::string(where) + ": batch must hold an even count of at least 2");
}

// InfoNCE over every anchor; optionally accumulates d loss / d mixture.
double contrastive_eval(const std::vector<Vec>& mixtures,
                        const std::vector<std::vector<bool>>& mask, double temperature,
                        std::vector<Vec>* grad) {
    check_batch_size(mixtures.size(), "contrastive_loss");
    if (temperature <= 0.0) throw DomainError("contrastive_loss: temperature must be positive");
    int n = static_cast<int>(mixtures.size());
    if (static_cast<int>(mask.size()) != n)
        throw DomainError("contrastive_loss: mask size does not match batch");
    for (const auto& row : mask)
        if (static_cast<int>(row.size()) != n)
            throw DomainError("contrastive_loss: mask must be square");
    int half = n / 2;

    // All pairwise cosines up front; every anchor reuses them.
    Mat cos_pq(n, n, 1.0);
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
            double c = cosine(mixtures[p], mixtures[q]);
            cos_pq.at(p, q) = c;
            cos_pq.at(q, p) = c;
        }

    double loss = 0.0;
    for (int p = 0; p < n; ++p) {
        int pos = partner_of(p, half);
        std::vector<int> others{pos};
        for (int q = 0; q < n; ++q)
            if (mask[p][q]) others.push_back(q);

        double top = cos_pq.at(p, pos) / temperature;
        double peak = top;
        for (int q : others) peak = std::max(peak, cos_pq.at(p, q) / temperature);
        double denom = 0.0;
        for (int q : others) denom += std::exp(cos_pq.at(p, q) / temperature - peak);
        loss += -top + peak + std::log(denom);

        if (grad) {
            for (int q : others) {
                double w = std::exp(cos_pq.at(p, q) / temperature - peak) / denom;
                double dldc = (w - (q == pos ? 1.0 : 0.0)) / temperature;
                double scaled = dldc / n; // the 1/2M in the batch average
                double c = cos_pq.at(p, q);
                axpy((*grad)[p], scaled, cosine_grad_u(mixtures[p], mixtures[q], c));
                axpy((*grad)[q], scaled, cosine_grad_u(mixtures[q], mixtures[p], c));
            }
        }
    }
    return loss / n;
}

// Kernel discrepancy; optionally accumulates d loss / d batch element into
// grad with the given weight.
double mmd_eval(const std::vector<Vec>& batch, const std::vector<Vec>& prior, double bandwidth,
                std::vector<Vec>* grad, double grad_weight) {
    check_batch_size(batch.size(), "mmd_loss");
    if (prior.size() != batch.size())
        throw DomainError("mmd_loss: prior sample count must match the batch");
    int n = static_cast<int>(batch.size());

    double gamma = bandwidth;
    if (gamma <= 0.0) {
        std::vector<Vec> joint = batch;
        joint.insert(joint.end(), prior.begin(), prior.end());
        gamma = median_pairwise_distance(joint);
        if (gamma < 1e-12) gamma = 1.0; // all points coincide; any bandwidth gives k = 1
    }

    double same = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            same += rbf_kernel(batch[i], batch[j], gamma) + rbf_kernel(prior[i], prior[j], gamma);
        }
    double cross = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cross += rbf_kernel(batch[i], prior[j], gamma);

    double pairs = static_cast<double>(n) * (n - 1);
    double cross_scale = 2.0 / (static_cast<double>(n) * n); // 1 / (2 M^2) with n = 2M
    double value = same / pairs - cross_scale * cross;

    if (grad) {
        for (int i = 0; i < n; ++i) {
            Vec g(batch[i].size(), 0.0);
            for (int j = 0; j < n; ++j) {
                if (j != i) {
                    double k = rbf_kernel(batch[i], batch[j], gamma);
                    double coef = (2.0 / pairs) * k / (gamma * gamma);
                    for (size_t d = 0; d < g.size(); ++d)
                        g[d] += -coef * (batch[i][d] - batch[j][d]);
                }
                double kc = rbf_kernel(batch[i], prior[j], gamma);
                double coefc = cross_scale * kc / (gamma * gamma);
                for (size_t d = 0; d < g.size(); ++d)
                    g[d] -= -coefc * (batch[i][d] - prior[j][d]);
            }
            axpy((*grad)[i], grad_weight, g);
        }
    }
    return value;
}

} // namespace

TopicMatrix init_topic_matrix(int topic_count, int dim, uint64_t seed) {
    if (topic_count < 1 || dim < 1)
        throw DomainError("init_topic_matrix: need at least one topic and one dimension");
    TopicMatrix topics;
    topics.seed = seed;
    topics.weights = Mat(topic_count, dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < topic_count; ++k) {
        Vec row(dim);
        double nrm = 0.0;
        while (nrm < 1e-12) { // astronomically unlikely to loop, but stay safe
            for (double& x : row) x = gauss(rng);
            nrm = norm2(row);
        }
        for (double& x : row) x /= nrm;
        topics.weights.set_row(k, row);
    }
    return topics;
}

Vec mixture_over_rows(const Vec& pooled, const Mat& rows) {
    if (rows.rows < 1) throw DomainError("mixture_over_rows: no rows");
    Vec scores(rows.rows);
    for (int k = 0; k < rows.rows; ++k) scores[k] = cosine(pooled, rows.row_vec(k));
    return softmax(scores);
}

Mat alignment_cost(const Mat& topic_rows, const Mat& goal_centroids) {
    if (topic_rows.cols != goal_centroids.cols)
        throw DomainError("alignment_cost: dimension mismatch");
    Mat cost(topic_rows.rows, goal_centroids.rows);
    for (int i = 0; i < topic_rows.rows; ++i)
        for (int j = 0; j < goal_centroids.rows; ++j)
            cost.at(i, j) = 1.0 - cosine(topic_rows.row_vec(i), goal_centroids.row_vec(j));
    return cost;
}

std::vector<std::vector<bool>> negative_mask(const std::vector<Vec>& mean_pooled,
                                             double threshold) {
    check_batch_size(mean_pooled.size(), "negative_mask");
    if (threshold < -1.0 || threshold > 1.0)
        throw DomainError("negative_mask: threshold must lie in [-1, 1]");
    int n = static_cast<int>(mean_pooled.size());
    int half = n / 2;
    std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, false));
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
            if (p % half == q % half) continue; // same document: self or positive pair
            bool eligible = cosine(mean_pooled[p], mean_pooled[q]) < threshold;
            mask[p][q] = eligible;
            mask[q][p] = eligible;
        }
    return mask;
}

BatchContext build_batch_context(const std::vector<DocRepresentation>& first,
                                 const std::vector<DocRepresentation>& second,
                                 const GoalMatrix& goals, double negative_threshold) {
    if (first.empty() || first.size() != second.size())
        throw DomainError("build_batch_context: need matching nonempty augmentation lists");
    BatchContext batch;
    for (const DocRepresentation& rep : first) {
        batch.goal_pooled.push_back(rep.goal_pooled);
        batch.mean_pooled.push_back(rep.mean_pooled);
    }
    for (const DocRepresentation& rep : second) {
        batch.goal_pooled.push_back(rep.goal_pooled);
        batch.mean_pooled.push_back(rep.mean_pooled);
    }
    for (const Vec& pooled : batch.goal_pooled)
        batch.goal_mixtures.push_back(mixture_over_rows(pooled, goals.centroids));
    batch.mask = negative_mask(batch.mean_pooled, negative_threshold);
    return batch;
}

double contrastive_loss(const std::vector<Vec>& topic_mixtures,
                        const std::vector<std::vector<bool>>& mask, double temperature) {
    return contrastive_eval(topic_mixtures, mask, temperature, nullptr);
}

double mmd_loss(const std::vector<Vec>& batch, const std::vector<Vec>& prior_samples,
                double bandwidth) {
    return mmd_eval(batch, prior_samples, bandwidth, nullptr, 0.0);
}

double transport_loss(const std::vector<Vec>& topic_mixtures,
                      const std::vector<Vec>& goal_mixtures, const Mat& cost, double epsilon,
                      int max_iter, double tol, std::vector<SinkhornResult>* per_pair) {
    if (topic_mixtures.empty() || topic_mixtures.size() != goal_mixtures.size())
        throw DomainError("transport_loss: need matching nonempty mixture lists");
    double total = 0.0;
    for (size_t p = 0; p < topic_mixtures.size(); ++p) {
        SinkhornResult r =
            sinkhorn_distance(topic_mixtures[p], goal_mixtures[p], cost, epsilon, max_iter, tol);
        total += r.distance;
        if (per_pair) per_pair->push_back(std::move(r));
    }
    return total / static_cast<double>(topic_mixtures.size());
}

LossBreakdown total_loss_and_grad(const TopicMatrix& topics, const GoalMatrix& goals,
                                  const BatchContext& batch, const Hyper& hyper,
                                  std::mt19937_64& rng, const LossEvalOptions& options) {
    const Mat& weights = topics.weights;
    int k_topics = weights.rows;
    int dim = weights.cols;
    int n = static_cast<int>(batch.goal_pooled.size());
    check_batch_size(n, "total_loss_and_grad");
    if (static_cast<int>(batch.goal_mixtures.size()) != n ||
        static_cast<int>(batch.mean_pooled.size()) != n)
        throw DomainError("total_loss_and_grad: batch context is incomplete");

    // Forward pass: cosine scores and topic mixtures for every representation.
    std::vector<Vec> scores(n), mixtures(n);
    for (int p = 0; p < n; ++p) {
        Vec z(k_topics);
        for (int k = 0; k < k_topics; ++k) z[k] = cosine(batch.goal_pooled[p], weights.row_vec(k));
        scores[p] = z;
        mixtures[p] = softmax(z);
    }

    std::vector<Vec> mixture_grad(n, Vec(k_topics, 0.0));
    LossBreakdown out;

    // Contrastive term (its own 1/2M lives inside contrastive_eval).
    out.contrastive = contrastive_eval(mixtures, batch.mask, hyper.temperature, &mixture_grad);

    // Prior matching term.
    std::vector<Vec> prior_storage;
    const std::vector<Vec>* prior = options.fixed_prior;
    if (!prior) {
        double alpha = hyper.dirichlet_alpha > 0.0 ? hyper.dirichlet_alpha : 1.0 / k_topics;
        Vec alpha_vec(k_topics, alpha);
        for (int i = 0; i < n; ++i) prior_storage.push_back(sample_dirichlet(alpha_vec, rng));
        prior = &prior_storage;
    }
    double bandwidth =
        options.fixed_bandwidth > 0.0 ? options.fixed_bandwidth : hyper.mmd_bandwidth;
    out.prior_match = mmd_eval(mixtures, *prior, bandwidth, &mixture_grad, hyper.prior_weight);

    // Transport term: value from the per-pair solves, gradient from the
    // converged duals (mixture path) and plans (cost path).
    Mat cost = alignment_cost(weights, goals.centroids);
    std::vector<SinkhornResult> pairs;
    pairs.reserve(n);
    double sharp = transport_loss(mixtures, batch.goal_mixtures, cost, hyper.transport_epsilon,
                                  hyper.sinkhorn_max_iter, hyper.sinkhorn_tol, &pairs);
    if (options.regularized_ot) {
        double smooth = 0.0;
        for (const SinkhornResult& r : pairs) smooth += r.regularized_value;
        out.ot = smooth / n;
    } else {
        out.ot = sharp;
    }
    Mat cost_grad(cost.rows, cost.cols, 0.0);
    double pair_scale = hyper.alignment_weight / n;
    for (int p = 0; p < n; ++p) {
        axpy(mixture_grad[p], pair_scale, pairs[p].dual_row);
        for (size_t e = 0; e < cost_grad.data.size(); ++e)
            cost_grad.data[e] += pair_scale * pairs[p].plan.data[e];
    }

    out.total = out.contrastive + hyper.prior_weight * out.prior_match +
                hyper.alignment_weight * out.ot;

    // Backward: mixture gradients through the softmax and cosine scores...
    out.grad = Mat(k_topics, dim, 0.0);
    for (int p = 0; p < n; ++p) {
        double inner = dot(mixtures[p], mixture_grad[p]);
        for (int k = 0; k < k_topics; ++k) {
            double score_grad = mixtures[p][k] * (mixture_grad[p][k] - inner);
            if (score_grad == 0.0) continue;
            Vec row = weights.row_vec(k);
            Vec dcos = cosine_grad_u(row, batch.goal_pooled[p], scores[p][k]);
            for (int d = 0; d < dim; ++d) out.grad.at(k, d) += score_grad * dcos[d];
        }
    }
    // ...plus the cost-matrix path, where cost = 1 - cosine(topic row, centroid).
    for (int i = 0; i < k_topics; ++i) {
        Vec row = weights.row_vec(i);
        for (int j = 0; j < cost.cols; ++j) {
            double cg = cost_grad.at(i, j);
            if (cg == 0.0) continue;
            Vec dcos = cosine_grad_u(row, goals.centroids.row_vec(j), 1.0 - cost.at(i, j));
            for (int d = 0; d < dim; ++d) out.grad.at(i, d) -= cg * dcos[d];
        }
    }
    return out;
}

} // namespace goaltm
