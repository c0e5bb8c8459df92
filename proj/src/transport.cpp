#include <algorithm>
#include <cmath>
#include <limits>

#include "goaltm/errors.hpp"
#include "goaltm/numeric.hpp"

namespace goaltm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_marginal(const Vec& m, const char* name) {
    double sum = 0.0;
    for (double x : m) {
        if (!(x >= 0.0)) throw DomainError(std::string(name) + ": negative or NaN entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw DomainError(std::string(name) + ": does not sum to 1");
}

Vec normalized(const Vec& m) {
    double sum = 0.0;
    for (double x : m) sum += x;
    Vec out(m);
    for (double& x : out) x /= sum;
    return out;
}

// log(sum(exp(v))) over finite entries; -inf if none.
double logsumexp(const Vec& v) {
    double mx = kNegInf;
    for (double x : v) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

} // namespace

SinkhornResult sinkhorn_distance(const Vec& mu_in, const Vec& nu_in, const Mat& cost,
                                 double epsilon, int max_iter, double tol) {
    if (epsilon <= 0.0) throw DomainError("sinkhorn_distance: epsilon must be positive");
    if (max_iter <= 0) throw DomainError("sinkhorn_distance: max_iter must be positive");
    if (cost.rows != static_cast<int>(mu_in.size()) || cost.cols != static_cast<int>(nu_in.size()))
        throw DomainError("sinkhorn_distance: cost shape mismatch");
    for (double c : cost.data)
        if (!std::isfinite(c)) throw DomainError("sinkhorn_distance: non-finite cost");
    check_marginal(mu_in, "sinkhorn_distance: mu");
    check_marginal(nu_in, "sinkhorn_distance: nu");
    Vec mu = normalized(mu_in);
    Vec nu = normalized(nu_in);

    const int m = cost.rows;
    const int n = cost.cols;
    Vec log_mu(m), log_nu(n);
    for (int i = 0; i < m; ++i) log_mu[i] = mu[i] > 0.0 ? std::log(mu[i]) : kNegInf;
    for (int j = 0; j < n; ++j) log_nu[j] = nu[j] > 0.0 ? std::log(nu[j]) : kNegInf;

    Vec f(m, 0.0), g(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (mu[i] == 0.0) f[i] = kNegInf;
    for (int j = 0; j < n; ++j)
        if (nu[j] == 0.0) g[j] = kNegInf;

    SinkhornResult res;
    Vec buf(std::max(m, n));
    auto sweep = [&](double eps_run) {
        for (int i = 0; i < m; ++i) {
            if (mu[i] == 0.0) continue;
            buf.resize(n);
            for (int j = 0; j < n; ++j) buf[j] = (g[j] - cost.at(i, j)) / eps_run;
            f[i] = eps_run * (log_mu[i] - logsumexp(buf));
        }
        for (int j = 0; j < n; ++j) {
            if (nu[j] == 0.0) continue;
            buf.resize(m);
            for (int i = 0; i < m; ++i) buf[i] = (f[i] - cost.at(i, j)) / eps_run;
            g[j] = eps_run * (log_nu[j] - logsumexp(buf));
        }
    };

    // Sharp regularization converges painfully slowly from cold duals, so a
    // short geometric ladder of cruder passes warms them up first. The ladder
    // never spends more than half the iteration budget, which keeps tiny
    // budgets (and their non-convergence reporting) exactly as before.
    double max_cost = 0.0;
    for (double c : cost.data) max_cost = std::max(max_cost, std::abs(c));
    int used = 0;
    if (max_cost > 0.0 && epsilon < 0.1 * max_cost) {
        const int warm_cap = max_iter / 2;
        constexpr int kStageSweeps = 8;
        constexpr double kStageShrink = 0.2;
        for (double stage = 0.5 * max_cost; stage > epsilon && used + kStageSweeps <= warm_cap;
             stage *= kStageShrink) {
            for (int it = 0; it < kStageSweeps; ++it) sweep(stage);
            used += kStageSweeps;
        }
        res.iterations = used;
    }

    for (int iter = used + 1; iter <= max_iter; ++iter) {
        res.iterations = iter;
        sweep(epsilon);
        // Columns are exact right after the g update; convergence is judged
        // on the row marginals.
        double viol = 0.0;
        for (int i = 0; i < m; ++i) {
            double r = 0.0;
            if (mu[i] > 0.0)
                for (int j = 0; j < n; ++j) r += std::exp((f[i] + g[j] - cost.at(i, j)) / epsilon);
            viol = std::max(viol, std::abs(r - mu[i]));
        }
        if (viol <= tol) {
            res.converged = true;
            break;
        }
    }

    res.plan = Mat(m, n, 0.0);
    double dist = 0.0;
    for (int i = 0; i < m; ++i) {
        if (mu[i] == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            if (nu[j] == 0.0) continue;
            double p = std::exp((f[i] + g[j] - cost.at(i, j)) / epsilon);
            res.plan.at(i, j) = p;
            dist += p * cost.at(i, j);
        }
    }
    res.distance = dist;

    double dual = -epsilon;
    for (int i = 0; i < m; ++i)
        if (mu[i] > 0.0) dual += f[i] * mu[i];
    for (int j = 0; j < n; ++j)
        if (nu[j] > 0.0) dual += g[j] * nu[j];
    res.regularized_value = dual;

    // Shift duals so the row potentials of supported atoms average to zero.
    double shift = 0.0;
    int supported = 0;
    for (int i = 0; i < m; ++i)
        if (mu[i] > 0.0) {
            shift += f[i];
            ++supported;
        }
    shift /= std::max(1, supported);
    for (int i = 0; i < m; ++i)
        if (mu[i] > 0.0) f[i] -= shift;
    for (int j = 0; j < n; ++j)
        if (nu[j] > 0.0) g[j] += shift;
    res.dual_row = std::move(f);
    res.dual_col = std::move(g);
    return res;
}

namespace {

// Rollback-friendly union-find used by the basis enumeration below.
struct DSU {
    std::vector<int> parent;
    explicit DSU(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) const {
        while (parent[x] != x) x = parent[x];
        return x;
    }
    // Returns the child root that got re-parented, or -1 if already joined.
    int join(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return -1;
        parent[ra] = rb;
        return ra;
    }
    void undo(int child) { parent[child] = child; }
};

struct BasisSearch {
    int m, n;
    const Mat* cost;
    Vec mu, nu;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> edges; // chosen (row, col) pairs

    // Solve the unique flow on the chosen spanning tree by repeatedly peeling
    // leaves; returns the cost or +inf if any flow is negative. Runs once per
    // candidate tree (hundreds of thousands for 5x5), so all scratch space is
    // stack arrays sized by the 5-atom cap.
    double tree_cost() const {
        const int nodes = m + n; // at most 10
        double need[10];
        int degree[10];
        for (int i = 0; i < m; ++i) need[i] = mu[i];
        for (int j = 0; j < n; ++j) need[m + j] = nu[j];
        for (int v = 0; v < nodes; ++v) degree[v] = 0;
        bool edge_done[9] = {};
        for (const auto& [i, j] : edges) {
            degree[i]++;
            degree[m + j]++;
        }
        int leaves[24];
        int top = 0;
        for (int v = 0; v < nodes; ++v)
            if (degree[v] == 1) leaves[top++] = v;
        double total = 0.0;
        size_t processed = 0;
        while (top > 0) {
            int v = leaves[--top];
            if (degree[v] != 1) continue; // stale entry
            int eidx = -1;
            for (size_t e = 0; e < edges.size(); ++e) {
                if (edge_done[e]) continue;
                if (edges[e].first == v || m + edges[e].second == v) {
                    eidx = static_cast<int>(e);
                    break;
                }
            }
            if (eidx < 0) break;
            double flow = need[v];
            if (flow < -1e-9) return std::numeric_limits<double>::infinity();
            if (flow < 0.0) flow = 0.0;
            total += flow * cost->at(edges[eidx].first, edges[eidx].second);
            edge_done[eidx] = true;
            processed++;
            int other = edges[eidx].first == v ? m + edges[eidx].second : edges[eidx].first;
            need[other] -= flow;
            degree[v] = 0;
            if (--degree[other] == 1) leaves[top++] = other;
        }
        if (processed != edges.size()) return std::numeric_limits<double>::infinity();
        return total;
    }

    void search(int next_edge, int chosen, DSU& dsu) {
        int wanted = m + n - 1;
        if (chosen == wanted) {
            best = std::min(best, tree_cost());
            return;
        }
        int total_edges = m * n;
        if (total_edges - next_edge < wanted - chosen) return;
        if (next_edge >= total_edges) return;
        int i = next_edge / n;
        int j = next_edge % n;
        int undo = dsu.join(i, m + j);
        if (undo >= 0) {
            edges.emplace_back(i, j);
            search(next_edge + 1, chosen + 1, dsu);
            edges.pop_back();
            dsu.undo(undo);
        }
        search(next_edge + 1, chosen, dsu);
    }
};

} // namespace

double exact_ot_small(const Vec& mu_in, const Vec& nu_in, const Mat& cost) {
    if (mu_in.size() > 5 || nu_in.size() > 5)
        throw UnsupportedError("exact_ot_small: marginals larger than 5 atoms");
    if (mu_in.empty() || nu_in.empty()) throw DomainError("exact_ot_small: empty marginal");
    if (cost.rows != static_cast<int>(mu_in.size()) || cost.cols != static_cast<int>(nu_in.size()))
        throw DomainError("exact_ot_small: cost shape mismatch");
    check_marginal(mu_in, "exact_ot_small: mu");
    check_marginal(nu_in, "exact_ot_small: nu");

    BasisSearch s;
    s.m = static_cast<int>(mu_in.size());
    s.n = static_cast<int>(nu_in.size());
    s.cost = &cost;
    s.mu = normalized(mu_in);
    s.nu = normalized(nu_in);
    s.edges.reserve(static_cast<size_t>(s.m + s.n - 1));
    DSU dsu(s.m + s.n);
    s.search(0, 0, dsu);
    if (!std::isfinite(s.best)) throw DomainError("exact_ot_small: no feasible basis found");
    return s.best;
}

} // namespace goaltm
