#include "nilc/clustering.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "nilc/numerics.hpp"

namespace nilc {

namespace {

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

ClusterState kmeanspp_init(const EmbeddingMatrix& x, int k, std::uint64_t rng_seed) {
    const int n = x.rows();
    if (k < 1) throw std::invalid_argument("K must be positive");
    if (n < k) throw std::invalid_argument("fewer samples than clusters");

    std::mt19937_64 rng(rng_seed);
    std::vector<int> centers;
    std::vector<char> chosen(n, 0);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

    auto add_center = [&](int idx) {
        centers.push_back(idx);
        chosen[idx] = 1;
        for (int i = 0; i < n; ++i) {
            double d2 = squared_euclidean(x.row(i), x.row(idx));
            if (d2 < min_d2[i]) min_d2[i] = d2;
        }
    };

    add_center(std::min(n - 1, static_cast<int>(unit_draw(rng) * n)));

    while (static_cast<int>(centers.size()) < k) {
        double w = 0.0;
        for (int i = 0; i < n; ++i)
            if (!chosen[i]) w += min_d2[i];
        int pick = -1;
        if (w <= 0.0) {
            // remaining points coincide with chosen ones; uniform fallback
            int unchosen = 0;
            for (int i = 0; i < n; ++i) unchosen += !chosen[i];
            int target = std::min(unchosen - 1, static_cast<int>(unit_draw(rng) * unchosen));
            for (int i = 0, seen = 0; i < n; ++i) {
                if (chosen[i]) continue;
                if (seen++ == target) {
                    pick = i;
                    break;
                }
            }
        } else {
            double r = unit_draw(rng) * w;
            double cum = 0.0;
            int last_positive = -1;
            for (int i = 0; i < n; ++i) {
                if (chosen[i] || min_d2[i] <= 0.0) continue;
                cum += min_d2[i];
                last_positive = i;
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = last_positive;
        }
        add_center(pick);
    }

    ClusterState state;
    state.k = k;
    state.mu.reserve(k);
    for (int c : centers) {
        auto r = x.row(c);
        state.mu.emplace_back(r.begin(), r.end());
    }
    state.theta.assign(k, std::nullopt);
    state.summaries.assign(k, std::nullopt);
    state.assignments.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = squared_euclidean(x.row(i), state.mu[0]);
        for (int c = 1; c < k; ++c) {
            double d = squared_euclidean(x.row(i), state.mu[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        state.assignments[i] = best;
    }
    return state;
}

int nearest_semantic_neighbor(const std::vector<std::optional<Vec>>& theta, int k) {
    const int n = static_cast<int>(theta.size());
    if (n < 2) throw std::invalid_argument("nearest_semantic_neighbor needs K >= 2");
    for (const auto& t : theta)
        if (!t) throw std::invalid_argument("semantic centroids required");
    int best = -1;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        double sim = cosine(*theta[k], *theta[j]);
        if (sim > best_sim) {
            best_sim = sim;
            best = j;
        }
    }
    return best;
}

std::vector<int> compute_theta_neighbors(const ClusterState& state) {
    std::vector<int> nbr(state.k);
    for (int k = 0; k < state.k; ++k) nbr[k] = nearest_semantic_neighbor(state.theta, k);
    return nbr;
}

CostBreakdown joint_cost(std::span<const double> x, int k, const ClusterState& state,
                         const CostContext& ctx) {
    CostBreakdown b;
    b.ed = squared_euclidean(x, state.mu[k]);
    const bool want_semantic = ctx.weights.alpha > 0.0 || ctx.weights.beta > 0.0;
    if (state.theta.size() == static_cast<size_t>(state.k) && state.theta[k].has_value()) {
        b.sc = 1.0 - cosine(x, *state.theta[k]);
        int nbr = ctx.theta_neighbor ? (*ctx.theta_neighbor)[k]
                                     : nearest_semantic_neighbor(state.theta, k);
        b.ss = cosine(x, *state.theta[nbr]);
    } else if (want_semantic) {
        throw std::runtime_error("semantic centroids required");
    }
    if (ctx.mapping && ctx.seeds) b.sp = supervised_term(x, k, *ctx.mapping, *ctx.seeds);
    b.total = b.ed + ctx.weights.alpha * b.sc + ctx.weights.beta * b.ss + ctx.weights.gamma * b.sp;
    return b;
}

BestCluster best_cluster(std::span<const double> x, const ClusterState& state,
                         const CostContext& ctx) {
    BestCluster out;
    for (int k = 0; k < state.k; ++k) {
        CostBreakdown b = joint_cost(x, k, state, ctx);
        if (out.cluster < 0 || b.total < out.cost.total) {
            out.cluster = k;
            out.cost = b;
        }
    }
    return out;
}

AssignResult assign_all(const EmbeddingMatrix& x, const ClusterState& state,
                        const CostContext& ctx) {
    AssignResult res;
    res.assignments.resize(x.rows());
    for (int i = 0; i < x.rows(); ++i) {
        BestCluster b = best_cluster(x.row(i), state, ctx);
        res.assignments[i] = b.cluster;
        res.total_cost += b.cost.total;
    }
    return res;
}

CostBreakdown total_breakdown(const EmbeddingMatrix& x, const ClusterState& state,
                              const CostContext& ctx) {
    CostBreakdown sum;
    for (int i = 0; i < x.rows(); ++i) {
        CostBreakdown b = joint_cost(x.row(i), state.assignments[i], state, ctx);
        sum.ed += b.ed;
        sum.sc += b.sc;
        sum.ss += b.ss;
        sum.sp += b.sp;
        sum.total += b.total;
    }
    return sum;
}

std::vector<Vec> update_euclidean_centroids(const EmbeddingMatrix& x,
                                            std::vector<int>& assignments, int k) {
    const int n = x.rows();
    const int d = x.cols();
    std::vector<Vec> mu(k, Vec(d, 0.0));
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
        int c = assignments[i];
        if (c < 0 || c >= k) throw std::invalid_argument("assignment out of range");
        ++counts[c];
        auto r = x.row(i);
        for (int j = 0; j < d; ++j) mu[c][j] += r[j];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (int j = 0; j < d; ++j) mu[c][j] /= counts[c];
    }

    // Classic repair: re-seed each empty cluster at the sample farthest from
    // its current centroid, never draining a singleton donor.
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < n; ++i) {
            if (counts[assignments[i]] <= 1) continue;
            double dist = squared_euclidean(x.row(i), mu[assignments[i]]);
            if (dist > best_d) {
                best_d = dist;
                best = i;
            }
        }
        if (best < 0) throw std::runtime_error("cannot repair empty cluster");
        int donor = assignments[best];
        assignments[best] = c;
        --counts[donor];
        counts[c] = 1;
        auto r = x.row(best);
        mu[c].assign(r.begin(), r.end());
        // recompute the donor mean without the moved sample
        Vec sum(d, 0.0);
        for (int i = 0; i < n; ++i) {
            if (assignments[i] != donor) continue;
            auto row = x.row(i);
            for (int j = 0; j < d; ++j) sum[j] += row[j];
        }
        for (int j = 0; j < d; ++j) mu[donor][j] = sum[j] / counts[donor];
    }
    return mu;
}

MicroPhaseResult run_micro_phase(const EmbeddingMatrix& x, ClusterState& state,
                                 const CostContext& ctx, int budget, double tol) {
    MicroPhaseResult res;
    for (int step = 0; step < budget; ++step) {
        std::vector<Vec> old_mu = state.mu;
        state.mu = update_euclidean_centroids(x, state.assignments, state.k);
        ++res.steps;
        double shift = 0.0;
        for (int c = 0; c < state.k; ++c) {
            Vec diff(x.cols());
            for (int j = 0; j < x.cols(); ++j) diff[j] = state.mu[c][j] - old_mu[c][j];
            shift = std::max(shift, l2_norm(diff));
        }
        if (shift < tol) break;
        AssignResult ar = assign_all(x, state, ctx);
        state.assignments = std::move(ar.assignments);
        res.objectives.push_back(ar.total_cost);
    }
    return res;
}

}  // namespace nilc
