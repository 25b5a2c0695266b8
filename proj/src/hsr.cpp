#include "nilc/hsr.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "nilc/numerics.hpp"

namespace nilc {

namespace {

// K_nbr clusters most similar to home: cosine over semantic centroids when
// they exist, otherwise nearest Euclidean centroids.
std::vector<int> neighbor_clusters_of(const ClusterState& state, int home, int k_nbr) {
    struct Scored {
        int cluster;
        double score;
    };
    std::vector<Scored> scored;
    const bool semantic = state.has_theta();
    for (int j = 0; j < state.k; ++j) {
        if (j == home) continue;
        double s = semantic ? cosine(*state.theta[home], *state.theta[j])
                            : -squared_euclidean(state.mu[home], state.mu[j]);
        scored.push_back({j, s});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.cluster < b.cluster;
    });
    int take = std::min<int>(k_nbr, static_cast<int>(scored.size()));
    std::vector<int> out;
    out.reserve(take);
    for (int i = 0; i < take; ++i) out.push_back(scored[i].cluster);
    return out;
}

}  // namespace

std::vector<HardSample> rank_uncertain(const EmbeddingMatrix& x, const ClusterState& state,
                                       int delta, int k_nbr) {
    const int n = x.rows();
    if (delta <= 0) return {};
    if (delta > n) {
        std::cerr << "[nilc] warning: delta " << delta << " exceeds sample count " << n
                  << ", clamping\n";
        delta = n;
    }
    std::vector<HardSample> all(n);
    for (int i = 0; i < n; ++i) {
        auto p = gaussian_posteriors(x.row(i), state.mu);
        all[i].id = i;
        all[i].entropy = entropy(p);
        all[i].home_cluster = state.assignments[i];
    }
    std::stable_sort(all.begin(), all.end(), [](const HardSample& a, const HardSample& b) {
        if (a.entropy != b.entropy) return a.entropy > b.entropy;
        return a.id < b.id;
    });
    all.resize(delta);

    std::vector<std::vector<int>> nbr_cache(state.k);
    for (auto& h : all) {
        if (nbr_cache[h.home_cluster].empty() && state.k > 1)
            nbr_cache[h.home_cluster] = neighbor_clusters_of(state, h.home_cluster, k_nbr);
        h.neighbor_clusters = nbr_cache[h.home_cluster];
    }
    return all;
}

RefineResult refine_sample(LlmClient& llm, const std::string& utterance,
                           const ClusterContext& home, const std::vector<ClusterContext>& neighbors,
                           const PromptTemplates& templates, int max_parse_retries,
                           int transport_retries, double temperature) {
    PromptRequest req = render_refine_prompt(utterance, home, neighbors, templates);
    req.max_retries = transport_retries;
    req.temperature = temperature;
    for (int attempt = 0; attempt < max_parse_retries; ++attempt) {
        std::string response = llm.complete(req);
        try {
            auto [judged, rewritten] = parse_refine_response(response);
            RefineResult r;
            r.text = rewritten;
            r.judged_cluster = judged;
            return r;
        } catch (const ParseError&) {
            // retry, then give up below
        }
    }
    RefineResult r;
    r.text = utterance;
    r.parse_failed = true;
    return r;
}

UpdateDecision conditional_update(EmbeddingMatrix& x, int id, const Vec& candidate,
                                  ClusterState& state, const CostContext& ctx) {
    UpdateDecision d;
    BestCluster before = best_cluster(x.row(id), state, ctx);
    d.cost_before = before.cost.total;
    for (double v : candidate) {
        if (!std::isfinite(v)) {
            d.status = UpdateStatus::InvalidEmbedding;
            d.cost_after = d.cost_before;
            return d;
        }
    }
    if (static_cast<int>(candidate.size()) != x.cols()) {
        d.status = UpdateStatus::InvalidEmbedding;
        d.cost_after = d.cost_before;
        return d;
    }
    BestCluster after = best_cluster(candidate, state, ctx);
    d.cost_after = after.cost.total;
    d.new_cluster = after.cluster;
    if (after.cost.total < before.cost.total) {
        x.set_row(id, candidate);
        state.assignments[id] = after.cluster;
        d.status = UpdateStatus::Accepted;
        d.accepted = true;
    }
    return d;
}

}  // namespace nilc
