#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nilc/semisup.hpp"
#include "nilc/types.hpp"

namespace nilc {

struct CostWeights {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Per-term decomposition of the joint assignment cost. ed/sc/ss/sp are the
/// raw terms; total = ed + alpha*sc + beta*ss + gamma*sp.
struct CostBreakdown {
    double ed = 0.0;
    double sc = 0.0;
    double ss = 0.0;
    double sp = 0.0;
    double total = 0.0;
};

/// Everything the cost function needs beyond the cluster state itself.
/// theta_neighbor caches nearest_semantic_neighbor per cluster for the
/// current macro iteration; mapping/seeds activate the supervised term.
struct CostContext {
    CostWeights weights;
    const std::vector<int>* theta_neighbor = nullptr;
    const IntentMapping* mapping = nullptr;
    const std::vector<Vec>* seeds = nullptr;
};

/// D^2-weighted seeding plus nearest-centroid initial assignments.
/// Deterministic for a given rng_seed. Draw protocol (relied on by tests):
/// mt19937_64(seed); each uniform draw is (rng() >> 11) * 2^-53; the first
/// centroid is floor(u*N); each next centroid is picked by walking ids
/// ascending until the cumulative D^2 weight exceeds u*W, falling back to a
/// uniform pick over unchosen ids when all weights vanish.
ClusterState kmeanspp_init(const EmbeddingMatrix& x, int k, std::uint64_t rng_seed);

/// argmax over j != k of cos(theta_k, theta_j); ties take the lower index.
int nearest_semantic_neighbor(const std::vector<std::optional<Vec>>& theta, int k);

/// Neighbor cache for all clusters (requires fully populated theta, K >= 2).
std::vector<int> compute_theta_neighbors(const ClusterState& state);

CostBreakdown joint_cost(std::span<const double> x, int k, const ClusterState& state,
                         const CostContext& ctx);

struct BestCluster {
    int cluster = -1;
    CostBreakdown cost;
};

/// argmin-cost cluster for one sample; ties take the lower index.
BestCluster best_cluster(std::span<const double> x, const ClusterState& state,
                         const CostContext& ctx);

struct AssignResult {
    std::vector<int> assignments;
    double total_cost = 0.0;
};

AssignResult assign_all(const EmbeddingMatrix& x, const ClusterState& state,
                        const CostContext& ctx);

/// Component-wise sums of the breakdown at the current assignments.
CostBreakdown total_breakdown(const EmbeddingMatrix& x, const ClusterState& state,
                              const CostContext& ctx);

/// Mean member rows per cluster. Clusters that went
/// empty are repaired by re-seeding at the sample farthest from its current
/// centroid, which moves that sample's assignment; hence assignments is
/// taken by reference.
std::vector<Vec> update_euclidean_centroids(const EmbeddingMatrix& x,
                                            std::vector<int>& assignments, int k);

struct MicroPhaseResult {
    int steps = 0;                   // centroid updates performed
    std::vector<double> objectives;  // total cost after each assign step
};

/// Standard K-Means alternation with semantic centroids held frozen. Stops
/// when the max centroid shift drops below tol or the budget runs out.
MicroPhaseResult run_micro_phase(const EmbeddingMatrix& x, ClusterState& state,
                                 const CostContext& ctx, int budget, double tol);

}  // namespace nilc
