#pragma once

#include <string>
#include <vector>

#include "nilc/clustering.hpp"
#include "nilc/llm.hpp"
#include "nilc/types.hpp"

namespace nilc {

/// An utterance flagged for refinement: high assignment entropy plus the
/// semantically closest clusters to its home cluster.
struct HardSample {
    int id = -1;
    double entropy = 0.0;
    int home_cluster = -1;
    std::vector<int> neighbor_clusters;  // excludes home, length min(K_nbr, K-1)
};

/// Top-delta samples by posterior entropy (descending, ties to the lower
/// id). Neighbor clusters rank by cosine similarity of semantic centroids to
/// the home cluster's; without semantic centroids the ranking falls back to
/// Euclidean centroid distance. delta > N clamps to N with a warning.
std::vector<HardSample> rank_uncertain(const EmbeddingMatrix& x, const ClusterState& state,
                                       int delta, int k_nbr);

struct RefineResult {
    std::string text;
    int judged_cluster = -1;
    bool parse_failed = false;
};

/// Judge-then-rewrite call. Renders the refinement prompt from the home and
/// neighbor contexts, asks the LLM, and parses {judged_cluster, rewritten}.
/// After max_parse_retries failed parses the original text comes back
/// unchanged with parse_failed set.
RefineResult refine_sample(LlmClient& llm, const std::string& utterance,
                           const ClusterContext& home, const std::vector<ClusterContext>& neighbors,
                           const PromptTemplates& templates = PromptTemplates::defaults(),
                           int max_parse_retries = 3, int transport_retries = 3,
                           double temperature = 0.0);

enum class UpdateStatus { Accepted, Rejected, InvalidEmbedding };

struct UpdateDecision {
    UpdateStatus status = UpdateStatus::Rejected;
    bool accepted = false;
    int new_cluster = -1;        // the candidate's argmin cluster
    double cost_before = 0.0;    // min_k f on the current row
    double cost_after = 0.0;     // min_k f on the candidate row
};

/// Conditional update: replaces row id with the candidate and moves
/// its assignment to the candidate's argmin cluster iff the candidate's
/// best cost is strictly lower under the currently active cost function.
UpdateDecision conditional_update(EmbeddingMatrix& x, int id, const Vec& candidate,
                                  ClusterState& state, const CostContext& ctx);

/// Full refinement outcome for the run report.
struct RefinementOutcome {
    int id = -1;                 // dataset-level utterance id
    std::string original_text;
    std::string rewritten_text;
    bool accepted = false;
    double cost_before = 0.0;
    double cost_after = 0.0;
    std::string status;          // accepted | rejected | parse_failed | encode_failed
};

}  // namespace nilc
