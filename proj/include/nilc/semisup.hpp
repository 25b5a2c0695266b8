#pragma once

#include <span>
#include <string>
#include <vector>

#include "nilc/config.hpp"
#include "nilc/llm.hpp"
#include "nilc/types.hpp"

namespace nilc {

/// One-to-one partial mapping from the M known intents to clusters,
/// injective on both sides and total over intents.
struct IntentMapping {
    std::vector<int> intent_to_cluster;  // size M
    std::vector<int> cluster_to_intent;  // size K, -1 when unmapped
    MappingStrategy strategy = MappingStrategy::Similarity;
    int iteration = 0;
    bool fallback_used = false;
    std::string fallback_reason;

    /// Validates range and injectivity at construction.
    static IntentMapping build(std::vector<int> intent_to_cluster, int k,
                               MappingStrategy strategy, int iteration);
};

/// Collects the known intents (first-appearance order) and their labeled
/// member ids from the dataset. seed_centroids is left empty; fill with
/// compute_seed_centroids.
LabeledSubset build_labeled_subset(const std::vector<Utterance>& data);

/// Per-intent mean embedding over the labeled members; X is indexed by
/// utterance id. Throws if an intent has zero members.
std::vector<Vec> compute_seed_centroids(const LabeledSubset& labeled, const EmbeddingMatrix& x);

struct SeedAlignResult {
    std::vector<Vec> centroids;          // K rows, M of them replaced by seeds
    std::vector<int> intent_to_cluster;  // the recovered injection pi
};

/// Warm start: Hungarian-matches seeds to initial centroids by cosine
/// dissimilarity and substitutes the matched rows.
SeedAlignResult seed_align(const std::vector<Vec>& initial, const std::vector<Vec>& seeds);

/// Hungarian over M x K cosine dissimilarities between seed centroids and
/// the given per-cluster targets (semantic centroids when available).
IntentMapping map_similarity(const std::vector<Vec>& seeds, const std::vector<Vec>& targets,
                             int iteration);

/// LLM-driven intent-to-cluster mapping; any parse or validation failure
/// after the retry budget falls back to map_similarity over
/// fallback_targets (logged on the returned mapping).
IntentMapping map_llm(LlmClient& llm, const std::vector<std::string>& intents,
                      const std::vector<std::string>& summaries, const std::vector<Vec>& seeds,
                      const std::vector<Vec>& fallback_targets, int iteration,
                      const PromptTemplates& templates = PromptTemplates::defaults(),
                      int max_parse_retries = 3, int transport_retries = 3,
                      double temperature = 0.0);

/// Soft must-link term: 1 - cos(x, mu*_j) when intent j maps to cluster k,
/// 0 when cluster k is unmapped.
double supervised_term(std::span<const double> x, int k, const IntentMapping& mapping,
                       const std::vector<Vec>& seeds);

}  // namespace nilc
