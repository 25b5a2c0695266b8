#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nilc/clustering.hpp"
#include "nilc/encoder.hpp"
#include "nilc/eval.hpp"
#include "nilc/hsr.hpp"
#include "nilc/llm.hpp"

namespace nilc {

struct MappingRecord {
    int iteration = 0;
    std::string strategy;
    std::vector<std::pair<std::string, int>> pairs;  // intent label -> cluster
    bool fallback_used = false;
    std::string fallback_reason;
};

struct IterationReport {
    int iteration = 0;
    double objective_after_assign = 0.0;
    std::vector<double> micro_objectives;  // total cost after each micro assign step
    int micro_steps = 0;
    CostBreakdown cost_sums;  // component sums at the iteration's final state
    std::vector<RefinementOutcome> hard_samples;
    std::optional<MappingRecord> mapping;
    std::optional<Metrics> metrics;
    double wall_ms = 0.0;
};

struct RunReport {
    nlohmann::json config_snapshot;
    bool dcs = true, hsr = true, seeding = true, sml = true;
    std::optional<std::vector<std::pair<std::string, int>>> seed_alignment;
    std::vector<IterationReport> iterations;
    std::vector<LlmCallRecord> llm_calls;
    std::optional<Metrics> final_metrics;
    double wall_ms = 0.0;  // timings only; excluded from determinism checks
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
nlohmann::json report_to_json(const RunReport& report);

/// The clustered pool. X rows, texts, ids, and labels are parallel; ids are
/// dataset-level utterance ids. labeled carries the semi-supervised side
/// channel (seed_centroids already computed over the full matrix).
struct PipelineInput {
    EmbeddingMatrix X;
    std::vector<std::string> texts;
    std::vector<int> ids;
    std::vector<std::optional<std::string>> labels;
    std::optional<LabeledSubset> labeled;
};

struct ClusterSummaryOut {
    int cluster = -1;
    std::string summary;
    std::vector<int> exemplar_ids;  // dataset-level ids
};

struct PipelineResult {
    std::vector<int> assignments;  // pool order
    std::vector<ClusterSummaryOut> summaries;
    RunReport report;
    ClusterState final_state;
};

/// Thrown when the run dies after initialization; carries the partial report.
struct PipelineAbort : std::runtime_error {
    RunReport partial;
    PipelineAbort(const std::string& msg, RunReport r)
        : std::runtime_error(msg), partial(std::move(r)) {}
};

/// Full iterative run: K-Means++ init, optional seeding, then T macro
/// iterations of centroid refresh, exemplar selection, summary generation,
/// optional intent mapping, joint-cost assignment, a frozen-theta micro
/// phase, and hard-sample refinement. Deterministic given rng_seed and a
/// mock LLM.
PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config,
                            LlmClient& llm, EncoderStack& encoder);

}  // namespace nilc
