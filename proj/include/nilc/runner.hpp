#pragma once

#include <string>

#include <json.hpp>

#include "nilc/pipeline.hpp"

namespace nilc {

struct RunPaths {
    std::string assignments;
    std::string summaries;
    std::string report;
};

/// Builds the pipeline input from a dataset file (plus the configured
/// embedding source), runs the pipeline, and writes assignments.jsonl,
/// summaries.json, and report.json under output_dir. On a post-init failure
/// the partial report is still written before the exception propagates.
RunPaths run_to_files(const PipelineConfig& config, const std::string& dataset_path,
                      const std::string& output_dir);

/// Joins an assignments.jsonl with a labeled dataset by id and computes
/// {nmi, ari, acc, ana}. Throws naming the first offending id on a mismatch.
nlohmann::json eval_files(const std::string& pred_path, const std::string& dataset_path);

}  // namespace nilc
