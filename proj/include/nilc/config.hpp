#pragma once

#include <cstdint>
#include <string>

namespace nilc {

enum class SelectionStrategy { KMeansPP, MAD, MMR, NN };
enum class MappingStrategy { Similarity, LLM };
enum class RunMode { Unsupervised, SemiSupervised };

std::string to_string(SelectionStrategy s);
std::string to_string(MappingStrategy s);
std::string to_string(RunMode m);
SelectionStrategy selection_from_string(const std::string& s);
MappingStrategy mapping_from_string(const std::string& s);
RunMode mode_from_string(const std::string& s);

struct LlmConfig {
    std::string base_url;                 // empty + empty mock_script -> plain echo mock
    std::string path = "/v1/chat/completions";
    std::string model = "mock";
    std::string api_key_env = "NILC_LLM_API_KEY";
    std::string mock_script;              // path to a MockScript JSON file
    std::string template_dir;             // optional prompt template overrides
    int max_retries = 3;
    double temperature = 0.0;
    double backoff_ms = 250.0;
    int max_inflight = 8;
};

struct EncoderConfig {
    enum class Kind { File, Service, Mock };
    Kind kind = Kind::Mock;
    std::string path;                     // NILCEMB1 file (kind=File)
    std::string base_url;                 // embedding service (kind=Service)
    std::string service_path = "/v1/embeddings";
    std::string model = "mock-encoder";
    std::string api_key_env = "NILC_EMBED_API_KEY";
    int batch_size = 64;
    int mock_dim = 32;
    std::uint64_t mock_seed = 0x6e696c63u;
    int max_retries = 3;
    double backoff_ms = 250.0;
};

/// All pipeline knobs. Field names mirror the config-file keys one to one.
struct PipelineConfig {
    int k = 0;                     // required, >= 2
    int t_macro = 3;               // macro iterations T
    int micro_budget = 100;        // max micro steps per phase
    double micro_tol = 1e-4;       // centroid-shift convergence threshold
    double alpha = 0.5;            // semantic-cohesion weight
    double beta = 0.5;             // semantic-separation weight
    double gamma = 0.5;            // soft must-link weight (semi-supervised only)
    int delta = 10;                // hard samples per macro iteration
    int exemplar_count = 10;       // |S_k|
    int k_nbr = -1;                // neighbor clusters; -1 -> min(10, k-1)
    SelectionStrategy selection_strategy = SelectionStrategy::MMR;
    MappingStrategy mapping_strategy = MappingStrategy::Similarity;
    RunMode mode = RunMode::Unsupervised;
    std::uint64_t rng_seed = 42;
    bool normalize_embeddings = false;
    bool include_labeled = false;  // semi-supervised: cluster labeled rows too

    // Ablation toggles (Table-5 axes); all on by default.
    bool enable_dcs = true;
    bool enable_hsr = true;
    bool enable_seeding = true;
    bool enable_sml = true;

    LlmConfig llm;
    EncoderConfig encoder;
};

/// Normalizes defaults (delta=10, |S_k|=10, K_nbr=min(10, K-1)) and rejects
/// invariant violations. Idempotent: validating a validated config is the
/// identity.
PipelineConfig validate_config(PipelineConfig raw);

/// Reads a config file in JSON form or flat key=value form (dotted keys for
/// the llm./encoder. sections). Unknown keys are errors.
PipelineConfig load_config_file(const std::string& path);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace nilc
