#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nilc/config.hpp"

namespace nilc {

enum class PromptKind { Summary, Refine, Map };
std::string to_string(PromptKind k);

struct PromptRequest {
    PromptKind kind = PromptKind::Summary;
    std::string body;
    std::string echo_payload;  // what a mock's echo default answers with
    int max_retries = 3;
    double temperature = 0.0;
};

/// Prompt wording. Defaults are compiled in; a template_dir with
/// summary.txt / refine.txt / map.txt overrides individual templates.
/// Placeholders: {{exemplars}}, {{home_block}}, {{neighbor_blocks}},
/// {{utterance}}, {{intents}}, {{summaries}}.
struct PromptTemplates {
    std::string summary;
    std::string refine;
    std::string map;

    static const PromptTemplates& defaults();
    static PromptTemplates load(const std::string& dir);
};

/// Summary + exemplar texts of one cluster, as shown to the LLM.
struct ClusterContext {
    int cluster = -1;
    std::string summary;
    std::vector<std::string> exemplar_texts;
};

PromptRequest render_summary_prompt(const std::vector<std::string>& exemplars,
                                    const PromptTemplates& t = PromptTemplates::defaults());
PromptRequest render_refine_prompt(const std::string& utterance, const ClusterContext& home,
                                   const std::vector<ClusterContext>& neighbors,
                                   const PromptTemplates& t = PromptTemplates::defaults());
PromptRequest render_map_prompt(const std::vector<std::string>& intents,
                                const std::vector<std::string>& summaries,
                                const PromptTemplates& t = PromptTemplates::defaults());

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Extracts {judged_cluster, rewritten} from a completion; tolerates fenced
/// code blocks and surrounding prose. judged_cluster may be -1 (no judgment).
std::pair<int, std::string> parse_refine_response(const std::string& text);

/// Extracts an intent-label -> cluster-index object. Structural validation
/// only; injectivity and completeness are the caller's concern.
std::map<std::string, int> parse_map_response(const std::string& text, int m, int k);

struct MockRule {
    PromptKind kind = PromptKind::Summary;
    std::string contains;  // substring matched against the prompt body
    std::string response;
};

/// Deterministic scripted LLM stand-in. First matching rule wins; without a
/// match the default applies (echo the request's designated payload, or a
/// fixed text).
struct MockScript {
    enum class Default { Echo, Fixed };
    std::vector<MockRule> rules;
    Default default_mode = Default::Echo;
    std::string fixed_text;

    std::string respond(const PromptRequest& req) const;

    static MockScript echo();
    static MockScript parse(const std::string& json_text, const std::string& origin);
    static MockScript load_file(const std::string& path);
};

struct LlmCallRecord {
    int iteration = 0;
    std::string kind;
    std::size_t prompt_bytes = 0;
    std::size_t response_bytes = 0;
    double latency_ms = 0.0;
    int attempts = 1;
    bool ok = true;
};

/// Chat-completion client over either a scripted mock or an HTTP endpoint
/// speaking the {model, messages:[...]} -> choices[0].message.content shape.
/// Every complete() call lands exactly once in the ledger.
class LlmClient {
public:
    static LlmClient mock(MockScript script);
    static LlmClient from_config(const LlmConfig& cfg);

    /// Returns the raw completion text. Transient transport failures are
    /// retried with exponential backoff up to req.max_retries; exhaustion
    /// throws TransportError.
    std::string complete(const PromptRequest& req);

    void set_iteration(int t) { iteration_ = t; }
    bool is_mock() const { return use_mock_; }
    std::vector<LlmCallRecord> ledger() const;

private:
    LlmClient() = default;

    struct Ledger {
        std::mutex mu;
        std::vector<LlmCallRecord> records;
    };

    bool use_mock_ = true;
    MockScript script_;
    LlmConfig cfg_;
    int iteration_ = 0;
    std::shared_ptr<Ledger> ledger_ = std::make_shared<Ledger>();

    std::string complete_http(const PromptRequest& req, int& attempts);
};

}  // namespace nilc
