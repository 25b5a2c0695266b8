#include "nilc/llm.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace nilc {

using nlohmann::json;

std::string to_string(PromptKind k) {
    switch (k) {
        case PromptKind::Summary: return "summary";
        case PromptKind::Refine: return "refine";
        case PromptKind::Map: return "map";
    }
    return "?";
}

namespace {

PromptKind kind_from_string(const std::string& s) {
    if (s == "summary") return PromptKind::Summary;
    if (s == "refine") return PromptKind::Refine;
    if (s == "map") return PromptKind::Map;
    throw std::invalid_argument("unknown prompt kind: " + s);
}

const char* kSummaryTemplate =
    "You are an analyst grouping user utterances by intent.\n"
    "Below are representative utterances from one group.\n"
    "\n"
    "Utterances:\n"
    "{{exemplars}}"
    "\n"
    "Write one sentence that summarizes the common intent of these utterances.\n"
    "Respond with the summary sentence only.\n";

const char* kRefineTemplate =
    "You are refining ambiguous user utterances for intent clustering.\n"
    "First decide which of the clusters below fits the utterance best, then\n"
    "rewrite the utterance as a clear, unambiguous example of that cluster's\n"
    "intent. Keep the original meaning.\n"
    "\n"
    "{{home_block}}"
    "{{neighbor_blocks}}"
    "Utterance: \"{{utterance}}\"\n"
    "\n"
    "Respond with a single JSON object:\n"
    "{\"judged_cluster\": <cluster index>, \"rewritten\": \"<rewritten utterance>\"}\n"
    "Use -1 for judged_cluster if none of the clusters fit.\n";

const char* kMapTemplate =
    "You are matching known intent labels to cluster summaries.\n"
    "Match every intent to exactly one cluster; no cluster may be used twice.\n"
    "\n"
    "Intents:\n"
    "{{intents}}"
    "\n"
    "Cluster summaries:\n"
    "{{summaries}}"
    "\n"
    "Respond with a single JSON object mapping each intent label to one\n"
    "cluster index, e.g. {\"intent name\": 2}.\n";

std::string numbered_list(const std::vector<std::string>& items) {
    std::ostringstream os;
    for (size_t i = 0; i < items.size(); ++i) os << (i + 1) << ". " << items[i] << "\n";
    return os.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string cluster_block(const char* role, const ClusterContext& c) {
    std::ostringstream os;
    os << role << " cluster " << c.cluster << ":\n";
    os << "Summary: " << c.summary << "\n";
    os << "Examples:\n" << numbered_list(c.exemplar_texts) << "\n";
    return os.str();
}

std::optional<json> extract_first_json_object(const std::string& text) {
    for (size_t start = 0; start < text.size(); ++start) {
        if (text[start] != '{') continue;
        int depth = 0;
        bool in_str = false, esc = false;
        for (size_t i = start; i < text.size(); ++i) {
            char ch = text[i];
            if (in_str) {
                if (esc) esc = false;
                else if (ch == '\\') esc = true;
                else if (ch == '"') in_str = false;
                continue;
            }
            if (ch == '"') in_str = true;
            else if (ch == '{') ++depth;
            else if (ch == '}') {
                --depth;
                if (depth == 0) {
                    json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!j.is_discarded() && j.is_object()) return j;
                    break;  // malformed from this brace; try the next one
                }
            }
        }
    }
    return std::nullopt;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
    static const PromptTemplates t{kSummaryTemplate, kRefineTemplate, kMapTemplate};
    return t;
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
    PromptTemplates t = defaults();
    namespace fs = std::filesystem;
    auto maybe = [&](const char* name, std::string& slot) {
        fs::path p = fs::path(dir) / name;
        if (fs::exists(p)) slot = read_file(p.string());
    };
    maybe("summary.txt", t.summary);
    maybe("refine.txt", t.refine);
    maybe("map.txt", t.map);
    return t;
}

PromptRequest render_summary_prompt(const std::vector<std::string>& exemplars,
                                    const PromptTemplates& t) {
    if (exemplars.empty()) throw std::invalid_argument("summary prompt needs at least one exemplar");
    PromptRequest req;
    req.kind = PromptKind::Summary;
    req.body = replace_all(t.summary, "{{exemplars}}", numbered_list(exemplars));
    req.echo_payload = exemplars.front();
    return req;
}

PromptRequest render_refine_prompt(const std::string& utterance, const ClusterContext& home,
                                   const std::vector<ClusterContext>& neighbors,
                                   const PromptTemplates& t) {
    PromptRequest req;
    req.kind = PromptKind::Refine;
    std::string nbr_blocks;
    for (const auto& n : neighbors) nbr_blocks += cluster_block("Neighboring", n);
    std::string body = replace_all(t.refine, "{{home_block}}", cluster_block("Home", home));
    body = replace_all(body, "{{neighbor_blocks}}", nbr_blocks);
    body = replace_all(body, "{{utterance}}", utterance);
    req.body = std::move(body);
    json echo;
    echo["judged_cluster"] = -1;
    echo["rewritten"] = utterance;
    req.echo_payload = echo.dump();
    return req;
}

PromptRequest render_map_prompt(const std::vector<std::string>& intents,
                                const std::vector<std::string>& summaries,
                                const PromptTemplates& t) {
    if (intents.empty()) throw std::invalid_argument("map prompt needs at least one intent");
    PromptRequest req;
    req.kind = PromptKind::Map;
    std::ostringstream intent_list;
    for (const auto& y : intents) intent_list << "- " << y << "\n";
    std::ostringstream summary_list;
    for (size_t k = 0; k < summaries.size(); ++k) summary_list << k << ". " << summaries[k] << "\n";
    std::string body = replace_all(t.map, "{{intents}}", intent_list.str());
    body = replace_all(body, "{{summaries}}", summary_list.str());
    req.body = std::move(body);
    req.echo_payload = "";  // echo mocks cannot answer mapping prompts
    return req;
}

std::pair<int, std::string> parse_refine_response(const std::string& text) {
    auto j = extract_first_json_object(text);
    if (!j) throw ParseError("refine response carries no JSON object");
    if (!j->contains("rewritten") || !(*j)["rewritten"].is_string())
        throw ParseError("refine response lacks a string \"rewritten\" field");
    int judged = -1;
    if (j->contains("judged_cluster")) {
        if (!(*j)["judged_cluster"].is_number_integer())
            throw ParseError("judged_cluster is not an integer");
        judged = (*j)["judged_cluster"].get<int>();
    }
    return {judged, (*j)["rewritten"].get<std::string>()};
}

std::map<std::string, int> parse_map_response(const std::string& text, int m, int k) {
    auto j = extract_first_json_object(text);
    if (!j) throw ParseError("map response carries no JSON object");
    std::map<std::string, int> out;
    for (auto it = j->begin(); it != j->end(); ++it) {
        if (!it->is_number_integer())
            throw ParseError("map response value for \"" + it.key() + "\" is not an integer");
        out[it.key()] = it->get<int>();
    }
    if (out.empty()) throw ParseError("map response object is empty");
    (void)m;
    (void)k;
    return out;
}

std::string MockScript::respond(const PromptRequest& req) const {
    for (const auto& rule : rules) {
        if (rule.kind != req.kind) continue;
        if (!rule.contains.empty() && req.body.find(rule.contains) == std::string::npos) continue;
        return rule.response;
    }
    return default_mode == Default::Echo ? req.echo_payload : fixed_text;
}

MockScript MockScript::echo() { return MockScript{}; }

MockScript MockScript::parse(const std::string& json_text, const std::string& origin) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::runtime_error(origin + ": mock script is not a JSON object");
    MockScript s;
    if (j.contains("default")) {
        std::string d = j["default"].get<std::string>();
        if (d == "echo") s.default_mode = Default::Echo;
        else if (d == "fixed") s.default_mode = Default::Fixed;
        else throw std::runtime_error(origin + ": unknown mock default \"" + d + "\"");
    }
    if (j.contains("fixed_text")) s.fixed_text = j["fixed_text"].get<std::string>();
    if (j.contains("rules")) {
        for (const auto& r : j["rules"]) {
            MockRule rule;
            rule.kind = kind_from_string(r.at("kind").get<std::string>());
            if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
            rule.response = r.at("response").get<std::string>();
            s.rules.push_back(std::move(rule));
        }
    }
    return s;
}

MockScript MockScript::load_file(const std::string& path) {
    return parse(read_file(path), path);
}

LlmClient LlmClient::mock(MockScript script) {
    LlmClient c;
    c.use_mock_ = true;
    c.script_ = std::move(script);
    return c;
}

LlmClient LlmClient::from_config(const LlmConfig& cfg) {
    LlmClient c;
    c.cfg_ = cfg;
    if (!cfg.mock_script.empty()) {
        c.use_mock_ = true;
        c.script_ = MockScript::load_file(cfg.mock_script);
    } else if (cfg.base_url.empty()) {
        c.use_mock_ = true;
        c.script_ = MockScript::echo();
    } else {
        c.use_mock_ = false;
    }
    return c;
}

std::vector<LlmCallRecord> LlmClient::ledger() const {
    std::lock_guard<std::mutex> lock(ledger_->mu);
    return ledger_->records;
}

std::string LlmClient::complete_http(const PromptRequest& req, int& attempts) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    json payload;
    payload["model"] = cfg_.model;
    payload["temperature"] = req.temperature;
    payload["messages"] = json::array({json{{"role", "user"}, {"content", req.body}}});
    const std::string body = payload.dump();

    std::string last_error;
    for (attempts = 1; attempts <= req.max_retries + 1; ++attempts) {
        auto res = client.Post(cfg_.path, headers, body, "application/json");
        if (res) {
            if (res->status == 200) {
                json j = json::parse(res->body, nullptr, false);
                if (!j.is_discarded() && j.contains("choices") && !j["choices"].empty() &&
                    j["choices"][0].contains("message") &&
                    j["choices"][0]["message"].contains("content"))
                    return j["choices"][0]["message"]["content"].get<std::string>();
                last_error = "malformed completion payload";
            } else if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
            } else {
                throw TransportError("LLM endpoint rejected request: HTTP " +
                                     std::to_string(res->status));
            }
        } else {
            last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
        }
        if (attempts <= req.max_retries) {
            double wait = cfg_.backoff_ms * std::pow(2.0, attempts - 1);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait));
        }
    }
    attempts = req.max_retries + 1;
    throw TransportError("LLM transport failed after " + std::to_string(req.max_retries + 1) +
                         " attempts: " + last_error);
}

std::string LlmClient::complete(const PromptRequest& req) {
    if (req.body.empty()) throw std::invalid_argument("empty prompt body");
    LlmCallRecord rec;
    rec.iteration = iteration_;
    rec.kind = to_string(req.kind);
    rec.prompt_bytes = req.body.size();
    auto t0 = std::chrono::steady_clock::now();
    try {
        std::string response;
        if (use_mock_) {
            response = script_.respond(req);
            rec.attempts = 1;
        } else {
            response = complete_http(req, rec.attempts);
        }
        rec.response_bytes = response.size();
        rec.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        rec.ok = true;
        {
            std::lock_guard<std::mutex> lock(ledger_->mu);
            ledger_->records.push_back(rec);
        }
        return response;
    } catch (...) {
        rec.ok = false;
        rec.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        {
            std::lock_guard<std::mutex> lock(ledger_->mu);
            ledger_->records.push_back(rec);
        }
        throw;
    }
}

}  // namespace nilc
