#include "nilc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nilc {

std::string to_string(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::KMeansPP: return "kmeanspp";
        case SelectionStrategy::MAD: return "mad";
        case SelectionStrategy::MMR: return "mmr";
        case SelectionStrategy::NN: return "nn";
    }
    return "?";
}

std::string to_string(MappingStrategy s) {
    return s == MappingStrategy::Similarity ? "similarity" : "llm";
}

std::string to_string(RunMode m) {
    return m == RunMode::Unsupervised ? "unsupervised" : "semi_supervised";
}

SelectionStrategy selection_from_string(const std::string& s) {
    if (s == "kmeanspp") return SelectionStrategy::KMeansPP;
    if (s == "mad") return SelectionStrategy::MAD;
    if (s == "mmr") return SelectionStrategy::MMR;
    if (s == "nn") return SelectionStrategy::NN;
    throw std::invalid_argument("unknown selection strategy: " + s);
}

MappingStrategy mapping_from_string(const std::string& s) {
    if (s == "similarity") return MappingStrategy::Similarity;
    if (s == "llm") return MappingStrategy::LLM;
    throw std::invalid_argument("unknown mapping strategy: " + s);
}

RunMode mode_from_string(const std::string& s) {
    if (s == "unsupervised") return RunMode::Unsupervised;
    if (s == "semi_supervised") return RunMode::SemiSupervised;
    throw std::invalid_argument("unknown mode: " + s);
}

PipelineConfig validate_config(PipelineConfig c) {
    if (c.k < 2) throw std::invalid_argument("K must exceed 1");
    if (c.t_macro < 1) throw std::invalid_argument("t_macro must be at least 1");
    if (c.micro_budget < 0) throw std::invalid_argument("micro_budget must be non-negative");
    if (!(c.micro_tol >= 0)) throw std::invalid_argument("micro_tol must be non-negative");
    if (c.alpha < 0 || c.beta < 0 || c.gamma < 0)
        throw std::range_error("cost weights must be non-negative");
    if (c.delta < 0) throw std::invalid_argument("delta must be non-negative");
    if (c.exemplar_count < 1) throw std::invalid_argument("exemplar_count must be at least 1");
    if (c.k_nbr == -1) c.k_nbr = std::min(10, c.k - 1);
    if (c.k_nbr < 1) throw std::invalid_argument("neighbor count must be at least 1");
    if (c.k_nbr >= c.k) throw std::invalid_argument("neighbor count must be below K");
    if (c.encoder.batch_size < 1) throw std::invalid_argument("encoder batch_size must be positive");
    if (c.encoder.mock_dim < 1) throw std::invalid_argument("encoder mock_dim must be positive");
    if (c.llm.max_retries < 0) throw std::invalid_argument("llm max_retries must be non-negative");
    return c;
}

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& origin, const std::string& key) {
    throw std::runtime_error(origin + ": unknown config key \"" + key + "\"");
}

void apply_llm_key(LlmConfig& c, const std::string& origin, const std::string& key,
                   const json& v) {
    if (key == "base_url") c.base_url = v.get<std::string>();
    else if (key == "path") c.path = v.get<std::string>();
    else if (key == "model") c.model = v.get<std::string>();
    else if (key == "api_key_env") c.api_key_env = v.get<std::string>();
    else if (key == "mock_script") c.mock_script = v.get<std::string>();
    else if (key == "template_dir") c.template_dir = v.get<std::string>();
    else if (key == "max_retries") c.max_retries = v.get<int>();
    else if (key == "temperature") c.temperature = v.get<double>();
    else if (key == "backoff_ms") c.backoff_ms = v.get<double>();
    else if (key == "max_inflight") c.max_inflight = v.get<int>();
    else bad_key(origin, "llm." + key);
}

void apply_encoder_key(EncoderConfig& c, const std::string& origin, const std::string& key,
                       const json& v) {
    if (key == "kind") {
        std::string s = v.get<std::string>();
        if (s == "file") c.kind = EncoderConfig::Kind::File;
        else if (s == "service") c.kind = EncoderConfig::Kind::Service;
        else if (s == "mock") c.kind = EncoderConfig::Kind::Mock;
        else throw std::runtime_error(origin + ": unknown encoder kind \"" + s + "\"");
    } else if (key == "path") c.path = v.get<std::string>();
    else if (key == "base_url") c.base_url = v.get<std::string>();
    else if (key == "service_path") c.service_path = v.get<std::string>();
    else if (key == "model") c.model = v.get<std::string>();
    else if (key == "api_key_env") c.api_key_env = v.get<std::string>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "mock_dim") c.mock_dim = v.get<int>();
    else if (key == "mock_seed") c.mock_seed = v.get<std::uint64_t>();
    else if (key == "max_retries") c.max_retries = v.get<int>();
    else if (key == "backoff_ms") c.backoff_ms = v.get<double>();
    else bad_key(origin, "encoder." + key);
}

void apply_key(PipelineConfig& c, const std::string& origin, const std::string& key,
               const json& v) {
    if (key == "k") c.k = v.get<int>();
    else if (key == "t_macro") c.t_macro = v.get<int>();
    else if (key == "micro_budget") c.micro_budget = v.get<int>();
    else if (key == "micro_tol") c.micro_tol = v.get<double>();
    else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "beta") c.beta = v.get<double>();
    else if (key == "gamma") c.gamma = v.get<double>();
    else if (key == "delta") c.delta = v.get<int>();
    else if (key == "exemplar_count") c.exemplar_count = v.get<int>();
    else if (key == "k_nbr") c.k_nbr = v.get<int>();
    else if (key == "selection_strategy") c.selection_strategy = selection_from_string(v.get<std::string>());
    else if (key == "mapping_strategy") c.mapping_strategy = mapping_from_string(v.get<std::string>());
    else if (key == "mode") c.mode = mode_from_string(v.get<std::string>());
    else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
    else if (key == "normalize_embeddings") c.normalize_embeddings = v.get<bool>();
    else if (key == "include_labeled") c.include_labeled = v.get<bool>();
    else if (key == "enable_dcs") c.enable_dcs = v.get<bool>();
    else if (key == "enable_hsr") c.enable_hsr = v.get<bool>();
    else if (key == "enable_seeding") c.enable_seeding = v.get<bool>();
    else if (key == "enable_sml") c.enable_sml = v.get<bool>();
    else bad_key(origin, key);
}

json scalar_from_text(const std::string& raw) {
    json v = json::parse(raw, nullptr, false);
    if (!v.is_discarded() && !v.is_object() && !v.is_array()) return v;
    return json(raw);  // bare string
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

PipelineConfig from_json(const json& j, const std::string& origin) {
    PipelineConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "llm") {
            for (auto lit = it->begin(); lit != it->end(); ++lit)
                apply_llm_key(c.llm, origin, lit.key(), lit.value());
        } else if (key == "encoder") {
            for (auto eit = it->begin(); eit != it->end(); ++eit)
                apply_encoder_key(c.encoder, origin, eit.key(), eit.value());
        } else {
            apply_key(c, origin, key, it.value());
        }
    }
    return c;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded()) throw std::runtime_error(origin + ": invalid JSON config");
        return from_json(j, origin);
    }
    // flat key=value form, one per line, # comments
    PipelineConfig c;
    std::istringstream in(body);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ": expected key=value at line " +
                                     std::to_string(line_no));
        std::string key = trim(t.substr(0, eq));
        json value = scalar_from_text(trim(t.substr(eq + 1)));
        if (key.rfind("llm.", 0) == 0)
            apply_llm_key(c.llm, origin, key.substr(4), value);
        else if (key.rfind("encoder.", 0) == 0)
            apply_encoder_key(c.encoder, origin, key.substr(8), value);
        else
            apply_key(c, origin, key, value);
    }
    return c;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace nilc
