#include "nilc/semisup.hpp"

#include <map>
#include <stdexcept>
#include <unordered_map>

#include "nilc/hungarian.hpp"
#include "nilc/numerics.hpp"

namespace nilc {

IntentMapping IntentMapping::build(std::vector<int> intent_to_cluster, int k,
                                   MappingStrategy strategy, int iteration) {
    IntentMapping m;
    m.cluster_to_intent.assign(k, -1);
    for (size_t j = 0; j < intent_to_cluster.size(); ++j) {
        int c = intent_to_cluster[j];
        if (c < 0 || c >= k)
            throw std::invalid_argument("mapping: cluster index out of range");
        if (m.cluster_to_intent[c] != -1)
            throw std::invalid_argument("mapping: cluster mapped twice");
        m.cluster_to_intent[c] = static_cast<int>(j);
    }
    m.intent_to_cluster = std::move(intent_to_cluster);
    m.strategy = strategy;
    m.iteration = iteration;
    return m;
}

LabeledSubset build_labeled_subset(const std::vector<Utterance>& data) {
    LabeledSubset out;
    std::unordered_map<std::string, int> index;
    for (const auto& u : data) {
        if (!u.label) continue;
        auto it = index.find(*u.label);
        if (it == index.end()) {
            it = index.emplace(*u.label, static_cast<int>(out.known_intents.size())).first;
            out.known_intents.push_back(*u.label);
            out.members.emplace_back();
        }
        out.members[it->second].push_back(u.id);
    }
    return out;
}

std::vector<Vec> compute_seed_centroids(const LabeledSubset& labeled, const EmbeddingMatrix& x) {
    std::vector<Vec> seeds;
    seeds.reserve(labeled.members.size());
    for (size_t j = 0; j < labeled.members.size(); ++j) {
        if (labeled.members[j].empty())
            throw std::invalid_argument("intent \"" + labeled.known_intents[j] +
                                        "\" has no labeled utterances");
        seeds.push_back(mean_embedding(x, labeled.members[j]));
    }
    return seeds;
}

namespace {

CostMatrix cosine_dissimilarity(const std::vector<Vec>& seeds, const std::vector<Vec>& targets) {
    CostMatrix c(static_cast<int>(seeds.size()), static_cast<int>(targets.size()));
    for (size_t j = 0; j < seeds.size(); ++j)
        for (size_t k = 0; k < targets.size(); ++k)
            c.at(static_cast<int>(j), static_cast<int>(k)) = 1.0 - cosine(seeds[j], targets[k]);
    return c;
}

}  // namespace

SeedAlignResult seed_align(const std::vector<Vec>& initial, const std::vector<Vec>& seeds) {
    if (seeds.size() > initial.size())
        throw std::invalid_argument("more known intents than clusters");
    auto sol = hungarian_min_cost(cosine_dissimilarity(seeds, initial));
    SeedAlignResult out;
    out.centroids = initial;
    out.intent_to_cluster = sol.row_to_col;
    for (size_t j = 0; j < seeds.size(); ++j) out.centroids[sol.row_to_col[j]] = seeds[j];
    return out;
}

IntentMapping map_similarity(const std::vector<Vec>& seeds, const std::vector<Vec>& targets,
                             int iteration) {
    if (targets.empty()) throw std::invalid_argument("map_similarity: no cluster targets");
    if (seeds.size() > targets.size())
        throw std::invalid_argument("more known intents than clusters");
    auto sol = hungarian_min_cost(cosine_dissimilarity(seeds, targets));
    return IntentMapping::build(sol.row_to_col, static_cast<int>(targets.size()),
                                MappingStrategy::Similarity, iteration);
}

IntentMapping map_llm(LlmClient& llm, const std::vector<std::string>& intents,
                      const std::vector<std::string>& summaries, const std::vector<Vec>& seeds,
                      const std::vector<Vec>& fallback_targets, int iteration,
                      const PromptTemplates& templates, int max_parse_retries,
                      int transport_retries, double temperature) {
    const int m = static_cast<int>(intents.size());
    const int k = static_cast<int>(summaries.size());
    PromptRequest req = render_map_prompt(intents, summaries, templates);
    req.max_retries = transport_retries;
    req.temperature = temperature;

    std::string failure;
    for (int attempt = 0; attempt < max_parse_retries; ++attempt) {
        std::string response;
        try {
            response = llm.complete(req);
        } catch (const TransportError& e) {
            failure = e.what();
            break;  // transport exhausted its own retries; go to fallback
        }
        try {
            auto raw = parse_map_response(response, m, k);
            std::vector<int> intent_to_cluster(m, -1);
            for (int j = 0; j < m; ++j) {
                auto it = raw.find(intents[j]);
                if (it == raw.end())
                    throw ParseError("mapping misses intent \"" + intents[j] + "\"");
                intent_to_cluster[j] = it->second;
            }
            return IntentMapping::build(std::move(intent_to_cluster), k, MappingStrategy::LLM,
                                        iteration);
        } catch (const std::exception& e) {
            failure = e.what();
        }
    }

    IntentMapping fb = map_similarity(seeds, fallback_targets, iteration);
    fb.fallback_used = true;
    fb.fallback_reason = "map_parse_failed: " + failure;
    return fb;
}

double supervised_term(std::span<const double> x, int k, const IntentMapping& mapping,
                       const std::vector<Vec>& seeds) {
    if (k < 0 || k >= static_cast<int>(mapping.cluster_to_intent.size())) return 0.0;
    int j = mapping.cluster_to_intent[k];
    if (j < 0) return 0.0;
    return 1.0 - cosine(x, seeds[j]);
}

}  // namespace nilc
