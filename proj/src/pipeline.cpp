#include "nilc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <unordered_map>

#include "nilc/exemplars.hpp"
#include "nilc/numerics.hpp"

namespace nilc {

using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full);
    s += 0x9E3779B97F4A7C15ull;
    s = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9ull;
    s = (s ^ (s >> 27)) * 0x94D049BB133111EBull;
    return s ^ (s >> 31);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::optional<Metrics> pool_metrics(const std::vector<int>& assignments,
                                    const std::vector<std::optional<std::string>>& labels) {
    std::vector<int> pred, truth;
    std::unordered_map<std::string, int> dense;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        auto it = dense.find(*labels[i]);
        if (it == dense.end()) it = dense.emplace(*labels[i], static_cast<int>(dense.size())).first;
        pred.push_back(assignments[i]);
        truth.push_back(it->second);
    }
    if (pred.empty()) return std::nullopt;
    return evaluate(pred, truth);
}

}  // namespace

json config_to_json(const PipelineConfig& c) {
    json j;
    j["k"] = c.k;
    j["t_macro"] = c.t_macro;
    j["micro_budget"] = c.micro_budget;
    j["micro_tol"] = c.micro_tol;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["delta"] = c.delta;
    j["exemplar_count"] = c.exemplar_count;
    j["k_nbr"] = c.k_nbr;
    j["selection_strategy"] = to_string(c.selection_strategy);
    j["mapping_strategy"] = to_string(c.mapping_strategy);
    j["mode"] = to_string(c.mode);
    j["rng_seed"] = c.rng_seed;
    j["normalize_embeddings"] = c.normalize_embeddings;
    j["include_labeled"] = c.include_labeled;
    j["enable_dcs"] = c.enable_dcs;
    j["enable_hsr"] = c.enable_hsr;
    j["enable_seeding"] = c.enable_seeding;
    j["enable_sml"] = c.enable_sml;
    j["llm"] = {{"base_url", c.llm.base_url},
                {"path", c.llm.path},
                {"model", c.llm.model},
                {"mock_script", c.llm.mock_script},
                {"template_dir", c.llm.template_dir},
                {"max_retries", c.llm.max_retries},
                {"temperature", c.llm.temperature},
                {"max_inflight", c.llm.max_inflight}};
    std::string kind = c.encoder.kind == EncoderConfig::Kind::File      ? "file"
                       : c.encoder.kind == EncoderConfig::Kind::Service ? "service"
                                                                        : "mock";
    j["encoder"] = {{"kind", kind},
                    {"path", c.encoder.path},
                    {"base_url", c.encoder.base_url},
                    {"model", c.encoder.model},
                    {"batch_size", c.encoder.batch_size},
                    {"mock_dim", c.encoder.mock_dim},
                    {"mock_seed", c.encoder.mock_seed}};
    return j;
}

namespace {

json metrics_to_json(const Metrics& m) {
    return json{{"nmi", m.nmi}, {"ari", m.ari}, {"acc", m.acc}, {"ana", m.ana}};
}

json breakdown_to_json(const CostBreakdown& b) {
    return json{{"ed", b.ed}, {"sc", b.sc}, {"ss", b.ss}, {"sp", b.sp}, {"total", b.total}};
}

json mapping_to_json(const MappingRecord& m) {
    json pairs = json::object();
    for (const auto& [intent, cluster] : m.pairs) pairs[intent] = cluster;
    return json{{"iteration", m.iteration},
                {"strategy", m.strategy},
                {"pairs", pairs},
                {"fallback_used", m.fallback_used},
                {"fallback_reason", m.fallback_reason}};
}

}  // namespace

json report_to_json(const RunReport& r) {
    json j;
    j["config"] = r.config_snapshot;
    j["ablations"] = {{"dcs", r.dcs}, {"hsr", r.hsr}, {"seeding", r.seeding}, {"sml", r.sml}};
    if (r.seed_alignment) {
        json sa = json::object();
        for (const auto& [intent, cluster] : *r.seed_alignment) sa[intent] = cluster;
        j["seed_alignment"] = sa;
    }
    j["iterations"] = json::array();
    for (const auto& it : r.iterations) {
        json ji;
        ji["iteration"] = it.iteration;
        ji["objective_after_assign"] = it.objective_after_assign;
        ji["micro_objectives"] = it.micro_objectives;
        ji["micro_steps"] = it.micro_steps;
        ji["cost_sums"] = breakdown_to_json(it.cost_sums);
        ji["hard_samples"] = json::array();
        for (const auto& h : it.hard_samples) {
            ji["hard_samples"].push_back({{"id", h.id},
                                          {"original_text", h.original_text},
                                          {"rewritten_text", h.rewritten_text},
                                          {"accepted", h.accepted},
                                          {"cost_before", h.cost_before},
                                          {"cost_after", h.cost_after},
                                          {"status", h.status}});
        }
        if (it.mapping) ji["mapping"] = mapping_to_json(*it.mapping);
        if (it.metrics) ji["metrics"] = metrics_to_json(*it.metrics);
        ji["wall_ms"] = it.wall_ms;
        j["iterations"].push_back(ji);
    }
    j["llm_calls"] = json::array();
    for (const auto& c : r.llm_calls) {
        j["llm_calls"].push_back({{"iteration", c.iteration},
                                  {"kind", c.kind},
                                  {"prompt_bytes", c.prompt_bytes},
                                  {"response_bytes", c.response_bytes},
                                  {"latency_ms", c.latency_ms},
                                  {"attempts", c.attempts},
                                  {"ok", c.ok}});
    }
    if (r.final_metrics) j["final_metrics"] = metrics_to_json(*r.final_metrics);
    j["timings"] = {{"wall_ms", r.wall_ms}};
    return j;
}

PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& raw_config,
                            LlmClient& llm, EncoderStack& encoder) {
    const auto t_run = std::chrono::steady_clock::now();
    PipelineConfig cfg = validate_config(raw_config);

    const EmbeddingMatrix& X0 = input.X;
    const int n = X0.rows();
    const int d = X0.cols();
    if (static_cast<int>(input.texts.size()) != n || static_cast<int>(input.ids.size()) != n ||
        static_cast<int>(input.labels.size()) != n)
        throw std::invalid_argument("pipeline input arrays are not parallel");
    X0.check_finite();
    if (n < cfg.k) throw std::invalid_argument("fewer samples than clusters");

    const bool semi = cfg.mode == RunMode::SemiSupervised;
    const LabeledSubset* labeled = nullptr;
    if (semi) {
        if (!input.labeled || input.labeled->intent_count() == 0)
            throw std::invalid_argument("semi_supervised mode requires labeled utterances");
        labeled = &*input.labeled;
        if (labeled->intent_count() > cfg.k)
            throw std::invalid_argument("more known intents than clusters");
        if (labeled->seed_centroids.size() != labeled->known_intents.size())
            throw std::invalid_argument("labeled subset misses seed centroids");
        for (const auto& s : labeled->seed_centroids)
            if (static_cast<int>(s.size()) != d)
                throw std::invalid_argument("seed centroid dimension mismatch");
    }

    RunReport report;
    report.config_snapshot = config_to_json(cfg);
    report.dcs = cfg.enable_dcs;
    report.hsr = cfg.enable_hsr;
    report.seeding = cfg.enable_seeding;
    report.sml = cfg.enable_sml;

    PipelineResult result;
    result.final_state.k = cfg.k;

    try {
        EmbeddingMatrix X = X0;  // working copy; HSR rewrites rows
        std::vector<std::string> texts = input.texts;
        const PromptTemplates templates = cfg.llm.template_dir.empty()
                                              ? PromptTemplates::defaults()
                                              : PromptTemplates::load(cfg.llm.template_dir);

        ClusterState state = kmeanspp_init(X, cfg.k, cfg.rng_seed);

        if (semi && cfg.enable_seeding) {
            auto aligned = seed_align(state.mu, labeled->seed_centroids);
            state.mu = std::move(aligned.centroids);
            CostContext plain;  // warm start re-snap, Euclidean only
            state.assignments = assign_all(X, state, plain).assignments;
            std::vector<std::pair<std::string, int>> pairs;
            for (size_t j = 0; j < labeled->known_intents.size(); ++j)
                pairs.emplace_back(labeled->known_intents[j], aligned.intent_to_cluster[j]);
            report.seed_alignment = std::move(pairs);
        }

        std::vector<ExemplarSet> exemplar_sets(cfg.k);
        IntentMapping mapping;
        bool have_mapping = false;

        for (int t = 1; t <= cfg.t_macro; ++t) {
            const auto t_iter = std::chrono::steady_clock::now();
            IterationReport iter;
            iter.iteration = t;
            llm.set_iteration(t);

            state.mu = update_euclidean_centroids(X, state.assignments, cfg.k);

            std::vector<std::vector<int>> members(cfg.k);
            for (int i = 0; i < n; ++i) members[state.assignments[i]].push_back(i);
            for (int c = 0; c < cfg.k; ++c) {
                exemplar_sets[c] =
                    select_exemplars(cfg.selection_strategy, X, members[c], state.mu[c],
                                     cfg.exemplar_count, mix_seed(cfg.rng_seed, t, c), c);
                if (exemplar_sets[c].member_ids.empty() && !members[c].empty())
                    exemplar_sets[c].member_ids.push_back(members[c].front());
            }

            std::vector<int> theta_nbr;
            if (cfg.enable_dcs) {
                std::vector<std::string> summaries(cfg.k);
                for (int c = 0; c < cfg.k; ++c) {
                    std::vector<std::string> exemplar_texts;
                    for (int id : exemplar_sets[c].member_ids) exemplar_texts.push_back(texts[id]);
                    PromptRequest req = render_summary_prompt(exemplar_texts, templates);
                    req.max_retries = cfg.llm.max_retries;
                    req.temperature = cfg.llm.temperature;
                    summaries[c] = llm.complete(req);
                }
                auto thetas = encoder.encode(summaries);
                for (int c = 0; c < cfg.k; ++c) {
                    if (static_cast<int>(thetas[c].size()) != d)
                        throw std::runtime_error(
                            "summary embedding dimension " + std::to_string(thetas[c].size()) +
                            " does not match corpus dimension " + std::to_string(d));
                    state.theta[c] = std::move(thetas[c]);
                    state.summaries[c] = std::move(summaries[c]);
                }
                theta_nbr = compute_theta_neighbors(state);
            } else {
                state.theta.assign(cfg.k, std::nullopt);
                state.summaries.assign(cfg.k, std::nullopt);
            }

            have_mapping = false;
            if (semi && cfg.enable_sml) {
                const std::vector<Vec>* targets = &state.mu;
                std::vector<Vec> theta_vecs;
                if (state.has_theta()) {
                    theta_vecs.reserve(cfg.k);
                    for (const auto& th : state.theta) theta_vecs.push_back(*th);
                    targets = &theta_vecs;
                }
                if (cfg.mapping_strategy == MappingStrategy::LLM && cfg.enable_dcs) {
                    std::vector<std::string> summary_texts;
                    for (const auto& s : state.summaries) summary_texts.push_back(*s);
                    mapping = map_llm(llm, labeled->known_intents, summary_texts,
                                      labeled->seed_centroids, *targets, t, templates, 3,
                                      cfg.llm.max_retries, cfg.llm.temperature);
                } else {
                    mapping = map_similarity(labeled->seed_centroids, *targets, t);
                    if (cfg.mapping_strategy == MappingStrategy::LLM) {
                        mapping.fallback_used = true;
                        mapping.fallback_reason = "llm mapping needs summaries (dcs disabled)";
                    }
                }
                have_mapping = true;

                MappingRecord rec;
                rec.iteration = t;
                rec.strategy = to_string(mapping.strategy);
                rec.fallback_used = mapping.fallback_used;
                rec.fallback_reason = mapping.fallback_reason;
                for (size_t j = 0; j < labeled->known_intents.size(); ++j)
                    rec.pairs.emplace_back(labeled->known_intents[j],
                                           mapping.intent_to_cluster[j]);
                iter.mapping = std::move(rec);
            }

            CostContext ctx;
            ctx.weights.alpha = cfg.enable_dcs ? cfg.alpha : 0.0;
            ctx.weights.beta = cfg.enable_dcs ? cfg.beta : 0.0;
            ctx.weights.gamma = have_mapping ? cfg.gamma : 0.0;
            ctx.theta_neighbor = theta_nbr.empty() ? nullptr : &theta_nbr;
            ctx.mapping = have_mapping ? &mapping : nullptr;
            ctx.seeds = have_mapping ? &labeled->seed_centroids : nullptr;

            AssignResult ar = assign_all(X, state, ctx);
            state.assignments = std::move(ar.assignments);
            iter.objective_after_assign = ar.total_cost;

            MicroPhaseResult micro = run_micro_phase(X, state, ctx, cfg.micro_budget, cfg.micro_tol);
            iter.micro_objectives = std::move(micro.objectives);
            iter.micro_steps = micro.steps;

            if (cfg.enable_hsr && cfg.delta > 0) {
                auto hard = rank_uncertain(X, state, cfg.delta, cfg.k_nbr);
                auto context_of = [&](int c) {
                    ClusterContext cc;
                    cc.cluster = c;
                    cc.summary = state.summaries[c] ? *state.summaries[c] : "";
                    for (int id : exemplar_sets[c].member_ids)
                        cc.exemplar_texts.push_back(texts[id]);
                    return cc;
                };
                struct Pending {
                    int pool_id;
                    RefineResult refine;
                    Vec candidate;  // empty when not encoded (parse failure)
                };
                std::vector<Pending> pending;
                for (const auto& h : hard) {
                    std::vector<ClusterContext> nbr_ctx;
                    for (int c : h.neighbor_clusters) nbr_ctx.push_back(context_of(c));
                    RefineResult rr =
                        refine_sample(llm, texts[h.id], context_of(h.home_cluster), nbr_ctx,
                                      templates, 3, cfg.llm.max_retries, cfg.llm.temperature);
                    pending.push_back({h.id, std::move(rr), {}});
                }
                std::vector<std::string> to_encode;
                for (const auto& p : pending)
                    if (!p.refine.parse_failed) to_encode.push_back(p.refine.text);
                if (!to_encode.empty()) {
                    auto vecs = encoder.encode(to_encode);
                    size_t vi = 0;
                    for (auto& p : pending)
                        if (!p.refine.parse_failed) p.candidate = std::move(vecs[vi++]);
                }
                std::sort(pending.begin(), pending.end(),
                          [](const Pending& a, const Pending& b) { return a.pool_id < b.pool_id; });
                for (auto& p : pending) {
                    RefinementOutcome o;
                    o.id = input.ids[p.pool_id];
                    o.original_text = texts[p.pool_id];
                    o.rewritten_text = p.refine.text;
                    if (p.refine.parse_failed) {
                        BestCluster current = best_cluster(X.row(p.pool_id), state, ctx);
                        o.cost_before = o.cost_after = current.cost.total;
                        o.status = "parse_failed";
                    } else {
                        UpdateDecision ud =
                            conditional_update(X, p.pool_id, p.candidate, state, ctx);
                        o.cost_before = ud.cost_before;
                        o.cost_after = ud.cost_after;
                        o.accepted = ud.accepted;
                        switch (ud.status) {
                            case UpdateStatus::Accepted: o.status = "accepted"; break;
                            case UpdateStatus::Rejected: o.status = "rejected"; break;
                            case UpdateStatus::InvalidEmbedding: o.status = "encode_failed"; break;
                        }
                        if (ud.accepted) texts[p.pool_id] = p.refine.text;
                    }
                    iter.hard_samples.push_back(std::move(o));
                }
            }

            iter.cost_sums = total_breakdown(X, state, ctx);
            iter.metrics = pool_metrics(state.assignments, input.labels);
            iter.wall_ms = elapsed_ms(t_iter);
            report.iterations.push_back(std::move(iter));
        }

        result.assignments = state.assignments;
        for (int c = 0; c < cfg.k; ++c) {
            ClusterSummaryOut s;
            s.cluster = c;
            s.summary = state.summaries[c] ? *state.summaries[c] : "";
            for (int id : exemplar_sets[c].member_ids) s.exemplar_ids.push_back(input.ids[id]);
            result.summaries.push_back(std::move(s));
        }
        report.final_metrics = pool_metrics(state.assignments, input.labels);
        result.final_state = std::move(state);
    } catch (const std::exception& e) {
        report.llm_calls = llm.ledger();
        report.wall_ms = elapsed_ms(t_run);
        throw PipelineAbort(e.what(), std::move(report));
    }

    report.llm_calls = llm.ledger();
    report.wall_ms = elapsed_ms(t_run);
    result.report = std::move(report);
    return result;
}

}  // namespace nilc
