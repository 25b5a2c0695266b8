#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nilc/runner.hpp"

namespace {

using nilc::PipelineConfig;

int cmd_run(const PipelineConfig& cfg, const std::string& dataset, const std::string& output) {
    try {
        auto paths = nilc::run_to_files(cfg, dataset, output);
        std::cout << "wrote " << paths.assignments << "\n"
                  << "wrote " << paths.summaries << "\n"
                  << "wrote " << paths.report << "\n";
        return 0;
    } catch (const nilc::PipelineAbort& e) {
        std::cerr << "error: " << e.what() << " (partial report written)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const std::string& pred, const std::string& dataset, const std::string& output) {
    try {
        nlohmann::json metrics = nilc::eval_files(pred, dataset);
        std::cout << metrics.dump(2) << "\n";
        if (!output.empty()) {
            std::ofstream f(output);
            if (!f) throw std::runtime_error("cannot write " + output);
            f << metrics.dump(2) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NILC: LLM-assisted iterative clustering for new intent discovery"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "cluster a dataset and write outputs");
    std::string dataset, output = "out", config_path;
    std::string embeddings, encoder_url, llm_url, llm_model, mock_script;
    std::string mode, selection, mapping;
    int k = 0, iterations = 0, micro_budget = 0, delta = 0, exemplars = 0, k_nbr = 0;
    int encoder_dim = 0;
    double micro_tol = 0, alpha = 0, beta = 0, gamma = 0;
    std::uint64_t seed = 0;
    bool mock_encoder = false, include_labeled = false, normalize = false;
    std::vector<std::string> ablate;

    run->add_option("--dataset", dataset, "JSONL dataset ({text, label?} per line)")->required();
    run->add_option("--output", output, "output directory");
    run->add_option("--config", config_path, "config file (JSON or key=value)");
    run->add_option("--k", k, "number of intent clusters K");
    run->add_option("--iterations", iterations, "macro iterations T");
    run->add_option("--micro-budget", micro_budget, "micro iterations per phase");
    run->add_option("--micro-tol", micro_tol, "centroid-shift convergence threshold");
    run->add_option("--alpha", alpha, "semantic cohesion weight");
    run->add_option("--beta", beta, "semantic separation weight");
    run->add_option("--gamma", gamma, "soft must-link weight");
    run->add_option("--delta", delta, "hard samples per macro iteration");
    run->add_option("--exemplars", exemplars, "exemplars per cluster |S_k|");
    run->add_option("--k-nbr", k_nbr, "neighbor clusters for refinement prompts");
    run->add_option("--selection", selection, "exemplar strategy: kmeanspp|mad|mmr|nn");
    run->add_option("--mapping", mapping, "intent mapping strategy: similarity|llm");
    run->add_option("--mode", mode, "unsupervised|semi_supervised");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--embeddings", embeddings, "NILCEMB1 embedding file for the corpus");
    run->add_option("--encoder-url", encoder_url, "embedding service base URL");
    run->add_option("--llm-url", llm_url, "chat-completion endpoint base URL");
    run->add_option("--llm-model", llm_model, "model name for the endpoint");
    run->add_option("--mock-llm", mock_script, "mock script JSON (deterministic offline LLM)")
        ->expected(0, 1);
    run->add_flag("--mock-encoder", mock_encoder, "hash-based deterministic encoder");
    run->add_option("--encoder-dim", encoder_dim, "mock encoder dimension");
    run->add_flag("--include-labeled", include_labeled,
                  "cluster labeled utterances too (semi-supervised)");
    run->add_flag("--normalize", normalize, "L2-normalize embeddings at load");
    run->add_option("--ablate", ablate, "disable a mechanism: no-dcs|no-hsr|no-seeding|no-sml")
        ->expected(-1);

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "score predictions against labels");
    std::string pred_path, eval_dataset, eval_output;
    eval->add_option("--pred", pred_path, "assignments.jsonl from a run")->required();
    eval->add_option("--dataset", eval_dataset, "labeled JSONL dataset")->required();
    eval->add_option("--output", eval_output, "write metrics JSON here too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (eval->parsed()) return cmd_eval(pred_path, eval_dataset, eval_output);

    PipelineConfig cfg;
    try {
        if (!config_path.empty()) cfg = nilc::load_config_file(config_path);

        // explicit flags override the config file
        if (run->count("--k")) cfg.k = k;
        if (run->count("--iterations")) cfg.t_macro = iterations;
        if (run->count("--micro-budget")) cfg.micro_budget = micro_budget;
        if (run->count("--micro-tol")) cfg.micro_tol = micro_tol;
        if (run->count("--alpha")) cfg.alpha = alpha;
        if (run->count("--beta")) cfg.beta = beta;
        if (run->count("--gamma")) cfg.gamma = gamma;
        if (run->count("--delta")) cfg.delta = delta;
        if (run->count("--exemplars")) cfg.exemplar_count = exemplars;
        if (run->count("--k-nbr")) cfg.k_nbr = k_nbr;
        if (run->count("--seed")) cfg.rng_seed = seed;
        if (run->count("--encoder-dim")) cfg.encoder.mock_dim = encoder_dim;
        if (!selection.empty()) cfg.selection_strategy = nilc::selection_from_string(selection);
        if (!mapping.empty()) cfg.mapping_strategy = nilc::mapping_from_string(mapping);
        if (!mode.empty()) cfg.mode = nilc::mode_from_string(mode);
        if (include_labeled) cfg.include_labeled = true;
        if (normalize) cfg.normalize_embeddings = true;

        if (!embeddings.empty()) {
            cfg.encoder.kind = nilc::EncoderConfig::Kind::File;
            cfg.encoder.path = embeddings;
            // a service URL alongside --embeddings handles novel texts
            if (!encoder_url.empty()) cfg.encoder.base_url = encoder_url;
        } else if (!encoder_url.empty()) {
            cfg.encoder.kind = nilc::EncoderConfig::Kind::Service;
            cfg.encoder.base_url = encoder_url;
        } else if (mock_encoder) {
            cfg.encoder.kind = nilc::EncoderConfig::Kind::Mock;
        }
        if (run->count("--mock-llm")) {
            cfg.llm.base_url.clear();
            if (!mock_script.empty()) cfg.llm.mock_script = mock_script;
        } else if (!llm_url.empty()) {
            cfg.llm.base_url = llm_url;
            if (!llm_model.empty()) cfg.llm.model = llm_model;
        }

        for (const auto& a : ablate) {
            if (a == "no-dcs") cfg.enable_dcs = false;
            else if (a == "no-hsr") cfg.enable_hsr = false;
            else if (a == "no-seeding") cfg.enable_seeding = false;
            else if (a == "no-sml") cfg.enable_sml = false;
            else throw std::invalid_argument("unknown ablation \"" + a + "\"");
        }
        if (!cfg.enable_dcs) {
            cfg.alpha = 0.0;
            cfg.beta = 0.0;
        }
        if (!cfg.enable_hsr) cfg.delta = 0;
        if (!cfg.enable_sml) cfg.gamma = 0.0;

        if (cfg.k == 0)
            throw std::invalid_argument("--k is required (or set k in --config)");
        cfg = nilc::validate_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    return cmd_run(cfg, dataset, output);
}
