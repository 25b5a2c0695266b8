#include "nilc/runner.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "nilc/dataset.hpp"
#include "nilc/numerics.hpp"

namespace nilc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << body;
}

EmbeddingMatrix corpus_matrix(const PipelineConfig& cfg, const std::vector<Utterance>& data,
                              EncoderStack& encoder) {
    if (cfg.encoder.kind == EncoderConfig::Kind::File) {
        EmbeddingMatrix m = load_embedding_file(cfg.encoder.path);
        if (m.rows() != static_cast<int>(data.size()))
            throw std::runtime_error("embedding file has " + std::to_string(m.rows()) +
                                     " rows, dataset has " + std::to_string(data.size()));
        return m;
    }
    std::vector<std::string> texts;
    texts.reserve(data.size());
    for (const auto& u : data) texts.push_back(u.text);
    auto vecs = encoder.encode(texts);
    const int d = static_cast<int>(vecs.front().size());
    EmbeddingMatrix m(static_cast<int>(vecs.size()), d);
    for (size_t i = 0; i < vecs.size(); ++i) m.set_row(static_cast<int>(i), vecs[i]);
    return m;
}

void l2_normalize_rows(EmbeddingMatrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
        double norm = l2_norm(m.row(i));
        if (norm == 0.0)
            throw std::runtime_error("cannot normalize zero-norm embedding row " +
                                     std::to_string(i));
        Vec row(m.row(i).begin(), m.row(i).end());
        for (double& v : row) v /= norm;
        m.set_row(i, row);
    }
}

}  // namespace

RunPaths run_to_files(const PipelineConfig& raw, const std::string& dataset_path,
                      const std::string& output_dir) {
    PipelineConfig cfg = validate_config(raw);
    auto data = load_dataset(dataset_path);

    // kind=File pairs the corpus matrix with a mock for novel texts; the
    // mock must produce vectors in the corpus dimension.
    EncoderStack probe = make_encoder_stack(cfg.encoder);
    EmbeddingMatrix full = corpus_matrix(cfg, data, probe);
    if (cfg.encoder.kind == EncoderConfig::Kind::File) cfg.encoder.mock_dim = full.cols();
    EncoderStack encoder = cfg.encoder.kind == EncoderConfig::Kind::File
                               ? make_encoder_stack(cfg.encoder)
                               : std::move(probe);
    if (cfg.normalize_embeddings) l2_normalize_rows(full);

    PipelineInput input;
    const bool semi = cfg.mode == RunMode::SemiSupervised;
    if (semi) {
        LabeledSubset subset = build_labeled_subset(data);
        if (subset.intent_count() == 0)
            throw std::runtime_error("semi_supervised mode requires labeled utterances");
        subset.seed_centroids = compute_seed_centroids(subset, full);
        input.labeled = std::move(subset);
    }
    for (const auto& u : data) {
        if (semi && !cfg.include_labeled && u.label) continue;
        input.ids.push_back(u.id);
        input.texts.push_back(u.text);
        input.labels.push_back(u.label);
    }
    input.X = EmbeddingMatrix(static_cast<int>(input.ids.size()), full.cols());
    for (size_t i = 0; i < input.ids.size(); ++i)
        input.X.set_row(static_cast<int>(i), full.row(input.ids[i]));

    fs::create_directories(output_dir);
    RunPaths paths;
    paths.assignments = (fs::path(output_dir) / "assignments.jsonl").string();
    paths.summaries = (fs::path(output_dir) / "summaries.json").string();
    paths.report = (fs::path(output_dir) / "report.json").string();

    LlmClient llm = LlmClient::from_config(cfg.llm);
    PipelineResult result;
    try {
        result = run_pipeline(input, cfg, llm, encoder);
    } catch (const PipelineAbort& abort) {
        write_text(paths.report, report_to_json(abort.partial).dump(2) + "\n");
        throw;
    }

    std::string assignments;
    for (size_t i = 0; i < input.ids.size(); ++i) {
        json line = {{"id", input.ids[i]}, {"cluster", result.assignments[i]}};
        assignments += line.dump() + "\n";
    }
    write_text(paths.assignments, assignments);

    json summaries = json::array();
    for (const auto& s : result.summaries)
        summaries.push_back({{"cluster", s.cluster},
                             {"summary", s.summary},
                             {"exemplar_ids", s.exemplar_ids}});
    write_text(paths.summaries, summaries.dump(2) + "\n");

    write_text(paths.report, report_to_json(result.report).dump(2) + "\n");
    return paths;
}

json eval_files(const std::string& pred_path, const std::string& dataset_path) {
    auto data = load_dataset(dataset_path);
    std::unordered_map<int, std::string> labels;
    for (const auto& u : data)
        if (u.label) labels.emplace(u.id, *u.label);

    std::ifstream f(pred_path);
    if (!f) throw std::runtime_error("cannot open predictions file: " + pred_path);
    std::vector<int> pred, truth;
    std::unordered_map<std::string, int> dense;
    std::unordered_map<int, bool> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("id") || !rec.contains("cluster"))
            throw std::runtime_error(pred_path + ": malformed prediction at line " +
                                     std::to_string(line_no));
        int id = rec["id"].get<int>();
        if (!seen.emplace(id, true).second)
            throw std::runtime_error("id mismatch: id " + std::to_string(id) +
                                     " predicted more than once");
        auto it = labels.find(id);
        if (it == labels.end())
            throw std::runtime_error("id mismatch: id " + std::to_string(id) +
                                     " has no labeled dataset record");
        auto dit = dense.find(it->second);
        if (dit == dense.end())
            dit = dense.emplace(it->second, static_cast<int>(dense.size())).first;
        pred.push_back(rec["cluster"].get<int>());
        truth.push_back(dit->second);
    }
    if (pred.empty()) throw std::runtime_error(pred_path + ": no predictions");
    Metrics m = evaluate(pred, truth);
    return json{{"nmi", m.nmi}, {"ari", m.ari}, {"acc", m.acc}, {"ana", m.ana}};
}

}  // namespace nilc
