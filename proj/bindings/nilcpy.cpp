#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nilc/clustering.hpp"
#include "nilc/dataset.hpp"
#include "nilc/encoder.hpp"
#include "nilc/eval.hpp"
#include "nilc/exemplars.hpp"
#include "nilc/hungarian.hpp"
#include "nilc/numerics.hpp"
#include "nilc/runner.hpp"

namespace py = pybind11;
using nilc::EmbeddingMatrix;
using nilc::Vec;

namespace {

EmbeddingMatrix to_matrix(const std::vector<Vec>& rows) {
    if (rows.empty()) throw std::invalid_argument("empty matrix");
    EmbeddingMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) m.set_row(static_cast<int>(i), rows[i]);
    return m;
}

std::vector<Vec> from_matrix(const EmbeddingMatrix& m) {
    std::vector<Vec> out(m.rows());
    for (int i = 0; i < m.rows(); ++i) out[i] = Vec(m.row(i).begin(), m.row(i).end());
    return out;
}

}  // namespace

PYBIND11_MODULE(nilcpy, m) {
    m.doc() = "LLM-assisted iterative clustering for new intent discovery";

    m.def("cosine", [](const Vec& u, const Vec& v) { return nilc::cosine(u, v); });
    m.def("squared_euclidean",
          [](const Vec& u, const Vec& v) { return nilc::squared_euclidean(u, v); });
    m.def("mean_embedding", [](const std::vector<Vec>& rows) {
        std::vector<std::span<const double>> spans(rows.begin(), rows.end());
        return nilc::mean_embedding(spans);
    });
    m.def("gaussian_posteriors", [](const Vec& x, const std::vector<Vec>& mu) {
        return nilc::gaussian_posteriors(x, mu);
    });
    m.def("entropy", [](const Vec& p) { return nilc::entropy(p); });

    m.def("hungarian", [](const std::vector<Vec>& cost) {
        if (cost.empty()) throw std::invalid_argument("empty cost matrix");
        nilc::CostMatrix c(static_cast<int>(cost.size()), static_cast<int>(cost.front().size()));
        for (size_t i = 0; i < cost.size(); ++i)
            for (size_t j = 0; j < cost[i].size(); ++j)
                c.at(static_cast<int>(i), static_cast<int>(j)) = cost[i][j];
        auto sol = nilc::hungarian_min_cost(c);
        return py::make_tuple(sol.row_to_col, sol.total_cost);
    });

    m.def("kmeanspp", [](const std::vector<Vec>& rows, int k, std::uint64_t seed) {
        auto x = to_matrix(rows);
        auto state = nilc::kmeanspp_init(x, k, seed);
        return py::make_tuple(state.assignments, state.mu);
    });

    m.def("select_exemplars",
          [](const std::vector<Vec>& rows, const std::string& strategy, int count,
             std::uint64_t seed) {
              auto x = to_matrix(rows);
              std::vector<int> members(rows.size());
              for (size_t i = 0; i < rows.size(); ++i) members[i] = static_cast<int>(i);
              std::vector<std::span<const double>> spans(rows.begin(), rows.end());
              Vec mu = nilc::mean_embedding(spans);
              auto set = nilc::select_exemplars(nilc::selection_from_string(strategy), x, members,
                                                mu, count, seed, 0);
              return set.member_ids;
          },
          py::arg("rows"), py::arg("strategy"), py::arg("count"), py::arg("seed") = 0);

    m.def("nmi", [](const std::vector<int>& p, const std::vector<int>& t) { return nilc::nmi(p, t); });
    m.def("ari", [](const std::vector<int>& p, const std::vector<int>& t) { return nilc::ari(p, t); });
    m.def("acc", [](const std::vector<int>& p, const std::vector<int>& t) { return nilc::acc(p, t); });
    m.def("evaluate", [](const std::vector<int>& p, const std::vector<int>& t) {
        auto s = nilc::evaluate(p, t);
        py::dict d;
        d["nmi"] = s.nmi;
        d["ari"] = s.ari;
        d["acc"] = s.acc;
        d["ana"] = s.ana;
        return d;
    });

    m.def("mock_encode",
          [](const std::vector<std::string>& texts, int dim, std::uint64_t seed) {
              std::vector<Vec> out;
              out.reserve(texts.size());
              for (const auto& t : texts)
                  out.push_back(nilc::MockEncoder::encode_text(t, dim, seed));
              return out;
          },
          py::arg("texts"), py::arg("dim") = 32, py::arg("seed") = 0x6e696c63u);

    m.def("load_dataset", [](const std::string& path) {
        py::list out;
        for (const auto& u : nilc::load_dataset(path)) {
            py::dict d;
            d["id"] = u.id;
            d["text"] = u.text;
            if (u.label) d["label"] = *u.label;
            out.append(d);
        }
        return out;
    });

    m.def("load_embeddings",
          [](const std::string& path) { return from_matrix(nilc::load_embedding_file(path)); });
    m.def("write_embeddings", [](const std::string& path, const std::vector<Vec>& rows) {
        nilc::write_embedding_file(path, to_matrix(rows));
    });

    m.def("run",
          [](const std::string& dataset, const std::string& config_json,
             const std::string& output_dir) {
              auto cfg = nilc::parse_config_text(config_json, "<config>");
              auto paths = nilc::run_to_files(cfg, dataset, output_dir);
              py::dict d;
              d["assignments"] = paths.assignments;
              d["summaries"] = paths.summaries;
              d["report"] = paths.report;
              return d;
          },
          py::arg("dataset"), py::arg("config_json"), py::arg("output_dir"),
          "Run the full pipeline from a dataset file; returns the output paths.");

    m.def("eval_files", [](const std::string& pred, const std::string& dataset) {
        auto j = nilc::eval_files(pred, dataset);
        py::dict d;
        d["nmi"] = j["nmi"].get<double>();
        d["ari"] = j["ari"].get<double>();
        d["acc"] = j["acc"].get<double>();
        d["ana"] = j["ana"].get<double>();
        return d;
    });
}
