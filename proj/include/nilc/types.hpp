#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nilc {

using Vec = std::vector<double>;

/// One user utterance. Ids are dense indexes (0..N-1) in dataset file order.
/// The label is the known-intent identifier, present only for labeled samples.
struct Utterance {
    int id = 0;
    std::string text;
    std::optional<std::string> label;
};

/// N x d row-major embedding matrix. HSR overwrites rows in place and bumps
/// the revision counter on every accepted rewrite.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(int n, int d) : n_(n), d_(d), data_(static_cast<size_t>(n) * d, 0.0) {}
    EmbeddingMatrix(int n, int d, std::vector<double> data);

    int rows() const { return n_; }
    int cols() const { return d_; }
    std::uint64_t revision() const { return revision_; }

    std::span<const double> row(int i) const {
        return {data_.data() + static_cast<size_t>(i) * d_, static_cast<size_t>(d_)};
    }
    void set_row(int i, std::span<const double> v);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& mutable_data() { return data_; }

    /// Throws if any entry is NaN or infinite.
    void check_finite() const;

private:
    int n_ = 0;
    int d_ = 0;
    std::vector<double> data_;
    std::uint64_t revision_ = 0;
};

/// Current clustering state: assignments, Euclidean centroids mu, and the
/// per-cluster semantic side (summary text + its embedding theta). theta[k]
/// is present iff summaries[k] is present.
struct ClusterState {
    int k = 0;
    std::vector<int> assignments;
    std::vector<Vec> mu;
    std::vector<std::optional<Vec>> theta;
    std::vector<std::optional<std::string>> summaries;

    bool has_theta() const {
        if (theta.size() != static_cast<size_t>(k)) return false;
        for (const auto& t : theta)
            if (!t) return false;
        return k > 0;
    }
};

/// Semi-supervised side channel: the M known intents, their labeled member
/// utterance ids, and the per-intent mean embeddings (seed centroids).
struct LabeledSubset {
    std::vector<std::string> known_intents;
    std::vector<std::vector<int>> members;
    std::vector<Vec> seed_centroids;

    int intent_count() const { return static_cast<int>(known_intents.size()); }
};

}  // namespace nilc
