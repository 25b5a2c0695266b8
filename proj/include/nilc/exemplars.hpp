#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nilc/config.hpp"
#include "nilc/types.hpp"

namespace nilc {

struct ExemplarSet {
    int cluster = -1;
    std::vector<int> member_ids;  // subset of the input members, no duplicates
    SelectionStrategy strategy = SelectionStrategy::MMR;
};

/// D^2-weighted iterative pick (first uniform, then proportional to min
/// squared distance to the picks so far). Same draw protocol as
/// kmeanspp_init; identical-point clusters fall back to uniform picks.
ExemplarSet select_kmeanspp(const EmbeddingMatrix& x, std::span<const int> members, int m,
                            std::uint64_t rng_seed, int cluster);

/// Peripheral picks: top-m by mean Euclidean distance to the other members,
/// descending, ties to the lower id.
ExemplarSet select_mad(const EmbeddingMatrix& x, std::span<const int> members, int m, int cluster);

/// Relevance/diversity greedy: first pick maximizes cos(x, mu); each next
/// maximizes cos(x_j, mu) - max_{s in S} cos(x_j, x_s). Zero-norm rows are
/// skipped with a warning.
ExemplarSet select_mmr(const EmbeddingMatrix& x, std::span<const int> members, const Vec& mu,
                       int m, int cluster);

/// Central picks: top-m by cumulative cosine similarity to the other
/// members; zero-norm rows are excluded from scoring and candidacy.
ExemplarSet select_nn(const EmbeddingMatrix& x, std::span<const int> members, int m, int cluster);

/// Strategy dispatcher used by the pipeline.
ExemplarSet select_exemplars(SelectionStrategy strategy, const EmbeddingMatrix& x,
                             std::span<const int> members, const Vec& mu, int m,
                             std::uint64_t rng_seed, int cluster);

}  // namespace nilc
