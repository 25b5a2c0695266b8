#pragma once

#include <span>
#include <vector>

#include "nilc/types.hpp"

namespace nilc {

/// Cosine similarity in [-1, 1]. Throws on a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

/// Sum of squared coordinate differences. Throws on dimension mismatch.
double squared_euclidean(std::span<const double> u, std::span<const double> v);

double l2_norm(std::span<const double> v);

/// Arithmetic per-coordinate mean of the given rows. Throws "empty cluster"
/// on an empty input; callers must repair empty clusters first.
Vec mean_embedding(const std::vector<std::span<const double>>& rows);
Vec mean_embedding(const EmbeddingMatrix& x, std::span<const int> ids);

/// Softmax over negated squared distances (Gaussian kernel, temperature 1),
/// computed with max-subtraction. Probabilities sum to 1 within 1e-9.
std::vector<double> softmax_neg_sq(std::span<const double> sq_dists);

/// Posterior P(C_k | x) over the K centroids.
std::vector<double> gaussian_posteriors(std::span<const double> x, const std::vector<Vec>& mu);

/// Shannon entropy in nats; 0*log(0) counts as 0. Throws on a negative entry.
double entropy(std::span<const double> p);

}  // namespace nilc
