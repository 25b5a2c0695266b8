#pragma once

#include <span>
#include <vector>

namespace nilc {

/// Predicted-cluster x true-label co-occurrence counts with marginals.
struct ContingencyTable {
    int r = 0;
    int c = 0;
    std::vector<long long> counts;  // r x c row-major
    std::vector<long long> row_marginals;
    std::vector<long long> col_marginals;
    long long n = 0;

    long long at(int i, int j) const { return counts[static_cast<size_t>(i) * c + j]; }

    /// Labels are dense non-negative ints; r/c sized by max label + 1.
    static ContingencyTable build(std::span<const int> pred, std::span<const int> truth);
};

/// Normalized mutual information with arithmetic-mean normalization, in [0, 1].
double nmi(std::span<const int> pred, std::span<const int> truth);

/// Adjusted Rand index via pair counts, in [-1, 1].
double ari(std::span<const int> pred, std::span<const int> truth);

/// Hungarian-matched clustering accuracy, in [0, 1].
double acc(std::span<const int> pred, std::span<const int> truth);

struct Metrics {
    double nmi = 0.0;
    double ari = 0.0;
    double acc = 0.0;
    double ana = 0.0;  // mean of the three
};

Metrics evaluate(std::span<const int> pred, std::span<const int> truth);

}  // namespace nilc
