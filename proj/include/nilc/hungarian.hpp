#pragma once

#include <vector>

namespace nilc {

/// Dense rows x cols cost matrix. Assignment calls require rows <= cols;
/// pad with a large sentinel cost when the natural problem is wider than tall.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    CostMatrix() = default;
    CostMatrix(int r, int c) : rows(r), cols(c), values(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

struct Assignment {
    std::vector<int> row_to_col;
    double total_cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols),
/// O(n^3) augmenting-path solver. Among cost-equal optima the returned
/// row_to_col vector is the lexicographically smallest one. Throws on
/// non-finite entries or rows > cols.
Assignment hungarian_min_cost(const CostMatrix& c);

}  // namespace nilc
