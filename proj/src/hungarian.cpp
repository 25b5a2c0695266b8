#include "nilc/hungarian.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nilc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SquareSolution {
    std::vector<int> row_to_col;
    std::vector<double> u;  // row potentials, 0-indexed
    std::vector<double> v;  // column potentials, 0-indexed
};

// Classical augmenting-path solver with potentials on an n x n matrix.
// Maintains dual feasibility u[i] + v[j] <= cost(i, j), tight on matched edges.
SquareSolution solve_square(int n, const std::function<double(int, int)>& cost) {
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    SquareSolution sol;
    sol.row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) sol.row_to_col[p[j] - 1] = j - 1;
    sol.u.assign(n, 0.0);
    sol.v.assign(n, 0.0);
    for (int i = 0; i < n; ++i) sol.u[i] = u[i + 1];
    for (int j = 0; j < n; ++j) sol.v[j] = v[j + 1];
    return sol;
}

}  // namespace

Assignment hungarian_min_cost(const CostMatrix& c) {
    if (c.rows > c.cols)
        throw std::invalid_argument("hungarian_min_cost: rows exceed cols, pad the matrix first");
    double scale = 1.0;
    for (double x : c.values) {
        if (!std::isfinite(x))
            throw std::invalid_argument("hungarian_min_cost: non-finite cost entry");
        scale = std::max(scale, std::abs(x));
    }
    Assignment out;
    if (c.rows == 0) return out;

    // Square the problem: virtual rows cost 0 everywhere and absorb the
    // spare columns without changing the optimum.
    const int n = c.cols;
    const int real_rows = c.rows;
    auto sq_cost = [&](int i, int j) { return i < real_rows ? c.at(i, j) : 0.0; };

    SquareSolution base = solve_square(n, sq_cost);
    double t_star = 0.0;
    for (int i = 0; i < real_rows; ++i) t_star += c.at(i, base.row_to_col[i]);

    const double eps_total = 1e-9 * (1.0 + std::abs(t_star));
    const double eps_rc = 1e-7 * scale;

    // Lexicographic refinement. Every cost-optimal assignment lives on
    // zero-reduced-cost edges of the base duals, so for each row only those
    // columns are candidates; a sub-solve verifies that fixing a candidate
    // still completes to total t_star. The running witness (a known-optimal
    // completion) makes the common unique-optimum case solve-free.
    std::vector<int> avail(n);
    for (int j = 0; j < n; ++j) avail[j] = j;
    std::vector<int> witness = base.row_to_col;  // witness[i] valid for rows i..n-1
    std::vector<int> result(real_rows, -1);
    double fixed_cost = 0.0;

    for (int i = 0; i < real_rows; ++i) {
        int chosen = -1;
        for (size_t a = 0; a < avail.size(); ++a) {
            int j = avail[a];
            if (j == witness[i]) {
                chosen = j;  // witness already proves feasibility
                break;
            }
            double rc = c.at(i, j) - base.u[i] - base.v[j];
            if (rc > eps_rc) continue;

            // Try fixing (i -> j): solve the remaining square subproblem.
            std::vector<int> sub_cols;
            sub_cols.reserve(avail.size() - 1);
            for (int col : avail)
                if (col != j) sub_cols.push_back(col);
            const int m = static_cast<int>(sub_cols.size());
            auto sub_cost = [&](int r, int cc) { return sq_cost(i + 1 + r, sub_cols[cc]); };
            SquareSolution sub = solve_square(m, sub_cost);
            double sub_total = 0.0;
            for (int r = 0; r < m; ++r) sub_total += sub_cost(r, sub.row_to_col[r]);
            if (fixed_cost + c.at(i, j) + sub_total <= t_star + eps_total) {
                chosen = j;
                for (int r = 0; r < m; ++r) witness[i + 1 + r] = sub_cols[sub.row_to_col[r]];
                break;
            }
        }
        if (chosen < 0) chosen = witness[i];  // fp fallback; witness is always feasible
        result[i] = chosen;
        fixed_cost += c.at(i, chosen);
        for (size_t a = 0; a < avail.size(); ++a) {
            if (avail[a] == chosen) {
                avail.erase(avail.begin() + a);
                break;
            }
        }
    }

    out.row_to_col = std::move(result);
    out.total_cost = 0.0;
    for (int i = 0; i < real_rows; ++i) out.total_cost += c.at(i, out.row_to_col[i]);
    return out;
}

}  // namespace nilc
