#include "nilc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nilc/hungarian.hpp"

namespace nilc {

namespace {

void check_lengths(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("label vectors differ in length");
    if (pred.empty()) throw std::invalid_argument("empty label vectors");
    for (int v : pred)
        if (v < 0) throw std::invalid_argument("negative predicted label");
    for (int v : truth)
        if (v < 0) throw std::invalid_argument("negative true label");
}

double partition_entropy(const std::vector<long long>& marginals, long long n) {
    double h = 0.0;
    for (long long m : marginals) {
        if (m == 0) continue;
        double p = static_cast<double>(m) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

long long pairs(long long m) { return m * (m - 1) / 2; }

}  // namespace

ContingencyTable ContingencyTable::build(std::span<const int> pred, std::span<const int> truth) {
    check_lengths(pred, truth);
    ContingencyTable t;
    int r = 0, c = 0;
    for (int v : pred) r = std::max(r, v + 1);
    for (int v : truth) c = std::max(c, v + 1);
    t.r = r;
    t.c = c;
    t.counts.assign(static_cast<size_t>(r) * c, 0);
    t.row_marginals.assign(r, 0);
    t.col_marginals.assign(c, 0);
    t.n = static_cast<long long>(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        ++t.counts[static_cast<size_t>(pred[i]) * c + truth[i]];
        ++t.row_marginals[pred[i]];
        ++t.col_marginals[truth[i]];
    }
    return t;
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
    auto t = ContingencyTable::build(pred, truth);
    double hp = partition_entropy(t.row_marginals, t.n);
    double ht = partition_entropy(t.col_marginals, t.n);
    double mi = 0.0;
    for (int i = 0; i < t.r; ++i) {
        for (int j = 0; j < t.c; ++j) {
            long long nij = t.at(i, j);
            if (nij == 0) continue;
            double pij = static_cast<double>(nij) / static_cast<double>(t.n);
            double pi = static_cast<double>(t.row_marginals[i]) / static_cast<double>(t.n);
            double pj = static_cast<double>(t.col_marginals[j]) / static_cast<double>(t.n);
            mi += pij * std::log(pij / (pi * pj));
        }
    }
    double denom = 0.5 * (hp + ht);
    if (denom <= 0.0) {
        // both partitions single-class: identical iff trivially equal
        return 1.0;
    }
    if (hp == 0.0 || ht == 0.0) return 0.0;  // one side single-class, the other not
    double v = mi / denom;
    return std::clamp(v, 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
    auto t = ContingencyTable::build(pred, truth);
    double sum_ij = 0.0, sum_i = 0.0, sum_j = 0.0;
    for (long long nij : t.counts) sum_ij += static_cast<double>(pairs(nij));
    for (long long m : t.row_marginals) sum_i += static_cast<double>(pairs(m));
    for (long long m : t.col_marginals) sum_j += static_cast<double>(pairs(m));
    double total_pairs = static_cast<double>(pairs(t.n));
    if (total_pairs == 0.0) return 1.0;  // single sample
    double expected = sum_i * sum_j / total_pairs;
    double max_index = 0.5 * (sum_i + sum_j);
    if (max_index == expected) return 1.0;  // degenerate: both partitions trivial
    return (sum_ij - expected) / (max_index - expected);
}

double acc(std::span<const int> pred, std::span<const int> truth) {
    auto t = ContingencyTable::build(pred, truth);
    // Hungarian maximizes matched counts; pad with zero columns when there
    // are more predicted clusters than true labels (unmatched clusters score 0).
    int cols = std::max(t.r, t.c);
    CostMatrix cm(t.r, cols);
    for (int i = 0; i < t.r; ++i)
        for (int j = 0; j < cols; ++j)
            cm.at(i, j) = j < t.c ? -static_cast<double>(t.at(i, j)) : 0.0;
    auto sol = hungarian_min_cost(cm);
    double matched = 0.0;
    for (int i = 0; i < t.r; ++i) {
        int j = sol.row_to_col[i];
        if (j < t.c) matched += static_cast<double>(t.at(i, j));
    }
    return matched / static_cast<double>(t.n);
}

Metrics evaluate(std::span<const int> pred, std::span<const int> truth) {
    Metrics m;
    m.nmi = nmi(pred, truth);
    m.ari = ari(pred, truth);
    m.acc = acc(pred, truth);
    m.ana = (m.nmi + m.ari + m.acc) / 3.0;
    return m;
}

}  // namespace nilc
