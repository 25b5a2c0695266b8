#include "nilc/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace nilc {

EmbeddingMatrix::EmbeddingMatrix(int n, int d, std::vector<double> data)
    : n_(n), d_(d), data_(std::move(data)) {
    if (data_.size() != static_cast<size_t>(n) * d)
        throw std::invalid_argument("embedding data size does not match n*d");
}

void EmbeddingMatrix::set_row(int i, std::span<const double> v) {
    if (static_cast<int>(v.size()) != d_)
        throw std::invalid_argument("row dimension mismatch");
    std::copy(v.begin(), v.end(), data_.begin() + static_cast<size_t>(i) * d_);
    ++revision_;
}

void EmbeddingMatrix::check_finite() const {
    for (size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i]))
            throw std::runtime_error("non-finite embedding value at row " +
                                     std::to_string(i / d_));
    }
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        throw std::domain_error("undefined cosine for zero vector");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

double squared_euclidean(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("squared_euclidean: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        double diff = u[i] - v[i];
        s += diff * diff;
    }
    return s;
}

Vec mean_embedding(const std::vector<std::span<const double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("empty cluster");
    Vec out(rows.front().size(), 0.0);
    for (const auto& r : rows) {
        if (r.size() != out.size())
            throw std::invalid_argument("mean_embedding: dimension mismatch");
        for (size_t j = 0; j < out.size(); ++j) out[j] += r[j];
    }
    for (double& x : out) x /= static_cast<double>(rows.size());
    return out;
}

Vec mean_embedding(const EmbeddingMatrix& x, std::span<const int> ids) {
    if (ids.empty()) throw std::invalid_argument("empty cluster");
    Vec out(x.cols(), 0.0);
    for (int id : ids) {
        auto r = x.row(id);
        for (int j = 0; j < x.cols(); ++j) out[j] += r[j];
    }
    for (double& v : out) v /= static_cast<double>(ids.size());
    return out;
}

std::vector<double> softmax_neg_sq(std::span<const double> sq_dists) {
    if (sq_dists.empty()) throw std::invalid_argument("softmax over empty input");
    double best = -sq_dists[0];
    for (double d : sq_dists) {
        if (!std::isfinite(d)) throw std::runtime_error("non-finite distance in posterior");
        best = std::max(best, -d);
    }
    std::vector<double> p(sq_dists.size());
    double z = 0.0;
    for (size_t k = 0; k < sq_dists.size(); ++k) {
        p[k] = std::exp(-sq_dists[k] - best);
        z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
}

std::vector<double> gaussian_posteriors(std::span<const double> x, const std::vector<Vec>& mu) {
    if (mu.empty()) throw std::invalid_argument("gaussian_posteriors: no centroids");
    std::vector<double> d2(mu.size());
    for (size_t k = 0; k < mu.size(); ++k) d2[k] = squared_euclidean(x, mu[k]);
    return softmax_neg_sq(d2);
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::domain_error("entropy: negative probability");
        if (v > 0.0) h -= v * std::log(v);
    }
    return h < 0.0 ? 0.0 : h;
}

}  // namespace nilc
