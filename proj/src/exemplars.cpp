#include "nilc/exemplars.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>

#include "nilc/numerics.hpp"

namespace nilc {

namespace {

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<int> sorted_ids(std::span<const int> members) {
    std::vector<int> ids(members.begin(), members.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

// top-m by (score desc, id asc)
std::vector<int> top_by_score(const std::vector<int>& ids, const std::vector<double>& scores,
                              int m) {
    std::vector<size_t> order(ids.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    int take = std::min<int>(m, static_cast<int>(ids.size()));
    std::vector<int> out;
    out.reserve(take);
    for (int i = 0; i < take; ++i) out.push_back(ids[order[i]]);
    return out;
}

}  // namespace

ExemplarSet select_kmeanspp(const EmbeddingMatrix& x, std::span<const int> members, int m,
                            std::uint64_t rng_seed, int cluster) {
    if (members.empty()) throw std::invalid_argument("empty cluster");
    auto ids = sorted_ids(members);
    const int n = static_cast<int>(ids.size());
    ExemplarSet out;
    out.cluster = cluster;
    out.strategy = SelectionStrategy::KMeansPP;
    if (m >= n) {
        out.member_ids = ids;
        return out;
    }

    std::mt19937_64 rng(rng_seed);
    std::vector<char> picked(n, 0);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    auto pick_index = [&](int idx) {
        picked[idx] = 1;
        out.member_ids.push_back(ids[idx]);
        for (int i = 0; i < n; ++i) {
            double d2 = squared_euclidean(x.row(ids[i]), x.row(ids[idx]));
            if (d2 < min_d2[i]) min_d2[i] = d2;
        }
    };

    pick_index(std::min(n - 1, static_cast<int>(unit_draw(rng) * n)));
    while (static_cast<int>(out.member_ids.size()) < m) {
        double w = 0.0;
        for (int i = 0; i < n; ++i)
            if (!picked[i]) w += min_d2[i];
        int pick = -1;
        if (w <= 0.0) {
            int unpicked = 0;
            for (int i = 0; i < n; ++i) unpicked += !picked[i];
            int target = std::min(unpicked - 1, static_cast<int>(unit_draw(rng) * unpicked));
            for (int i = 0, seen = 0; i < n; ++i) {
                if (picked[i]) continue;
                if (seen++ == target) {
                    pick = i;
                    break;
                }
            }
        } else {
            double r = unit_draw(rng) * w;
            double cum = 0.0;
            int last_positive = -1;
            for (int i = 0; i < n; ++i) {
                if (picked[i] || min_d2[i] <= 0.0) continue;
                cum += min_d2[i];
                last_positive = i;
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = last_positive;
        }
        pick_index(pick);
    }
    return out;
}

ExemplarSet select_mad(const EmbeddingMatrix& x, std::span<const int> members, int m,
                       int cluster) {
    if (members.empty()) throw std::invalid_argument("empty cluster");
    auto ids = sorted_ids(members);
    ExemplarSet out;
    out.cluster = cluster;
    out.strategy = SelectionStrategy::MAD;
    if (ids.size() == 1) {
        out.member_ids = ids;
        return out;
    }
    const size_t n = ids.size();
    std::vector<double> score(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double d = std::sqrt(squared_euclidean(x.row(ids[i]), x.row(ids[j])));
            score[i] += d;
            score[j] += d;
        }
    }
    for (double& s : score) s /= static_cast<double>(n - 1);
    out.member_ids = top_by_score(ids, score, m);
    return out;
}

ExemplarSet select_mmr(const EmbeddingMatrix& x, std::span<const int> members, const Vec& mu,
                       int m, int cluster) {
    if (members.empty()) throw std::invalid_argument("empty cluster");
    auto ids = sorted_ids(members);
    ExemplarSet out;
    out.cluster = cluster;
    out.strategy = SelectionStrategy::MMR;

    const bool mu_usable = l2_norm(mu) > 0.0;
    std::vector<int> usable;
    std::vector<double> relevance;
    for (int id : ids) {
        if (l2_norm(x.row(id)) == 0.0) {
            std::cerr << "[nilc] warning: zero-norm row " << id << " skipped by MMR\n";
            continue;
        }
        usable.push_back(id);
        relevance.push_back(mu_usable ? cosine(x.row(id), mu) : 0.0);
    }
    const int n = static_cast<int>(usable.size());
    const int take = std::min<int>(m, n);
    std::vector<char> selected(n, 0);
    std::vector<double> max_sim(n, -std::numeric_limits<double>::infinity());
    for (int round = 0; round < take; ++round) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (selected[i]) continue;
            double score = round == 0 ? relevance[i] : relevance[i] - max_sim[i];
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        selected[best] = 1;
        out.member_ids.push_back(usable[best]);
        for (int i = 0; i < n; ++i) {
            if (selected[i]) continue;
            double sim = cosine(x.row(usable[i]), x.row(usable[best]));
            if (sim > max_sim[i]) max_sim[i] = sim;
        }
    }
    return out;
}

ExemplarSet select_nn(const EmbeddingMatrix& x, std::span<const int> members, int m, int cluster) {
    if (members.empty()) throw std::invalid_argument("empty cluster");
    auto ids = sorted_ids(members);
    ExemplarSet out;
    out.cluster = cluster;
    out.strategy = SelectionStrategy::NN;

    std::vector<int> usable;
    for (int id : ids) {
        if (l2_norm(x.row(id)) == 0.0) continue;
        usable.push_back(id);
    }
    if (usable.size() == 1) {
        out.member_ids = usable;
        return out;
    }
    const size_t n = usable.size();
    std::vector<double> centrality(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double sim = cosine(x.row(usable[i]), x.row(usable[j]));
            centrality[i] += sim;
            centrality[j] += sim;
        }
    }
    out.member_ids = top_by_score(usable, centrality, m);
    return out;
}

ExemplarSet select_exemplars(SelectionStrategy strategy, const EmbeddingMatrix& x,
                             std::span<const int> members, const Vec& mu, int m,
                             std::uint64_t rng_seed, int cluster) {
    switch (strategy) {
        case SelectionStrategy::KMeansPP: return select_kmeanspp(x, members, m, rng_seed, cluster);
        case SelectionStrategy::MAD: return select_mad(x, members, m, cluster);
        case SelectionStrategy::MMR: return select_mmr(x, members, mu, m, cluster);
        case SelectionStrategy::NN: return select_nn(x, members, m, cluster);
    }
    throw std::invalid_argument("unknown selection strategy");
}

}  // namespace nilc
