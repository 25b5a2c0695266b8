#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "nilc/clustering.hpp"
#include "nilc/numerics.hpp"

using namespace nilc;

namespace {

EmbeddingMatrix from_rows(const std::vector<Vec>& rows) {
    EmbeddingMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) m.set_row(static_cast<int>(i), rows[i]);
    return m;
}

EmbeddingMatrix two_blobs(std::uint64_t seed, int per_blob, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<Vec> rows;
    for (int i = 0; i < per_blob; ++i) rows.push_back(Vec{0.0 + noise(rng), 0.0 + noise(rng)});
    for (int i = 0; i < per_blob; ++i) rows.push_back(Vec{30.0 + noise(rng), 0.0 + noise(rng)});
    return from_rows(rows);
}

}  // namespace

TEST_CASE("kmeanspp_init") {
    SUBCASE("N == K makes every point its own centroid") {
        auto x = from_rows({{0, 0}, {5, 0}, {0, 5}, {7, 7}});
        auto state = kmeanspp_init(x, 4, 3);
        std::set<int> clusters(state.assignments.begin(), state.assignments.end());
        CHECK(clusters.size() == 4);
        double wcss = 0;
        for (int i = 0; i < x.rows(); ++i)
            wcss += squared_euclidean(x.row(i), state.mu[state.assignments[i]]);
        CHECK(wcss == doctest::Approx(0.0));
    }
    SUBCASE("well-separated blobs get one centroid each for all 50 seeds") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto x = two_blobs(seed + 1000, 20, 0.5);
            auto state = kmeanspp_init(x, 2, seed);
            // centroid 0/1 must straddle the blob boundary at x=15
            CHECK(((state.mu[0][0] < 15.0) != (state.mu[1][0] < 15.0)));
        }
    }
    SUBCASE("same seed twice is bit-identical") {
        auto x = two_blobs(7, 15, 1.0);
        auto a = kmeanspp_init(x, 3, 42);
        auto b = kmeanspp_init(x, 3, 42);
        CHECK(a.assignments == b.assignments);
        CHECK(a.mu == b.mu);
    }
    SUBCASE("N < K rejected") {
        auto x = from_rows({{0, 0}, {1, 1}});
        CHECK_THROWS(kmeanspp_init(x, 3, 0));
    }
}

TEST_CASE("nearest_semantic_neighbor") {
    SUBCASE("K=2 returns the other index") {
        std::vector<std::optional<Vec>> theta{Vec{1, 0}, Vec{0, 1}};
        CHECK(nearest_semantic_neighbor(theta, 0) == 1);
        CHECK(nearest_semantic_neighbor(theta, 1) == 0);
    }
    SUBCASE("pairwise cosine oracle") {
        std::vector<std::optional<Vec>> theta{Vec{1, 0}, Vec{0.9, 0.1}, Vec{0, 1}};
        CHECK(nearest_semantic_neighbor(theta, 0) == 1);
    }
    SUBCASE("ties take the lower index") {
        std::vector<std::optional<Vec>> theta{Vec{1, 0}, Vec{0, 1}, Vec{0, 1}};
        CHECK(nearest_semantic_neighbor(theta, 0) == 1);
    }
    SUBCASE("K < 2 rejected") {
        std::vector<std::optional<Vec>> theta{Vec{1, 0}};
        CHECK_THROWS(nearest_semantic_neighbor(theta, 0));
    }
}

TEST_CASE("joint_cost") {
    ClusterState state;
    state.k = 2;
    state.mu = {Vec{0, 0}, Vec{10, 10}};
    state.theta = {Vec{0, 1}, Vec{1, 0}};
    state.summaries = {std::string("a"), std::string("b")};
    std::vector<int> nbr{1, 0};

    SUBCASE("alpha=beta=0 reduces to the squared Euclidean term") {
        CostContext ctx;
        ctx.theta_neighbor = &nbr;
        Vec x{3, 4};
        auto b = joint_cost(x, 0, state, ctx);
        CHECK(b.total == doctest::Approx(25.0));
        CHECK(b.total == doctest::Approx(b.ed));
    }
    SUBCASE("perfect member costs zero") {
        ClusterState s2;
        s2.k = 2;
        Vec x{0, 1};
        s2.mu = {x, Vec{10, 10}};
        s2.theta = {x, Vec{1, 0}};  // theta_nbr(0)=1 is orthogonal to x
        s2.summaries = {std::string("a"), std::string("b")};
        CostContext ctx;
        ctx.weights = {1.0, 1.0, 0.0};
        auto b = joint_cost(x, 0, s2, ctx);
        CHECK(b.total == doctest::Approx(0.0));
    }
    SUBCASE("component-wise oracle") {
        ClusterState s3;
        s3.k = 2;
        s3.mu = {Vec{0, 0}, Vec{5, 5}};
        s3.theta = {Vec{0, 1}, Vec{1, 0}};
        s3.summaries = {std::string("a"), std::string("b")};
        std::vector<int> nbr3{1, 0};
        CostContext ctx;
        ctx.weights = {0.5, 0.5, 0.0};
        ctx.theta_neighbor = &nbr3;
        Vec x{1, 0};
        auto b = joint_cost(x, 0, s3, ctx);
        CHECK(b.ed == doctest::Approx(1.0));
        CHECK(b.sc == doctest::Approx(1.0));
        CHECK(b.ss == doctest::Approx(1.0));
        CHECK(b.total == doctest::Approx(2.0));
    }
    SUBCASE("missing theta with positive weights is an error") {
        ClusterState bare;
        bare.k = 2;
        bare.mu = {Vec{0, 0}, Vec{1, 1}};
        bare.theta.assign(2, std::nullopt);
        bare.summaries.assign(2, std::nullopt);
        CostContext ctx;
        ctx.weights = {0.5, 0.0, 0.0};
        CHECK_THROWS_WITH(joint_cost(Vec{1, 0}, 0, bare, ctx), "semantic centroids required");
    }
}

TEST_CASE("assign_all") {
    SUBCASE("pure Euclidean matches nearest-centroid k-means") {
        auto x = two_blobs(3, 10, 0.8);
        auto state = kmeanspp_init(x, 2, 5);
        CostContext ctx;
        auto res = assign_all(x, state, ctx);
        for (int i = 0; i < x.rows(); ++i) {
            double d0 = squared_euclidean(x.row(i), state.mu[0]);
            double d1 = squared_euclidean(x.row(i), state.mu[1]);
            CHECK(res.assignments[i] == (d1 < d0 ? 1 : 0));
        }
    }
    SUBCASE("cost ties take the lower cluster index") {
        ClusterState state;
        state.k = 2;
        state.mu = {Vec{-1, 0}, Vec{1, 0}};
        state.theta.assign(2, std::nullopt);
        state.summaries.assign(2, std::nullopt);
        auto x = from_rows({{0, 0}});
        CostContext ctx;
        auto res = assign_all(x, state, ctx);
        CHECK(res.assignments[0] == 0);
    }
    SUBCASE("re-assignment never increases the total with centroids fixed") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-5, 5);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<Vec> rows(40, Vec(3));
            for (auto& r : rows)
                for (auto& v : r) v = u(rng);
            auto x = from_rows(rows);
            auto state = kmeanspp_init(x, 4, trial);
            // scramble the assignments, then re-assign
            for (auto& a : state.assignments) a = static_cast<int>(rng() % 4);
            CostContext ctx;
            double before = total_breakdown(x, state, ctx).total;
            auto res = assign_all(x, state, ctx);
            CHECK(res.total_cost <= before + 1e-9);
        }
    }
}

TEST_CASE("update_euclidean_centroids") {
    SUBCASE("means match the mean_embedding oracle") {
        auto x = from_rows({{1, 2}, {3, 4}, {5, 6}, {10, 10}});
        std::vector<int> assign{0, 0, 0, 1};
        auto mu = update_euclidean_centroids(x, assign, 2);
        CHECK(mu[0][0] == doctest::Approx(3.0));
        CHECK(mu[0][1] == doctest::Approx(4.0));
        CHECK(mu[1] == Vec{10, 10});
    }
    SUBCASE("unchanged assignments give unchanged centroids") {
        auto x = two_blobs(9, 10, 0.5);
        auto state = kmeanspp_init(x, 2, 2);
        auto mu1 = update_euclidean_centroids(x, state.assignments, 2);
        auto assign_copy = state.assignments;
        auto mu2 = update_euclidean_centroids(x, assign_copy, 2);
        CHECK(mu1 == mu2);
        CHECK(assign_copy == state.assignments);
    }
    SUBCASE("empty cluster is re-seeded at the farthest point") {
        auto x = from_rows({{0, 0}, {1, 0}, {10, 0}});
        std::vector<int> assign{0, 0, 0};  // cluster 1 empty
        auto mu = update_euclidean_centroids(x, assign, 2);
        // farthest from the mean (11/3, 0) is id 2; it becomes cluster 1
        CHECK(assign == std::vector<int>{0, 0, 1});
        CHECK(mu[1] == Vec{10, 0});
        CHECK(mu[0][0] == doctest::Approx(0.5));
    }
}

TEST_CASE("run_micro_phase") {
    SUBCASE("budget 0 is a no-op") {
        auto x = two_blobs(4, 8, 0.5);
        auto state = kmeanspp_init(x, 2, 1);
        auto before = state;
        auto res = run_micro_phase(x, state, CostContext{}, 0, 1e-4);
        CHECK(res.steps == 0);
        CHECK(state.assignments == before.assignments);
        CHECK(state.mu == before.mu);
    }
    SUBCASE("equivalent to an independent Lloyd implementation") {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> u(-10, 10);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Vec> rows(60, Vec(4));
            for (auto& r : rows)
                for (auto& v : r) v = u(rng);
            auto x = from_rows(rows);
            auto state = kmeanspp_init(x, 3, trial * 13 + 1);

            // independent reference: plain Lloyd from the same start
            std::vector<int> ref_assign = state.assignments;
            std::vector<Vec> ref_mu = state.mu;
            for (int step = 0; step < 100; ++step) {
                std::vector<Vec> next(3, Vec(4, 0.0));
                std::vector<int> counts(3, 0);
                for (size_t i = 0; i < rows.size(); ++i) {
                    ++counts[ref_assign[i]];
                    for (int j = 0; j < 4; ++j) next[ref_assign[i]][j] += rows[i][j];
                }
                bool empty = false;
                for (int c = 0; c < 3; ++c) {
                    if (counts[c] == 0) empty = true;
                    else
                        for (int j = 0; j < 4; ++j) next[c][j] /= counts[c];
                }
                REQUIRE_FALSE(empty);  // this fixture never empties a cluster
                double shift = 0;
                for (int c = 0; c < 3; ++c)
                    shift = std::max(shift, std::sqrt(squared_euclidean(next[c], ref_mu[c])));
                ref_mu = next;
                if (shift < 1e-4) break;
                for (size_t i = 0; i < rows.size(); ++i) {
                    int best = 0;
                    double bd = squared_euclidean(rows[i], ref_mu[0]);
                    for (int c = 1; c < 3; ++c) {
                        double dd = squared_euclidean(rows[i], ref_mu[c]);
                        if (dd < bd) {
                            bd = dd;
                            best = c;
                        }
                    }
                    ref_assign[i] = best;
                }
            }

            run_micro_phase(x, state, CostContext{}, 100, 1e-4);
            CHECK(state.assignments == ref_assign);
        }
    }
    SUBCASE("objective is non-increasing across assign steps") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-3, 3);
        std::vector<Vec> rows(50, Vec(3));
        for (auto& r : rows)
            for (auto& v : r) v = u(rng);
        auto x = from_rows(rows);
        auto state = kmeanspp_init(x, 4, 9);
        auto res = run_micro_phase(x, state, CostContext{}, 100, 0.0);
        for (size_t i = 1; i < res.objectives.size(); ++i)
            CHECK(res.objectives[i] <= res.objectives[i - 1] + 1e-9);
    }
}
