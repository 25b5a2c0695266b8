#include <doctest.h>

#include <algorithm>
#include <random>

#include "nilc/clustering.hpp"
#include "nilc/numerics.hpp"
#include "nilc/semisup.hpp"

using namespace nilc;

namespace {

EmbeddingMatrix from_rows(const std::vector<Vec>& rows) {
    EmbeddingMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) m.set_row(static_cast<int>(i), rows[i]);
    return m;
}

Vec random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n(0, 1);
    Vec v(d);
    for (auto& x : v) x = n(rng);
    double norm = l2_norm(v);
    for (auto& x : v) x /= norm;
    return v;
}

// all injections of M seeds into K targets, minimizing cosine dissimilarity
std::vector<int> brute_force_injection(const std::vector<Vec>& seeds,
                                       const std::vector<Vec>& targets) {
    const int m = static_cast<int>(seeds.size());
    const int k = static_cast<int>(targets.size());
    std::vector<int> cols(k);
    for (int j = 0; j < k; ++j) cols[j] = j;
    double best = 1e18;
    std::vector<int> best_vec;
    do {
        double total = 0;
        for (int j = 0; j < m; ++j) total += 1.0 - cosine(seeds[j], targets[cols[j]]);
        std::vector<int> vec(cols.begin(), cols.begin() + m);
        if (total < best - 1e-12 || (std::abs(total - best) <= 1e-12 && vec < best_vec)) {
            best = total;
            best_vec = vec;
        }
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best_vec;
}

}  // namespace

TEST_CASE("build_labeled_subset collects intents in first-appearance order") {
    std::vector<Utterance> data{{0, "a", "travel"}, {1, "b", std::nullopt}, {2, "c", "food"},
                                {3, "d", "travel"}};
    auto subset = build_labeled_subset(data);
    CHECK(subset.known_intents == std::vector<std::string>{"travel", "food"});
    CHECK(subset.members[0] == std::vector<int>{0, 3});
    CHECK(subset.members[1] == std::vector<int>{2});
}

TEST_CASE("compute_seed_centroids") {
    auto x = from_rows({{1, 0}, {0, 0}, {0, 2}, {3, 0}});
    SUBCASE("singleton intent equals its row") {
        LabeledSubset s;
        s.known_intents = {"a"};
        s.members = {{2}};
        auto seeds = compute_seed_centroids(s, x);
        CHECK(seeds[0] == Vec{0, 2});
    }
    SUBCASE("symmetric pair gives the midpoint") {
        LabeledSubset s;
        s.known_intents = {"a"};
        s.members = {{0, 3}};
        auto seeds = compute_seed_centroids(s, x);
        CHECK(seeds[0] == Vec{2, 0});
    }
    SUBCASE("three members match the mean oracle") {
        LabeledSubset s;
        s.known_intents = {"a"};
        s.members = {{0, 2, 3}};
        auto seeds = compute_seed_centroids(s, x);
        CHECK(seeds[0][0] == doctest::Approx(4.0 / 3.0));
        CHECK(seeds[0][1] == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("empty intent is an error") {
        LabeledSubset s;
        s.known_intents = {"a"};
        s.members = {{}};
        CHECK_THROWS(compute_seed_centroids(s, x));
    }
}

TEST_CASE("seed_align") {
    SUBCASE("recovers a permutation when initial centroids equal the seeds") {
        std::mt19937_64 rng(3);
        std::vector<Vec> seeds;
        for (int i = 0; i < 4; ++i) seeds.push_back(random_unit(rng, 6));
        std::vector<Vec> initial{seeds[2], seeds[0], seeds[3], seeds[1]};
        auto res = seed_align(initial, seeds);
        CHECK(res.intent_to_cluster == std::vector<int>{1, 3, 0, 2});
        for (size_t j = 0; j < seeds.size(); ++j)
            CHECK(res.centroids[res.intent_to_cluster[j]] == seeds[j]);
    }
    SUBCASE("M=1 replaces the most cosine-similar initial centroid") {
        std::vector<Vec> initial{{1, 0}, {0.7, 0.7}, {0, 1}};
        std::vector<Vec> seeds{{0.1, 1.0}};
        auto res = seed_align(initial, seeds);
        CHECK(res.intent_to_cluster == std::vector<int>{2});
        CHECK(res.centroids[2] == seeds[0]);
        CHECK(res.centroids[0] == initial[0]);
        CHECK(res.centroids[1] == initial[1]);
    }
    SUBCASE("random M=3 K=5 fixtures match brute force over all injections") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Vec> seeds, initial;
            for (int j = 0; j < 3; ++j) seeds.push_back(random_unit(rng, 5));
            for (int j = 0; j < 5; ++j) initial.push_back(random_unit(rng, 5));
            auto res = seed_align(initial, seeds);
            CHECK(res.intent_to_cluster == brute_force_injection(seeds, initial));
        }
    }
    SUBCASE("exactly K - M centroids stay untouched") {
        std::mt19937_64 rng(13);
        std::vector<Vec> seeds, initial;
        for (int j = 0; j < 2; ++j) seeds.push_back(random_unit(rng, 4));
        for (int j = 0; j < 6; ++j) initial.push_back(random_unit(rng, 4));
        auto res = seed_align(initial, seeds);
        int untouched = 0;
        for (int kk = 0; kk < 6; ++kk)
            if (res.centroids[kk] == initial[kk]) ++untouched;
        CHECK(untouched == 4);
    }
}

TEST_CASE("map_similarity") {
    SUBCASE("exact embedding match costs about zero") {
        std::mt19937_64 rng(17);
        std::vector<Vec> theta;
        for (int j = 0; j < 4; ++j) theta.push_back(random_unit(rng, 5));
        std::vector<Vec> seeds{theta[3], theta[1]};
        auto m = map_similarity(seeds, theta, 1);
        CHECK(m.intent_to_cluster == std::vector<int>{3, 1});
    }
    SUBCASE("M=2 K=3 fixtures match brute force") {
        std::mt19937_64 rng(19);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Vec> seeds, theta;
            for (int j = 0; j < 2; ++j) seeds.push_back(random_unit(rng, 4));
            for (int j = 0; j < 3; ++j) theta.push_back(random_unit(rng, 4));
            auto m = map_similarity(seeds, theta, 1);
            CHECK(m.intent_to_cluster == brute_force_injection(seeds, theta));
        }
    }
    SUBCASE("degenerate equal-similarity targets break ties lexicographically") {
        std::vector<Vec> theta{{1, 0}, {1, 0}, {1, 0}};
        std::vector<Vec> seeds{{1, 0}, {1, 0}};
        auto m = map_similarity(seeds, theta, 1);
        CHECK(m.intent_to_cluster == std::vector<int>{0, 1});
    }
}

TEST_CASE("map_llm") {
    std::vector<std::string> intents{"travel", "food"};
    std::vector<std::string> summaries{"meals and dining", "trips and flights", "weather"};
    std::mt19937_64 rng(23);
    std::vector<Vec> seeds, theta;
    for (int j = 0; j < 2; ++j) seeds.push_back(random_unit(rng, 4));
    for (int j = 0; j < 3; ++j) theta.push_back(random_unit(rng, 4));

    SUBCASE("a valid bijection is taken verbatim") {
        MockScript script;
        script.rules.push_back({PromptKind::Map, "", R"({"travel": 1, "food": 0})"});
        auto llm = LlmClient::mock(script);
        auto m = map_llm(llm, intents, summaries, seeds, theta, 1);
        CHECK(m.intent_to_cluster == std::vector<int>{1, 0});
        CHECK(m.strategy == MappingStrategy::LLM);
        CHECK_FALSE(m.fallback_used);
    }
    SUBCASE("duplicate clusters trigger the similarity fallback") {
        MockScript script;
        script.rules.push_back({PromptKind::Map, "", R"({"travel": 1, "food": 1})"});
        auto llm = LlmClient::mock(script);
        auto m = map_llm(llm, intents, summaries, seeds, theta, 1);
        CHECK(m.fallback_used);
        CHECK(m.strategy == MappingStrategy::Similarity);
        CHECK(m.intent_to_cluster == map_similarity(seeds, theta, 1).intent_to_cluster);
    }
    SUBCASE("garbage responses fall back after retries") {
        MockScript script;
        script.default_mode = MockScript::Default::Fixed;
        script.fixed_text = "I cannot help with that";
        auto llm = LlmClient::mock(script);
        auto m = map_llm(llm, intents, summaries, seeds, theta, 1);
        CHECK(m.fallback_used);
        CHECK(m.fallback_reason.find("map_parse_failed") == 0);
        CHECK(llm.ledger().size() == 3);  // three parse attempts
    }
    SUBCASE("a mock emitting the similarity-optimal mapping matches map_similarity") {
        auto sim = map_similarity(seeds, theta, 1);
        std::string payload = "{\"travel\": " + std::to_string(sim.intent_to_cluster[0]) +
                              ", \"food\": " + std::to_string(sim.intent_to_cluster[1]) + "}";
        MockScript script;
        script.rules.push_back({PromptKind::Map, "", payload});
        auto llm = LlmClient::mock(script);
        auto m = map_llm(llm, intents, summaries, seeds, theta, 1);
        CHECK(m.intent_to_cluster == sim.intent_to_cluster);
    }
}

TEST_CASE("supervised_term") {
    std::vector<Vec> seeds{{0, 1}};
    auto mapping = IntentMapping::build({2}, 4, MappingStrategy::Similarity, 1);
    SUBCASE("unmapped cluster contributes zero") {
        CHECK(supervised_term(Vec{1, 0}, 0, mapping, seeds) == 0.0);
    }
    SUBCASE("perfect alignment contributes zero") {
        CHECK(supervised_term(Vec{0, 2}, 2, mapping, seeds) == doctest::Approx(0.0));
    }
    SUBCASE("orthogonal vector contributes one") {
        CHECK(supervised_term(Vec{1, 0}, 2, mapping, seeds) == doctest::Approx(1.0));
    }
}

TEST_CASE("gamma zero makes semi-supervised assignments match unsupervised") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<Vec> rows(30, Vec(3));
    for (auto& r : rows)
        for (auto& v : r) v = u(rng);
    EmbeddingMatrix x = from_rows(rows);
    auto state = kmeanspp_init(x, 3, 7);
    std::vector<Vec> seeds{random_unit(rng, 3)};
    auto mapping = IntentMapping::build({1}, 3, MappingStrategy::Similarity, 1);

    CostContext without;
    CostContext with;
    with.mapping = &mapping;
    with.seeds = &seeds;
    with.weights.gamma = 0.0;
    auto a = assign_all(x, state, without);
    auto b = assign_all(x, state, with);
    CHECK(a.assignments == b.assignments);
}

TEST_CASE("intent mappings are injective by construction") {
    CHECK_THROWS(IntentMapping::build({0, 0}, 3, MappingStrategy::Similarity, 1));
    CHECK_THROWS(IntentMapping::build({0, 5}, 3, MappingStrategy::Similarity, 1));
    auto m = IntentMapping::build({2, 0}, 3, MappingStrategy::Similarity, 1);
    CHECK(m.cluster_to_intent == std::vector<int>{1, -1, 0});
}
