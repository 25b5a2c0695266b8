#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "nilc/llm.hpp"

using namespace nilc;

TEST_CASE("summary prompt rendering") {
    SUBCASE("single exemplar is numbered") {
        auto req = render_summary_prompt({"book flight"});
        CHECK(req.kind == PromptKind::Summary);
        CHECK(req.body.find("1. book flight\n") != std::string::npos);
        CHECK(req.echo_payload == "book flight");
    }
    SUBCASE("ten exemplars appear in order") {
        std::vector<std::string> ex;
        for (int i = 0; i < 10; ++i) ex.push_back("utterance " + std::to_string(i));
        auto req = render_summary_prompt(ex);
        size_t last = 0;
        for (int i = 0; i < 10; ++i) {
            auto pos = req.body.find(std::to_string(i + 1) + ". utterance " + std::to_string(i));
            REQUIRE(pos != std::string::npos);
            CHECK(pos > last);
            last = pos;
        }
    }
    SUBCASE("rendering is byte-deterministic") {
        auto a = render_summary_prompt({"x", "y"});
        auto b = render_summary_prompt({"x", "y"});
        CHECK(a.body == b.body);
    }
    SUBCASE("no exemplars rejected") {
        CHECK_THROWS(render_summary_prompt({}));
    }
}

TEST_CASE("refine prompt rendering") {
    ClusterContext home{3, "flight booking", {"book a flight", "buy tickets"}};
    std::vector<ClusterContext> nbrs{{1, "restaurants", {"reserve a table"}},
                                     {2, "weather", {"will it rain"}}};
    auto req = render_refine_prompt("cheap red eye", home, nbrs);
    CHECK(req.kind == PromptKind::Refine);
    auto home_pos = req.body.find("Home cluster 3:");
    auto n1_pos = req.body.find("Neighboring cluster 1:");
    auto n2_pos = req.body.find("Neighboring cluster 2:");
    auto utt_pos = req.body.find("Utterance: \"cheap red eye\"");
    REQUIRE(home_pos != std::string::npos);
    REQUIRE(n1_pos != std::string::npos);
    REQUIRE(n2_pos != std::string::npos);
    REQUIRE(utt_pos != std::string::npos);
    CHECK(home_pos < n1_pos);
    CHECK(n1_pos < n2_pos);
    CHECK(n2_pos < utt_pos);
    CHECK(req.body.find("judged_cluster") != std::string::npos);
    auto again = render_refine_prompt("cheap red eye", home, nbrs);
    CHECK(req.body == again.body);
}

TEST_CASE("map prompt rendering") {
    auto req = render_map_prompt({"travel", "food"}, {"s0", "s1", "s2"});
    CHECK(req.kind == PromptKind::Map);
    CHECK(req.body.find("- travel\n") != std::string::npos);
    CHECK(req.body.find("- food\n") != std::string::npos);
    CHECK(req.body.find("0. s0\n") != std::string::npos);
    CHECK(req.body.find("2. s2\n") != std::string::npos);
    auto again = render_map_prompt({"travel", "food"}, {"s0", "s1", "s2"});
    CHECK(req.body == again.body);
}

TEST_CASE("parse_refine_response") {
    SUBCASE("plain json") {
        auto [judged, text] = parse_refine_response(R"({"judged_cluster": 3, "rewritten": "better"})");
        CHECK(judged == 3);
        CHECK(text == "better");
    }
    SUBCASE("fenced block with prose") {
        auto [judged, text] = parse_refine_response(
            "Sure! Here you go:\n```json\n{\"judged_cluster\": -1, \"rewritten\": \"ok\"}\n```");
        CHECK(judged == -1);
        CHECK(text == "ok");
    }
    SUBCASE("refusal text is a parse error") {
        CHECK_THROWS_AS(parse_refine_response("I cannot help"), ParseError);
    }
    SUBCASE("wrong types are parse errors") {
        CHECK_THROWS_AS(parse_refine_response(R"({"judged_cluster": "x", "rewritten": "ok"})"),
                        ParseError);
        CHECK_THROWS_AS(parse_refine_response(R"({"judged_cluster": 1, "rewritten": 7})"),
                        ParseError);
    }
    SUBCASE("nested braces inside strings survive extraction") {
        auto [judged, text] =
            parse_refine_response(R"(noise {"judged_cluster": 0, "rewritten": "use { and }"})");
        CHECK(judged == 0);
        CHECK(text == "use { and }");
    }
}

TEST_CASE("parse_map_response") {
    SUBCASE("valid map") {
        auto m = parse_map_response(R"({"travel": 1, "food": 0})", 2, 3);
        CHECK(m.at("travel") == 1);
        CHECK(m.at("food") == 0);
    }
    SUBCASE("fenced map") {
        auto m = parse_map_response("```json\n{\"a\": 2}\n```", 1, 3);
        CHECK(m.at("a") == 2);
    }
    SUBCASE("garbage") { CHECK_THROWS_AS(parse_map_response("nope", 1, 3), ParseError); }
}

TEST_CASE("mock script behaviour") {
    SUBCASE("echo default answers with the designated payload") {
        auto llm = LlmClient::mock(MockScript::echo());
        auto req = render_summary_prompt({"hello world"});
        CHECK(llm.complete(req) == "hello world");
    }
    SUBCASE("fixed default") {
        MockScript s;
        s.default_mode = MockScript::Default::Fixed;
        s.fixed_text = "always this";
        auto llm = LlmClient::mock(s);
        CHECK(llm.complete(render_summary_prompt({"x"})) == "always this");
    }
    SUBCASE("first matching rule wins and kind must match") {
        MockScript s;
        s.rules.push_back({PromptKind::Refine, "alpha", "refine-hit"});
        s.rules.push_back({PromptKind::Summary, "alpha", "summary-hit-1"});
        s.rules.push_back({PromptKind::Summary, "alpha", "summary-hit-2"});
        auto llm = LlmClient::mock(s);
        CHECK(llm.complete(render_summary_prompt({"alpha beta"})) == "summary-hit-1");
    }
    SUBCASE("scripts load from JSON") {
        auto s = MockScript::parse(
            R"({"default": "fixed", "fixed_text": "ft",
                "rules": [{"kind": "refine", "contains": "x", "response": "r"}]})",
            "test");
        CHECK(s.default_mode == MockScript::Default::Fixed);
        CHECK(s.fixed_text == "ft");
        REQUIRE(s.rules.size() == 1);
        CHECK(s.rules[0].kind == PromptKind::Refine);
    }
    SUBCASE("mock determinism across clients") {
        MockScript s;
        s.rules.push_back({PromptKind::Summary, "", "stable"});
        auto a = LlmClient::mock(s);
        auto b = LlmClient::mock(s);
        auto req = render_summary_prompt({"q"});
        CHECK(a.complete(req) == b.complete(req));
    }
}

TEST_CASE("template files override the built-in wording") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "nilc_tmpl_test";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "summary.txt");
        f << "CUSTOM HEADER\n{{exemplars}}END\n";
    }
    auto t = PromptTemplates::load(dir.string());
    auto req = render_summary_prompt({"hello"}, t);
    CHECK(req.body.find("CUSTOM HEADER") != std::string::npos);
    CHECK(req.body.find("1. hello") != std::string::npos);
    // untouched templates keep their defaults
    CHECK(t.refine == PromptTemplates::defaults().refine);
    fs::remove_all(dir);
}

TEST_CASE("ledger records every interaction") {
    auto llm = LlmClient::mock(MockScript::echo());
    llm.set_iteration(2);
    llm.complete(render_summary_prompt({"a"}));
    llm.complete(render_refine_prompt("u", ClusterContext{0, "s", {"e"}}, {}));
    auto ledger = llm.ledger();
    REQUIRE(ledger.size() == 2);
    CHECK(ledger[0].kind == "summary");
    CHECK(ledger[1].kind == "refine");
    CHECK(ledger[0].iteration == 2);
    CHECK(ledger[0].prompt_bytes > 0);
    CHECK(ledger[0].ok);
}

TEST_CASE("http transport") {
    // local server: 429 twice, then a well-formed completion
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        nlohmann::json body{
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "hi there"}}}}}}};
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    SUBCASE("recovers after two 429s") {
        LlmConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
        cfg.backoff_ms = 1.0;
        auto llm = LlmClient::from_config(cfg);
        auto req = render_summary_prompt({"x"});
        req.max_retries = 3;
        CHECK(llm.complete(req) == "hi there");
        auto ledger = llm.ledger();
        REQUIRE(ledger.size() == 1);
        CHECK(ledger[0].attempts == 3);
    }

    server.stop();
    worker.join();

    SUBCASE("dead endpoint raises a transport error after retries") {
        LlmConfig cfg;
        cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
        cfg.backoff_ms = 1.0;
        auto llm = LlmClient::from_config(cfg);
        auto req = render_summary_prompt({"x"});
        req.max_retries = 1;
        CHECK_THROWS_AS(llm.complete(req), TransportError);
        auto ledger = llm.ledger();
        REQUIRE(ledger.size() == 1);
        CHECK_FALSE(ledger[0].ok);
    }
}
