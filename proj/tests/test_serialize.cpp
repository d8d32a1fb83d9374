#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "core/error.hpp"
#include "core/pool.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "test_models.hpp"

using namespace chshforge;

TEST_CASE("model json: parse(dump(m)) reproduces the numeric content") {
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        SettingUniverse u = minimal_universe();
        if (seed % 2 == 1) {
            u.alice_settings.push_back("spare_a");
            u.bob_settings.push_back("spare_b");
        }
        const auto m = random_model(mix64(seed), 1 + seed % 11, u);
        const auto text = dump_model_json(m);
        const auto back = parse_model_json(text);
        CHECK(back == m);
        // And once more through the full cycle.
        CHECK(parse_model_json(dump_model_json(back)) == m);
    }
}

TEST_CASE("model json: golden file shape") {
    const auto m = testmodels::extremal_point();
    const auto text = dump_model_json(m);
    const auto doc = parse_model_document(text);
    CHECK(doc.points.size() == 1);
    CHECK(doc.weights.at(0) == 1.0);
    CHECK(doc.quartet[0] == "a1");
    CHECK(doc.quartet[3] == "b2");
    CHECK(doc.alice_rows.at(0).size() == 2);
    CHECK(doc.bob_rows.at(0).at(1) == -1.0);
}

TEST_CASE("model json: malformed text raises ParseError") {
    CHECK_THROWS_AS(parse_model_document("{ not json"), ParseError);
    CHECK_THROWS_AS(parse_model_document(""), ParseError);
    CHECK_THROWS_AS(parse_model_document("[1,2,3]"), ParseError);
}

TEST_CASE("model json: missing or mistyped fields raise ParseError") {
    CHECK_THROWS_WITH_AS(parse_model_document(R"({"points":["p0"]})"),
                         doctest::Contains("weights"), ParseError);
    CHECK_THROWS_AS(
        parse_model_document(
            R"({"points":["p0"],"weights":"x","alice_settings":["a1","a2"],)"
            R"("bob_settings":["b1","b2"],)"
            R"("quartet":{"a1":"a1","a2":"a2","b1":"b1","b2":"b2"},)"
            R"("A":[[1,1]],"B":[[1,1]]})"),
        ParseError);
}

TEST_CASE("model json: ragged tables are structural findings") {
    const std::string text =
        R"({"points":["p0","p1"],"weights":[0.5,0.5],)"
        R"("alice_settings":["a1","a2"],"bob_settings":["b1","b2"],)"
        R"("quartet":{"a1":"a1","a2":"a2","b1":"b1","b2":"b2"},)"
        R"("A":[[1,1],[1]],"B":[[1,1],[1,1]]})";
    const auto doc = parse_model_document(text);
    const auto report = validate_document(doc);
    CHECK_FALSE(report.ok());
    bool hit = false;
    for (const auto& f : report.findings) {
        if (f.field == "A" && f.check == "shape" && !f.passed) hit = true;
    }
    CHECK(hit);
    CHECK_THROWS_AS(build_model(doc), DomainError);
}

TEST_CASE("model json: non-unit entries load and then fail validation") {
    const std::string text =
        R"({"points":["p0"],"weights":[1.0],)"
        R"("alice_settings":["a1","a2"],"bob_settings":["b1","b2"],)"
        R"("quartet":{"a1":"a1","a2":"a2","b1":"b1","b2":"b2"},)"
        R"("A":[[0,1]],"B":[[1,1]]})";
    const auto m = parse_model_json(text);
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok());
}

TEST_CASE("model json: unnormalized weights load and then fail validation") {
    const std::string text =
        R"({"points":["p0","p1"],"weights":[0.5,0.6],)"
        R"("alice_settings":["a1","a2"],"bob_settings":["b1","b2"],)"
        R"("quartet":{"a1":"a1","a2":"a2","b1":"b1","b2":"b2"},)"
        R"("A":[[1,1],[1,1]],"B":[[1,1],[1,1]]})";
    const auto m = parse_model_json(text);
    CHECK_FALSE(validate_model(m).ok());
}

TEST_CASE("verify report carries both routes and the integrand table") {
    const auto m = testmodels::three_correlation();
    const auto text = verify_report_json(m, 1e-9);
    CHECK(text.find("\"chsh\"") != std::string::npos);
    CHECK(text.find("chsh_integrand_route") != std::string::npos);
    CHECK(text.find("integrand") != std::string::npos);
    CHECK(text.find("factorization") != std::string::npos);
}
