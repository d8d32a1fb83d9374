#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/model.hpp"
#include "core/pool.hpp"
#include "core/rng.hpp"
#include "test_models.hpp"

using namespace chshforge;

namespace {

// Reference correlation: plain left-to-right sum with local column lookup,
// sharing no code with the library path.
double naive_correlation(const LhvModel& m, const std::string& a, const std::string& b) {
    std::size_t ca = 0, cb = 0;
    while (m.universe.alice_settings[ca] != a) ++ca;
    while (m.universe.bob_settings[cb] != b) ++cb;
    double e = 0.0;
    for (std::size_t p = 0; p < m.space.points.size(); ++p) {
        e += m.space.weights[p] * m.alice(p, ca) * m.bob(p, cb);
    }
    return e;
}

double naive_chsh(const LhvModel& m) {
    const auto& u = m.universe;
    return naive_correlation(m, u.quartet_alice[0], u.quartet_bob[0])
         - naive_correlation(m, u.quartet_alice[0], u.quartet_bob[1])
         - naive_correlation(m, u.quartet_alice[1], u.quartet_bob[0])
         - naive_correlation(m, u.quartet_alice[1], u.quartet_bob[1]);
}

// A universe with settings beyond the quartet.
SettingUniverse wide_universe() {
    SettingUniverse u;
    u.alice_settings = {"a1", "a2", "a3"};
    u.bob_settings = {"b0", "b1", "b2", "b3"};
    u.quartet_alice = {"a1", "a2"};
    u.quartet_bob = {"b1", "b2"};
    return u;
}

} // namespace

TEST_CASE("validate: smallest legal model passes") {
    const auto m = make_model(HiddenSpace{{"p0"}, {1.0}}, minimal_universe(),
                              {{1, 1}}, {{1, 1}});
    const auto report = validate_model(m);
    CHECK(report.ok());
    for (const auto& f : report.findings) CHECK(f.passed);
}

TEST_CASE("validate: weights that do not sum to one fail normalization") {
    auto m = make_model(HiddenSpace{{"p0", "p1"}, {0.5, 0.6}}, minimal_universe(),
                        {{1, 1}, {1, 1}}, {{1, 1}, {1, 1}});
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok());
    bool hit = false;
    for (const auto& f : report.findings) {
        if (f.check == "normalized") {
            hit = true;
            CHECK_FALSE(f.passed);
        } else {
            CHECK(f.passed);
        }
    }
    CHECK(hit);
}

TEST_CASE("validate: zero table entry fails the output-range check") {
    auto m = testmodels::all_plus();
    m.alice_table[1] = 0;
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok());
    bool hit = false;
    for (const auto& f : report.findings) {
        if (f.field == "A" && f.check == "output_range") {
            hit = true;
            CHECK_FALSE(f.passed);
        }
    }
    CHECK(hit);
}

TEST_CASE("validate: structural problems are findings, not exceptions") {
    auto m = testmodels::all_plus();
    m.bob_table.pop_back();
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok());
    bool hit = false;
    for (const auto& f : report.findings) {
        if (f.field == "B" && f.check == "shape" && !f.passed) hit = true;
    }
    CHECK(hit);

    auto bad_weights = testmodels::all_plus();
    bad_weights.space.weights.pop_back();
    CHECK_FALSE(validate_model(bad_weights).ok());

    SettingUniverse u = minimal_universe();
    u.quartet_alice = {"a1", "a1"};
    CHECK_FALSE(validate_universe(u).ok());

    SettingUniverse v = minimal_universe();
    v.quartet_bob = {"b1", "nope"};
    CHECK_FALSE(validate_universe(v).ok());
}

TEST_CASE("validate: negative weight fails") {
    auto m = make_model(HiddenSpace{{"p0", "p1"}, {1.5, -0.5}}, minimal_universe(),
                        {{1, 1}, {1, 1}}, {{1, 1}, {1, 1}});
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok());
}

TEST_CASE("correlation: constant +1 tables give E = +1") {
    const auto m = testmodels::all_plus();
    CHECK(correlation(m, "a1", "b1") == 1.0);
    CHECK(correlation(m, "a2", "b2") == 1.0);
}

TEST_CASE("correlation: two-point split reaches 1/sqrt(2)") {
    // weights (p, 1-p) with p = (1 + 1/sqrt(2))/2; A constant +1,
    // B(.,b1) = (+1, -1): E = p - (1-p) = 2p - 1 = 1/sqrt(2).
    const double c = 1.0 / std::sqrt(2.0);
    const double p = (1.0 + c) / 2.0;
    const auto m = make_model(HiddenSpace{{"p0", "p1"}, {p, 1.0 - p}}, minimal_universe(),
                              {{1, 1}, {1, 1}}, {{1, 1}, {-1, 1}});
    const double direct = p * 1.0 * 1.0 + (1.0 - p) * 1.0 * (-1.0);
    const double got = correlation(m, "a1", "b1");
    CHECK(got == direct);
    CHECK(std::fabs(got - c) <= 1e-15);
    CHECK(std::fabs(got - 0.7071067811865476) <= 1e-15);
}

TEST_CASE("correlation: mirrored tables give E = -1") {
    const auto m = make_model(HiddenSpace{{"p0", "p1"}, {0.25, 0.75}}, minimal_universe(),
                              {{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}});
    CHECK(correlation(m, "a1", "b1") == -1.0);
    CHECK(correlation(m, "a2", "b2") == -1.0);
}

TEST_CASE("correlation: unknown setting raises a domain error naming it") {
    const auto m = testmodels::all_plus();
    CHECK_THROWS_WITH_AS(correlation(m, "a9", "b1"),
                         doctest::Contains("a9"), DomainError);
    CHECK_THROWS_WITH_AS(correlation(m, "a1", "zz"),
                         doctest::Contains("zz"), DomainError);
}

TEST_CASE("chsh: all-plus model scores -2") {
    CHECK(chsh_value(testmodels::all_plus()) == -2.0);
}

TEST_CASE("chsh: deterministic extremal strategy scores +2") {
    CHECK(chsh_value(testmodels::extremal_point()) == 2.0);
}

TEST_CASE("chsh: the (1,-1,0,0) model scores 2, matching the 8-term expansion") {
    const auto m = testmodels::three_correlation();
    const auto e = quartet_correlations(m);
    CHECK(e[0] == 1.0);
    CHECK(e[1] == -1.0);
    CHECK(e[2] == 0.0);
    CHECK(e[3] == 0.0);
    CHECK(chsh_value(m) == 2.0);
    CHECK(chsh_value(m) == naive_chsh(m));
}

TEST_CASE("integrand: per-point values follow A1(B1-B2) - A2(B1+B2)") {
    // B1 = B2 = +1 kills the first term: value = -2 * A2.
    const auto flat = make_model(HiddenSpace{{"p0"}, {1.0}}, minimal_universe(),
                                 {{1, 1}}, {{1, 1}});
    CHECK(integrand_values(flat).at(0).value == -2);

    // B1 = -B2 kills the second term: value = +2 * A1 * B1.
    const auto split = testmodels::extremal_point();
    CHECK(integrand_values(split).at(0).value == 2);

    // A1 = -1, A2 = +1, B1 = B2 = -1: -1*0 - 1*(-2) = +2.
    const auto mixed = make_model(HiddenSpace{{"p0"}, {1.0}}, minimal_universe(),
                                  {{-1, 1}}, {{-1, -1}});
    CHECK(integrand_values(mixed).at(0).value == 2);
}

TEST_CASE("integrand: weighted mean equals S on random models") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t size = 1 + static_cast<std::size_t>(seed % 17);
        const auto m = random_model(mix64(seed), size,
                                    seed % 3 == 0 ? wide_universe() : minimal_universe());
        const auto values = integrand_values(m);
        REQUIRE(values.size() == m.space.points.size());
        double mean = 0.0;
        for (std::size_t p = 0; p < values.size(); ++p) {
            CHECK((values[p].value == 2 || values[p].value == -2));
            mean += m.space.weights[p] * values[p].value;
        }
        CHECK(std::fabs(mean - chsh_value(m)) <= 1e-12);
    }
}

TEST_CASE("chsh bound: 1e5 random models stay inside [-2, 2]") {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const std::size_t size = 1 + static_cast<std::size_t>(i % 32);
        const auto m = random_model(substream_seed(0xB0D5EEDull, i), size, minimal_universe());
        const double s = chsh_value(m); // throws BoundViolation on a breach
        worst = std::max(worst, std::fabs(s));
    }
    CHECK(worst <= 2.0 + 1e-12);
    MESSAGE("max |S| over 1e5 random models: ", worst);
}

TEST_CASE("correlation is linear in the weights") {
    SplitMix64 rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t size = 2 + static_cast<std::size_t>(rng.next_below(14));
        auto a = random_model(rng.next_u64(), size, minimal_universe());
        auto b = a;
        b.space.weights = random_model(rng.next_u64(), size, minimal_universe()).space.weights;
        for (const double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            auto mixed = a;
            for (std::size_t p = 0; p < size; ++p) {
                mixed.space.weights[p] =
                    alpha * a.space.weights[p] + (1.0 - alpha) * b.space.weights[p];
            }
            for (int pair = 0; pair < kNumPairs; ++pair) {
                const double lhs = correlation_at_pair(mixed, pair);
                const double rhs = alpha * correlation_at_pair(a, pair)
                                 + (1.0 - alpha) * correlation_at_pair(b, pair);
                CHECK(std::fabs(lhs - rhs) <= 1e-12);
            }
        }
    }
}

TEST_CASE("correlations never leave [-1, 1]") {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto m = random_model(substream_seed(7, i), 1 + (i % 9), wide_universe());
        for (const auto& a : m.universe.alice_settings) {
            for (const auto& b : m.universe.bob_settings) {
                CHECK(std::fabs(correlation(m, a, b)) <= 1.0 + 1e-15);
            }
        }
    }
}

TEST_CASE("factorization: product models factorize on every pair") {
    SplitMix64 rng(0xFACull);
    for (int rep = 0; rep < 30; ++rep) {
        ProductLhvModel pm;
        pm.universe = rep % 2 == 0 ? minimal_universe() : wide_universe();
        const std::size_t na = 1 + rng.next_below(5);
        const std::size_t nb = 1 + rng.next_below(5);
        const auto seed_a = random_model(rng.next_u64(), na, pm.universe);
        const auto seed_b = random_model(rng.next_u64(), nb, pm.universe);
        pm.space_a = seed_a.space;
        pm.space_b = seed_b.space;
        pm.alice_table = seed_a.alice_table;
        pm.bob_table = seed_b.bob_table;

        const auto report = factorization_check(pm, 1e-12);
        CHECK(report.all_factorized);

        // Direct expansion over the product space, independent of the
        // lowering code: E(a,b) must equal E_A(a) * E_B(b) term by term.
        const auto lowered = lower_product(pm);
        for (std::size_t ca = 0; ca < pm.universe.alice_settings.size(); ++ca) {
            for (std::size_t cb = 0; cb < pm.universe.bob_settings.size(); ++cb) {
                double joint = 0.0;
                for (std::size_t i = 0; i < na; ++i) {
                    for (std::size_t j = 0; j < nb; ++j) {
                        joint += pm.space_a.weights[i] * pm.space_b.weights[j]
                               * pm.alice_table[i * pm.universe.alice_settings.size() + ca]
                               * pm.bob_table[j * pm.universe.bob_settings.size() + cb];
                    }
                }
                double ea = 0.0, eb = 0.0;
                for (std::size_t i = 0; i < na; ++i) {
                    ea += pm.space_a.weights[i]
                        * pm.alice_table[i * pm.universe.alice_settings.size() + ca];
                }
                for (std::size_t j = 0; j < nb; ++j) {
                    eb += pm.space_b.weights[j]
                        * pm.bob_table[j * pm.universe.bob_settings.size() + cb];
                }
                CHECK(std::fabs(joint - ea * eb) <= 1e-12);
                const double via_model = correlation(lowered, pm.universe.alice_settings[ca],
                                                     pm.universe.bob_settings[cb]);
                CHECK(std::fabs(via_model - joint) <= 1e-12);
            }
        }
        CHECK(validate_model(lowered).ok());
    }
}

TEST_CASE("factorization: a point mass factorizes") {
    const auto report = factorization_check(testmodels::extremal_point(), 1e-12);
    CHECK(report.all_factorized);
}

TEST_CASE("factorization: shared randomness does not factorize") {
    // Two equal points, A1 = B1 = (+1, -1): E(a1,b1) = 1 but both marginals
    // vanish.
    const auto m = make_model(HiddenSpace{{"p0", "p1"}, {0.5, 0.5}}, minimal_universe(),
                              {{1, 1}, {-1, 1}}, {{1, 1}, {-1, 1}});
    const auto report = factorization_check(m, 1e-9);
    CHECK_FALSE(report.all_factorized);
    for (const auto& pf : report.pairs) {
        if (pf.a == "a1" && pf.b == "b1") {
            CHECK(pf.joint == 1.0);
            CHECK(pf.product == 0.0);
            CHECK_FALSE(pf.factorized);
        }
    }
}

TEST_CASE("lower_product rejects nothing it should accept") {
    ProductLhvModel pm;
    pm.universe = minimal_universe();
    pm.space_a = {{"x0", "x1"}, {0.5, 0.5}};
    pm.space_b = {{"y0"}, {1.0}};
    pm.alice_table = {1, 1, -1, -1};
    pm.bob_table = {1, -1};
    const auto lowered = lower_product(pm);
    CHECK(lowered.space.points.size() == 2);
    CHECK(validate_model(lowered).ok());
    const double direct = correlation(lowered, "a1", "b1");
    // E_A(a1) = 0.5 - 0.5 = 0, E_B(b1) = 1: joint must be 0.
    CHECK(direct == 0.0);
}

TEST_CASE("make_model rejects ragged rows") {
    CHECK_THROWS_AS(make_model(HiddenSpace{{"p0", "p1"}, {0.5, 0.5}}, minimal_universe(),
                               {{1, 1}, {1}}, {{1, 1}, {1, 1}}),
                    DomainError);
    CHECK_THROWS_AS(make_model(HiddenSpace{{"p0"}, {1.0}}, minimal_universe(),
                               {{1, 1}}, {}),
                    DomainError);
}
