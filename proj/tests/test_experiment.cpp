#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/pool.hpp"
#include "core/rng.hpp"
#include "test_models.hpp"

using namespace chshforge;

namespace {

LhvModel single_point_all_plus() {
    return make_model(HiddenSpace{{"p0"}, {1.0}}, minimal_universe(),
                      {{1, 1}}, {{1, 1}});
}

// P(sum of 2n fair +-1 steps < 0) = (1 - C(2n,n)/2^2n) / 2, computed
// directly from the binomial coefficient.
double prob_symmetric_walk_negative(int n) {
    long double log_c = 0.0L;
    for (int i = 1; i <= n; ++i) {
        log_c += std::log(static_cast<long double>(n + i))
               - std::log(static_cast<long double>(i));
    }
    const long double p0 = std::exp(log_c - 2.0L * n * std::log(2.0L));
    return static_cast<double>((1.0L - p0) / 2.0L);
}

} // namespace

TEST_CASE("run_trials: a single-point model produces constant outcomes") {
    const auto m = testmodels::extremal_point();
    const auto records = run_trials(m, round_robin_schedule(40), 9);
    REQUIRE(records.size() == 40);
    for (const auto& r : records) {
        CHECK(r.a_out == 1);
        CHECK(r.b_out == (r.pair == kPair12 || r.pair == kPair22 ? -1 : 1));
    }
}

TEST_CASE("run_trials: deterministic in the seed") {
    const auto m = testmodels::three_correlation();
    const auto a = run_trials(m, uniform_schedule(3, 500), 123);
    const auto b = run_trials(m, uniform_schedule(3, 500), 123);
    CHECK(a == b);
    const auto c = run_trials(m, uniform_schedule(3, 500), 124);
    CHECK_FALSE(a == c);
}

TEST_CASE("run_trials: trial indices are 1..N and outputs are signs") {
    const auto m = testmodels::three_correlation();
    const auto records = run_trials(m, blocked_schedule(25), 4);
    REQUIRE(records.size() == 100);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].n == i + 1);
        CHECK((records[i].a_out == 1 || records[i].a_out == -1));
        CHECK((records[i].b_out == 1 || records[i].b_out == -1));
    }
}

TEST_CASE("run_trials: rejects bad schedules") {
    const auto m = testmodels::three_correlation();
    CHECK_THROWS_AS(run_trials(m, {}, 1), DomainError);
    CHECK_THROWS_AS(run_trials(m, {0, 1, 4}, 1), DomainError);
    CHECK_THROWS_AS(run_trials(m, {-1}, 1), DomainError);
}

TEST_CASE("run_trials: empirical means land within 5 sigma of the exact correlations") {
    const double c = 1.0 / std::sqrt(2.0);
    const double p = (1.0 + c) / 2.0;
    const auto m = make_model(HiddenSpace{{"p0", "p1"}, {p, 1.0 - p}}, minimal_universe(),
                              {{1, 1}, {1, 1}}, {{1, 1}, {-1, 1}});
    const std::size_t n = 100000;
    const auto records = run_trials(m, blocked_schedule(n), 2718);
    const auto stats = empirical_correlations(records);
    for (int pair = 0; pair < 4; ++pair) {
        const double exact = correlation_at_pair(m, pair);
        REQUIRE(stats[static_cast<std::size_t>(pair)].has_value());
        const auto& s = *stats[static_cast<std::size_t>(pair)];
        CHECK(s.count == n);
        const double sigma = std::sqrt((1.0 - exact * exact) / static_cast<double>(n));
        CHECK(std::fabs(s.mean - exact) <= 5.0 * sigma + 1e-15);
    }
}

TEST_CASE("empirical_correlations: all-plus products give mean 1 and zero error") {
    std::vector<TrialRecord> records;
    for (std::uint64_t n = 1; n <= 8; ++n) {
        records.push_back({n, kPair11, 1, 1});
    }
    const auto stats = empirical_correlations(records);
    REQUIRE(stats[kPair11].has_value());
    CHECK(stats[kPair11]->mean == 1.0);
    CHECK(stats[kPair11]->stderr_ == 0.0);
    CHECK(stats[kPair11]->count == 8);
    CHECK_FALSE(stats[kPair12].has_value());
}

TEST_CASE("empirical_correlations: balanced +-1 products average to zero") {
    std::vector<TrialRecord> records;
    for (std::uint64_t n = 1; n <= 20; ++n) {
        records.push_back({n, kPair21, 1, n % 2 == 0 ? 1 : -1});
    }
    const auto stats = empirical_correlations(records);
    CHECK(stats[kPair21]->mean == 0.0);
    CHECK(stats[kPair21]->count == 20);
}

TEST_CASE("empirical_correlations: S=2 model means track (1,-1,0,0)") {
    const auto m = testmodels::three_correlation();
    const std::size_t n = 20000;
    const auto records = run_trials(m, blocked_schedule(n), 1234);
    const auto stats = empirical_correlations(records);
    const std::array<double, 4> exact{1.0, -1.0, 0.0, 0.0};
    for (int pair = 0; pair < 4; ++pair) {
        const double sigma =
            std::sqrt((1.0 - exact[static_cast<std::size_t>(pair)]
                             * exact[static_cast<std::size_t>(pair)])
                      / static_cast<double>(n));
        CHECK(std::fabs(stats[static_cast<std::size_t>(pair)]->mean
                        - exact[static_cast<std::size_t>(pair)])
              <= 5.0 * sigma + 1e-15);
    }
}

TEST_CASE("empirical_chsh: deterministic model estimates exactly") {
    const auto m = single_point_all_plus();
    const auto records = run_trials(m, blocked_schedule(50), 77);
    const auto [s_hat, s_err] = empirical_chsh(records);
    CHECK(s_hat == -2.0);
    CHECK(s_err == 0.0);
}

TEST_CASE("empirical_chsh: a missing pair is an error that names it") {
    std::vector<TrialRecord> records{{1, kPair11, 1, 1}, {2, kPair12, 1, 1},
                                     {3, kPair21, 1, 1}};
    CHECK_THROWS_WITH_AS(empirical_chsh(records), doctest::Contains("a2b2"), DomainError);
}

TEST_CASE("empirical_chsh: per-pair sampling of the singlet-target stitch") {
    const auto targets = QuantumTargets::singlet();
    const std::size_t n = 100000;
    std::vector<TrialRecord> records;
    for (int pair = 0; pair < 4; ++pair) {
        const auto part =
            construct_target_model(pair, targets.per_pair[static_cast<std::size_t>(pair)],
                                   minimal_universe());
        const std::vector<int> schedule(n, pair);
        const auto chunk = run_trials(part, schedule, 1000 + static_cast<std::uint64_t>(pair));
        records.insert(records.end(), chunk.begin(), chunk.end());
    }
    const auto [s_hat, s_err] = empirical_chsh(records);
    const double sigma = std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::fabs(s_hat - 2.0 * std::sqrt(2.0)) <= 5.0 * sigma);
    CHECK(s_err > 0.0);
    CHECK(std::fabs(s_err - sigma) <= 0.2 * sigma);
}

TEST_CASE("estimator consistency: s_hat stays within 5 stderr of S") {
    const auto m = random_model(0xC0FFEEull, 8, minimal_universe());
    const double exact = chsh_value(m);
    const std::size_t n = 1000;
    int within = 0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
        const auto records =
            run_trials(m, blocked_schedule(n), substream_seed(55, static_cast<std::uint64_t>(run)));
        const auto [s_hat, s_err] = empirical_chsh(records);
        if (std::fabs(s_hat - exact) <= 5.0 * s_err) ++within;
    }
    CHECK(within >= 99);
}

TEST_CASE("fluctuation_demo: zero-variance estimator never exceeds 2") {
    const auto report = fluctuation_demo(single_point_all_plus(), 50, 100, 5);
    CHECK(report.exceed_count == 0);
    CHECK(report.fraction == 0.0);
    CHECK(report.exact_s == -2.0);
}

TEST_CASE("fluctuation_demo: finite samples of an S=2 model exceed 2 about half the time") {
    const auto m = testmodels::three_correlation();
    const std::uint64_t runs = 2000;
    const auto report = fluctuation_demo(m, 100, runs, 2024);
    CHECK(report.exact_s == 2.0);
    CHECK(report.fraction > 0.0);

    // s_hat > 2 exactly when the 200 products at the two coin-flip pairs
    // sum negative, so the walk probability is the true rate.
    const double reference = prob_symmetric_walk_negative(100);
    CHECK(reference > 0.45);
    CHECK(reference < 0.5);
    const double sigma = std::sqrt(reference * (1.0 - reference) / static_cast<double>(runs));
    CHECK(std::fabs(report.fraction - reference) <= 5.0 * sigma);
    MESSAGE("observed exceed fraction: ", report.fraction, " (walk reference ", reference, ")");
}

TEST_CASE("fluctuation_demo: concentration kills the excess at large N") {
    const auto report = fluctuation_demo(testmodels::s_one_point_five(), 1000000, 50, 12);
    CHECK(report.exact_s == 1.5);
    CHECK(report.fraction < 0.001);
}

TEST_CASE("schedules: shapes and determinism") {
    const auto rr = round_robin_schedule(10);
    REQUIRE(rr.size() == 10);
    CHECK(rr[0] == 0);
    CHECK(rr[5] == 1);

    const auto u1 = uniform_schedule(9, 1000);
    const auto u2 = uniform_schedule(9, 1000);
    CHECK(u1 == u2);

    const auto blocked = blocked_schedule(3);
    CHECK(blocked == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3});
}

TEST_CASE("trial csv: header and row format") {
    const std::vector<TrialRecord> records{{1, kPair11, 1, -1}, {2, kPair22, -1, -1}};
    CHECK(trials_to_csv(records) == "n,pair,a_out,b_out\n1,a1b1,1,-1\n2,a2b2,-1,-1\n");
}
