#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/model.hpp"

namespace chshforge {

struct TrialRecord {
    std::uint64_t n = 0; // 1-based trial index
    int pair = 0;        // 0..3
    int a_out = 0;       // -1 or +1
    int b_out = 0;

    bool operator==(const TrialRecord&) const = default;
};

// Schedule helpers. A schedule is a pair index per trial.
std::vector<int> round_robin_schedule(std::size_t n_trials);
std::vector<int> uniform_schedule(std::uint64_t seed, std::size_t n_trials);
// n_per_pair trials of pair 0, then pair 1, 2, 3.
std::vector<int> blocked_schedule(std::size_t n_per_pair);

// Event-by-event run: trial t draws its own point from the weights on
// substream (seed, t) and reads both outcomes from the tables. The hidden
// variable is sampled fresh each trial, independent of the settings.
std::vector<TrialRecord> run_trials(const LhvModel& model, const std::vector<int>& schedule,
                                    std::uint64_t seed);

struct PairStats {
    double mean = 0.0;
    double stderr_ = 0.0; // sample std of the products / sqrt(count)
    std::uint64_t count = 0;
};

// Mean product and standard error per pair; pairs with no records stay
// empty.
std::array<std::optional<PairStats>, 4> empirical_correlations(
    const std::vector<TrialRecord>& records);

// (s_hat, s_stderr) from the four per-pair means with the fixed sign
// pattern; s_stderr adds the per-pair errors in quadrature. Throws
// DomainError listing any pair with no records.
std::pair<double, double> empirical_chsh(const std::vector<TrialRecord>& records);

struct FluctuationReport {
    double exact_s = 0.0; // the model's theoretical S, always in [-2, 2]
    std::uint64_t n_per_pair = 0;
    std::uint64_t runs = 0;
    std::uint64_t exceed_count = 0; // runs with |s_hat| > 2
    double fraction = 0.0;
};

// Repeated finite-N experiments on one fixed model. A positive fraction
// here is estimator noise, not a bound violation: the report carries the
// exact S alongside so the two never get conflated.
FluctuationReport fluctuation_demo(const LhvModel& model, std::uint64_t n_per_pair,
                                   std::uint64_t runs, std::uint64_t seed);

// "n,pair,a_out,b_out" header plus one row per record.
std::string trials_to_csv(const std::vector<TrialRecord>& records);

// Exact-vs-empirical comparison per pair plus s_hat and its error; exact
// values are omitted when `model` is null.
std::string empirical_report_json(const std::vector<TrialRecord>& records,
                                  const LhvModel* model);

std::string fluctuation_report_json(const FluctuationReport& report);

} // namespace chshforge
